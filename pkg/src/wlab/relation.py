"""Curvature relations for elliptic Weingarten surfaces.

A relation can be given in mean/Gauss form ``H = g(H**2 - K)`` (a scalar
function ``g`` on ``[0, inf)``) or in principal-curvature form
``k2 = f(k1)`` (a decreasing involution ``f`` on an interval ``I_f``).
This module represents both forms, converts between them, and certifies
ellipticity (``4*t*g'(t)**2 < 1``), uniform ellipticity, minimal type and
the boundedness of the two branches ``t +- g(t**2)``.

All certification is performed on a finite sampling grid; a relation that
passes is "grid-elliptic" and the report records the grid used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import DomainError, EllipticityError, RelationError

DEFAULT_T_MAX = 1.0e4
DEFAULT_SAMPLES = 10_000
SYMMETRY_TOL = 1.0e-8           # |f(f(x)) - x| on sampled grids
MONOTONE_MARGIN = 1.0e-12       # strict monotonicity margin for branch checks
MINIMAL_TOL = 1.0e-10           # |g(0)| below this counts as minimal type
UNIFORM_MARGIN = 1.0e-3         # sup 4t g'^2 <= 1 - margin to declare uniform
_BOUNDED_TAIL_TOL = 0.05        # tail-flatness threshold for branch boundedness


@dataclass(frozen=True)
class Interval:
    """A (possibly half-infinite) interval of the real line."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise RelationError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def is_full_line(self) -> bool:
        return math.isinf(self.lo) and math.isinf(self.hi)

    def contains(self, x, tol: float = 0.0):
        x = np.asarray(x, dtype=float)
        return (x >= self.lo - tol) & (x <= self.hi + tol)

    def to_json(self) -> list:
        enc = lambda v: v if math.isfinite(v) else ("inf" if v > 0 else "-inf")
        return [enc(self.lo), enc(self.hi)]

    @staticmethod
    def from_json(obj) -> "Interval":
        dec = lambda v: float(v)
        return Interval(dec(obj[0]), dec(obj[1]))


FULL_LINE = Interval(-math.inf, math.inf)
HALF_LINE = Interval(0.0, math.inf)

# ---------------------------------------------------------------------------
# Scalar functions
# ---------------------------------------------------------------------------

# name -> params -> (value, derivative) callables, both numpy-vectorized
_CLOSED_FORMS: dict = {}


def _register(name):
    def wrap(builder):
        _CLOSED_FORMS[name] = builder
        return builder
    return wrap


@_register("constant")
def _build_constant(p):
    c = float(p["value"])
    return (lambda x: np.full_like(np.asarray(x, dtype=float), c),
            lambda x: np.zeros_like(np.asarray(x, dtype=float)))


@_register("affine")
def _build_affine(p):
    a, b = float(p["intercept"]), float(p["slope"])
    return (lambda x: a + b * np.asarray(x, dtype=float),
            lambda x: np.full_like(np.asarray(x, dtype=float), b))


@_register("mobius")
def _build_mobius(p):
    # (delta - alpha*x) / (alpha + beta*x); derivative -(alpha^2+beta*delta)/(alpha+beta*x)^2
    al, be, de = float(p["alpha"]), float(p["beta"]), float(p["delta"])
    disc = al * al + be * de
    return (lambda x: (de - al * np.asarray(x, dtype=float)) / (al + be * np.asarray(x, dtype=float)),
            lambda x: -disc / (al + be * np.asarray(x, dtype=float)) ** 2)


@_register("sqrt_offset")
def _build_sqrt_offset(p):
    # scale*sqrt(x + offset) + shift; derivative diverges at x = -offset
    c, e, d = float(p["scale"]), float(p["offset"]), float(p["shift"])

    def deriv(x):
        with np.errstate(divide="ignore"):
            return c / (2.0 * np.sqrt(np.asarray(x, dtype=float) + e))

    return (lambda x: c * np.sqrt(np.asarray(x, dtype=float) + e) + d, deriv)


def _check_domain(domain: Interval, x, what: str):
    x = np.asarray(x, dtype=float)
    ok = domain.contains(x, tol=1e-12)
    if not np.all(ok):
        bad = np.atleast_1d(x)[~np.atleast_1d(ok)]
        raise DomainError(
            f"{what} evaluated at {bad.flat[0]:.17g} outside domain "
            f"[{domain.lo:g}, {domain.hi:g}] ({bad.size} offending points)")


@dataclass(frozen=True, eq=False)
class ClosedForm:
    """A named analytic scalar function with parameters."""

    name: str
    params: dict
    domain: Interval = HALF_LINE

    def __post_init__(self):
        if self.name not in _CLOSED_FORMS:
            raise RelationError(f"unknown closed form {self.name!r}")
        fn, dfn = _CLOSED_FORMS[self.name](self.params)
        object.__setattr__(self, "_fn", fn)
        object.__setattr__(self, "_dfn", dfn)

    def __call__(self, x):
        _check_domain(self.domain, x, f"closed form {self.name!r}")
        return self._fn(x)

    def derivative(self, x):
        _check_domain(self.domain, x, f"closed form {self.name!r} derivative")
        return self._dfn(x)

    def to_json(self) -> dict:
        return {"kind": "closed", "name": self.name, "params": dict(self.params),
                "domain": self.domain.to_json()}


@dataclass(frozen=True, eq=False)
class SampledHermite:
    """C1 cubic Hermite interpolant through (breakpoints, values, derivatives).

    Evaluation outside [breakpoints[0], breakpoints[-1]] raises DomainError;
    there is no extrapolation."""

    breakpoints: np.ndarray
    values: np.ndarray
    derivatives: np.ndarray

    def __post_init__(self):
        xs = np.asarray(self.breakpoints, dtype=float)
        ys = np.asarray(self.values, dtype=float)
        dys = np.asarray(self.derivatives, dtype=float)
        if xs.ndim != 1 or xs.size < 2 or ys.shape != xs.shape or dys.shape != xs.shape:
            raise RelationError("SampledHermite needs three equal-length 1-d arrays")
        if not np.all(np.diff(xs) > 0):
            raise RelationError("SampledHermite breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", xs)
        object.__setattr__(self, "values", ys)
        object.__setattr__(self, "derivatives", dys)
        spline = CubicHermiteSpline(xs, ys, dys, extrapolate=False)
        object.__setattr__(self, "_spline", spline)
        object.__setattr__(self, "_dspline", spline.derivative())

    @property
    def domain(self) -> Interval:
        return Interval(float(self.breakpoints[0]), float(self.breakpoints[-1]))

    def __call__(self, x):
        _check_domain(self.domain, x, "sampled function")
        xc = np.clip(x, self.breakpoints[0], self.breakpoints[-1])
        return self._spline(xc)

    def derivative(self, x):
        _check_domain(self.domain, x, "sampled function derivative")
        xc = np.clip(x, self.breakpoints[0], self.breakpoints[-1])
        return self._dspline(xc)

    def second_derivative(self, x):
        # finite differences of the stored first derivatives, per the C1 contract
        _check_domain(self.domain, x, "sampled function second derivative")
        d2 = np.gradient(self.derivatives, self.breakpoints)
        return np.interp(x, self.breakpoints, d2)

    def to_json(self) -> dict:
        return {"kind": "hermite", "x": self.breakpoints.tolist(),
                "y": self.values.tolist(), "dy": self.derivatives.tolist()}


ScalarFunction = Union[ClosedForm, SampledHermite]


def scalar_function_from_json(obj: dict) -> ScalarFunction:
    if obj.get("kind") == "closed":
        return ClosedForm(obj["name"], dict(obj["params"]), Interval.from_json(obj["domain"]))
    if obj.get("kind") == "hermite":
        return SampledHermite(np.asarray(obj["x"]), np.asarray(obj["y"]), np.asarray(obj["dy"]))
    raise RelationError(f"unknown scalar function kind {obj.get('kind')!r}")


# ---------------------------------------------------------------------------
# Relation variants
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CMC:
    """Constant mean curvature relation H = h0."""

    h0: float


@dataclass(frozen=True)
class LinearWeingarten:
    """Linear relation 2*alpha*H + beta*K = delta with alpha^2 + beta*delta > 0.

    Stored with beta >= 0 (the triple is sign-flipped if needed; the equation
    is unchanged).  The canonical principal-curvature component is the branch
    of ``(delta - alpha*x)/(alpha + beta*x)`` containing the fixed point
    ``(-alpha + sqrt(alpha^2 + beta*delta))/beta``.
    """

    alpha: float
    beta: float
    delta: float

    def __post_init__(self):
        a, b, d = float(self.alpha), float(self.beta), float(self.delta)
        if a * a + b * d <= 0.0:
            raise RelationError(
                f"linear Weingarten coefficients ({a}, {b}, {d}) violate alpha^2 + beta*delta > 0")
        if b < 0.0:
            a, b, d = -a, -b, -d
        if b == 0.0 and a == 0.0:
            raise RelationError("linear Weingarten relation needs alpha != 0 when beta = 0")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "delta", d)

    @property
    def discriminant(self) -> float:
        return self.alpha ** 2 + self.beta * self.delta

    def fixed_point(self) -> float:
        """Fixed point of f on the canonical component (the umbilical value)."""
        if self.beta == 0.0:
            return self.delta / (2.0 * self.alpha)
        return (-self.alpha + math.sqrt(self.discriminant)) / self.beta


@dataclass(frozen=True)
class GForm:
    """Relation given as H = g(H^2 - K)."""

    g: ScalarFunction


@dataclass(frozen=True)
class FForm:
    """Relation given as k2 = f(k1), f decreasing with f(f(x)) = x."""

    f: ScalarFunction


RelationSpec = Union[CMC, LinearWeingarten, GForm, FForm]


def relation_to_json(rel: RelationSpec) -> dict:
    if isinstance(rel, CMC):
        return {"kind": "cmc", "h0": rel.h0}
    if isinstance(rel, LinearWeingarten):
        return {"kind": "linear", "alpha": rel.alpha, "beta": rel.beta, "delta": rel.delta}
    if isinstance(rel, GForm):
        return {"kind": "g", "function": rel.g.to_json()}
    if isinstance(rel, FForm):
        return {"kind": "f", "function": rel.f.to_json()}
    raise RelationError(f"not a relation: {rel!r}")


def relation_from_json(obj: dict) -> RelationSpec:
    kind = obj.get("kind")
    if kind == "cmc":
        return CMC(float(obj["h0"]))
    if kind == "linear":
        return LinearWeingarten(float(obj["alpha"]), float(obj["beta"]), float(obj["delta"]))
    if kind == "g":
        return GForm(scalar_function_from_json(obj["function"]))
    if kind == "f":
        return FForm(scalar_function_from_json(obj["function"]))
    raise RelationError(f"unknown relation kind {kind!r}")


def g_function(rel: RelationSpec) -> Optional[ScalarFunction]:
    """The g of H = g(H^2-K), when it exists in closed form (FForm -> None)."""
    if isinstance(rel, CMC):
        return ClosedForm("constant", {"value": rel.h0}, HALF_LINE)
    if isinstance(rel, LinearWeingarten):
        if rel.beta == 0.0:
            return ClosedForm("constant", {"value": rel.delta / (2.0 * rel.alpha)}, HALF_LINE)
        # solve beta*H^2 + 2*alpha*H - (delta + beta*t) = 0 for H, branch through the
        # canonical fixed point: g(t) = sqrt(t + disc/beta^2) - alpha/beta
        e = rel.discriminant / rel.beta ** 2
        return ClosedForm("sqrt_offset", {"scale": 1.0, "offset": e, "shift": -rel.alpha / rel.beta},
                          HALF_LINE)
    if isinstance(rel, GForm):
        return rel.g
    return None


def f_function(rel: RelationSpec) -> Optional[ScalarFunction]:
    """The f of k2 = f(k1), when it exists in closed form (GForm -> None)."""
    if isinstance(rel, CMC):
        return ClosedForm("affine", {"intercept": 2.0 * rel.h0, "slope": -1.0}, FULL_LINE)
    if isinstance(rel, LinearWeingarten):
        if rel.beta == 0.0:
            return ClosedForm("affine", {"intercept": rel.delta / rel.alpha, "slope": -1.0}, FULL_LINE)
        pole = -rel.alpha / rel.beta
        return ClosedForm("mobius", {"alpha": rel.alpha, "beta": rel.beta, "delta": rel.delta},
                          Interval(pole, math.inf))
    if isinstance(rel, FForm):
        return rel.f
    return None


def default_t_grid(t_max: float = DEFAULT_T_MAX, samples: int = DEFAULT_SAMPLES) -> np.ndarray:
    """Certification grid on [0, t_max]: zero plus log-spaced samples."""
    if not (t_max > 0.0 and samples >= 2):
        raise EllipticityError(f"bad certification grid t_max={t_max} samples={samples}")
    return np.concatenate([[0.0], np.logspace(-8, math.log10(t_max), samples - 1)])


# ---------------------------------------------------------------------------
# Ellipticity report
# ---------------------------------------------------------------------------

@dataclass
class EllipticityReport:
    is_elliptic: bool
    sup_4tgp2: float
    uniform_constant_Lambda: Optional[float]
    f_slope_bounds: Optional[tuple]
    umbilical_alpha: Optional[float]
    minimal_type: bool
    If_domain: Interval
    bounded_branch: str            # t_plus_g_bounded | t_minus_g_bounded | neither
    orientation_flipped: bool = False
    grid: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "is_elliptic": self.is_elliptic,
            "sup_4tgp2": self.sup_4tgp2,
            "uniform_constant_Lambda": self.uniform_constant_Lambda,
            "f_slope_bounds": list(self.f_slope_bounds) if self.f_slope_bounds else None,
            "umbilical_alpha": self.umbilical_alpha,
            "minimal_type": self.minimal_type,
            "If_domain": self.If_domain.to_json(),
            "bounded_branch": self.bounded_branch,
            "orientation_flipped": self.orientation_flipped,
            "grid": self.grid,
        }


def _slope_bounds_from_sup(sup: float) -> tuple:
    # |2 sqrt(t) g'| <= u  <=>  -f' in [(1-u)/(1+u), (1+u)/(1-u)] over both branches
    u = math.sqrt(max(sup, 0.0))
    if u >= 1.0:
        return (0.0, math.inf)
    lo = (1.0 - u) / (1.0 + u)
    return (lo, 1.0 / lo)


def _branch_tail_bounded(branch_vals: Callable[[float], float], t_hi: float) -> bool:
    # heuristic: a monotone branch is called bounded if it moves less than
    # _BOUNDED_TAIL_TOL between t_hi/4 and t_hi (sqrt-type growth moves O(sqrt(t_hi)))
    try:
        v1, v2 = branch_vals(t_hi / 4.0), branch_vals(t_hi)
    except (DomainError, OverflowError):
        return False
    return abs(v2 - v1) < max(_BOUNDED_TAIL_TOL, 1e-3 * abs(v2))


def _classify_branches_g(g: ScalarFunction, t_hi: float) -> tuple:
    """(bounded_branch, If_domain) for a relation given by g."""
    if isinstance(g, ClosedForm):
        if g.name == "constant":
            return "neither", FULL_LINE
        if g.name == "sqrt_offset":
            c = float(g.params["scale"])
            d = float(g.params["shift"])
            e = float(g.params["offset"])
            if abs(abs(c) - 1.0) < 1e-14:
                # c = +1: g - sqrt(t) -> d; c = -1: g + sqrt(t) -> d
                if c > 0:
                    return "t_minus_g_bounded", Interval(d, math.inf)
                return "t_plus_g_bounded", Interval(-math.inf, d)
            if abs(c) < 1.0:
                return "neither", FULL_LINE
            return "neither", FULL_LINE  # |c| > 1 is not elliptic; branches diverge
    # sampled or unrecognized closed form: tail heuristic
    t_hi = min(t_hi, g.domain.hi if math.isfinite(g.domain.hi) else t_hi)
    minus_bounded = _branch_tail_bounded(lambda t: float(np.asarray(g(t))) - math.sqrt(t), t_hi)
    plus_bounded = _branch_tail_bounded(lambda t: float(np.asarray(g(t))) + math.sqrt(t), t_hi)
    if minus_bounded and not plus_bounded:
        a = float(np.asarray(g(t_hi))) - math.sqrt(t_hi)
        return "t_minus_g_bounded", Interval(a, math.inf)
    if plus_bounded and not minus_bounded:
        b = float(np.asarray(g(t_hi))) + math.sqrt(t_hi)
        return "t_plus_g_bounded", Interval(-math.inf, b)
    return "neither", FULL_LINE


def _grid_in_domain(t_grid: np.ndarray, domain: Interval) -> np.ndarray:
    keep = t_grid[(t_grid >= max(domain.lo, 0.0)) & (t_grid <= domain.hi)]
    extra = [v for v in (max(domain.lo, 0.0), domain.hi) if math.isfinite(v)]
    return np.unique(np.concatenate([keep, np.asarray(extra)])) if extra else np.unique(keep)


def certify_ellipticity(rel: RelationSpec, t_grid: Optional[np.ndarray] = None, *,
                        t_max: float = DEFAULT_T_MAX,
                        samples: int = DEFAULT_SAMPLES) -> EllipticityReport:
    """Certify ellipticity of a relation on a finite grid.

    For g-side relations this samples ``4 t g'(t)^2`` on ``t_grid`` (default:
    0 plus log-spaced points up to ``t_max``).  For f-side relations the same
    quantity is recovered from the slope ``-f'`` through
    ``u = (1 - (-f'))/(1 + (-f'))`` and ``4 t g'^2 = u^2``.
    """
    if t_grid is None:
        t_grid = default_t_grid(t_max, samples)
    else:
        t_grid = np.asarray(t_grid, dtype=float)
        if t_grid.size == 0:
            raise EllipticityError("empty certification grid")
        t_max = float(np.max(t_grid))
        if t_max <= 0.0:
            raise EllipticityError("certification grid needs T_max > 0")
    grid_info = {"t_max": float(t_max), "n": int(np.asarray(t_grid).size)}

    g = g_function(rel)
    if g is not None:
        ts = _grid_in_domain(t_grid, g.domain)
        try:
            dg = np.asarray(g.derivative(ts), dtype=float)
        except DomainError as exc:
            raise EllipticityError(f"relation derivative evaluation failed: {exc}") from exc
        with np.errstate(invalid="ignore"):
            su = 4.0 * ts * dg * dg
        finite = np.isfinite(su)
        if not np.any(finite):
            raise EllipticityError("no finite samples of 4 t g'(t)^2 on the grid")
        sup = float(np.max(su[finite]))
        is_elliptic = sup < 1.0 and bool(np.all(finite | (ts == 0.0)))
        alpha_raw = float(np.asarray(g(0.0))) if g.domain.contains(0.0, tol=1e-12) else None
        bounded, If_dom = _classify_branches_g(g, float(ts[-1]) if ts[-1] > 0 else t_max)
    else:
        f = f_function(rel)
        xs = _fform_sample_grid(f, t_max, min(samples, 4000))
        try:
            df = np.asarray(f.derivative(xs), dtype=float)
            fx = np.asarray(f(xs), dtype=float)
        except DomainError as exc:
            raise EllipticityError(f"relation evaluation failed: {exc}") from exc
        _check_involution(f, xs, fx)
        m = -df
        is_elliptic = bool(np.all(m > 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            u = (1.0 - m) / (1.0 + m)
        u = np.where(m > 0.0, u, 1.0)
        sup = float(np.max(u * u))
        alpha_raw = _fform_fixed_point(f, xs, fx)
        bounded, If_dom = _classify_branches_f(f, xs, fx)

    minimal = alpha_raw is not None and abs(alpha_raw) <= MINIMAL_TOL
    flipped = alpha_raw is not None and alpha_raw < -MINIMAL_TOL
    uniform = sup if (is_elliptic and sup <= 1.0 - UNIFORM_MARGIN) else None
    slopes = _slope_bounds_from_sup(sup) if is_elliptic else None
    return EllipticityReport(
        is_elliptic=is_elliptic,
        sup_4tgp2=min(sup, 1.0) if not is_elliptic else sup,
        uniform_constant_Lambda=uniform,
        f_slope_bounds=slopes,
        umbilical_alpha=None if alpha_raw is None else abs(alpha_raw),
        minimal_type=minimal,
        If_domain=If_dom,
        bounded_branch=bounded,
        orientation_flipped=flipped,
        grid=grid_info,
    )


def _fform_sample_grid(f: ScalarFunction, t_max: float, n: int) -> np.ndarray:
    """Sample grid over I_f covering pair separations up to 2*sqrt(t_max)."""
    dom = f.domain
    margin = 1e-9
    if math.isfinite(dom.lo):
        lo = dom.lo + margin * max(1.0, abs(dom.lo))
    else:
        lo = -2.0 * math.sqrt(t_max)
    if math.isfinite(dom.hi):
        hi = dom.hi - margin * max(1.0, abs(dom.hi))
    else:
        hi = 2.0 * math.sqrt(t_max)
    if not lo < hi:
        raise EllipticityError(f"cannot sample f on domain [{dom.lo}, {dom.hi}]")
    # cluster toward finite endpoints, where f blows up
    u = np.linspace(0.0, 1.0, max(n, 8))
    w = u * u * (3.0 - 2.0 * u)  # smoothstep: denser near both ends
    return lo + (hi - lo) * w


def _check_involution(f: ScalarFunction, xs: np.ndarray, fx: np.ndarray,
                      tol: float = SYMMETRY_TOL):
    inside = f.domain.contains(fx, tol=0.0)
    if not np.any(inside):
        raise RelationError("f never maps the sampled grid back into its own domain")
    ffx = np.asarray(f(fx[inside]), dtype=float)
    err = np.abs(ffx - xs[inside])
    scale = 1.0 + np.abs(xs[inside])
    worst = int(np.argmax(err / scale))
    if err[worst] > tol * scale[worst]:
        raise RelationError(
            f"f is not an involution: |f(f(x))-x| = {err[worst]:.3e} at x = {xs[inside][worst]:.9g}")


def _fform_fixed_point(f: ScalarFunction, xs: np.ndarray, fx: np.ndarray) -> Optional[float]:
    """Root of f(x) - x (decreasing, hence unique) by bisection on the samples."""
    d = fx - xs
    sign = np.sign(d)
    idx = np.nonzero(sign[:-1] * sign[1:] <= 0.0)[0]
    if idx.size == 0:
        return None
    a, b = float(xs[idx[0]]), float(xs[idx[0] + 1])
    for _ in range(200):
        m = 0.5 * (a + b)
        if float(np.asarray(f(m))) - m > 0.0:
            a = m
        else:
            b = m
        if b - a < 1e-15 * (1.0 + abs(a)):
            break
    return 0.5 * (a + b)


def _classify_branches_f(f: ScalarFunction, xs: np.ndarray, fx: np.ndarray) -> tuple:
    dom = f.domain
    if isinstance(f, ClosedForm):
        if math.isfinite(dom.lo) and not math.isfinite(dom.hi):
            return "t_minus_g_bounded", Interval(dom.lo, math.inf)
        if math.isfinite(dom.hi) and not math.isfinite(dom.lo):
            return "t_plus_g_bounded", Interval(-math.inf, dom.hi)
        return "neither", FULL_LINE
    # sampled function: the window edges are grid artifacts, so decide from
    # quarter-point tail flatness (sqrt-type growth moves O(sqrt(x)) there)
    feval = lambda x: float(np.asarray(f(x)))
    lo_bounded = hi_bounded = False
    a = b = 0.0
    if xs[-1] > 1.0 and xs[0] < xs[-1] / 4.0:
        v1, v2 = feval(xs[-1] / 4.0), feval(xs[-1])
        if abs(v2 - v1) < max(_BOUNDED_TAIL_TOL, 1e-3 * abs(v2)):
            lo_bounded, a = True, v2  # f -> a at +inf, so I_f is bounded below
    if xs[0] < -1.0 and xs[-1] > xs[0] / 4.0:
        v1, v2 = feval(xs[0] / 4.0), feval(xs[0])
        if abs(v2 - v1) < max(_BOUNDED_TAIL_TOL, 1e-3 * abs(v2)):
            hi_bounded, b = True, v2  # f -> b at -inf, so I_f is bounded above
    if lo_bounded and not hi_bounded:
        return "t_minus_g_bounded", Interval(a, math.inf)
    if hi_bounded and not lo_bounded:
        return "t_plus_g_bounded", Interval(-math.inf, b)
    return "neither", FULL_LINE


# ---------------------------------------------------------------------------
# Form conversions
# ---------------------------------------------------------------------------

def g_to_f(rel: RelationSpec, t_grid: Optional[np.ndarray] = None) -> FForm:
    """Convert a g-side relation to a sampled f with f(f(x)) = x.

    The graph of f is the union of the two branches (g(t) -+ sqrt(t),
    g(t) +- sqrt(t)); ellipticity makes g(t) + sqrt(t) strictly increasing
    and g(t) - sqrt(t) strictly decreasing, which is verified here.
    """
    g = g_function(rel)
    if g is None:
        raise RelationError("g_to_f needs a relation with a g form")
    if t_grid is None:
        t_grid = default_t_grid()
    ts = _grid_in_domain(np.asarray(t_grid, dtype=float), g.domain)
    gv = np.asarray(g(ts), dtype=float)
    dg = np.asarray(g.derivative(ts), dtype=float)
    rt = np.sqrt(ts)
    x_up, y_up = gv + rt, gv - rt

    pos = ts > 0.0
    if not np.all(np.isfinite(dg[pos])):
        raise EllipticityError("g' is not finite on the conversion grid")
    up_steps = np.diff(x_up)
    dn_steps = np.diff(y_up)
    if not (np.all(up_steps > MONOTONE_MARGIN) and np.all(dn_steps < -MONOTONE_MARGIN)):
        raise EllipticityError(
            "branch monotonicity fails: relation is not elliptic on the grid")

    u = 2.0 * rt[pos] * dg[pos]
    slope_up = (u - 1.0) / (u + 1.0)          # df/dx on the increasing branch
    slope_dn = (u + 1.0) / (u - 1.0)          # reciprocal, on the decreasing branch

    has_umbilic = ts[0] == 0.0
    if has_umbilic:
        xs = np.concatenate([y_up[pos][::-1], [x_up[0]], x_up[pos]])
        ys = np.concatenate([x_up[pos][::-1], [y_up[0]], y_up[pos]])
        dys = np.concatenate([slope_dn[::-1], [-1.0], slope_up])
    else:
        xs = np.concatenate([y_up[::-1], x_up])
        ys = np.concatenate([x_up[::-1], y_up])
        sl_up = (2.0 * rt * dg - 1.0) / (2.0 * rt * dg + 1.0)
        dys = np.concatenate([(1.0 / sl_up)[::-1], sl_up])
    keep = np.concatenate([[True], np.diff(xs) > MONOTONE_MARGIN])
    return FForm(SampledHermite(xs[keep], ys[keep], dys[keep]))


def f_to_g(rel: RelationSpec, x_grid: Optional[np.ndarray] = None) -> GForm:
    """Convert an f-side relation to a sampled g via t = (x-f(x))^2/4,
    g(t) = (x+f(x))/2; duplicate t from symmetric pairs collapse."""
    f = f_function(rel)
    if f is None:
        raise RelationError("f_to_g needs a relation with an f form")
    if x_grid is None:
        x_grid = _fform_sample_grid(f, DEFAULT_T_MAX, 4000)
        # reach t = 0: cluster samples around the fixed point f(a) = a
        alpha = _fform_fixed_point(f, x_grid, np.asarray(f(x_grid), dtype=float))
        if alpha is not None:
            spread = alpha + np.concatenate([[0.0], np.logspace(-8, 0, 60),
                                             -np.logspace(-8, 0, 60)])
            x_grid = np.concatenate([x_grid, spread[f.domain.contains(spread)]])
    xs = np.unique(np.asarray(x_grid, dtype=float))
    fx = np.asarray(f(xs), dtype=float)
    df = np.asarray(f.derivative(xs), dtype=float)
    if not np.all(df < 0.0):
        bad = xs[df >= 0.0][0]
        raise EllipticityError(f"f is not strictly decreasing at x = {bad:.9g}")
    _check_involution(f, xs, fx)

    ts = 0.25 * (xs - fx) ** 2
    gs = 0.5 * (xs + fx)
    with np.errstate(divide="ignore", invalid="ignore"):
        dgs = (1.0 + df) / ((xs - fx) * (1.0 - df))

    order = np.argsort(ts, kind="stable")
    ts, gs, dgs = ts[order], gs[order], dgs[order]
    keep = np.concatenate([[True], np.diff(ts) > 1e-12 * (1.0 + ts[1:])])
    ts, gs, dgs = ts[keep], gs[keep], dgs[keep]
    # near the umbilic (x - f(x) -> 0) the chain-rule derivative is 0/0;
    # replace non-finite entries by one-sided extrapolation from the data
    bad = ~np.isfinite(dgs)
    if np.any(bad):
        good = np.nonzero(~bad)[0]
        if good.size < 2:
            raise RelationError("too few usable samples to build g")
        dgs[bad] = np.interp(ts[bad], ts[good], dgs[good])
    if ts.size < 2:
        raise RelationError("x_grid produces fewer than two distinct t samples")
    return GForm(SampledHermite(ts, gs, dgs))


def umbilical_constant(rel: RelationSpec) -> Optional[float]:
    """The value a with f(a) = a (equivalently g(0) = a), reported >= 0 per the
    orientation convention; None when the fixed point is outside I_f."""
    if isinstance(rel, CMC):
        return abs(rel.h0)
    if isinstance(rel, LinearWeingarten):
        return abs(rel.fixed_point())
    g = g_function(rel)
    if g is not None:
        if not g.domain.contains(0.0, tol=1e-12):
            return None
        return abs(float(np.asarray(g(0.0))))
    f = f_function(rel)
    xs = _fform_sample_grid(f, DEFAULT_T_MAX, 4000)
    fx = np.asarray(f(xs), dtype=float)
    root = _fform_fixed_point(f, xs, fx)
    return None if root is None else abs(root)


def wedge_for_uniform_minimal(rel: RelationSpec, *, check_points: int = 512) -> tuple:
    """Slopes (m1, m2) = (-Lambda2, -Lambda1) of the wedge m1*x <= f(x) <= m2*x
    containing the graph of f, for uniformly elliptic minimal-type relations.

    Verified by sampling f(x)/x; rejects non-uniform or non-minimal input.
    """
    report = certify_ellipticity(rel)
    if report.uniform_constant_Lambda is None:
        raise EllipticityError("wedge containment needs a uniformly elliptic relation")
    if not report.minimal_type:
        raise EllipticityError("wedge containment needs a minimal-type relation (f(0) = 0)")
    lam1, lam2 = report.f_slope_bounds
    m1, m2 = -lam2, -lam1

    f = f_function(rel)
    if f is None:
        f = g_to_f(rel).f
    dom = f.domain
    span = 2.0 / max(lam1, 1e-6)
    lo = max(dom.lo, -span) if math.isfinite(dom.lo) else -span
    hi = min(dom.hi, span) if math.isfinite(dom.hi) else span
    xs = np.linspace(lo, hi, check_points)
    xs = xs[np.abs(xs) > 1e-9]
    ratio = np.asarray(f(xs), dtype=float) / xs
    tol = 1e-9 * (1.0 + abs(m1))
    if not np.all((ratio >= m1 - tol) & (ratio <= m2 + tol)):
        worst = xs[int(np.argmax(np.maximum(m1 - ratio, ratio - m2)))]
        raise EllipticityError(f"sampled f leaves the wedge near x = {worst:.9g}")
    return (m1, m2)
