"""Pointwise evaluation on second-order jets of a graph z = u(x, y).

A jet (p, q, r, s, t) packs the first and second derivatives of u at a
point.  This module evaluates mean and Gauss curvature of the graph there
(upward unit normal), the residual of a Weingarten relation, its first
derivatives, and the spectral quantities controlling uniform ellipticity:
the eigenvalues of the quadratic form of (1+p^2+q^2)^2 * (H^2 - K) in
(r, s, t), the quartic discriminant underneath them, and the minimum of the
second-order symbol over a compact jet box.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import relation as rel_mod
from .errors import DomainError, EllipticityError
from .relation import RelationSpec, certify_ellipticity, f_to_g, g_function

H2K_CLAMP = 1.0e-14      # negative roundoff of H^2-K tolerated at umbilics
FD_SCALE = 1.0e-6        # central-difference step: FD_SCALE * (1 + |component|)
FD_MATCH_RTOL = 1.0e-6   # analytic vs finite-difference agreement requirement
DEFAULT_MU0 = 10.0       # default l1 radius of the compact jet box


@dataclass(frozen=True)
class Jet2:
    """Second-order jet (p, q, r, s, t) of a graph function."""

    p: float
    q: float
    r: float
    s: float
    t: float

    def __post_init__(self):
        for name in ("p", "q", "r", "s", "t"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"jet component {name} is not finite")

    def as_array(self) -> np.ndarray:
        return np.array([self.p, self.q, self.r, self.s, self.t], dtype=float)

    @staticmethod
    def from_array(a) -> "Jet2":
        p, q, r, s, t = (float(v) for v in a)
        return Jet2(p, q, r, s, t)

    def to_json(self) -> list:
        return [self.p, self.q, self.r, self.s, self.t]

    @staticmethod
    def from_json(arr) -> "Jet2":
        return Jet2.from_array(arr)


def mean_gauss(p, q, r, s, t):
    """H and K of the graph with upward normal; accepts scalars or arrays."""
    p, q, r, s, t = (np.asarray(v, dtype=float) for v in (p, q, r, s, t))
    w2 = 1.0 + p * p + q * q
    H = ((1.0 + q * q) * r - 2.0 * p * q * s + (1.0 + p * p) * t) / (2.0 * w2 ** 1.5)
    K = (r * t - s * s) / (w2 * w2)
    return H, K


def curvatures_of_jet(j: Jet2):
    """(H, K) at a single jet."""
    H, K = mean_gauss(j.p, j.q, j.r, j.s, j.t)
    return float(H), float(K)


def jet_partials(p, q, r, s, t):
    """Analytic first partials of H and K in the five jet components.

    Returns (dH, dK), each a tuple of five arrays ordered (p, q, r, s, t).
    """
    p, q, r, s, t = (np.asarray(v, dtype=float) for v in (p, q, r, s, t))
    w2 = 1.0 + p * p + q * q
    num = (1.0 + q * q) * r - 2.0 * p * q * s + (1.0 + p * p) * t
    detr = r * t - s * s
    H_p = (-1.5 * p * num + (p * t - q * s) * w2) / w2 ** 2.5
    H_q = (-1.5 * q * num + (q * r - p * s) * w2) / w2 ** 2.5
    H_r = (1.0 + q * q) / (2.0 * w2 ** 1.5)
    H_s = -p * q / w2 ** 1.5
    H_t = (1.0 + p * p) / (2.0 * w2 ** 1.5)
    K_p = -4.0 * p * detr / w2 ** 3
    K_q = -4.0 * q * detr / w2 ** 3
    K_r = t / w2 ** 2
    K_s = -2.0 * s / w2 ** 2
    K_t = r / w2 ** 2
    return (H_p, H_q, H_r, H_s, H_t), (K_p, K_q, K_r, K_s, K_t)


def clamp_h2k(value):
    """Clamp tiny negative roundoff of H^2 - K to zero; larger negatives are a bug."""
    v = np.asarray(value, dtype=float)
    if np.any(v < -H2K_CLAMP):
        worst = float(np.min(v))
        raise ValueError(f"H^2 - K = {worst:.3e} is negative beyond roundoff")
    return np.where(v < 0.0, 0.0, v)


def _g_of(rel: RelationSpec):
    g = g_function(rel)
    if g is None:
        g = g_function(f_to_g(rel))
    return g


def residual_fields(g, p, q, r, s, t, with_gradient: bool = False):
    """Vectorized Weingarten residual H - g(H^2-K) and, optionally, its
    analytic gradient in the jet components.  `g` is a ScalarFunction."""
    H, K = mean_gauss(p, q, r, s, t)
    tt = clamp_h2k(H * H - K)
    F = H - np.asarray(g(tt), dtype=float)
    if not with_gradient:
        return F
    gp = np.asarray(g.derivative(tt), dtype=float)
    dH, dK = jet_partials(p, q, r, s, t)
    grads = tuple(dH[i] - gp * (2.0 * H * dH[i] - dK[i]) for i in range(5))
    return F, grads


def weingarten_residual(rel: RelationSpec, j: Jet2) -> float:
    """H - g(H^2-K) at the jet; zero iff the jet satisfies the relation."""
    g = _g_of(rel)
    return float(residual_fields(g, j.p, j.q, j.r, j.s, j.t))


def residual_gradient(rel: RelationSpec, j: Jet2, method: str = "auto") -> np.ndarray:
    """First derivatives (F_p, F_q, F_r, F_s, F_t) of the residual.

    method: "analytic" (chain rule through g'), "fd" (central differences
    with component-scaled step), or "auto" (analytic when g' is available,
    cross-checked against finite differences for closed forms).
    """
    g = _g_of(rel)
    if method not in ("auto", "analytic", "fd"):
        raise ValueError(f"unknown gradient method {method!r}")

    def fd() -> np.ndarray:
        base = j.as_array()
        out = np.empty(5)
        for i in range(5):
            h = FD_SCALE * (1.0 + abs(base[i]))
            hi, lo = base.copy(), base.copy()
            hi[i] += h
            lo[i] -= h
            out[i] = (float(residual_fields(g, *hi)) - float(residual_fields(g, *lo))) / (2.0 * h)
        return out

    if method == "fd":
        return fd()
    _, grads = residual_fields(g, j.p, j.q, j.r, j.s, j.t, with_gradient=True)
    analytic = np.array([float(v) for v in grads])
    if method == "auto" and isinstance(g, rel_mod.ClosedForm):
        approx = fd()
        scale = 1.0 + np.abs(analytic)
        if np.max(np.abs(analytic - approx) / scale) > FD_MATCH_RTOL:
            raise EllipticityError(
                "analytic and finite-difference residual gradients disagree "
                f"beyond {FD_MATCH_RTOL:g} at jet {j}")
    return analytic


# ---------------------------------------------------------------------------
# Spectral quantities of the second-order symbol
# ---------------------------------------------------------------------------

def q4(x, y):
    """Quartic discriminant under the eigenvalue formula, expanded form."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return (x ** 4 + x ** 3 * (8.0 * y - 4.0) + 2.0 * x * x * y * (14.0 + 9.0 * y)
            + (y * y - 2.0 * y - 2.0) ** 2 + 4.0 * x * (2.0 + 10.0 * y + 7.0 * y * y + 2.0 * y ** 3))


def q4_rewritten(x, y):
    """Same polynomial as a square plus a manifestly nonnegative remainder."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    u = x + y
    return (u * u - 2.0 * u - 2.0) ** 2 + 4.0 * x * y * (10.0 + x * x + 10.0 * y + y * y + x * (10.0 + 3.0 * y))


def h2k_form_matrix(p: float, q: float) -> np.ndarray:
    """3x3 symmetric matrix of (r,s,t) -> (1+p^2+q^2)^2 * (H^2-K)(p,q,r,s,t)."""
    w2 = 1.0 + p * p + q * q
    v = np.array([1.0 + q * q, -2.0 * p * q, 1.0 + p * p])
    d = np.array([[0.0, 0.0, -0.5], [0.0, 1.0, 0.0], [-0.5, 0.0, 0.0]])
    return np.outer(v, v) / (4.0 * w2) + d


def h2k_eigenvalues(p, q):
    """Eigenvalues (lam1^2, lam2^2, 0) of the quadratic form of
    (1+p^2+q^2)^2 * (H^2-K) in (r, s, t), by the closed formula."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    x, y = p * p, q * q
    w2 = 1.0 + x + y
    base = 6.0 + x * x + 6.0 * y + y * y + x * (6.0 + 4.0 * y)
    root = np.sqrt(q4(x, y))
    lam1 = (base + root) / (8.0 * w2)
    lam2 = (base - root) / (8.0 * w2)
    return lam1, lam2, np.zeros_like(lam1)


# ---------------------------------------------------------------------------
# Compact jet box and uniform ellipticity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThetaBox:
    """Compact jet set {p^2+q^2 <= slope_bound, |p|+|q|+|r|+|s|+|t| <= l1_bound}."""

    slope_bound: float = 9.0 / 4.0
    l1_bound: float = DEFAULT_MU0

    def contains(self, j: Jet2) -> bool:
        a = j.as_array()
        return (j.p * j.p + j.q * j.q <= self.slope_bound
                and float(np.sum(np.abs(a))) <= self.l1_bound)

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        """count x 5 array of jets drawn inside the box (not exactly uniform;
        adequate for infimum estimation)."""
        out = np.empty((count, 5))
        got = 0
        while got < count:
            n = count - got
            ang = rng.uniform(0.0, 2.0 * math.pi, n)
            rad = np.sqrt(rng.uniform(0.0, 1.0, n)) * math.sqrt(self.slope_bound)
            p, q = rad * np.cos(ang), rad * np.sin(ang)
            rem = self.l1_bound - np.abs(p) - np.abs(q)
            ok = rem > 0.0
            if not np.any(ok):
                continue
            p, q, rem = p[ok], q[ok], rem[ok]
            y = rng.uniform(-1.0, 1.0, (p.size, 3))
            l1 = np.sum(np.abs(y), axis=1)
            l1[l1 == 0.0] = 1.0
            scale = rem * rng.uniform(0.0, 1.0, p.size) ** (1.0 / 3.0) / l1
            block = np.column_stack([p, q, y * scale[:, None]])
            take = min(block.shape[0], count - got)
            out[got:got + take] = block[:take]
            got += take
        return out


def uniform_ellipticity_lambda(rel: RelationSpec, box: Optional[ThetaBox] = None,
                               sample_count: int = 10_000, seed: int = 0) -> float:
    """Infimum over sampled jets of the smallest eigenvalue of the
    second-order symbol [[F_r, F_s/2], [F_s/2, F_t]].  Positive for
    uniformly elliptic relations; a non-positive result raises."""
    if box is None:
        box = ThetaBox()
    report = certify_ellipticity(rel)
    if report.uniform_constant_Lambda is None:
        raise EllipticityError("uniform_ellipticity_lambda needs a uniformly elliptic relation")
    g = _g_of(rel)
    rng = np.random.default_rng(seed)
    jets = box.sample(sample_count, rng)
    # include the origin jet and a few axis-aligned corners for determinism
    jets = np.vstack([np.zeros(5), jets])
    _, grads = residual_fields(g, *(jets[:, i] for i in range(5)), with_gradient=True)
    Fr, Fs, Ft = grads[2], grads[3], grads[4]
    mid = 0.5 * (Fr + Ft)
    rad = np.sqrt((0.5 * (Fr - Ft)) ** 2 + (0.5 * Fs) ** 2)
    lam = float(np.min(mid - rad))
    if lam <= 0.0:
        raise EllipticityError(
            f"second-order symbol loses definiteness (min eigenvalue {lam:.3e}) "
            "for a relation certified uniformly elliptic")
    return lam


@dataclass(frozen=True)
class BoundCheck:
    """Result of the sqrt(t)*|g'(t)| < 1/2 scan."""

    ok: bool
    worst_t: float
    worst_value: float

    def __bool__(self) -> bool:
        return self.ok


def derivative_bound_check(rel: RelationSpec, t_grid: Optional[np.ndarray] = None) -> BoundCheck:
    """Check sqrt(t)*|g'(t)| < 1/2 on the certification grid (an equivalent
    restatement of ellipticity).  Returns the worst offender either way."""
    g = _g_of(rel)
    if t_grid is None:
        t_grid = rel_mod.default_t_grid()
    ts = rel_mod._grid_in_domain(np.asarray(t_grid, dtype=float), g.domain)
    try:
        with np.errstate(invalid="ignore"):
            vals = np.sqrt(ts) * np.abs(np.asarray(g.derivative(ts), dtype=float))
    except DomainError as exc:
        raise EllipticityError(f"derivative evaluation failed: {exc}") from exc
    finite = np.isfinite(vals)
    vals = np.where(finite, vals, 0.0)
    worst = int(np.argmax(vals))
    return BoundCheck(bool(vals[worst] < 0.5 and np.all(finite | (ts == 0.0))),
                      float(ts[worst]), float(vals[worst]))
