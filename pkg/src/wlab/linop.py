"""The linearized Weingarten operator on graph patches.

For a normal variation p + tau*phi*N of a surface satisfying H = g(H^2-K),
the curvature rates are 2 H'(0) = Lap(phi) + (4H^2-2K) phi and
K'(0) = div(T1 grad phi) + 2HK phi, with T1 = 2H*Id - S.  The linearized
operator combines them:

    L_g[phi] = ((1 - 2 g g')/2) Lap(phi) + g' div(T1 grad phi) + q phi,
    q = 2 g^2 (1 - 2 g g') - (1 - 4 g g') K,

with g, g' read at H^2 - K.  On a vertical cylinder of radius r0 (so
2*H0 = 1/r0) the operator has constant coefficients A, B, C in the flat
cylinder coordinates, and the product of boundary-vanishing cosines is an
eigenfunction whose sign threshold -A (pi/2L)^2 - B (pi/2r)^2 + C decides
when L_g[phi] > 0.

Everything here is realized in the graph chart with centered differences;
the finite-difference variation path and the formula path agree to
O(tau^2 + h^2) and are exercised against each other in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RelationError
from .jets import mean_gauss
from .relation import RelationSpec, g_function
from .solver import GraphPatch, jet_fields

DEFAULT_TAU = 1.0e-4


# ---------------------------------------------------------------------------
# Discrete intrinsic operators in the graph chart
# ---------------------------------------------------------------------------

def _ddx(a: np.ndarray, h: float) -> np.ndarray:
    out = np.full_like(a, np.nan)
    out[:, 1:-1] = (a[:, 2:] - a[:, :-2]) / (2.0 * h)
    return out


def _ddy(a: np.ndarray, h: float) -> np.ndarray:
    out = np.full_like(a, np.nan)
    out[1:-1, :] = (a[2:, :] - a[:-2, :]) / (2.0 * h)
    return out


def _metric_pieces(patch: GraphPatch):
    p, q, r, s, t = jet_fields(patch)
    w2 = 1.0 + p * p + q * q
    W = np.sqrt(w2)
    g11i = (1.0 + q * q) / w2
    g12i = -p * q / w2
    g22i = (1.0 + p * p) / w2
    return p, q, r, s, t, W, g11i, g12i, g22i


def laplace_beltrami(patch: GraphPatch, phi: np.ndarray) -> np.ndarray:
    """Laplace-Beltrami of phi in the induced graph metric, two-stage
    centered differences; valid two rings inside the interior."""
    h = patch.h
    _, _, _, _, _, W, g11i, g12i, g22i = _metric_pieces(patch)
    phix, phiy = _ddx(phi, h), _ddy(phi, h)
    fx = W * (g11i * phix + g12i * phiy)
    fy = W * (g12i * phix + g22i * phiy)
    with np.errstate(invalid="ignore"):
        return (_ddx(fx, h) + _ddy(fy, h)) / W


def div_t1_grad(patch: GraphPatch, phi: np.ndarray) -> np.ndarray:
    """div(T1 grad phi) with T1 = 2H*Id - S in the graph chart."""
    h = patch.h
    p, q, r, s, t, W, g11i, g12i, g22i = _metric_pieces(patch)
    H, _ = mean_gauss(p, q, r, s, t)
    phix, phiy = _ddx(phi, h), _ddy(phi, h)
    gradx = g11i * phix + g12i * phiy
    grady = g12i * phix + g22i * phiy
    Sxx = (g11i * r + g12i * s) / W
    Sxy = (g11i * s + g12i * t) / W
    Syx = (g12i * r + g22i * s) / W
    Syy = (g12i * s + g22i * t) / W
    Vx = (2.0 * H - Sxx) * gradx - Sxy * grady
    Vy = -Syx * gradx + (2.0 * H - Syy) * grady
    with np.errstate(invalid="ignore"):
        return (_ddx(W * Vx, h) + _ddy(W * Vy, h)) / W


def variation_rhs_fields(patch: GraphPatch, phi: np.ndarray):
    """Formula path: (2*H'(0), K'(0)) as fields,
    Lap(phi) + (4H^2-2K) phi and div(T1 grad phi) + 2HK phi."""
    p, q, r, s, t = jet_fields(patch)
    H, K = mean_gauss(p, q, r, s, t)
    two_hp = laplace_beltrami(patch, phi) + (4.0 * H * H - 2.0 * K) * phi
    kp = div_t1_grad(patch, phi) + 2.0 * H * K * phi
    return two_hp, kp


# ---------------------------------------------------------------------------
# Finite-difference variation path
# ---------------------------------------------------------------------------

def parametrized_curvatures(X: np.ndarray):
    """(H, K) of a parametrized surface patch X[(iy, ix)] in R^3 by centered
    differences; the normal is the (continuous) cross-product orientation.
    Valid one ring inside the array; NaN elsewhere."""
    Xu = np.full_like(X, np.nan)
    Xv = np.full_like(X, np.nan)
    Xuu = np.full_like(X, np.nan)
    Xvv = np.full_like(X, np.nan)
    Xuv = np.full_like(X, np.nan)
    Xu[:, 1:-1] = 0.5 * (X[:, 2:] - X[:, :-2])
    Xv[1:-1, :] = 0.5 * (X[2:, :] - X[:-2, :])
    Xuu[:, 1:-1] = X[:, 2:] - 2.0 * X[:, 1:-1] + X[:, :-2]
    Xvv[1:-1, :] = X[2:, :] - 2.0 * X[1:-1, :] + X[:-2, :]
    Xuv[1:-1, 1:-1] = 0.25 * (X[2:, 2:] - X[2:, :-2] - X[:-2, 2:] + X[:-2, :-2])
    n = np.cross(Xu, Xv)
    with np.errstate(invalid="ignore"):
        nn = n / np.linalg.norm(n, axis=-1, keepdims=True)
        E = np.einsum("...k,...k->...", Xu, Xu)
        F = np.einsum("...k,...k->...", Xu, Xv)
        G = np.einsum("...k,...k->...", Xv, Xv)
        L = np.einsum("...k,...k->...", Xuu, nn)
        M = np.einsum("...k,...k->...", Xuv, nn)
        N = np.einsum("...k,...k->...", Xvv, nn)
        det = E * G - F * F
        H = (L * G - 2.0 * M * F + N * E) / (2.0 * det)
        K = (L * N - M * M) / det
    return H, K


def variation_derivatives(patch: GraphPatch, phi: np.ndarray, tau_step: float = DEFAULT_TAU):
    """(dH/dtau, dK/dtau) fields of the normal variation u + tau*phi*N by
    centered differences in tau; NaN outside the doubly-interior region.

    Raises when the varied surface stops being a graph (normal step too
    large for the patch's curvature)."""
    p, q, _, _, _ = jet_fields(patch)
    W = np.sqrt(1.0 + p * p + q * q)
    X, Y = patch.xy()
    base = np.stack([X, Y, patch.values], axis=-1)
    normal = np.stack([-p / W, -q / W, 1.0 / W], axis=-1)
    Hs, Ks = [], []
    for sign in (+1.0, -1.0):
        Xv = base + sign * tau_step * phi[..., None] * normal
        H, K = parametrized_curvatures(Xv)
        nz = np.cross(
            np.pad((Xv[:, 2:] - Xv[:, :-2]) * 0.5, ((0, 0), (1, 1), (0, 0)), constant_values=np.nan),
            np.pad((Xv[2:, :] - Xv[:-2, :]) * 0.5, ((1, 1), (0, 0), (0, 0)), constant_values=np.nan),
        )[..., 2]
        valid = np.isfinite(H)
        if np.any(valid & (nz <= 0.0)):
            raise ValueError("normal variation leaves graph form; reduce tau_step")
        Hs.append(H)
        Ks.append(K)
    dH = (Hs[0] - Hs[1]) / (2.0 * tau_step)
    dK = (Ks[0] - Ks[1]) / (2.0 * tau_step)
    return dH, dK


def weingarten_variation_rate(rel: RelationSpec, patch: GraphPatch, phi: np.ndarray,
                              tau_step: float = DEFAULT_TAU) -> np.ndarray:
    """Finite-difference rate of the residual under the normal variation:
    [W(tau) - W(-tau)]/(2 tau) with W(tau) = H(tau) - g(H(tau)^2 - K(tau))."""
    g = g_function(rel)
    if g is None:
        raise RelationError("variation rate needs a relation in g form")
    p, q, _, _, _ = jet_fields(patch)
    W = np.sqrt(1.0 + p * p + q * q)
    X, Y = patch.xy()
    base = np.stack([X, Y, patch.values], axis=-1)
    normal = np.stack([-p / W, -q / W, 1.0 / W], axis=-1)
    vals = []
    for sign in (+1.0, -1.0):
        H, K = parametrized_curvatures(base + sign * tau_step * phi[..., None] * normal)
        tt = np.where(np.isfinite(H), np.maximum(H * H - K, 0.0), np.nan)
        out = np.full_like(H, np.nan)
        ok = np.isfinite(tt)
        out[ok] = H[ok] - np.asarray(g(tt[ok]), dtype=float)
        vals.append(out)
    return (vals[0] - vals[1]) / (2.0 * tau_step)


# ---------------------------------------------------------------------------
# The linearized operator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearizedCoeffs:
    """Pointwise coefficients of L_g at curvature state (H, K)."""

    principal_laplacian_weight: float    # (1 - 2 g g')/2
    t1_weight: float                     # g'
    zeroth_order_q: float                # 2 g^2 (1 - 2 g g') - (1 - 4 g g') K


def linearized_coeffs(rel: RelationSpec, H: float, K: float) -> LinearizedCoeffs:
    g = g_function(rel)
    if g is None:
        raise RelationError("linearized coefficients need a relation in g form")
    tt = max(H * H - K, 0.0)
    gv = float(np.asarray(g(tt)))
    gp = float(np.asarray(g.derivative(tt)))
    w = 1.0 - 2.0 * gv * gp
    return LinearizedCoeffs(0.5 * w, gp, 2.0 * gv * gv * w - (1.0 - 4.0 * gv * gp) * K)


def apply_lg_on_grid(rel: RelationSpec, patch: GraphPatch, phi: np.ndarray) -> np.ndarray:
    """L_g[phi] with variable coefficients read from the patch's own jets."""
    g = g_function(rel)
    if g is None:
        raise RelationError("apply_lg_on_grid needs a relation in g form")
    p, q, r, s, t = jet_fields(patch)
    H, K = mean_gauss(p, q, r, s, t)
    tt = np.where(np.isfinite(H), np.maximum(H * H - K, 0.0), np.nan)
    gv = np.full_like(patch.values, np.nan)
    gp = np.full_like(patch.values, np.nan)
    ok = np.isfinite(tt)
    gv[ok] = np.asarray(g(tt[ok]), dtype=float)
    gp[ok] = np.asarray(g.derivative(tt[ok]), dtype=float)
    w = 1.0 - 2.0 * gv * gp
    qcoef = 2.0 * gv * gv * w - (1.0 - 4.0 * gv * gp) * K
    with np.errstate(invalid="ignore"):
        return 0.5 * w * laplace_beltrami(patch, phi) + gp * div_t1_grad(patch, phi) + qcoef * phi


@dataclass(frozen=True)
class CylinderOperator:
    """Constant-coefficient form A phi_ss + B phi_tt + C phi of L_g on a
    vertical cylinder of radius r0 (2*H0 = 1/r0), with C = 4*A*H0^2."""

    A: float
    B: float
    C: float
    H0: float
    r0: float

    def to_json(self) -> dict:
        return {"A": self.A, "B": self.B, "C": self.C, "H0": self.H0, "r0": self.r0}


def cylinder_operator(rel: RelationSpec, r0: float) -> CylinderOperator:
    """Constants of L_g on the cylinder of radius r0; rejects when the
    cylinder does not satisfy the relation (|g(H0^2) - H0| > 1e-10)."""
    if r0 <= 0.0:
        raise ValueError("cylinder radius must be positive")
    g = g_function(rel)
    if g is None:
        raise RelationError("cylinder_operator needs a relation in g form")
    H0 = 1.0 / (2.0 * r0)
    gv = float(np.asarray(g(H0 * H0)))
    if abs(gv - H0) > 1e-10:
        raise RelationError(
            f"cylinder of radius {r0} does not satisfy the relation: g(H0^2) = {gv:.12g} "
            f"but H0 = {H0:.12g}")
    gp = float(np.asarray(g.derivative(H0 * H0)))
    if not math.isfinite(gp):
        raise RelationError("g is not differentiable at the cylinder state")
    A = 0.5 * (1.0 - 2.0 * H0 * gp)
    B = A + 2.0 * H0 * gp
    C = 4.0 * A * H0 * H0
    return CylinderOperator(A, B, C, H0, r0)


def perturbation_threshold(op: CylinderOperator, L: float, r: float) -> float:
    """-A (pi/2L)^2 - B (pi/2r)^2 + C; positive means L_g[phi] > 0 inside
    [-L, L] x [-r, r] for phi = cos(pi s/2L) cos(pi t/2r)."""
    if L <= 0.0 or r <= 0.0:
        raise ValueError("box half-sizes must be positive")
    return -op.A * (math.pi / (2.0 * L)) ** 2 - op.B * (math.pi / (2.0 * r)) ** 2 + op.C
