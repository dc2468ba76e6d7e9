"""Gridded graphs z = u(x, y) and the Dirichlet problem for the Weingarten
graph PDE, solved by damped Newton iteration on a 9-point stencil.

Rectangle domains carry Dirichlet values on the outer node ring.  Disk
domains are masked out of a uniform grid; the in-domain ring next to the
circle ("cut" nodes) is tied to the prescribed boundary data by linear
interpolation along the grid direction that exits the domain soonest, which
keeps the overall scheme second order.

Also here: the norm of the second fundamental form per node, the intrinsic
h-function maximizer used by blow-up arguments (h = |sigma| * distance to
the boundary of an intrinsic disk), and the joint rescaling of patches and
relations that leaves h invariant.
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .errors import DomainError, RelationError
from .jets import mean_gauss, residual_fields
from .relation import (CMC, ClosedForm, GForm, LinearWeingarten, RelationSpec,
                       SampledHermite, g_function)

ARMIJO_FACTOR = 0.5
ARMIJO_SLOPE = 1.0e-4
MIN_STEP = 2.0 ** -20
SLOPE_LIMIT = 1.0e6          # interior |Du| beyond this counts as divergence
RESIDUAL_GROWTH_RUN = 5      # accepted steps with growing residual => diverged

BoundaryData = Union[float, Callable[[np.ndarray, np.ndarray], np.ndarray]]

_NEIGHBORS8 = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]


def _as_bc(bc: BoundaryData) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    if callable(bc):
        return bc
    c = float(bc)
    return lambda x, y: np.full_like(np.asarray(x, dtype=float), c)


@dataclass
class GraphPatch:
    """A gridded graph over a rectangle or a disk mask.

    values[iy, ix] holds u at (x0 + ix*h, y0 + iy*h); nodes outside the
    domain mask are NaN.  Interior nodes have the full 9-point stencil
    inside the mask; the remaining in-domain nodes carry boundary data.
    """

    x0: float
    y0: float
    h: float
    mask: np.ndarray
    values: np.ndarray
    kind: str = "rectangle"
    disk_spec: Optional[tuple] = None   # (cx, cy, radius)
    # cut-node interpolation ties (disk domains): parallel arrays
    tie_node: np.ndarray = field(default_factory=lambda: np.empty((0, 2), dtype=int))
    tie_inner: np.ndarray = field(default_factory=lambda: np.empty((0, 2), dtype=int))
    tie_tau: np.ndarray = field(default_factory=lambda: np.empty(0))
    tie_len: np.ndarray = field(default_factory=lambda: np.empty(0))
    tie_bc: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        self.values = np.asarray(self.values, dtype=float)
        if self.mask.shape != self.values.shape:
            raise ValueError("mask and values must have the same shape")
        self.values = np.where(self.mask, self.values, np.nan)

    @property
    def shape(self) -> tuple:
        return self.mask.shape

    def xy(self):
        ny, nx = self.shape
        x = self.x0 + self.h * np.arange(nx)
        y = self.y0 + self.h * np.arange(ny)
        return np.meshgrid(x, y)

    def interior_mask(self) -> np.ndarray:
        m = self.mask
        inner = np.zeros_like(m)
        inner[1:-1, 1:-1] = m[1:-1, 1:-1]
        for dy, dx in _NEIGHBORS8:
            inner[1:-1, 1:-1] &= m[1 + dy:m.shape[0] - 1 + dy, 1 + dx:m.shape[1] - 1 + dx]
        return inner

    def boundary_mask(self) -> np.ndarray:
        return self.mask & ~self.interior_mask()

    def copy(self) -> "GraphPatch":
        return GraphPatch(self.x0, self.y0, self.h, self.mask.copy(), self.values.copy(),
                          self.kind, self.disk_spec, self.tie_node.copy(), self.tie_inner.copy(),
                          self.tie_tau.copy(), self.tie_len.copy(), self.tie_bc.copy())

    # -- constructors ------------------------------------------------------

    @staticmethod
    def rectangle(bounds: tuple, h: float, boundary: BoundaryData = 0.0,
                  init: BoundaryData = 0.0) -> "GraphPatch":
        """Uniform grid over [x_min, x_max] x [y_min, y_max] (snapped to h)."""
        x_min, x_max, y_min, y_max = (float(v) for v in bounds)
        nx = int(round((x_max - x_min) / h)) + 1
        ny = int(round((y_max - y_min) / h)) + 1
        if nx < 3 or ny < 3:
            raise ValueError("rectangle patch needs at least 3 nodes per side")
        mask = np.ones((ny, nx), dtype=bool)
        patch = GraphPatch(x_min, y_min, h, mask, np.zeros((ny, nx)), "rectangle")
        X, Y = patch.xy()
        patch.values = np.asarray(_as_bc(init)(X, Y), dtype=float).copy()
        ring = patch.boundary_mask()
        patch.values[ring] = np.asarray(_as_bc(boundary)(X, Y), dtype=float)[ring]
        return patch

    @staticmethod
    def disk(center: tuple, radius: float, h: float, boundary: BoundaryData = 0.0,
             init: BoundaryData = 0.0) -> "GraphPatch":
        """Masked disk domain with the center snapped onto a grid node."""
        cx, cy = (float(v) for v in center)
        n = int(math.ceil(radius / h))
        x0, y0 = cx - n * h, cy - n * h
        size = 2 * n + 1
        mask = np.zeros((size, size), dtype=bool)
        patch = GraphPatch(x0, y0, h, mask, np.zeros((size, size)), "disk", (cx, cy, radius))
        X, Y = patch.xy()
        rho2 = (X - cx) ** 2 + (Y - cy) ** 2
        patch.mask = rho2 <= radius * radius * (1.0 + 1e-12)
        patch.values = np.where(patch.mask, np.asarray(_as_bc(init)(X, Y), dtype=float), np.nan)
        patch._build_disk_ties(_as_bc(boundary))
        return patch

    def _build_disk_ties(self, bc: Callable):
        cx, cy, R = self.disk_spec
        cut = np.argwhere(self.boundary_mask())
        nodes, inners, taus, lens_, bcs = [], [], [], [], []
        ny, nx = self.shape
        for iy, ix in cut:
            px = self.x0 + ix * self.h - cx
            py = self.y0 + iy * self.h - cy
            best = None
            for dy, dx in _NEIGHBORS8:
                jy, jx = iy + dy, ix + dx
                outside = not (0 <= jy < ny and 0 <= jx < nx) or not self.mask[jy, jx]
                if not outside:
                    continue
                ky, kx = iy - dy, ix - dx
                if not (0 <= ky < ny and 0 <= kx < nx) or not self.mask[ky, kx]:
                    continue
                step = self.h * math.hypot(dx, dy)
                ux, uy = dx / math.hypot(dx, dy), dy / math.hypot(dx, dy)
                pd = px * ux + py * uy
                disc = pd * pd - (px * px + py * py - R * R)
                if disc < 0.0:
                    continue
                tau = -pd + math.sqrt(disc)
                if tau < -1e-12 or tau > step * (1.0 + 1e-9):
                    continue
                if best is None or tau < best[0]:
                    bx = cx + px + max(tau, 0.0) * ux
                    by = cy + py + max(tau, 0.0) * uy
                    best = (max(tau, 0.0), step, (ky, kx), (bx, by))
            if best is None:
                # isolated sliver: pin to the radially nearest circle point
                rho = math.hypot(px, py)
                scale = R / rho if rho > 0 else 1.0
                self.values[iy, ix] = float(np.asarray(bc(cx + px * scale, cy + py * scale)))
                continue
            tau, step, inner, (bx, by) = best
            nodes.append((iy, ix))
            inners.append(inner)
            taus.append(tau)
            lens_.append(step)
            bcs.append(float(np.asarray(bc(bx, by))))
        self.tie_node = np.asarray(nodes, dtype=int).reshape(-1, 2)
        self.tie_inner = np.asarray(inners, dtype=int).reshape(-1, 2)
        self.tie_tau = np.asarray(taus, dtype=float)
        self.tie_len = np.asarray(lens_, dtype=float)
        self.tie_bc = np.asarray(bcs, dtype=float)
        # seed cut values from the boundary data so the initial guess is usable
        if len(nodes):
            self.values[self.tie_node[:, 0], self.tie_node[:, 1]] = self.tie_bc

    # -- I/O ---------------------------------------------------------------

    def save(self, csv_path, header_path):
        X, Y = self.xy()
        sel = self.mask
        rows = np.column_stack([X[sel], Y[sel], self.values[sel]])
        np.savetxt(csv_path, rows, delimiter=",", header="x,y,u", comments="")
        hdr = {
            "x0": self.x0, "y0": self.y0, "h": self.h, "shape": list(self.shape),
            "kind": self.kind, "disk": list(self.disk_spec) if self.disk_spec else None,
            "mask": ["".join("1" if v else "0" for v in row) for row in self.mask],
        }
        with open(header_path, "w") as fh:
            json.dump(hdr, fh, sort_keys=True, indent=1)

    @staticmethod
    def load(csv_path, header_path) -> "GraphPatch":
        with open(header_path) as fh:
            hdr = json.load(fh)
        mask = np.array([[c == "1" for c in row] for row in hdr["mask"]], dtype=bool)
        data = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
        values = np.full(mask.shape, np.nan)
        values[mask] = data[:, 2]
        patch = GraphPatch(hdr["x0"], hdr["y0"], hdr["h"], mask, values, hdr["kind"],
                           tuple(hdr["disk"]) if hdr["disk"] else None)
        if patch.kind == "disk":
            # re-derive the interpolation ties; boundary data is read back
            # from the stored cut-node values (tau ~ 0 nodes sit on the circle)
            bc_vals = values.copy()
            patch._build_disk_ties(lambda x, y: _nearest_value(bc_vals, patch, x, y))
            patch.values = np.where(mask, values, np.nan)
        return patch


def _nearest_value(vals: np.ndarray, patch: GraphPatch, x, y):
    ix = int(round((float(np.asarray(x)) - patch.x0) / patch.h))
    iy = int(round((float(np.asarray(y)) - patch.y0) / patch.h))
    iy = min(max(iy, 0), vals.shape[0] - 1)
    ix = min(max(ix, 0), vals.shape[1] - 1)
    return vals[iy, ix]


# ---------------------------------------------------------------------------
# Jets and residuals on the grid
# ---------------------------------------------------------------------------

def jet_fields(patch: GraphPatch):
    """(p, q, r, s, t) arrays at interior nodes, NaN elsewhere."""
    u, h = patch.values, patch.h
    ny, nx = u.shape
    p = np.full_like(u, np.nan)
    q = np.full_like(u, np.nan)
    r = np.full_like(u, np.nan)
    s = np.full_like(u, np.nan)
    t = np.full_like(u, np.nan)
    c = np.s_[1:-1, 1:-1]
    E, W = np.s_[1:-1, 2:], np.s_[1:-1, :-2]
    N, S = np.s_[2:, 1:-1], np.s_[:-2, 1:-1]
    NE, NW = np.s_[2:, 2:], np.s_[2:, :-2]
    SE, SW = np.s_[:-2, 2:], np.s_[:-2, :-2]
    with np.errstate(invalid="ignore"):
        p[c] = (u[E] - u[W]) / (2 * h)
        q[c] = (u[N] - u[S]) / (2 * h)
        r[c] = (u[E] - 2 * u[c] + u[W]) / h ** 2
        t[c] = (u[N] - 2 * u[c] + u[S]) / h ** 2
        s[c] = (u[NE] - u[NW] - u[SE] + u[SW]) / (4 * h ** 2)
    keep = patch.interior_mask()
    for a in (p, q, r, s, t):
        a[~keep] = np.nan
    return p, q, r, s, t


def _relation_g(rel: RelationSpec):
    g = g_function(rel)
    if g is None:
        from .relation import f_to_g
        g = f_to_g(rel).g
    return g


def residual_field(rel: RelationSpec, patch: GraphPatch) -> np.ndarray:
    """Weingarten residual at each interior node (NaN elsewhere)."""
    g = _relation_g(rel)
    p, q, r, s, t = jet_fields(patch)
    keep = patch.interior_mask()
    out = np.full_like(patch.values, np.nan)
    H, K = mean_gauss(p[keep], q[keep], r[keep], s[keep], t[keep])
    tt = H * H - K
    tt = np.where((tt < 0.0) & (tt > -1e-14), 0.0, tt)
    inside = g.domain.contains(tt, tol=1e-12)
    if not np.all(inside):
        node = np.argwhere(keep)[~inside][0]
        raise DomainError(
            f"relation domain violated at node (iy={node[0]}, ix={node[1]}): "
            f"H^2-K = {tt[~inside][0]:.6g}")
    out[keep] = H - np.asarray(g(tt), dtype=float)
    return out


def second_fundamental_norm_field(patch: GraphPatch) -> np.ndarray:
    """|sigma| = sqrt(k1^2 + k2^2) = sqrt(4H^2 - 2K) per interior node."""
    p, q, r, s, t = jet_fields(patch)
    keep = patch.interior_mask()
    out = np.full_like(patch.values, np.nan)
    H, K = mean_gauss(p[keep], q[keep], r[keep], s[keep], t[keep])
    out[keep] = np.sqrt(np.maximum(4.0 * H * H - 2.0 * K, 0.0))
    return out


# ---------------------------------------------------------------------------
# Newton solver
# ---------------------------------------------------------------------------

@dataclass
class SolveOutcome:
    status: str                  # converged | diverged | max_iterations | line_search_failure
    residual_sup: float
    iterations: int
    final_patch: GraphPatch

    def to_json(self) -> dict:
        return {"status": self.status, "residual_sup": self.residual_sup,
                "iterations": self.iterations}


class _System:
    """Index maps and assembly for one patch + relation."""

    def __init__(self, rel: RelationSpec, patch: GraphPatch):
        self.g = _relation_g(rel)
        self.patch = patch
        self.h = patch.h
        self.interior = patch.interior_mask()
        self.iy, self.ix = np.nonzero(self.interior)
        ny, nx = patch.shape
        self.index = np.full((ny, nx), -1, dtype=int)
        n_int = self.iy.size
        self.index[self.iy, self.ix] = np.arange(n_int)
        self.tied = patch.tie_node
        n_tie = self.tied.shape[0]
        if n_tie:
            self.index[self.tied[:, 0], self.tied[:, 1]] = n_int + np.arange(n_tie)
        self.n = n_int + n_tie
        self.n_int = n_int

    def unknowns(self, values: np.ndarray) -> np.ndarray:
        z = np.empty(self.n)
        z[:self.n_int] = values[self.iy, self.ix]
        if self.tied.shape[0]:
            z[self.n_int:] = values[self.tied[:, 0], self.tied[:, 1]]
        return z

    def insert(self, values: np.ndarray, z: np.ndarray) -> np.ndarray:
        out = values.copy()
        out[self.iy, self.ix] = z[:self.n_int]
        if self.tied.shape[0]:
            out[self.tied[:, 0], self.tied[:, 1]] = z[self.n_int:]
        return out

    def _jets_at_interior(self, values: np.ndarray):
        u, h = values, self.h
        iy, ix = self.iy, self.ix
        p = (u[iy, ix + 1] - u[iy, ix - 1]) / (2 * h)
        q = (u[iy + 1, ix] - u[iy - 1, ix]) / (2 * h)
        r = (u[iy, ix + 1] - 2 * u[iy, ix] + u[iy, ix - 1]) / h ** 2
        t = (u[iy + 1, ix] - 2 * u[iy, ix] + u[iy - 1, ix]) / h ** 2
        s = (u[iy + 1, ix + 1] - u[iy + 1, ix - 1] - u[iy - 1, ix + 1] + u[iy - 1, ix - 1]) / (4 * h ** 2)
        return p, q, r, s, t

    def residual(self, values: np.ndarray, with_gradient: bool = False):
        """Residual in two scalings.

        Returns (F_vec, work_vec, slope[, work_grads]):
        F_vec is the reported residual H - g(H^2-K) (plus the linear tie
        rows); work_vec scales the PDE rows by 2*(1+p^2+q^2)^(3/2), the
        quasilinear form whose Newton linearization stays well conditioned
        at steep slopes.  Both vanish together.
        """
        p, q, r, s, t = self._jets_at_interior(values)
        res = residual_fields(self.g, p, q, r, s, t, with_gradient=with_gradient)
        F, grads = (res if with_gradient else (res, None))
        w3 = 2.0 * (1.0 + p * p + q * q) ** 1.5
        F_vec = np.empty(self.n)
        work = np.empty(self.n)
        F_vec[:self.n_int] = F
        work[:self.n_int] = w3 * F
        if self.tied.shape[0]:
            pt = self.patch
            u_c = values[self.tied[:, 0], self.tied[:, 1]]
            u_i = values[pt.tie_inner[:, 0], pt.tie_inner[:, 1]]
            wgt = pt.tie_tau / (pt.tie_tau + pt.tie_len)
            tie = u_c - (wgt * u_i + (1.0 - wgt) * pt.tie_bc)
            F_vec[self.n_int:] = tie
            work[self.n_int:] = tie
        slope = float(np.max(np.abs(np.concatenate([p, q])))) if p.size else 0.0
        if not with_gradient:
            return F_vec, work, slope
        # d(w3*F)/dw = w3*F_w + F * d(w3)/dw;  d(w3)/dp = 6pW, d(w3)/dq = 6qW
        wroot = np.sqrt(1.0 + p * p + q * q)
        scaled = [w3 * grads[i] for i in range(5)]
        scaled[0] = scaled[0] + 6.0 * p * wroot * F
        scaled[1] = scaled[1] + 6.0 * q * wroot * F
        return F_vec, work, slope, tuple(scaled)

    def jacobian(self, grads) -> sp.csr_matrix:
        Fp, Fq, Fr, Fs, Ft = grads
        h = self.h
        iy, ix = self.iy, self.ix
        rows_idx = np.arange(self.n_int)
        entries = [
            (0, 1, Fp / (2 * h) + Fr / h ** 2),
            (0, -1, -Fp / (2 * h) + Fr / h ** 2),
            (1, 0, Fq / (2 * h) + Ft / h ** 2),
            (-1, 0, -Fq / (2 * h) + Ft / h ** 2),
            (0, 0, -2 * Fr / h ** 2 - 2 * Ft / h ** 2),
            (1, 1, Fs / (4 * h ** 2)),
            (-1, -1, Fs / (4 * h ** 2)),
            (1, -1, -Fs / (4 * h ** 2)),
            (-1, 1, -Fs / (4 * h ** 2)),
        ]
        rows, cols, vals = [], [], []
        for dy, dx, coeff in entries:
            col = self.index[iy + dy, ix + dx]
            keep = col >= 0
            rows.append(rows_idx[keep])
            cols.append(col[keep])
            vals.append(coeff[keep])
        pt = self.patch
        n_tie = self.tied.shape[0]
        if n_tie:
            tie_rows = self.n_int + np.arange(n_tie)
            rows.append(tie_rows)
            cols.append(self.index[self.tied[:, 0], self.tied[:, 1]])
            vals.append(np.ones(n_tie))
            w = pt.tie_tau / (pt.tie_tau + pt.tie_len)
            inner_col = self.index[pt.tie_inner[:, 0], pt.tie_inner[:, 1]]
            keep = inner_col >= 0
            rows.append(tie_rows[keep])
            cols.append(inner_col[keep])
            vals.append(-w[keep])
        return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(self.n, self.n))


def newton_solve(rel: RelationSpec, patch0: GraphPatch, tol_res: float = 1e-10,
                 max_iter: int = 50) -> SolveOutcome:
    """Damped Newton for the Weingarten graph PDE with Dirichlet data.

    Armijo backtracking on the residual 2-norm (factor 0.5, minimum step
    2**-20); divergence is declared after five consecutive accepted steps of
    residual growth or when the interior slope exceeds 1e6.
    """
    patch = patch0.copy()
    sys_ = _System(rel, patch)
    if sys_.n_int == 0:
        raise ValueError("patch has no interior nodes")
    values = patch.values.copy()

    def outcome(status, res_sup, it):
        patch.values = values
        return SolveOutcome(status, float(res_sup), it, patch)

    F_vec, work, slope = sys_.residual(values)
    res_sup = np.max(np.abs(F_vec))
    growth = 0
    for it in range(1, max_iter + 1):
        if res_sup <= tol_res:
            return outcome("converged", res_sup, it - 1)
        try:
            _, _, _, grads = sys_.residual(values, with_gradient=True)
            J = sys_.jacobian(grads)
            step = spsolve(J, -work)
        except (RuntimeError, DomainError, ValueError):
            return outcome("line_search_failure", res_sup, it - 1)
        if not np.all(np.isfinite(step)):
            return outcome("line_search_failure", res_sup, it - 1)

        norm0 = np.linalg.norm(work)
        z = sys_.unknowns(values)
        scale = 1.0
        accepted = False
        while scale >= MIN_STEP:
            try:
                trial = sys_.insert(values, z + scale * step)
                F_new, work_new, slope = sys_.residual(trial)
            except DomainError:
                scale *= ARMIJO_FACTOR
                continue
            if np.linalg.norm(work_new) <= (1.0 - 2 * ARMIJO_SLOPE * scale) * norm0:
                values, F_vec, work = trial, F_new, work_new
                accepted = True
                break
            scale *= ARMIJO_FACTOR
        if not accepted:
            return outcome("line_search_failure", res_sup, it)

        new_sup = np.max(np.abs(F_vec))
        growth = growth + 1 if new_sup > res_sup else 0
        res_sup = new_sup
        if slope > SLOPE_LIMIT or growth >= RESIDUAL_GROWTH_RUN:
            return outcome("diverged", res_sup, it)
    if res_sup <= tol_res:
        return outcome("converged", res_sup, max_iter)
    return outcome("max_iterations", res_sup, max_iter)


# ---------------------------------------------------------------------------
# Intrinsic distances and the blow-up h-function
# ---------------------------------------------------------------------------

def _edge_length(patch: GraphPatch, ay, ax, by, bx) -> float:
    du = patch.values[by, bx] - patch.values[ay, ax]
    return math.sqrt((patch.h * (bx - ax)) ** 2 + (patch.h * (by - ay)) ** 2 + du * du)


def intrinsic_distances(patch: GraphPatch, sources, within: Optional[np.ndarray] = None) -> np.ndarray:
    """Multi-source Dijkstra over the 8-neighbor grid graph with induced-metric
    secant edge lengths.  `sources` is an iterable of (iy, ix); `within`
    optionally restricts traversal to a node set."""
    ny, nx = patch.shape
    allowed = patch.mask if within is None else (patch.mask & within)
    dist = np.full((ny, nx), np.inf)
    heap = []
    for iy, ix in sources:
        if not allowed[iy, ix]:
            continue
        dist[iy, ix] = 0.0
        heap.append((0.0, iy * nx + ix))
    heapq.heapify(heap)
    while heap:
        d, flat = heapq.heappop(heap)
        iy, ix = divmod(flat, nx)
        if d > dist[iy, ix]:
            continue
        for dy, dx in _NEIGHBORS8:
            jy, jx = iy + dy, ix + dx
            if not (0 <= jy < ny and 0 <= jx < nx) or not allowed[jy, jx]:
                continue
            nd = d + _edge_length(patch, iy, ix, jy, jx)
            if nd < dist[jy, jx]:
                dist[jy, jx] = nd
                heapq.heappush(heap, (nd, jy * nx + jx))
    return dist


@dataclass
class BlowupSelection:
    """Argmax bookkeeping for h(q) = |sigma(q)| * d(q, boundary of D)."""

    q_n: tuple          # (iy, ix) grid node
    lambda_n: float     # |sigma| at q_n
    r_n: float          # intrinsic distance of q_n to the disk boundary
    h_max: float

    def to_json(self) -> dict:
        return {"q_n": list(self.q_n), "lambda_n": self.lambda_n,
                "r_n": self.r_n, "h_max": self.h_max}


def blowup_select(patch: GraphPatch, center: tuple, radius: float,
                  sigma_field: Optional[np.ndarray] = None) -> BlowupSelection:
    """Maximize h = |sigma| * d(., boundary of the intrinsic disk D(center, radius)).

    `center` is a grid node (iy, ix).  Ties break toward the lowest
    row-major node index.  `sigma_field` overrides the patch's own |sigma|
    (useful for synthetic fields)."""
    iy0, ix0 = int(center[0]), int(center[1])
    ny, nx = patch.shape
    if not (0 <= iy0 < ny and 0 <= ix0 < nx) or not patch.mask[iy0, ix0]:
        raise ValueError(f"blow-up center {center} is not an in-domain node")
    d_center = intrinsic_distances(patch, [(iy0, ix0)])
    in_disk = patch.mask & (d_center <= radius)
    if not np.any(in_disk):
        raise ValueError("intrinsic disk is empty")

    bd = np.zeros_like(in_disk)
    for dy, dx in _NEIGHBORS8:
        shifted = np.zeros_like(in_disk)
        ys = slice(max(dy, 0), ny + min(dy, 0))
        yd = slice(max(-dy, 0), ny + min(-dy, 0))
        xs = slice(max(dx, 0), nx + min(dx, 0))
        xd = slice(max(-dx, 0), nx + min(-dx, 0))
        shifted[yd, xd] = ~in_disk[ys, xs]
        bd |= in_disk & shifted
    # nodes on the patch mask edge also bound the disk
    edge = in_disk & patch.boundary_mask()
    bd |= edge

    d_bd = intrinsic_distances(patch, [tuple(n) for n in np.argwhere(bd)], within=in_disk)
    sigma = second_fundamental_norm_field(patch) if sigma_field is None else np.asarray(sigma_field, dtype=float)
    with np.errstate(invalid="ignore"):
        hfun = np.where(in_disk & np.isfinite(sigma) & np.isfinite(d_bd), sigma * d_bd, -np.inf)
    flat = int(np.argmax(hfun))
    qy, qx = divmod(flat, nx)
    if not np.isfinite(hfun[qy, qx]):
        raise ValueError("h-function is nowhere finite on the disk")
    return BlowupSelection((qy, qx), float(sigma[qy, qx]), float(d_bd[qy, qx]),
                           float(hfun[qy, qx]))


# ---------------------------------------------------------------------------
# Blow-up rescalings
# ---------------------------------------------------------------------------

def rescale_relation(rel: RelationSpec, lam: float) -> RelationSpec:
    """Relation satisfied by the rescaled surface lam * surface:
    G(t) = g(lam^2 t) / lam.  Preserves the uniform ellipticity constant."""
    if lam <= 0.0:
        raise ValueError("rescaling factor must be positive")
    if isinstance(rel, CMC):
        return CMC(rel.h0 / lam)
    if isinstance(rel, LinearWeingarten):
        return LinearWeingarten(rel.alpha, lam * rel.beta, rel.delta / lam)
    if isinstance(rel, GForm):
        g = rel.g
        if isinstance(g, ClosedForm):
            if g.name == "constant":
                return GForm(ClosedForm("constant", {"value": float(g.params["value"]) / lam},
                                        g.domain))
            if g.name == "sqrt_offset":
                c, e, d = (float(g.params[k]) for k in ("scale", "offset", "shift"))
                return GForm(ClosedForm("sqrt_offset",
                                        {"scale": c, "offset": e / lam ** 2, "shift": d / lam},
                                        g.domain))
        if isinstance(g, SampledHermite):
            return GForm(SampledHermite(g.breakpoints / lam ** 2, g.values / lam,
                                        g.derivatives * lam))
        raise RelationError(f"cannot rescale g of kind {type(g).__name__}/{getattr(g, 'name', '')}")
    raise RelationError("rescale_relation needs a relation in g form")


def rescale_patch(patch: GraphPatch, lam: float) -> GraphPatch:
    """Scale coordinates and heights by lam; |sigma| scales by 1/lam and the
    Weingarten residual under the jointly rescaled relation by 1/lam."""
    if lam <= 0.0:
        raise ValueError("rescaling factor must be positive")
    disk = None
    if patch.disk_spec is not None:
        cx, cy, R = patch.disk_spec
        disk = (cx * lam, cy * lam, R * lam)
    return GraphPatch(patch.x0 * lam, patch.y0 * lam, patch.h * lam, patch.mask.copy(),
                      patch.values * lam, patch.kind, disk,
                      patch.tie_node.copy(), patch.tie_inner.copy(),
                      patch.tie_tau * lam, patch.tie_len * lam, patch.tie_bc * lam)
