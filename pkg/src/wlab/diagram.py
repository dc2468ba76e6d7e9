"""Curvature-diagram analysis.

A curvature diagram is the multiset of principal-curvature pairs
(k1, k2), k1 >= k2, attained by a surface.  This module classifies
diagrams against the quasiconformality inequality
k1^2 + k2^2 <= 2*gamma*k1*k2, converts between the gamma constant and the
Beltrami bound mu, computes the wedge of boundary slopes, tests membership
in decreasing-envelope regions, evaluates Beltrami coefficients of metrics,
and builds empirical diagrams from triangle meshes by quadric fitting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import MeshError, RelationError
from .geometry import CurvaturePair, ProfileCurve
from .jets import mean_gauss
from .relation import ScalarFunction
from .solver import GraphPatch, jet_fields

ZERO_TOL = 1.0e-13          # absolute tolerance for "exactly zero" curvature
FIT_COND_LIMIT = 1.0e8      # quadric fits above this condition number are skipped


@dataclass
class CurvatureDiagram:
    """Multiset of ordered principal-curvature pairs with a provenance tag."""

    samples: np.ndarray                     # (N, 2), k1 >= k2 per row
    source: str = "synthetic"               # patch | profile | mesh | synthetic
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        a = np.asarray(self.samples, dtype=float).reshape(-1, 2)
        swap = a[:, 0] < a[:, 1]
        a[swap] = a[swap][:, ::-1]
        self.samples = a

    def __len__(self) -> int:
        return self.samples.shape[0]

    def scaled(self, lam: float) -> "CurvatureDiagram":
        return CurvatureDiagram(self.samples * lam, self.source, dict(self.notes))

    def save_csv(self, path):
        np.savetxt(path, self.samples, delimiter=",", header="k1,k2", comments="")

    @staticmethod
    def from_pairs(pairs: Sequence, source: str = "synthetic") -> "CurvatureDiagram":
        rows = [(p.k1, p.k2) if isinstance(p, CurvaturePair) else (p[0], p[1]) for p in pairs]
        return CurvatureDiagram(np.asarray(rows, dtype=float), source)

    @staticmethod
    def from_patch(patch: GraphPatch) -> "CurvatureDiagram":
        p, q, r, s, t = jet_fields(patch)
        keep = patch.interior_mask()
        H, K = mean_gauss(p[keep], q[keep], r[keep], s[keep], t[keep])
        root = np.sqrt(np.maximum(H * H - K, 0.0))
        return CurvatureDiagram(np.column_stack([H + root, H - root]), "patch")

    @staticmethod
    def from_profile(profile: ProfileCurve) -> "CurvatureDiagram":
        return CurvatureDiagram(np.column_stack([profile.kappa_m, profile.kappa_p]), "profile")


# ---------------------------------------------------------------------------
# Quasiconformality classification
# ---------------------------------------------------------------------------

def mu_gamma(mu: float) -> float:
    """gamma = (mu^2 + 1)/(mu^2 - 1) <= -1 for mu in [0, 1)."""
    if not 0.0 <= mu < 1.0:
        raise ValueError(f"mu must lie in [0, 1), got {mu}")
    return (mu * mu + 1.0) / (mu * mu - 1.0)


def gamma_mu(gamma: float) -> float:
    """Inverse of mu_gamma on the branch gamma <= -1."""
    if gamma > -1.0:
        raise ValueError(f"gamma must be <= -1, got {gamma}")
    return math.sqrt(max((gamma + 1.0) / (gamma - 1.0), 0.0))


def gamma_to_wedge(gamma: float) -> tuple:
    """Boundary slopes m = gamma +- sqrt(gamma^2 - 1) of the wedge where the
    quasiconformality inequality is an equality; m1 <= m2 < 0, m1*m2 = 1."""
    if gamma > -1.0:
        raise ValueError(f"gamma must be <= -1, got {gamma}")
    root = math.sqrt(max(gamma * gamma - 1.0, 0.0))
    return (gamma - root, gamma + root)


@dataclass
class QCReport:
    classification: str                      # plane_like | negative_branch | positive_branch | infeasible
    gamma_star: Optional[float] = None
    mu: Optional[float] = None
    wedge_slopes: Optional[tuple] = None
    worst_sample: Optional[tuple] = None     # offending pair when infeasible

    def to_json(self) -> dict:
        return {"classification": self.classification, "gamma_star": self.gamma_star,
                "mu": self.mu,
                "wedge_slopes": list(self.wedge_slopes) if self.wedge_slopes else None,
                "worst_sample": list(self.worst_sample) if self.worst_sample else None}


def qc_classify(d: CurvatureDiagram) -> QCReport:
    """Tightest single-constant classification of the inequality
    k1^2 + k2^2 <= 2*gamma*k1*k2 over the diagram.

    Samples with k1*k2 < 0 require gamma <= ratio <= -1, samples with
    k1*k2 > 0 require gamma >= ratio >= 1, flat umbilics (both curvatures
    zero within 1e-13) are compatible with every branch, and a sample with
    exactly one vanishing curvature admits no gamma at all.  Mixing the two
    strict branches is infeasible.
    """
    if len(d) == 0:
        raise ValueError("cannot classify an empty diagram")
    k1, k2 = d.samples[:, 0], d.samples[:, 1]
    z1, z2 = np.abs(k1) <= ZERO_TOL, np.abs(k2) <= ZERO_TOL
    neutral = z1 & z2
    lonely_zero = z1 ^ z2
    if np.any(lonely_zero):
        idx = int(np.argmax(lonely_zero))
        return QCReport("infeasible", worst_sample=(float(k1[idx]), float(k2[idx])))
    live = ~neutral
    prod = k1 * k2
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (k1 * k1 + k2 * k2) / (2.0 * prod)
    neg = live & (prod < 0.0)
    pos = live & (prod > 0.0)
    if np.any(neg) and np.any(pos):
        idx = int(np.argmax(pos))
        return QCReport("infeasible", worst_sample=(float(k1[idx]), float(k2[idx])))
    if np.any(neg):
        gamma = float(np.min(ratio[neg]))
        return QCReport("negative_branch", gamma_star=gamma, mu=gamma_mu(gamma),
                        wedge_slopes=gamma_to_wedge(gamma))
    if np.any(pos):
        gamma = float(np.max(ratio[pos]))
        mu = math.sqrt((gamma - 1.0) / (gamma + 1.0))
        return QCReport("positive_branch", gamma_star=gamma, mu=mu)
    return QCReport("plane_like")


# ---------------------------------------------------------------------------
# Envelope regions
# ---------------------------------------------------------------------------

@dataclass
class PhiRegion:
    """Region {x >= 0, phi1(x) <= y <= phi2(x)} (or its reflection across
    (x, y) -> (-y, -x) when starred) with decreasing envelopes that vanish
    at 0 and are bounded below by s0 < 0."""

    phi1: ScalarFunction
    phi2: ScalarFunction
    s0: float
    starred: bool = False

    def __post_init__(self):
        if not self.s0 < 0.0:
            raise RelationError("envelope floor s0 must be negative")
        probe = np.linspace(0.0, 50.0, 201)
        probe = probe[np.asarray(self.phi1.domain.contains(probe), dtype=bool)]
        v1 = np.asarray(self.phi1(probe), dtype=float)
        v2 = np.asarray(self.phi2(probe), dtype=float)
        tol = 1e-12
        if abs(v1[0]) > 1e-9 or abs(v2[0]) > 1e-9:
            raise RelationError("envelopes must vanish at x = 0")
        if np.any(np.diff(v1) > tol) or np.any(np.diff(v2) > tol):
            raise RelationError("envelopes must be decreasing")
        if np.any(v1 > v2 + tol) or np.any(v2 > tol) or np.any(v1 < self.s0 - tol):
            raise RelationError("envelopes must satisfy s0 <= phi1 <= phi2 <= 0")


@dataclass
class RegionCheck:
    ok: bool
    worst_index: Optional[int] = None
    worst_violation: float = 0.0
    worst_sample: Optional[tuple] = None


def region_membership(d: CurvatureDiagram, reg: PhiRegion) -> RegionCheck:
    """Check every sample against the region; vacuously true when empty.
    Reports the worst violation (most positive excursion outside)."""
    if len(d) == 0:
        return RegionCheck(True)
    x, y = d.samples[:, 0].copy(), d.samples[:, 1].copy()
    if reg.starred:
        x, y = -d.samples[:, 1], -d.samples[:, 0]
    viol = np.maximum(-x, 0.0)
    inside_x = x >= 0.0
    xc = np.clip(x, 0.0, None)
    cover = np.asarray(reg.phi1.domain.contains(xc), dtype=bool)
    v1 = np.full_like(x, -np.inf)
    v2 = np.full_like(x, np.inf)
    v1[cover] = np.asarray(reg.phi1(xc[cover]), dtype=float)
    v2[cover] = np.asarray(reg.phi2(xc[cover]), dtype=float)
    viol = np.maximum(viol, np.where(inside_x, np.maximum(v1 - y, y - v2), viol))
    worst = int(np.argmax(viol))
    if viol[worst] <= 1e-12:
        return RegionCheck(True)
    return RegionCheck(False, worst, float(viol[worst]),
                       (float(d.samples[worst, 0]), float(d.samples[worst, 1])))


# ---------------------------------------------------------------------------
# Beltrami quantities
# ---------------------------------------------------------------------------

def beltrami_of_metric(E, F, G):
    """Conformal factor and Beltrami coefficient of the metric
    E dx^2 + 2F dx dy + G dy^2: rho = (E + G + 2 sqrt(EG - F^2))/4 and
    mu = (E - G + 2iF)/(4 rho), always |mu| < 1 for positive-definite input."""
    E = np.asarray(E, dtype=float)
    F = np.asarray(F, dtype=float)
    G = np.asarray(G, dtype=float)
    det = E * G - F * F
    if np.any(E <= 0.0) or np.any(G <= 0.0) or np.any(det <= 0.0):
        raise ValueError("metric must be positive definite (E, G, EG - F^2 > 0)")
    rho = 0.25 * (E + G + 2.0 * np.sqrt(det))
    mu = (E - G + 2.0j * F) / (4.0 * rho)
    if np.any(np.abs(mu) >= 1.0):
        raise AssertionError("Beltrami coefficient reached modulus 1 on a definite metric")
    return rho, mu


def gauss_beltrami_ratio(pair: CurvaturePair) -> float:
    """((k1 + k2)/(k1 - k2))^2, the squared Beltrami ratio of the projected
    Gauss map in a conformal parameter; infinite at umbilics."""
    diff = pair.k1 - pair.k2
    if diff == 0.0:
        return math.inf
    return ((pair.k1 + pair.k2) / diff) ** 2


# ---------------------------------------------------------------------------
# Triangle meshes
# ---------------------------------------------------------------------------

@dataclass
class TriMesh:
    vertices: np.ndarray       # (N, 3)
    faces: np.ndarray          # (M, 3) int
    ignored_records: int = 0

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        self.faces = np.asarray(self.faces, dtype=int).reshape(-1, 3)
        if self.faces.size and (self.faces.min() < 0 or self.faces.max() >= len(self.vertices)):
            raise MeshError("face index out of range")


def load_obj(path) -> TriMesh:
    """Minimal OBJ reader: 'v' and triangular 'f' records only; anything else
    is ignored and counted.  Vertex indices are 1-based, 'i/j/k' forms allowed."""
    verts, faces, ignored = [], [], 0
    with open(path) as fh:
        for ln, line in enumerate(fh, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                if len(parts) < 4:
                    raise MeshError(f"line {ln}: vertex needs 3 coordinates")
                try:
                    verts.append([float(parts[1]), float(parts[2]), float(parts[3])])
                except ValueError as exc:
                    raise MeshError(f"line {ln}: bad vertex coordinate") from exc
            elif parts[0] == "f":
                idx = []
                for tok in parts[1:]:
                    head = tok.split("/")[0]
                    try:
                        v = int(head)
                    except ValueError as exc:
                        raise MeshError(f"line {ln}: bad face index {tok!r}") from exc
                    if v <= 0:
                        raise MeshError(f"line {ln}: only positive face indices are supported")
                    idx.append(v - 1)
                if len(idx) == 3:
                    faces.append(idx)
                else:
                    ignored += 1
            else:
                ignored += 1
    if not verts or not faces:
        raise MeshError("OBJ contains no usable triangles")
    return TriMesh(np.asarray(verts), np.asarray(faces), ignored)


def _mesh_topology(mesh: TriMesh):
    """Edge bookkeeping; raises on non-manifold or inconsistently oriented input."""
    undirected, directed = {}, set()
    for fi, (a, b, c) in enumerate(mesh.faces):
        for u, v in ((a, b), (b, c), (c, a)):
            if (u, v) in directed:
                raise MeshError(f"inconsistent orientation at edge ({u}, {v})")
            directed.add((u, v))
            key = (min(u, v), max(u, v))
            undirected.setdefault(key, []).append(fi)
            if len(undirected[key]) > 2:
                raise MeshError(f"non-manifold edge ({key[0]}, {key[1]})")
    boundary_vertices = set()
    for (u, v), fs in undirected.items():
        if len(fs) == 1:
            boundary_vertices.add(u)
            boundary_vertices.add(v)
    return boundary_vertices


def _vertex_normals(mesh: TriMesh) -> np.ndarray:
    V, Fc = mesh.vertices, mesh.faces
    fn = np.cross(V[Fc[:, 1]] - V[Fc[:, 0]], V[Fc[:, 2]] - V[Fc[:, 0]])  # 2*area*normal
    normals = np.zeros_like(V)
    for k in range(3):
        np.add.at(normals, Fc[:, k], fn)
    norm = np.linalg.norm(normals, axis=1, keepdims=True)
    norm[norm == 0.0] = 1.0
    return normals / norm


def mesh_diagram(mesh: TriMesh) -> CurvatureDiagram:
    """Per-vertex principal curvatures by a least-squares quadric fit over the
    2-ring in the tangent frame of the area-weighted vertex normal.

    Boundary vertices are skipped; fits with design condition number above
    1e8 (or fewer than 5 usable neighbors) are skipped and counted in
    diagram.notes.  Curvature signs follow the mesh orientation: the normal
    defined by the face winding is the graph's upward axis.
    """
    boundary = _mesh_topology(mesh)
    normals = _vertex_normals(mesh)
    V, Fc = mesh.vertices, mesh.faces
    nv = len(V)
    neighbors = [set() for _ in range(nv)]
    for a, b, c in Fc:
        neighbors[a].update((b, c))
        neighbors[b].update((a, c))
        neighbors[c].update((a, b))

    pairs = []
    skipped_degenerate = 0
    for vi in range(nv):
        if vi in boundary:
            continue
        ring = set(neighbors[vi])
        for w in list(ring):
            ring.update(neighbors[w])
        ring.discard(vi)
        ring = np.fromiter(ring, dtype=int)
        if ring.size < 5:
            skipped_degenerate += 1
            continue
        n = normals[vi]
        ref = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        e1 = np.cross(n, ref)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(n, e1)
        d = V[ring] - V[vi]
        x = d @ e1
        y = d @ e2
        zn = d @ n
        A = np.column_stack([x, y, 0.5 * x * x, x * y, 0.5 * y * y])
        sv = np.linalg.svd(A, compute_uv=False)
        if sv[-1] <= 0.0 or sv[0] / sv[-1] > FIT_COND_LIMIT:
            skipped_degenerate += 1
            continue
        coef, *_ = np.linalg.lstsq(A, zn, rcond=None)
        H, K = mean_gauss(*coef)
        root = math.sqrt(max(float(H * H - K), 0.0))
        pairs.append((float(H) + root, float(H) - root))
    if not pairs:
        raise MeshError("no vertex produced a usable curvature fit")
    return CurvatureDiagram(np.asarray(pairs), "mesh",
                            {"skipped_boundary": len(boundary),
                             "skipped_degenerate": skipped_degenerate,
                             "ignored_records": mesh.ignored_records,
                             "vertices": nv})
