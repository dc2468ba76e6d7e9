"""Curvature-diagram classification, Beltrami quantities and mesh tests."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_cylinder_mesh, make_flat_mesh, make_icosphere, write_obj
from wlab.diagram import (CurvatureDiagram, PhiRegion, QCReport, RegionCheck, TriMesh,
                          beltrami_of_metric, gamma_mu, gamma_to_wedge, gauss_beltrami_ratio,
                          load_obj, mesh_diagram, mu_gamma, qc_classify, region_membership)
from wlab.errors import MeshError, RelationError
from wlab.geometry import CurvaturePair
from wlab.relation import ClosedForm, GForm, Interval, SampledHermite, certify_ellipticity, g_to_f


class TestClassification:
    def test_minimal_diagram(self, rng):
        k = rng.uniform(0.1, 4.0, 200)
        rep = qc_classify(CurvatureDiagram(np.column_stack([k, -k])))
        assert rep.classification == "negative_branch"
        assert rep.gamma_star == pytest.approx(-1.0, abs=1e-12)
        assert rep.mu == pytest.approx(0.0, abs=1e-12)

    def test_umbilic_positive(self):
        rep = qc_classify(CurvatureDiagram(np.array([[1.0, 1.0]])))
        assert rep.classification == "positive_branch"
        assert rep.gamma_star == 1.0

    def test_two_minus_one(self):
        rep = qc_classify(CurvatureDiagram(np.array([[2.0, -1.0]])))
        assert rep.classification == "negative_branch"
        assert rep.gamma_star == pytest.approx(-1.25)
        # brute-force feasibility over a gamma grid
        gammas = np.linspace(-5.0, -1.0, 2001)
        feasible = gammas[5.0 <= 2.0 * gammas * -2.0]
        assert feasible.max() == pytest.approx(-1.25, abs=1e-3)

    def test_cylinder_pair_infeasible(self):
        rep = qc_classify(CurvatureDiagram(np.array([[2.0, 0.0]])))
        assert rep.classification == "infeasible"
        assert rep.worst_sample == (2.0, 0.0)

    def test_mixed_branches_infeasible(self):
        rep = qc_classify(CurvatureDiagram(np.array([[2.0, -1.0], [1.0, 0.5]])))
        assert rep.classification == "infeasible"

    def test_flat_umbilics_are_neutral(self):
        rep = qc_classify(CurvatureDiagram(np.array([[2.0, -1.0], [0.0, 0.0], [1e-14, -1e-14]])))
        assert rep.classification == "negative_branch"

    def test_all_flat_is_plane_like(self):
        rep = qc_classify(CurvatureDiagram(np.zeros((5, 2))))
        assert rep.classification == "plane_like"
        assert rep.gamma_star is None

    def test_every_sample_satisfies_inequality_at_gamma_star(self, rng):
        k1 = rng.uniform(0.2, 3.0, 500)
        k2 = -rng.uniform(0.2, 3.0, 500)
        rep = qc_classify(CurvatureDiagram(np.column_stack([k1, k2])))
        assert rep.classification == "negative_branch" and rep.gamma_star <= -1.0
        lhs = k1 ** 2 + k2 ** 2
        rhs = 2.0 * rep.gamma_star * k1 * k2
        assert np.all(lhs <= rhs * (1.0 + 1e-12))

    @settings(max_examples=100, deadline=None)
    @given(st.floats(1e-6, 1e6))
    def test_scale_covariance(self, lam):
        d = CurvatureDiagram(np.array([[2.0, -1.0], [1.5, -0.3], [0.7, -0.7]]))
        r1, r2 = qc_classify(d), qc_classify(d.scaled(lam))
        assert r1.classification == r2.classification
        assert r2.gamma_star == pytest.approx(r1.gamma_star, rel=1e-9)

    def test_empty_diagram_rejected(self):
        with pytest.raises(ValueError):
            qc_classify(CurvatureDiagram(np.empty((0, 2))))

    def test_uniformly_elliptic_minimal_samples_negative_branch(self):
        # composite check: relation-satisfying samples of a uniformly
        # elliptic minimal-type class classify with gamma* <= -1
        rel = GForm(ClosedForm("sqrt_offset", {"scale": 0.5, "offset": 1.0, "shift": -0.5}))
        rep = certify_ellipticity(rel)
        assert rep.uniform_constant_Lambda is not None and rep.minimal_type
        ts = np.logspace(-6, 3, 400)
        g = rel.g
        pairs = np.column_stack([np.asarray(g(ts)) + np.sqrt(ts),
                                 np.asarray(g(ts)) - np.sqrt(ts)])
        out = qc_classify(CurvatureDiagram(pairs))
        assert out.classification == "negative_branch"
        assert out.gamma_star <= -1.0


class TestGammaMu:
    def test_endpoints(self):
        assert mu_gamma(0.0) == -1.0
        assert gamma_mu(-1.0) == 0.0

    def test_minus_two(self):
        assert mu_gamma(1.0 / math.sqrt(3.0)) == pytest.approx(-2.0, abs=1e-14)
        assert gamma_mu(-2.0) == pytest.approx(1.0 / math.sqrt(3.0), abs=1e-15)

    def test_roundtrip_grid(self):
        # mu in (0, ~0.005) cannot round-trip through a double gamma at 1e-14:
        # gamma = -1 - 2 mu^2 + ... stores the mu^2 digits six decades down
        mus = np.concatenate([[0.0], np.linspace(0.01, 0.999, 500)])
        for mu in mus:
            assert gamma_mu(mu_gamma(float(mu))) == pytest.approx(float(mu), abs=1e-14)

    def test_range_checks(self):
        with pytest.raises(ValueError):
            mu_gamma(1.0)
        with pytest.raises(ValueError):
            gamma_mu(-0.5)


class TestWedge:
    def test_double_root(self):
        assert gamma_to_wedge(-1.0) == (-1.0, -1.0)

    def test_minus_two(self):
        m1, m2 = gamma_to_wedge(-2.0)
        assert m1 == pytest.approx(-2.0 - math.sqrt(3.0), abs=1e-12)
        assert m2 == pytest.approx(-2.0 + math.sqrt(3.0), abs=1e-12)
        # boundary samples satisfy equality in the quasiconformality inequality
        for m in (m1, m2):
            assert 1.0 + m * m == pytest.approx(2.0 * (-2.0) * m, abs=1e-10)

    def test_product_is_one(self, rng):
        for gamma in -1.0 - rng.exponential(1.0, 1000):
            m1, m2 = gamma_to_wedge(float(gamma))
            assert m1 * m2 == pytest.approx(1.0, abs=1e-12)
            assert m1 <= m2 < 0.0

    def test_rejects_wrong_branch(self):
        with pytest.raises(ValueError):
            gamma_to_wedge(0.5)

    def test_consistency_with_classification(self, rng):
        gamma = -2.5
        m1, m2 = gamma_to_wedge(gamma)
        ms = rng.uniform(m1 + 1e-6, m2 - 1e-6, 400)
        xs = rng.uniform(0.1, 5.0, 400)
        d = CurvatureDiagram(np.column_stack([xs, ms * xs]))
        rep = qc_classify(d)
        assert rep.classification == "negative_branch"
        assert rep.gamma_star >= gamma - 1e-10


class TestRegions:
    def phi_pair(self, floor=-2.0):
        phi1 = ClosedForm("affine", {"intercept": 0.0, "slope": -0.8},
                          Interval(0.0, -floor / 0.8))
        # piecewise-flat envelope via a Hermite sample: decreasing to the floor
        xs = np.linspace(0.0, 50.0, 200)
        vals = floor * (1.0 - np.exp(-xs))
        ders = floor * np.exp(-xs)
        phi_lo = SampledHermite(xs, vals, ders)
        return phi_lo, phi1

    def test_linear_weingarten_like_region(self):
        phi_lo, _ = self.phi_pair(-2.0)
        xs = np.linspace(0.0, 50.0, 200)
        reg = PhiRegion(phi_lo, SampledHermite(xs, np.zeros_like(xs), np.zeros_like(xs)),
                        s0=-2.5)
        # samples on a curve descending to a finite asymptote stay inside
        d = CurvatureDiagram(np.column_stack([xs[1:], -1.5 * (1 - np.exp(-xs[1:]))]))
        chk = region_membership(d, reg)
        assert chk.ok

    def test_violation_reported(self):
        phi_lo, _ = self.phi_pair(-2.0)
        xs = np.linspace(0.0, 50.0, 200)
        reg = PhiRegion(phi_lo, SampledHermite(xs, np.zeros_like(xs), np.zeros_like(xs)),
                        s0=-2.5)
        d = CurvatureDiagram(np.array([[1.0, -10.0]]))
        chk = region_membership(d, reg)
        assert not chk.ok
        assert chk.worst_sample == (1.0, -10.0)
        assert chk.worst_violation > 7.0

    def test_empty_diagram_vacuous(self):
        phi_lo, _ = self.phi_pair()
        xs = np.linspace(0.0, 50.0, 200)
        reg = PhiRegion(phi_lo, SampledHermite(xs, np.zeros_like(xs), np.zeros_like(xs)),
                        s0=-2.5)
        assert region_membership(CurvatureDiagram(np.empty((0, 2))), reg).ok

    def test_starred_reflection(self):
        phi_lo, _ = self.phi_pair(-2.0)
        xs = np.linspace(0.0, 50.0, 200)
        reg = PhiRegion(phi_lo, SampledHermite(xs, np.zeros_like(xs), np.zeros_like(xs)),
                        s0=-2.5, starred=True)
        # (x, y) in R* iff (-y, -x) in R: reflect an inside sample
        inside = CurvatureDiagram(np.array([[1.0, -3.0]]))     # (-y,-x) = (3, -1): inside
        assert region_membership(inside, reg).ok
        outside = CurvatureDiagram(np.array([[10.0, -1.0]]))   # (1, -10): below phi1
        assert not region_membership(outside, reg).ok

    def test_fform_diagram_contained_in_envelope_region(self):
        # the diagram of a bounded-below minimal-type relation sits inside a
        # region whose lower envelope is the relation's own branch (floor at
        # the asymptote) and whose upper envelope is zero
        rel = GForm(ClosedForm("sqrt_offset", {"scale": 1.0, "offset": 1.0, "shift": -1.0}))
        ff = g_to_f(rel, np.concatenate([[0.0], np.logspace(-8, 6, 2000)]))
        xs_b = ff.f.breakpoints
        up = xs_b >= 0.0
        ys = np.asarray(ff.f(xs_b[up]))
        d = CurvatureDiagram(np.column_stack([xs_b[up], ys]))
        lo = SampledHermite(xs_b[up], ys, np.asarray(ff.f.derivative(xs_b[up])))
        zero = SampledHermite(xs_b[up], np.zeros_like(ys), np.zeros_like(ys))
        reg = PhiRegion(lo, zero, s0=-1.1)
        assert region_membership(d, reg).ok
        # and a floor violation is caught
        poked = np.column_stack([xs_b[up], ys - 0.5])
        assert not region_membership(CurvatureDiagram(poked), reg).ok

    def test_envelope_validation(self):
        xs = np.linspace(0.0, 10.0, 50)
        rising = SampledHermite(xs, xs.copy(), np.ones_like(xs))
        flat = SampledHermite(xs, np.zeros_like(xs), np.zeros_like(xs))
        with pytest.raises(RelationError):
            PhiRegion(rising, flat, s0=-1.0)
        with pytest.raises(RelationError):
            PhiRegion(flat, flat, s0=1.0)


class TestBeltrami:
    def test_conformal_zero(self):
        rho, mu = beltrami_of_metric(1.0, 0.0, 1.0)
        assert rho == 1.0 and mu == 0.0

    def test_example(self):
        rho, mu = beltrami_of_metric(4.0, 0.0, 1.0)
        assert rho == pytest.approx(2.25)
        assert mu == pytest.approx(1.0 / 3.0)

    def test_conformal_family_exact_zero(self, rng):
        for lam in rng.uniform(0.1, 10.0, 50):
            _, mu = beltrami_of_metric(lam, 0.0, lam)
            assert mu == 0.0

    def test_random_spd_bounded(self, rng):
        E = rng.uniform(0.05, 20.0, 100_000)
        G = rng.uniform(0.05, 20.0, 100_000)
        F = rng.uniform(-0.999, 0.999, 100_000) * np.sqrt(E * G)
        _, mu = beltrami_of_metric(E, F, G)
        assert np.max(np.abs(mu)) < 1.0

    def test_rejects_indefinite(self):
        with pytest.raises(ValueError):
            beltrami_of_metric(1.0, 2.0, 1.0)


class TestGaussBeltramiRatio:
    def test_minimal_zero(self):
        assert gauss_beltrami_ratio(CurvaturePair(1.0, -1.0)) == 0.0

    def test_cylinder_one(self):
        assert gauss_beltrami_ratio(CurvaturePair(2.0, 0.0)) == 1.0

    def test_umbilic_infinite(self):
        assert gauss_beltrami_ratio(CurvaturePair(0.5, 0.5)) == math.inf

    @staticmethod
    def discrete_ratio(g, h):
        """|g_zbar|^2/|g_z|^2 by central differences on a conformal grid."""
        gu = (g[1:-1, 2:] - g[1:-1, :-2]) / (2.0 * h)
        gv = (g[2:, 1:-1] - g[:-2, 1:-1]) / (2.0 * h)
        gz = 0.5 * (gu - 1.0j * gv)
        gzb = 0.5 * (gu + 1.0j * gv)
        return np.abs(gzb) ** 2, np.abs(gz) ** 2

    def test_catenoid_cross_check(self):
        # conformal catenoid (cosh v cos u, cosh v sin u, v); the projected
        # Gauss map is holomorphic so the ratio vanishes like (k1+k2)^2
        h = 0.01
        u, v = np.meshgrid(np.arange(-0.3, 0.3, h), np.arange(-0.3, 0.3, h))
        N = np.stack([np.cos(u) / np.cosh(v), np.sin(u) / np.cosh(v), -np.tanh(v)], axis=-1)
        g = (N[..., 0] + 1.0j * N[..., 1]) / (1.0 - N[..., 2])
        num, den = self.discrete_ratio(g, h)
        ratio = num / den
        k1 = 1.0 / np.cosh(v[1:-1, 1:-1]) ** 2
        exact = np.array([gauss_beltrami_ratio(CurvaturePair(k, -k)) for k in k1.ravel()[:5]])
        assert np.max(np.abs(exact)) == 0.0
        assert np.max(ratio) < 1e-3

    def test_cylinder_cross_check(self):
        # conformal cylinder (cos u, sin u, v), inward normal: pair (1, 0),
        # exact ratio 1
        h = 0.01
        u, v = np.meshgrid(np.arange(-0.4, 0.4, h), np.arange(-0.4, 0.4, h))
        N = np.stack([-np.cos(u), -np.sin(u), np.zeros_like(u)], axis=-1)
        g = (N[..., 0] + 1.0j * N[..., 1]) / (1.0 - N[..., 2])
        num, den = self.discrete_ratio(g, h)
        ratio = num / den
        exact = gauss_beltrami_ratio(CurvaturePair(1.0, 0.0))
        assert np.max(np.abs(ratio - exact)) < 1e-3


class TestMeshes:
    def test_icosphere_cluster(self):
        d = mesh_diagram(make_icosphere(2.0, 4))
        assert np.max(np.abs(d.samples - 0.5)) / 0.5 < 0.05
        assert qc_classify(d).classification == "positive_branch"

    def test_flat_mesh_cluster(self):
        d = mesh_diagram(make_flat_mesh(12))
        assert np.max(np.abs(d.samples)) < 1e-6

    def test_cylinder_cluster(self):
        d = mesh_diagram(make_cylinder_mesh())
        assert np.max(np.abs(d.samples[:, 0] - 1.0)) < 0.05
        assert np.max(np.abs(d.samples[:, 1])) < 0.05

    def test_outward_orientation_flips_sign(self):
        d = mesh_diagram(make_icosphere(2.0, 3, inward=False))
        assert np.max(np.abs(d.samples + 0.5)) / 0.5 < 0.05

    def test_boundary_vertices_skipped(self):
        d = mesh_diagram(make_flat_mesh(8))
        assert d.notes["skipped_boundary"] == 4 * 8 - 4

    def test_obj_roundtrip(self, tmp_path):
        mesh = make_icosphere(1.0, 2)
        path = tmp_path / "ico.obj"
        write_obj(mesh, path)
        back = load_obj(path)
        assert np.allclose(back.vertices, mesh.vertices)
        assert np.array_equal(back.faces, mesh.faces)

    def test_obj_ignores_unknown_records(self, tmp_path):
        path = tmp_path / "mesh.obj"
        path.write_text("vn 0 0 1\nv 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\n"
                        "f 1 2 3\nf 2 4 3\nf 1 2 3 4\nusemtl stuff\n")
        mesh = load_obj(path)
        assert mesh.ignored_records == 3
        assert mesh.faces.shape == (2, 3)

    def test_obj_parse_failure(self, tmp_path):
        path = tmp_path / "bad.obj"
        path.write_text("v 0 0\nf 1 2 3\n")
        with pytest.raises(MeshError):
            load_obj(path)

    def test_non_manifold_rejected(self):
        V = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [0, -1, 0]], dtype=float)
        F = np.array([[0, 1, 2], [0, 1, 3], [0, 1, 4]])
        with pytest.raises(MeshError, match="non-manifold|orientation"):
            mesh_diagram(TriMesh(V, F))

    def test_inconsistent_orientation_rejected(self):
        V = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]], dtype=float)
        F = np.array([[0, 1, 2], [1, 3, 2]])   # consistent
        mesh_diagram_ok = True
        try:
            mesh_diagram(TriMesh(V, F))
        except MeshError as exc:
            mesh_diagram_ok = "usable" in str(exc)  # all-boundary is fine to reject
        assert mesh_diagram_ok
        F_bad = np.array([[0, 1, 2], [1, 2, 3]])   # edge (1,2) traversed twice same way
        with pytest.raises(MeshError, match="orientation"):
            mesh_diagram(TriMesh(V, F_bad))


def test_report_json():
    rep = QCReport("negative_branch", -1.5, 0.3, (-2.0, -0.5))
    blob = rep.to_json()
    assert blob["classification"] == "negative_branch"
    assert blob["wedge_slopes"] == [-2.0, -0.5]
    assert isinstance(region_membership(CurvatureDiagram(np.empty((0, 2))),
                                        PhiRegion(
        SampledHermite(np.array([0.0, 1.0]), np.array([0.0, -0.5]), np.array([-0.5, -0.5])),
        SampledHermite(np.array([0.0, 1.0]), np.array([0.0, 0.0]), np.array([0.0, 0.0])),
        s0=-1.0)), RegionCheck)
