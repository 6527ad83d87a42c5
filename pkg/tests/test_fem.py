"""Quadrature rules, P1 assembly, load vectors, and error norms."""

import math

import numpy as np
import pytest
import scipy.linalg as sla

from kronheat.errors import DimensionMismatch
from kronheat.fem import (
    _graded_unit_edges,
    assemble_global_rhs,
    assemble_p1,
    dirichlet_lift,
    error_norms,
    gauss_rule_01,
    project_rhs,
    triangle_rule,
)
from kronheat.lshape import TriangleMesh, build_lshape_mesh, refine_uniform
from kronheat.temporal import TemporalMesh, assemble_temporal_operators

from conftest import BASE_NODES


def reference_triangle():
    return TriangleMesh(
        vertices=[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)],
        triangles=[(0, 1, 2)],
        boundary_flags=[True, True, True],
    )


class TestTriangleRule:
    @pytest.mark.parametrize("order", range(1, 15))
    def test_weights_sum_to_area(self, order):
        _, wts = triangle_rule(order)
        assert wts.sum() == pytest.approx(0.5, rel=1e-14)

    @pytest.mark.parametrize("order", range(1, 15))
    def test_monomial_exactness(self, order):
        # int_T x^a y^b = a! b! / (a + b + 2)! on the unit triangle
        pts, wts = triangle_rule(order)
        for a in range(order + 1):
            for b in range(order + 1 - a):
                val = np.sum(wts * pts[:, 0] ** a * pts[:, 1] ** b)
                exact = (
                    math.factorial(a) * math.factorial(b)
                    / math.factorial(a + b + 2)
                )
                assert val == pytest.approx(exact, rel=5e-13, abs=1e-15)

    def test_points_inside_closed_triangle(self):
        for order in (2, 5, 6, 9, 13):
            pts, _ = triangle_rule(order)
            assert np.all(pts >= -1e-14)
            assert np.all(pts.sum(axis=1) <= 1.0 + 1e-14)

    def test_rejects_nonpositive_order(self):
        with pytest.raises(ValueError):
            triangle_rule(0)


class TestGaussRule:
    @pytest.mark.parametrize("n", [1, 2, 4, 8])
    def test_polynomial_exactness(self, n):
        q, w = gauss_rule_01(n)
        for k in range(2 * n):
            assert np.sum(w * q**k) == pytest.approx(1.0 / (k + 1), rel=1e-13)


class TestGradedEdges:
    def test_structure(self):
        edges = _graded_unit_edges(m=6, ratio=2.0)
        assert edges[0] == 0.0
        assert edges[-1] == 1.0
        assert len(edges) == 7
        # widths double away from the origin, apart from the stub at 0
        widths = np.diff(edges[1:])
        assert np.allclose(widths[1:] / widths[:-1], 2.0)

    def test_default_covers_unit_interval(self):
        edges = _graded_unit_edges()
        assert np.all(np.diff(edges) > 0)
        assert edges[1] == pytest.approx(2.0 ** -11)


class TestAssembleP1:
    def test_reference_element_matrices(self):
        ops = assemble_p1(reference_triangle())
        K = ops.A_full.toarray()
        M = ops.M_full.toarray()
        K_exact = np.array([
            [1.0, -0.5, -0.5],
            [-0.5, 0.5, 0.0],
            [-0.5, 0.0, 0.5],
        ])
        M_exact = (0.5 / 12.0) * np.array([
            [2.0, 1.0, 1.0],
            [1.0, 2.0, 1.0],
            [1.0, 1.0, 2.0],
        ])
        assert np.allclose(K, K_exact, atol=1e-15)
        assert np.allclose(M, M_exact, atol=1e-16)

    def test_mass_sums_to_domain_area(self):
        ops = assemble_p1(build_lshape_mesh(1))
        assert ops.M_full.sum() == pytest.approx(3.0, rel=1e-13)

    def test_stiffness_annihilates_constants(self):
        ops = assemble_p1(build_lshape_mesh(1))
        ones = np.ones(ops.M_full.shape[0])
        assert np.abs(ops.A_full @ ones).max() < 1e-13

    def test_stiffness_linear_exactness(self):
        # for u = x1, v = x2: int grad u . grad v = 0; u = v = x1 gives area
        mesh = build_lshape_mesh(0)
        ops = assemble_p1(mesh)
        ux = mesh.vertices[:, 0]
        uy = mesh.vertices[:, 1]
        assert ux @ (ops.A_full @ ux) == pytest.approx(3.0, rel=1e-13)
        assert ux @ (ops.A_full @ uy) == pytest.approx(0.0, abs=1e-13)

    def test_interior_blocks_are_spd(self):
        ops = assemble_p1(build_lshape_mesh(1))
        for mat in (ops.M_II, ops.A_II):
            dense = mat.toarray()
            assert np.allclose(dense, dense.T, atol=1e-14)
            assert sla.eigvalsh(dense).min() > 0.0

    def test_interior_index_inverts_interior(self):
        ops = assemble_p1(build_lshape_mesh(0))
        assert np.array_equal(ops.interior_index[ops.interior],
                              np.arange(ops.n_interior))
        assert np.all(ops.interior_index[ops.boundary] == -1)

    def test_mixed_mass_rows(self):
        mesh = build_lshape_mesh(0)
        ops = assemble_p1(mesh)
        areas = mesh.areas()
        m10 = ops.M10.toarray()
        # each column holds area/3 at the triangle's interior vertices
        for j, tri in enumerate(mesh.triangles):
            idx = ops.interior_index[tri]
            expect = np.zeros(ops.n_interior)
            expect[idx[idx >= 0]] = areas[j] / 3.0
            assert np.allclose(m10[:, j], expect, atol=1e-15)

    def test_submatrix_blocks_match_full(self):
        ops = assemble_p1(build_lshape_mesh(0))
        M = ops.M_full.toarray()
        assert np.allclose(ops.M_II.toarray(),
                           M[np.ix_(ops.interior, ops.interior)])
        assert np.allclose(ops.M_IB.toarray(),
                           M[np.ix_(ops.interior, ops.boundary)])


@pytest.fixture(scope="module")
def meshes():
    return build_lshape_mesh(0), TemporalMesh(BASE_NODES)


class TestProjectRhs:

    def test_constant_field(self, meshes):
        mesh_x, mesh_t = meshes
        F = project_rhs(mesh_x, mesh_t, lambda x1, x2, t: np.ones_like(x1 + t))
        assert np.allclose(F, 1.0, atol=1e-14)

    def test_linear_in_time(self, meshes):
        mesh_x, mesh_t = meshes
        F = project_rhs(mesh_x, mesh_t, lambda x1, x2, t: t + 0 * x1)
        mid = 0.5 * (mesh_t.nodes[:-1] + mesh_t.nodes[1:])
        assert np.allclose(F, np.broadcast_to(mid, F.shape), atol=1e-14)

    def test_linear_in_space(self, meshes):
        mesh_x, mesh_t = meshes
        F = project_rhs(mesh_x, mesh_t, lambda x1, x2, t: x1 + 0 * t)
        cx = mesh_x.vertices[mesh_x.triangles, 0].mean(axis=1)
        assert np.allclose(F, cx[:, None], atol=1e-14)

    def test_self_convergence_on_source(self, meshes):
        # the source projection is limited by the spatial rule; degrees 6
        # and 12 agree to a few 1e-7 relative on the actual problem data
        from kronheat.manufactured import source_f

        mesh_x = refine_uniform(refine_uniform(build_lshape_mesh(0)))
        base = np.asarray(BASE_NODES)
        mesh_t = TemporalMesh(np.sort(np.concatenate(
            [base, 0.5 * (base[:-1] + base[1:])])))
        coarse = project_rhs(mesh_x, mesh_t, source_f, quad_order=6)
        fine = project_rhs(mesh_x, mesh_t, source_f, quad_order=12)
        scale = np.abs(fine).max()
        assert np.abs(coarse - fine).max() < 1e-6 * scale


class TestDirichletLift:
    def test_values_and_shape(self):
        mesh_x = build_lshape_mesh(0)
        mesh_t = TemporalMesh(BASE_NODES)
        g = lambda x1, x2, t: x1 + 10.0 * x2 + 100.0 * t
        G = dirichlet_lift(mesh_x, mesh_t, g)
        assert G.shape == (len(mesh_x.boundary), mesh_t.n_cells)
        bv = mesh_x.vertices[mesh_x.boundary]
        for j, t in enumerate(mesh_t.nodes[1:]):
            assert np.allclose(G[:, j], bv[:, 0] + 10 * bv[:, 1] + 100 * t)


@pytest.fixture(scope="module")
def pieces():
    mesh_x = build_lshape_mesh(0)
    mesh_t = TemporalMesh(BASE_NODES)
    ops = assemble_p1(mesh_x)
    temp = assemble_temporal_operators(mesh_t, j_max=20_000)
    rng = np.random.default_rng(7)
    F = rng.standard_normal((mesh_x.n_triangles, temp.n))
    G = rng.standard_normal((len(ops.boundary), temp.n))
    return ops, temp, F, G


class TestAssembleGlobalRhs:

    def test_matches_kron_oracle(self, pieces):
        ops, temp, F, G = pieces
        rhs = assemble_global_rhs(F, ops, temp, lift=G)
        dense = (
            np.kron(temp.C, ops.M10.toarray()) @ F.ravel(order="F")
            - np.kron(temp.A, ops.M_IB.toarray()) @ G.ravel(order="F")
            - np.kron(temp.M, ops.A_IB.toarray()) @ G.ravel(order="F")
        )
        assert np.allclose(rhs, dense, atol=1e-12)

    def test_homogeneous_drops_lift_terms(self, pieces):
        ops, temp, F, _ = pieces
        rhs = assemble_global_rhs(F, ops, temp)
        dense = np.kron(temp.C, ops.M10.toarray()) @ F.ravel(order="F")
        assert np.allclose(rhs, dense, atol=1e-12)

    def test_dimension_checks(self, pieces):
        ops, temp, F, G = pieces
        with pytest.raises(DimensionMismatch):
            assemble_global_rhs(F[:, :-1], ops, temp)
        with pytest.raises(DimensionMismatch):
            assemble_global_rhs(F, ops, temp, lift=G[:-1])


class TestErrorNorms:
    def test_reproduces_discrete_function(self, meshes):
        # u linear in space and time lies in the trial space, so both
        # errors vanish to rounding
        mesh_x, mesh_t = meshes
        a, b, c = 0.7, -1.3, 0.4
        u = lambda x1, x2, t: (a + b * x1 + c * x2) * t
        grad = lambda x1, x2, t: (b * t * np.ones_like(x1 + t),
                                  c * t * np.ones_like(x1 + t))
        dt = lambda x1, x2, t: (a + b * x1 + c * x2) * np.ones_like(t + x1)
        vals = a + b * mesh_x.vertices[:, 0] + c * mesh_x.vertices[:, 1]
        coeffs = vals[:, None] * mesh_t.nodes[None, 1:]
        l2, h1 = error_norms(coeffs, mesh_x, mesh_t, u, grad, dt)
        assert l2 < 1e-13
        assert h1 < 1e-12

    def test_analytic_norm_of_known_field(self, meshes):
        # coeffs = 0 turns the error into the norm of u itself; u = t has
        # ||u||_L2^2 = |Omega| T^3/3 and full gradient norm |Omega| T
        mesh_x, mesh_t = meshes
        zero = np.zeros((mesh_x.n_vertices, mesh_t.n_cells))
        u = lambda x1, x2, t: t + 0 * x1
        grad = lambda x1, x2, t: (0 * x1 + 0 * t, 0 * x1 + 0 * t)
        dt = lambda x1, x2, t: 1.0 + 0 * x1 + 0 * t
        l2, h1 = error_norms(zero, mesh_x, mesh_t, u, grad, dt)
        T = mesh_t.T
        assert l2 == pytest.approx(math.sqrt(3.0 * T**3 / 3.0), rel=1e-13)
        assert h1 == pytest.approx(math.sqrt(3.0 * T), rel=1e-13)

    def test_quadrature_invariance_on_smooth_error(self, meshes):
        # quartic-in-space error integrated with the default versus an
        # elevated rule; both are converged so the norms agree tightly
        mesh_x, mesh_t = meshes
        zero = np.zeros((mesh_x.n_vertices, mesh_t.n_cells))
        u = lambda x1, x2, t: (x1**4 - x2**3) * t**2
        grad = lambda x1, x2, t: (4 * x1**3 * t**2, -3 * x2**2 * t**2)
        dt = lambda x1, x2, t: (x1**4 - x2**3) * 2 * t
        a = error_norms(zero, mesh_x, mesh_t, u, grad, dt)
        b = error_norms(zero, mesh_x, mesh_t, u, grad, dt, quad_order=16)
        assert a[0] == pytest.approx(b[0], rel=1e-12)
        assert a[1] == pytest.approx(b[1], rel=1e-12)

    def test_shape_check(self, meshes):
        mesh_x, mesh_t = meshes
        bad = np.zeros((3, mesh_t.n_cells))
        u = lambda x1, x2, t: 0 * x1
        with pytest.raises(DimensionMismatch):
            error_norms(bad, mesh_x, mesh_t, u, lambda *a: (0, 0), u)
