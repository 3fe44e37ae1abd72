import math

import numpy as np
import pytest

from pdwg.analysis import (
    conservation_report,
    convergence_orders,
    error_norms,
    nodal_interpolant,
    postprocess_averages,
    triple_norm_Mh,
    triple_norm_Wh,
)
from pdwg.assembly import ProblemSpec, assemble
from pdwg.fields import constant, constant_vector
from pdwg.mesh import build_coarse_mesh, classify_boundary, refine_uniform
from pdwg.solver import solve
from pdwg.weakspace import DofMap, PrimalFunction, WeakFunction, project_to_weak


def refined(tag, level):
    mesh = build_coarse_mesh(tag)
    for _ in range(level):
        mesh = refine_uniform(mesh)
    return mesh


def make_spec(beta=(1.0, -1.0), c=1.0, f=1.0, g=1.0, tau=1.0, domain="unit_square", exact=None):
    return ProblemSpec(
        beta=constant_vector(*beta),
        c=constant(c),
        f=constant(f),
        g=constant(g),
        tau=tau,
        domain_tag=domain,
        exact_u=exact,
    )


def solved_unit_problem(level=2, tau=1.0, domain="unit_square"):
    spec = make_spec(tau=tau, domain=domain, exact=constant(1.0))
    mesh = refined(domain, level)
    cls = classify_boundary(mesh, spec.beta)
    dm = DofMap(mesh, 1, 1, cls)
    system = assemble(mesh, dm, spec)
    return mesh, dm, spec, solve(system)


class TestNodalInterpolant:
    def test_constant(self):
        mesh = refined("unit_square", 1)
        interp = nodal_interpolant(lambda x, y: np.ones_like(x), mesh)
        assert np.allclose(interp.coeffs, 1.0)

    def test_linear_is_centroid_value(self):
        mesh = build_coarse_mesh("unit_square")
        interp = nodal_interpolant(lambda x, y: x, mesh)
        for t in range(mesh.num_elements):
            cx = mesh.element_coords(t).mean(axis=0)[0]
            assert interp.coeffs[t, 0] == pytest.approx(cx, abs=1e-15)

    def test_smooth_sample(self):
        mesh = refined("unit_square", 2)
        interp = nodal_interpolant(lambda x, y: np.sin(x) * np.cos(y), mesh)
        c = mesh.element_coords(5).mean(axis=0)
        assert interp.coeffs[5, 0] == pytest.approx(math.sin(c[0]) * math.cos(c[1]))


class TestErrorNorms:
    def test_constant_offset(self):
        # u_h = I_h u + 0.5 on the unit square: ||e_h|| = 0.5 (area 1)
        mesh, dm, spec, sol = solved_unit_problem(level=2)
        sol.u.coeffs[:] = 1.5
        sol.lam.lam0[:] = 0.0
        sol.lam.lamb[:] = 0.0
        rep = error_norms(sol, spec, mesh)
        assert rep.err_u == pytest.approx(0.5, abs=1e-12)
        assert rep.err_lam0 == 0.0
        assert rep.err_lamb == 0.0

    def test_unit_solution_machine_accuracy(self):
        mesh, dm, spec, sol = solved_unit_problem(level=2)
        rep = error_norms(sol, spec, mesh)
        assert rep.err_u <= 1e-8
        assert rep.err_lam0 <= 1e-8
        assert rep.err_lamb <= 1e-8

    def test_requires_exact_solution(self):
        mesh, dm, spec, sol = solved_unit_problem(level=1)
        bare = spec.with_overrides(exact_u=None)
        with pytest.raises(ValueError):
            error_norms(sol, bare, mesh)


class TestTripleNormWh:
    def test_continuous_multiplier_vanishes_tau0(self):
        mesh = refined("unit_square", 1)
        spec = make_spec(tau=0.0)
        lam = project_to_weak(lambda x, y: x * 0 + 2.0, mesh, j=1)
        assert triple_norm_Wh(lam, spec, mesh) < 1e-13

    def test_reference_triangle_value(self):
        # same oracle as the local stabilizer: lam0=x, lamb=0, tau=0 on
        # the corner element gives s = (1/3 + sqrt(2)/3)/sqrt(2)
        mesh = build_coarse_mesh("unit_square")
        spec = make_spec(tau=0.0)
        t = next(
            t for t in range(2)
            if any(np.allclose(v, (0, 0)) for v in mesh.element_coords(t))
        )
        from pdwg.poly import project_element

        lam = WeakFunction(
            lam0=np.zeros((mesh.num_elements, 3)), lamb=np.zeros((mesh.num_edges, 2))
        )
        lam.lam0[t] = project_element(lambda x, y: x, 1, mesh.element_coords(t))
        expected = math.sqrt((1.0 / 3.0 + math.sqrt(2.0) / 3.0) / math.sqrt(2.0))
        assert triple_norm_Wh(lam, spec, mesh) == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("domain", ["unit_square", "l_shape"])
    @pytest.mark.parametrize("tau", [0.0, 1.0])
    def test_matches_assembled_quadratic_form(self, domain, tau):
        mesh = refined(domain, 1)
        spec = make_spec(tau=tau, domain=domain)
        cls = classify_boundary(mesh, spec.beta)
        dm = DofMap(mesh, 1, 1, cls)
        system = assemble(mesh, dm, spec)
        S = system.matrix[: dm.n_lambda, : dm.n_lambda]
        rng = np.random.default_rng(11)
        for _ in range(25):
            x = rng.standard_normal(dm.n_lambda)
            lam = WeakFunction.from_free_vector(dm, x)
            quad = float(x @ (S @ x))
            norm = triple_norm_Wh(lam, spec, mesh)
            assert norm**2 == pytest.approx(quad, rel=1e-12, abs=1e-13)


class TestTripleNormMh:
    def test_zero_function(self):
        mesh = refined("unit_square", 1)
        spec = make_spec(c=0.0)
        cls = classify_boundary(mesh, spec.beta)
        v = PrimalFunction(coeffs=np.zeros((mesh.num_elements, 1)))
        assert triple_norm_Mh(v, spec, mesh, cls) == 0.0

    def test_constant_one_reaction_free(self):
        # c=0, beta=[1,-1], v=1 on the level-1 unit square: interior jumps
        # vanish, inflow edges contribute h_T |beta.n|^2 |e| each:
        # 4 * (sqrt(2)/2) * 1 * (1/2) = sqrt(2)
        mesh = refined("unit_square", 1)
        spec = make_spec(c=0.0)
        cls = classify_boundary(mesh, spec.beta)
        v = PrimalFunction(coeffs=np.ones((mesh.num_elements, 1)))
        norm = triple_norm_Mh(v, spec, mesh, cls)
        assert norm**2 == pytest.approx(math.sqrt(2.0), abs=1e-13)

    def test_constant_one_with_reaction(self):
        # adding c=1 contributes sum_T h_T^2 area = 8 * 1/2 * 1/8 = 1/2
        mesh = refined("unit_square", 1)
        spec = make_spec(c=1.0)
        cls = classify_boundary(mesh, spec.beta)
        v = PrimalFunction(coeffs=np.ones((mesh.num_elements, 1)))
        norm = triple_norm_Mh(v, spec, mesh, cls)
        assert norm**2 == pytest.approx(0.5 + math.sqrt(2.0), abs=1e-13)


class TestConservation:
    def test_unit_solution(self):
        mesh, dm, spec, sol = solved_unit_problem(level=2)
        rep = conservation_report(sol, spec, mesh)
        assert rep.max_element_residual <= 1e-10
        assert rep.max_flux_jump <= 1e-10
        assert rep.scale_f == 1.0

    @pytest.mark.parametrize("tau", [0.0, 1.0])
    def test_solved_smooth_problem(self, tau):
        from pdwg.catalog import get_experiment
        from pdwg.study import run_study

        rep = run_study(get_experiment("table5"), levels=(3, 3), tau=tau)
        row = rep.rows[0]
        assert row.cons_max_residual <= 1e-9 * row.cons_scale_f
        assert row.cons_max_flux_jump <= 1e-9

    def test_perturbation_detected(self):
        mesh, dm, spec, sol = solved_unit_problem(level=1)
        sol.u.coeffs[0, 0] += 0.01
        rep = conservation_report(sol, spec, mesh)
        assert rep.max_element_residual > 1e-6

    def test_residual_scales_linearly_with_solution_error(self):
        # conservation quantities are linear in the algebraic residual, so
        # scaling a solution perturbation by 10 scales the maxima by 10
        mesh, dm, spec, sol = solved_unit_problem(level=1)
        rng = np.random.default_rng(5)
        du = rng.standard_normal(sol.u.coeffs.shape)
        dl0 = rng.standard_normal(sol.lam.lam0.shape)

        def perturbed(scale):
            import copy

            s = copy.deepcopy(sol)
            s.u.coeffs += scale * du
            s.lam.lam0 += scale * dl0
            return conservation_report(s, spec, mesh)

        small = perturbed(1e-3)
        large = perturbed(1e-2)
        assert large.max_element_residual / small.max_element_residual == pytest.approx(
            10.0, rel=1e-3
        )
        assert large.max_flux_jump / small.max_flux_jump == pytest.approx(10.0, rel=1e-3)


class TestOrders:
    def test_benchmark_row(self):
        orders = convergence_orders([0.06461, 0.02966])
        assert orders[0] is None
        assert orders[1] == pytest.approx(1.123, abs=1e-3)

    def test_exact_halving_and_quartering(self):
        assert convergence_orders([0.4, 0.2])[1] == pytest.approx(1.0)
        assert convergence_orders([0.4, 0.1])[1] == pytest.approx(2.0)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            convergence_orders([0.1])
        with pytest.raises(ValueError):
            convergence_orders([0.1, 0.0])
        with pytest.raises(ValueError):
            convergence_orders([0.1, float("nan")])


class TestPostprocess:
    def test_constant_field(self):
        mesh = refined("unit_square", 1)
        u = PrimalFunction(coeffs=np.full((mesh.num_elements, 1), 3.0))
        field = postprocess_averages(u, mesh)
        assert np.allclose(field.value, 3.0)
        assert len(field.x) == mesh.num_vertices + mesh.num_edges

    def test_vertex_and_midpoint_averages(self):
        mesh = build_coarse_mesh("unit_square")
        u = PrimalFunction(coeffs=np.array([[7.0], [9.0]]))
        field = postprocess_averages(u, mesh)
        # vertex values: corners (1,0) and (0,1) touch both elements
        vertex_vals = field.value[: mesh.num_vertices]
        for v, (x, y) in enumerate(mesh.vertices):
            incident = [t for t in range(2) if v in mesh.elements[t]]
            expected = np.mean([u.coeffs[t, 0] for t in incident])
            assert vertex_vals[v] == pytest.approx(expected)
        # the interior (diagonal) edge midpoint averages both elements;
        # boundary edge midpoints take their single element's value
        edge_vals = field.value[mesh.num_vertices :]
        for e in range(mesh.num_edges):
            t1, t2 = mesh.edge_elems[e]
            if t2 >= 0:
                assert edge_vals[e] == pytest.approx(8.0)
            else:
                assert edge_vals[e] == pytest.approx(u.coeffs[int(t1), 0])

    def test_crack_sides_average_separately(self):
        mesh = refined("cracked_square", 1)
        centroids = mesh.vertices[mesh.elements].mean(axis=1)
        vals = np.where(centroids[:, 1] > 0, 1.0, -1.0).reshape(-1, 1)
        u = PrimalFunction(coeffs=vals)
        field = postprocess_averages(u, mesh)
        # both copies of the duplicated crack midpoint (0.5, 0) keep their
        # own side's value
        idx = np.flatnonzero(
            (np.abs(mesh.vertices[:, 0] - 0.5) < 1e-14)
            & (np.abs(mesh.vertices[:, 1]) < 1e-14)
        )
        assert len(idx) == 2
        got = sorted(field.value[i] for i in idx)
        assert got == pytest.approx([-1.0, 1.0])
