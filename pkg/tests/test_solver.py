"""Torsion, sub-solution, truncation, descent, mountain pass, sup bound."""

import math

import numpy as np
import pytest

import philap as ph
from philap.errors import SolverError
from philap.solver import (
    _j_gradient,
    _j_parts,
    degiorgi_bound,
    mountain_pass_path,
    write_convergence_csv,
    write_degiorgi_csv,
    write_solution_csv,
)


def exact_torsion_power(p, c, x, L=1.0):
    """Closed form by two integrations with symmetry u'(L/2) = 0."""
    m = p / (p - 1.0)
    return c ** (1.0 / (p - 1.0)) * ((p - 1.0) / p) * (
        (L / 2.0) ** m - np.abs(x - L / 2.0) ** m)


# ---------------------------------------------------------------------------
# torsion


def test_torsion_quadratic_is_exact():
    grid = ph.Grid(255, 1.0)
    u = ph.solve_torsion(ph.power_young(2.0, coeff=0.5), 1.0, grid)
    exact = grid.nodes * (1.0 - grid.nodes) / 2.0
    assert np.max(np.abs(u.values - exact)) < 1e-3
    assert np.max(np.abs(u.values - exact)) < 1e-9  # discretization-exact


@pytest.mark.parametrize("p,c", [(3.0, 1.0), (3.0, 0.1), (1.5, 1.0)])
def test_torsion_power_oracle(p, c):
    grid = ph.Grid(255, 1.0)
    u = ph.solve_torsion(ph.power_over_p_young(p), c, grid)
    err = np.max(np.abs(u.values - exact_torsion_power(p, c, grid.nodes)))
    assert err < 5.0 * grid.h


def test_torsion_monotone_in_load():
    grid = ph.Grid(63, 1.0)
    phi = ph.power_over_p_young(3.0)
    u1 = ph.solve_torsion(phi, 0.5, grid)
    u2 = ph.solve_torsion(phi, 1.0, grid)
    assert np.all(u2.values > u1.values)


def test_torsion_rejects_nonpositive_load():
    with pytest.raises(Exception):
        ph.solve_torsion(ph.power_young(2.0), -1.0, ph.Grid(15, 1.0))


# ---------------------------------------------------------------------------
# sub-solution


def test_subsolution_properties(a5_pipeline, a5_spec):
    sub = a5_pipeline.sub
    assert np.all(sub.u_under.values > 0.0)
    assert sub.u_under.sup_norm() < sub.delta < a5_spec.ar_threshold
    d = a5_spec.grid.distances
    ratios = sub.u_under.values / d
    assert np.all(sub.k1 * d <= sub.u_under.values * (1 + 1e-12))
    assert np.all(sub.u_under.values <= sub.k2 * d * (1 + 1e-12))
    # equality attained at some node on each side
    assert np.min(ratios) == pytest.approx(sub.k1)
    assert np.max(ratios) == pytest.approx(sub.k2)


def test_subsolution_respects_lambda(a5_pipeline):
    assert 1.0 / a5_pipeline.sub.n_hat <= a5_pipeline.lam


def test_subsolution_shrinks_with_load(a5_spec, a5_report):
    delta = a5_report.hf1.data["delta"]
    s_coarse = ph.build_subsolution(a5_spec, delta, lam=1.0)
    s_fine = ph.build_subsolution(a5_spec, delta, lam=0.03)
    assert s_fine.n_hat > s_coarse.n_hat
    assert s_fine.u_under.sup_norm() < s_coarse.u_under.sup_norm()


def test_subsolution_stability_under_refinement(a5_spec, a5_report):
    # the torsion sup changes by O(h), so the stopping load moves by at
    # most one doubling when the grid is doubled
    delta = a5_report.hf1.data["delta"]
    from dataclasses import replace
    spec2 = replace(a5_spec, grid=ph.Grid(255, 1.0), _phi_star=a5_spec._phi_star)
    n1 = ph.build_subsolution(a5_spec, delta, lam=1.0).n_hat
    n2 = ph.build_subsolution(spec2, delta, lam=1.0).n_hat
    assert abs(math.log2(n1) - math.log2(n2)) <= 1.0


# ---------------------------------------------------------------------------
# truncation


def test_truncation_removes_singularity(a5_truncation):
    # at s = 0 the truncated reaction equals the frozen positive value
    vals = a5_truncation.f_hat(np.zeros_like(a5_truncation.ub))
    assert np.all(np.isfinite(vals))
    assert np.all(vals == a5_truncation.f_ub)
    assert np.all(a5_truncation.big_f_hat(np.zeros_like(a5_truncation.ub)) == 0.0)


def test_truncation_pointwise_majorant(a5_spec, a5_truncation):
    # f_hat <= c1 conj_inv(ups(|s|)) + alpha d^-gamma + beta at random samples
    rng = np.random.default_rng(17)
    tc = a5_truncation.constants
    d = a5_spec.grid.distances
    for _ in range(20):
        s = rng.uniform(-5.0, 5.0, size=d.shape)
        lhs = a5_truncation.f_hat(s)
        envelope = a5_spec.c1 * ph.conjugate_inverse(
            a5_spec.upsilon, a5_spec.upsilon(np.maximum(np.abs(s), 1e-12)))
        rhs = envelope + tc.alpha * d ** (-a5_spec.gamma) + tc.beta
        assert np.all(lhs <= rhs * (1.0 + 1e-9))


def test_truncation_primitive_bound(a5_spec, a5_truncation):
    # |F_hat(x,s)| <= C1 + C2 ups(|s|)
    rng = np.random.default_rng(19)
    tc = a5_truncation.constants
    for _ in range(20):
        s = rng.uniform(-6.0, 6.0, size=a5_truncation.ub.shape)
        lhs = np.abs(a5_truncation.big_f_hat(s))
        rhs = tc.C1 + tc.C2 * a5_spec.upsilon(np.abs(s))
        assert np.all(lhs <= rhs * (1.0 + 1e-9))


def test_truncation_primitive_consistency(a5_truncation):
    # derivative of the primitive recovers the truncated reaction
    s = np.linspace(0.01, 3.0, a5_truncation.ub.size)
    h = 1e-6
    fd = (a5_truncation.big_f_hat(s + h) - a5_truncation.big_f_hat(s - h)) / (2 * h)
    assert np.max(np.abs(fd - a5_truncation.f_hat(s))) < 1e-4


# ---------------------------------------------------------------------------
# energy and gradient


def test_energy_state_identity(a5_spec, a5_truncation, a5_pipeline):
    state = ph.energy_and_gradient(a5_spec, a5_truncation,
                                   a5_pipeline.first.u, a5_pipeline.lam)
    assert state.J_value == pytest.approx(state.H_value - a5_pipeline.lam * state.K_value)


def test_gradient_matches_torsion_equilibrium(a5_spec):
    # at the discrete torsion equilibrium the assembled gradient of the
    # constant-load energy vanishes to solver tolerance
    grid = a5_spec.grid
    c = 0.25
    u = ph.solve_torsion(a5_spec.phi, c, grid)
    from philap.solver import _grad_energy_gradient
    res = _grad_energy_gradient(a5_spec.phi, grid, u.values) - c * grid.h
    assert np.max(np.abs(res)) < 1e-8


def test_gradient_finite_difference(a5_spec, a5_truncation, a5_pipeline):
    # central differences of the energy against the assembled gradient
    lam = a5_pipeline.lam
    rng = np.random.default_rng(42)
    x = a5_spec.grid.nodes
    worst = 0.0
    for _ in range(20):
        coeffs = rng.normal(size=5) / np.arange(1, 6) ** 1.5
        u = a5_truncation.ub + 0.4 + sum(
            0.3 * coeffs[m] * np.sin((m + 1) * np.pi * x / a5_spec.grid.length)
            for m in range(5))
        u = np.abs(u) + 0.05
        g = _j_gradient(a5_spec, a5_truncation, u, lam)
        gfd = np.empty_like(g)
        for i in range(u.size):
            h_i = 1e-5 * (1.0 + abs(u[i]))
            up = u.copy(); up[i] += h_i
            dn = u.copy(); dn[i] -= h_i
            gfd[i] = (_j_parts(a5_spec, a5_truncation, up, lam)[2]
                      - _j_parts(a5_spec, a5_truncation, dn, lam)[2]) / (2.0 * h_i)
        worst = max(worst, float(np.linalg.norm(gfd - g) / np.linalg.norm(g)))
    assert worst < 1e-5


def test_coercivity_along_descent(a5_spec, a5_truncation, a5_pipeline):
    # sum phi'(|g|)|g| h >= i_phi * H(u) at aggressively perturbed states
    i_phi = a5_spec.phi_indices().lower
    grid = a5_spec.grid
    rng = np.random.default_rng(23)
    for _ in range(20):
        u = np.abs(rng.normal(size=grid.n_interior)) * rng.uniform(0.1, 50.0)
        g = np.abs(np.diff(np.concatenate([[0.0], u, [0.0]])) / grid.h)
        lhs = float(np.sum(a5_spec.phi.prime(g) * g) * grid.h)
        rhs = i_phi * float(np.sum(a5_spec.phi(g)) * grid.h)
        assert lhs >= rhs * (1.0 - 1e-12)


# ---------------------------------------------------------------------------
# first solution


def test_first_solution_contract(a5_pipeline):
    first = a5_pipeline.first
    flags = a5_pipeline.first_flags
    assert flags["converged"]
    assert flags["interior"] and not flags["boundary_pinned"]
    assert first.residual < 1e-6
    assert first.H_value < a5_pipeline.admissibility.r_star
    assert np.all(first.u.values >= a5_pipeline.sub.u_under.values - 1e-10)
    assert np.all(first.u.values > 0.0)


def test_first_solution_small_lambda_continuation(a5_spec, a5_report):
    # as the weight decreases the constrained minimizer shrinks toward zero
    delta = a5_report.hf1.data["delta"]
    sups = []
    for lam in (0.02, 0.005, 0.00125):
        sub = ph.build_subsolution(a5_spec, delta, lam=lam)
        trunc = ph.truncate_reaction(a5_spec, sub)
        state, flags, _ = ph.first_solution(a5_spec, trunc, r_star=2.0, lam=lam)
        assert flags["converged"]
        assert np.all(state.u.values >= sub.u_under.values - 1e-10)
        sups.append(state.u.sup_norm())
    assert sups[0] > sups[1] > sups[2]
    # local quartic growth of the generator puts the amplitude near
    # lam^(1/3), so a 16x weight drop shrinks the sup by about 2.5x
    assert sups[2] < 0.6 * sups[0]


# ---------------------------------------------------------------------------
# uphill endpoint


def test_uphill_endpoint_drops_energy(a5_spec, a5_truncation, a5_pipeline):
    state = a5_pipeline.first
    u1 = a5_pipeline.uphill
    j1 = _j_parts(a5_spec, a5_truncation, u1.values, a5_pipeline.lam)[2]
    assert j1 < state.J_value - 1.0
    # found within 60 doublings of a unit bump
    assert u1.sup_norm() <= 2.0 ** 60


def test_uphill_requires_superlinearity(a5_spec, a5_truncation, a5_pipeline):
    from dataclasses import replace
    bad = replace(a5_spec, mu=3.5, _phi_star=a5_spec._phi_star)
    with pytest.raises(SolverError):
        ph.uphill_endpoint(bad, a5_truncation, a5_pipeline.first, a5_pipeline.lam)


# ---------------------------------------------------------------------------
# mountain pass


def test_mountain_pass_one_dof_oracle():
    # J(u) = u^4 - 2u^2: minima at -1 and 1, crossing point 0 at level 0
    out = mountain_pass_path(
        lambda u: float(u[0] ** 4 - 2.0 * u[0] ** 2),
        lambda u: np.array([4.0 * u[0] ** 3 - 4.0 * u[0]]),
        None, np.array([-1.0]), np.array([1.0]), n_path=41, tol=1e-8)
    assert out["converged"] and not out["collapsed"]
    assert abs(out["v"][0]) < 1e-3
    assert abs(out["level"]) < 1e-6


def test_mountain_pass_convex_collapses():
    out = mountain_pass_path(
        lambda u: float(u @ u),
        lambda u: 2.0 * u,
        None, np.zeros(5), np.ones(5), n_path=21, tol=1e-8)
    assert out["collapsed"] and not out["converged"]


def test_mountain_pass_two_distinct_solutions(a5_pipeline):
    mp = a5_pipeline.mp
    assert mp.converged and not mp.collapsed
    assert mp.residual < 1e-4
    assert mp.state.J_value >= a5_pipeline.first.J_value
    gap = np.max(np.abs(mp.state.u.values - a5_pipeline.first.u.values))
    assert gap > 1e-2
    assert mp.separation_ok
    # the path level dominates both endpoint energies
    assert mp.level >= a5_pipeline.first.J_value


def test_mountain_pass_solution_verifies(a5_pipeline):
    ver = a5_pipeline.verify_second
    assert ver.max_residual < 1e-4
    assert ver.positive
    assert ver.above_subsolution


# ---------------------------------------------------------------------------
# verification


def test_verify_first_solution(a5_pipeline):
    ver = a5_pipeline.verify_first
    assert ver.max_residual < 1e-6
    assert ver.positive and ver.above_subsolution


def test_verify_subsolution_slack_is_signed(a5_spec, a5_truncation, a5_pipeline):
    # the sub-solution satisfies the equation with a one-sided defect once
    # the weight dominates the torsion load
    rep = ph.verify_solution(a5_spec, a5_truncation,
                             a5_truncation.sub.u_under, a5_pipeline.lam)
    assert np.all(rep.residuals <= 1e-15)
    assert rep.max_residual > 0.0  # strictly a sub-solution, not a solution


def test_verify_perturbed_solution(a5_spec, a5_truncation, a5_pipeline):
    u = a5_pipeline.first.u
    bump = np.zeros_like(u.values)
    mid = len(bump) // 2
    bump[mid] = 0.1
    pert = ph.GridFunction(a5_spec.grid, u.values + bump)
    rep = ph.verify_solution(a5_spec, a5_truncation, pert, a5_pipeline.lam)
    assert rep.max_residual > 10.0 * 1e-6


# ---------------------------------------------------------------------------
# level-set sup bound


def test_degiorgi_constant_state():
    grid = ph.Grid(31, 1.0)
    u = ph.GridFunction(grid, np.full(31, 0.7))
    rep = degiorgi_bound(u, p_exp=3.0, r_exp=1.5, k_start=0.7)
    assert rep.M == pytest.approx(1.4)
    assert rep.masses[-1] == 0.0


def test_degiorgi_level_schedule(a5_pipeline):
    rep = a5_pipeline.degiorgi
    expected = rep.M * (1.0 - 0.5 ** (np.arange(len(rep.levels)) + 1.0))
    assert np.allclose(rep.levels, expected, rtol=1e-14)


def test_degiorgi_certifies_solution(a5_pipeline):
    rep = a5_pipeline.degiorgi
    u = a5_pipeline.first.u
    assert rep.masses[-1] == 0.0
    assert u.sup_norm() <= rep.M
    # masses are nonincreasing and the recursion holds at every step
    assert np.all(np.diff(rep.masses) <= 0.0)
    for n in range(len(rep.masses) - 1):
        bound = rep.C * rep.b ** n * rep.masses[n] ** (1.0 + rep.a)
        assert rep.masses[n + 1] <= bound * (1.0 + 1e-12)
    assert rep.masses[rep.smallness_index] <= rep.smallness_threshold


def test_degiorgi_rejects_negative_state():
    grid = ph.Grid(15, 1.0)
    u = ph.GridFunction(grid, -np.ones(15))
    with pytest.raises(Exception):
        degiorgi_bound(u, 3.0, 1.5, 1.0)


# ---------------------------------------------------------------------------
# energy ordering and CSV output


def test_energy_ordering(a5_pipeline):
    assert a5_pipeline.mp.state.J_value >= a5_pipeline.first.J_value
    assert a5_pipeline.mp.level >= a5_pipeline.first.J_value


def test_csv_writers(tmp_path, a5_pipeline, a5_spec):
    sol = tmp_path / "solution.csv"
    write_solution_csv(sol, a5_spec.grid, {
        "u_lambda": a5_pipeline.first.u.values,
        "v_lambda": a5_pipeline.mp.state.u.values,
        "u_under": a5_pipeline.sub.u_under.values})
    lines = sol.read_text().splitlines()
    assert lines[0] == "x,u_lambda,v_lambda,u_under"
    assert len(lines) == a5_spec.grid.n_interior + 3

    conv = tmp_path / "convergence.csv"
    write_convergence_csv(conv, a5_pipeline.first_trace)
    assert conv.read_text().splitlines()[0] == "iteration,J,residual"

    dg = tmp_path / "degiorgi.csv"
    write_degiorgi_csv(dg, a5_pipeline.degiorgi)
    assert dg.read_text().splitlines()[0] == "n,k_n,y_n"
