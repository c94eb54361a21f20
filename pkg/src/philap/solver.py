"""Discrete variational pipeline for the singular quasilinear problem.

Torsion sub-solution, reaction truncation at the sub-solution level,
energy descent for the constrained first solution, a path-deformation
search for the mountain-pass solution, weak-residual verification, and
a level-set iteration certifying a sup bound on computed solutions.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import solve_banded

from .errors import ConstructionError, SolverError
from .orlicz import Grid, GridFunction, cell_gradient, energy_modular, luxemburg_of
from .problems import HypothesisReport, ProblemSpec, Reaction, run_all_checks
from .threshold import (
    Admissibility,
    ThresholdResult,
    TruncationConstants,
    classify,
    lambda_star,
    truncation_constants,
)
from .young import YoungFunction, compute_indices, conjugate_inverse

__all__ = [
    "DeGiorgiReport",
    "DescentTrace",
    "EnergyState",
    "MountainPassResult",
    "PipelineResult",
    "ResidualReport",
    "SubSolution",
    "TruncatedReaction",
    "build_subsolution",
    "degiorgi_bound",
    "energy_and_gradient",
    "first_solution",
    "mountain_pass",
    "mountain_pass_path",
    "solve_torsion",
    "truncate_reaction",
    "two_solution_pipeline",
    "uphill_endpoint",
    "verify_solution",
    "write_convergence_csv",
    "write_degiorgi_csv",
    "write_solution_csv",
]

ARMIJO_SLOPE = 1e-4
TORSION_TOL = 1e-8


# ---------------------------------------------------------------------------
# assembly helpers


def _phi_odd(phi: YoungFunction, g: np.ndarray) -> np.ndarray:
    """Odd extension of the generator derivative to signed slopes."""
    return np.sign(g) * phi.prime(np.abs(g))


def _grad_energy(phi: YoungFunction, grid: Grid, u: np.ndarray) -> float:
    g = np.diff(np.concatenate([[0.0], u, [0.0]])) / grid.h
    return float(np.sum(phi(np.abs(g))) * grid.h)


def _grad_energy_gradient(phi: YoungFunction, grid: Grid, u: np.ndarray) -> np.ndarray:
    g = np.diff(np.concatenate([[0.0], u, [0.0]])) / grid.h
    flux = _phi_odd(phi, g)
    return flux[:-1] - flux[1:]


def _cell_weights(phi: YoungFunction, grid: Grid, u: np.ndarray) -> np.ndarray:
    """Cellwise diffusion weights for the tridiagonal linearization."""
    g = np.abs(np.diff(np.concatenate([[0.0], u, [0.0]])) / grid.h)
    if phi.has_second:
        w = phi.second(g)
    else:
        w = np.where(g > 0.0, phi.prime(np.maximum(g, 1e-300)) / np.maximum(g, 1e-300), 0.0)
    floor = max(float(w.max(initial=0.0)) * 1e-12, 1e-14)
    return np.maximum(w, floor)


def _banded_solve(diag: np.ndarray, off: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    n = diag.size
    ab = np.zeros((3, n))
    ab[0, 1:] = off
    ab[1, :] = diag
    ab[2, :-1] = off
    return solve_banded((1, 1), ab, rhs)


def _precond_direction(phi: YoungFunction, grid: Grid, u: np.ndarray,
                       g: np.ndarray) -> np.ndarray:
    w = _cell_weights(phi, grid, u)
    diag = (w[:-1] + w[1:]) / grid.h
    off = -w[1:-1] / grid.h
    return _banded_solve(diag, off, -g)


@dataclass
class DescentTrace:
    rows: list = field(default_factory=list)  # (iteration, J, residual)

    def append(self, it: int, j_val: float, res: float) -> None:
        self.rows.append((it, j_val, res))


def _descent(j_fn, grad_fn, direction_fn, u0: np.ndarray, tol: float,
             max_iter: int, trace: Optional[DescentTrace] = None,
             project=None, on_iterate=None):
    """Backtracking descent to max-norm gradient tolerance.

    Returns (u, converged, iterations).  `project` maps a trial point
    back into the feasible set after acceptance.
    """
    u = u0.copy()
    j_val = j_fn(u)
    for it in range(max_iter):
        g = grad_fn(u)
        res = float(np.max(np.abs(g)))
        if trace is not None:
            trace.append(it, j_val, res)
        if on_iterate is not None:
            on_iterate(u)
        if res < tol:
            return u, True, it
        d = direction_fn(u, g)
        slope = float(g @ d)
        if slope >= 0.0:
            d = -g
            slope = float(g @ d)
        step = 1.0
        accepted = False
        for _ in range(60):
            cand = u + step * d
            j_cand = j_fn(cand)
            if j_cand <= j_val + ARMIJO_SLOPE * step * slope:
                accepted = True
                break
            step /= 2.0
        if not accepted:
            return u, False, it
        if project is not None:
            proj = project(cand)
            if proj is not cand:
                cand = proj
                j_cand = j_fn(cand)
        u, j_val = cand, j_cand
    return u, False, max_iter


# ---------------------------------------------------------------------------
# torsion problem and sub-solution


def solve_torsion(phi: YoungFunction, rhs: float, grid: Grid,
                  tol: float = TORSION_TOL, max_iter: int = 4000,
                  u0: Optional[np.ndarray] = None) -> GridFunction:
    """Minimizer of the gradient energy minus a constant load.

    Strictly convex, so descent with the tridiagonal linearization as
    preconditioner converges to the unique discrete equilibrium.
    """
    if rhs <= 0.0:
        raise ConstructionError(f"torsion load must be positive, got {rhs}")
    x = grid.nodes
    if u0 is None:
        u0 = 0.5 * rhs * x * (grid.length - x)
    h = grid.h
    load = rhs * h

    def j_fn(u):
        return _grad_energy(phi, grid, u) - float(load * u.sum())

    def grad_fn(u):
        return _grad_energy_gradient(phi, grid, u) - load

    def direction_fn(u, g):
        return _precond_direction(phi, grid, u, g)

    u, converged, it = _descent(j_fn, grad_fn, direction_fn, u0, tol, max_iter)
    if not converged:
        res = float(np.max(np.abs(grad_fn(u))))
        raise SolverError(
            f"torsion solve stalled after {it} iterations at residual {res:.3e}")
    return GridFunction(grid, u)


@dataclass
class SubSolution:
    u_under: GridFunction
    n_hat: int
    delta: float
    k1: float
    k2: float

    def __post_init__(self):
        vals = self.u_under.values
        if np.any(vals <= 0.0):
            raise SolverError("sub-solution must be positive at interior nodes")
        if float(vals.max()) >= self.delta:
            raise SolverError("sub-solution exceeds the smallness level delta")
        if not (0.0 < self.k1 <= self.k2):
            raise SolverError("sub-solution slope bounds out of order")


def build_subsolution(spec: ProblemSpec, delta: float, lam: float = 1.0) -> SubSolution:
    """Torsion iterates with shrinking load until the sup drops below delta.

    The load 1/n is additionally pushed below lam so the result stays a
    sub-solution of the lam-weighted problem (the reaction is >= 1
    below delta).
    """
    if delta <= 0.0:
        raise ConstructionError("delta must be positive; blow-up hypothesis failed")
    delta_eff = min(delta, 0.99 * spec.ar_threshold)
    n = 1
    while n < 1.0 / lam:
        n *= 2
    u_prev = None
    while n <= 10 ** 9:
        u = solve_torsion(spec.phi, 1.0 / n, spec.grid, u0=u_prev)
        if u.sup_norm() < delta_eff:
            d = spec.grid.distances
            ratios = u.values / d
            return SubSolution(u_under=u, n_hat=n, delta=delta_eff,
                               k1=float(ratios.min()), k2=float(ratios.max()))
        u_prev = u.values * 0.5
        n *= 2
    raise SolverError("torsion iterates never dropped below delta; degenerate reaction")


# ---------------------------------------------------------------------------
# truncation


@dataclass
class TruncatedReaction:
    """Reaction frozen at the sub-solution level, with exact primitives.

    Below the sub-solution the integrand is the constant f(x, u_under),
    which removes the singular factor exactly; above it the smooth
    reaction primitive applies.
    """

    reaction: Reaction
    sub: SubSolution
    constants: TruncationConstants
    measure: float
    ub: np.ndarray = field(init=False)
    f_ub: np.ndarray = field(init=False)
    prim_ub: np.ndarray = field(init=False)

    def __post_init__(self):
        self.ub = self.sub.u_under.values.copy()
        self.f_ub = self.reaction.value(self.ub)
        self.prim_ub = self.reaction.primitive(self.ub)

    def f_hat(self, s: np.ndarray) -> np.ndarray:
        """Truncated reaction at the grid nodes; even in s."""
        a = np.abs(np.asarray(s, dtype=float))
        frozen = a <= self.ub
        out = np.where(frozen, self.f_ub,
                       self.reaction.value(np.maximum(a, self.ub)))
        return out

    def big_f_hat(self, s: np.ndarray) -> np.ndarray:
        """Primitive of the truncated reaction from 0; odd in s."""
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        below = self.f_ub * np.minimum(a, self.ub)
        above = np.where(a > self.ub,
                         self.reaction.primitive(np.maximum(a, self.ub)) - self.prim_ub,
                         0.0)
        return np.sign(s) * (below + above)

    def f_hat_slope(self, s: np.ndarray) -> np.ndarray:
        """Derivative of the truncated reaction; zero in the frozen zone."""
        if self.reaction.derivative is None:
            raise ConstructionError(f"{self.reaction.name}: derivative unavailable")
        s = np.asarray(s, dtype=float)
        a = np.abs(s)
        out = np.where(a > self.ub,
                       self.reaction.derivative(np.maximum(a, self.ub)), 0.0)
        return np.sign(s) * out

    def pi(self, upsilon: YoungFunction, rho) -> np.ndarray:
        return self.constants.pi(upsilon, rho, self.measure)


def truncate_reaction(spec: ProblemSpec, sub: SubSolution) -> TruncatedReaction:
    constants = truncation_constants(spec, sub.k1, sub.k2)
    return TruncatedReaction(reaction=spec.reaction, sub=sub, constants=constants,
                             measure=spec.grid.measure)


# ---------------------------------------------------------------------------
# energy states


@dataclass
class EnergyState:
    u: GridFunction
    H_value: float
    K_value: float
    J_value: float
    gradient: np.ndarray
    residual: float


def _j_parts(spec: ProblemSpec, trunc: TruncatedReaction, u: np.ndarray,
             lam: float):
    h = spec.grid.h
    hval = _grad_energy(spec.phi, spec.grid, u)
    kval = float(np.sum(trunc.big_f_hat(u)) * h)
    return hval, kval, hval - lam * kval


def _j_gradient(spec: ProblemSpec, trunc: TruncatedReaction, u: np.ndarray,
                lam: float) -> np.ndarray:
    h = spec.grid.h
    return _grad_energy_gradient(spec.phi, spec.grid, u) - lam * trunc.f_hat(u) * h


def energy_and_gradient(spec: ProblemSpec, trunc: TruncatedReaction,
                        u: GridFunction, lam: Optional[float] = None) -> EnergyState:
    lam = spec.lam if lam is None else lam
    hval, kval, jval = _j_parts(spec, trunc, u.values, lam)
    grad = _j_gradient(spec, trunc, u.values, lam)
    return EnergyState(u=u, H_value=hval, K_value=kval, J_value=jval,
                       gradient=grad, residual=float(np.max(np.abs(grad))))


def _newton_hessian_solve(spec: ProblemSpec, trunc: TruncatedReaction,
                          lam: float):
    """Banded solve with the full Jacobian of the weak residual."""
    grid = spec.grid

    def solve(u: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        w = _cell_weights(spec.phi, grid, u)
        diag = (w[:-1] + w[1:]) / grid.h - lam * trunc.f_hat_slope(u) * grid.h
        off = -w[1:-1] / grid.h
        return _banded_solve(diag, off, rhs)

    return solve


# ---------------------------------------------------------------------------
# first solution


def first_solution(spec: ProblemSpec, trunc: TruncatedReaction, r_star: float,
                   lam: float, tol: float = 1e-6, max_iter: int = 200000):
    """Constrained local minimum of the truncated energy.

    Projected descent over the gradient-energy ball of radius r_star;
    radial scaling restores feasibility when a step leaves the ball.
    Returns (EnergyState, flags, trace).
    """
    grid = spec.grid
    trace = DescentTrace()
    hits = {"projections": 0}

    def j_fn(u):
        return _j_parts(spec, trunc, u, lam)[2]

    def grad_fn(u):
        return _j_gradient(spec, trunc, u, lam)

    def direction_fn(u, g):
        return _precond_direction(spec.phi, grid, u, g)

    def project(u):
        if _grad_energy(spec.phi, grid, u) <= r_star:
            return u
        hits["projections"] += 1
        lo, hi = 0.0, 1.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if _grad_energy(spec.phi, grid, mid * u) > r_star * (1.0 - 1e-12):
                hi = mid
            else:
                lo = mid
        return lo * u

    u, converged, iterations = _descent(j_fn, grad_fn, direction_fn,
                                        trunc.sub.u_under.values, tol, max_iter,
                                        trace=trace, project=project)
    state = energy_and_gradient(spec, trunc, GridFunction(grid, u), lam)
    pinned = state.H_value >= r_star * (1.0 - 1e-9)
    flags = {
        "converged": converged,
        "iterations": iterations,
        "boundary_pinned": pinned,
        "interior": state.H_value < r_star,
        "projections": hits["projections"],
    }
    return state, flags, trace


# ---------------------------------------------------------------------------
# mountain pass


def uphill_endpoint(spec: ProblemSpec, trunc: TruncatedReaction,
                    ref_state: EnergyState, lam: float,
                    max_doublings: int = 60) -> GridFunction:
    """Scaled interior plateau bump with energy below the reference.

    Superlinearity above the upper operator index forces the energy of
    the scaled bump to drop eventually; the amplitude doubles until it
    does.  Hitting the doubling cap is the superlinearity diagnostic.
    """
    s_phi = spec.phi_indices().upper
    if not (spec.mu > s_phi):
        raise SolverError(
            f"superlinearity exponent mu={spec.mu:.4f} not above s_phi={s_phi:.4f}")
    x = spec.grid.nodes
    L = spec.grid.length
    ramp = L / 8.0
    shape = np.clip(np.minimum(x - L / 4.0, 3.0 * L / 4.0 - x) / ramp, 0.0, 1.0)
    target = ref_state.J_value - 1.0
    amp = 1.0
    for _ in range(max_doublings):
        if amp / ramp > spec.phi.t_hi / 4.0:
            raise SolverError("bump slope leaves the trusted range before the "
                              "energy drops; superlinearity violated numerically")
        u1 = amp * shape
        if _j_parts(spec, trunc, u1, lam)[2] < target:
            return GridFunction(spec.grid, u1)
        amp *= 2.0
    raise SolverError(f"no energy drop within {max_doublings} amplitude doublings; "
                      "superlinearity violated numerically")


def _retension(states: np.ndarray, energies: np.ndarray, j_fn, focus: int):
    """Arc-length resampling with extra resolution around the focus state,
    followed by energy-decreasing midpoint replacement away from the crest."""
    n = states.shape[0]
    seg = np.linalg.norm(np.diff(states, axis=0), axis=1)
    total = float(seg.sum())
    if total == 0.0:
        return states, energies
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    t_focus = cum[focus] / total
    # concentrate half the parameter budget in a shrinking window around
    # the current maximum so the ridge stays resolved
    width = max(0.05, 2.0 / n)
    base = np.linspace(0.0, 1.0, n)
    bump = np.exp(-0.5 * ((base - t_focus) / width) ** 2)
    density = 1.0 + 4.0 * bump
    params = np.concatenate([[0.0], np.cumsum(density[:-1] + density[1:])])
    params /= params[-1]
    targets = params * total
    new_states = np.empty_like(states)
    new_states[0] = states[0]
    new_states[-1] = states[-1]
    for i in range(1, n - 1):
        t = targets[i]
        k = int(np.searchsorted(cum, t, side="right") - 1)
        k = min(max(k, 0), n - 2)
        denom = cum[k + 1] - cum[k]
        w = 0.0 if denom == 0.0 else (t - cum[k]) / denom
        new_states[i] = (1.0 - w) * states[k] + w * states[k + 1]
    new_e = np.array([j_fn(s) for s in new_states])
    crest = 1 + int(np.argmax(new_e[1:-1]))
    for i in range(1, n - 1):
        if abs(i - crest) <= 1:
            continue
        mid = 0.5 * (new_states[i - 1] + new_states[i + 1])
        jm = j_fn(mid)
        if jm < new_e[i]:
            new_states[i] = mid
            new_e[i] = jm
    return new_states, new_e


def _locate_crest(states: np.ndarray, energies: np.ndarray, j_fn,
                  iters: int = 16):
    """Maximize the energy along the piecewise-linear path, not just at
    the sampled states.  The crest node is moved onto the interpolated
    maximum of its two adjacent segments; this keeps a ridge from
    slipping between samples while its flanks are pulled down."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    k = 1 + int(np.argmax(energies[1:-1]))
    best_val = energies[k]
    best_pt = None
    for left, right in ((k - 1, k), (k, k + 1)):
        a_pt, b_pt = states[left], states[right]
        a, b = 0.0, 1.0
        for _ in range(iters):
            c = b - invphi * (b - a)
            d = a + invphi * (b - a)
            jc = j_fn((1.0 - c) * a_pt + c * b_pt)
            jd = j_fn((1.0 - d) * a_pt + d * b_pt)
            if jc > jd:
                b = d
            else:
                a = c
        w = 0.5 * (a + b)
        pt = (1.0 - w) * a_pt + w * b_pt
        val = j_fn(pt)
        if val > best_val:
            best_val = val
            best_pt = pt
    if best_pt is not None:
        states[k] = best_pt
        energies[k] = best_val
    return k


def mountain_pass_path(j_fn, grad_fn, direction_fn, u0: np.ndarray,
                       u1: np.ndarray, n_path: int = 41, tol: float = 1e-4,
                       max_outer: int = 100000, retension_every: int = 10,
                       collapse_tol: Optional[float] = None,
                       polish_solve=None, polish_every: int = 50):
    """Deform a discrete path between two low states under its maximum.

    Repeatedly takes a descent step on the maximum-energy interior
    state and re-tensions the path by energy-decreasing interpolation.
    Steps are capped by half the distance to the neighboring states so
    the crest cannot teleport past the ridge it is resolving.  A damped
    Newton polish on the weak residual is attempted periodically; a
    polished point is accepted only when its residual is below tol and
    its energy stays above both endpoints, so the polish cannot land on
    the minimizer the path starts from.
    """
    if collapse_tol is None:
        collapse_tol = tol
    n_path = max(n_path, 5)
    ts = np.linspace(0.0, 1.0, n_path)[:, None]
    states = (1.0 - ts) * u0[None, :] + ts * u1[None, :]
    energies = np.array([j_fn(s) for s in states])
    end_max = max(energies[0], energies[-1])
    converged = False
    collapsed = False
    res = math.inf
    k = 1 + int(np.argmax(energies[1:-1]))
    outer = 0
    for outer in range(max_outer):
        k = _locate_crest(states, energies, j_fn)
        if energies[k] <= end_max + collapse_tol:
            collapsed = True
            break
        g = grad_fn(states[k])
        res = float(np.max(np.abs(g)))
        if res < tol:
            converged = True
            break
        do_polish = polish_solve is not None and (
            res < 100.0 * tol or (outer + 1) % polish_every == 0)
        if do_polish:
            polished, p_res = _polish_critical(grad_fn, polish_solve, states[k], tol)
            if p_res < tol and j_fn(polished) > end_max + collapse_tol:
                states[k] = polished
                energies[k] = j_fn(polished)
                res = p_res
                converged = True
                break
        d = direction_fn(states[k], g) if direction_fn is not None else -g
        slope = float(g @ d)
        if slope >= 0.0:
            d, slope = -g, float(-(g @ g))
        # trust region: stay within half the gap to the path neighbors
        cap = 0.5 * min(float(np.linalg.norm(states[k] - states[k - 1])),
                        float(np.linalg.norm(states[k + 1] - states[k])))
        norm_d = float(np.linalg.norm(d))
        if cap > 0.0 and norm_d > cap:
            d = d * (cap / norm_d)
            slope = float(g @ d)
        step = 1.0
        for _ in range(50):
            cand = states[k] + step * d
            j_cand = j_fn(cand)
            if j_cand <= energies[k] + ARMIJO_SLOPE * step * slope:
                states[k] = cand
                energies[k] = j_cand
                break
            step /= 2.0
        if (outer + 1) % retension_every == 0:
            states, energies = _retension(states, energies, j_fn, k)
    if not (converged or collapsed):
        k = 1 + int(np.argmax(energies[1:-1]))
    return {
        "v": states[k].copy(),
        "level": float(energies[k]),
        "converged": converged,
        "collapsed": collapsed,
        "budget_exhausted": not (converged or collapsed),
        "residual": res,
        "outer_iterations": outer + 1,
        "path_energies": energies.copy(),
    }


def _polish_critical(grad_fn, hess_solve, u: np.ndarray, tol: float,
                     max_steps: int = 60):
    """Damped Newton on the weak residual; finds the nearby critical point."""
    u = u.copy()
    g = grad_fn(u)
    res = float(np.max(np.abs(g)))
    for _ in range(max_steps):
        if res < 0.01 * tol:
            break
        try:
            du = hess_solve(u, -g)
        except np.linalg.LinAlgError:
            break
        step = 1.0
        improved = False
        for _ in range(30):
            cand = u + step * du
            g_cand = grad_fn(cand)
            r_cand = float(np.max(np.abs(g_cand)))
            if r_cand < res * (1.0 - 1e-4 * step):
                u, g, res = cand, g_cand, r_cand
                improved = True
                break
            step /= 2.0
        if not improved:
            break
    return u, res


@dataclass
class MountainPassResult:
    state: EnergyState
    level: float
    converged: bool
    collapsed: bool
    budget_exhausted: bool
    separation_ok: bool
    residual: float
    outer_iterations: int
    path_energies: np.ndarray


def mountain_pass(spec: ProblemSpec, trunc: TruncatedReaction,
                  u0_state: EnergyState, u1: GridFunction, lam: float,
                  n_path: int = 41, tol: float = 1e-4,
                  max_outer: int = 100000,
                  r_star: Optional[float] = None) -> MountainPassResult:
    """Second critical point of the truncated energy via path deformation."""
    grid = spec.grid

    def j_fn(u):
        return _j_parts(spec, trunc, u, lam)[2]

    def grad_fn(u):
        return _j_gradient(spec, trunc, u, lam)

    def direction_fn(u, g):
        return _precond_direction(spec.phi, grid, u, g)

    separation_ok = True
    if r_star is not None and spec.phi.indices is not None:
        pair = spec.phi.indices
        rho = r_star ** (1.0 / pair.lower) if r_star >= 1.0 else r_star ** (1.0 / pair.upper)
        diff = u1.values - u0_state.u.values
        dist = luxemburg_of(spec.phi, np.diff(np.concatenate([[0.0], diff, [0.0]])) / grid.h,
                            grid.h)
        separation_ok = dist > rho

    polish = None
    if spec.phi.has_second and trunc.reaction.derivative is not None:
        polish = _newton_hessian_solve(spec, trunc, lam)

    out = mountain_pass_path(j_fn, grad_fn, direction_fn,
                             u0_state.u.values, u1.values, n_path=n_path,
                             tol=tol, max_outer=max_outer, polish_solve=polish)
    state = energy_and_gradient(spec, trunc, GridFunction(grid, out["v"]), lam)
    return MountainPassResult(state=state, level=out["level"],
                              converged=out["converged"],
                              collapsed=out["collapsed"],
                              budget_exhausted=out["budget_exhausted"],
                              separation_ok=separation_ok,
                              residual=out["residual"],
                              outer_iterations=out["outer_iterations"],
                              path_energies=out["path_energies"])


# ---------------------------------------------------------------------------
# verification and sup bound


@dataclass
class ResidualReport:
    residuals: np.ndarray
    max_residual: float
    above_subsolution: bool
    positive: bool


def verify_solution(spec: ProblemSpec, trunc: TruncatedReaction, u: GridFunction,
                    lam: Optional[float] = None) -> ResidualReport:
    """Weak residual against hat test functions plus comparison flags."""
    lam = spec.lam if lam is None else lam
    res = _j_gradient(spec, trunc, u.values, lam)
    return ResidualReport(
        residuals=res,
        max_residual=float(np.max(np.abs(res))),
        above_subsolution=bool(np.all(u.values >= trunc.ub - 1e-10)),
        positive=bool(np.all(u.values > 0.0)))


@dataclass
class DeGiorgiReport:
    levels: np.ndarray
    masses: np.ndarray
    a: float
    b: float
    C: float
    M: float
    p_exp: float
    r_exp: float
    smallness_threshold: float
    smallness_index: int


def degiorgi_bound(u: GridFunction, p_exp: float, r_exp: float, k_start: float,
                   max_doublings: int = 60, n_levels: int = 64) -> DeGiorgiReport:
    """Level-set iteration certifying a sup bound on a nonnegative state.

    Levels climb geometrically toward a candidate bound M; the level
    masses must satisfy the fast-convergence smallness condition and
    reach exactly zero.  The recursion constant is fitted by least
    squares on the observed steps and inflated so the recursion bound
    holds at every observed step.
    """
    vals = u.values
    if float(vals.min(initial=0.0)) < -1e-12:
        raise ConstructionError("level-set iteration needs a nonnegative state")
    vals = np.maximum(vals, 0.0)
    h = u.grid.h
    if r_exp <= 1.0 or p_exp <= 1.0:
        raise ConstructionError(f"need p_exp > 1 and r_exp > 1, got {p_exp}, {r_exp}")
    a = r_exp - 1.0
    b = 2.0 ** (p_exp * r_exp)
    if k_start <= 0.0:
        raise ConstructionError("k_start must be positive")

    def run(M: float):
        levels, masses = [], []
        for n in range(n_levels):
            k = M * (1.0 - 0.5 ** (n + 1))
            y = float(np.sum(np.maximum(vals - k, 0.0) ** p_exp) * h)
            levels.append(k)
            masses.append(y)
            if y == 0.0:
                break
        return np.array(levels), np.array(masses)

    M = 2.0 * k_start
    for _ in range(max_doublings):
        levels, masses = run(M)
        pos = [(n, masses[n], masses[n + 1]) for n in range(len(masses) - 1)
               if masses[n] > 0.0 and masses[n + 1] > 0.0]
        if pos:
            rows = np.array([[math.log(y1) - n * math.log(b) - (1.0 + a) * math.log(y0)]
                             for n, y0, y1 in pos])
            c_fit = math.exp(float(rows.mean()))
            c_need = max(y1 / (b ** n * y0 ** (1.0 + a)) for n, y0, y1 in pos)
            C = max(c_fit, c_need) * (1.0 + 1e-9)
        else:
            C = 1.0
        threshold = C ** (-1.0 / a) * b ** (-1.0 / (a * a))
        if masses[0] <= threshold and masses[-1] == 0.0:
            small_idx = int(np.argmax(masses <= threshold))
            return DeGiorgiReport(levels=levels, masses=masses, a=a, b=b, C=C,
                                  M=M, p_exp=p_exp, r_exp=r_exp,
                                  smallness_threshold=threshold,
                                  smallness_index=small_idx)
        M *= 2.0
    raise SolverError("level masses never satisfied the smallness condition; "
                      "the state behaves like an unbounded surrogate")


# ---------------------------------------------------------------------------
# pipeline and CSV output


@dataclass
class PipelineResult:
    report: HypothesisReport
    sub: SubSolution
    constants: TruncationConstants
    threshold: ThresholdResult
    lam: float
    admissibility: Admissibility
    first: EnergyState
    first_flags: dict
    first_trace: DescentTrace
    uphill: GridFunction
    mp: MountainPassResult
    verify_first: ResidualReport
    verify_second: ResidualReport
    degiorgi: DeGiorgiReport


def two_solution_pipeline(spec: ProblemSpec, lam: Optional[float] = None,
                          tol_first: float = 1e-6, tol_mountain: float = 1e-4,
                          n_path: int = 41, max_iter: int = 200000,
                          embed_trials: int = 32, t_max: float = 1e4,
                          rng: Optional[np.random.Generator] = None) -> PipelineResult:
    """Hypothesis audit, thresholds, and both solutions in one sweep.

    The truncation constants come from the reference sub-solution of
    the unit-weight problem; shrinking the sub-solution afterwards for
    small weights only loosens those bounds, so the threshold computed
    first stays valid for the final truncation.
    """
    report = run_all_checks(spec, t_max=t_max)
    if not report.all_passed:
        raise SolverError("hypothesis audit failed:\n" + "\n".join(report.lines()))
    delta = report.hf1.data["delta"]
    sub0 = build_subsolution(spec, delta, lam=1.0)
    constants = truncation_constants(spec, sub0.k1, sub0.k2)
    case = classify(spec.upsilon, spec.phi)
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    thr = lambda_star(spec, constants, case, rng=rng, embed_trials=embed_trials)
    if lam is None:
        lam = thr.lambda_star / 2.0 if math.isfinite(thr.lambda_star) else 1.0
    if not (0.0 < lam < thr.lambda_star):
        raise SolverError(f"lambda {lam:g} not below the threshold {thr.lambda_star:g}")
    spec.lam = lam
    adm = thr.r_star(lam)
    sub = sub0 if 1.0 / sub0.n_hat <= lam else build_subsolution(spec, delta, lam=lam)
    trunc = truncate_reaction(spec, sub)
    first, flags, trace = first_solution(spec, trunc, adm.r_star, lam,
                                         tol=tol_first, max_iter=max_iter)
    if not flags["converged"]:
        raise SolverError(f"first solution stalled at residual {first.residual:.3e}")
    up = uphill_endpoint(spec, trunc, first, lam)
    mp = mountain_pass(spec, trunc, first, up, lam, n_path=n_path,
                       tol=tol_mountain, max_outer=max_iter, r_star=adm.r_star)
    ver1 = verify_solution(spec, trunc, first.u, lam)
    ver2 = verify_solution(spec, trunc, mp.state.u, lam)
    p_exp = spec.phi_star_indices().lower
    r_exp = p_exp / spec.phi_indices().upper
    dg = degiorgi_bound(first.u, p_exp, r_exp,
                        k_start=max(0.6 * first.u.sup_norm(), 1e-9))
    return PipelineResult(report=report, sub=sub, constants=constants,
                          threshold=thr, lam=lam, admissibility=adm,
                          first=first, first_flags=flags, first_trace=trace,
                          uphill=up, mp=mp, verify_first=ver1,
                          verify_second=ver2, degiorgi=dg)


def write_solution_csv(path, grid: Grid, columns: dict) -> None:
    """Columns over padded nodes (boundary rows as zeros)."""
    xs = np.concatenate([[0.0], grid.nodes, [grid.length]])
    names = list(columns)
    padded = {name: np.concatenate([[0.0], np.asarray(v, dtype=float), [0.0]])
              for name, v in columns.items()}
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x"] + names)
        for i, x in enumerate(xs):
            writer.writerow([f"{x:.12g}"] + [f"{padded[n][i]:.12g}" for n in names])


def write_convergence_csv(path, trace: DescentTrace) -> None:
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "J", "residual"])
        for it, j_val, res in trace.rows:
            writer.writerow([it, f"{j_val:.12g}", f"{res:.12g}"])


def write_degiorgi_csv(path, report: DeGiorgiReport) -> None:
    with open(path, "w", newline="\n") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "k_n", "y_n"])
        for n, (k, y) in enumerate(zip(report.levels, report.masses)):
            writer.writerow([n, f"{k:.12g}", f"{y:.12g}"])
