"""Numeric calculus of Young functions.

Evaluation with domain guards, growth indices by log-grid sampling,
Young (Legendre) conjugation, the critical-growth Sobolev conjugate,
growth ordering, and an oscillating generator with distinct lower and
upper indices at infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicSpline, PchipInterpolator

from .errors import (
    ConstructionError,
    EvalDomainError,
    MissingIndicesError,
    OutOfRangeError,
    SingularIntegrandError,
)

__all__ = [
    "EVAL_LO_DEFAULT",
    "EVAL_HI_DEFAULT",
    "INDEX_GRID_LO",
    "INDEX_GRID_HI",
    "INDEX_GRID_POINTS",
    "ROOT_RTOL_ITERS",
    "IndexPair",
    "Ordering",
    "PathologicalParams",
    "YoungFunction",
    "build_pathological",
    "compute_indices",
    "conjugate_inverse",
    "cumulative_primitive",
    "delta2_nabla2",
    "exp_young",
    "inverse_value",
    "log_grid",
    "log_power_young",
    "ordering",
    "power_young",
    "power_over_p_young",
    "scaling_bound_lower",
    "scaling_bound_upper",
    "sobolev_conjugate",
    "theta_growth_integrals",
    "young_conjugate",
    "young_from_derivative",
]

EVAL_LO_DEFAULT = 1e-8
EVAL_HI_DEFAULT = 1e30
INDEX_GRID_LO = 1e-4
INDEX_GRID_HI = 1e6
INDEX_GRID_POINTS = 2000
# geometric bisection halves the log bracket; 90 iterations resolve any
# bracket inside [1e-60, 1e60] far below the 1e-10 relative target
ROOT_RTOL_ITERS = 90


def log_grid(lo: float, hi: float, n: int) -> np.ndarray:
    """Log-spaced sample grid on [lo, hi]."""
    if not (0.0 < lo < hi) or n < 2:
        raise ConstructionError(f"invalid log grid [{lo}, {hi}] with {n} points")
    return np.geomspace(lo, hi, n)


def _solve_increasing(fn, target, lo, hi, iters: int = ROOT_RTOL_ITERS) -> np.ndarray:
    """Geometric bisection for fn(s) = target with fn increasing on [lo, hi].

    Vectorized over `target`; fn must accept arrays.
    """
    t = np.atleast_1d(np.asarray(target, dtype=float))
    a = np.full(t.shape, float(lo))
    b = np.full(t.shape, float(hi))
    for _ in range(iters):
        mid = np.sqrt(a * b)
        high = fn(mid) >= t
        b = np.where(high, mid, b)
        a = np.where(high, a, mid)
    return np.sqrt(a * b)


def _golden_max(g, lo: float, hi: float, shape, iters: int = 140):
    """Golden-section maximum of g over [lo, hi], worked in log coordinates.

    Returns (argmax, at_lower_edge, at_upper_edge) arrays of `shape`.
    """
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a = np.full(shape, math.log(lo))
    b = np.full(shape, math.log(hi))
    for _ in range(iters):
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        take = g(np.exp(c)) > g(np.exp(d))
        b = np.where(take, d, b)
        a = np.where(take, a, c)
    s = np.exp((a + b) / 2.0)
    span = math.log(hi) - math.log(lo)
    at_lo = (a - math.log(lo)) < 1e-6 * span
    at_hi = (math.log(hi) - b) < 1e-6 * span
    return s, at_lo, at_hi


@dataclass(frozen=True)
class IndexPair:
    """Lower/upper growth indices with at-infinity window estimates."""

    lower: float
    upper: float
    at_infinity_lower: float
    at_infinity_upper: float

    def __post_init__(self):
        chain = (self.lower, self.at_infinity_lower, self.at_infinity_upper, self.upper)
        for a, b in zip(chain, chain[1:]):
            if not (a <= b or math.isclose(a, b, rel_tol=1e-12)):
                raise ConstructionError(f"index chain violated: {chain}")


class YoungFunction:
    """Convex Orlicz-space generator with guarded vectorized evaluation.

    Wraps callables for the value and derivative (optionally the second
    derivative) together with the interval [t_lo, t_hi] on which the
    evaluation is numerically trustworthy.  Values above t_hi, negative
    arguments, and non-finite results raise EvalDomainError instead of
    propagating infinities.  The value at 0 is 0 and the derivative at 0
    is taken as its one-sided limit 0.
    """

    def __init__(self, value, derivative, second_derivative=None,
                 t_lo: float = EVAL_LO_DEFAULT, t_hi: float = EVAL_HI_DEFAULT,
                 name: str = "psi"):
        self._value = value
        self._derivative = derivative
        self._second = second_derivative
        self.t_lo = float(t_lo)
        self.t_hi = float(t_hi)
        self.name = name
        self._indices: Optional[IndexPair] = None

    def __repr__(self):
        return f"YoungFunction({self.name}, domain=[{self.t_lo:.1e}, {self.t_hi:.1e}])"

    @property
    def has_second(self) -> bool:
        return self._second is not None

    @property
    def indices(self) -> Optional[IndexPair]:
        return self._indices

    def cache_indices(self, pair: IndexPair) -> None:
        self._indices = pair

    def _check(self, t) -> np.ndarray:
        arr = np.asarray(t, dtype=float)
        flat = np.atleast_1d(arr)
        if flat.size:
            if not np.all(np.isfinite(flat)) or np.any(flat < 0.0):
                raise EvalDomainError(f"{self.name}: argument outside [0, inf)")
            mx = float(flat.max())
            if mx > self.t_hi:
                raise EvalDomainError(
                    f"{self.name}: argument {mx:.6g} above trusted range {self.t_hi:.3g}")
        return arr

    def _apply(self, fn, t):
        arr = self._check(t)
        scalar = arr.ndim == 0
        flat = np.atleast_1d(arr).astype(float)
        out = np.zeros_like(flat)
        pos = flat > 0.0
        if pos.any():
            with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
                vals = np.asarray(fn(flat[pos]), dtype=float)
            if not np.all(np.isfinite(vals)):
                raise EvalDomainError(f"{self.name}: non-finite value inside domain")
            out[pos] = vals
        out = out.reshape(arr.shape) if not scalar else out
        return float(out[0]) if scalar else out

    def __call__(self, t):
        return self._apply(self._value, t)

    def prime(self, t):
        return self._apply(self._derivative, t)

    def second(self, t):
        if self._second is None:
            raise EvalDomainError(f"{self.name}: second derivative not available")
        return self._apply(self._second, t)


def compute_indices(psi: YoungFunction, grid: Optional[np.ndarray] = None,
                    cache: bool = True) -> IndexPair:
    """Growth indices of psi sampled on a log grid.

    lower/upper are grid extrema of t psi'(t)/psi(t); the at-infinity
    estimates come from the top two decades.  A monotone, fast-growing
    trend of per-decade maxima marks an unbounded ratio and reports the
    upper estimates as infinity.
    """
    if grid is None:
        hi = min(INDEX_GRID_HI, psi.t_hi)
        lo = min(INDEX_GRID_LO, hi / 1e10)
        lo = max(lo, psi.t_lo)
        grid = log_grid(lo, hi, INDEX_GRID_POINTS)
    grid = np.asarray(grid, dtype=float)
    decades = math.log10(grid[-1] / grid[0])
    if grid.size < 1000 or decades < 8.0 - 1e-9:
        raise ConstructionError(
            f"index grid needs >= 1000 points over >= 8 decades, got {grid.size} over {decades:.2f}")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = grid * psi.prime(grid) / psi(grid)
    if not np.all(np.isfinite(ratio)):
        raise EvalDomainError(f"{psi.name}: non-finite index ratio on sample grid")
    lower = float(ratio.min())
    upper = float(ratio.max())

    window = grid >= grid[-1] / 100.0
    at_lo = float(ratio[window].min())
    at_up = float(ratio[window].max())

    # per-decade maxima; a monotone run growing by > 8x across four
    # decades marks a ratio that is unbounded at infinity
    buckets = np.floor(np.log10(grid)).astype(int)
    uniq = np.unique(buckets)
    maxima = np.array([ratio[buckets == b].max() for b in uniq])
    if maxima.size >= 4:
        tail = maxima[-4:]
        if np.all(np.diff(tail) > 0) and tail[-1] >= 8.0 * tail[0]:
            upper = math.inf
            at_up = math.inf
    pair = IndexPair(lower, upper, at_lo, at_up)
    if cache:
        psi.cache_indices(pair)
    return pair


def _require_indices(psi: YoungFunction) -> IndexPair:
    if psi.indices is None:
        raise MissingIndicesError(
            f"{psi.name}: call compute_indices before using index-based bounds")
    return psi.indices


def scaling_bound_lower(psi: YoungFunction, k) -> np.ndarray:
    """min(k^i, k^s) with (i, s) the cached growth indices of psi."""
    pair = _require_indices(psi)
    k = np.asarray(k, dtype=float)
    return np.minimum(k ** pair.lower, k ** pair.upper)


def scaling_bound_upper(psi: YoungFunction, k) -> np.ndarray:
    """max(k^i, k^s) with (i, s) the cached growth indices of psi."""
    pair = _require_indices(psi)
    k = np.asarray(k, dtype=float)
    return np.maximum(k ** pair.lower, k ** pair.upper)


def delta2_nabla2(psi: YoungFunction) -> tuple[bool, bool]:
    """Doubling flags from the at-infinity estimates of the index ratio."""
    pair = _require_indices(psi)
    return (math.isfinite(pair.at_infinity_upper), pair.at_infinity_lower > 1.0)


def young_conjugate(psi: YoungFunction) -> YoungFunction:
    """Legendre transform max_{s>=0} (s t - psi(s)).

    The maximizer solves psi'(s) = t by monotone root-find; a
    golden-section probe backs it up when the bracket check fails.  The
    derivative of the conjugate is the maximizer itself.
    """
    lo, hi = psi.t_lo, psi.t_hi
    d_lo = float(psi.prime(lo))
    d_hi = float(psi.prime(hi))

    def maximizer(t: np.ndarray) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        below = t < d_lo
        above = t > d_hi
        if below.any() or above.any():
            bad = t[below | above]
            raise OutOfRangeError(
                f"conj({psi.name}): maximizer escapes [{lo:.1e}, {hi:.1e}] "
                f"for t={bad[:3]!r}")
        s = _solve_increasing(psi.prime, t, lo, hi)
        consistent = np.abs(psi.prime(s) - t) <= 1e-6 * np.maximum(t, 1e-300)
        if not consistent.all():
            # derivative data not reliably monotone here; fall back to a
            # direct search of s t - psi(s)
            miss = ~consistent
            tm = t[miss]
            def g(sv):
                return sv * tm - psi(sv)
            s_fb, edge_lo, edge_hi = _golden_max(g, lo, hi, tm.shape)
            if edge_lo.any() or edge_hi.any():
                raise OutOfRangeError(
                    f"conj({psi.name}): maximizer pinned to domain edge for "
                    f"t={tm[edge_lo | edge_hi][:3]!r}")
            s = s.copy()
            s[miss] = s_fb
        return s

    def value(t):
        s = maximizer(t)
        return s * np.atleast_1d(np.asarray(t, float)) - psi(s)

    second = None
    if psi.has_second:
        def second(t):
            s = maximizer(t)
            return 1.0 / psi.second(s)

    return YoungFunction(value, maximizer, second,
                         t_lo=d_lo * (1.0 + 1e-12), t_hi=d_hi * (1.0 - 1e-12),
                         name=f"conj({psi.name})")


def inverse_value(psi: YoungFunction, y) -> np.ndarray:
    """psi^{-1}(y) by monotone root-find on the value."""
    return _solve_increasing(psi, y, psi.t_lo, psi.t_hi)


def conjugate_inverse(psi: YoungFunction, y) -> np.ndarray:
    """Inverse of the Young conjugate evaluated at y.

    Uses the Legendre parametrization: with s* solving
    s psi'(s) - psi(s) = y, the answer is psi'(s*).  One monotone
    root-find instead of two nested ones.
    """
    def pivot(s):
        return s * psi.prime(s) - psi(s)
    s_star = _solve_increasing(pivot, y, psi.t_lo, psi.t_hi)
    return psi.prime(s_star)


class Ordering(Enum):
    MUCH_LESS = "much_less"
    LESS = "less"
    NEITHER = "neither"


def _tail_window(psi1: YoungFunction, psi2: YoungFunction, factor: float,
                 n_tail: int = 160):
    hi = min(psi1.t_hi, psi2.t_hi / max(factor, 1.0))
    lo = hi / 1e4
    if lo <= max(psi1.t_lo, psi2.t_lo):
        raise EvalDomainError(
            f"ordering({psi1.name}, {psi2.name}): shared tail shorter than 4 decades")
    return log_grid(lo, hi, n_tail)


def ordering(psi1: YoungFunction, psi2: YoungFunction,
             etas=(0.1, 1.0, 10.0), c_exponents=range(0, 31)) -> Ordering:
    """Growth comparison of psi1 against psi2 on the shared domain tail.

    MUCH_LESS when psi1(t)/psi2(eta t) decays monotonically toward zero
    for every tested eta; LESS when psi1(t) <= psi2(c t) on the tail for
    some dyadic c; the index shortcut s_{psi1} < i_{psi2} is applied
    first.  NEITHER is a valid answer.
    """
    try:
        p1 = psi1.indices or compute_indices(psi1)
        p2 = psi2.indices or compute_indices(psi2)
        if p1.upper < p2.lower - 1e-9:
            return Ordering.MUCH_LESS
    except (EvalDomainError, ConstructionError):
        pass

    much_less = True
    for eta in etas:
        try:
            t = _tail_window(psi1, psi2, eta)
        except EvalDomainError:
            much_less = False
            break
        ratio = psi1(t) / psi2(eta * t)
        monotone = np.all(np.diff(ratio) <= 1e-9 * ratio[:-1] + 1e-300)
        vanishing = ratio[-1] <= 1e-2 * ratio[0]
        if not (monotone and vanishing):
            much_less = False
            break
    if much_less:
        return Ordering.MUCH_LESS

    for j in c_exponents:
        c = 2.0 ** j
        try:
            t = _tail_window(psi1, psi2, c)
        except EvalDomainError:
            continue
        if np.all(psi1(t) <= psi2(c * t) * (1.0 + 1e-10)):
            return Ordering.LESS
    return Ordering.NEITHER


# ---------------------------------------------------------------------------
# constructors


def power_young(p: float, coeff: float = 1.0, name: Optional[str] = None) -> YoungFunction:
    """c t^p with exact cached indices (p, p)."""
    if p <= 1.0 or coeff <= 0.0:
        raise ConstructionError(f"power generator needs p > 1 and coeff > 0, got p={p}")
    psi = YoungFunction(
        lambda t: coeff * t ** p,
        lambda t: coeff * p * t ** (p - 1.0),
        lambda t: coeff * p * (p - 1.0) * t ** (p - 2.0),
        t_lo=1e-30,  # powers stay accurate far below the generic floor and
        # their critical conjugates need the long tables it enables
        name=name or f"{coeff:g}*t^{p:g}")
    psi.cache_indices(IndexPair(p, p, p, p))
    return psi


def power_over_p_young(p: float) -> YoungFunction:
    """t^p / p, the standard self-dual family under conjugation."""
    return power_young(p, coeff=1.0 / p, name=f"t^{p:g}/{p:g}")


def exp_young() -> YoungFunction:
    """e^t - t - 1; upper index unbounded at infinity."""
    return YoungFunction(
        lambda t: np.expm1(t) - t,
        lambda t: np.expm1(t),
        lambda t: np.exp(t),
        t_hi=600.0, name="exp(t)-t-1")


@dataclass(frozen=True)
class PathologicalParams:
    """Parameters of the oscillating generator with indices q < p.

    eps must satisfy 0 < eps < min(4, (q-1)/beta) so that both
    derivatives stay positive; alpha and beta are the stored midpoint
    and half-width of (q, p) and must match their recomputation exactly.
    """

    p: float
    q: float
    eps: float
    alpha: float
    beta: float

    @classmethod
    def make(cls, p: float, q: float, eps: float) -> "PathologicalParams":
        return cls(p=p, q=q, eps=eps, alpha=(p + q) / 2.0, beta=(p - q) / 2.0)

    def __post_init__(self):
        if not (1.0 < self.q < self.p):
            raise ConstructionError(f"need 1 < q < p, got q={self.q}, p={self.p}")
        if self.alpha != (self.p + self.q) / 2.0 or self.beta != (self.p - self.q) / 2.0:
            raise ConstructionError("alpha/beta inconsistent with p, q")
        bound = min(4.0, (self.q - 1.0) / self.beta)
        if not (0.0 < self.eps < bound):
            raise ConstructionError(
                f"eps={self.eps} outside (0, {bound:g}) for p={self.p}, q={self.q}")


def build_pathological(params: PathologicalParams) -> YoungFunction:
    """Oscillating generator t^alpha e^{eta(t)} with distinct indices.

    eta is quadratic below t = e and rides a bounded oscillation in
    eps*log(log t) above it; both branches and their first two
    derivatives agree at the switch point.  The index ratio equals
    alpha + t eta'(t) and sweeps the full interval [q, p] at infinity.
    """
    a, b, eps = params.alpha, params.beta, params.eps
    E = math.e
    shift = b * eps / (1.0 + eps * eps)

    def eta_pieces(t: np.ndarray):
        """Return (eta, t*eta', t^2*eta'') evaluated branchwise."""
        t = np.asarray(t, dtype=float)
        eta = np.empty_like(t)
        teta1 = np.empty_like(t)
        t2eta2 = np.empty_like(t)
        low = t <= E
        if low.any():
            tl = t[low]
            eta[low] = b * eps / (2.0 * E * E) * (E - tl) ** 2 - shift
            teta1[low] = b * eps / (E * E) * tl * (tl - E)
            t2eta2[low] = b * eps / (E * E) * tl * tl
        hig = ~low
        if hig.any():
            th = t[hig]
            lt = np.log(th)
            z = eps * np.log(lt)
            sin_z = np.sin(z)
            cos_z = np.cos(z)
            eta[hig] = b * lt / (1.0 + eps * eps) * (sin_z - eps * cos_z)
            teta1[hig] = b * sin_z
            t2eta2[hig] = b * ((eps / lt) * cos_z - sin_z)
        return eta, teta1, t2eta2

    def value(t):
        eta, _, _ = eta_pieces(t)
        return t ** a * np.exp(eta)

    def derivative(t):
        eta, teta1, _ = eta_pieces(t)
        return t ** (a - 1.0) * np.exp(eta) * (a + teta1)

    def second(t):
        eta, teta1, t2eta2 = eta_pieces(t)
        first = t ** (a - 1.0) * np.exp(eta) * (a + teta1)
        return first / t * (a - 1.0 + teta1 + (t2eta2 + teta1) / (a + teta1))

    name = f"oscillating(p={params.p:g},q={params.q:g},eps={eps:g})"
    return YoungFunction(value, derivative, second, name=name)


def cumulative_primitive(fn, cache_lo: float, cache_hi: float,
                         per_decade: int = 120, gl_order: int = 12):
    """Primitive F(t) = int_0^t fn, cached on a log grid.

    Panel Gauss-Legendre accumulates the integral across the grid; the
    head below the grid is closed with the fitted local power of fn.
    Returns (value_callable, grid, cumulative) where the callable
    extrapolates with the fitted power behavior below the cache.
    """
    grid = log_grid(cache_lo, cache_hi, int(per_decade * math.log10(cache_hi / cache_lo)) + 1)
    f_head = float(np.asarray(fn(np.array([grid[0]])), float)[0])
    f_next = float(np.asarray(fn(np.array([grid[3]])), float)[0])
    d0 = math.log(f_next / f_head) / math.log(grid[3] / grid[0])
    if d0 <= -1.0:
        raise SingularIntegrandError(f"head exponent {d0:.3f} <= -1, primitive diverges at 0")
    head = f_head * grid[0] / (d0 + 1.0)

    nodes, weights = leggauss(gl_order)
    lefts = grid[:-1]
    rights = grid[1:]
    mid = (lefts + rights) / 2.0
    half = (rights - lefts) / 2.0
    pts = mid[:, None] + half[:, None] * nodes[None, :]
    vals = np.asarray(fn(pts.ravel()), dtype=float).reshape(pts.shape)
    panels = (vals * weights[None, :]).sum(axis=1) * half
    cum = head + np.concatenate([[0.0], np.cumsum(panels)])
    if not np.all(np.isfinite(cum)) or not np.all(np.diff(cum) > 0):
        raise SingularIntegrandError("cumulative quadrature produced a non-monotone table")

    spline = CubicSpline(np.log(grid), np.log(cum))
    g0 = grid[0]
    c0 = cum[0]

    def value(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(t)
        low = t < g0
        if low.any():
            out[low] = c0 * (t[low] / g0) ** (d0 + 1.0)
        if (~low).any():
            out[~low] = np.exp(spline(np.log(t[~low])))
        return out

    return value, grid, cum


def young_from_derivative(phi_prime, t_lo: float = 1e-25, t_hi: float = EVAL_HI_DEFAULT,
                          second=None, name: str = "psi",
                          cache_lo: float = 1e-12, cache_hi: float = 1e32,
                          per_decade: int = 120) -> YoungFunction:
    """Young function defined as the primitive of an increasing derivative."""
    value, _, _ = cumulative_primitive(phi_prime, cache_lo, cache_hi, per_decade)
    return YoungFunction(value, phi_prime, second, t_lo=t_lo,
                         t_hi=min(t_hi, cache_hi / 2.0), name=name)


def log_power_young(p: float, t_hi: float = 1e44) -> YoungFunction:
    """Primitive of t^{p-1} log(1+t); indices p and p+1."""
    if p <= 1.0:
        raise ConstructionError(f"log-power generator needs p > 1, got {p}")

    def phi(t):
        return t ** (p - 1.0) * np.log1p(t)

    def phi_prime(t):
        return (p - 1.0) * t ** (p - 2.0) * np.log1p(t) + t ** (p - 1.0) / (1.0 + t)

    return young_from_derivative(phi, t_hi=t_hi, second=phi_prime,
                                 name=f"int t^{p - 1:g} log(1+t)",
                                 cache_lo=1e-12, cache_hi=min(1e46, t_hi * 100.0))


# ---------------------------------------------------------------------------
# Sobolev conjugate


def _theta_values(phi: YoungFunction, n_dim: int, s: np.ndarray) -> np.ndarray:
    return inverse_value(phi, s) / s ** (1.0 + 1.0 / n_dim)


def theta_growth_integrals(phi: YoungFunction, n_dim: int,
                           k_range=range(2, 9), per_decade: int = 32,
                           gl_order: int = 10) -> list[float]:
    """Integrals of phi^{-1}(s) s^{-1-1/N} over [1, 10^k] for each k.

    Used to decide whether the critical-growth conjugate is defined:
    the sequence must keep growing without visible saturation.
    """
    k_max = max(k_range)
    edges = log_grid(1.0, 10.0 ** k_max, per_decade * k_max + 1)
    nodes, weights = leggauss(gl_order)
    mid = (edges[:-1] + edges[1:]) / 2.0
    half = (edges[1:] - edges[:-1]) / 2.0
    pts = mid[:, None] + half[:, None] * nodes[None, :]
    vals = _theta_values(phi, n_dim, pts.ravel()).reshape(pts.shape)
    panels = (vals * weights[None, :]).sum(axis=1) * half
    cum = np.concatenate([[0.0], np.cumsum(panels)])
    out = []
    for k in k_range:
        idx = int(round(per_decade * k))
        out.append(float(cum[idx]))
    return out


def sobolev_conjugate(phi: YoungFunction, n_dim: int) -> YoungFunction:
    """Critical-growth conjugate defined through its inverse integral.

    The inverse is int_0^t phi^{-1}(s) s^{-1-1/N} ds accumulated by
    panel quadrature and inverted monotonically.  When the integrand is
    not integrable at 0 (borderline upper growth of phi), the low end
    is replaced below a patch point by the power behavior dictated by
    the lower index of phi; this standard modification changes the
    conjugate only by a bounded shift and leaves its growth at infinity
    untouched.
    """
    if n_dim < 2:
        raise ConstructionError(f"dimension parameter must be >= 2, got {n_dim}")
    s_lo = max(1e-60, float(phi(phi.t_lo)) * 4.0)
    s_hi = min(1e50, float(phi(phi.t_hi)) / 4.0)
    if s_hi / s_lo < 1e20:
        raise ConstructionError(f"{phi.name}: domain too short for a conjugate table")
    grid = log_grid(s_lo, s_hi, int(48 * math.log10(s_hi / s_lo)) + 1)

    theta = _theta_values(phi, n_dim, grid)
    # local exponent at the low end decides integrability at 0
    e_head = math.log(theta[4] / theta[0]) / math.log(grid[4] / grid[0])
    patched = e_head <= -1.0 + 1e-6
    patch_idx = 0
    if patched:
        pair = phi.indices or compute_indices(phi)
        if pair.lower >= n_dim:
            raise SingularIntegrandError(
                f"{phi.name}: inverse integral diverges at 0 and the lower index "
                f"{pair.lower:.3f} >= N = {n_dim} leaves no admissible patch")
        e_patch = 1.0 / pair.lower - 1.0 - 1.0 / n_dim
        s_patch = min(max(float(phi(1.0)), grid[0] * 10.0), grid[-1] / 1e10)
        patch_idx = int(np.searchsorted(grid, s_patch))
        theta = theta.copy()
        theta[:patch_idx] = theta[patch_idx] * (grid[:patch_idx] / grid[patch_idx]) ** e_patch
        e_head = e_patch

    nodes, weights = leggauss(10)
    mid = (grid[:-1] + grid[1:]) / 2.0
    half = (grid[1:] - grid[:-1]) / 2.0
    pts = mid[:, None] + half[:, None] * nodes[None, :]
    vals = _theta_values(phi, n_dim, pts.ravel()).reshape(pts.shape)
    if patched:
        low = pts < grid[patch_idx]
        if low.any():
            ref = theta[patch_idx]
            vals = np.where(low, ref * (pts / grid[patch_idx]) ** e_head, vals)
    panels = (vals * weights[None, :]).sum(axis=1) * half
    head = theta[0] * grid[0] / (e_head + 1.0)
    cum = head + np.concatenate([[0.0], np.cumsum(panels)])
    if not np.all(np.isfinite(cum)) or not np.all(np.diff(cum) > 0):
        raise SingularIntegrandError(f"{phi.name}: conjugate inverse table not monotone")
    # saturation guard: the inverse must keep growing toward infinity
    top = cum[-1] / cum[int(len(cum) * 0.9)]
    if top < 1.0 + 1e-3:
        raise ConstructionError(
            f"{phi.name}: inverse integral saturates, conjugate undefined")

    log_grid_pts = np.log(grid)
    log_cum = np.log(cum)
    inv_spline = PchipInterpolator(log_cum, log_grid_pts)
    g0, c0 = grid[0], cum[0]
    m0 = 1.0 / (e_head + 1.0)
    t_lo_out = cum[0] * (1.0 + 1e-9)
    t_hi_out = cum[-1] * (1.0 - 1e-9)

    def patched_theta(tau):
        tau = np.asarray(tau, dtype=float)
        out = _theta_values(phi, n_dim, np.maximum(tau, g0))
        if patched:
            low = tau < grid[patch_idx]
            if low.any():
                out = np.where(low, theta[patch_idx] * (tau / grid[patch_idx]) ** e_head, out)
        low2 = tau < g0
        if low2.any():
            out = np.where(low2, theta[0] * (tau / g0) ** e_head, out)
        return out

    def value(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(t)
        low = t < c0
        if low.any():
            out[low] = g0 * (t[low] / c0) ** m0
        if (~low).any():
            out[~low] = np.exp(inv_spline(np.log(t[~low])))
        return out

    def derivative(t):
        tau = value(t)
        return 1.0 / patched_theta(tau)

    return YoungFunction(value, derivative, None, t_lo=t_lo_out, t_hi=t_hi_out,
                         name=f"sobolev_conj({phi.name},N={n_dim})")
