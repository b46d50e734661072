"""
Joint range of (D(Q||P1), D(Q||P2)) when |P1 - P2| >= eps.

Every order alpha in (0, 1) contributes a half-plane

    y + t x >= g_alpha(eps),   t = alpha / (1 - alpha),

with x = D(Q||P1) and y = D(Q||P2). The achievable region is the intersection
of these half-planes; its lower boundary is the pointwise maximum of the lines
and every point of the region is reached by binary P1, P2, Q.

Searches over alpha run in the variable u = log t, since the tangent order
crowds towards 0 or 1 near the axes.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Tuple

import numpy as np

from renyitv._numerics import bisect_increasing, golden_section_max
from renyitv.divergences import Distribution, relative_entropy, tilted_measure
from renyitv.gmin import g_alpha, g_values, solve_f_root

LOG_T_RANGE = 7.0 * math.log(10.0)  # t in [1e-7, 1e7]
ENVELOPE_SCAN = 512
CONTAINS_GRID = 1025
ALPHA_CLAMP = 1e-6


@dataclass(frozen=True)
class BoundaryLine:
    """Line y = intercept + slope * x supporting the region."""

    alpha: float
    slope: float
    intercept: float

    def y(self, x: float) -> float:
        return self.intercept + self.slope * x


@dataclass(frozen=True)
class WitnessTriple:
    p1_star: Distribution
    p2_star: Distribution
    q_star: Distribution
    alpha: float
    eps: float
    point: Tuple[float, float]
    flags: Tuple[str, ...] = field(default=())


def _check_eps(eps: float) -> None:
    if not (0.0 < eps < 2.0):
        raise ValueError(f"eps must lie in (0, 2), got {eps}")


def _alpha_of_log_t(u):
    # alpha = t/(1+t) written to keep 1 - alpha accurate for large t
    return 1.0 / (1.0 + np.exp(-u))


def boundary_line(eps: float, alpha: float) -> BoundaryLine:
    _check_eps(eps)
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return BoundaryLine(alpha, -alpha / (1.0 - alpha), g_alpha(alpha, eps).value)


@lru_cache(maxsize=64)
def _line_family(eps: float, n: int) -> Tuple[np.ndarray, np.ndarray]:
    u = np.linspace(-LOG_T_RANGE, LOG_T_RANGE, n)
    return u, g_values(_alpha_of_log_t(u), eps)


def _g_at_log_t(eps: float, u: float) -> float:
    alpha = 1.0 / (1.0 + math.exp(-u))
    eps_prime = 0.5 * eps
    q = solve_f_root(alpha, eps_prime)
    p = min(q + eps_prime, 1.0)
    t1 = alpha * math.log(p) + (1.0 - alpha) * math.log(q)
    t2 = alpha * math.log1p(-p) + (1.0 - alpha) * math.log1p(-q) if p < 1.0 else -math.inf
    hi, lo = max(t1, t2), min(t1, t2)
    return max((hi + math.log1p(math.exp(lo - hi))) / (alpha - 1.0), 0.0)


def _envelope_search(eps: float, x: float, n: int) -> Tuple[float, float, bool]:
    """sup over alpha of g_alpha(eps) - t x, its maximiser and a degeneracy flag."""
    u, g = _line_family(eps, n)
    vals = g - np.exp(u) * x
    k = int(np.argmax(vals))
    near = np.flatnonzero(vals >= vals[k] - 1e-12)
    degenerate = bool(near.size and (near.max() - near.min()) > 2)
    k = int(near.min())
    lo, hi = u[max(k - 1, 0)], u[min(k + 1, n - 1)]
    u_star, best = golden_section_max(
        lambda s: _g_at_log_t(eps, s) - math.exp(s) * x, lo, hi, tol=1e-9
    )
    if vals[k] > best:
        u_star, best = float(u[k]), float(vals[k])
    return best, float(_alpha_of_log_t(u_star)), degenerate


def _tangent(eps: float, x: float) -> Tuple[float, float, bool]:
    _check_eps(eps)
    if x < 0.0:
        raise ValueError(f"x must be nonnegative, got {x}")
    g1 = g_alpha(1.0, eps).value
    if x == 0.0:
        # sup of g_alpha over alpha < 1 is its limit at alpha = 1
        return g1, 1.0, False
    if x >= g1:
        # every line meets the x-axis at g_{1-alpha}(eps) <= g_1(eps)
        return 0.0, 0.0, False
    best, alpha, degenerate = _envelope_search(eps, x, ENVELOPE_SCAN)
    return max(best, 0.0), alpha, degenerate


def envelope_tangent(eps: float, x: float) -> Tuple[float, float]:
    """Boundary height at x together with the order of the tangent line there."""
    y, alpha, _ = _tangent(eps, x)
    return y, alpha


def envelope_y(eps: float, x: float) -> float:
    """Lower boundary of the region: max over alpha of g_alpha(eps) - t x, floored at 0."""
    return envelope_tangent(eps, x)[0]


def contains(eps: float, x: float, y: float, tol: float = 1e-9) -> bool:
    """Whether (x, y) satisfies every line constraint up to ``tol``."""
    _check_eps(eps)
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    if x < 0.0 or y < 0.0:
        return False
    if x == 0.0:
        return y >= g_alpha(1.0, eps).value - tol
    best, _, _ = _envelope_search(eps, x, CONTAINS_GRID)
    return y >= best - tol


def _witness(eps: float, alpha: float, flags=()) -> WitnessTriple:
    res = g_alpha(alpha, eps)
    P1 = Distribution((res.p_star, 1.0 - res.p_star))
    P2 = Distribution((res.q_star, 1.0 - res.q_star))
    Q = tilted_measure(P1, P2, alpha)
    point = (relative_entropy(Q, P1), relative_entropy(Q, P2))
    return WitnessTriple(P1, P2, Q, alpha, eps, point, tuple(flags))


def witness_triple(eps: float, slope: float) -> WitnessTriple:
    """Binary P1, P2, Q whose point is where the line of the given slope touches the boundary."""
    _check_eps(eps)
    if not slope < 0.0:
        raise ValueError(f"slope must be negative, got {slope}")
    alpha = -slope / (1.0 - slope)
    flags = []
    if alpha < ALPHA_CLAMP or alpha > 1.0 - ALPHA_CLAMP:
        alpha = min(max(alpha, ALPHA_CLAMP), 1.0 - ALPHA_CLAMP)
        flags.append("clamped")
    return _witness(eps, alpha, flags)


def boundary_polyline(eps: float, n_points: int, log10_span: float = 6.0) -> List[WitnessTriple]:
    """Tangency points for slopes -10^k, k from +span down to -span (x increasing)."""
    _check_eps(eps)
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    slopes = -np.logspace(log10_span, -log10_span, n_points)
    return [witness_triple(eps, float(s)) for s in slopes]


def witness_for_point(eps: float, x: float, y: float) -> WitnessTriple:
    """Binary triple reaching (x, y), which must lie in the eps-region.

    Interior points sit on the boundary of a smaller region with a larger
    separation eps_bar; eps_bar is found by bisection and the tangent line
    there gives the witness.
    """
    _check_eps(eps)
    if not contains(eps, x, y, 1e-9):
        raise ValueError(f"point ({x}, {y}) lies outside the region for eps={eps}")
    flags = []
    if x == 0.0 or y == 0.0:
        flags.append("axis")
    if envelope_y(eps, x) >= y - 1e-7:
        eps_bar = eps
    else:
        eps_bar, _ = bisect_increasing(
            lambda e: envelope_y(e, x) - y, 0.0, eps, 2.0 - 1e-12, xtol=1e-10
        )
    _, alpha, degenerate = _tangent(eps_bar, x)
    if degenerate:
        flags.append("degenerate-tangency")
    if alpha < ALPHA_CLAMP or alpha > 1.0 - ALPHA_CLAMP:
        alpha = min(max(alpha, ALPHA_CLAMP), 1.0 - ALPHA_CLAMP)
        flags.append("clamped")
    return _witness(eps_bar, alpha, flags)


def chernoff_min(eps: float) -> Tuple[float, WitnessTriple]:
    """Least Chernoff information among pairs with |P1 - P2| >= eps.

    Equals -log(1 - eps^2/4)/2, attained by P1(0) = (2+eps)/4, P2(0) = (2-eps)/4
    with the uniform Q, i.e. the boundary point on the diagonal x = y.
    """
    _check_eps(eps)
    value = -0.5 * math.log1p(-0.25 * eps * eps)
    P1 = Distribution(((2.0 + eps) / 4.0, (2.0 - eps) / 4.0))
    P2 = Distribution(((2.0 - eps) / 4.0, (2.0 + eps) / 4.0))
    Q = tilted_measure(P1, P2, 0.5)
    point = (relative_entropy(Q, P1), relative_entropy(Q, P2))
    return value, WitnessTriple(P1, P2, Q, 0.5, eps, point)
