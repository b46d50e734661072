"""
Minimum Rényi divergence under a total variation constraint.

``g_alpha(alpha, eps)`` is the smallest D_alpha(P1||P2) over all pairs with
|P1 - P2| >= eps. The minimum is attained on a binary alphabet with
|p - q| = eps/2, so every routine here works with Bernoulli pairs
(p, q) = (q + eps/2, q).

Orders in (0, 1) use the stationarity condition f(q) = (1 - alpha)/alpha,
whose left side is strictly increasing in q, so plain bisection finds the
unique minimiser. Order 1 is a convex one-dimensional problem. Orders above 1
have no such guarantee and are handled by a dense scan with local refinement.
"""

import math
from dataclasses import dataclass

import numpy as np

from renyitv._numerics import golden_section_min
from renyitv.divergences import ORDER_ONE_TOL, binary_renyi

ROOT_EDGE = 1e-15
ROOT_XTOL = 1e-13
SCAN_POINTS = 4096


@dataclass(frozen=True)
class GMinQuery:
    alpha: float
    eps: float

    def __post_init__(self):
        if not (self.alpha > 0.0) or math.isinf(self.alpha):
            raise ValueError(f"alpha must be positive and finite, got {self.alpha}")
        if not (0.0 <= self.eps < 2.0):
            raise ValueError(f"eps must lie in [0, 2), got {self.eps}")

    @property
    def eps_prime(self) -> float:
        return 0.5 * self.eps


@dataclass(frozen=True)
class GMinResult:
    """Minimum value (nats) and the Bernoulli pair attaining it, p_star >= q_star."""

    value: float
    p_star: float
    q_star: float
    method: str  # closed-form | root | scan | oracle
    alpha: float = math.nan
    eps: float = math.nan


def _f_values(alpha, eps_prime, q):
    q = np.asarray(q, float)
    b = 1.0 + eps_prime / q
    a = ((1.0 - eps_prime) - q) / (1.0 - q)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        num = a ** (alpha - 1.0) - b ** (alpha - 1.0)
        den = b**alpha - a**alpha
        f = num / den
    return np.where(a > 0.0, f, np.inf)


def f_curve(alpha: float, eps_prime: float, q):
    """Stationarity curve of the binary problem for orders in (0, 1).

    With b = 1 + eps'/q and a = 1 - eps'/(1 - q),

        f(q) = (a^(alpha-1) - b^(alpha-1)) / (b^alpha - a^alpha),

    which increases strictly from 0 to +inf on (0, 1 - eps').
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if not (0.0 < eps_prime < 1.0):
        raise ValueError(f"eps_prime must lie in (0, 1), got {eps_prime}")
    qa = np.asarray(q, float)
    if np.any((qa <= 0.0) | (qa >= 1.0 - eps_prime)):
        raise ValueError(f"q must lie in (0, {1.0 - eps_prime}), got {q}")
    out = _f_values(alpha, eps_prime, qa)
    return float(out) if np.ndim(q) == 0 else out


def _f_scalar(alpha: float, eps_prime: float, q: float) -> float:
    b = 1.0 + eps_prime / q
    a = ((1.0 - eps_prime) - q) / (1.0 - q)
    if a <= 0.0:
        return math.inf
    try:
        return (a ** (alpha - 1.0) - b ** (alpha - 1.0)) / (b**alpha - a**alpha)
    except (OverflowError, ZeroDivisionError):
        return math.inf


def _solve_scalar(alpha: float, eps_prime: float, xtol: float) -> float:
    target = (1.0 - alpha) / alpha
    lo, hi = ROOT_EDGE, (1.0 - eps_prime) - ROOT_EDGE
    for _ in range(200):
        if hi - lo < xtol:
            break
        mid = 0.5 * (lo + hi)
        if _f_scalar(alpha, eps_prime, mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_f_root(alpha, eps_prime, xtol: float = ROOT_XTOL):
    """Unique q in (0, 1 - eps') with f(q) = (1 - alpha)/alpha, by bisection.

    ``alpha`` and ``eps_prime`` broadcast, so a whole family of orders can be
    solved at once.
    """
    alpha_a = np.asarray(alpha, float)
    eps_a = np.asarray(eps_prime, float)
    if np.any((alpha_a <= 0.0) | (alpha_a >= 1.0)):
        raise ValueError("alpha must lie in (0, 1)")
    if np.any((eps_a <= 0.0) | (eps_a >= 1.0)):
        raise ValueError("eps_prime must lie in (0, 1)")
    if alpha_a.ndim == 0 and eps_a.ndim == 0:
        return _solve_scalar(float(alpha_a), float(eps_a), xtol)
    alpha_a, eps_a = np.broadcast_arrays(alpha_a, eps_a)
    target = (1.0 - alpha_a) / alpha_a
    lo = np.full(alpha_a.shape, ROOT_EDGE)
    hi = (1.0 - eps_a) - ROOT_EDGE
    for _ in range(200):
        if np.all(hi - lo < xtol):
            break
        mid = 0.5 * (lo + hi)
        below = _f_values(alpha_a, eps_a, mid) < target
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    root = 0.5 * (lo + hi)
    return float(root) if root.ndim == 0 else root


def _result(alpha, eps, q, method):
    eps_prime = 0.5 * eps
    p = min(q + eps_prime, 1.0)
    return GMinResult(float(binary_renyi(p, q, alpha)), p, q, method, alpha, eps)


def _g_order_one(eps: float) -> float:
    eps_prime = 0.5 * eps
    q, _ = golden_section_min(
        lambda t: binary_renyi(t + eps_prime, t, 1.0), 0.0, 1.0 - eps_prime, tol=1e-14
    )
    return q


def _g_scan(alpha: float, eps: float) -> float:
    eps_prime = 0.5 * eps
    hi = 1.0 - eps_prime
    grid = np.linspace(0.0, hi, SCAN_POINTS)
    vals = binary_renyi(np.minimum(grid + eps_prime, 1.0), grid, alpha)
    i = int(np.nanargmin(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, SCAN_POINTS - 1)]

    def objective(t):
        return binary_renyi(t + eps_prime, t, alpha)

    q_ref, v_ref = golden_section_min(objective, a, b, tol=1e-14)
    return float(q_ref) if v_ref <= objective(grid[i]) else float(grid[i])


def g_alpha(alpha: float, eps: float) -> GMinResult:
    """min D_alpha(P1||P2) subject to |P1 - P2| >= eps, with its minimiser."""
    query = GMinQuery(float(alpha), float(eps))
    alpha, eps = query.alpha, query.eps
    if eps == 0.0:
        return GMinResult(0.0, 0.5, 0.5, "closed-form", alpha, eps)
    if abs(alpha - 1.0) < ORDER_ONE_TOL:
        return _result(1.0, eps, _g_order_one(eps), "scan")
    if alpha < 1.0:
        return _result(alpha, eps, solve_f_root(alpha, query.eps_prime), "root")
    return _result(alpha, eps, _g_scan(alpha, eps), "scan")


def g_values(alphas, eps: float) -> np.ndarray:
    """Vectorised g over orders in (0, 1) at a fixed eps."""
    alphas = np.asarray(alphas, float)
    if eps == 0.0:
        return np.zeros_like(alphas)
    eps_prime = 0.5 * eps
    q = np.asarray(solve_f_root(alphas, eps_prime))
    p = np.minimum(q + eps_prime, 1.0)
    with np.errstate(divide="ignore"):
        t1 = alphas * np.log(p) + (1.0 - alphas) * np.log(q)
        t2 = np.where(p < 1.0, alphas * np.log1p(-p) + (1.0 - alphas) * np.log1p(-q), -np.inf)
    return np.maximum(np.logaddexp(t1, t2) / (alphas - 1.0), 0.0)


def g_closed_form(alpha: float, eps: float):
    """Closed-form g for orders 1/2 and 2; None for other orders."""
    if alpha == 0.5:
        return -math.log1p(-0.25 * eps * eps)
    if alpha == 2.0:
        if eps <= 1.0:
            return math.log1p(eps * eps)
        return -math.log1p(-0.5 * eps)
    return None


def g_alpha_oracle(alpha: float, eps: float, grid_n: int = 100_000) -> GMinResult:
    """Brute-force g: grid minimum of d_alpha(q + eps/2 || q) over q in [0, 1 - eps/2]."""
    query = GMinQuery(float(alpha), float(eps))
    if grid_n < 100:
        raise ValueError(f"grid_n must be >= 100, got {grid_n}")
    eps_prime = query.eps_prime
    q = np.linspace(0.0, 1.0 - eps_prime, int(grid_n))
    vals = binary_renyi(np.minimum(q + eps_prime, 1.0), q, query.alpha)
    i = int(np.nanargmin(vals))
    return GMinResult(
        float(vals[i]), min(float(q[i]) + eps_prime, 1.0), float(q[i]), "oracle", query.alpha, query.eps
    )


def gilardoni_bound(alpha: float, eps: float, convention: str = "half", refined: bool = True) -> float:
    """Pinsker-type lower bound on D_alpha for alpha in (0, 1).

    ``alpha t^2 / 2 + alpha (1 + 5 alpha - 5 alpha^2) t^4 / 9`` evaluated at
    t = eps/2 (``convention="half"``, total variation measured as a sup over
    events) or at t = eps (``convention="full"``, the L1 distance). Only the
    ``"half"`` convention is a valid lower bound on g; ``refined=False`` keeps
    the quadratic term only.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if not (0.0 <= eps < 2.0):
        raise ValueError(f"eps must lie in [0, 2), got {eps}")
    if convention == "half":
        t = 0.5 * eps
    elif convention == "full":
        t = eps
    else:
        raise ValueError(f"unknown convention {convention!r}")
    value = 0.5 * alpha * t * t
    if refined:
        value += alpha * (1.0 + 5.0 * alpha - 5.0 * alpha * alpha) * t**4 / 9.0
    return value


def g_lower_bound(alpha: float, eps: float) -> float:
    """c1 log(1/(1 - eps/2)) + c2 with c1 = min(1, alpha/(1-alpha)), c2 = -log 2/(1-alpha)."""
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if not (0.0 <= eps < 2.0):
        raise ValueError(f"eps must lie in [0, 2), got {eps}")
    c1 = min(1.0, alpha / (1.0 - alpha))
    c2 = -math.log(2.0) / (1.0 - alpha)
    return -c1 * math.log1p(-0.5 * eps) + c2
