"""Scalar search and summation helpers shared by the divergence and bound code."""

import math
from typing import Callable, Iterable, Tuple

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def ksum(values: Iterable[float]) -> float:
    """Compensated sum. Correctly rounded, hence independent of evaluation order."""
    return math.fsum(values)


def logsumexp(log_terms: Iterable[float]) -> float:
    """log(sum(exp(t))) with max-shift; -inf terms are skipped, +inf propagates."""
    terms = [t for t in log_terms if t != -math.inf]
    if not terms:
        return -math.inf
    m = max(terms)
    if m == math.inf:
        return math.inf
    return m + math.log(ksum(math.exp(t - m) for t in terms))


def golden_section_max(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-10,
    max_iter: int = 200,
) -> Tuple[float, float]:
    """Maximise a unimodal function on [lo, hi].

    Both endpoints are evaluated as well, so optima sitting on the boundary
    of the interval are returned exactly rather than to within ``tol``.

    Returns
    -------
    (x, f(x)) for the best point found.
    """
    if hi < lo:
        lo, hi = hi, lo
    best_x, best_f = lo, func(lo)
    f_hi = func(hi)
    if f_hi > best_f:
        best_x, best_f = hi, f_hi
    a, b = lo, hi
    h = b - a
    if h <= tol:
        return best_x, best_f
    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    fc, fd = func(c), func(d)
    for _ in range(max_iter):
        if h <= tol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            h = b - a
            c = a + INV_PHI2 * h
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + INV_PHI * h
            fd = func(d)
    x, fx = (c, fc) if fc > fd else (d, fd)
    if fx > best_f:
        best_x, best_f = x, fx
    return best_x, best_f


def golden_section_min(func, lo, hi, tol=1e-10, max_iter=200):
    x, fx = golden_section_max(lambda t: -func(t), lo, hi, tol, max_iter)
    return x, -fx


def bisect_increasing(
    func: Callable[[float], float],
    target: float,
    lo: float,
    hi: float,
    xtol: float = 1e-13,
    max_iter: int = 400,
) -> Tuple[float, float]:
    """Bracket the point where a nondecreasing ``func`` first exceeds ``target``.

    ``func(lo) <= target < func(hi)`` is assumed, not checked. Returns the
    final bracket ``(lo, hi)`` with ``hi - lo <= xtol`` (or the floating point
    limit of the bracket if that is reached first).
    """
    for _ in range(max_iter):
        if hi - lo <= xtol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if func(mid) <= target:
            lo = mid
        else:
            hi = mid
    return lo, hi
