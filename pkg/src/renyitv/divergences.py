"""
Divergence primitives for finite probability vectors.

All quantities are in nats. Sums go through a correctly rounded compensated
sum and Rényi-type sums are evaluated as log-sum-exp, so the results do not
depend on evaluation order.

Conventions: 0 log 0 = 0, 0^0 = 1, and a term whose P-mass is zero contributes
nothing to a Rényi sum of positive order.
"""

import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from renyitv._numerics import golden_section_max, ksum, logsumexp

SUM_TOL = 1e-12
ORDER_ONE_TOL = 1e-9


@dataclass(frozen=True)
class Distribution:
    """A probability vector over an ordered finite alphabet."""

    probs: Tuple[float, ...]

    def __init__(self, probs):
        values = tuple(float(p) for p in np.ravel(np.asarray(probs, dtype=float)))
        if len(values) < 1:
            raise ValueError("distribution needs an alphabet of size >= 1")
        if any(not math.isfinite(p) or p < 0.0 for p in values):
            raise ValueError(f"probabilities must be finite and nonnegative: {values}")
        total = ksum(values)
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "probs", values)

    def __len__(self) -> int:
        return len(self.probs)

    def __getitem__(self, i):
        return self.probs[i]

    def __iter__(self):
        return iter(self.probs)

    @property
    def support(self) -> frozenset:
        return frozenset(i for i, p in enumerate(self.probs) if p > 0.0)

    def as_array(self) -> np.ndarray:
        return np.array(self.probs)

    @classmethod
    def binary(cls, p: float) -> "Distribution":
        return cls((p, 1.0 - p))

    @classmethod
    def normalized(cls, weights) -> "Distribution":
        w = np.asarray(weights, dtype=float)
        return cls(w / ksum(w))


DistLike = Union[Distribution, Sequence[float], np.ndarray]


def as_distribution(d: DistLike) -> Distribution:
    return d if isinstance(d, Distribution) else Distribution(d)


def _pair(P: DistLike, Q: DistLike) -> Tuple[Distribution, Distribution]:
    P, Q = as_distribution(P), as_distribution(Q)
    if len(P) != len(Q):
        raise ValueError(f"alphabet size mismatch: {len(P)} vs {len(Q)}")
    return P, Q


def _require_same_support(P: Distribution, Q: Distribution) -> None:
    if P.support != Q.support:
        raise ValueError("distributions are not mutually absolutely continuous (supports differ)")


def _is_order_one(alpha: float) -> bool:
    return abs(alpha - 1.0) < ORDER_ONE_TOL


def total_variation(P: DistLike, Q: DistLike) -> float:
    """L1 distance sum |P(x) - Q(x)|, in [0, 2]."""
    P, Q = _pair(P, Q)
    return ksum(abs(p - q) for p, q in zip(P, Q))


def relative_entropy(P: DistLike, Q: DistLike) -> float:
    """D(P||Q); +inf when P is not absolutely continuous w.r.t. Q."""
    P, Q = _pair(P, Q)
    terms = []
    for p, q in zip(P, Q):
        if p == 0.0:
            continue
        if q == 0.0:
            return math.inf
        terms.append(p * math.log(p / q))
    return max(ksum(terms), 0.0)


def _log_power_sum(P: Distribution, Q: Distribution, alpha: float) -> float:
    """log sum_x P(x)^alpha Q(x)^(1-alpha) for alpha not in {0, 1, inf}."""
    terms = []
    for p, q in zip(P, Q):
        if p == 0.0:
            continue
        if q == 0.0:
            if alpha > 1.0:
                return math.inf
            continue
        terms.append(alpha * math.log(p) + (1.0 - alpha) * math.log(q))
    return logsumexp(terms)


def _renyi_near_one(P: Distribution, Q: Distribution, alpha: float) -> float:
    """log1p(sum P expm1((alpha-1) log(P/Q))) / (alpha-1), free of cancellation near order 1."""
    beta = alpha - 1.0
    terms = []
    for p, q in zip(P, Q):
        if p == 0.0:
            continue
        if q == 0.0:
            if beta > 0.0:
                return math.inf
            terms.append(-p)
            continue
        terms.append(p * math.expm1(beta * math.log(p / q)))
    s = ksum(terms)
    if s <= -1.0:
        return math.inf
    return max(math.log1p(s) / beta, 0.0)


def _renyi(P: Distribution, Q: Distribution, alpha: float) -> float:
    if alpha < 0.0 or math.isnan(alpha):
        raise ValueError(f"Rényi order must be >= 0, got {alpha}")
    if alpha == 0.0:
        mass = ksum(q for p, q in zip(P, Q) if p > 0.0)
        return math.inf if mass == 0.0 else max(-math.log(mass), 0.0)
    if _is_order_one(alpha):
        return relative_entropy(P, Q)
    if math.isinf(alpha):
        ratios = []
        for p, q in zip(P, Q):
            if p == 0.0:
                continue
            if q == 0.0:
                return math.inf
            ratios.append(p / q)
        return max(math.log(max(ratios)), 0.0)
    if abs(alpha - 1.0) < 0.5:
        return _renyi_near_one(P, Q, alpha)
    lse = _log_power_sum(P, Q, alpha)
    if lse == math.inf:
        return math.inf
    if lse == -math.inf:
        # alpha < 1 with disjoint supports
        return math.inf
    return max(lse / (alpha - 1.0), 0.0)


def renyi_divergence(P: DistLike, Q: DistLike, alpha: float) -> float:
    """Rényi divergence D_alpha(P||Q) of order alpha in [0, inf].

    Order 1 is the relative entropy and order inf is the log of the maximal
    likelihood ratio; both use dedicated code paths. Orders within 1e-9 of 1
    are treated as 1.
    """
    P, Q = _pair(P, Q)
    return _renyi(P, Q, float(alpha))


def hellinger_divergence(P: DistLike, Q: DistLike, alpha: float) -> float:
    """Hellinger divergence H_alpha(P||Q) = (sum P^a Q^(1-a) - 1) / (a - 1)."""
    P, Q = _pair(P, Q)
    alpha = float(alpha)
    if alpha <= 0.0 or _is_order_one(alpha) or math.isinf(alpha):
        raise ValueError(f"Hellinger order must be positive, finite and != 1, got {alpha}")
    lse = _log_power_sum(P, Q, alpha)
    if lse == math.inf:
        return math.inf
    return math.expm1(lse) / (alpha - 1.0)


def binary_renyi(p, q, alpha: float):
    """Binary Rényi divergence d_alpha(p||q) between Bernoulli(p) and Bernoulli(q).

    Scalars are routed through the same code as ``renyi_divergence`` on the
    pair ((p, 1-p), (q, 1-q)). Arrays are broadcast and evaluated with numpy.
    """
    if np.ndim(p) == 0 and np.ndim(q) == 0:
        p, q = min(max(float(p), 0.0), 1.0), min(max(float(q), 0.0), 1.0)
        return _renyi(Distribution((p, 1.0 - p)), Distribution((q, 1.0 - q)), float(alpha))
    p = np.clip(np.asarray(p, float), 0.0, 1.0)
    q = np.clip(np.asarray(q, float), 0.0, 1.0)
    return _binary_renyi_array(p, q, float(alpha))


def _xlogy_ratio(x, y):
    """x log(x/y) with 0 log 0 = 0 and +inf when x > 0 = y."""
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(x > 0, x * (np.log(x) - np.log(y)), 0.0)
    return np.where((x > 0) & (y == 0), np.inf, out)


def _binary_renyi_array(p: np.ndarray, q: np.ndarray, alpha: float) -> np.ndarray:
    p, q = np.broadcast_arrays(p, q)
    if _is_order_one(alpha):
        return _xlogy_ratio(p, q) + _xlogy_ratio(1.0 - p, 1.0 - q)

    def term(a, b):
        with np.errstate(divide="ignore", invalid="ignore"):
            t = alpha * np.log(a) + (1.0 - alpha) * np.log(b)
        t = np.where(a > 0, t, -np.inf)
        if alpha < 1.0:
            t = np.where((a > 0) & (b == 0), -np.inf, t)
        return t

    lse = np.logaddexp(term(p, q), term(1.0 - p, 1.0 - q))
    with np.errstate(invalid="ignore"):
        out = lse / (alpha - 1.0)
    return np.maximum(out, 0.0)


def tilted_measure(P1: DistLike, P2: DistLike, alpha: float) -> Distribution:
    """Normalised geometric mixture Q_alpha(x) proportional to P1(x)^alpha P2(x)^(1-alpha)."""
    P1, P2 = _pair(P1, P2)
    _require_same_support(P1, P2)
    alpha = float(alpha)
    logw = [
        alpha * math.log(a) + (1.0 - alpha) * math.log(b) if a > 0.0 else -math.inf
        for a, b in zip(P1, P2)
    ]
    norm = logsumexp(logw)
    probs = [math.exp(w - norm) if w != -math.inf else 0.0 for w in logw]
    total = ksum(probs)
    return Distribution([x / total for x in probs])


def _chernoff_search(P1: Distribution, P2: Distribution) -> Tuple[float, float]:
    _require_same_support(P1, P2)

    def objective(a: float) -> float:
        if a == 0.0 or a == 1.0:
            return 0.0
        return -_log_power_sum(P1, P2, a)

    alpha, value = golden_section_max(objective, 0.0, 1.0, tol=1e-10)
    return max(value, 0.0), alpha


def chernoff_information(P1: DistLike, P2: DistLike) -> float:
    """C(P1, P2) = max over alpha in [0,1] of (1 - alpha) D_alpha(P1||P2)."""
    P1, P2 = _pair(P1, P2)
    return _chernoff_search(P1, P2)[0]


def chernoff_maximizer(P1: DistLike, P2: DistLike) -> float:
    """The order alpha attaining the Chernoff information."""
    P1, P2 = _pair(P1, P2)
    return _chernoff_search(P1, P2)[1]


def binary_reduction(P1: DistLike, P2: DistLike) -> Tuple[Distribution, Distribution]:
    """Merge letters by the sign of P1(x) - P2(x) into a two-letter alphabet.

    Letter 0 collects {x : P1(x) >= P2(x)}, letter 1 the rest. Total variation
    is preserved exactly and Rényi divergences cannot increase.
    """
    P1, P2 = _pair(P1, P2)
    first = {i for i, (a, b) in enumerate(zip(P1, P2)) if a >= b}
    rest = [i for i in range(len(P1)) if i not in first]
    a0, b0 = ksum(P1[i] for i in first), ksum(P2[i] for i in first)
    a1, b1 = ksum(P1[i] for i in rest), ksum(P2[i] for i in rest)
    return Distribution((a0, a1)), Distribution((b0, b1))
