"""
Error-exponent bounds for ML decoding of binary linear block codes.

The main bound compares the normalised distance spectrum P_N(l) = S_l/(M-1)
with the binomial spectrum Q_N(l) = 2^-N C(N, l) of fully random codes:

    P_e < exp(-N sup_{r>=1} max_{0<=rho<=1/r} [E0(rho) - rho (r R + D_s(P_N||Q_N)/N)]),

with s = r/(r-1) (s = inf at r = 1, which gives the Shulman-Feder bound).
Spectra may hold ensemble averages, so counts are real-valued.
"""

import math
import re
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad, quad_vec

from renyitv._numerics import INV_PHI, INV_PHI2, golden_section_max, ksum, logsumexp
from renyitv.divergences import Distribution, renyi_divergence

MAX_GENERATOR_ROWS = 28
R_GRID_POINTS = 256
R_MAX = 1e3
RHO_TOL = 1e-10
RATE_TOL = 1e-9
QUAD_TOL = 1e-13
TAIL_SIGMAS = 12.0

_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)


class RateMismatchWarning(UserWarning):
    """The supplied rate differs from log(M)/N of the spectrum."""


# --------------------------------------------------------------------------- spectra


@dataclass(frozen=True)
class DistanceSpectrum:
    """Block length n and weight counts S_0..S_n (S_0 is not used by the bounds)."""

    n: int
    counts: Tuple[float, ...]

    def __init__(self, n: int, counts: Iterable[float]):
        counts = tuple(float(c) for c in counts)
        if int(n) != n or n < 1:
            raise ValueError(f"block length must be a positive integer, got {n}")
        if len(counts) != n + 1:
            raise ValueError(f"expected {n + 1} counts for n={n}, got {len(counts)}")
        if any(not math.isfinite(c) or c < 0.0 for c in counts):
            raise ValueError("spectrum counts must be finite and nonnegative")
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "counts", counts)

    @property
    def nonzero_codewords(self) -> float:
        return ksum(self.counts[1:])

    @property
    def size(self) -> float:
        """Number of codewords M = 1 + sum_{l>=1} S_l."""
        return 1.0 + self.nonzero_codewords

    @property
    def rate(self) -> float:
        """log(M)/N in nats per channel use."""
        return math.log(self.size) / self.n

    def restricted(self, weights) -> "DistanceSpectrum":
        """Subcode made of the zero word and the codewords whose weight is in ``weights``."""
        keep = set(weights)
        counts = [1.0] + [c if l in keep else 0.0 for l, c in enumerate(self.counts) if l > 0]
        return DistanceSpectrum(self.n, counts)


@dataclass(frozen=True)
class SpectrumPMF:
    n: int
    probs: Tuple[float, ...]

    def __post_init__(self):
        if len(self.probs) != self.n + 1:
            raise ValueError("pmf length must be n + 1")
        self.distribution  # validates nonnegativity and normalisation

    @property
    def distribution(self) -> Distribution:
        return Distribution(self.probs)


def binomial_pmf(n: int) -> SpectrumPMF:
    """Q_N(l) = 2^-N C(N, l), evaluated in the log domain."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    logs = [
        math.lgamma(n + 1) - math.lgamma(l + 1) - math.lgamma(n - l + 1) - n * math.log(2.0)
        for l in range(n + 1)
    ]
    probs = [math.exp(v) for v in logs]
    total = ksum(probs)
    return SpectrumPMF(n, tuple(p / total for p in probs))


def spectrum_pmf(spec: DistanceSpectrum) -> SpectrumPMF:
    """P_N(l) = S_l/(M-1) for l >= 1 and P_N(0) = 0."""
    nonzero = spec.nonzero_codewords
    if spec.size < 2.0 or nonzero <= 0.0:
        raise ValueError("spectrum has no nonzero codewords (M < 2)")
    probs = (0.0,) + tuple(c / nonzero for c in spec.counts[1:])
    return SpectrumPMF(spec.n, probs)


def _parse_rows(rows) -> Tuple[int, list]:
    parsed = []
    for i, row in enumerate(rows):
        if isinstance(row, str):
            row = row.strip()
            if set(row) - {"0", "1"}:
                raise ValueError(f"generator row {i} is not binary: {row!r}")
            bits = [int(ch) for ch in row]
        else:
            bits = [int(b) for b in row]
            if any(b not in (0, 1) for b in bits) or any(float(b) not in (0.0, 1.0) for b in row):
                raise ValueError(f"generator row {i} is not binary: {list(row)!r}")
        parsed.append(bits)
    if not parsed:
        raise ValueError("generator matrix has no rows")
    n = len(parsed[0])
    if n == 0:
        raise ValueError("generator rows are empty")
    for i, bits in enumerate(parsed):
        if len(bits) != n:
            raise ValueError(f"generator row {i} has length {len(bits)}, expected {n}")
    return n, parsed


def _gf2_rank(rows: Sequence[Sequence[int]]) -> int:
    pivots = {}
    for bits in rows:
        v = int("".join(map(str, bits)), 2)
        while v:
            top = v.bit_length() - 1
            if top not in pivots:
                pivots[top] = v
                break
            v ^= pivots[top]
    return len(pivots)


def spectrum_from_generator(rows) -> DistanceSpectrum:
    """Weight distribution of the code spanned by the rows, by enumerating all 2^k codewords.

    Rows are strings of '0'/'1' or sequences of 0/1 integers; they must be
    linearly independent over GF(2) and k may not exceed 28.
    """
    n, parsed = _parse_rows(rows)
    k = len(parsed)
    if k > MAX_GENERATOR_ROWS:
        raise ValueError(f"k={k} rows exceeds the enumeration limit of {MAX_GENERATOR_ROWS}")
    if _gf2_rank(parsed) < k:
        raise ValueError("generator rows are linearly dependent over GF(2)")

    packed = np.packbits(np.array(parsed, dtype=np.uint8), axis=1)
    k_low = min(k, 16)
    table = np.zeros((1, packed.shape[1]), dtype=np.uint8)
    for row in packed[:k_low]:
        table = np.vstack([table, table ^ row])
    high = packed[k_low:]

    counts = np.zeros(n + 1, dtype=np.int64)
    current = np.zeros(packed.shape[1], dtype=np.uint8)
    for j in range(1 << len(high)):
        if j:
            # Gray-code step: flip the row indexed by the lowest set bit of j
            current = current ^ high[(j & -j).bit_length() - 1]
        weights = _POPCOUNT[table ^ current].sum(axis=1, dtype=np.int64)
        counts += np.bincount(weights, minlength=n + 1)
    return DistanceSpectrum(n, counts.astype(float))


# --------------------------------------------------------------------------- channels


@dataclass(frozen=True)
class ChannelModel:
    """Memoryless binary-input output-symmetric channel.

    ``kind`` is ``"bsc"`` (parameter = crossover probability) or ``"biawgn"``
    (parameter = Es/N0 as a linear ratio, unit-energy antipodal inputs).
    """

    kind: str
    parameter: float

    def __post_init__(self):
        if self.kind == "bsc":
            if not (0.0 <= self.parameter <= 0.5):
                raise ValueError(f"BSC crossover must lie in [0, 1/2], got {self.parameter}")
        elif self.kind == "biawgn":
            if not (self.parameter > 0.0) or math.isinf(self.parameter):
                raise ValueError(f"Es/N0 must be positive and finite, got {self.parameter}")
        else:
            raise ValueError(f"unknown channel kind {self.kind!r}")

    @classmethod
    def bsc(cls, delta: float) -> "ChannelModel":
        return cls("bsc", float(delta))

    @classmethod
    def biawgn_db(cls, esn0_db: float) -> "ChannelModel":
        return cls("biawgn", 10.0 ** (float(esn0_db) / 10.0))

    @classmethod
    def parse(cls, text: str) -> "ChannelModel":
        """``bsc:<delta>`` or ``biawgn:<Es/N0 in dB>``."""
        m = re.fullmatch(r"\s*(bsc|biawgn)\s*:\s*([^\s]+)\s*", text)
        if not m:
            raise ValueError(f"malformed channel {text!r}; expected bsc:<delta> or biawgn:<EsN0_dB>")
        try:
            value = float(m.group(2))
        except ValueError:
            raise ValueError(f"malformed channel parameter {m.group(2)!r}") from None
        return cls.bsc(value) if m.group(1) == "bsc" else cls.biawgn_db(value)

    @property
    def sigma(self) -> float:
        """Noise standard deviation for the BIAWGN channel."""
        return math.sqrt(0.5 / self.parameter)

    def label(self) -> str:
        if self.kind == "bsc":
            return f"bsc:{self.parameter:.12g}"
        return f"biawgn:{10.0 * math.log10(self.parameter):.12g}"


def bhattacharyya_parameter(ch: ChannelModel) -> float:
    if ch.kind == "bsc":
        d = ch.parameter
        return 2.0 * math.sqrt(d * (1.0 - d))
    return math.exp(-ch.parameter)


def _e0_bsc(delta: float, rho: np.ndarray) -> np.ndarray:
    a = 1.0 / (1.0 + rho)
    s = np.exp(a * math.log1p(-delta))
    if delta > 0.0:
        s = s + np.exp(a * math.log(delta))
    return rho * math.log(2.0) - (1.0 + rho) * np.log(s)


def _awgn_integrand(sigma: float, rho):
    a = 1.0 / (1.0 + rho)
    scale = 0.5 / (sigma * sigma)
    log_norm = 0.5 * math.log(2.0 * math.pi * sigma * sigma)

    def integrand(y):
        # [1/2 W(y|+)^a + 1/2 W(y|-)^a]^(1+rho), density normalisation pulled out
        t = np.logaddexp(-((y - 1.0) ** 2) * a * scale, -((y + 1.0) ** 2) * a * scale)
        return np.exp((1.0 + rho) * (t - math.log(2.0)) - log_norm)

    return integrand


def _awgn_integrand_scalar(sigma: float, rho: float):
    a = 1.0 / (1.0 + rho)
    scale = 0.5 / (sigma * sigma)
    shift = -math.log(2.0) - 0.5 * math.log(2.0 * math.pi * sigma * sigma) / (1.0 + rho)
    exp, log1p = math.exp, math.log1p

    def integrand(y):
        u = -((y - 1.0) ** 2) * a * scale
        v = -((y + 1.0) ** 2) * a * scale
        hi, lo = (u, v) if u > v else (v, u)
        return exp((1.0 + rho) * (hi + log1p(exp(lo - hi)) + shift))

    return integrand


def _e0_biawgn(sigma: float, rho: np.ndarray) -> np.ndarray:
    upper = 1.0 + TAIL_SIGMAS * sigma
    if rho.size == 1:
        val, _ = quad(
            _awgn_integrand_scalar(sigma, float(rho[0])),
            0.0, upper, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200,
        )
        integral = np.array([val])
    else:
        integral, _ = quad_vec(
            _awgn_integrand(sigma, rho), 0.0, upper, epsabs=QUAD_TOL, epsrel=QUAD_TOL
        )
    # integrand is even in y
    return -np.log(2.0 * integral)


def _e0_many(ch: ChannelModel, rho) -> np.ndarray:
    rho = np.atleast_1d(np.asarray(rho, float))
    if ch.kind == "bsc":
        out = _e0_bsc(ch.parameter, rho)
    else:
        out = _e0_biawgn(ch.sigma, rho)
    return np.where(rho == 0.0, 0.0, np.maximum(out, 0.0))


def gallager_e0(ch: ChannelModel, rho):
    """Gallager's E0(rho) with the uniform input distribution, in nats."""
    rho_a = np.asarray(rho, float)
    if np.any((rho_a < 0.0) | (rho_a > 1.0)):
        raise ValueError("rho must lie in [0, 1]")
    out = _e0_many(ch, rho_a)
    return float(out[0]) if rho_a.ndim == 0 else out.reshape(rho_a.shape)


def _max_over_rho(ch: ChannelModel, c, rho_max):
    """max over rho in [0, rho_max] of E0(rho) - rho c, for arrays of (c, rho_max).

    The objective is concave, so a golden-section search runs on all problems
    in lockstep; both endpoints are evaluated explicitly.
    """
    c = np.atleast_1d(np.asarray(c, float))
    hi = np.broadcast_to(np.asarray(rho_max, float), c.shape).copy()

    def objective(x):
        return _e0_many(ch, x) - x * c

    lo = np.zeros_like(c)
    best_x, best_f = lo.copy(), np.zeros_like(c)
    f_hi = objective(hi)
    take = f_hi > best_f
    best_x, best_f = np.where(take, hi, best_x), np.where(take, f_hi, best_f)

    a, b = lo.copy(), hi.copy()
    x1 = a + INV_PHI2 * (b - a)
    x2 = a + INV_PHI * (b - a)
    f1, f2 = objective(x1), objective(x2)
    while np.max(b - a) > RHO_TOL:
        left = f1 > f2
        b = np.where(left, x2, b)
        a = np.where(left, a, x1)
        new_x1 = a + INV_PHI2 * (b - a)
        new_x2 = a + INV_PHI * (b - a)
        probe = np.where(left, new_x1, new_x2)
        fp = objective(probe)
        x1, x2, f1, f2 = (
            np.where(left, new_x1, x2),
            np.where(left, x1, new_x2),
            np.where(left, fp, f2),
            np.where(left, f1, fp),
        )
    mid_x = np.where(f1 > f2, x1, x2)
    mid_f = np.maximum(f1, f2)
    take = mid_f > best_f
    return np.where(take, mid_f, best_f), np.where(take, mid_x, best_x)


def random_coding_exponent(ch: ChannelModel, rate: float) -> float:
    """E_r(R) = max over rho in [0, 1] of E0(rho) - rho R."""
    if rate < 0.0:
        raise ValueError(f"rate must be nonnegative, got {rate}")
    value, _ = _max_over_rho(ch, rate, 1.0)
    return float(value[0])


# --------------------------------------------------------------------------- bounds


@dataclass(frozen=True)
class BoundReport:
    exponent: float
    prob_bound: float
    method: str  # renyi | shulman_feder | union | partitioned
    n: int
    rate: float
    r_star: Optional[float] = None
    rho_star: Optional[float] = None
    s_star: Optional[float] = None
    divergence: Optional[float] = None  # D_s(P_N||Q_N) at s_star, nats
    partition: Optional[Tuple[int, int]] = None
    flags: Tuple[str, ...] = field(default=())


def _prob_from_exponent(n: int, exponent: float) -> float:
    return min(1.0, math.exp(-n * exponent))


def _check_rate(spec: DistanceSpectrum, rate: Optional[float]) -> float:
    auto = spec.rate
    if rate is None:
        return auto
    if abs(rate - auto) > RATE_TOL:
        warnings.warn(
            f"rate {rate:.12g} differs from log(M)/N = {auto:.12g}", RateMismatchWarning, stacklevel=3
        )
    return float(rate)


def _order_for_r(r: float) -> float:
    return math.inf if r == 1.0 else r / (r - 1.0)


def _renyi_terms(spec: DistanceSpectrum):
    P = spectrum_pmf(spec).distribution
    Q = binomial_pmf(spec.n).distribution
    return P, Q


def renyi_bound(
    spec: DistanceSpectrum,
    rate: Optional[float],
    ch: ChannelModel,
    r: Optional[float] = None,
) -> BoundReport:
    """Rényi-divergence exponent bound on the ML block error probability.

    ``rate=None`` uses log(M)/N. Passing ``r`` fixes the Hölder parameter
    instead of optimising it over [1, 1000].
    """
    rate = _check_rate(spec, rate)
    P, Q = _renyi_terms(spec)
    n = spec.n

    def divergence(r_val: float) -> float:
        return renyi_divergence(P, Q, _order_for_r(r_val))

    def evaluate(rs: np.ndarray):
        ds = np.array([divergence(float(x)) for x in rs])
        vals, rhos = _max_over_rho(ch, rs * rate + ds / n, 1.0 / rs)
        return vals, rhos, ds

    if r is not None:
        if r < 1.0:
            raise ValueError(f"r must be >= 1, got {r}")
        vals, rhos, ds = evaluate(np.array([float(r)]))
        r_star, v_star, rho_star, d_star = float(r), float(vals[0]), float(rhos[0]), float(ds[0])
    else:
        grid = np.logspace(0.0, math.log10(R_MAX), R_GRID_POINTS)
        grid[0] = 1.0
        vals, rhos, ds = evaluate(grid)
        # r = 1 on its own so the optimum never falls below the Shulman-Feder value
        v1, rho1, d1 = evaluate(np.array([1.0]))
        vals[0], rhos[0], ds[0] = v1[0], rho1[0], d1[0]
        k = int(np.argmax(vals))
        r_star, v_star, rho_star, d_star = float(grid[k]), float(vals[k]), float(rhos[k]), float(ds[k])
        lo, hi = math.log(grid[max(k - 1, 0)]), math.log(grid[min(k + 1, len(grid) - 1)])

        def refine(log_r):
            rv = math.exp(log_r)
            return float(evaluate(np.array([rv]))[0][0])

        log_r, v_ref = golden_section_max(refine, lo, hi, tol=1e-8)
        if v_ref > v_star:
            r_ref = math.exp(log_r)
            v, rh, d = evaluate(np.array([r_ref]))
            r_star, v_star, rho_star, d_star = r_ref, float(v[0]), float(rh[0]), float(d[0])

    return BoundReport(
        exponent=v_star,
        prob_bound=_prob_from_exponent(n, v_star),
        method="renyi",
        n=n,
        rate=rate,
        r_star=r_star,
        rho_star=rho_star,
        s_star=_order_for_r(r_star),
        divergence=d_star,
    )


def max_ratio_divergence(spec: DistanceSpectrum) -> float:
    """D_inf(P_N||Q_N) = log max_l P_N(l)/Q_N(l)."""
    P, Q = _renyi_terms(spec)
    return math.log(max(p / q for p, q in zip(P, Q) if p > 0.0))


def shulman_feder_bound(spec: DistanceSpectrum, rate: Optional[float], ch: ChannelModel) -> BoundReport:
    """E_r(R + D_inf(P_N||Q_N)/N), the r = 1 member of the Rényi family."""
    rate = _check_rate(spec, rate)
    d_inf = max_ratio_divergence(spec)
    vals, rhos = _max_over_rho(ch, rate + d_inf / spec.n, 1.0)
    exponent = float(vals[0])
    return BoundReport(
        exponent=exponent,
        prob_bound=_prob_from_exponent(spec.n, exponent),
        method="shulman_feder",
        n=spec.n,
        rate=rate,
        r_star=1.0,
        rho_star=float(rhos[0]),
        s_star=math.inf,
        divergence=d_inf,
    )


def union_bhattacharyya_bound(spec: DistanceSpectrum, ch: ChannelModel) -> BoundReport:
    """min(1, sum_{l>=1} S_l Z^l), with Z the Bhattacharyya parameter."""
    z = bhattacharyya_parameter(ch)
    n = spec.n
    if z == 0.0:
        log_sum = -math.inf
    else:
        log_z = math.log(z)
        log_sum = logsumexp(
            math.log(s) + l * log_z for l, s in enumerate(spec.counts) if l > 0 and s > 0.0
        )
    prob = min(1.0, math.exp(log_sum)) if log_sum != -math.inf else 0.0
    exponent = math.inf if prob == 0.0 else -min(log_sum, 0.0) / n
    rate = spec.rate if spec.size >= 1.0 else 0.0
    return BoundReport(exponent=exponent, prob_bound=prob, method="union", n=n, rate=rate)


def partitioned_bound(spec: DistanceSpectrum, rate: Optional[float], ch: ChannelModel) -> BoundReport:
    """Best split of the code into a Rényi-bounded and a union-bounded subcode.

    The first subcode keeps the weights in a contiguous window [lo, hi]; the
    rest go to the second one. Every window is tried, including the empty
    window (pure union bound) and the full range (pure Rényi bound).
    """
    rate = _check_rate(spec, rate)
    n = spec.n
    full_size = spec.size
    cache = {}

    def sub_rate(sub: DistanceSpectrum) -> float:
        return rate if sub.size == full_size else sub.rate

    def renyi_part(sub: DistanceSpectrum) -> Tuple[float, Optional[BoundReport]]:
        key = sub.counts
        if key not in cache:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RateMismatchWarning)
                cache[key] = renyi_bound(sub, sub_rate(sub), ch)
        rep = cache[key]
        return rep.prob_bound, rep

    windows = [None] + [(lo, hi) for lo in range(1, n + 1) for hi in range(lo, n + 1)]
    best = None
    for window in windows:
        inside = range(window[0], window[1] + 1) if window else ()
        outside = [l for l in range(1, n + 1) if l not in inside]
        sub = spec.restricted(inside)
        if 0.0 < sub.nonzero_codewords and sub.size < 2.0:
            # fractional ensemble counts below one codeword: the Rényi leg is undefined
            continue
        b2 = union_bhattacharyya_bound(spec.restricted(outside), ch).prob_bound
        if sub.nonzero_codewords <= 0.0:
            b1, rep1 = 0.0, None
        else:
            if best is not None and sub.counts not in cache:
                # the Rényi exponent never exceeds E_r(rate), which gives a cheap floor on b1
                floor = (1.0 - 1e-9) * _prob_from_exponent(n, random_coding_exponent(ch, sub_rate(sub)))
                if min(1.0, floor + b2) >= best[0]:
                    continue
            b1, rep1 = renyi_part(sub)
        total = min(1.0, b1 + b2)
        # strict comparison keeps the first window in enumeration order on ties
        if best is None or total < best[0]:
            best = (total, window, rep1)

    total, window, rep1 = best
    flags = []
    if rep1 is not None and spec.restricted(range(window[0], window[1] + 1)).size != full_size:
        flags.append("subcode")
    exponent = math.inf if total == 0.0 else -math.log(total) / n
    return BoundReport(
        exponent=exponent,
        prob_bound=total,
        method="partitioned",
        n=n,
        rate=rate,
        r_star=rep1.r_star if rep1 else None,
        rho_star=rep1.rho_star if rep1 else None,
        s_star=rep1.s_star if rep1 else None,
        divergence=rep1.divergence if rep1 else None,
        partition=window,
        flags=tuple(flags),
    )


def hamming74_generator() -> list:
    return ["1000110", "0100101", "0010011", "0001111"]
