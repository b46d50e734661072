import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import minimize_scalar
from scipy.stats import norm

from conftest import HAMMING74_ROWS, brute_force_weights, near_binomial_spectrum
from renyitv.coding import (
    ChannelModel,
    DistanceSpectrum,
    RateMismatchWarning,
    bhattacharyya_parameter,
    binomial_pmf,
    gallager_e0,
    max_ratio_divergence,
    partitioned_bound,
    random_coding_exponent,
    renyi_bound,
    shulman_feder_bound,
    spectrum_from_generator,
    spectrum_pmf,
    union_bhattacharyya_bound,
)
from renyitv.divergences import relative_entropy, renyi_divergence


def e0_bsc_by_definition(delta, rho):
    a = 1.0 / (1.0 + rho)
    total = 0.0
    for y in (0, 1):
        w0 = 1 - delta if y == 0 else delta
        w1 = delta if y == 0 else 1 - delta
        total += (0.5 * w0**a + 0.5 * w1**a) ** (1 + rho)
    return -math.log(total)


def e0_awgn_by_definition(esn0, rho):
    sigma = math.sqrt(0.5 / esn0)
    a = 1.0 / (1.0 + rho)

    def f(y):
        return (0.5 * norm.pdf(y, 1, sigma) ** a + 0.5 * norm.pdf(y, -1, sigma) ** a) ** (1 + rho)

    val, _ = quad(f, -np.inf, np.inf, epsabs=1e-14, epsrel=1e-13, limit=500)
    return -math.log(val)


def er_oracle(e0, rate):
    rhos = np.linspace(0, 1, 2001)
    vals = [e0(r) - r * rate for r in rhos]
    k = int(np.argmax(vals))
    lo, hi = rhos[max(k - 1, 0)], rhos[min(k + 1, 2000)]
    res = minimize_scalar(lambda r: -(e0(r) - r * rate), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    return max(vals[k], -res.fun)


# ---------------------------------------------------------------- spectra


def test_binomial_pmf_examples():
    assert binomial_pmf(4).probs[2] == pytest.approx(0.375, abs=1e-15)
    assert binomial_pmf(7).probs[3] == pytest.approx(35 / 128, abs=1e-15)
    for n in (1, 10, 200, 10_000):
        assert math.fsum(binomial_pmf(n).probs) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        binomial_pmf(0)


def test_spectrum_pmf_examples(hamming74):
    p = spectrum_pmf(hamming74).probs
    assert p[3] == pytest.approx(7 / 15) and p[4] == pytest.approx(7 / 15) and p[7] == pytest.approx(1 / 15)
    assert p[0] == 0.0
    assert spectrum_pmf(DistanceSpectrum(3, [1, 0, 3, 0])).probs[2] == 1.0
    with pytest.raises(ValueError):
        spectrum_pmf(DistanceSpectrum(3, [1, 0, 0, 0]))


def test_spectrum_validation():
    with pytest.raises(ValueError):
        DistanceSpectrum(3, [1, 0, 0])
    with pytest.raises(ValueError):
        DistanceSpectrum(2, [1, -1, 0])
    assert DistanceSpectrum(3, [1, 0, 3, 0]).size == 4.0


def test_generator_examples():
    assert spectrum_from_generator(HAMMING74_ROWS).counts == (1, 0, 0, 7, 7, 0, 0, 1)
    assert spectrum_from_generator(["100", "010", "001"]).counts == (1, 3, 3, 1)
    assert spectrum_from_generator([[1] * 9]).counts == (1,) + (0,) * 8 + (1,)


def test_generator_matches_brute_force(rng):
    for _ in range(5):
        k, n = int(rng.integers(2, 9)), int(rng.integers(9, 14))
        while True:
            rows = ["".join(map(str, rng.integers(0, 2, n))) for _ in range(k)]
            try:
                got = spectrum_from_generator(rows)
                break
            except ValueError:
                continue
        assert list(got.counts) == brute_force_weights(rows)


def test_generator_with_gray_code_rows(rng):
    # k > 16 exercises the Gray-code loop; compare against a dense mod-2 product
    k, n = 18, 26
    while True:
        g = rng.integers(0, 2, (k, n))
        try:
            got = spectrum_from_generator(g.tolist())
            break
        except ValueError:
            continue
    msgs = (np.arange(1 << k)[:, None] >> np.arange(k)) & 1
    weights = ((msgs @ g) % 2).sum(axis=1)
    assert list(got.counts) == list(np.bincount(weights, minlength=n + 1))


def test_generator_errors():
    with pytest.raises(ValueError, match="binary"):
        spectrum_from_generator(["102"])
    with pytest.raises(ValueError, match="length"):
        spectrum_from_generator(["101", "01"])
    with pytest.raises(ValueError, match="dependent"):
        spectrum_from_generator(["110", "011", "101"])
    with pytest.raises(ValueError, match="28"):
        spectrum_from_generator([[0] * 29 + [1]] * 29)


# ---------------------------------------------------------------- channels


def test_channel_parsing():
    assert ChannelModel.parse("bsc:0.05") == ChannelModel("bsc", 0.05)
    assert ChannelModel.parse("biawgn:0").parameter == 1.0
    assert ChannelModel.parse("biawgn:10").parameter == pytest.approx(10.0)
    for bad in ("bsc", "bsc:0.6", "awgn:1", "bsc:x", "biawgn:-inf"):
        with pytest.raises(ValueError):
            ChannelModel.parse(bad)


def test_bhattacharyya_examples():
    assert bhattacharyya_parameter(ChannelModel.bsc(0.0)) == 0.0
    assert bhattacharyya_parameter(ChannelModel.bsc(0.5)) == 1.0
    assert bhattacharyya_parameter(ChannelModel.bsc(0.1)) == pytest.approx(0.6, abs=1e-15)
    ch = ChannelModel("biawgn", 1.0)
    sigma = ch.sigma
    integral, _ = quad(lambda y: math.sqrt(norm.pdf(y, 1, sigma) * norm.pdf(y, -1, sigma)),
                       -np.inf, np.inf, epsabs=1e-14)
    assert bhattacharyya_parameter(ch) == pytest.approx(integral, abs=1e-12)
    assert bhattacharyya_parameter(ch) == pytest.approx(0.367879441171, abs=1e-12)


@pytest.mark.parametrize("delta", [0.0, 0.01, 0.11, 0.3, 0.5])
@pytest.mark.parametrize("rho", [0.0, 0.25, 0.7, 1.0])
def test_e0_bsc_matches_definition(delta, rho):
    assert gallager_e0(ChannelModel.bsc(delta), rho) == pytest.approx(e0_bsc_by_definition(delta, rho), abs=1e-14)


@pytest.mark.parametrize("db", [-2.0, 0.0, 2.0, 4.0, 8.0])
def test_e0_awgn_matches_definition(db):
    ch = ChannelModel.biawgn_db(db)
    rhos = np.array([0.1, 0.5, 0.9])
    vec = gallager_e0(ch, rhos)
    for r, v in zip(rhos, vec):
        assert v == pytest.approx(e0_awgn_by_definition(ch.parameter, r), abs=1e-10)
        assert gallager_e0(ch, float(r)) == pytest.approx(v, abs=1e-12)
    # at rho = 1 the integral collapses to (1 + Z)/2
    assert gallager_e0(ch, 1.0) == pytest.approx(math.log(2) - math.log1p(math.exp(-ch.parameter)), abs=1e-12)


@pytest.mark.parametrize("ch", [ChannelModel.bsc(0.0), ChannelModel.bsc(0.2), ChannelModel.biawgn_db(1.0)])
def test_e0_zero_concave_nondecreasing(ch):
    assert gallager_e0(ch, 0.0) == 0.0
    rhos = np.arange(0.0, 1.0 + 1e-12, 1e-4)
    e = gallager_e0(ch, rhos) if ch.kind == "bsc" else gallager_e0(ch, rhos[::50])
    assert np.all(np.diff(e) >= -1e-13)
    assert np.all(np.diff(e, 2) <= 1e-12)


def test_e0_useless_channel():
    assert np.allclose(gallager_e0(ChannelModel.bsc(0.5), np.linspace(0, 1, 11)), 0.0, atol=1e-15)
    with pytest.raises(ValueError):
        gallager_e0(ChannelModel.bsc(0.1), 1.5)


def test_random_coding_exponent_examples():
    assert random_coding_exponent(ChannelModel.bsc(0.11), math.log(2)) == 0.0
    assert random_coding_exponent(ChannelModel.bsc(0.0), 0.3) == pytest.approx(math.log(2) - 0.3, abs=1e-15)


@pytest.mark.parametrize("ch", [ChannelModel.bsc(0.05), ChannelModel.bsc(0.11), ChannelModel.biawgn_db(2.0)])
@pytest.mark.parametrize("rate", [0.0, 0.1, 0.25, 0.4])
def test_random_coding_exponent_matches_oracle(ch, rate):
    if ch.kind == "bsc":
        e0 = lambda r: e0_bsc_by_definition(ch.parameter, r)  # noqa: E731
    else:
        e0 = lambda r: gallager_e0(ch, float(r))  # noqa: E731
    assert random_coding_exponent(ch, rate) == pytest.approx(er_oracle(e0, rate), abs=1e-9)


# ---------------------------------------------------------------- bounds


def test_hamming_max_ratio(hamming74):
    assert max_ratio_divergence(hamming74) == pytest.approx(math.log(128 / 15), abs=1e-12)
    sf = shulman_feder_bound(hamming74, None, ChannelModel.bsc(0.01))
    assert sf.divergence == pytest.approx(math.log(128 / 15), abs=1e-12)
    assert sf.s_star == math.inf and sf.r_star == 1.0


def test_renyi_at_r_one_is_shulman_feder(hamming74):
    ch = ChannelModel.bsc(0.01)
    assert renyi_bound(hamming74, None, ch, r=1.0).exponent == shulman_feder_bound(hamming74, None, ch).exponent
    assert renyi_bound(hamming74, None, ch).exponent >= shulman_feder_bound(hamming74, None, ch).exponent - 1e-12


def test_divergence_monotone_in_r(rng):
    rs = np.logspace(0, 3, 60)
    for _ in range(20):
        spec = near_binomial_spectrum(rng, int(rng.integers(6, 30)), 0.3)
        P, Q = spectrum_pmf(spec).distribution, binomial_pmf(spec.n).distribution
        d = [renyi_divergence(P, Q, math.inf if r == 1 else r / (r - 1)) for r in rs]
        assert np.all(np.diff(d) <= 1e-12)
        assert min(d) >= relative_entropy(P, Q) - 1e-12


def test_renyi_beats_shulman_feder_on_random_spectra(rng):
    for i in range(12):
        spec = near_binomial_spectrum(rng, int(rng.integers(10, 40)), float(rng.uniform(0.05, 0.4)))
        ch = ChannelModel.bsc(float(rng.uniform(0.0, 0.1)))
        full = renyi_bound(spec, None, ch)
        sf = shulman_feder_bound(spec, None, ch)
        assert full.exponent >= sf.exponent
        assert 1.0 <= full.r_star <= 1e3
        assert 0.0 <= full.rho_star <= 1.0 / full.r_star + 1e-15
        assert full.prob_bound == min(1.0, math.exp(-spec.n * full.exponent))


def test_binomial_spectrum_degenerates_to_random_coding():
    n, rate = 40, 0.25
    m = math.exp(n * rate)
    counts = [1.0] + [(m - 1) * math.comb(n, l) / (2**n - 1) for l in range(1, n + 1)]
    spec = DistanceSpectrum(n, counts)
    ch = ChannelModel.bsc(0.03)
    rep = renyi_bound(spec, rate, ch)
    assert rep.exponent == pytest.approx(random_coding_exponent(ch, rate), abs=1e-8)
    assert rep.r_star == 1.0


def test_bound_monotone_in_crossover(rng):
    spec = near_binomial_spectrum(rng, 24, 0.2)
    probs = [renyi_bound(spec, None, ChannelModel.bsc(d)).prob_bound for d in np.linspace(0.0, 0.1, 11)]
    assert np.all(np.diff(probs) >= 0)


def test_reports_are_reproducible(hamming74):
    ch = ChannelModel.biawgn_db(3.0)
    assert renyi_bound(hamming74, None, ch) == renyi_bound(hamming74, None, ch)
    ch = ChannelModel.bsc(0.03)
    assert partitioned_bound(hamming74, None, ch) == partitioned_bound(hamming74, None, ch)


def test_rate_mismatch_warns(hamming74):
    with pytest.warns(RateMismatchWarning):
        renyi_bound(hamming74, 0.3, ChannelModel.bsc(0.01))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        renyi_bound(hamming74, math.log(16) / 7, ChannelModel.bsc(0.01))


def test_empty_spectrum_raises():
    empty = DistanceSpectrum(4, [1, 0, 0, 0, 0])
    with pytest.raises(ValueError):
        renyi_bound(empty, None, ChannelModel.bsc(0.1))
    with pytest.raises(ValueError):
        shulman_feder_bound(empty, None, ChannelModel.bsc(0.1))


def test_union_bound_examples():
    rep = DistanceSpectrum(5, [1, 0, 0, 0, 0, 1])
    assert union_bhattacharyya_bound(rep, ChannelModel.bsc(0.1)).prob_bound == pytest.approx(0.6**5, rel=1e-14)
    assert union_bhattacharyya_bound(rep, ChannelModel.bsc(0.0)).prob_bound == 0.0


def test_union_bound_dominates_subspectra(hamming74):
    ch = ChannelModel.bsc(0.05)
    full = union_bhattacharyya_bound(hamming74, ch).prob_bound
    for keep in ([3], [4, 7], [3, 4]):
        assert union_bhattacharyya_bound(hamming74.restricted(keep), ch).prob_bound <= full


@pytest.mark.parametrize("ch", [ChannelModel.bsc(0.01), ChannelModel.bsc(0.08), ChannelModel.biawgn_db(4.0)])
def test_partitioned_degenerate_windows(hamming74, ch):
    part = partitioned_bound(hamming74, None, ch)
    renyi = renyi_bound(hamming74, None, ch)
    union = union_bhattacharyya_bound(hamming74, ch)
    assert part.prob_bound <= min(renyi.prob_bound, union.prob_bound) + 1e-15


def test_partitioned_can_select_a_subcode(rng):
    # high-rate binomial-like bulk plus excess weight-1 mass: neither pure bound wins
    n = 24
    spec = near_binomial_spectrum(rng, n, 0.4)
    counts = list(spec.counts)
    counts[1] += 0.05
    spec = DistanceSpectrum(n, counts)
    ch = ChannelModel.bsc(0.02)
    part = partitioned_bound(spec, None, ch)
    best_pure = min(renyi_bound(spec, None, ch).prob_bound, union_bhattacharyya_bound(spec, ch).prob_bound)
    assert part.prob_bound < best_pure
    lo, hi = part.partition
    assert lo > 1 and "subcode" in part.flags
