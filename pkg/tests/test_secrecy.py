import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sgt.channel import EveView
from sgt.decode import rank_subset
from sgt.design import Codebook, DesignParams, generate_codebook
from sgt.secrecy import (
    consistent_rows_per_bin,
    empirical_leakage,
    posterior_over_w,
    summarize_gains,
)


def bayes_posterior(bins, symbols, k):
    """Direct Bayes: P(w | z) ∝ sum over rows and erasure-compatible outcomes."""
    n, m, t = bins.shape
    weights = np.zeros(math.comb(n, k))
    for subset in itertools.combinations(range(n), k):
        total = 0.0
        for rows in itertools.product(range(m), repeat=k):
            y = np.zeros(t, dtype=bool)
            for j, r in zip(subset, rows):
                y |= bins[j, r]
            ok = all(s == 2 or s == int(b) for s, b in zip(symbols, y))
            total += ok / m**k
        weights[rank_subset(subset)] = total
    return weights / weights.sum()


def test_all_erased_is_uniform():
    cb = generate_codebook(DesignParams(7, 2, 9, 0.5), 0)
    post = posterior_over_w(cb, EveView.from_string("?" * 9))
    assert np.allclose(post.weights, 1 / 21)
    assert post.entropy_bits == pytest.approx(math.log2(21), abs=1e-12)
    assert post.info_gain_bits == 0.0


def test_point_mass():
    bins = np.array([[[1, 0, 0]], [[0, 1, 0]], [[0, 0, 1]]], dtype=bool)
    cb = Codebook(DesignParams(3, 1, 3), 1, bins)
    post = posterior_over_w(cb, EveView.from_string("010"))
    assert post.weights.tolist() == [0.0, 1.0, 0.0]
    assert post.entropy_bits == pytest.approx(0.0, abs=1e-12)
    assert post.info_gain_bits == pytest.approx(math.log2(3))


def test_inconsistent_view_rejected():
    cb = Codebook(DesignParams(2, 1, 2), 1, np.zeros((2, 1, 2), dtype=bool))
    with pytest.raises(ValueError):
        posterior_over_w(cb, EveView.from_string("1?"))


def test_matches_direct_bayes():
    rng = np.random.default_rng(8)
    for trial in range(20):
        cb = generate_codebook(DesignParams(6, 2, 10, 0.5), int(rng.integers(2**32)), m=2)
        # draw a consistent view from the codebook itself
        j = rng.choice(6, 2, replace=False)
        y = cb.bins[j[0], rng.integers(2)] | cb.bins[j[1], rng.integers(2)]
        symbols = np.where(rng.random(10) < 0.5, y.astype(np.int8), 2).astype(np.int8)
        post = posterior_over_w(cb, EveView(symbols))
        expected = bayes_posterior(cb.bins, symbols.tolist(), 2)
        assert np.allclose(post.weights, expected, atol=1e-12)
        h = -sum(w * math.log2(w) for w in expected if w > 0)
        assert post.entropy_bits == pytest.approx(h, abs=1e-9)


def test_no_leakage_when_everything_erased():
    cb = generate_codebook(DesignParams(8, 1, 12, 0.0), 1)
    est = empirical_leakage(cb, 0.0, 200, 3)
    assert est.mi_bits == 0.0
    assert est.normalized == 0.0


def test_full_leakage_without_binning():
    """Single-row bins and an almost perfect tap reveal nearly everything."""
    params = DesignParams(8, 1, 40, 0.999, row_density=0.5)
    cb = generate_codebook(params, 2, m=1)
    est = empirical_leakage(cb, 0.999, 300, 5)
    assert est.mi_bits == pytest.approx(3.0, abs=0.05)


def test_binning_suppresses_leakage():
    params = DesignParams(8, 1, 12, 0.5, secrecy_mode="strong")
    plain = empirical_leakage(generate_codebook(params, 1, m=1), 0.5, 600, 11)
    binned = empirical_leakage(generate_codebook(params, 1, m=512), 0.5, 600, 11)
    assert binned.mi_bits * 5 <= plain.mi_bits


def test_leakage_grows_with_delta():
    params = DesignParams(8, 1, 12, 0.6, secrecy_mode="strong")
    cb = generate_codebook(params, 4, m=16)
    values = [empirical_leakage(cb, d, 600, 1).mi_bits for d in (0.2, 0.4, 0.6)]
    # same seed, so the erasure masks are nested draw by draw
    assert values[0] <= values[1] + 0.02 and values[1] <= values[2] + 0.02


def test_leakage_falls_with_bin_size():
    params = DesignParams(8, 1, 12, 0.5, secrecy_mode="strong")
    values = [empirical_leakage(generate_codebook(params, 9, m=m), 0.5, 600, 2).mi_bits for m in (1, 8, 64)]
    assert values[0] > values[1] > values[2]


def test_summarize_gains():
    est = summarize_gains([0.0, 1.0, 2.0, 3.0], 16)
    assert est.mi_bits == 1.5
    assert est.std_err == pytest.approx(np.std([0, 1, 2, 3], ddof=1) / 2)
    assert est.normalized == pytest.approx(1.5 / 4)
    with pytest.raises(ValueError):
        summarize_gains([1.0], 4)


def test_rows_per_bin_all_erased():
    cb = generate_codebook(DesignParams(5, 1, 8, 0.5), 0, m=7)
    assert consistent_rows_per_bin(cb, EveView.from_string("?" * 8)).tolist() == [7] * 5


def test_rows_per_bin_small_case():
    bins = np.array(
        [
            [[1, 0, 1], [0, 0, 1], [1, 1, 0]],
            [[0, 0, 0], [0, 1, 1], [1, 0, 1]],
        ],
        dtype=bool,
    )
    cb = Codebook(DesignParams(2, 1, 3), 3, bins)
    assert consistent_rows_per_bin(cb, EveView.from_string("1??")).tolist() == [2, 1]
    assert consistent_rows_per_bin(cb, EveView.from_string("?01")).tolist() == [2, 1]


def test_rows_per_bin_single_kept_symbol():
    p = 0.3
    params = DesignParams(400, 2, 5, 0.5, row_density=p)
    cb = generate_codebook(params, 6, m=50)
    counts = consistent_rows_per_bin(cb, EveView.from_string("0????"))
    n = counts.size * 50
    assert abs(counts.sum() - n * (1 - p)) <= 3 * math.sqrt(n * p * (1 - p))


def test_rows_per_bin_concentrates():
    params = DesignParams(200, 2, 12, 0.5)
    view = EveView.from_string("0?1?0?1?????")
    cvs = []
    for m in (4, 64, 1024):
        counts = consistent_rows_per_bin(generate_codebook(params, 3, m=m), view)
        cvs.append(counts.std() / counts.mean())
    assert cvs[0] > cvs[1] > cvs[2]


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32))
def test_posterior_normalized(seed):
    rng = np.random.default_rng(seed)
    cb = generate_codebook(DesignParams(7, 2, 10, 0.5), seed, m=3)
    j = rng.choice(7, 2, replace=False)
    y = cb.bins[j[0], 0] | cb.bins[j[1], 2]
    symbols = np.where(rng.random(10) < 0.6, y.astype(np.int8), 2).astype(np.int8)
    post = posterior_over_w(cb, EveView(symbols))
    assert post.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert 0 <= post.entropy_bits <= math.log2(21) + 1e-9
