"""What the eavesdropper learns: exact posteriors over the defective set and
Monte-Carlo estimates of I(W; Z^T)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import EveView, eavesdrop, run_tests
from .decode import DEFAULT_ML_CAP, check_enumeration_cap, count_matching_combinations
from .design import Codebook, DefectiveSet, assign_rows, realize_design

NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class PosteriorOverW:
    weights: np.ndarray
    entropy_bits: float
    # posterior divergence from the uniform prior, log2 C(N,K) - entropy
    info_gain_bits: float


@dataclass(frozen=True)
class LeakageEstimate:
    mi_bits: float
    std_err: float
    trials: int
    normalized: float


def _posterior_from_counts(counts: dict[int, int], n_sets: int) -> PosteriorOverW:
    if not counts:
        raise ValueError("observation is inconsistent with every defective set")
    ranks = np.fromiter(counts.keys(), dtype=np.int64, count=len(counts))
    c = np.fromiter(counts.values(), dtype=np.float64, count=len(counts))
    total = c.sum()
    weights = np.zeros(n_sets)
    weights[ranks] = c / total
    # c * C(N,K) and total are exact integers, so a flat posterior gives log2(1) == 0
    gain = float(np.sum(c / total * np.log2(c * n_sets / total)))
    gain = max(gain, 0.0)
    entropy = math.log2(n_sets) - gain
    if abs(weights.sum() - 1.0) > NORMALIZATION_TOL:
        raise AssertionError("posterior does not normalize")
    if entropy > math.log2(n_sets) + NORMALIZATION_TOL:
        raise AssertionError("posterior entropy above its ceiling")
    return PosteriorOverW(weights, entropy, gain)


def posterior_over_w(codebook: Codebook, z: EveView, cap: int = DEFAULT_ML_CAP) -> PosteriorOverW:
    """Exact Bayes posterior of the defective-set index given ``z``.

    W and the mixer's row choices are uniform, so the posterior weight of a set
    is proportional to the number of row combinations consistent with ``z``.
    """
    if len(z) != codebook.n_tests:
        raise ValueError("view length does not match the codebook")
    check_enumeration_cap(codebook, cap)
    n_sets = math.comb(codebook.n_items, codebook.params.n_defective)
    return _posterior_from_counts(count_matching_combinations(codebook, z), n_sets)


def leakage_trial(codebook: Codebook, delta: float, rng: np.random.Generator, cap: int = DEFAULT_ML_CAP) -> float:
    """One draw of (W, row choices, erasures); returns the posterior info gain in bits."""
    p = codebook.params
    truth = DefectiveSet.random(p.n_items, p.n_defective, rng)
    design = realize_design(codebook, assign_rows(codebook, rng))
    z = eavesdrop(run_tests(design, truth), delta, rng)
    return posterior_over_w(codebook, z, cap).info_gain_bits


def summarize_gains(gains, n_sets: int) -> LeakageEstimate:
    gains = np.asarray(gains, dtype=np.float64)
    n = gains.size
    if n < 2:
        raise ValueError("need at least two trials")
    mi = float(gains.mean())
    se = float(gains.std(ddof=1) / math.sqrt(n))
    h_prior = math.log2(n_sets)
    return LeakageEstimate(mi, se, n, mi / h_prior if h_prior > 0 else 0.0)


def empirical_leakage(
    codebook: Codebook,
    delta: float,
    trials: int,
    seed: int,
    cap: int = DEFAULT_ML_CAP,
) -> LeakageEstimate:
    """Plug-in estimate of I(W; Z^T) for a fixed codebook.

    ``log2 C(N,K)`` is exact; the conditional entropy H(W | Z^T) is the average
    of exact per-draw posterior entropies.  Trial ``i`` uses the generator
    seeded by ``(seed, i)``, so runs with equal seeds are paired draw by draw.
    """
    if trials < 2:
        raise ValueError("need at least two trials")
    check_enumeration_cap(codebook, cap)
    gains = [
        leakage_trial(codebook, delta, np.random.default_rng([seed, i]), cap)
        for i in range(trials)
    ]
    n_sets = math.comb(codebook.n_items, codebook.params.n_defective)
    return summarize_gains(gains, n_sets)


def consistent_rows_per_bin(codebook: Codebook, z: EveView) -> np.ndarray:
    """Per bin, the number of rows agreeing with ``z`` at every kept position."""
    if len(z) != codebook.n_tests:
        raise ValueError("view length does not match the codebook")
    kept = z.kept
    agree = codebook.bins[:, :, kept] == z.values[kept]
    return agree.all(axis=2).sum(axis=1)
