"""Legitimate decoders: exact ML over bin-sets and Definite-Non-Defective (COMP)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import EveView, OutcomeVector
from .design import Codebook, DefectiveSet, InstanceTooLarge, pack_bits, rank_subset

DEFAULT_ML_CAP = 10**7


@dataclass(frozen=True)
class MlResult:
    decoded: DefectiveSet | None
    consistent_count: int
    unique: bool
    counts: dict  # bin-set rank -> number of consistent row combinations

    @property
    def n_bin_sets(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class DndResult:
    possibly_defective: frozenset
    definitely_non_defective: frozenset

    @property
    def n_survivors(self) -> int:
        return len(self.possibly_defective)


def row_consistent(row, y: OutcomeVector) -> bool:
    """True iff ``row`` has no 1 where ``y`` has a 0."""
    row = np.asarray(row, dtype=bool)
    if row.shape != y.bits.shape:
        raise ValueError(f"row length {row.shape} != outcome length {y.bits.shape}")
    return not np.any(row & ~y.bits)


def check_enumeration_cap(codebook: Codebook, cap: int) -> int:
    k = codebook.params.n_defective
    n_candidates = math.comb(codebook.n_items, k) * codebook.bin_size**k
    if n_candidates > cap:
        raise InstanceTooLarge(f"{n_candidates} candidates exceed the enumeration cap {cap}")
    return n_candidates


def count_matching_combinations(codebook: Codebook, view: EveView) -> dict[int, int]:
    """For every K-subset of bins, count row combinations (one row per bin)
    whose OR agrees with ``view`` at every non-erased position.

    Returns only the non-zero entries, keyed by colexicographic rank.

    Rows with a 1 at an observed 0 can never take part, so they are dropped
    first.  The remaining rows are reduced to their bits on observed 1s, and
    the partial ORs of a growing prefix of items are deduplicated with
    multiplicities, which keeps the search small in both the nearly-erased and
    the nearly-observed regime.
    """
    k = codebook.params.n_defective
    packed = codebook.packed
    kept = pack_bits(view.kept)
    target = pack_bits(view.kept & view.values)
    forbidden = kept & ~target

    eligible = ~np.any(packed & forbidden, axis=-1)  # (N, M)
    items = [j for j in range(codebook.n_items) if eligible[j].any()]
    reduced = {}
    for j in items:
        rows = packed[j][eligible[j]] & target
        uniq, cnt = np.unique(rows, axis=0, return_counts=True)
        reduced[j] = (uniq, cnt.astype(np.int64))

    counts: dict[int, int] = {}
    if len(items) < k:
        return counts

    def extend(start, depth, prefix, partials, mult):
        last = depth == k - 1
        for idx in range(start, len(items) - (k - depth) + 1):
            j = items[idx]
            rows, rmult = reduced[j]
            ors = partials[:, None, :] | rows[None, :, :]
            weights = mult[:, None] * rmult[None, :]
            if last:
                hit = np.all(ors == target, axis=-1)
                c = int(weights[hit].sum())
                if c:
                    counts[rank_subset(prefix + (j,))] = c
            else:
                flat = ors.reshape(-1, ors.shape[-1])
                uniq, inv = np.unique(flat, axis=0, return_inverse=True)
                agg = np.zeros(uniq.shape[0], dtype=np.int64)
                np.add.at(agg, inv.reshape(-1), weights.reshape(-1))
                extend(idx + 1, depth + 1, prefix + (j,), uniq, agg)

    start = np.zeros((1, packed.shape[-1]), dtype=packed.dtype)
    extend(0, 0, (), start, np.ones(1, dtype=np.int64))
    return counts


def ml_decode(codebook: Codebook, y: OutcomeVector, cap: int = DEFAULT_ML_CAP) -> MlResult:
    """Exact ML in the noiseless OR channel.

    A candidate (bin-set, one row per bin) has likelihood 1 iff the OR of its
    rows equals ``y``, else 0.  Among consistent bin-sets the lowest rank is
    reported; ``unique`` says whether it was the only one.
    """
    if len(y) != codebook.n_tests:
        raise ValueError("outcome length does not match the codebook")
    check_enumeration_cap(codebook, cap)
    counts = count_matching_combinations(codebook, EveView.full(y))
    if not counts:
        return MlResult(None, 0, False, counts)
    best = min(counts)
    decoded = DefectiveSet.from_rank(best, codebook.params.n_defective)
    return MlResult(decoded, sum(counts.values()), len(counts) == 1, counts)


def dnd_decode(codebook: Codebook, y: OutcomeVector) -> DndResult:
    """Rule out an item only when every row of its bin hits a negative test."""
    if len(y) != codebook.n_tests:
        raise ValueError("outcome length does not match the codebook")
    negative = ~y.bits
    blocked = codebook.bins[:, :, negative].any(axis=2)  # (N, M)
    alive = ~blocked.all(axis=1)
    possible = frozenset(np.flatnonzero(alive).tolist())
    ruled_out = frozenset(np.flatnonzero(~alive).tolist())
    return DndResult(possible, ruled_out)


def dnd_success(result: DndResult, truth: DefectiveSet) -> bool:
    return result.possibly_defective == frozenset(truth.members)


def ml_success(result: MlResult, truth: DefectiveSet) -> bool:
    """Ties across bin-sets count as errors."""
    return result.unique and result.decoded is not None and result.decoded.index_w == truth.index_w
