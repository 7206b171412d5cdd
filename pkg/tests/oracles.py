"""Independent brute-force references used by the test-suite.

Nothing here touches the packed-word code paths in ``sgt``.
"""
import itertools
import math


def colex_rank(members):
    # count K-subsets that precede ``members`` in colex order, by enumeration
    members = tuple(sorted(members))
    k = len(members)
    top = members[-1] + 1
    return sum(
        1 for s in itertools.combinations(range(top), k) if tuple(reversed(s)) < tuple(reversed(members))
    )


def or_columns(design, members):
    t_len = len(design[0])
    return tuple(int(any(design[j][t] for j in members)) for t in range(t_len))


def matching_counts(bins, symbols, k):
    """Count (bin-set, row-combination) candidates whose OR agrees with
    ``symbols`` (0, 1 or 2 = erased) at every non-erased position."""
    n = len(bins)
    counts = {}
    for subset in itertools.combinations(range(n), k):
        c = 0
        for rows in itertools.product(*(range(len(bins[j])) for j in subset)):
            ok = True
            for t, s in enumerate(symbols):
                if s == 2:
                    continue
                bit = int(any(bins[j][r][t] for j, r in zip(subset, rows)))
                if bit != s:
                    ok = False
                    break
            c += ok
        if c:
            counts[colex_rank(subset)] = c
    return counts


def three_sigma(n, p):
    return 3 * math.sqrt(n * p * (1 - p))
