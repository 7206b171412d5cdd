"""Closed-form thresholds and error bounds.  All logarithms are base 2."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln

LN2 = math.log(2.0)
RHO_GRID = np.linspace(0.0, 1.0, 101)


class DomainError(ValueError):
    """Arguments outside the range where a formula is defined."""


def log2_binom(n, k):
    """log2 C(n, k) via log-gamma; accepts scalars or arrays."""
    n = np.asarray(n, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    out = (gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)) / LN2
    return float(out) if out.ndim == 0 else out


def binary_entropy(x):
    x = np.asarray(x, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -x * np.log2(x) - (1 - x) * np.log2(1 - x)
    h = np.where((x <= 0) | (x >= 1), 0.0, h)
    return float(h) if h.ndim == 0 else h


def _check_nk(n, k):
    if not (1 <= k < n):
        raise DomainError(f"need 1 <= K < N, got N={n}, K={k}")


def _check_delta(delta):
    if not 0.0 <= delta < 1.0:
        raise DomainError(f"delta must lie in [0, 1), got {delta}")


class Threshold(NamedTuple):
    value: float
    argmax: int


def t_threshold_ml(n: int, k: int, delta: float, eps: float) -> Threshold:
    """max over i of (1+eps)/(1-delta) * (K/i) * log2 C(N-K, i)."""
    _check_nk(n, k)
    _check_delta(delta)
    if eps < 0:
        raise DomainError("eps must be >= 0")
    i = np.arange(1, k + 1)
    terms = (1 + eps) / (1 - delta) * (k / i) * log2_binom(n - k, np.minimum(i, n - k))
    terms = np.where(i <= n - k, terms, -np.inf)
    best = int(np.argmax(terms))
    return Threshold(float(terms[best]), best + 1)


def t_threshold_corollary(n: int, k: int, delta: float, eps: float) -> float:
    _check_nk(n, k)
    _check_delta(delta)
    return (1 + eps) / (1 - delta) * k * math.log2((n - k) * math.e)


def t_converse(n: int, k: int, delta: float, eps_t: float) -> float:
    _check_nk(n, k)
    _check_delta(delta)
    return (1 - eps_t) / (1 - delta) * log2_binom(n, k)


def dnd_margin(k: int, delta: float) -> float:
    """1/2 (1 - ln2/K) - delta; the DND guarantee needs this to be positive."""
    return 0.5 * (1 - LN2 / k) - delta


def t_threshold_dnd(n: int, k: int, delta: float, eps: float) -> float:
    _check_nk(n, k)
    margin = dnd_margin(k, delta)
    if delta < 0 or margin <= 0:
        raise DomainError(f"DND guarantee needs delta < {0.5 * (1 - LN2 / k):.6f}, got {delta}")
    return (1 + eps) / margin * k * math.log2(n)


class DndBound(NamedTuple):
    bound: float  # N ** (1 - beta * margin)
    eps: float  # beta * margin - 1, so that bound == N ** -eps


def dnd_error_bound(n: int, k: int, delta: float, beta: float) -> DndBound:
    _check_nk(n, k)
    margin = dnd_margin(k, delta)
    if delta < 0 or margin <= 0 or beta <= 0:
        raise DomainError("DND bound needs beta > 0 and delta < 1/2 (1 - ln2/K)")
    eps = beta * margin - 1
    return DndBound(float(n) ** (-eps), eps)


def dnd_union_bound(n: int, k: int, t: int, m: int, p: float) -> float:
    """M (N-K) (1 - p (1-p)^K)^T: union over every non-defective row."""
    return m * (n - k) * (1 - p * (1 - p) ** k) ** t


def mutual_info_closed_form(i: int, k: int, q: float) -> float:
    """I(X_S1; X_S2, Y) = q^(K-i) h_b(q^i) for i.i.d. Bernoulli(1-q) entries."""
    if not (1 <= i <= k) or not 0 < q < 1:
        raise DomainError(f"need 1 <= i <= K and 0 < q < 1, got i={i}, K={k}, q={q}")
    return q ** (k - i) * binary_entropy(q**i)


@dataclass(frozen=True)
class Claim1Report:
    k: int
    gaps: dict  # i -> closed form minus i/K
    min_gap: float
    asserted: bool  # True when K is large enough for the bound to be checked
    holds: bool  # every gap >= -1% of i/K (only meaningful when asserted)


def claim1_bound_check(k: int, sample_is) -> Claim1Report:
    """Compare the closed-form MI at p = ln2/K against the i/K lower bound."""
    if k < 2:
        raise DomainError("K must be >= 2")
    q = 1 - LN2 / k
    gaps = {int(i): mutual_info_closed_form(int(i), k, q) - i / k for i in sample_is}
    holds = all(g >= -0.01 * (i / k) for i, g in gaps.items())
    return Claim1Report(k, gaps, min(gaps.values()), k >= 100, holds)


def or_channel_joint(i: int, k: int, p: float) -> np.ndarray:
    """P(x1, x2, y) for x1 = OR of i Bernoulli(p) bits, x2 = OR of K-i, y = x1 | x2.

    Indexed ``[x1, x2, y]``.
    """
    q = 1 - p
    px1 = np.array([q**i, 1 - q**i])
    px2 = np.array([q ** (k - i), 1 - q ** (k - i)])
    joint = np.zeros((2, 2, 2))
    for a in (0, 1):
        for b in (0, 1):
            joint[a, b, a | b] = px1[a] * px2[b]
    return joint


def gallager_exponent(rho: float, i: int, k: int, p: float) -> float:
    """E_o(rho) = -log2 sum_{y,x2} [sum_{x1} P(x1) p(y,x2|x1)^(1/(1+rho))]^(1+rho)."""
    if not 0.0 <= rho <= 1.0:
        raise DomainError(f"rho must lie in [0, 1], got {rho}")
    if not (1 <= i <= k) or not 0 < p < 1:
        raise DomainError(f"need 1 <= i <= K and 0 < p < 1, got i={i}, K={k}, p={p}")
    joint = or_channel_joint(i, k, p)
    px1 = joint.sum(axis=(1, 2))
    cond = joint / px1[:, None, None]  # p(x2, y | x1)
    s = 1.0 / (1.0 + rho)
    with np.errstate(divide="ignore"):
        powered = np.where(cond > 0, cond**s, 0.0)
    inner = np.einsum("a,aby->by", px1, powered)
    total = np.sum(inner ** (1.0 + rho))
    # total == 1 at rho == 0; guard against -0.0 and rounding just above 1
    return max(0.0, -math.log2(total)) if rho == 0 else -math.log2(total)


class MlErrorBound(NamedTuple):
    event_bound: float  # P(E'_i) at the given rho
    scaled_event_bound: float  # 2^K * P(E'_i)
    total: float  # 2^K * sum_i min over the rho grid of P(E'_i)
    best_rho: tuple  # optimizing grid rho per i = 1..K


def _event_log2_bound(n, k, t, m, i, rho, p):
    rate = log2_binom(n - k, i) + i * math.log2(m)
    return -t * gallager_exponent(rho, i, k, p) + rho * rate + log2_binom(k, i)


def ml_error_bound(n: int, k: int, t: int, m: int, i: int, rho: float, p: float | None = None) -> MlErrorBound:
    """Gallager-type bound on ML error for the binned codebook.

    ``P(E'_i) <= 2^-(T E_o(rho) - rho log2(C(N-K,i) M^i) - log2 C(K,i))`` and
    ``P_e <= 2^K sum_i P(E'_i)``, with rho optimized per i over a 101-point grid.
    """
    _check_nk(n, k)
    if not (1 <= i <= k) or m < 1 or t < 1:
        raise DomainError("need 1 <= i <= K, M >= 1, T >= 1")
    if i > n - k:
        raise DomainError("i cannot exceed N - K")
    p = LN2 / k if p is None else p
    event = 2.0 ** _event_log2_bound(n, k, t, m, i, rho, p)
    per_i = []
    best = []
    for ii in range(1, min(k, n - k) + 1):
        logs = np.array([_event_log2_bound(n, k, t, m, ii, r, p) for r in RHO_GRID])
        j = int(np.argmin(logs))
        best.append(float(RHO_GRID[j]))
        per_i.append(2.0 ** logs[j])
    total = 2.0**k * float(np.sum(per_i))
    return MlErrorBound(event, 2.0**k * event, total, tuple(best))


def secrecy_capacity(delta: float, capacity_nosec: float) -> float:
    _check_delta(delta)
    return (1 - delta) * capacity_nosec
