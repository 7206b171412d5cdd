"""Binned random codebooks and the mixer's stochastic row selection.

Every item owns a bin of ``M`` i.i.d. Bernoulli(p) rows of length ``T``.  The
mixer privately picks one row per bin; the picked rows, stacked, form the
``N x T`` testing matrix.
"""
from __future__ import annotations

import enum
import math
import struct
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

LN2 = math.log(2.0)

# default ceiling on N*M*T bits held in memory for one codebook
DEFAULT_MAX_BITS = 1 << 31


class InstanceTooLarge(Exception):
    """The requested instance exceeds a configured size or enumeration cap."""


class SecrecyMode(str, enum.Enum):
    WEAK = "weak"
    STRONG = "strong"


@dataclass(frozen=True)
class DesignParams:
    n_items: int
    n_defective: int
    n_tests: int
    delta: float = 0.0
    eps_prime: float = 0.0
    row_density: float | None = None
    secrecy_mode: SecrecyMode = SecrecyMode.WEAK

    def __post_init__(self):
        n, k, t = self.n_items, self.n_defective, self.n_tests
        if not (isinstance(n, (int, np.integer)) and isinstance(k, (int, np.integer))):
            raise TypeError("n_items and n_defective must be integers")
        if k < 1 or n <= k:
            raise ValueError(f"need 0 < K < N, got N={n}, K={k}")
        if t < 1:
            raise ValueError(f"n_tests must be >= 1, got {t}")
        if not 0.0 <= self.delta < 1.0:
            raise ValueError(f"delta must lie in [0, 1), got {self.delta}")
        if self.eps_prime < 0:
            raise ValueError(f"eps_prime must be >= 0, got {self.eps_prime}")
        object.__setattr__(self, "secrecy_mode", SecrecyMode(self.secrecy_mode))
        if self.secrecy_mode is SecrecyMode.WEAK and self.delta - self.eps_prime < 0:
            raise ValueError("weak mode requires delta - eps_prime >= 0")
        if self.row_density is None:
            object.__setattr__(self, "row_density", LN2 / k)
        if not 0.0 < self.row_density < 1.0:
            raise ValueError(f"row_density must lie in (0, 1), got {self.row_density}")

    @property
    def bin_exponent(self) -> float:
        """Per-item rate ``e`` with ``log2 M = T * e / K`` before rounding."""
        if self.secrecy_mode is SecrecyMode.WEAK:
            return self.delta - self.eps_prime
        return self.delta + self.eps_prime


def bin_size(params: DesignParams) -> int:
    """Rows per bin: ``max(1, round(2**(T*e/K)))``, halves rounded up."""
    exponent = params.n_tests * params.bin_exponent / params.n_defective
    if exponent > 62:
        raise InstanceTooLarge(f"bin size 2**{exponent:.1f} does not fit in 64 bits")
    return max(1, math.floor(2.0**exponent + 0.5))


def log2_bin_size(params: DesignParams) -> float:
    """The realized ``log2 M`` after rounding (used by the analytic bounds)."""
    return math.log2(bin_size(params))


@dataclass(frozen=True, eq=False)
class Codebook:
    params: DesignParams
    bin_size: int
    bins: np.ndarray = field(repr=False)  # (N, M, T) bool
    seed: int = 0

    def __post_init__(self):
        p = self.params
        expected = (p.n_items, self.bin_size, p.n_tests)
        if self.bins.shape != expected:
            raise ValueError(f"bins shape {self.bins.shape} != {expected}")
        bins = np.ascontiguousarray(self.bins, dtype=bool)
        bins.flags.writeable = False
        object.__setattr__(self, "bins", bins)

    @property
    def n_items(self) -> int:
        return self.params.n_items

    @property
    def n_tests(self) -> int:
        return self.params.n_tests

    @cached_property
    def packed(self) -> np.ndarray:
        """Rows as little-endian uint64 words, shape (N, M, ceil(T/64))."""
        return pack_bits(self.bins)

    def __eq__(self, other):
        if not isinstance(other, Codebook):
            return NotImplemented
        return (
            self.params == other.params
            and self.bin_size == other.bin_size
            and self.seed == other.seed
            and np.array_equal(self.bins, other.bins)
        )

    __hash__ = None


def pack_bits(bits: np.ndarray) -> np.ndarray:
    """Pack the last axis of a bool array into uint64 words (bit t -> word t//64, bit t%64)."""
    bits = np.asarray(bits, dtype=bool)
    t = bits.shape[-1]
    n_words = max(1, -(-t // 64))
    pad = n_words * 64 - t
    if pad:
        bits = np.concatenate([bits, np.zeros(bits.shape[:-1] + (pad,), dtype=bool)], axis=-1)
    packed = np.packbits(bits, axis=-1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").reshape(bits.shape[:-1] + (n_words,))


def generate_codebook(
    params: DesignParams,
    seed: int,
    max_bits: int = DEFAULT_MAX_BITS,
    m: int | None = None,
) -> Codebook:
    """Draw every bit i.i.d. Bernoulli(row_density).

    ``m`` overrides the bin size derived from ``params`` (fixed-M experiments).
    """
    m = bin_size(params) if m is None else int(m)
    if m < 1:
        raise ValueError("bin size must be >= 1")
    n_bits = params.n_items * m * params.n_tests
    if n_bits > max_bits:
        raise InstanceTooLarge(f"codebook needs {n_bits} bits, cap is {max_bits}")
    rng = np.random.default_rng(seed)
    bins = rng.random((params.n_items, m, params.n_tests)) < params.row_density
    return Codebook(params, m, bins, seed)


@dataclass(frozen=True, eq=False)
class RowAssignment:
    choices: np.ndarray

    def __post_init__(self):
        choices = np.asarray(self.choices, dtype=np.int64).copy()
        choices.flags.writeable = False
        object.__setattr__(self, "choices", choices)

    def __eq__(self, other):
        if not isinstance(other, RowAssignment):
            return NotImplemented
        return np.array_equal(self.choices, other.choices)

    __hash__ = None


def assign_rows(codebook: Codebook, seed: int | np.random.Generator) -> RowAssignment:
    rng = np.random.default_rng(seed)
    return RowAssignment(rng.integers(0, codebook.bin_size, size=codebook.n_items))


def realize_design(codebook: Codebook, assignment: RowAssignment) -> np.ndarray:
    """The ``N x T`` testing matrix: row ``j`` is ``bins[j][choices[j]]``."""
    choices = assignment.choices
    if choices.shape != (codebook.n_items,):
        raise ValueError(f"assignment has {choices.shape[0]} entries, codebook has {codebook.n_items} bins")
    if choices.size and (choices.min() < 0 or choices.max() >= codebook.bin_size):
        raise ValueError(f"row choice outside [0, {codebook.bin_size})")
    return codebook.bins[np.arange(codebook.n_items), choices]


# -- defective sets and colexicographic ranking --------------------------------


def rank_subset(members) -> int:
    """Colexicographic rank of a set of distinct non-negative integers."""
    return sum(math.comb(c, i + 1) for i, c in enumerate(sorted(members)))


def unrank_subset(rank: int, k: int) -> tuple[int, ...]:
    out = []
    for i in range(k, 0, -1):
        c = i - 1
        # largest c with comb(c, i) <= rank
        while math.comb(c + 1, i) <= rank:
            c += 1
        out.append(c)
        rank -= math.comb(c, i)
    return tuple(reversed(out))


@dataclass(frozen=True)
class DefectiveSet:
    members: tuple[int, ...]
    index_w: int

    @classmethod
    def from_members(cls, members, n_items: int | None = None) -> "DefectiveSet":
        members = tuple(sorted(int(m) for m in members))
        if len(set(members)) != len(members):
            raise ValueError("defective items must be distinct")
        if members and members[0] < 0:
            raise ValueError("item indices must be non-negative")
        if n_items is not None and members and members[-1] >= n_items:
            raise ValueError(f"item {members[-1]} outside [0, {n_items})")
        return cls(members, rank_subset(members))

    @classmethod
    def from_rank(cls, index_w: int, k: int) -> "DefectiveSet":
        return cls(unrank_subset(index_w, k), index_w)

    @classmethod
    def random(cls, n_items: int, k: int, rng: np.random.Generator) -> "DefectiveSet":
        return cls.from_members(rng.choice(n_items, size=k, replace=False))

    def __len__(self):
        return len(self.members)

    def __contains__(self, item):
        return item in self.members


# -- on-disk container -----------------------------------------------------------

MAGIC = b"SGT1"
_HEADER = struct.Struct("<4s4Q3dBQ")


def save_codebook(codebook: Codebook, path) -> None:
    p = codebook.params
    mode = 0 if p.secrecy_mode is SecrecyMode.WEAK else 1
    header = _HEADER.pack(
        MAGIC, p.n_items, p.n_defective, p.n_tests, codebook.bin_size,
        p.delta, p.eps_prime, p.row_density, mode, codebook.seed & 0xFFFFFFFFFFFFFFFF,
    )
    rows = codebook.bins.reshape(-1, p.n_tests)
    payload = np.packbits(rows, axis=1, bitorder="little")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes())


def load_codebook(path) -> Codebook:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise ValueError("truncated codebook header")
    magic, n, k, t, m, delta, eps_prime, density, mode, seed = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    row_bytes = -(-t // 8)
    need = _HEADER.size + n * m * row_bytes
    if len(data) != need:
        raise ValueError(f"payload is {len(data) - _HEADER.size} bytes, expected {need - _HEADER.size}")
    params = DesignParams(
        n, k, t, delta, eps_prime, density,
        SecrecyMode.WEAK if mode == 0 else SecrecyMode.STRONG,
    )
    raw = np.frombuffer(data, dtype=np.uint8, offset=_HEADER.size).reshape(n * m, row_bytes)
    bits = np.unpackbits(raw, axis=1, bitorder="little", count=t).astype(bool)
    return Codebook(params, m, bits.reshape(n, m, t), seed)
