"""Boolean-OR pool tests and the i.i.d. erasure eavesdropper."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .design import DefectiveSet

ERASED = 2


@dataclass(frozen=True, eq=False)
class OutcomeVector:
    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=bool).copy()
        if bits.ndim != 1:
            raise ValueError("outcome vector must be one-dimensional")
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)

    def __len__(self):
        return self.bits.shape[0]

    def __eq__(self, other):
        if not isinstance(other, OutcomeVector):
            return NotImplemented
        return np.array_equal(self.bits, other.bits)

    __hash__ = None

    def __str__(self):
        return "".join("1" if b else "0" for b in self.bits)


@dataclass(frozen=True, eq=False)
class EveView:
    """Eavesdropper observation; ``symbols`` holds 0, 1 or ``ERASED`` (2)."""

    symbols: np.ndarray

    def __post_init__(self):
        symbols = np.asarray(self.symbols, dtype=np.int8).copy()
        if symbols.ndim != 1 or np.any((symbols < 0) | (symbols > ERASED)):
            raise ValueError("symbols must be a 1-d vector over {0, 1, 2}")
        symbols.flags.writeable = False
        object.__setattr__(self, "symbols", symbols)

    @property
    def kept(self) -> np.ndarray:
        return self.symbols != ERASED

    @property
    def kept_count(self) -> int:
        return int(self.kept.sum())

    @property
    def values(self) -> np.ndarray:
        """Observed bits with erased positions read as 0."""
        return self.symbols == 1

    def __len__(self):
        return self.symbols.shape[0]

    def __eq__(self, other):
        if not isinstance(other, EveView):
            return NotImplemented
        return np.array_equal(self.symbols, other.symbols)

    __hash__ = None

    def __str__(self):
        return "".join("01?"[s] for s in self.symbols)

    @classmethod
    def from_string(cls, text: str) -> "EveView":
        return cls(np.array(["01?".index(c) for c in text], dtype=np.int8))

    @classmethod
    def full(cls, y: OutcomeVector) -> "EveView":
        """A view with nothing erased (what the legitimate decoder sees)."""
        return cls(y.bits.astype(np.int8))


def run_tests(design: np.ndarray, defectives: DefectiveSet) -> OutcomeVector:
    design = np.asarray(design, dtype=bool)
    members = list(defectives.members)
    if members and (members[0] < 0 or members[-1] >= design.shape[0]):
        raise ValueError("defective index outside the design")
    return OutcomeVector(design[members].any(axis=0))


def eavesdrop(y: OutcomeVector, delta: float, seed: int | np.random.Generator) -> EveView:
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta must lie in [0, 1), got {delta}")
    rng = np.random.default_rng(seed)
    keep = rng.random(len(y)) < delta
    symbols = np.where(keep, y.bits.astype(np.int8), np.int8(ERASED))
    return EveView(symbols)
