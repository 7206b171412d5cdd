"""Secure group testing: binned stochastic pooling designs over a Boolean-OR
channel with an erasure eavesdropper."""

from .channel import EveView, OutcomeVector, eavesdrop, run_tests
from .decode import DndResult, MlResult, dnd_decode, ml_decode, row_consistent
from .design import (
    Codebook,
    DefectiveSet,
    DesignParams,
    InstanceTooLarge,
    RowAssignment,
    SecrecyMode,
    assign_rows,
    bin_size,
    generate_codebook,
    load_codebook,
    realize_design,
    save_codebook,
)
from .secrecy import (
    LeakageEstimate,
    PosteriorOverW,
    consistent_rows_per_bin,
    empirical_leakage,
    posterior_over_w,
)

__version__ = "0.1.0"
