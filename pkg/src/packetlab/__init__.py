"""Multiwavelet packet and frame packet transforms for integer dilation matrices."""

from .basis import (
    BasisSpec,
    PartitionReport,
    best_basis,
    check_partition,
    interval,
    level_basis,
    make_cost,
    node_costs,
    wavelet_basis,
)
from .errors import PacketLabError
from .filterbank import (
    FilterBank,
    SampledBank,
    SplittingReport,
    SymbolMatrix,
    character_matrix,
    check_splitting_exact,
    check_splitting_grid,
    complete_bank_grid,
    complete_bank_haar,
    default_grid_n,
    eval_symbol,
    frequency_grid,
    random_unitary,
)
from .frames import (
    BlockSymbol,
    FrameReport,
    build_E,
    build_H,
    build_P,
    frame_bounds,
    frame_condition_check,
    propagate_bounds,
    verify_factorization,
)
from .lattice import (
    DigitSet,
    DilationMatrix,
    character_sum,
    digit_of,
    digit_set,
    enumerate_representatives,
    reduce_mod,
    unit_phase,
    validate_dilation,
)
from .packets import (
    CoefficientGrid,
    PacketTree,
    a_adic_expansion,
    analyze_step,
    decompose,
    packet_symbol,
    reconstruct,
    synthesize_step,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "PacketLabError",
    "DilationMatrix",
    "DigitSet",
    "validate_dilation",
    "digit_set",
    "digit_of",
    "enumerate_representatives",
    "reduce_mod",
    "unit_phase",
    "character_sum",
    "FilterBank",
    "SymbolMatrix",
    "SplittingReport",
    "SampledBank",
    "eval_symbol",
    "check_splitting_exact",
    "check_splitting_grid",
    "character_matrix",
    "complete_bank_haar",
    "complete_bank_grid",
    "random_unitary",
    "frequency_grid",
    "default_grid_n",
    "CoefficientGrid",
    "PacketTree",
    "a_adic_expansion",
    "packet_symbol",
    "analyze_step",
    "synthesize_step",
    "decompose",
    "reconstruct",
    "BasisSpec",
    "PartitionReport",
    "interval",
    "check_partition",
    "wavelet_basis",
    "level_basis",
    "make_cost",
    "node_costs",
    "best_basis",
    "BlockSymbol",
    "FrameReport",
    "build_E",
    "build_H",
    "build_P",
    "verify_factorization",
    "frame_bounds",
    "propagate_bounds",
    "frame_condition_check",
]
