"""Probabilistic amplitude shaping over product codes.

Library plus CLI covering the full transmit/receive chain (distribution
matching, Gray mapping, product-code encoding, MAP demapping, iterative
hard-decision decoding), achievable-rate analysis, and a reproducible
Monte Carlo measurement harness.
"""

from .analysis import (
    CrossingNotFoundError,
    OperatingPoint,
    RateCurvePoint,
    SpectralEfficiency,
    bitlevel_error_probs,
    crossing_point,
    optimize_lambda,
    rate_sweep,
    rhdd,
    spectral_efficiency,
    write_rate_csv,
)
from .bch import BchCode, BddOutcome, DegreeMismatchError, bch_encode, bdd_decode, bdd_decode_batch, build_bch
from .gf import GfField, get_field
from .pipeline import (
    DemapperOutput,
    FeasibilityError,
    FrameReport,
    InterleaverMap,
    PasFrameCodec,
    PasParams,
    TxFrame,
    UniformCmCodec,
    demap_symbols,
    derive_frame_params,
    enumerate_feasible,
    pas_decode,
    pas_encode,
    read_frame,
    write_frame,
)
from .product import (
    DEFAULT_CR_WEIGHTS,
    DecodeReport,
    DecoderConfig,
    ProductCode,
    ibdd_cr_decode,
    ibdd_decode,
    is_pc_codeword,
    pc_encode,
)
from .shaping import (
    AmplitudeComposition,
    CcdmCodec,
    CompositionMismatchError,
    DematchError,
    MbDistribution,
    brgc_amplitude_bits,
    brgc_label,
    ccdm_dematch,
    ccdm_match,
    ccdm_rate,
    mb_pmf,
    quantize_composition,
)
from .simulate import (
    BudgetExceededError,
    ConfigError,
    SimConfig,
    SimResult,
    awgn_transmit,
    find_operating_point,
    run_montecarlo,
)

__all__ = [
    "AmplitudeComposition",
    "BchCode",
    "BddOutcome",
    "BudgetExceededError",
    "CcdmCodec",
    "CompositionMismatchError",
    "ConfigError",
    "CrossingNotFoundError",
    "DEFAULT_CR_WEIGHTS",
    "DecodeReport",
    "DecoderConfig",
    "DegreeMismatchError",
    "DematchError",
    "DemapperOutput",
    "FeasibilityError",
    "FrameReport",
    "GfField",
    "InterleaverMap",
    "MbDistribution",
    "OperatingPoint",
    "PasFrameCodec",
    "PasParams",
    "ProductCode",
    "RateCurvePoint",
    "SimConfig",
    "SimResult",
    "SpectralEfficiency",
    "TxFrame",
    "UniformCmCodec",
    "awgn_transmit",
    "bch_encode",
    "bdd_decode",
    "bdd_decode_batch",
    "bitlevel_error_probs",
    "brgc_amplitude_bits",
    "brgc_label",
    "build_bch",
    "ccdm_dematch",
    "ccdm_match",
    "ccdm_rate",
    "crossing_point",
    "demap_symbols",
    "derive_frame_params",
    "enumerate_feasible",
    "find_operating_point",
    "get_field",
    "ibdd_cr_decode",
    "ibdd_decode",
    "is_pc_codeword",
    "mb_pmf",
    "optimize_lambda",
    "pas_decode",
    "pas_encode",
    "pc_encode",
    "quantize_composition",
    "rate_sweep",
    "read_frame",
    "rhdd",
    "run_montecarlo",
    "spectral_efficiency",
    "write_frame",
    "write_rate_csv",
]
