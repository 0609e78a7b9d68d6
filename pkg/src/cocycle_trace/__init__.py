"""Wodzicki residue and Kontsevich-Vishik trace densities from scaling cocycles."""

__version__ = "0.1.0"

from .cocycle_core import (  # noqa: E402
    CocycleOrder,
    CocycleProvider,
    Decomposition,
    ExpPolynomial,
    Subtraction,
    c_by_derivative,
    decompose,
    extract_c_at_zero,
    extract_v_at_zero,
    reconstruct_phi,
    reduce_order,
    series_psi_negative,
    verify_cocycle,
)
from .symbol_model import (  # noqa: E402
    ClassicalSymbolModel,
    CutoffProfile,
    HomogeneousLayer,
    symbol_phi_provider,
)
from .trace_extraction import kv_density, wodzicki_density  # noqa: E402
from .zeta_family import SymbolFamily, SyntheticFamily, psi_of_z, residue_at  # noqa: E402

__all__ = [
    "CocycleOrder",
    "CocycleProvider",
    "Decomposition",
    "ExpPolynomial",
    "Subtraction",
    "c_by_derivative",
    "decompose",
    "extract_c_at_zero",
    "extract_v_at_zero",
    "reconstruct_phi",
    "reduce_order",
    "series_psi_negative",
    "verify_cocycle",
    "ClassicalSymbolModel",
    "CutoffProfile",
    "HomogeneousLayer",
    "symbol_phi_provider",
    "kv_density",
    "wodzicki_density",
    "SymbolFamily",
    "SyntheticFamily",
    "psi_of_z",
    "residue_at",
]
