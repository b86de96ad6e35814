"""Joint ruin of two proportionally coupled insurance lines under constant interest."""

__version__ = "0.1.0"

from .claims import DiscountedClaimLaw, Exponential, RegVaryingClaim, claim_from_spec
from .model import InitialReserves, ModelParams, ParameterError, Regime, classify_regime, validate

__all__ = [
    "DiscountedClaimLaw", "Exponential", "InitialReserves", "ModelParams", "ParameterError", "Regime",
    "RegVaryingClaim", "classify_regime", "claim_from_spec", "validate",
]
