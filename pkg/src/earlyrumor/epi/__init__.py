"""Diffusion-model simulators and Levenberg-Marquardt fitting."""
from .fitting import (
    EPI_FEATURES,
    EPI_GROUP,
    SPIKEM_GROUP,
    EpiFeatures,
    EpiFitResult,
    InsufficientDataError,
    fallback_features,
    fit_epi_features,
    fit_seiz,
    fit_sis,
    fit_spikem,
)
from .lm import FitInitError, LMResult, levenberg_marquardt
from .models import (
    NumericError,
    SeizParams,
    SisParams,
    SpikeMParams,
    rsi,
    simulate_seiz,
    simulate_sis,
    simulate_spikem,
)

__all__ = [
    "EPI_FEATURES", "EPI_GROUP", "SPIKEM_GROUP", "EpiFeatures", "EpiFitResult",
    "FitInitError", "InsufficientDataError", "LMResult", "NumericError", "SeizParams",
    "SisParams", "SpikeMParams", "fallback_features", "fit_epi_features", "fit_seiz",
    "fit_sis", "fit_spikem", "levenberg_marquardt", "rsi", "simulate_seiz",
    "simulate_sis", "simulate_spikem",
]
