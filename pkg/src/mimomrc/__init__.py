"""Exact and asymptotic performance of MIMO maximum-ratio combining in
doubly correlated Rayleigh fading."""

__version__ = "1.0.0"

from .correlation import (
    CorrelationPair,
    correlation_penalty,
    exp_correlation,
    load_matrix_csv,
    make_pair,
    save_matrix_csv,
)
from .eigdist import (
    EigDistModel,
    alpha_coefficient,
    asymptotic_cdf,
    asymptotic_pdf,
    build_model,
    exact_cdf,
    exact_cdf_stable,
    psi_matrix,
)
from .errors import NumericalError, QuadratureError, ValidationError
from .montecarlo import (
    McConfig,
    McResult,
    draw_channel,
    empirical_cdf,
    max_eig_snr,
    mc_outage,
    mc_ser,
    simulate_lambda_max,
)
from .performance import (
    MODULATIONS,
    HighSnrSer,
    Modulation,
    asymptotic_outage,
    exact_outage,
    exact_ser,
    high_snr_ser,
    modulation_preset,
    ser_asymptote_eval,
)

__all__ = [
    "CorrelationPair",
    "EigDistModel",
    "HighSnrSer",
    "MODULATIONS",
    "McConfig",
    "McResult",
    "Modulation",
    "NumericalError",
    "QuadratureError",
    "ValidationError",
    "__version__",
    "alpha_coefficient",
    "asymptotic_cdf",
    "asymptotic_outage",
    "asymptotic_pdf",
    "build_model",
    "correlation_penalty",
    "draw_channel",
    "empirical_cdf",
    "exact_cdf",
    "exact_cdf_stable",
    "exact_outage",
    "exact_ser",
    "exp_correlation",
    "high_snr_ser",
    "load_matrix_csv",
    "make_pair",
    "max_eig_snr",
    "mc_outage",
    "mc_ser",
    "modulation_preset",
    "psi_matrix",
    "save_matrix_csv",
    "ser_asymptote_eval",
    "simulate_lambda_max",
]
