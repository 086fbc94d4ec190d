"""Numerical laboratory for L = |x|^alpha Lap + c|x|^(alpha-1) (x/|x|).grad - b|x|^(alpha-2)."""

from sel_lab.params import (
    Classification,
    DomainKind,
    Interval,
    OperatorParams,
    SpectralSummary,
    Verdict,
    adjoint_params,
    classify,
    dissipativity_margin,
    f_eval,
    kelvin_params,
    sectoriality_constant,
    spectral_summary,
    theta_data,
)

__version__ = "0.1.0"

__all__ = [
    "Classification",
    "DomainKind",
    "Interval",
    "OperatorParams",
    "SpectralSummary",
    "Verdict",
    "adjoint_params",
    "classify",
    "dissipativity_margin",
    "f_eval",
    "kelvin_params",
    "sectoriality_constant",
    "spectral_summary",
    "theta_data",
]
