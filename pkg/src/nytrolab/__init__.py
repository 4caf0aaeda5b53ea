"""Kernel least squares with Nystrom subsampling and early stopping."""

from .kernel import KernelGram, KernelSpec, eval_kernel, gram_cross, gram_full
from .spectral import EigenSystem, NystromFactor, apply_spectral, eigh, nystrom_factor, pinv
from .estimators import (
    CoefficientModel,
    IterationPath,
    fit_early_stopping,
    fit_kols,
    fit_krls,
    fit_nkrls,
    fit_nkrls_direct,
    fit_nytro,
    predict,
)
from .risk import (
    FixedDesignProblem,
    RiskReport,
    bias_bound_check,
    expected_excess_risk,
    monte_carlo_excess_risk,
    q_matrix,
)
from .complexity import (
    RegimeProfile,
    coherence_dim,
    effective_dim,
    full_dim,
    nystrom_size_bound,
    regime_classify,
    snr,
)

__version__ = "0.1.0"
