"""Finite-scale Lyapunov exponents of quasi-periodic SL(2,R) cocycles.

Submodules: ``freqlib`` (continued fractions, frequency classes, exact
orbit phases), ``gevrey`` (Fourier-represented Gevrey functions and matrix
cocycles), ``cocycle`` (finite-scale exponents), ``ldt`` (large-deviation
measurement), ``scheme`` (multi-scale construction) and ``cli``.
"""

__version__ = "0.1.0"

from .cocycle import (FiniteScaleLE, LogNormProduct, Mat2, QuadratureSpec, finite_scale_le, le_sequence,
                      le_values, pointwise_exponent, transfer_product)
from .errors import (BudgetError, InfeasibleInput, InputError, InvariantError, NumericError, PrecisionError,
                     QPCocycleError, SearchError, WindowError)
from .freqlib import (Convergent, FixedPointAngle, Frequency, cf_convergents, classify_frequency,
                      construct_omega_eta)
from .gevrey import GevreyFunction, MatrixFunction, c0_distance, gevrey_norm, random_gevrey
from .ldt import DeviationReport, LdtCalibration, calibrate_ldt, deviation_measure, fit_ldt_constant

__all__ = [
    "__version__",
    "FiniteScaleLE", "LogNormProduct", "Mat2", "QuadratureSpec", "finite_scale_le", "le_sequence", "le_values",
    "pointwise_exponent", "transfer_product",
    "BudgetError", "InfeasibleInput", "InputError", "InvariantError", "NumericError", "PrecisionError",
    "QPCocycleError", "SearchError", "WindowError",
    "Convergent", "FixedPointAngle", "Frequency", "cf_convergents", "classify_frequency", "construct_omega_eta",
    "GevreyFunction", "MatrixFunction", "c0_distance", "gevrey_norm", "random_gevrey",
    "DeviationReport", "LdtCalibration", "calibrate_ldt", "deviation_measure", "fit_ldt_constant",
]
