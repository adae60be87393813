"""Information-theoretic measurement thresholds for approximate support
recovery from phaseless (intensity-only) linear observations, plus the
Monte Carlo / quadrature machinery to check the claims behind them.

Layout: :mod:`phaselim.model` (signal and observation models),
:mod:`phaselim.densities` (conditional output laws, information density,
concentration constants), :mod:`phaselim.limits` (mutual-information rate
forms and threshold optimization), :mod:`phaselim.verify` (statistical
check suites), :mod:`phaselim.simulate` (tiny exhaustive-decoder
simulator), :mod:`phaselim.cli` (command line front end).
"""

from .densities import (ConcentrationConstants, ConditionalOutputLaw,
                        GaussianNoise, NoiseModel, concentration_constant,
                        concentration_moment, concentration_rate,
                        concentration_tail_bound,
                        conditional_output_logpdf,
                        exp_modified_gaussian_logpdf, golden_max,
                        info_density, info_density_sum,
                        noncentral_chi2_scaled_logpdf)
from .limits import (ThresholdInfeasibleError, ThresholdQuery,
                     ThresholdResult, c_beta_from_snr_db, figure_curves,
                     flat_mi_lower, flat_mi_upper, gaussian_mi_lower,
                     gaussian_mi_upper, measurement_thresholds,
                     mi_pair_lower, mi_pair_upper, snr_db, sorted_mi_lower,
                     sorted_mi_upper, tail_power_fraction, write_figure_csv)
from .model import (DiscreteFlat, DiscreteGeneral, GaussianIID,
                    PartitionPowers, ProblemInstance, SortedSignal,
                    SupportSet, floor_count, observe, partition_powers,
                    sample_signal_vector, sample_support)
from .rng import parallel_map, sample_circular_gaussian, substream
from .simulate import (ErrorCurve, SimConfig, decode, error_curve,
                       error_event, isotonic_residual, pava_nonincreasing)
from .verify import (SUITE_NAMES, VerificationReport, concentration_check,
                     logconcavity_check, logconcavity_negative_control,
                     mi_estimate, run_suite, sandwich_check,
                     tail_fraction_convergence_check)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # model
    "SupportSet", "DiscreteFlat", "DiscreteGeneral", "GaussianIID",
    "SortedSignal", "PartitionPowers", "ProblemInstance", "floor_count",
    "partition_powers", "sample_support", "sample_signal_vector", "observe",
    # densities
    "NoiseModel", "GaussianNoise", "ConditionalOutputLaw",
    "ConcentrationConstants", "noncentral_chi2_scaled_logpdf",
    "exp_modified_gaussian_logpdf", "conditional_output_logpdf",
    "info_density", "info_density_sum", "concentration_rate",
    "concentration_moment", "concentration_constant",
    "concentration_tail_bound", "golden_max",
    # limits
    "ThresholdQuery", "ThresholdResult", "ThresholdInfeasibleError",
    "tail_power_fraction", "mi_pair_lower", "mi_pair_upper",
    "sorted_mi_lower", "sorted_mi_upper", "gaussian_mi_lower",
    "gaussian_mi_upper", "flat_mi_lower", "flat_mi_upper",
    "measurement_thresholds", "snr_db", "c_beta_from_snr_db",
    "figure_curves", "write_figure_csv",
    # verify
    "VerificationReport", "SUITE_NAMES", "mi_estimate", "sandwich_check",
    "concentration_check", "tail_fraction_convergence_check",
    "logconcavity_check", "logconcavity_negative_control", "run_suite",
    # simulate
    "SimConfig", "ErrorCurve", "decode", "error_event", "error_curve",
    "pava_nonincreasing", "isotonic_residual",
    # rng
    "substream", "sample_circular_gaussian", "parallel_map",
]
