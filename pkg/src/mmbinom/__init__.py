"""mmbinom: Markov-modulated binomial counting processes.

Exact event-driven simulation of a pool of n obligors whose common
default intensity is driven by a finite-state Markov chain, the
closed-form Gaussian limit laws of the centered and scaled count under
every scaling regime (chain speed-ups, joint n-alpha scalings, slowed
intensities, recovery), and a replicated Monte-Carlo harness that
verifies the limits statistically.
"""

from .numerics import (
    DenseMatrix,
    RngStream,
    SingularMatrixError,
    kolmogorov_pvalue,
    matrix_exponential_action,
    normal_cdf,
    solve_linear,
)
from .chain import (
    STATIONARY,
    ChainPath,
    ChainStatics,
    Generator,
    InvalidGeneratorError,
    accumulated_intensity,
    chain_statics,
    deviation_matrix,
    ergodic_variance,
    sample_chain_path,
    stationary_distribution,
    validate_generator,
)
from .counting import (
    CountingPath,
    ProcessSpec,
    UnsupportedRegimeError,
    conditional_binomial_sample,
    expected_fraction_semianalytic,
    recovery_mean_ode,
    sample_counts_on_grid,
    simulate_counting,
)
from .limits import (
    BracketPart,
    LimitLaw,
    Regime,
    RegimeKind,
    center_and_scale,
    centering_curve,
    conditional_limit_variance,
    limit_law,
    limit_variance_curve,
    pathwise_centering,
    sample_limit_process,
    scaling_exponent,
)
from .stats import (
    ExperimentConfig,
    GateReport,
    McSummary,
    ks_statistic,
    replicate_values,
    run_experiment,
    summarize_samples,
    variance_gate,
)
from .config import (
    ConfigError,
    dump_toml,
    load_config,
    make_experiment,
    make_generator,
    make_regime,
    make_spec,
    resolve_config,
)
from .presets import PRESET_NAMES, PresetRun, preset_runs

__version__ = "0.1.0"

__all__ = [
    "DenseMatrix",
    "RngStream",
    "SingularMatrixError",
    "solve_linear",
    "matrix_exponential_action",
    "normal_cdf",
    "kolmogorov_pvalue",
    "STATIONARY",
    "Generator",
    "ChainStatics",
    "ChainPath",
    "InvalidGeneratorError",
    "validate_generator",
    "stationary_distribution",
    "deviation_matrix",
    "chain_statics",
    "ergodic_variance",
    "sample_chain_path",
    "accumulated_intensity",
    "ProcessSpec",
    "CountingPath",
    "UnsupportedRegimeError",
    "simulate_counting",
    "sample_counts_on_grid",
    "conditional_binomial_sample",
    "expected_fraction_semianalytic",
    "recovery_mean_ode",
    "Regime",
    "RegimeKind",
    "LimitLaw",
    "BracketPart",
    "limit_law",
    "scaling_exponent",
    "centering_curve",
    "pathwise_centering",
    "limit_variance_curve",
    "conditional_limit_variance",
    "sample_limit_process",
    "center_and_scale",
    "ExperimentConfig",
    "McSummary",
    "GateReport",
    "run_experiment",
    "replicate_values",
    "summarize_samples",
    "variance_gate",
    "ks_statistic",
    "ConfigError",
    "load_config",
    "resolve_config",
    "dump_toml",
    "make_generator",
    "make_spec",
    "make_regime",
    "make_experiment",
    "PRESET_NAMES",
    "PresetRun",
    "preset_runs",
    "__version__",
]
