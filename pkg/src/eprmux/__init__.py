"""Gaussian model of sideband-multiplexed EPR entanglement distribution.

The package simulates a broadband squeezed beam whose upper and lower
sidebands are split toward two parties, evaluates the resulting two-party
entanglement, packs many such channels onto one beam, and cross-checks the
covariance-matrix predictions with a time-domain Monte-Carlo pipeline.

The most common entry points are re-exported here:

* :func:`evaluate_scenario` turns a :class:`ChainScenario` into an
  :class:`EntanglementReport`.
* :func:`fit_to_measurements` inverts the model onto measured values.
* :func:`plan_multiplex` and :func:`validate_plan` lay out channels.
* :func:`run_montecarlo` validates a scenario with synthesized records.
* :func:`load_config` reads a scenario description from YAML.
"""

from .config import ConfigError, LoadedConfig, load_config, parse_config, scenario_mapping
from .criteria import (
    EntanglementReport,
    FitResult,
    InfeasibleTargetError,
    duan_inseparability,
    epr_product_from_variances,
    evaluate_chain,
    evaluate_scenario,
    fit_to_measurements,
    lumped_channel_scenario,
    reid_epr,
)
from .gaussian import (
    GaussianState,
    InvalidStateError,
    SidebandLabel,
    ppt_min_symplectic_eigenvalue,
    symplectic_eigenvalues,
    vacuum,
)
from .mcdsp import (
    DspConfig,
    McRunResult,
    NoiseSynthesisSpec,
    build_synthesis_spec,
    run_montecarlo,
)
from .multiplex import (
    ChannelPlan,
    MultiplexPlan,
    PlanValidation,
    plan_multiplex,
    validate_plan,
)
from .optics import (
    AboveThresholdError,
    ChainResult,
    ChainScenario,
    FilterCavity,
    GeometryError,
    HomodyneChannel,
    OpaSource,
    PerfectSplitter,
    cavity_transfer,
    finesse_from_transmissions,
    linewidth_from_finesse,
    run_chain,
    squeezing_spectrum,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "AboveThresholdError",
    "ChainResult",
    "ChainScenario",
    "ChannelPlan",
    "ConfigError",
    "DspConfig",
    "EntanglementReport",
    "FilterCavity",
    "FitResult",
    "GaussianState",
    "GeometryError",
    "HomodyneChannel",
    "InfeasibleTargetError",
    "InvalidStateError",
    "LoadedConfig",
    "McRunResult",
    "MultiplexPlan",
    "NoiseSynthesisSpec",
    "OpaSource",
    "PerfectSplitter",
    "PlanValidation",
    "SidebandLabel",
    "build_synthesis_spec",
    "cavity_transfer",
    "duan_inseparability",
    "epr_product_from_variances",
    "evaluate_chain",
    "evaluate_scenario",
    "finesse_from_transmissions",
    "fit_to_measurements",
    "linewidth_from_finesse",
    "load_config",
    "lumped_channel_scenario",
    "parse_config",
    "plan_multiplex",
    "ppt_min_symplectic_eigenvalue",
    "reid_epr",
    "run_chain",
    "run_montecarlo",
    "scenario_mapping",
    "squeezing_spectrum",
    "symplectic_eigenvalues",
    "vacuum",
    "validate_plan",
]
