"""Registered experiment suites.  Each module registers one experiment under its own name."""
from .base import (ConfigError, Experiment, ExperimentSpec, Param, REGISTRY, RunContext,
                   get_experiment, register, run_experiment, DEFAULT_BUDGET_MIB)
from .fitting import SlopeFit, fit_power_law
from .output import RunManifest, read_series, write_series
from . import (loc_ratio, bo_instability, burgers_instability, bona_smith,  # noqa: F401
               nls_decoherence_torus, residual_scaling, kato_ponce_survey, strichartz_survey,
               energy_estimate_check)

__all__ = ["ConfigError", "Experiment", "ExperimentSpec", "Param", "REGISTRY", "RunContext",
           "get_experiment", "register", "run_experiment", "SlopeFit", "fit_power_law",
           "RunManifest", "read_series", "write_series", "DEFAULT_BUDGET_MIB", "list_experiments"]


def list_experiments():
    return [REGISTRY[k] for k in sorted(REGISTRY)]
