"""Quasiperiodic kicked rotor simulation and 2D localization analysis."""

__version__ = "0.1.0"

from .core import (DEFAULT_OMEGA2, EnsembleSpec, MomentumDistribution,
                   ObservableSeries, ParameterError, QpkrError, SimParams,
                   derive_seed, validate)
from .quantum import (GridOverflowError, WaveState, evolve, free_flight,
                      initial_state, kick, run_ensemble)
from .classical import (ClassicalState, DiffusionTensor, Moments,
                        estimate_diffusion, inverse_step, quasilinear_d11,
                        quasilinear_d22, simulate, step)
from .anderson import (HoppingTable, MappingReport, MappingSingularError,
                       OnsiteField, ResonantSiteError, anisotropy_report,
                       hopping_table, onsite_energy, onsite_field,
                       verify_mapping)
from .analysis import (ALPHA, InsufficientDataError, LocalizationFit,
                       NotLocalizedError, ScalingFit,
                       ScalingPoint, fit_exponential, kinetic_energy,
                       pi0_proxy, predicted_ploc, profile_r_squared,
                       scaling_fit)
