"""Quasi-classical dynamics of a two-mode two-state vibronic model with
finite-time Lyapunov-exponent diagnostics.

The hot RK4 kernels live in a compiled extension with a pure-Python
fallback; :func:`active_backend` reports which one is loaded.
"""

from .backend import active_backend, HAVE_COMPILED
from .model import (
    ModelParams,
    SingularityError,
    adiabatic_lower_potential,
    adiabatic_vector_field,
    displaced_coords,
    mapping_energy,
    mapping_vector_field,
    occupation,
    potential_a,
    potential_b,
)
from .dynamics import (
    DivergenceError,
    EnergyDriftError,
    IntegratorConfig,
    Trajectory,
    integrate,
    rk4_step,
)
from .lyapunov import LyapunovConfig, LyapunovRecord, benettin_lambda, normalized_distance, perturb
from .ensemble import (
    EmptyArcError,
    InvalidEnergyError,
    SamplingSpec,
    init_adiabatic_state,
    init_mapping_state,
    sample_nuclear,
)
from .experiments import (
    Histogram,
    HistogramSpec,
    RunSpec,
    make_histogram,
    preset_spec,
    run_experiment,
    write_outputs,
)

__version__ = "0.1.0"
