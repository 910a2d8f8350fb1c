"""Quantum wave-packet scattering off potential steps and refraction in spacetime."""

__version__ = "0.1.0"

from .analysis import (
    BroadeningDiagnostics,
    WorldlineFit,
    broadening,
    check_spacetime_snell,
    completion_row,
    fit_worldline,
    fringe_period,
    spectral_split,
    width_ratio,
)
from .dynamics import (
    KQuadrature,
    SpinorPacket,
    ZeemanStep,
    evolve_spinor,
    evolve_step,
    observables,
    spectral_amplitude,
)
from .errors import *  # noqa: F401,F403
from .model import DensityField, GaussianSpectrum, SpacetimeGrid, StepPotential, grid_points
from .rays import (
    DispersiveMedium,
    RayWorldline,
    group_velocity,
    n_quantum,
    predict_worldlines,
    quantum_medium,
    snell_spacetime,
    snell_spatial,
)
from .scattering import amplitudes, eval_state, stationary_state
