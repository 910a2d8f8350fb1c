"""Exact stationary scattering states of the potential step."""
from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import NonIncidentWave
from .model import StepPotential

PROPAGATING = "propagating"
EVANESCENT = "evanescent"


@dataclass(frozen=True)
class ScatteringAmplitudes:
    """Reflection and transmission amplitudes at one incident wave number.

    ``t_field`` = 2k/(k+k') multiplies exp(ik'x) in the wave function.
    ``t_flux`` = 2 sqrt(k k')/(k+k') satisfies |r|^2 + |t_flux|^2 = 1 and
    is None on the evanescent branch.
    """

    r: complex
    t_field: complex
    t_flux: complex | None
    branch: str
    kprime: complex


@dataclass(frozen=True)
class StationaryState:
    k: float
    kprime: complex
    amplitudes: ScatteringAmplitudes
    step: StepPotential


def transmitted_k(k, step_height):
    """Region-2 wave number sqrt(k^2 - 2 dV) on the branch Im(k') >= 0.

    Works elementwise on arrays.  Below threshold k' = i*kappa.
    """
    kp2 = np.asarray(k, dtype=float) ** 2 - 2.0 * step_height
    return np.where(kp2 > 0, np.sqrt(np.abs(kp2)) + 0j, 1j * np.sqrt(np.abs(kp2)))


def amplitudes(k: float, step: StepPotential) -> ScatteringAmplitudes:
    k = float(k)
    if not k > 0:
        raise NonIncidentWave(f"incident wave number must be positive, got {k}")
    kp2 = k * k - 2.0 * step.height
    if kp2 > 0:
        kp = complex(np.sqrt(kp2))
        t_flux = 2.0 * cmath.sqrt(k * kp) / (k + kp)
        branch = PROPAGATING
    else:
        kp = 1j * np.sqrt(-kp2)
        t_flux = None
        branch = EVANESCENT
    r = (k - kp) / (k + kp)
    t_field = 2.0 * k / (k + kp)
    return ScatteringAmplitudes(complex(r), complex(t_field), t_flux, branch, complex(kp))


def amplitude_arrays(k: np.ndarray, step: StepPotential):
    """Vectorised (r, t_field, kprime) for an array of positive wave numbers."""
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0):
        raise NonIncidentWave("incident wave numbers must be positive")
    kp = transmitted_k(k, step.height)
    return (k - kp) / (k + kp), 2.0 * k / (k + kp), kp


def stationary_state(k: float, step: StepPotential) -> StationaryState:
    amp = amplitudes(k, step)
    return StationaryState(float(k), amp.kprime, amp, step)


def eval_state(state: StationaryState, x):
    """Evaluate psi_k(x): exp(ikx) + r exp(-ikx) for x < 0, t exp(ik'x) for x >= 0."""
    x = np.asarray(x, dtype=float)
    k = state.k
    amp = state.amplitudes
    out = np.empty(x.shape, dtype=complex)
    left = x < 0
    xl, xr = x[left], x[~left]
    out[left] = np.exp(1j * k * xl) + amp.r * np.exp(-1j * k * xl)
    out[~left] = amp.t_field * np.exp(1j * state.kprime * xr)
    return out[()] if out.ndim == 0 else out
