"""Refractive indices, Snell's law in space and in spacetime, and ray worldlines.

Angles are in radians.  In the spacetime diagram the vertical axis is
v0*t, so a worldline of velocity v has slope tan(theta) = v0 / v.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    DegenerateDispersion,
    EvanescentRegime,
    TotalInternalReflection,
)
from .model import GaussianSpectrum, StepPotential

# canonical group/phase velocity ratios of the reference medium
ALPHA_VACUUM_LIGHT = 1.0
ALPHA_QUANTUM = 2.0


@dataclass(frozen=True)
class DispersiveMedium:
    """Refractive index ``n`` and its frequency derivative at the working frequency."""

    n: float
    dn_domega: float = 0.0

    def __post_init__(self):
        if not self.n > 0:
            raise ValueError(f"refractive index must be positive, got {self.n}")


def n_quantum(v0_potential: float, omega: float) -> float:
    """Quantum refractive index sqrt(1 - V0/omega) (hbar = 1).

    Raises EvanescentRegime when V0 > omega, where no propagating
    solution exists.
    """
    if not omega > 0:
        raise ValueError(f"omega must be positive, got {omega}")
    ratio = v0_potential / omega
    if ratio > 1:
        raise EvanescentRegime(
            f"V0={v0_potential} exceeds hbar*omega={omega}: n^2 = {1 - ratio:.6g} < 0"
        )
    return math.sqrt(1.0 - ratio)


def quantum_medium(v0_potential: float, omega: float) -> DispersiveMedium:
    """Medium for a region of constant potential seen by a particle of energy ``omega``.

    dn/domega = V0 / (2 omega^2 n) follows from differentiating n_quantum.
    """
    n = n_quantum(v0_potential, omega)
    if n == 0:
        raise EvanescentRegime("band edge: n = 0, group velocity vanishes")
    return DispersiveMedium(n, v0_potential / (2.0 * omega**2 * n))


def snell_spatial(n1: float, n2: float, theta1: float) -> float:
    if not (n1 > 0 and n2 > 0):
        raise ValueError(f"refractive indices must be positive, got {n1}, {n2}")
    if not 0 <= theta1 < math.pi / 2:
        raise ValueError(f"theta1 must lie in [0, pi/2), got {theta1}")
    s = n1 * math.sin(theta1) / n2
    if s > 1:
        raise TotalInternalReflection(f"sin(theta2) = {s:.6g} > 1")
    return math.asin(s)


def _dispersion_factor(medium: DispersiveMedium, omega: float, alpha_v: float) -> float:
    # n * (1 + alpha_v * (omega/n) * dn/domega), i.e. v0 / v_g
    return medium.n + alpha_v * omega * medium.dn_domega


def group_velocity(
    medium: DispersiveMedium, omega: float, alpha_v: float, v0: float
) -> float:
    """Group velocity v_g = (v0/n) / (1 + alpha_v (omega/n) dn/domega)."""
    denom = 1.0 + alpha_v * (omega / medium.n) * medium.dn_domega
    if abs(denom) < 1e-12:
        raise DegenerateDispersion(
            f"group-velocity denominator {denom:.3g} vanishes (stationary packet)"
        )
    return (v0 / medium.n) / denom


def snell_spacetime(
    medium1: DispersiveMedium,
    medium2: DispersiveMedium,
    omega: float,
    alpha_v: float,
    theta1: float,
) -> float:
    """Refraction angle of a worldline crossing from ``medium1`` into ``medium2``.

    Solves n2 (1 + a w/n2 dn2/dw) tan(t1) = n1 (1 + a w/n1 dn1/dw) tan(t2)
    for t2.  This is equivalent to v_g1 tan(t1) = v_g2 tan(t2).

    Parameters
    ----------
    medium1, medium2 : DispersiveMedium
        Index and dn/domega on the incident and transmitted side.
    omega : float
        Working frequency.
    alpha_v : float
        Group/phase velocity ratio of the reference medium
        (``ALPHA_VACUUM_LIGHT`` or ``ALPHA_QUANTUM``).
    theta1 : float
        Incident angle in [0, pi/2).

    Returns
    -------
    float
        Transmitted angle in radians.  ``theta1 == 0`` maps to exactly 0.
    """
    if not 0 <= theta1 < math.pi / 2:
        raise ValueError(f"theta1 must lie in [0, pi/2), got {theta1}")
    # both group velocities must exist and point forward
    for medium in (medium1, medium2):
        if group_velocity(medium, omega, alpha_v, 1.0) <= 0:
            raise ValueError("group velocities must be positive")
    if theta1 == 0:
        return 0.0
    ratio = _dispersion_factor(medium2, omega, alpha_v) / _dispersion_factor(
        medium1, omega, alpha_v
    )
    return math.atan(ratio * math.tan(theta1))


LABELS = ("incident", "reflected", "transmitted-up", "transmitted-down", "transmitted")


@dataclass(frozen=True)
class RaySegment:
    """Straight piece of a worldline in the (x, v0 t) plane.

    ``end`` is None for a ray that continues indefinitely.
    """

    start: tuple[float, float]
    slope: float
    label: str
    end: tuple[float, float] | None = None

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown segment label {self.label!r}")

    @property
    def velocity_ratio(self) -> float:
        """v / v0 = 1 / slope."""
        return 1.0 / self.slope


@dataclass(frozen=True)
class RayWorldline:
    segments: tuple[RaySegment, ...]
    v0: float
    weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.segments:
            raise ValueError("a worldline needs at least one segment")
        for a, b in zip(self.segments, self.segments[1:]):
            if a.end is None or not (
                math.isclose(a.end[0], b.start[0], abs_tol=1e-12)
                and math.isclose(a.end[1], b.start[1], abs_tol=1e-12)
            ):
                raise ValueError("worldline segments must be continuous")

    @property
    def label(self) -> str:
        return self.segments[-1].label

    @property
    def angle(self) -> float:
        """Spacetime angle atan(slope) of the last segment (radians)."""
        return math.atan(self.segments[-1].slope)


@dataclass(frozen=True)
class RayFan:
    """Incident, reflected and (unless totally reflected) transmitted rays."""

    worldlines: tuple[RayWorldline, ...]
    arrival_time: float
    total_reflection: bool

    def __iter__(self):
        return iter(self.worldlines)

    def __len__(self):
        return len(self.worldlines)

    def __getitem__(self, i):
        return self.worldlines[i]

    def by_label(self, label: str) -> RayWorldline:
        for w in self.worldlines:
            if w.label == label:
                return w
        raise KeyError(label)


def transmitted_wavenumber(k: float, step_height: float) -> float:
    """Real k' = sqrt(k^2 - 2 dV); EvanescentRegime when it does not exist."""
    kp2 = k * k - 2.0 * step_height
    if kp2 <= 0:
        raise EvanescentRegime(f"k^2 = {k * k:.6g} <= 2 dV = {2 * step_height:.6g}")
    return math.sqrt(kp2)


def predict_worldlines(
    packet: GaussianSpectrum, step: StepPotential, label: str = "transmitted"
) -> RayFan:
    """Ray-model worldlines for the packet centre meeting the step at x = 0.

    The incident ray has velocity k0 and therefore slope 1.  The reflected
    ray leaves with velocity -k0; the transmitted ray with k' from energy
    conservation.  When k0^2 < 2 dV the fan only contains incident and
    reflected rays and ``total_reflection`` is set.
    """
    v0 = packet.v0
    k0 = packet.k0
    t_star = packet.arrival_time
    arrival = (0.0, v0 * t_star)

    incident = RayWorldline(
        (RaySegment((packet.x0, 0.0), v0 / k0, "incident", end=arrival),), v0
    )
    try:
        kp = transmitted_wavenumber(k0, step.height)
    except EvanescentRegime:
        reflected = RayWorldline((RaySegment(arrival, -v0 / k0, "reflected"),), v0, 1.0)
        return RayFan((incident, reflected), t_star, True)

    r = (k0 - kp) / (k0 + kp)
    reflected = RayWorldline((RaySegment(arrival, -v0 / k0, "reflected"),), v0, r * r)
    transmitted = RayWorldline((RaySegment(arrival, v0 / kp, label),), v0, 1.0 - r * r)
    return RayFan((incident, reflected, transmitted), t_star, False)
