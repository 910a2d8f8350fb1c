"""Ray-model observables measured from simulated densities."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter1d

from .dynamics import KQuadrature, branch_point, ZeemanStep, density_moments, regional_norms, spectral_amplitude
from .errors import EmptyRegion, EvanescentRegime, IllConditionedFit
from .model import DensityField, GaussianSpectrum, StepPotential
from .rays import DispersiveMedium
from .scattering import amplitude_arrays

MIN_FIT_ROWS = 8
MIN_LOBE_NORM = 1e-3
STABLE_REL_CHANGE = 1e-3


@dataclass(frozen=True)
class WorldlineFit:
    """Least-squares line v0*T = slope * x + intercept through lobe centroids."""

    label: str
    slope: float
    intercept: float
    residual: float
    window: tuple[float, float]
    angle: float
    n_rows: int
    v0: float

    @property
    def velocity(self) -> float:
        return self.v0 / self.slope


@dataclass(frozen=True)
class BroadeningDiagnostics:
    t_broad: float
    t_prop: float
    fresnel_f: float
    regime: str
    width: float
    wavelength: float
    distance: float


def stable_from(norms: np.ndarray, rel_change: float = STABLE_REL_CHANGE) -> int:
    """First row index after which the norm changes by < ``rel_change`` per row."""
    scale = np.maximum(np.abs(norms[1:]), 1e-300)
    unstable = np.nonzero(np.abs(np.diff(norms)) / scale >= rel_change)[0]
    return 0 if unstable.size == 0 else int(unstable[-1]) + 2


def completion_row(norms: np.ndarray, fraction: float = 0.999) -> int:
    """First row at which a regional norm reaches ``fraction`` of its final value.

    Used as the moment a transmitted lobe has fully crossed the step,
    before free spreading sets in.
    """
    return int(np.argmax(norms >= fraction * norms[-1]))


def _auto_rows(density: DensityField, region: str, direction: str) -> np.ndarray:
    nt = density.grid.nt
    if region == "all":
        return np.arange(nt)
    if direction == "forward" and region == "left":
        # incident lobe: rows before any weight has left the left region
        norms = regional_norms(density, "left")
        intact = np.abs(norms - norms[0]) < STABLE_REL_CHANGE * norms[0]
        stop = nt if intact.all() else int(np.argmin(intact))
        return np.arange(stop)
    norms = regional_norms(density, region)
    return np.arange(stable_from(norms), nt)


def fit_worldline(
    density: DensityField,
    v0: float,
    region: str = "right",
    direction: str = "forward",
    window: tuple[float, float] | None = None,
    label: str | None = None,
) -> WorldlineFit:
    """Fit the centroid worldline of one density lobe.

    Parameters
    ----------
    density : DensityField
    v0 : float
        Reference speed converting T to the length v0*T.
    region : {"all", "left", "right"}
        Spatial region whose centroid is tracked.
    direction : {"forward", "backward"}
        In the left region, "forward" isolates the incident lobe (rows
        before the scattering event) and "backward" the reflected lobe
        (rows after the regional norm has stabilised).  In the right
        region both use the post-scattering rows.
    window : (T_start, T_end), optional
        Explicit time window; overrides the automatic row selection.
    """
    if direction not in ("forward", "backward"):
        raise ValueError(f"direction must be 'forward' or 'backward', got {direction!r}")
    grid = density.grid
    t = grid.t
    if window is not None:
        lo, hi = window
        if lo < grid.t_min or hi > grid.t_max or lo >= hi:
            raise ValueError(f"window {window} does not lie within [{grid.t_min}, {grid.t_max}]")
        rows = np.nonzero((t >= lo) & (t <= hi))[0]
    else:
        rows = _auto_rows(density, region, direction)
    if rows.size < MIN_FIT_ROWS:
        raise IllConditionedFit(f"only {rows.size} usable time rows (need {MIN_FIT_ROWS})")

    x = grid.x
    cx = np.empty(rows.size)
    for i, row in enumerate(rows):
        norm, cx[i], _ = density_moments(density.values[row], x, region)
        if norm <= MIN_LOBE_NORM:
            raise EmptyRegion(f"lobe norm {norm:.3g} at T={t[row]:.4g} is below {MIN_LOBE_NORM}")
    if np.ptp(cx) < 2 * grid.dx:
        raise IllConditionedFit("centroid moves less than two grid spacings over the window")

    y = v0 * t[rows]
    xm = cx.mean()
    ym = y.mean()
    slope = float(np.sum((cx - xm) * (y - ym)) / np.sum((cx - xm) ** 2))
    intercept = float(ym - slope * xm)
    residual = float(np.sqrt(np.mean((y - (slope * cx + intercept)) ** 2)))
    if label is None:
        label = {"right": "transmitted", "all": "incident"}.get(
            region, "incident" if direction == "forward" else "reflected"
        )
    return WorldlineFit(
        label=label,
        slope=slope,
        intercept=intercept,
        residual=residual,
        window=(float(t[rows[0]]), float(t[rows[-1]])),
        angle=math.atan(slope),
        n_rows=int(rows.size),
        v0=float(v0),
    )


def _tan(obj) -> float:
    if hasattr(obj, "slope"):
        return float(obj.slope)
    if hasattr(obj, "angle"):
        return math.tan(obj.angle)
    return math.tan(float(obj))


def check_spacetime_snell(fit_in, fit_out, medium1: DispersiveMedium, medium2: DispersiveMedium) -> float:
    """Relative mismatch |n1 tan(t1) - n2 tan(t2)| / (n1 tan(t1)).

    ``fit_in``/``fit_out`` may be WorldlineFit, RayWorldline or bare angles.
    """
    lhs = medium1.n * _tan(fit_in)
    rhs = medium2.n * _tan(fit_out)
    return abs(lhs - rhs) / abs(lhs)


def broadening(packet: GaussianSpectrum, distance_L: float) -> BroadeningDiagnostics:
    """Compare the dispersive broadening time with the propagation time over L."""
    if not distance_L > 0:
        raise ValueError(f"distance_L must be positive, got {distance_L}")
    width = packet.rms_width
    wavelength = 2.0 * math.pi / packet.k0
    f = width**2 / (wavelength * distance_L)
    return BroadeningDiagnostics(
        t_broad=width**2,
        t_prop=distance_L / packet.k0,
        fresnel_f=f,
        regime="dispersive" if f < 1 else "ray-like",
        width=width,
        wavelength=wavelength,
        distance=float(distance_L),
    )


def width_ratio(k: float, zeeman: ZeemanStep) -> tuple[float, float]:
    """Transmitted/incident width ratios (up, down) = sqrt(1 +/- 2 mu B / k^2)."""
    s = 2.0 * zeeman.mu_b / (k * k)
    if s >= 1:
        raise EvanescentRegime(f"k^2 = {k * k:.6g} <= 2 mu B = {2 * zeeman.mu_b:.6g}")
    return math.sqrt(1.0 + s), math.sqrt(1.0 - s)


def fringe_period(rho: np.ndarray, x: np.ndarray, region: str = "left", smooth_length: float = 2.0) -> float:
    """Dominant spatial period of the density fringes in one row.

    The smooth envelope (Gaussian filter of ``smooth_length``, which must
    exceed the fringe period and stay below the packet width) is removed
    and the first autocorrelation maximum is located with parabolic
    refinement.
    """
    from .dynamics import region_mask

    mask = region_mask(x, region)
    xs = x[mask]
    dx = float(xs[1] - xs[0])
    s = rho[mask] - gaussian_filter1d(rho[mask], smooth_length / dx, mode="nearest")
    n = s.size
    ac = np.correlate(s, s, mode="full")[n - 1 :]
    if ac[0] <= 0:
        raise EmptyRegion("no fringe signal in region")
    ac = ac / ac[0]
    for m in range(1, n - 1):
        if ac[m] > 0 and ac[m - 1] < ac[m] >= ac[m + 1]:
            a, b, c = ac[m - 1], ac[m], ac[m + 1]
            denom = a - 2 * b + c
            offset = 0.5 * (a - c) / denom if denom != 0 else 0.0
            return (m + offset) * dx
    raise EmptyRegion("autocorrelation has no positive peak")


def spectral_split(packet: GaussianSpectrum, step: StepPotential, quad: KQuadrature | None = None):
    """Spectral (reflected norm, transmitted norm, mean transmitted velocity).

    Weights every component by |A(k)|^2 and its flux reflection and
    transmission probabilities.  The mean velocity is the asymptotic
    centroid speed of the transmitted lobe.
    """
    if quad is None:
        quad = KQuadrature.for_packet(packet)
    k, w = quad.nodes(branch_point(step))
    weight = w * np.abs(spectral_amplitude(packet, k)) ** 2
    r, t, kp = amplitude_arrays(k, step)
    trans = np.where(kp.imag > 0, 0.0, kp.real / k * np.abs(t) ** 2)
    total = weight.sum()
    t_norm = float(np.sum(weight * trans) / total)
    r_norm = float(np.sum(weight * np.abs(r) ** 2) / total)
    mean_v = float(np.sum(weight * trans * kp.real) / np.sum(weight * trans)) if t_norm > 0 else 0.0
    return r_norm, t_norm, mean_v
