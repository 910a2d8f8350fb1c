"""Wave-packet dynamics by spectral superposition of exact step eigenstates.

psi(x, T) = sum_j w_j A(k_j) psi_{k_j}(x) exp(-i k_j^2 T / 2)

Each grid point is an independent sum over quadrature nodes, always
accumulated in node order, so the result does not depend on how rows
are distributed over worker threads.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import EmptyRegion, NormLeakageWarning
from .model import DensityField, GaussianSpectrum, SpacetimeGrid, StepPotential
from .scattering import amplitude_arrays

RULES = ("gauss-legendre", "trapezoid")
DEFAULT_NODES = 1024
WINDOW_SIGMAS = 6.0
K_FLOOR = 1e-6
# rows per work unit; fixed so the partition never depends on the thread count
CHUNK_ROWS = 16
LEAKAGE_THRESHOLD = 0.999
EMPTY_NORM = 1e-9


@dataclass(frozen=True)
class KQuadrature:
    k_lo: float
    k_hi: float
    n_nodes: int = DEFAULT_NODES
    rule: str = "gauss-legendre"

    def __post_init__(self):
        if not self.k_lo > 0:
            raise ValueError(f"k_lo must be positive, got {self.k_lo}")
        if not self.k_lo < self.k_hi:
            raise ValueError(f"need k_lo < k_hi, got [{self.k_lo}, {self.k_hi}]")
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 16:
            raise ValueError(f"n_nodes must be an integer >= 16, got {self.n_nodes}")
        if self.rule not in RULES:
            raise ValueError(f"rule must be one of {RULES}, got {self.rule!r}")
        object.__setattr__(self, "n_nodes", int(self.n_nodes))

    @classmethod
    def for_packet(
        cls, packet: GaussianSpectrum, n_nodes: int = DEFAULT_NODES, rule: str = "gauss-legendre"
    ) -> "KQuadrature":
        """Default window k0 +/- 6 dk, clipped at a small positive floor."""
        lo = max(packet.k0 - WINDOW_SIGMAS * packet.dk, K_FLOOR)
        hi = packet.k0 + WINDOW_SIGMAS * packet.dk
        return cls(lo, hi, n_nodes, rule)

    def _rule(self, lo: float, hi: float, n: int) -> tuple[np.ndarray, np.ndarray]:
        if self.rule == "gauss-legendre":
            u, w = np.polynomial.legendre.leggauss(n)
            half = 0.5 * (hi - lo)
            return 0.5 * (hi + lo) + half * u, half * w
        u = np.linspace(lo, hi, n)
        w = np.full(n, (hi - lo) / (n - 1))
        w[0] *= 0.5
        w[-1] *= 0.5
        return u, w

    def nodes(self, branch_point: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Return (k_j, w_j) on [k_lo, k_hi], sorted by k.

        When ``branch_point`` k_c = sqrt(2 dV) lies inside the window the
        integrand has a square-root branch point there.  The window is
        then split at k_c and each side integrated in the variable that
        makes it analytic: kappa = sqrt(k_c^2 - k^2) below and
        k' = sqrt(k^2 - k_c^2) above.  The node budget is shared in
        proportion to the two transformed lengths.
        """
        kc = branch_point
        if kc is None or not self.k_lo < kc < self.k_hi:
            return self._rule(self.k_lo, self.k_hi, self.n_nodes)
        kappa_max = math.sqrt(kc * kc - self.k_lo**2)
        q_max = math.sqrt(self.k_hi**2 - kc * kc)
        n_low = int(round(self.n_nodes * kappa_max / (kappa_max + q_max)))
        n_low = min(max(n_low, 8), self.n_nodes - 8)
        kappa, wk = self._rule(0.0, kappa_max, n_low)
        q, wq = self._rule(0.0, q_max, self.n_nodes - n_low)
        k_low = np.sqrt(kc * kc - kappa**2)
        k_high = np.sqrt(kc * kc + q**2)
        # dk = (kappa/k) dkappa below, (k'/k) dk' above
        w_low = wk * kappa / k_low
        w_high = wq * q / k_high
        # clamp: the substitution can overshoot the window edges by an ulp
        k = np.clip(np.concatenate([k_low[::-1], k_high]), self.k_lo, self.k_hi)
        w = np.concatenate([w_low[::-1], w_high])
        return k, w


def branch_point(step: StepPotential) -> float | None:
    """Threshold wave number sqrt(2 dV) of an upward step, else None."""
    return math.sqrt(2.0 * step.height) if step.height > 0 else None


@dataclass(frozen=True)
class ZeemanStep:
    """Zeeman energy mu*B switched on for x > 0."""

    mu_b: float

    def __post_init__(self):
        if not (math.isfinite(self.mu_b) and self.mu_b >= 0):
            raise ValueError(f"mu_b must be finite and >= 0, got {self.mu_b}")

    @property
    def up(self) -> StepPotential:
        return StepPotential(0.0, -self.mu_b)

    @property
    def down(self) -> StepPotential:
        return StepPotential(0.0, self.mu_b)


@dataclass(frozen=True)
class SpinorPacket:
    packet: GaussianSpectrum
    weight_up: complex = 1 / math.sqrt(2)
    weight_down: complex = 1 / math.sqrt(2)

    def __post_init__(self):
        total = abs(self.weight_up) ** 2 + abs(self.weight_down) ** 2
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"|weight_up|^2 + |weight_down|^2 must be 1, got {total!r}")


def spectral_amplitude(packet: GaussianSpectrum, k):
    """Unnormalised Gaussian amplitude exp(-i k x0) exp(-(k-k0)^2 / (2 dk^2)).

    The phase factor places the packet centre at x0 at T = 0.
    """
    k = np.asarray(k, dtype=float)
    if np.any(k <= 0):
        raise ValueError("spectral amplitude is only defined for k > 0")
    out = np.exp(-1j * k * packet.x0) * np.exp(-((k - packet.k0) ** 2) / (2 * packet.dk**2))
    return out[()] if out.ndim == 0 else out


def _spatial_modes(k, step, x, include_evanescent):
    r, t, kp = amplitude_arrays(k, step)
    if not include_evanescent:
        # propagating-only amplitudes: nodes below threshold scatter nothing
        below = kp.imag > 0
        r = np.where(below, 0, r)
        t = np.where(below, 0, t)
    split = int(np.searchsorted(x, 0.0, side="left"))
    xl, xr = x[:split], x[split:]
    modes = np.empty((k.size, x.size), dtype=complex)
    modes[:, :split] = np.exp(1j * np.outer(k, xl)) + r[:, None] * np.exp(-1j * np.outer(k, xl))
    modes[:, split:] = t[:, None] * np.exp(1j * np.outer(kp, xr))
    return modes


def _accumulate(coef_re, coef_im, mode_re, mode_im, out_re, out_im, rows):
    # exactly rounded elementwise ops in node order: bit-identical for any row partition
    sl = slice(*rows)
    acc_re = out_re[sl]
    acc_im = out_im[sl]
    shape = acc_re.shape
    t1 = np.empty(shape)
    t2 = np.empty(shape)
    for j in range(mode_re.shape[0]):
        er = coef_re[j, sl, None]
        ei = coef_im[j, sl, None]
        np.multiply(er, mode_re[j], out=t1)
        acc_re += t1
        np.multiply(ei, mode_im[j], out=t2)
        acc_re -= t2
        np.multiply(er, mode_im[j], out=t1)
        acc_im += t1
        np.multiply(ei, mode_re[j], out=t2)
        acc_im += t2


def superpose(coef: np.ndarray, modes: np.ndarray, threads: int = 1) -> np.ndarray:
    """sum_j coef[t, j] * modes[j, x] with a fixed per-point summation order.

    Parameters
    ----------
    coef : (nt, nk) complex array
    modes : (nk, nx) complex array
    threads : int
        Worker threads.  Affects wall time only, never the result bits.
    """
    nt = coef.shape[0]
    nx = modes.shape[1]
    coef_re = np.ascontiguousarray(coef.real.T)
    coef_im = np.ascontiguousarray(coef.imag.T)
    mode_re = np.ascontiguousarray(modes.real)
    mode_im = np.ascontiguousarray(modes.imag)
    out_re = np.zeros((nt, nx))
    out_im = np.zeros((nt, nx))
    chunks = [(i, min(i + CHUNK_ROWS, nt)) for i in range(0, nt, CHUNK_ROWS)]
    args = (coef_re, coef_im, mode_re, mode_im, out_re, out_im)
    if threads <= 1:
        for rows in chunks:
            _accumulate(*args, rows)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda rows: _accumulate(*args, rows), chunks))
    return out_re + 1j * out_im


def density_of(psi: np.ndarray) -> np.ndarray:
    return psi.real**2 + psi.imag**2


def evolve_step(
    packet: GaussianSpectrum,
    step: StepPotential,
    quad: KQuadrature | None,
    grid: SpacetimeGrid,
    *,
    threads: int = 1,
    include_evanescent: bool = True,
) -> tuple[DensityField, np.ndarray]:
    """Evolve a Gaussian packet scattering off ``step`` over ``grid``.

    The field is scaled so that the trapezoid norm of the first time row
    is exactly 1; the same factor is used for every row.  A
    NormLeakageWarning is issued when that first row holds less than
    0.999 of the packet's total (Parseval) norm, i.e. the x-window clips it.

    ``include_evanescent=False`` zeroes the scattered waves of all nodes
    below the step threshold.  It exists only as a negative control.

    Returns
    -------
    (DensityField, ndarray)
        Density and the complex field psi, both of shape (nt, nx).
    """
    if quad is None:
        quad = KQuadrature.for_packet(packet)
    x, t = grid.x, grid.t
    k, w = quad.nodes(branch_point(step))
    weighted = w * spectral_amplitude(packet, k)
    modes = _spatial_modes(k, step, x, include_evanescent)
    coef = weighted[None, :] * np.exp(-0.5j * np.outer(t, k * k))
    psi = superpose(coef, modes, threads=threads)

    # delta-normalised eigenstates: total norm = 2 pi * integral |A(k)|^2 dk
    parseval = 2.0 * math.pi * float(np.sum(w * np.abs(spectral_amplitude(packet, k)) ** 2))
    first = float(np.trapezoid(density_of(psi[0]), x))
    captured = first / parseval
    if captured < LEAKAGE_THRESHOLD:
        warnings.warn(
            f"initial row holds only {captured:.5f} of the packet norm; "
            "widen the x-window",
            NormLeakageWarning,
            stacklevel=2,
        )
    psi *= 1.0 / math.sqrt(first)
    return DensityField(grid, density_of(psi)), psi


def evolve_spinor(
    spinor: SpinorPacket,
    zeeman: ZeemanStep,
    quad: KQuadrature | None,
    grid: SpacetimeGrid,
    *,
    threads: int = 1,
) -> tuple[DensityField, DensityField, DensityField]:
    """Evolve both spin channels independently and combine their densities.

    Spin up sees the step 0 -> -mu B, spin down 0 -> +mu B.  Returns
    (total, up, down) where up and down are already weighted by
    |weight|^2, so total = up + down.
    """
    up, _ = evolve_step(spinor.packet, zeeman.up, quad, grid, threads=threads)
    down, _ = evolve_step(spinor.packet, zeeman.down, quad, grid, threads=threads)
    up_w = abs(spinor.weight_up) ** 2 * up.values
    down_w = abs(spinor.weight_down) ** 2 * down.values
    return (
        DensityField(grid, up_w + down_w),
        DensityField(grid, up_w),
        DensityField(grid, down_w),
    )


REGIONS = ("all", "left", "right")


def region_mask(x: np.ndarray, region: str) -> np.ndarray:
    if region == "all":
        return np.ones(x.shape, dtype=bool)
    if region == "left":
        return x < 0
    if region == "right":
        return x >= 0
    raise ValueError(f"region must be one of {REGIONS}, got {region!r}")


def density_moments(rho: np.ndarray, x: np.ndarray, region: str = "all"):
    """(norm, centroid, rms width) of a density row restricted to ``region``."""
    mask = region_mask(x, region)
    xs = x[mask]
    rs = rho[mask]
    if xs.size < 2:
        raise EmptyRegion(f"region {region!r} contains fewer than two grid points")
    norm = float(np.trapezoid(rs, xs))
    if norm < EMPTY_NORM:
        raise EmptyRegion(f"norm {norm:.3g} in region {region!r} is below {EMPTY_NORM}")
    centroid = float(np.trapezoid(xs * rs, xs)) / norm
    var = float(np.trapezoid((xs - centroid) ** 2 * rs, xs)) / norm
    return norm, centroid, math.sqrt(max(var, 0.0))


def observables(psi_row: np.ndarray, x: np.ndarray, region: str = "all"):
    """Norm, centroid and rms width of |psi|^2 on one time row."""
    return density_moments(density_of(np.asarray(psi_row)), np.asarray(x, dtype=float), region)


def regional_norms(density: DensityField, region: str) -> np.ndarray:
    """Trapezoid norm of every time row over ``region`` (zero where empty)."""
    x = density.grid.x
    mask = region_mask(x, region)
    return np.trapezoid(density.values[:, mask], x[mask], axis=1)
