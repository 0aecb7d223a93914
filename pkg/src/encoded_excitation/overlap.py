"""Spectral overlap between a photon mode and the atomic Lorentzian response.

The normalized overlap

    M[phi, Delta] = int xi(w) e^{i phi(w)} chi(w - Delta) dw / (||xi|| ||chi||),
    chi(w) = sqrt(gamma) / (gamma/2 - i w),

equals <xi_opt|xi> for the rate-gamma optimal mode ending at t = 0, so
|M|^2 is P_e(0) of a beta = 1 atom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .dynamics import optimal_mode, temporal_overlap
from .rng import trial_rngs
from .signal import (
    FrequencyGrid,
    PhaseCode,
    SpectralAmplitude,
    TimeGrid,
    default_frequency_grid,
    rect_spectrum,
    to_time,
)

# lorentzian_chi() insists on this many gamma of span on each side of Delta.
MIN_CHI_SPAN = 20.0
DEFAULT_CHI_SPAN = 64.0
# Full-line squared norm of chi, gamma * 2 pi / gamma.
CHI_MASS = 2 * np.pi

BRACKET = (0.1, 10.0)
ROOT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Susceptibility:
    gamma: float
    delta: float
    grid: FrequencyGrid
    values: np.ndarray


@dataclass(frozen=True)
class OverlapResult:
    m: complex

    @property
    def m_abs2(self) -> float:
        return abs(self.m) ** 2


def chi(omega, gamma: float, delta: float = 0.0):
    return math.sqrt(gamma) / (gamma / 2 - 1j * (np.asarray(omega) - delta))


def chi_grid(gamma: float, delta: float = 0.0, *, span: float = DEFAULT_CHI_SPAN,
             spacing: float | None = None) -> FrequencyGrid:
    """Grid centred on ``delta`` spanning ``+-span*gamma``; spacing defaults to gamma/64."""
    spacing = spacing or gamma / 64
    count = 2 * math.ceil(span * gamma / spacing) + 1
    return FrequencyGrid(delta, spacing, count)


def lorentzian_chi(gamma: float, delta: float, grid: FrequencyGrid) -> Susceptibility:
    """chi(w) = sqrt(gamma) / (gamma/2 - i (w - Delta)) sampled on ``grid``."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    lo, hi = grid.edges
    if lo > delta - MIN_CHI_SPAN * gamma or hi < delta + MIN_CHI_SPAN * gamma:
        raise ValueError(
            f"grid [{lo:.6g}, {hi:.6g}] must span at least +-{MIN_CHI_SPAN:g} gamma around Delta={delta:.6g}"
        )
    return Susceptibility(gamma, delta, grid, chi(grid.omega, gamma, delta))


def _cell_chi_integrals(grid: FrequencyGrid, gamma: float, delta: float) -> np.ndarray:
    """Composite Simpson over each grid cell of chi(w - delta)."""
    w = grid.omega
    h = grid.spacing
    left = chi(w - h / 2, gamma, delta)
    mid = chi(w, gamma, delta)
    right = chi(w + h / 2, gamma, delta)
    return h / 6 * (left + 4 * mid + right)


def spectral_overlap(xi: SpectralAmplitude, phi, delta: float, gamma: float) -> OverlapResult:
    """Normalized overlap M[phi, Delta] by quadrature on the spectrum's grid.

    The spectrum is treated as constant over each grid cell and chi is
    integrated over every cell with Simpson's rule; ||chi|| is the exact
    full-line value sqrt(2 pi).
    """
    phi = np.broadcast_to(np.asarray(phi, dtype=float), xi.values.shape)
    if phi.shape != xi.values.shape:
        raise ValueError("residual phase and spectrum live on different grids")
    mass = xi.mass
    if mass == 0:
        raise ValueError("spectrum is identically zero")
    cells = _cell_chi_integrals(xi.grid, gamma, delta)
    num = np.sum(xi.values * np.exp(1j * phi) * cells)
    return OverlapResult(complex(num / math.sqrt(mass * CHI_MASS)))


def bandwidth_match(bandwidth: float, gamma: float, delta: float = 0.0) -> float:
    """|M[0, Delta]|^2 for a flat band of width W, in closed form.

    int_{-W/2}^{W/2} dw / (gamma/2 - i(w - Delta)) = A + iB with A the
    arctan difference and B the log ratio; |M|^2 = gamma (A^2 + B^2) / (2 pi W).
    """
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    hi = bandwidth / 2 - delta
    lo = -bandwidth / 2 - delta
    A = math.atan(2 * hi / gamma) - math.atan(2 * lo / gamma)
    B = 0.5 * math.log((gamma**2 / 4 + hi**2) / (gamma**2 / 4 + lo**2))
    return gamma * (A**2 + B**2) / (2 * np.pi * bandwidth)


def optimality_residual(x: float) -> float:
    """arctan(x) - 2x/(1+x^2), zero at the optimal W/gamma."""
    return math.atan(x) - 2 * x / (1 + x * x)


def optimal_bandwidth(gamma: float) -> float:
    """Bandwidth maximizing bandwidth_match, from the non-trivial root on [0.1, 10]."""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    x = optimize.brentq(optimality_residual, *BRACKET, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    if abs(optimality_residual(x)) >= ROOT_TOL:
        raise ArithmeticError(f"root finder stopped at residual {optimality_residual(x):.3g}")
    return x * gamma


def _comb_term_closed(n, chip_width: float, gamma: float):
    # (1/Omega) int_{-Omega/2}^{Omega/2} du / (gamma/2 + i(n Omega + u))
    upper = np.log(gamma / 2 + 1j * (n + 0.5) * chip_width)
    lower = np.log(gamma / 2 + 1j * (n - 0.5) * chip_width)
    return -1j * (upper - lower) / chip_width


def _comb_term_quad(n: float, chip_width: float, gamma: float, tail: float) -> complex:
    # int_{-L}^0 sinc(Omega t/2) e^{(gamma/2 + i n Omega) t} dt; dropped tail <= 2 e^{-gamma L/2} / gamma
    length = 2 * tail / gamma

    def part(fn):
        def f(t):
            return np.sinc(chip_width * t / (2 * np.pi)) * math.exp(gamma * t / 2) * fn(n * chip_width * t)

        val, _ = integrate.quad(f, -length, 0.0, limit=400, epsabs=1e-13, epsrel=1e-11)
        return val

    return complex(part(math.cos), part(math.sin))


def coded_overlap_weights(n0: int, chip_width: float, gamma: float, *, method: str = "closed",
                          tail: float = 40.0) -> np.ndarray:
    """Per-chip weights w_n with <xi_e|xi_opt> = sum_n exp(i phi_n) w_n.

    Each weight is sqrt(gamma W / 2 pi) / N0 times the time integral of
    sinc(Omega t/2) e^{(gamma/2 + i n Omega) t} over t <= 0. ``method="closed"``
    uses the exact logarithm; ``method="quad"`` integrates adaptively on
    [-2 tail/gamma, 0], dropping at most 2 e^{-tail}/gamma per term.
    """
    n = np.arange(n0) - (n0 - 1) / 2
    if method == "closed":
        terms = _comb_term_closed(n, chip_width, gamma)
    elif method == "quad":
        terms = np.array([_comb_term_quad(k, chip_width, gamma, tail) for k in n])
    else:
        raise ValueError(f"unknown method {method!r}")
    bandwidth = n0 * chip_width
    return math.sqrt(gamma * bandwidth / (2 * np.pi)) / n0 * terms


def coded_overlap(code: PhaseCode, gamma: float, *, method: str = "closed") -> complex:
    """<xi_e|xi_opt> for the unit-norm encoded flat-band mode, odd N0 only.

    The all-zero code gives the uncoded overlap sqrt(gamma/(2 pi W)) 2 arctan(W/gamma).
    """
    if code.n0 % 2 == 0:
        raise ValueError(f"coded_overlap needs an odd code length, got N0={code.n0}")
    w = coded_overlap_weights(code.n0, code.chip_width, gamma, method=method)
    return complex(np.sum(np.exp(1j * code.phases) * w))


def transform_overlap_weights(n0: int, bandwidth: float, gamma: float, *, dt: float | None = None,
                              subdivision: int = 16) -> np.ndarray:
    """Per-chip weights <chip_j|xi_opt> computed through to_time, any parity.

    Chip j's unit-norm flat-band slice is transformed to the time domain on
    [-40/gamma, 0] and overlapped with the optimal mode there.
    """
    # the jump of xi_opt biases the Riemann overlap by O(gamma dt); 0.002 keeps it near 5e-4
    dt = dt or 0.002 / gamma
    tgrid = TimeGrid.spanning(-40.0 / gamma, 0.0, dt)
    opt = optimal_mode(gamma, tgrid)
    fgrid = default_frequency_grid(bandwidth, n0, subdivision=subdivision)
    flat = rect_spectrum(bandwidth, 1.0, fgrid).normalized()
    chip = np.floor((fgrid.omega + bandwidth / 2) / (bandwidth / n0) + 1e-9).astype(int)
    weights = np.empty(n0, dtype=complex)
    for j in range(n0):
        piece = SpectralAmplitude(fgrid, np.where(chip == j, flat.values, 0.0), 1.0, bandwidth, bandwidth / n0)
        weights[j] = temporal_overlap(to_time(piece, tgrid), opt)
    return weights


def binomial_ci(fraction: float, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("need at least one trial")
    denom = 1 + z * z / trials
    centre = (fraction + z * z / (2 * trials)) / denom
    half = z * math.sqrt(fraction * (1 - fraction) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


def random_binary_signs(n0: int, trials: int, seed: int, *, stream: int = 0) -> np.ndarray:
    """(trials, n0) array of exp(i phi) = +-1 for i.i.d. fair binary codes."""
    rows = [rng.integers(0, 2, size=n0) for rng in trial_rngs(seed, trials, stream=stream)]
    return 1.0 - 2.0 * np.array(rows, dtype=float).reshape(trials, n0)


def parity_comparison(n0_odd: int, n0_even: int, bandwidth: float, gamma: float, trials: int,
                      seed: int = 0, *, threshold: float = 0.01) -> tuple[float, float]:
    """Fractions of random binary codes with |<xi_e|xi_opt>|^2 < threshold * uncoded.

    Odd lengths use the closed-form comb weights; even lengths go through
    the spectral transform. Both share the flat band ``bandwidth``.
    """
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")
    if n0_odd % 2 != 1 or n0_even != n0_odd + 1:
        raise ValueError(f"expected an odd length and its successor, got ({n0_odd}, {n0_even})")
    reference = bandwidth_match(bandwidth, gamma)
    w_odd = coded_overlap_weights(n0_odd, bandwidth / n0_odd, gamma)
    w_even = transform_overlap_weights(n0_even, bandwidth, gamma)
    x_odd = random_binary_signs(n0_odd, trials, seed, stream=0)
    x_even = random_binary_signs(n0_even, trials, seed, stream=1)
    frac_odd = float(np.mean(np.abs(x_odd @ w_odd) ** 2 < threshold * reference))
    frac_even = float(np.mean(np.abs(x_even @ w_even) ** 2 < threshold * reference))
    return frac_odd, frac_even
