"""Single-photon spectral and temporal modes, and spectral phase encoding.

All frequencies are angular offsets from the atomic transition (rotating
frame), so ``omega = 0`` is resonance. Times and rates share one arbitrary
unit; the rest of the package usually works with ``gamma = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import czt

# Sub-bins per chip / per uncoded band on the default frequency grids.
CHIP_SUBDIVISION = 16
UNCODED_SUBDIVISION = 256
# to_time refuses a coded spectrum sampled more coarsely than chip_width / 8.
MIN_SAMPLES_PER_CHIP = 8

_GRID_RTOL = 1e-9


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform angular-frequency grid ``center + (k - (count-1)/2) * spacing``."""

    center: float
    spacing: float
    count: int

    def __post_init__(self):
        if not self.spacing > 0:
            raise ValueError(f"frequency spacing must be positive, got {self.spacing}")
        if int(self.count) != self.count or self.count < 1:
            raise ValueError(f"frequency grid count must be a positive integer, got {self.count}")

    @property
    def omega(self) -> np.ndarray:
        k = np.arange(self.count)
        return self.center + (k - (self.count - 1) / 2) * self.spacing

    @property
    def edges(self) -> tuple[float, float]:
        """Outer cell boundaries, i.e. the band the samples represent."""
        half = self.count * self.spacing / 2
        return self.center - half, self.center + half

    def matches(self, other: FrequencyGrid) -> bool:
        return (
            self.count == other.count
            and math.isclose(self.spacing, other.spacing, rel_tol=_GRID_RTOL)
            and math.isclose(self.center, other.center, rel_tol=_GRID_RTOL, abs_tol=_GRID_RTOL * self.spacing)
        )


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid ``t_start + k * dt`` for ``k = 0 .. count-1``."""

    t_start: float
    dt: float
    count: int

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"time step must be positive, got {self.dt}")
        if int(self.count) != self.count or self.count < 1:
            raise ValueError(f"time grid count must be a positive integer, got {self.count}")

    @classmethod
    def spanning(cls, t_min: float, t_max: float, dt: float) -> TimeGrid:
        """Grid on integer multiples of ``dt`` covering ``[t_min, t_max]``.

        Keeping t = 0 on the grid puts the sinc maximum and the edge of the
        optimal mode exactly on a sample.
        """
        if not t_max > t_min:
            raise ValueError(f"empty time window [{t_min}, {t_max}]")
        k0 = math.floor(t_min / dt + 1e-9)
        k1 = math.ceil(t_max / dt - 1e-9)
        return cls(k0 * dt, dt, k1 - k0 + 1)

    @property
    def t(self) -> np.ndarray:
        return self.t_start + np.arange(self.count) * self.dt

    @property
    def t_end(self) -> float:
        return self.t_start + (self.count - 1) * self.dt

    def matches(self, other: TimeGrid) -> bool:
        return (
            self.count == other.count
            and math.isclose(self.dt, other.dt, rel_tol=_GRID_RTOL)
            and math.isclose(self.t_start, other.t_start, rel_tol=_GRID_RTOL, abs_tol=_GRID_RTOL * self.dt)
        )


@dataclass(frozen=True, eq=False)
class SpectralAmplitude:
    """Spectral mode xi(omega) on a frequency grid.

    ``peak_power`` and ``bandwidth`` are bookkeeping for the rectangular
    family. ``chip_width`` is set once a chip code has been applied and tells
    :func:`to_time` how fine the grid has to be.
    """

    grid: FrequencyGrid
    values: np.ndarray
    peak_power: float
    bandwidth: float
    chip_width: float | None = None

    def __post_init__(self):
        values = _frozen(self.values, complex)
        if values.shape != (self.grid.count,):
            raise ValueError(f"expected {self.grid.count} spectral samples, got shape {values.shape}")
        object.__setattr__(self, "values", values)

    @property
    def mass(self) -> float:
        """Squared L2 norm, sum |xi|^2 d omega."""
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.spacing)

    @property
    def norm(self) -> float:
        return math.sqrt(self.mass)

    def normalized(self) -> SpectralAmplitude:
        mass = self.mass
        if mass == 0:
            raise ValueError("cannot normalize an all-zero spectrum")
        return SpectralAmplitude(
            self.grid, self.values / math.sqrt(mass), self.peak_power, self.bandwidth, self.chip_width
        )


@dataclass(frozen=True, eq=False)
class TemporalMode:
    """Temporal mode xi(t) sampled on a time grid.

    ``full_mass`` is the squared L2 norm of the mode on the whole real line
    when it is known analytically (rectangular family, by Parseval); the
    window may hold less of it. A mode with ``normalized=True`` has unit
    norm with respect to the reference it was normalized against, see
    :func:`normalize`.
    """

    grid: TimeGrid
    values: np.ndarray
    normalized: bool = False
    full_mass: float | None = None

    def __post_init__(self):
        values = _frozen(self.values, complex)
        if values.shape != (self.grid.count,):
            raise ValueError(f"expected {self.grid.count} temporal samples, got shape {values.shape}")
        object.__setattr__(self, "values", values)

    @property
    def grid_mass(self) -> float:
        """sum |xi(t_k)|^2 dt over the window."""
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.dt)

    @property
    def truncated_mass(self) -> float | None:
        """Fraction of the full-line mass that lies outside the window."""
        if self.full_mass is None:
            return None
        return max(0.0, 1.0 - self.grid_mass / self.full_mass)

    def scaled(self, factor: complex) -> TemporalMode:
        full = None if self.full_mass is None else self.full_mass * abs(factor) ** 2
        return TemporalMode(self.grid, self.values * factor, False, full)


@dataclass(frozen=True, eq=False)
class PhaseCode:
    """Chip phases phi_n (radians) for ``n0`` equal-width spectral chips."""

    phases: np.ndarray
    chip_width: float
    _binary: bool = field(init=False, repr=False)

    def __post_init__(self):
        phases = _frozen(self.phases, float)
        if phases.ndim != 1 or phases.size < 1:
            raise ValueError("a phase code needs at least one chip")
        if not self.chip_width > 0:
            raise ValueError(f"chip width must be positive, got {self.chip_width}")
        if not np.all(np.isfinite(phases)):
            raise ValueError("chip phases must be finite")
        object.__setattr__(self, "phases", phases)
        binary = bool(np.all((phases == 0.0) | (phases == np.pi)))
        object.__setattr__(self, "_binary", binary)

    @classmethod
    def for_bandwidth(cls, phases, bandwidth: float) -> PhaseCode:
        """Code whose chips tile a band of total width ``bandwidth``."""
        phases = np.asarray(phases, dtype=float)
        return cls(phases, bandwidth / phases.size)

    @classmethod
    def random_binary(cls, n0: int, bandwidth: float, rng: np.random.Generator) -> PhaseCode:
        bits = rng.integers(0, 2, size=n0)
        return cls.for_bandwidth(np.pi * bits, bandwidth)

    @property
    def n0(self) -> int:
        return self.phases.size

    @property
    def bandwidth(self) -> float:
        return self.chip_width * self.n0

    @property
    def is_binary(self) -> bool:
        return self._binary

    @property
    def period(self) -> float:
        """Comb period 2 pi / chip_width."""
        return 2 * np.pi / self.chip_width

    def chip_indices(self) -> np.ndarray:
        """Chip centre indices n: integers for odd n0, half-integers for even n0."""
        return np.arange(self.n0) - (self.n0 - 1) / 2


def sinc(x):
    """Unnormalized sinc, sin(x)/x with sinc(0) = 1."""
    return np.sinc(np.asarray(x) / np.pi)


def default_frequency_grid(bandwidth: float, n0: int | None = None, *, subdivision: int | None = None,
                           pad_cells: int = 0) -> FrequencyGrid:
    """Grid whose cells tile ``[-W/2, W/2]`` exactly, plus ``pad_cells`` empty cells per side.

    With a code of ``n0`` chips every chip gets ``subdivision`` cells
    (default 16); uncoded bands get 256 cells.
    """
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    if n0 is None:
        cells = subdivision or UNCODED_SUBDIVISION
    else:
        cells = n0 * (subdivision or CHIP_SUBDIVISION)
    spacing = bandwidth / cells
    return FrequencyGrid(0.0, spacing, cells + 2 * pad_cells)


def default_time_grid(gamma: float, bandwidth: float, n0: int | None = None, *, dt: float | None = None,
                      lobes: float = 2.0, lead: float = 60.0, tail: float = 30.0) -> TimeGrid:
    """Default window ``[-max(lead/gamma, lobes*T), +max(tail/gamma, lobes*T)]``.

    ``T = 2 pi / chip_width`` is the comb period (``2 pi / W`` uncoded). The
    step defaults to ``min(2 pi / (8 W), 0.01 / gamma)``; for coded modes it
    is shrunk slightly so that ``T`` is an integer number of steps, which
    lets :func:`encoded_temporal_closed_form` tile one comb period.
    """
    if not gamma > 0 or not bandwidth > 0:
        raise ValueError("gamma and bandwidth must be positive")
    chip = bandwidth / (n0 or 1)
    period = 2 * np.pi / chip
    step = dt if dt is not None else min(2 * np.pi / (8 * bandwidth), 0.01 / gamma)
    if n0 is not None and n0 > 1:
        step = period / math.ceil(period / step - 1e-9)
    lo = max(lead / gamma, lobes * period)
    hi = max(tail / gamma, lobes * period)
    return TimeGrid.spanning(-lo, hi, step)


def rect_spectrum(bandwidth: float, peak_power: float, grid: FrequencyGrid) -> SpectralAmplitude:
    """Flat spectrum sqrt(P0)/W on [-W/2, W/2], zero elsewhere."""
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    if peak_power < 0:
        raise ValueError(f"peak power must be non-negative, got {peak_power}")
    lo, hi = grid.edges
    slack = 1e-9 * bandwidth
    if lo > -bandwidth / 2 + slack or hi < bandwidth / 2 - slack:
        raise ValueError(
            f"frequency grid [{lo:.6g}, {hi:.6g}] is narrower than the band "
            f"[{-bandwidth / 2:.6g}, {bandwidth / 2:.6g}]"
        )
    omega = grid.omega
    inside = np.abs(omega) <= bandwidth / 2
    values = np.where(inside, math.sqrt(peak_power) / bandwidth, 0.0)
    return SpectralAmplitude(grid, values, peak_power, bandwidth)


def sinc_temporal(bandwidth: float, peak_power: float, tgrid: TimeGrid) -> TemporalMode:
    """sqrt(P0) sinc(W t / 2), the temporal shape of the flat spectrum.

    This is the printed closed form, which omits the 1/sqrt(2 pi) of the
    unitary transform; ``full_mass`` records its true norm 2 pi P0 / W.
    """
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    values = math.sqrt(peak_power) * sinc(bandwidth * tgrid.t / 2)
    return TemporalMode(tgrid, values, False, 2 * np.pi * peak_power / bandwidth)


def chip_phase_mask(code: PhaseCode, grid: FrequencyGrid) -> np.ndarray:
    """Piecewise-constant phase theta(omega) of a chip code.

    Chip j covers ``[-W/2 + j*Omega, -W/2 + (j+1)*Omega)``. For odd n0 the
    middle chip is centred on resonance; for even n0 resonance falls on the
    boundary between the two central chips. Outside the coded band theta = 0.
    """
    omega = grid.omega
    half = code.bandwidth / 2
    pos = (omega + half) / code.chip_width
    # cell midpoints never sit on a chip edge for aligned grids; guard rounding anyway
    j = np.floor(pos + 1e-9).astype(int)
    inside = (j >= 0) & (j < code.n0)
    theta = np.zeros(grid.count)
    theta[inside] = code.phases[j[inside]]
    return theta


def apply_spectral_phase(xi: SpectralAmplitude, theta, *, chip_width: float | None = None) -> SpectralAmplitude:
    """Encoded spectrum xi(omega) * exp(-i theta(omega))."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != xi.values.shape:
        raise ValueError(
            f"phase mask has shape {theta.shape} but the spectrum has {xi.values.shape}; grids differ"
        )
    chip = chip_width if chip_width is not None else xi.chip_width
    return SpectralAmplitude(xi.grid, xi.values * np.exp(-1j * theta), xi.peak_power, xi.bandwidth, chip)


def encode(xi: SpectralAmplitude, code: PhaseCode) -> SpectralAmplitude:
    """Apply a chip code to a spectrum, recording the chip width."""
    return apply_spectral_phase(xi, chip_phase_mask(code, xi.grid), chip_width=code.chip_width)


def to_time(xi: SpectralAmplitude, tgrid: TimeGrid) -> TemporalMode:
    """xi(t) = (2 pi)^-1/2 int xi(omega) exp(-i omega t) d omega.

    The spectrum is taken as constant over each grid cell and every cell is
    integrated exactly, which multiplies the midpoint sum by
    sinc(d omega t / 2). The sum is evaluated on the uniform output grid with
    a chirp-z transform. For the rectangular family the result is exact.
    """
    fgrid = xi.grid
    if xi.chip_width is not None:
        needed = xi.chip_width / MIN_SAMPLES_PER_CHIP
        if fgrid.spacing > needed * (1 + 1e-9):
            raise ValueError(
                f"frequency grid under-resolves the chip code: spacing {fgrid.spacing:.6g} "
                f"exceeds chip_width/{MIN_SAMPLES_PER_CHIP} = {needed:.6g}"
            )
    omega0 = fgrid.omega[0]
    j = np.arange(fgrid.count)
    x = xi.values * np.exp(-1j * j * fgrid.spacing * tgrid.t_start)
    w = np.exp(-1j * fgrid.spacing * tgrid.dt)
    summed = czt(x, m=tgrid.count, w=w, a=1.0)
    cell = fgrid.spacing * sinc(fgrid.spacing * tgrid.t / 2)
    values = np.exp(-1j * omega0 * tgrid.t) * summed * cell / math.sqrt(2 * np.pi)
    return TemporalMode(tgrid, values, False, xi.mass)


def _comb(code: PhaseCode, t: np.ndarray) -> np.ndarray:
    """sum_n exp(-i (n Omega t + phi_n)) by Horner in z = exp(-i Omega t)."""
    coeffs = np.exp(-1j * code.phases)
    z = np.exp(-1j * code.chip_width * t)
    acc = np.full(t.shape, coeffs[-1], dtype=complex)
    for c in coeffs[-2::-1]:
        acc = acc * z + c
    n_min = code.chip_indices()[0]
    return acc * np.exp(-1j * n_min * code.chip_width * t)


def encoded_temporal_closed_form(code: PhaseCode, bandwidth: float, peak_power: float,
                                 tgrid: TimeGrid) -> TemporalMode:
    """(sqrt(P0)/N0) sinc(Omega t/2) sum_n exp[-i(n Omega t + phi_n)] for odd N0.

    When the comb period is an integer number of grid steps the comb is
    computed on one period and tiled.
    """
    if code.n0 % 2 == 0:
        raise ValueError(
            f"closed form needs an odd code length (got N0={code.n0}); "
            "use to_time(encode(...)) for even lengths"
        )
    if not math.isclose(code.bandwidth, bandwidth, rel_tol=1e-9):
        raise ValueError(f"code spans {code.bandwidth:.6g} but the mode bandwidth is {bandwidth:.6g}")
    t = tgrid.t
    steps = code.period / tgrid.dt
    m = round(steps)
    if abs(steps - m) < 1e-9 * steps and m < tgrid.count:
        one_period = _comb(code, t[:m])
        comb = np.resize(one_period, tgrid.count)
    else:
        comb = _comb(code, t)
    envelope = math.sqrt(peak_power) / code.n0 * sinc(code.chip_width * t / 2)
    return TemporalMode(tgrid, envelope * comb, False, 2 * np.pi * peak_power / bandwidth)


def normalize(mode: TemporalMode, reference: str = "grid") -> TemporalMode:
    """Scale a mode to unit norm.

    ``reference="grid"`` makes sum |xi|^2 dt = 1 on the window.
    ``reference="line"`` divides by the analytic full-line norm instead, so
    samples keep their physical amplitude and a truncated window holds
    slightly less than unit mass.
    """
    if reference == "grid":
        mass = mode.grid_mass
    elif reference == "line":
        if mode.full_mass is None:
            raise ValueError("mode has no known full-line norm; use reference='grid'")
        mass = mode.full_mass
    else:
        raise ValueError(f"unknown normalization reference {reference!r}")
    if mass == 0:
        raise ValueError("cannot normalize an all-zero mode")
    scale = 1 / math.sqrt(mass)
    full = 1.0 if reference == "line" else (None if mode.full_mass is None else mode.full_mass * scale**2)
    return TemporalMode(mode.grid, mode.values * scale, True, full)


def intensity_trace(mode: TemporalMode) -> np.ndarray:
    """|xi(t)|^2 per sample."""
    return np.abs(mode.values) ** 2
