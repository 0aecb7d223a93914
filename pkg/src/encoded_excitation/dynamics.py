"""Single-excitation dynamics of a two-level atom driven by a one-photon mode.

The excited-state amplitude obeys

    dc/dt = -(Gamma_tot/2 + i Delta) c + sqrt(gamma) xi(t),   c(t_start) = 0,

and P_e(t) = |c(t)|^2. The equation is linear, so it is propagated exactly
between samples with the drive interpolated linearly (first-order hold).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .signal import TemporalMode, TimeGrid

# excite() rejects grids coarser than this many decay times per step.
MAX_STEP_DECAY = 0.05
# optimal_mode() needs this many 1/Gamma of lead-in before its edge.
OPTIMAL_LEAD = 40.0
# Tolerance on the unit-norm precondition of excite().
NORM_TOL = 1e-6


@dataclass(frozen=True)
class AtomParams:
    """Coupling rate into the input channel, total decay rate and detuning.

    ``gamma_tot`` defaults to ``gamma`` (beta = 1, the figure setting).
    """

    gamma: float
    gamma_tot: float | None = None
    delta: float = 0.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.gamma_tot is None:
            object.__setattr__(self, "gamma_tot", float(self.gamma))
        if self.gamma_tot < self.gamma:
            raise ValueError(f"gamma_tot ({self.gamma_tot}) must be >= gamma ({self.gamma})")
        if not math.isfinite(self.delta):
            raise ValueError("detuning must be finite")

    @classmethod
    def from_beta(cls, gamma: float, beta: float, delta: float = 0.0) -> AtomParams:
        if not 0 < beta <= 1:
            raise ValueError(f"beta must lie in (0, 1], got {beta}")
        return cls(gamma, gamma / beta, delta)

    @property
    def beta(self) -> float:
        return self.gamma / self.gamma_tot

    def as_record(self) -> dict:
        return {"gamma": self.gamma, "gamma_tot": self.gamma_tot, "delta": self.delta, "beta": self.beta}


@dataclass(frozen=True, eq=False)
class ExcitationTrace:
    grid: TimeGrid
    pe: np.ndarray
    amplitude: np.ndarray
    peak_value: float
    peak_time: float
    bound: float | None
    atom: AtomParams

    def as_record(self) -> dict:
        return {
            "peak_value": self.peak_value,
            "peak_time": self.peak_time,
            "bound": self.bound,
            "params": self.atom.as_record(),
        }


def optimal_mode(gamma: float, tgrid: TimeGrid, *, edge: float = 0.0) -> TemporalMode:
    """Time-reversed emission mode sqrt(gamma) exp(gamma (t - edge)/2) for t <= edge.

    The sample sitting exactly on the edge carries half the intensity, which
    keeps sum |xi|^2 dt second-order accurate across the jump; the result is
    then normalized on the grid.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    need = edge - OPTIMAL_LEAD / gamma
    if tgrid.t_start > need + 1e-9 * abs(need):
        raise ValueError(
            f"time grid starts at {tgrid.t_start:.6g}; the optimal mode needs t_start <= {need:.6g} "
            f"({OPTIMAL_LEAD:g}/gamma before its edge)"
        )
    s = tgrid.t - edge
    on_edge = np.abs(s) <= 1e-9 * tgrid.dt
    weight = np.where(s < 0, 1.0, 0.0)
    weight[on_edge] = math.sqrt(0.5)
    values = math.sqrt(gamma) * np.exp(gamma * np.minimum(s, 0.0) / 2) * weight
    mass = np.sum(values**2) * tgrid.dt
    return TemporalMode(tgrid, values / math.sqrt(mass), True, 1.0)


def _hold_weights(lam: complex, h: float) -> tuple[complex, complex, complex]:
    """Propagator and first-order-hold weights for dc/dt = -lam c + f."""
    x = lam * h
    em1 = np.expm1(-x)
    decay = 1 + em1
    w1 = (x + em1) / (lam * x)
    w0 = -em1 / lam - w1
    return decay, w0, w1


def _check_normalized(mode: TemporalMode):
    if not mode.normalized:
        raise ValueError("excite() needs a normalized mode; call normalize() first")
    if mode.grid_mass > 1 + NORM_TOL:
        raise ValueError(f"mode holds mass {mode.grid_mass:.9g} > 1 on its grid; not a unit-norm mode")


def propagate(xi: TemporalMode, atom: AtomParams) -> np.ndarray:
    """Excited-state amplitude c(t_k) for every sample of the drive."""
    lam = atom.gamma_tot / 2 + 1j * atom.delta
    decay, w0, w1 = _hold_weights(lam, xi.grid.dt)
    f = math.sqrt(atom.gamma) * xi.values
    u = np.empty_like(f)
    u[0] = 0.0
    u[1:] = w0 * f[:-1] + w1 * f[1:]
    return lfilter([1.0], [1.0, -decay], u)


def excite(xi: TemporalMode, atom: AtomParams) -> ExcitationTrace:
    """Excitation probability P_e(t) = |c(t)|^2 driven by a normalized mode."""
    _check_normalized(xi)
    if xi.grid.dt > MAX_STEP_DECAY / atom.gamma_tot * (1 + 1e-12):
        raise ValueError(
            f"time step {xi.grid.dt:.6g} does not resolve the decay; need dt <= "
            f"{MAX_STEP_DECAY / atom.gamma_tot:.6g}"
        )
    c = propagate(xi, atom)
    pe = np.abs(c) ** 2
    k = int(np.argmax(pe))
    try:
        bound = excitation_bound(xi, atom)
    except ValueError:
        bound = None
    pe.setflags(write=False)
    c.setflags(write=False)
    return ExcitationTrace(xi.grid, pe, c, float(pe[k]), float(xi.grid.t[k]), bound, atom)


def temporal_overlap(xi: TemporalMode, eta: TemporalMode) -> complex:
    """<xi|eta> = sum conj(xi) eta dt."""
    if not xi.grid.matches(eta.grid):
        raise ValueError("modes live on different time grids")
    return complex(np.vdot(xi.values, eta.values) * xi.grid.dt)


def excitation_bound(xi: TemporalMode, atom: AtomParams, *, edge: float = 0.0) -> float:
    """beta |<xi|xi_opt>|^2 with the optimal mode of rate Gamma_tot ending at ``edge``.

    With a linear atom this equals P_e(edge) exactly (up to quadrature), so
    only the supremum over ``edge`` bounds the peak of the trace.
    """
    if not xi.normalized:
        raise ValueError("excitation_bound() needs a normalized mode")
    opt = optimal_mode(atom.gamma_tot, xi.grid, edge=edge)
    return atom.beta * abs(temporal_overlap(xi, opt)) ** 2


def peak_excitation(trace: ExcitationTrace) -> tuple[float, float]:
    """Largest P_e and its time; ties go to the earliest sample."""
    k = int(np.argmax(trace.pe))
    return float(trace.pe[k]), float(trace.grid.t[k])
