"""Ready-made drive modes and ensembles shared by the CLI and the checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

from .dynamics import AtomParams, ExcitationTrace, excite
from .rng import map_trials
from .signal import (
    PhaseCode,
    TemporalMode,
    TimeGrid,
    default_frequency_grid,
    default_time_grid,
    encode,
    encoded_temporal_closed_form,
    normalize,
    rect_spectrum,
    sinc_temporal,
    to_time,
)


def drive_mode(bandwidth: float, tgrid: TimeGrid, code: PhaseCode | None = None, *,
               reference: str = "line") -> TemporalMode:
    """Unit-norm flat-band mode, optionally encoded.

    Odd codes use the closed form, even ones the spectral transform. The
    default ``reference="line"`` keeps the full-line normalization so a
    truncated window holds slightly less than unit mass.
    """
    if code is None:
        mode = sinc_temporal(bandwidth, 1.0, tgrid)
    elif code.n0 % 2 == 1:
        mode = encoded_temporal_closed_form(code, bandwidth, 1.0, tgrid)
    else:
        fgrid = default_frequency_grid(bandwidth, code.n0)
        mode = to_time(encode(rect_spectrum(bandwidth, 1.0, fgrid), code), tgrid)
    return normalize(mode, reference)


def excite_band(bandwidth: float, atom: AtomParams, code: PhaseCode | None = None, *,
                tgrid: TimeGrid | None = None) -> ExcitationTrace:
    """P_e(t) for a flat band of width ``bandwidth`` on the default grid."""
    if tgrid is None:
        tgrid = default_time_grid(atom.gamma_tot, bandwidth, None if code is None else code.n0)
    return excite(drive_mode(bandwidth, tgrid, code), atom)


def _peak_trial(n0, bandwidth, atom, tgrid, rng):
    code = PhaseCode.random_binary(n0, bandwidth, rng)
    return excite(drive_mode(bandwidth, tgrid, code), atom).peak_value


@dataclass(frozen=True)
class EnsemblePoint:
    n0: int
    mean: float
    stderr: float
    trials: int

    @property
    def ci95(self) -> tuple[float, float]:
        return self.mean - 1.96 * self.stderr, self.mean + 1.96 * self.stderr


def ensemble_peak(n0: int, bandwidth: float, atom: AtomParams, trials: int, seed: int, *,
                  workers: int = 1) -> EnsemblePoint:
    """Mean and standard error of peak P_e over random binary codes of length ``n0``."""
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")
    tgrid = default_time_grid(atom.gamma_tot, bandwidth, n0)
    peaks = map_trials(partial(_peak_trial, n0, bandwidth, atom, tgrid), seed, trials,
                       workers=workers, stream=n0)
    err = float(peaks.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return EnsemblePoint(n0, float(peaks.mean()), err, trials)
