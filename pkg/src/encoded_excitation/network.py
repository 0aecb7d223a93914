"""Link-level figures of merit for spectrally encoded photons at an atomic node.

Chip amplitudes ``a_n`` are the per-chip contributions to the decoded
excitation amplitude; with random binary code differences X_n = +-1 the
interference from another user is sum a_n X_n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .overlap import bandwidth_match, optimal_bandwidth
from .rng import map_trials

SIR_THRESHOLD = 3.0
SIGMA_PHI_MAX = 0.3
FLIP_PROB_MAX = 0.05
ADDRESSABILITY_C = 0.3


@dataclass(frozen=True)
class NoiseModel:
    sigma_phi: float = 0.0
    p: float = 0.0

    def __post_init__(self):
        if not self.sigma_phi >= 0:
            raise ValueError(f"sigma_phi must be >= 0, got {self.sigma_phi}")
        if not 0 <= self.p <= 1:
            raise ValueError(f"flip probability must lie in [0, 1], got {self.p}")


@dataclass(frozen=True)
class CrosstalkStats:
    """Monte-Carlo summary of a sampled complex quantity.

    ``var_c`` is the sample variance of the quantity, ``mean_power`` the
    mean of its squared modulus and ``stderr`` the standard error of
    ``mean_power``.
    """

    mean_c: complex
    var_c: float
    mean_power: float
    stderr: float
    trials: int

    @classmethod
    def from_samples(cls, samples) -> CrosstalkStats:
        samples = np.asarray(samples, dtype=complex)
        n = samples.size
        power = np.abs(samples) ** 2
        var = float(np.sum(np.abs(samples - samples.mean()) ** 2) / (n - 1)) if n > 1 else 0.0
        err = float(power.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(complex(samples.mean()), var, float(power.mean()), err, n)


@dataclass(frozen=True)
class CrosstalkScaling:
    n0: tuple[int, ...]
    mean_power: tuple[float, ...]
    stderr: tuple[float, ...]
    slope: float


@dataclass(frozen=True)
class LinkBudget:
    K: int
    n0: int
    sigma_phi: float
    p: float
    w_over_gamma: float
    beta: float
    bandwidth_factor: float
    phase_factor: float
    flip_factor: float
    predicted_pe_factor: float
    predicted_sir: float | None
    passes: dict = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return all(self.passes.values())

    def as_record(self) -> dict:
        return {
            "K": self.K,
            "N0": self.n0,
            "sigma_phi": self.sigma_phi,
            "p": self.p,
            "W_over_gamma": self.w_over_gamma,
            "beta": self.beta,
            "bandwidth_factor": self.bandwidth_factor,
            "phase_factor": self.phase_factor,
            "flip_factor": self.flip_factor,
            "predicted_pe_factor": self.predicted_pe_factor,
            "predicted_sir": self.predicted_sir,
            "pass": dict(self.passes),
        }

    def format_table(self) -> str:
        sir = "inf" if self.predicted_sir is None else f"{self.predicted_sir:.4g}"
        rows = [
            ("users K", f"{self.K}"),
            ("code length N0", f"{self.n0}"),
            ("W / gamma", f"{self.w_over_gamma:.4g}"),
            ("beta", f"{self.beta:.4g}"),
            ("bandwidth factor", f"{self.bandwidth_factor:.4f}"),
            ("phase-noise factor", f"{self.phase_factor:.4f}"),
            ("chip-flip factor", f"{self.flip_factor:.4f}"),
            ("predicted P_e factor", f"{self.predicted_pe_factor:.4f}"),
            ("predicted SIR", sir),
        ]
        rows += [(f"rule {name}", "pass" if ok else "FAIL") for name, ok in self.passes.items()]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def as_chip_amplitudes(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 1 or a.size < 1:
        raise ValueError("chip amplitudes must be a non-empty 1-D sequence")
    if not np.any(a):
        raise ValueError("chip amplitudes are all zero")
    return a


def chip_weights(bandwidth: float, n0: int, gamma: float, delta: float = 0.0) -> np.ndarray:
    """a_n = int_chip xi(w) chi(w - Delta) dw / ||chi|| for the unit-norm flat band."""
    edges = -bandwidth / 2 + bandwidth / n0 * np.arange(n0 + 1)
    logs = np.log(gamma / 2 - 1j * (edges - delta))
    integrals = 1j * math.sqrt(gamma) * np.diff(logs)
    return integrals / math.sqrt(bandwidth) / math.sqrt(2 * np.pi)


def phase_noise_factor(sigma_phi: float) -> float:
    """exp(-sigma^2): mean P_e suppression from Gaussian residual phase."""
    if sigma_phi < 0:
        raise ValueError(f"sigma_phi must be >= 0, got {sigma_phi}")
    return math.exp(-sigma_phi**2)


def chip_flip_power(a, p: float) -> float:
    """Exact <|sum a_n X_n|^2> with independent sign flips of probability p."""
    if not 0 <= p <= 1:
        raise ValueError(f"flip probability must lie in [0, 1], got {p}")
    a = as_chip_amplitudes(a)
    coherent = abs(a.sum()) ** 2
    incoherent = float(np.sum(np.abs(a) ** 2))
    return (1 - 2 * p) ** 2 * coherent + 4 * p * (1 - p) * incoherent


def chip_flip_factor(p: float) -> float:
    """(1 - 2p)^2, the large-N0 limit of chip_flip_power / |sum a|^2."""
    if not 0 <= p <= 1:
        raise ValueError(f"flip probability must lie in [0, 1], got {p}")
    return (1 - 2 * p) ** 2


def _flip_trial(a, p, rng):
    x = np.where(rng.random(a.size) < p, -1.0, 1.0)
    return np.dot(a, x)


def _phase_trial(a, sigma, rng):
    return np.dot(a, np.exp(1j * rng.normal(0.0, sigma, a.size)))


def _correlation_trial(n0, rng):
    bits = rng.integers(0, 2, size=(2, n0))
    return np.mean(1.0 - 2.0 * (bits[0] ^ bits[1]))


def _interference_trial(a, interferers, rng):
    bits = rng.integers(0, 2, size=(interferers + 1, a.size))
    x = 1.0 - 2.0 * (bits[0] ^ bits[1:])
    return np.sum(x @ a)


def chip_flip_mc(a, p: float, trials: int, seed: int, *, workers: int = 1) -> CrosstalkStats:
    """Sampled sum a_n X_n under random sign flips; compare mean_power with chip_flip_power."""
    a = as_chip_amplitudes(a)
    samples = map_trials(partial(_flip_trial, a, p), seed, trials, workers=workers)
    return CrosstalkStats.from_samples(samples)


def phase_noise_mc(a, sigma_phi: float, trials: int, seed: int, *, workers: int = 1) -> tuple[float, float]:
    """Mean and standard error of |sum a_n e^{i phi_n}|^2 / |sum a_n|^2, phi_n ~ N(0, sigma^2)."""
    a = as_chip_amplitudes(a)
    samples = map_trials(partial(_phase_trial, a, sigma_phi), seed, trials, workers=workers)
    ratio = np.abs(samples) ** 2 / abs(a.sum()) ** 2
    return float(ratio.mean()), float(ratio.std(ddof=1) / math.sqrt(trials))


def code_correlation_stats(n0: int, trials: int, seed: int, *, workers: int = 1) -> CrosstalkStats:
    """Statistics of C = (1/N0) sum_n X_n over independent random binary code pairs."""
    if trials < 100:
        raise ValueError(f"need at least 100 trials for code statistics, got {trials}")
    if n0 < 1:
        raise ValueError(f"code length must be >= 1, got {n0}")
    samples = map_trials(partial(_correlation_trial, n0), seed, trials, workers=workers)
    return CrosstalkStats.from_samples(samples)


def interference_power(a, K: int, trials: int, seed: int, *, workers: int = 1) -> CrosstalkStats:
    """Sampled sum over K-1 interfering users of sum_n a_n X_n; mean_power -> (K-1) sum |a_n|^2."""
    if K < 2:
        raise ValueError(f"interference needs K >= 2 users, got {K}")
    a = as_chip_amplitudes(a)
    samples = map_trials(partial(_interference_trial, a, K - 1), seed, trials, workers=workers)
    return CrosstalkStats.from_samples(samples)


def sir(a, K: int) -> float:
    """|sum a_n|^2 / ((K - 1) sum |a_n|^2)."""
    if K < 2:
        raise ValueError(f"SIR needs at least one interferer (K >= 2), got K={K}")
    a = as_chip_amplitudes(a)
    return abs(a.sum()) ** 2 / ((K - 1) * float(np.sum(np.abs(a) ** 2)))


def crosstalk_scaling(n0_list, gamma: float, trials: int, seed: int, *, bandwidth: float | None = None,
                      workers: int = 1) -> CrosstalkScaling:
    """Mean cross-talk power vs code length, normalized by the matched-code power.

    For each N0 the interference sum_n a_n X_n uses the Lorentzian chip
    weights of a flat band (default width 1.5 gamma); the slope is a
    least-squares fit of log power against log N0.
    """
    n0_list = [int(n) for n in n0_list]
    if len(n0_list) < 3:
        raise ValueError("need at least three code lengths to fit a slope")
    if any(n % 2 == 0 or n < 1 for n in n0_list):
        raise ValueError(f"code lengths must be odd and positive, got {n0_list}")
    bandwidth = bandwidth or 1.5 * gamma
    means, errs = [], []
    for i, n0 in enumerate(n0_list):
        a = chip_weights(bandwidth, n0, gamma)
        stats = interference_power(a, 2, trials, seed + i, workers=workers)
        matched = abs(a.sum()) ** 2
        means.append(stats.mean_power / matched)
        errs.append(stats.stderr / matched)
    slope = float(np.polyfit(np.log(n0_list), np.log(means), 1)[0])
    return CrosstalkScaling(tuple(n0_list), tuple(means), tuple(errs), slope)


def design_report(K: int, n0: int, sigma_phi: float, p: float, w_over_gamma: float, beta: float, *,
                  sir_threshold: float = SIR_THRESHOLD, addressability: float = ADDRESSABILITY_C) -> LinkBudget:
    """Predicted P_e factor, SIR and pass/fail rules for an encoded link."""
    if K < 1 or n0 < 1:
        raise ValueError("K and N0 must be positive")
    if not 0 < beta <= 1:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    if not w_over_gamma > 0:
        raise ValueError(f"W/gamma must be positive, got {w_over_gamma}")
    noise = NoiseModel(sigma_phi, p)
    bw = bandwidth_match(w_over_gamma, 1.0) / bandwidth_match(optimal_bandwidth(1.0), 1.0)
    phase = phase_noise_factor(noise.sigma_phi)
    flip = chip_flip_factor(noise.p)
    predicted_sir = n0 / (K - 1) if K > 1 else None
    passes = {
        "sir": predicted_sir is None or predicted_sir >= sir_threshold,
        "phase_noise": noise.sigma_phi <= SIGMA_PHI_MAX,
        "chip_flip": noise.p <= FLIP_PROB_MAX,
        "addressability": K <= addressability * n0,
    }
    return LinkBudget(K, n0, noise.sigma_phi, noise.p, w_over_gamma, beta, bw, phase, flip,
                      beta * bw * phase * flip, predicted_sir, passes)
