"""Per-hop radio model: sectorized antennas, 72 GHz path loss, beam-sweep
overhead, Shannon rate and hop delay.

All power quantities stay in dB; the Shannon step is the only place a
linear SNR appears.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal

import numpy as np

PATH_LOSS_INTERCEPT_DB = 69.6


class ConfigurationError(ValueError):
    """Radio parameters that leave no usable link (e.g. sweep longer than slot)."""


@dataclass(frozen=True)
class AntennaPattern:
    g_main: float = 10.0
    g_side: float = -10.0
    psi_tx: float = 40.0
    psi_rx: float = 40.0
    phi_tx: float = 10.0
    phi_rx: float = 10.0

    def __post_init__(self) -> None:
        if not self.g_main > self.g_side:
            raise ValueError(f"main lobe gain {self.g_main} dB must exceed side lobe gain {self.g_side} dB")
        for side in ("tx", "rx"):
            phi = getattr(self, f"phi_{side}")
            psi = getattr(self, f"psi_{side}")
            if not 0 < phi <= psi <= 360:
                raise ValueError(f"need 0 < phi_{side} <= psi_{side} <= 360, got phi={phi}, psi={psi}")


@dataclass(frozen=True)
class LinkBudget:
    p_t: float = 30.0          # dBm
    n0: float = -174.0         # dBm/Hz
    b: float = 200e6           # Hz
    alpha: float = 2.9
    sigma: float = 4.0         # dB
    t_t: float = 4e-3          # s
    t_p: float = 0.2e-3        # s
    t_proc: float = 20e-6      # s
    p_s: float = 24000.0       # bits
    antenna: AntennaPattern = field(default_factory=AntennaPattern)

    def __post_init__(self) -> None:
        if not self.b > 0:
            raise ValueError(f"b (bandwidth) must be positive, got {self.b}")
        if not self.sigma >= 0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.t_p > 0:
            raise ValueError(f"t_p must be positive, got {self.t_p}")
        if self.t_proc < 0 or self.p_s < 0:
            raise ValueError("t_proc and p_s must be non-negative")
        if not self.t_t > alignment_delay(self.antenna, self.t_p):
            raise ConfigurationError(
                f"slot t_t={self.t_t} s leaves no time for data after the "
                f"{alignment_delay(self.antenna, self.t_p)} s beam sweep"
            )

    @cached_property
    def alignment_delay(self) -> float:
        return alignment_delay(self.antenna, self.t_p)

    @cached_property
    def data_fraction(self) -> float:
        """Share of the slot left for payload after beam alignment."""
        return 1.0 - self.alignment_delay / self.t_t

    @cached_property
    def margin_db(self) -> float:
        """SNR at 1 m without shadowing (main-lobe gains at both ends)."""
        return (
            self.p_t - self.n0 - 10.0 * math.log10(self.b)
            + 2.0 * self.antenna.g_main - PATH_LOSS_INTERCEPT_DB
        )


@dataclass(frozen=True)
class LinkSample:
    d_man: float
    rho: float
    snr_db: float
    rate_bps: float
    delay_s: float


def directivity_gain(pattern: AntennaPattern, alignment_error: float, side: Literal["tx", "rx"]) -> float:
    phi = pattern.phi_tx if side == "tx" else pattern.phi_rx
    return pattern.g_main if abs(alignment_error) <= phi / 2 else pattern.g_side


def alignment_delay(pattern: AntennaPattern, t_p: float) -> float:
    """Exhaustive beam-pair sweep inside the already chosen sectors."""
    return (pattern.psi_tx * pattern.psi_rx) / (pattern.phi_tx * pattern.phi_rx) * t_p


def _is_scalar(*values) -> bool:
    return all(isinstance(v, (int, float)) for v in values)


def _check_distance(d_man) -> np.ndarray:
    d = np.asarray(d_man, dtype=float)
    if np.any(~(d > 0)):
        raise ValueError("Manhattan distance must be positive")
    return d


def channel_gain_db(budget: LinkBudget, d_man, rho=0.0):
    """Path loss in dB (a loss: it is subtracted from the power budget)."""
    if _is_scalar(d_man, rho):
        if not d_man > 0:
            raise ValueError("Manhattan distance must be positive")
        return PATH_LOSS_INTERCEPT_DB + 10.0 * budget.alpha * math.log10(d_man) + rho
    d = _check_distance(d_man)
    out = PATH_LOSS_INTERCEPT_DB + 10.0 * budget.alpha * np.log10(d) + rho
    return float(out) if np.ndim(out) == 0 else out


def snr_db(budget: LinkBudget, d_man, rho=0.0):
    if _is_scalar(d_man, rho):
        if not d_man > 0:
            raise ValueError("Manhattan distance must be positive")
        return budget.margin_db - 10.0 * budget.alpha * math.log10(d_man) - rho
    d = _check_distance(d_man)
    out = budget.margin_db - 10.0 * budget.alpha * np.log10(d) - rho
    return float(out) if np.ndim(out) == 0 else out


def spectral_efficiency(snr):
    """log2(1 + SNR) from an SNR in dB, accurate at very low SNR."""
    if _is_scalar(snr):
        try:
            return math.log1p(10.0 ** (snr / 10.0)) / math.log(2.0)
        except OverflowError:
            return snr / 10.0 * math.log2(10.0)
    return np.log1p(np.power(10.0, np.asarray(snr, dtype=float) / 10.0)) / math.log(2.0)


def effective_rate(budget: LinkBudget, snr):
    if _is_scalar(snr):
        return budget.data_fraction * budget.b * spectral_efficiency(snr)
    out = budget.data_fraction * budget.b * spectral_efficiency(snr)
    return float(out) if np.ndim(out) == 0 else out


def single_hop_delay(budget: LinkBudget, snr):
    """Packet airtime ``p_s / rate``; ``inf`` where the rate is zero."""
    if _is_scalar(snr):
        if budget.p_s == 0:
            return 0.0
        rate = effective_rate(budget, snr)
        return budget.p_s / rate if rate > 0 else math.inf
    rate = np.asarray(effective_rate(budget, snr), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(rate > 0, budget.p_s / np.where(rate > 0, rate, 1.0), np.inf)
    if budget.p_s == 0:
        out = np.zeros_like(out)
    return float(out) if np.ndim(out) == 0 else out


def single_hop_reliability_indicator(snr, epsilon: float):
    out = np.asarray(snr) >= epsilon
    return bool(out) if np.ndim(out) == 0 else out


def link_sample(budget: LinkBudget, d_man: float, rho: float) -> LinkSample:
    snr = snr_db(budget, d_man, rho)
    return LinkSample(
        d_man=d_man,
        rho=rho,
        snr_db=snr,
        rate_bps=effective_rate(budget, snr),
        delay_s=single_hop_delay(budget, snr),
    )
