"""Inter-satellite link budget: path loss, SNR, Shannon capacity, transmission delay.

Two noise models are offered. ``paper_literal`` uses noise power ``k_B * tau``
with no bandwidth factor, exactly as the transmission-delay formula is written;
``physical`` uses the conventional ``k_B * tau * B``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from .errors import DomainError, LinkInfeasibleError

SPEED_OF_LIGHT_M_S = 299792458.0
BOLTZMANN_J_K = 1.380649e-23

NoiseModel = Literal["paper_literal", "physical"]
PathLossModel = Literal["free_space", "constant"]


class LinkSettings(BaseModel):
    """Link parameters shared by every bandwidth cell of a plan."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    transmit_power_w: float = Field(default=10.0, gt=0)
    peak_gain_linear: float = Field(default=1000.0, gt=0)
    noise_temperature_k: float = Field(default=290.0, gt=0)
    carrier_frequency_hz: float = Field(default=26e9, gt=0)
    noise_model: NoiseModel = "paper_literal"
    path_loss_model: PathLossModel = "free_space"
    constant_path_loss_linear: float = Field(default=1.0, ge=1.0)

    def with_bandwidth(self, bandwidth_hz: float) -> "LinkBudgetParams":
        return LinkBudgetParams(**self.model_dump(), bandwidth_hz=bandwidth_hz)


class LinkBudgetParams(LinkSettings):
    bandwidth_hz: float = Field(gt=0)

    @property
    def boltzmann(self) -> float:
        return BOLTZMANN_J_K

    def echo(self) -> dict:
        return {**self.model_dump(), "boltzmann": BOLTZMANN_J_K}


@dataclass(frozen=True)
class LinkBudget:
    distance_km: float
    path_loss_linear: float
    snr_linear: float
    capacity_bps: float
    t_trans_s: float


def path_loss(distance_km: float, carrier_frequency_hz: float) -> float:
    """Free-space loss ``(4 pi d f / c)^2`` as a linear factor."""
    if not distance_km > 0:
        raise DomainError(f"path loss needs distance_km > 0, got {distance_km}")
    if not carrier_frequency_hz > 0:
        raise DomainError(f"path loss needs frequency > 0, got {carrier_frequency_hz}")
    ratio = 4.0 * math.pi * distance_km * 1e3 * carrier_frequency_hz / SPEED_OF_LIGHT_M_S
    return ratio * ratio


def path_loss_db(distance_km: float, carrier_frequency_hz: float) -> float:
    return 10.0 * math.log10(path_loss(distance_km, carrier_frequency_hz))


def snr(params: LinkBudgetParams, path_loss_linear: float) -> float:
    if path_loss_linear < 1.0:
        raise DomainError(f"path loss must be >= 1, got {path_loss_linear}")
    noise = BOLTZMANN_J_K * params.noise_temperature_k * path_loss_linear
    if params.noise_model == "physical":
        noise *= params.bandwidth_hz
    return params.transmit_power_w * params.peak_gain_linear**2 / noise


def capacity(bandwidth_hz: float, snr_linear: float) -> float:
    """Shannon capacity in bits/s."""
    if not bandwidth_hz > 0:
        raise DomainError(f"bandwidth must be > 0, got {bandwidth_hz}")
    if snr_linear < 0:
        raise DomainError(f"snr must be >= 0, got {snr_linear}")
    return bandwidth_hz * math.log2(1.0 + snr_linear)


def link_path_loss(params: LinkBudgetParams, distance_km: float) -> float:
    if params.path_loss_model == "constant":
        if not distance_km > 0:
            raise DomainError(f"distance_km must be > 0, got {distance_km}")
        return params.constant_path_loss_linear
    return path_loss(distance_km, params.carrier_frequency_hz)


def transmission_delay(d_trans_bits: float, params: LinkBudgetParams, distance_km: float) -> LinkBudget:
    """Evaluate the full budget for one packet of ``d_trans_bits`` at ``distance_km``."""
    if not d_trans_bits > 0:
        raise DomainError(f"packet size must be > 0 bits, got {d_trans_bits}")
    loss = link_path_loss(params, distance_km)
    s = snr(params, loss)
    c = capacity(params.bandwidth_hz, s)
    if c <= 0.0:
        raise LinkInfeasibleError("link infeasible at this distance")
    return LinkBudget(
        distance_km=distance_km,
        path_loss_linear=loss,
        snr_linear=s,
        capacity_bps=c,
        t_trans_s=d_trans_bits / c,
    )
