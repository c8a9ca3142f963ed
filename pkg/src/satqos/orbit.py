"""Walker-delta constellation generation and circular two-body propagation.

Orbits are circular and unperturbed (no J2, drag or Earth rotation); the epoch
is t = 0 of the plan window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from pydantic import BaseModel, ConfigDict, Field, model_validator

EARTH_RADIUS_KM = 6371.0
MU_EARTH_KM3_S2 = 398600.4418
TWO_PI = 2.0 * math.pi

Vec3 = tuple[float, float, float]


def _wrap_angle(rad: float) -> float:
    wrapped = rad % TWO_PI
    # x % 2pi can round up to exactly 2pi for tiny negative x
    return 0.0 if wrapped >= TWO_PI else wrapped


class ConstellationConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    planes: int = Field(ge=1)
    sats_per_plane: int = Field(ge=1)
    altitude_km: float = Field(gt=0)
    inclination_deg: float = Field(ge=0, le=180)
    phasing_factor: int = Field(default=1, ge=0)
    raan_spread_deg: float = 360.0

    @model_validator(mode="after")
    def _phasing_below_planes(self) -> "ConstellationConfig":
        if self.phasing_factor >= self.planes:
            raise ValueError(
                f"phasing_factor must be < planes ({self.phasing_factor} >= {self.planes})"
            )
        return self

    @property
    def total_satellites(self) -> int:
        return self.planes * self.sats_per_plane


@dataclass(frozen=True)
class SatelliteSpec:
    id: str
    plane_index: int
    slot_index: int
    semi_major_axis_km: float
    inclination_rad: float
    raan_rad: float
    initial_anomaly_rad: float

    def __post_init__(self) -> None:
        if not self.semi_major_axis_km > EARTH_RADIUS_KM:
            raise ValueError(
                f"semi_major_axis_km must exceed Earth radius {EARTH_RADIUS_KM} km,"
                f" got {self.semi_major_axis_km}"
            )
        for name in ("inclination_rad", "raan_rad", "initial_anomaly_rad"):
            value = getattr(self, name)
            if not 0.0 <= value < TWO_PI:
                raise ValueError(f"{name} must lie in [0, 2pi), got {value}")

    @property
    def mean_motion_rad_s(self) -> float:
        return math.sqrt(MU_EARTH_KM3_S2 / self.semi_major_axis_km**3)


@dataclass(frozen=True)
class StateVector:
    sat_id: str
    t: float
    position_km: Vec3
    velocity_km_s: Vec3


def satellite_id(plane: int, slot: int, width: int = 2) -> str:
    return f"sat-{plane:0{width}d}-{slot:0{width}d}"


def generate_constellation(config: ConstellationConfig) -> list[SatelliteSpec]:
    """Lay out ``planes x sats_per_plane`` satellites in Walker-delta phasing.

    Plane ``k`` sits at RAAN ``raan_spread * k / planes``; slot ``j`` starts at
    anomaly ``360 j / S + 360 F k / (P S)``. Ids are zero padded so that
    lexicographic order equals (plane, slot) order.
    """
    a = EARTH_RADIUS_KM + config.altitude_km
    inc = _wrap_angle(math.radians(config.inclination_deg))
    width = max(2, len(str(max(config.planes, config.sats_per_plane) - 1)))
    total = config.total_satellites
    specs = []
    for k in range(config.planes):
        raan_deg = config.raan_spread_deg * k / config.planes
        for j in range(config.sats_per_plane):
            anomaly_deg = (
                360.0 * j / config.sats_per_plane
                + 360.0 * config.phasing_factor * k / total
            )
            specs.append(
                SatelliteSpec(
                    id=satellite_id(k, j, width),
                    plane_index=k,
                    slot_index=j,
                    semi_major_axis_km=a,
                    inclination_rad=inc,
                    raan_rad=_wrap_angle(math.radians(raan_deg)),
                    initial_anomaly_rad=_wrap_angle(math.radians(anomaly_deg)),
                )
            )
    return specs


def orbital_period(spec: SatelliteSpec) -> float:
    """Period in seconds from Kepler's third law."""
    return TWO_PI * math.sqrt(spec.semi_major_axis_km**3 / MU_EARTH_KM3_S2)


def propagate(spec: SatelliteSpec, t: float) -> StateVector:
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    a = spec.semi_major_axis_km
    n = spec.mean_motion_rad_s
    theta = spec.initial_anomaly_rad + n * t
    ct, st = math.cos(theta), math.sin(theta)
    ci, si = math.cos(spec.inclination_rad), math.sin(spec.inclination_rad)
    co, so = math.cos(spec.raan_rad), math.sin(spec.raan_rad)

    def rotate(x: float, y: float) -> Vec3:
        # Rz(raan) . Rx(inc) . (x, y, 0)
        yi, zi = y * ci, y * si
        return (x * co - yi * so, x * so + yi * co, zi)

    return StateVector(
        sat_id=spec.id,
        t=t,
        position_km=rotate(a * ct, a * st),
        velocity_km_s=rotate(-a * n * st, a * n * ct),
    )


def propagate_all(specs: list[SatelliteSpec], t: float) -> list[StateVector]:
    return [propagate(s, t) for s in specs]
