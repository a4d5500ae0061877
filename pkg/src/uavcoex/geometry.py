"""Deployment geometry.

Base stations and users live in a square area with toroidal wrap-around:
horizontal coordinates wrap, heights do not. Base stations form a Poisson
point process whose intensity is 1/ISD^2, users are uniform with
minimum-distance constraints enforced by rejection sampling.

The Poisson count is sampled by inverse transform and positions come from
one sequential uniform stream, so for a fixed seed a sparser deployment is
always a prefix of a denser one. Sweeps over the intersite distance with
matched seeds therefore produce nested deployments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ConfigurationError, DeploymentError
from .rng import substream

STANDARD = "standard"
DEDICATED = "dedicated"
UE = "ue"
UAV = "uav"

STANDARD_BS_HEIGHT_M = 10.0
DEDICATED_BS_HEIGHT_RANGE_M = (10.0, 30.0)
STANDARD_TILT_DEG = -12.0
DEDICATED_TILT_DEG = 45.0
UE_HEIGHT_M = 1.5
UAV_HEIGHT_M = 120.0
UAV_ARRAY_TILT_DEG = -90.0
SECTORS_PER_BS = 3

_TIER_INDEX = {STANDARD: 0, DEDICATED: 1}
_KIND_INDEX = {UE: 0, UAV: 1}


@dataclass(frozen=True)
class Area:
    """Square wrap-around region; all coordinates lie in [0, side_m)^2."""

    side_m: float
    wrap: bool = True

    def __post_init__(self):
        if not self.side_m > 0:
            raise ConfigurationError("area side must be positive", field="area_side_m")


@dataclass(frozen=True)
class Sector:
    boresight_azimuth_deg: float
    tilt_deg: float  # signed, positive raises the boresight


@dataclass(frozen=True, eq=False)
class BaseStation:
    id: int
    position: np.ndarray  # (3,) meters
    tier: str
    height_m: float
    sectors: tuple[Sector, ...]


@dataclass(frozen=True, eq=False)
class UserNode:
    id: int
    kind: str  # UE or UAV
    position: np.ndarray  # (3,) meters
    array_azimuth_deg: float
    array_tilt_deg: float

    @property
    def orientation(self) -> tuple[float, float]:
        return (self.array_azimuth_deg, self.array_tilt_deg)


def deploy_base_stations(
    area: Area,
    isd_m: float,
    tier: str,
    seed: int,
    *,
    id_offset: int = 0,
    standard_height_m: float = STANDARD_BS_HEIGHT_M,
    dedicated_height_range_m: tuple[float, float] = DEDICATED_BS_HEIGHT_RANGE_M,
    standard_tilt_deg: float = STANDARD_TILT_DEG,
    dedicated_tilt_deg: float = DEDICATED_TILT_DEG,
) -> list[BaseStation]:
    """Sample one tier of base stations as a homogeneous PPP over the area.

    The mean count is (side/ISD)^2, i.e. intensity 1/ISD^2. An infinite ISD
    yields an empty deployment. Each station gets three sectors 120 degrees
    apart with a uniform random azimuth offset; dedicated stations draw their
    height uniformly from ``dedicated_height_range_m``.
    """
    if tier not in _TIER_INDEX:
        raise ConfigurationError(f"unknown tier {tier!r}", field="tier")
    if not isd_m > 0:
        raise ConfigurationError("intersite distance must be positive", field="isd_m")
    mean_count = (area.side_m / isd_m) ** 2
    if mean_count == 0.0:  # ISD = inf disables the tier
        return []

    tier_idx = _TIER_INDEX[tier]
    u = substream(seed, "bs-count", tier_idx).uniform()
    count = int(max(0.0, stats.poisson.ppf(u, mean_count)))
    # One sequential stream: the first k positions are the same for every
    # count >= k, which makes deployments nested across densities.
    xy = substream(seed, "bs-pos", tier_idx).uniform(0.0, area.side_m, size=(count, 2))

    stations = []
    for i in range(count):
        attrs = substream(seed, "bs-attr", tier_idx, i)
        azimuth0 = attrs.uniform(0.0, 360.0)
        if tier == STANDARD:
            height = standard_height_m
            tilt = standard_tilt_deg
        else:
            lo, hi = dedicated_height_range_m
            height = attrs.uniform(lo, hi)
            tilt = dedicated_tilt_deg
        sectors = tuple(
            Sector((azimuth0 + 120.0 * s) % 360.0, tilt) for s in range(SECTORS_PER_BS)
        )
        position = np.array([xy[i, 0], xy[i, 1], height])
        stations.append(BaseStation(id_offset + i, position, tier, height, sectors))
    return stations


def wrap_displacement(a, b, area: Area) -> np.ndarray:
    """Minimum-image displacement from point a to point b.

    Horizontal components are wrapped into [-side/2, side/2]; the vertical
    component is the plain difference.
    """
    d = np.asarray(b, dtype=float) - np.asarray(a, dtype=float)
    if area.wrap:
        d[:2] -= area.side_m * np.round(d[:2] / area.side_m)
    return d


def wrap_distance(a, b, area: Area) -> float:
    return float(np.linalg.norm(wrap_displacement(a, b, area)))


def wrap_distance_2d(a, b, area: Area) -> float:
    return float(np.linalg.norm(wrap_displacement(a, b, area)[:2]))


def deploy_users(
    area: Area,
    base_stations: list[BaseStation],
    ues_per_cell: int,
    uavs_per_cell: int,
    seed: int,
    *,
    ue_height_m: float = UE_HEIGHT_M,
    uav_height_m: float = UAV_HEIGHT_M,
    uav_array_tilt_deg: float = UAV_ARRAY_TILT_DEG,
    min_ue_bs_2d_m: float = 10.0,
    min_uav_bs_3d_m: float = 10.0,
    max_retries: int = 1000,
) -> list[UserNode]:
    """Drop users uniformly over the area.

    Totals are per-cell counts times the number of cells of the given
    stations. UEs must keep a minimum 2D distance and UAVs a minimum 3D
    distance (both wrap-aware) from every given station; positions are
    redrawn until the constraint holds, up to ``max_retries`` per user.
    """
    if ues_per_cell < 0 or uavs_per_cell < 0:
        raise ConfigurationError("per-cell user counts must be non-negative", field="users_per_cell")
    n_cells = sum(len(bs.sectors) for bs in base_stations)
    bs_positions = [bs.position for bs in base_stations]

    users: list[UserNode] = []
    uid = 0
    plan = ((UE, ues_per_cell, ue_height_m), (UAV, uavs_per_cell, uav_height_m))
    for kind, per_cell, height in plan:
        total = per_cell * n_cells
        kind_idx = _KIND_INDEX[kind]
        pos_rng = substream(seed, "user-pos", kind_idx)
        for i in range(total):
            position = None
            for _ in range(max_retries):
                x, y = pos_rng.uniform(0.0, area.side_m, size=2)
                candidate = np.array([x, y, height])
                if _clear_of_stations(candidate, kind, bs_positions, area,
                                      min_ue_bs_2d_m, min_uav_bs_3d_m):
                    position = candidate
                    break
            if position is None:
                raise DeploymentError(
                    f"could not place {kind} {i} after {max_retries} attempts"
                )
            attrs = substream(seed, "user-attr", kind_idx, i)
            azimuth = attrs.uniform(0.0, 360.0)
            tilt = uav_array_tilt_deg if kind == UAV else 0.0
            users.append(UserNode(uid, kind, position, azimuth, tilt))
            uid += 1
    return users


def _clear_of_stations(position, kind, bs_positions, area, min_2d, min_3d) -> bool:
    for bs_pos in bs_positions:
        if kind == UE:
            if wrap_distance_2d(position, bs_pos, area) < min_2d:
                return False
        else:
            if wrap_distance(position, bs_pos, area) < min_3d:
                return False
    return True


def local_frame_axes(azimuth_deg: float, tilt_deg: float) -> np.ndarray:
    """Rows are the local x, y, z axes expressed in global coordinates.

    The frame is the global one rotated by ``azimuth_deg`` about the
    vertical, then by ``tilt_deg`` about the rotated horizontal axis.
    Positive tilt raises the boresight (the local x axis) above the
    horizon; the local z axis is the array zenith.
    """
    ca, sa = math.cos(math.radians(azimuth_deg)), math.sin(math.radians(azimuth_deg))
    cb, sb = math.cos(math.radians(tilt_deg)), math.sin(math.radians(tilt_deg))
    x_axis = (cb * ca, cb * sa, sb)
    y_axis = (-sa, ca, 0.0)
    z_axis = (-sb * ca, -sb * sa, cb)
    return np.array([x_axis, y_axis, z_axis])


def direction_in_local_frame(orientation: tuple[float, float], direction) -> tuple[float, float]:
    """Zenith/azimuth angles of a global direction in an antenna's frame.

    ``orientation`` is (azimuth_deg, tilt_deg). Returns (theta_deg, phi_deg)
    with theta in [0, 180] measured from the local zenith and phi in
    (-180, 180] measured from the boresight, which sits at (90, 0).
    """
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    lx, ly, lz = local_frame_axes(*orientation) @ d
    theta = math.degrees(math.acos(min(1.0, max(-1.0, lz))))
    phi = math.degrees(math.atan2(ly, lx))
    if phi <= -180.0:
        phi += 360.0
    return theta, phi


def direction_from_local_frame(orientation: tuple[float, float], theta_deg: float, phi_deg: float) -> np.ndarray:
    """Inverse of :func:`direction_in_local_frame`; returns a global unit vector."""
    t, p = math.radians(theta_deg), math.radians(phi_deg)
    local = np.array([math.sin(t) * math.cos(p), math.sin(t) * math.sin(p), math.cos(t)])
    return local_frame_axes(*orientation).T @ local
