"""Large-scale link state and reduced multipath realizations.

Terrestrial links (user on the ground, any station) follow urban-microcell
street-canyon statistics. Aerial links (UAV transmitter) use a documented
parametric surrogate: a logistic visibility curve anchored so a station is
highly visible from 120 m altitude only within a couple hundred meters of
horizontal distance, microcell-form pathloss with configurable
coefficients, and an optional outage state. A distance-to-probability CSV
table can override the logistic curve.

A realization is a small set of rays. The line-of-sight ray, when present,
sits exactly on the wrapped geometric direction; scattered rays perturb
that direction with wrapped-Gaussian azimuth and reflected-Gaussian
elevation offsets and carry extra exponential attenuation. Angles are
stored in the global frame and rotated into each antenna's frame at use
time, so one realization serves all three sectors of a station.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path as FilePath

import numpy as np

from .antenna import UraGeometry, element_gain, steering_matrix
from .errors import ChannelModelError, PatternLoadError
from .geometry import Area, local_frame_axes, wrap_displacement

TERRESTRIAL = "terrestrial"
AERIAL = "aerial"

# pathloss = c0 + c1*log10(d3d_m) + c2*log10(fc_GHz), NLOS floored by LOS
TERRESTRIAL_LOS_COEFFS = (32.4, 21.0, 20.0)
TERRESTRIAL_NLOS_COEFFS = (22.4, 35.3, 21.3)

# Per-ray loss can never beat free space by more than this margin.
FREE_SPACE_SLACK_DB = 6.0


class LinkState(enum.Enum):
    LOS = "los"
    NLOS = "nlos"
    OUTAGE = "outage"


@dataclass(frozen=True)
class ChannelParams:
    """Knobs of the reduced cluster model and of the aerial surrogate."""

    n_scattered_paths: int = 4
    azimuth_spread_deg: float = 30.0
    elevation_spread_deg: float = 10.0
    excess_loss_mean_db: float = 6.0
    shadow_sigma_los_db: float = 4.0
    shadow_sigma_nlos_db: float = 7.8
    aerial_los_d0_m: float = 200.0      # distance of 50% visibility
    aerial_los_scale_m: float = 40.0    # logistic slope scale
    aerial_outage_prob: float = 0.0
    aerial_los_coeffs: tuple[float, float, float] = TERRESTRIAL_LOS_COEFFS
    aerial_nlos_coeffs: tuple[float, float, float] = TERRESTRIAL_NLOS_COEFFS
    # Optional override of the logistic curve: (distances_m, probabilities).
    aerial_los_table: tuple | None = None


DEFAULT_CHANNEL_PARAMS = ChannelParams()


@dataclass(frozen=True)
class Path:
    """One ray: global departure/arrival angles, loss, and phase."""

    aod_theta_deg: float
    aod_phi_deg: float
    aoa_theta_deg: float
    aoa_phi_deg: float
    loss_db: float
    phase_rad: float


@dataclass(frozen=True)
class ChannelRealization:
    state: LinkState
    paths: tuple[Path, ...] = ()
    # Pathloss plus shadowing of the link, before per-ray excess loss.
    large_scale_loss_db: float = math.nan

    @property
    def in_outage(self) -> bool:
        return self.state is LinkState.OUTAGE


def load_aerial_los_table(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a `distance_m,probability` CSV usable as ChannelParams.aerial_los_table."""
    path = FilePath(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise PatternLoadError(f"cannot read LOS table {path}: {exc}") from exc
    dist, prob = [], []
    for r, row in enumerate(csv.reader(text.splitlines()), start=1):
        if not row or row[0].lstrip().startswith("#"):
            continue
        if row[0].strip().lower() in ("distance_m", "distance"):
            continue
        try:
            dist.append(float(row[0]))
            prob.append(float(row[1]))
        except (ValueError, IndexError) as exc:
            raise PatternLoadError(f"{path}: line {r}: {exc}") from exc
    if len(dist) < 2:
        raise PatternLoadError(f"{path}: need at least two table rows")
    d = np.array(dist)
    p = np.array(prob)
    if np.any(np.diff(d) <= 0):
        raise PatternLoadError(f"{path}: distances must be strictly increasing")
    if np.any((p < 0) | (p > 1)):
        raise PatternLoadError(f"{path}: probabilities must lie in [0, 1]")
    return d, p


def los_probability(link_kind: str, d2d_m: float,
                    heights_m: tuple[float, float] | None = None,
                    params: ChannelParams = DEFAULT_CHANNEL_PARAMS) -> float:
    """Probability that the link is line-of-sight at horizontal distance d2d."""
    if d2d_m < 0:
        raise ValueError("distance must be non-negative")
    if link_kind == TERRESTRIAL:
        if d2d_m == 0.0:
            return 1.0
        decay = math.exp(-d2d_m / 36.0)
        return min(18.0 / d2d_m, 1.0) * (1.0 - decay) + decay
    if link_kind == AERIAL:
        if params.aerial_los_table is not None:
            d, p = params.aerial_los_table
            return float(np.interp(d2d_m, d, p))
        return 1.0 / (1.0 + math.exp((d2d_m - params.aerial_los_d0_m) / params.aerial_los_scale_m))
    raise ValueError(f"unknown link kind {link_kind!r}")


def pathloss_db(link_kind: str, state: LinkState, d3d_m: float, fc_ghz: float,
                params: ChannelParams = DEFAULT_CHANNEL_PARAMS) -> float:
    """Median pathloss in dB; the NLOS curve never undercuts the LOS one."""
    if state is LinkState.OUTAGE:
        raise ChannelModelError("pathloss is undefined in outage")
    d = max(float(d3d_m), 1.0)  # guard the log for pathological inputs
    if link_kind == TERRESTRIAL:
        los_c, nlos_c = TERRESTRIAL_LOS_COEFFS, TERRESTRIAL_NLOS_COEFFS
    elif link_kind == AERIAL:
        los_c, nlos_c = params.aerial_los_coeffs, params.aerial_nlos_coeffs
    else:
        raise ValueError(f"unknown link kind {link_kind!r}")
    los = los_c[0] + los_c[1] * math.log10(d) + los_c[2] * math.log10(fc_ghz)
    if state is LinkState.LOS:
        return los
    nlos = nlos_c[0] + nlos_c[1] * math.log10(d) + nlos_c[2] * math.log10(fc_ghz)
    return max(los, nlos)


def free_space_pathloss_db(d_m: float, fc_ghz: float) -> float:
    d = max(float(d_m), 1.0)
    return 32.45 + 20.0 * math.log10(d) + 20.0 * math.log10(fc_ghz)


def _unit_to_angles(v: np.ndarray) -> tuple[float, float]:
    theta = math.degrees(math.acos(min(1.0, max(-1.0, float(v[2])))))
    phi = math.degrees(math.atan2(float(v[1]), float(v[0])))
    return theta, phi


def sph_to_unit(theta_deg: float, phi_deg: float) -> np.ndarray:
    t, p = math.radians(theta_deg), math.radians(phi_deg)
    return np.array([math.sin(t) * math.cos(p), math.sin(t) * math.sin(p), math.cos(t)])


def _perturb_angles(theta_deg: float, phi_deg: float, d_theta: float, d_phi: float) -> tuple[float, float]:
    """Offset a direction; theta reflects at the poles, phi wraps."""
    t = theta_deg + d_theta
    p = phi_deg + d_phi
    while t < 0.0 or t > 180.0:
        if t < 0.0:
            t, p = -t, p + 180.0
        else:
            t, p = 360.0 - t, p + 180.0
    p = (p + 180.0) % 360.0 - 180.0
    if p <= -180.0:
        p += 360.0
    return t, p


def sample_realization(tx_position, rx_position, area: Area, link_kind: str,
                       fc_ghz: float, rng: np.random.Generator,
                       params: ChannelParams = DEFAULT_CHANNEL_PARAMS) -> ChannelRealization:
    """Draw the link state and the ray set for one transmitter-station link.

    Draw order is fixed (outage, visibility, shadowing, LOS phase, then per
    scattered ray its four angle offsets, excess loss, and phase) so a keyed
    per-link substream reproduces the realization exactly.
    """
    disp = wrap_displacement(tx_position, rx_position, area)
    d2d = float(np.hypot(disp[0], disp[1]))
    d3d = float(np.linalg.norm(disp))

    if link_kind == AERIAL:
        if rng.uniform() < params.aerial_outage_prob:
            return ChannelRealization(LinkState.OUTAGE)

    p_los = los_probability(link_kind, d2d, params=params)
    state = LinkState.LOS if rng.uniform() < p_los else LinkState.NLOS
    sigma = params.shadow_sigma_los_db if state is LinkState.LOS else params.shadow_sigma_nlos_db
    shadow = rng.normal(0.0, sigma) if sigma > 0 else 0.0
    base_loss = pathloss_db(link_kind, state, d3d, fc_ghz, params) + shadow
    floor = free_space_pathloss_db(d3d, fc_ghz) - FREE_SPACE_SLACK_DB

    dep = disp / d3d
    dep_theta, dep_phi = _unit_to_angles(dep)
    arr_theta, arr_phi = _unit_to_angles(-dep)

    paths = []
    if state is LinkState.LOS:
        paths.append(Path(dep_theta, dep_phi, arr_theta, arr_phi,
                          max(base_loss, floor), rng.uniform(0.0, 2.0 * math.pi)))
    for _ in range(params.n_scattered_paths):
        od_az = rng.normal(0.0, params.azimuth_spread_deg)
        od_el = rng.normal(0.0, params.elevation_spread_deg)
        oa_az = rng.normal(0.0, params.azimuth_spread_deg)
        oa_el = rng.normal(0.0, params.elevation_spread_deg)
        excess = rng.exponential(params.excess_loss_mean_db) if params.excess_loss_mean_db > 0 else 0.0
        phase = rng.uniform(0.0, 2.0 * math.pi)
        aod = _perturb_angles(dep_theta, dep_phi, od_el, od_az)
        aoa = _perturb_angles(arr_theta, arr_phi, oa_el, oa_az)
        paths.append(Path(aod[0], aod[1], aoa[0], aoa[1],
                          max(base_loss + excess, floor), phase))
    return ChannelRealization(state, tuple(paths), base_loss)


def resample_phases(realization: ChannelRealization, rng: np.random.Generator) -> ChannelRealization:
    """Fresh uniform phases on the same rays (degenerate-cancellation escape)."""
    paths = tuple(
        Path(p.aod_theta_deg, p.aod_phi_deg, p.aoa_theta_deg, p.aoa_phi_deg,
             p.loss_db, rng.uniform(0.0, 2.0 * math.pi))
        for p in realization.paths
    )
    return ChannelRealization(realization.state, paths, realization.large_scale_loss_db)


@dataclass(frozen=True, eq=False)
class SideEvaluation:
    """Per-ray quantities of one link end for a fixed array and orientation.

    Computed once per (link, orientation) and reused by the covariance,
    link-gain, and effective-channel operations.
    """

    gains_db: np.ndarray    # element gain per ray, dBi
    steering: np.ndarray    # (n_rays, n_elements) array responses
    loss_db: np.ndarray     # per-ray loss, duplicated here for convenience
    phase_rad: np.ndarray


def _local_ray_angles(orientation, theta_deg, phi_deg):
    """Rotate global ray angles into the antenna frame, vectorized."""
    t = np.radians(np.asarray(theta_deg, dtype=float))
    p = np.radians(np.asarray(phi_deg, dtype=float))
    dirs = np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=1)
    local = dirs @ local_frame_axes(*orientation).T
    theta = np.degrees(np.arccos(np.clip(local[:, 2], -1.0, 1.0)))
    phi = np.degrees(np.arctan2(local[:, 1], local[:, 0]))
    phi = np.where(phi <= -180.0, phi + 360.0, phi)
    return theta, phi


def _evaluate_side(realization, array, pattern, orientation, end: str) -> SideEvaluation:
    if realization.in_outage:
        raise ChannelModelError("no ray evaluation for a link in outage")
    if end == "tx":
        thetas = [p.aod_theta_deg for p in realization.paths]
        phis = [p.aod_phi_deg for p in realization.paths]
    else:
        thetas = [p.aoa_theta_deg for p in realization.paths]
        phis = [p.aoa_phi_deg for p in realization.paths]
    lt, lp = _local_ray_angles(orientation, thetas, phis)
    gains = np.atleast_1d(element_gain(pattern, lt, lp))
    return SideEvaluation(
        gains_db=gains,
        steering=steering_matrix(array, lt, lp),
        loss_db=np.array([p.loss_db for p in realization.paths]),
        phase_rad=np.array([p.phase_rad for p in realization.paths]),
    )


def evaluate_tx_side(realization, tx_array, tx_pattern, tx_orientation) -> SideEvaluation:
    return _evaluate_side(realization, tx_array, tx_pattern, tx_orientation, "tx")


def evaluate_rx_side(realization, rx_array, rx_pattern, rx_orientation) -> SideEvaluation:
    return _evaluate_side(realization, rx_array, rx_pattern, rx_orientation, "rx")


def tx_covariance(realization: ChannelRealization, tx_array: UraGeometry,
                  tx_pattern, tx_orientation: tuple[float, float],
                  tx_side: SideEvaluation | None = None) -> np.ndarray:
    """Transmit-side spatial covariance, sum of per-ray steering outer products.

    Each ray is weighted by its transmit element gain and inverse loss, both
    linear. The result is Hermitian positive semidefinite by construction
    and its trace equals the weight sum times the element count.
    """
    if realization.in_outage:
        raise ChannelModelError("no covariance for a link in outage")
    side = tx_side or evaluate_tx_side(realization, tx_array, tx_pattern, tx_orientation)
    weights = 10.0 ** ((side.gains_db - side.loss_db) / 10.0)
    a = side.steering
    return (weights[:, None] * a).T @ a.conj()


def link_gamma(realization: ChannelRealization,
               tx_pattern, tx_orientation: tuple[float, float],
               rx_pattern, rx_orientation: tuple[float, float],
               tx_side: SideEvaluation | None = None,
               rx_side: SideEvaluation | None = None) -> float:
    """Large-scale link gain: sum over rays of tx gain * rx gain / loss (linear).

    Precomputed side evaluations are optional; without them the per-ray
    element gains are evaluated directly.
    """
    if realization.in_outage:
        raise ChannelModelError("no link gain for a link in outage")
    if tx_side is not None and rx_side is not None:
        tx_gains, rx_gains = tx_side.gains_db, rx_side.gains_db
    else:
        thetas = [p.aod_theta_deg for p in realization.paths]
        phis = [p.aod_phi_deg for p in realization.paths]
        lt, lp = _local_ray_angles(tx_orientation, thetas, phis)
        tx_gains = np.atleast_1d(element_gain(tx_pattern, lt, lp))
        thetas = [p.aoa_theta_deg for p in realization.paths]
        phis = [p.aoa_phi_deg for p in realization.paths]
        lt, lp = _local_ray_angles(rx_orientation, thetas, phis)
        rx_gains = np.atleast_1d(element_gain(rx_pattern, lt, lp))
    loss = np.array([p.loss_db for p in realization.paths])
    return float(np.sum(10.0 ** ((tx_gains + rx_gains - loss) / 10.0)))


def effective_simo_channel(realization: ChannelRealization, tx_beam: np.ndarray,
                           tx_array: UraGeometry, tx_pattern, tx_orientation,
                           rx_array: UraGeometry, rx_pattern, rx_orientation,
                           tx_side: SideEvaluation | None = None,
                           rx_side: SideEvaluation | None = None,
                           ) -> tuple[np.ndarray, float]:
    """Receive-side channel vector after transmit beamforming, plus link gain.

    The raw vector sums, over rays, the amplitude sqrt(tx gain * rx gain /
    loss) times the ray phase, the beam's projection on the transmit
    steering vector, and the receive steering vector. It is then scaled so
    its squared norm equals the receive element count; the absolute level
    is carried separately by the returned gain (same value as
    :func:`link_gamma`).

    Raises ChannelModelError on outage or if the rays cancel exactly; in
    the latter, measure-zero case the caller can retry after
    :func:`resample_phases`.
    """
    if realization.in_outage:
        raise ChannelModelError("no effective channel for a link in outage")
    tx_side = tx_side or evaluate_tx_side(realization, tx_array, tx_pattern, tx_orientation)
    rx_side = rx_side or evaluate_rx_side(realization, rx_array, rx_pattern, rx_orientation)
    amp2 = 10.0 ** ((tx_side.gains_db + rx_side.gains_db - tx_side.loss_db) / 10.0)
    gamma = float(np.sum(amp2))
    coupling = tx_side.steering @ tx_beam.conj()  # per-ray f^* a_tx
    weights = np.sqrt(amp2) * np.exp(1j * tx_side.phase_rad) * coupling
    v = rx_side.steering.T @ weights
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ChannelModelError("rays cancelled exactly; resample phases and retry")
    return v * (math.sqrt(rx_array.n_elements) / norm), gamma
