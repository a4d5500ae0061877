"""Drop and campaign orchestration.

One drop is a full Monte-Carlo realization: deploy both station tiers and
the user population, sample every user-station channel, point each user's
long-term beam at its strongest admissible cell, apply open-loop power
control, schedule users round-robin, and evaluate the combined
SINR/INR/rate chain slot by slot.

Everything is keyed off (config, seed): the same pair reproduces every
output byte, no matter how drops are distributed over worker processes.
"""

from __future__ import annotations

import csv
import functools
import hashlib
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import channel as chan
from .antenna import load_pattern
from .config import ScenarioConfig
from .errors import DeploymentError
from .geometry import (
    DEDICATED,
    STANDARD,
    UAV,
    UE,
    Area,
    deploy_base_stations,
    deploy_users,
)
from .network import (
    SINGLE_MNO,
    build_cells,
    build_schedule,
    candidate_cells,
    associate,
    evaluate_slot,
)
from .radio import (
    average_rate,
    dbm_to_watt,
    linear_to_db,
    noise_power_w,
    open_loop_power_dbm,
    principal_eigenvector,
)
from .rng import substream

METRIC_SINR = "SINR_dB"
METRIC_INR = "INR_dB"
METRIC_RATE = "rate_bps"
METRICS = (METRIC_SINR, METRIC_INR, METRIC_RATE)

POPULATION_LABEL = {UE: "UE", UAV: "UAV"}
POPULATIONS = ("UE", "UAV")

QUANTILE_LEVELS = (0.05, 0.25, 0.50, 0.75, 0.95)

# Floor applied before dB conversion so an interference-free slot stays finite.
_DB_FLOOR_LINEAR = 1e-30


@functools.lru_cache(maxsize=8)
def _cached_pattern(path_str: str):
    return load_pattern(path_str)


@dataclass
class DropResult:
    """Per-user outcome of one drop."""

    seed: int
    user_kind: dict[int, str]
    sinr_db: dict[int, list[float]]        # one entry per active slot
    inr_db: dict[int, list[float]]
    rate_bps: dict[int, float]             # absent if never active
    outage: dict[int, bool]
    served_tier: dict[int, str | None]
    cell_loads: dict[int, int]
    n_standard_bs: int
    n_dedicated_bs: int
    fingerprint: str

    def sample_rows(self):
        """Deterministic (population, metric, user, value) sample stream."""
        for uid in sorted(self.user_kind):
            pop = POPULATION_LABEL[self.user_kind[uid]]
            for value in self.sinr_db.get(uid, ()):
                yield (pop, METRIC_SINR, uid, value)
            for value in self.inr_db.get(uid, ()):
                yield (pop, METRIC_INR, uid, value)
            if uid in self.rate_bps:
                yield (pop, METRIC_RATE, uid, self.rate_bps[uid])


def _deployment_fingerprint(standard_bss, users) -> str:
    """Hash of the sweep-invariant part of a drop: standard tier plus users."""
    digest = hashlib.sha256()
    for bs in standard_bss:
        digest.update(np.ascontiguousarray(bs.position, dtype=float).tobytes())
        digest.update(repr([(s.boresight_azimuth_deg, s.tilt_deg) for s in bs.sectors]).encode())
    for u in users:
        digest.update(np.ascontiguousarray(u.position, dtype=float).tobytes())
        digest.update(f"{u.kind}:{u.array_azimuth_deg!r}:{u.array_tilt_deg!r}".encode())
    return digest.hexdigest()


def deployment_fingerprint(config: ScenarioConfig, seed: int) -> str:
    """Fingerprint of the deployment a given (config, seed) pair produces."""
    area = Area(config.area_side_m)
    std = _deploy_standard(config, area, seed)
    users = _deploy_population(config, area, std, seed)
    return _deployment_fingerprint(std, users)


def _deploy_standard(config, area, seed):
    return deploy_base_stations(
        area, config.isd_s_m, STANDARD, seed,
        standard_height_m=config.std_bs_height_m,
        standard_tilt_deg=config.std_bs_tilt_deg,
    )


def _deploy_population(config, area, standard_bss, seed):
    # User totals follow the standard tier only: adding dedicated stations
    # must not change the population, or matched-seed sweeps fall apart.
    return deploy_users(
        area, standard_bss, config.ues_per_cell, config.uavs_per_cell, seed,
        ue_height_m=config.ue_height_m,
        uav_height_m=config.uav_height_m,
        min_ue_bs_2d_m=config.min_ue_bs_2d_m,
        min_uav_bs_3d_m=config.min_uav_bs_3d_m,
    )


def run_drop(config: ScenarioConfig, seed: int) -> DropResult:
    """Execute one deterministic drop for (config, seed)."""
    area = Area(config.area_side_m)
    standard_bss = _deploy_standard(config, area, seed)
    dedicated_bss = []
    if config.mode != SINGLE_MNO:
        dedicated_bss = deploy_base_stations(
            area, config.isd_d_m, DEDICATED, seed,
            id_offset=len(standard_bss),
            dedicated_height_range_m=(config.ded_bs_height_min_m, config.ded_bs_height_max_m),
            dedicated_tilt_deg=config.ded_bs_tilt_deg,
        )
    stations = standard_bss + dedicated_bss
    cells = build_cells(stations)
    users = _deploy_population(config, area, standard_bss, seed)
    fingerprint = _deployment_fingerprint(standard_bss, users)

    bs_pattern = config.bs_element_pattern()
    ue_pattern = bs_pattern  # terrestrial users reuse the sectorized element
    uav_pattern = _cached_pattern(str(config.uav_pattern_path()))
    bs_array = config.bs_array()
    user_array = config.user_array()
    params = config.channel_params()
    noise_w = noise_power_w(config.bandwidth_hz, config.noise_figure_db)
    pmax_w = dbm_to_watt(config.pmax_dbm)

    def user_pattern(user):
        return uav_pattern if user.kind == UAV else ue_pattern

    # Per-link realizations, one per (user, station); shared by its sectors.
    realizations = {}
    for user in users:
        kind = chan.AERIAL if user.kind == UAV else chan.TERRESTRIAL
        for bs in stations:
            rng = substream(seed, "link", user.id, bs.id)
            realizations[(user.id, bs.id)] = chan.sample_realization(
                user.position, bs.position, area, kind, config.frequency_ghz, rng, params)

    users_by_id = {u.id: u for u in users}

    # Per-ray evaluations are cached per link end: the transmit side depends
    # on (user, station), the receive side on (user, cell).
    tx_sides: dict[tuple[int, int], chan.SideEvaluation] = {}
    rx_sides: dict[tuple[int, int], chan.SideEvaluation] = {}

    def tx_side(user, bs_id):
        key = (user.id, bs_id)
        if key not in tx_sides:
            tx_sides[key] = chan.evaluate_tx_side(
                realizations[key], user_array, user_pattern(user), user.orientation)
        return tx_sides[key]

    def rx_side(user, cell):
        key = (user.id, cell.id)
        if key not in rx_sides:
            rx_sides[key] = chan.evaluate_rx_side(
                realizations[(user.id, cell.bs.id)], bs_array, bs_pattern, cell.orientation)
        return rx_sides[key]

    # Long-term transmit beams toward every admissible station.
    # Each entry is (beam, beamformed coupling gain f^H R f, trace of R).
    beams: dict[tuple[int, int], tuple | None] = {}
    for user in users:
        for cell in candidate_cells(user, cells, config.mode):
            key = (user.id, cell.bs.id)
            if key in beams:
                continue
            real = realizations[key]
            if real.in_outage:
                beams[key] = None
                continue
            cov = chan.tx_covariance(real, user_array, user_pattern(user),
                                     user.orientation, tx_side=tx_side(user, cell.bs.id))
            beam = principal_eigenvector(cov)
            coupled = float(np.real(np.vdot(beam, cov @ beam)))
            beams[key] = (beam, coupled, float(np.real(np.trace(cov))))

    n_tx = user_array.n_elements

    def long_term_rx_power(user, cell):
        info = beams[(user.id, cell.bs.id)]
        if info is None:
            return None
        real = realizations[(user.id, cell.bs.id)]
        gamma = chan.link_gamma(real, user_pattern(user), user.orientation,
                                bs_pattern, cell.orientation,
                                tx_side=tx_side(user, cell.bs.id),
                                rx_side=rx_side(user, cell))
        _, coupled, trace = info
        tx_array_gain = coupled * n_tx / trace if trace > 0 else 0.0
        return pmax_w * gamma * tx_array_gain

    association = associate(users, cells, long_term_rx_power, config.mode)

    # Open-loop power control against the serving link's large-scale loss
    # (median pathloss plus shadowing), the quantity a downlink reference
    # measurement would report.
    p_tx_w: dict[int, float] = {}
    for uid, cell_id in association.serving.items():
        user = users_by_id[uid]
        coupling_loss_db = realizations[(uid, cells[cell_id].bs.id)].large_scale_loss_db
        p_dbm = open_loop_power_dbm(config.power_control(user.kind), coupling_loss_db)
        p_tx_w[uid] = dbm_to_watt(p_dbm)

    schedule = build_schedule(association, config.n_u, config.n_slots, seed)

    ever_active: set[int] = set()
    for slots in schedule.slots_of.values():
        for slot in slots:
            ever_active.update(slot)
    active_cells = sorted(cid for cid, slots in schedule.slots_of.items()
                          if any(slots))

    # Effective channels of every possibly-active user toward every active
    # cell, each evaluated with the user's own serving beam.
    h: dict[tuple[int, int], np.ndarray] = {}
    gamma: dict[tuple[int, int], float] = {}
    zero_h = np.zeros(bs_array.n_elements, dtype=complex)
    for uid in sorted(ever_active):
        user = users_by_id[uid]
        serving_bs = cells[association.serving[uid]].bs
        beam = beams[(uid, serving_bs.id)][0]
        for cell_id in active_cells:
            cell = cells[cell_id]
            real = realizations[(uid, cell.bs.id)]
            if real.in_outage:
                # A blocked interference link carries no power at all.
                h[(uid, cell_id)] = zero_h
                gamma[(uid, cell_id)] = 0.0
                continue
            h_vec, g = chan.effective_simo_channel(
                real, beam, user_array, user_pattern(user), user.orientation,
                bs_array, bs_pattern, cell.orientation,
                tx_side=tx_side(user, cell.bs.id), rx_side=rx_side(user, cell))
            h[(uid, cell_id)] = h_vec
            gamma[(uid, cell_id)] = g

    sinr_db: dict[int, list[float]] = {uid: [] for uid in sorted(association.serving)}
    inr_db: dict[int, list[float]] = {uid: [] for uid in sorted(association.serving)}
    rate_terms: dict[int, list[float]] = {}
    for t in range(config.n_slots):
        active_by_cell = {cid: schedule.active_in(cid, t) for cid in active_cells}
        budgets = evaluate_slot(active_by_cell, h, gamma, p_tx_w, noise_w)
        for cid in active_cells:
            n_active = len(active_by_cell[cid])
            n_assoc = association.cell_load(cid)
            for uid in active_by_cell[cid]:
                budget = budgets[uid]
                sinr_db[uid].append(float(linear_to_db(max(budget.sinr, _DB_FLOOR_LINEAR))))
                inr_db[uid].append(float(linear_to_db(max(budget.inr, _DB_FLOOR_LINEAR))))
                rate_terms.setdefault(uid, []).append(
                    average_rate(budget.sinr, config.bandwidth_hz, n_active, n_assoc))

    rate_bps = {uid: float(np.mean(terms)) for uid, terms in sorted(rate_terms.items())}

    outage: dict[int, bool] = {}
    served_tier: dict[int, str | None] = {}
    for user in users:
        uid = user.id
        if uid in association.serving:
            served_tier[uid] = cells[association.serving[uid]].tier
            samples = sinr_db.get(uid, [])
            outage[uid] = bool(samples) and max(samples) < config.sinr_outage_threshold_db
        else:
            served_tier[uid] = None
            outage[uid] = True

    return DropResult(
        seed=seed,
        user_kind={u.id: u.kind for u in users},
        sinr_db=sinr_db,
        inr_db=inr_db,
        rate_bps=rate_bps,
        outage=outage,
        served_tier=served_tier,
        cell_loads={cid: association.cell_load(cid) for cid in sorted(association.users_of)},
        n_standard_bs=len(standard_bss),
        n_dedicated_bs=len(dedicated_bss),
        fingerprint=fingerprint,
    )


@dataclass(frozen=True, eq=False)
class CdfSeries:
    """Pooled empirical distribution of one metric for one population."""

    metric: str
    population: str
    samples: np.ndarray          # ascending
    seeds: tuple[int, ...]       # drops the samples came from

    @property
    def n(self) -> int:
        return int(self.samples.size)


def quantile(series, q: float) -> float:
    """Linear-interpolation quantile of a CdfSeries (or any sample array)."""
    samples = series.samples if isinstance(series, CdfSeries) else np.sort(np.asarray(series, float))
    if samples.size == 0:
        raise ValueError("quantile of an empty series")
    if not 0.0 <= q <= 1.0:
        raise ValueError("quantile level must lie in [0, 1]")
    pos = q * (samples.size - 1)
    lo = int(math.floor(pos))
    hi = min(lo + 1, samples.size - 1)
    frac = pos - lo
    return float(samples[lo] * (1.0 - frac) + samples[hi] * frac)


@dataclass
class CampaignResult:
    config: ScenarioConfig
    seeds: list[int]
    drops: list[DropResult]
    failures: list[tuple[int, str]] = field(default_factory=list)
    _series: dict = field(default_factory=dict, repr=False)

    def series(self, metric: str, population: str) -> CdfSeries:
        key = (metric, population)
        if key not in self._series:
            values = []
            for drop in self.drops:
                values.extend(v for pop, m, _, v in drop.sample_rows()
                              if m == metric and pop == population)
            self._series[key] = CdfSeries(metric, population,
                                          np.sort(np.asarray(values, dtype=float)),
                                          tuple(d.seed for d in self.drops))
        return self._series[key]

    def outage_fraction(self, population: str) -> float | None:
        total = flagged = 0
        for drop in self.drops:
            for uid, kind in drop.user_kind.items():
                if POPULATION_LABEL[kind] != population:
                    continue
                total += 1
                flagged += bool(drop.outage[uid])
        return flagged / total if total else None

    def association_census(self) -> dict:
        census = {pop: {"standard": 0, "dedicated": 0, "outage": 0} for pop in POPULATIONS}
        for drop in self.drops:
            for uid, kind in drop.user_kind.items():
                pop = POPULATION_LABEL[kind]
                tier = drop.served_tier[uid]
                census[pop][tier if tier else "outage"] += 1
        return census

    def summary(self) -> dict:
        quantiles: dict = {}
        counts: dict = {}
        for pop in POPULATIONS:
            quantiles[pop] = {}
            counts[pop] = {}
            for metric in METRICS:
                series = self.series(metric, pop)
                counts[pop][metric] = series.n
                if series.n:
                    quantiles[pop][metric] = {
                        f"p{int(q * 100):02d}": quantile(series, q) for q in QUANTILE_LEVELS
                    }
        return {
            "seeds": list(self.seeds),
            "failures": {str(seed): msg for seed, msg in self.failures},
            "sample_counts": counts,
            "quantiles": quantiles,
            "outage_fraction": {pop: self.outage_fraction(pop) for pop in POPULATIONS},
            "association": self.association_census(),
            "deployment_fingerprints": {str(d.seed): d.fingerprint for d in self.drops},
        }


def _run_drop_task(task: tuple[ScenarioConfig, int]):
    config, seed = task
    try:
        return seed, run_drop(config, seed), None
    except DeploymentError as exc:
        return seed, None, str(exc)


def run_campaign(config: ScenarioConfig, seeds: list[int] | None = None,
                 parallelism: int = 1, log=None) -> CampaignResult:
    """Run one drop per seed and pool the samples.

    Drops are independent; with ``parallelism`` > 1 they run in worker
    processes. Results are merged in seed order, so the aggregate does not
    depend on the degree of parallelism. A drop that fails deployment is
    reported as a failure and the campaign continues.
    """
    config.require_valid()
    seeds = list(seeds) if seeds is not None else config.seeds()
    if not seeds:
        raise ValueError("need at least one seed")
    tasks = [(config, seed) for seed in seeds]
    if parallelism > 1:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            outcomes = list(pool.map(_run_drop_task, tasks))
    else:
        outcomes = [_run_drop_task(task) for task in tasks]

    drops, failures = [], []
    for seed, drop, error in outcomes:
        if drop is None:
            failures.append((seed, error))
            if log:
                log(f"drop seed={seed} failed: {error}")
            continue
        drops.append(drop)
        if log:
            n_users = len(drop.user_kind)
            log(f"drop seed={seed}: {drop.n_standard_bs}+{drop.n_dedicated_bs} stations, "
                f"{n_users} users, {sum(len(v) for v in drop.sinr_db.values())} samples")
    return CampaignResult(config, seeds, drops, failures)


# Serialization ------------------------------------------------------------

CSV_HEADER = ("population", "metric", "drop", "user", "value")


def iter_sample_rows(campaign: CampaignResult):
    for drop in campaign.drops:
        for pop, metric, uid, value in drop.sample_rows():
            yield (pop, metric, drop.seed, uid, value)


def write_samples_csv(path, campaign: CampaignResult, group: str | None = None) -> None:
    """Sample table, one row per sample; optional leading sweep-group column."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        header = (("group",) + CSV_HEADER) if group is not None else CSV_HEADER
        writer.writerow(header)
        for row in iter_sample_rows(campaign):
            out = (row[0], row[1], row[2], row[3], repr(float(row[4])))
            writer.writerow(((group,) + out) if group is not None else out)


def write_summary_json(path, campaign: CampaignResult) -> None:
    Path(path).write_text(json.dumps(campaign.summary(), indent=2, sort_keys=True) + "\n")
