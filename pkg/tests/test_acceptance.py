"""Acceptance suite.

Every criterion runs at desk scale (500 m area, 10 drops, standard ISD
200 m) and prints one PASS/FAIL line; run with ``pytest -s`` to see them
all. Campaigns are shared through session fixtures, so the whole suite
stays within a few minutes on a laptop.
"""

import math
import os

import numpy as np
import pytest

from uavcoex import radio
from uavcoex.config import ScenarioConfig
from uavcoex.sim import run_campaign, quantile, write_samples_csv, write_summary_json

DESK_SEEDS = list(range(1, 11))
WORKERS = min(4, os.cpu_count() or 1)


def _report(name, ok, detail=""):
    line = f"[ACCEPTANCE] {'PASS' if ok else 'FAIL'} {name}"
    if detail:
        line += f": {detail}"
    print(line)
    assert ok, line


def _desk_config(**extra):
    overrides = {"area_side_m": "500", "table2_config": "2", "n_slots": "10"}
    overrides.update({k: str(v) for k, v in extra.items()})
    return ScenarioConfig().with_overrides(overrides)


def _campaign(**extra):
    return run_campaign(_desk_config(**extra), seeds=DESK_SEEDS, parallelism=WORKERS)


@pytest.fixture(scope="session")
def cfg2():
    return _campaign()


@pytest.fixture(scope="session")
def cfg3():
    return _campaign(table2_config=3)


@pytest.fixture(scope="session")
def mu4():
    return _campaign(n_u=4)


@pytest.fixture(scope="session")
def closed_sweep():
    return {isd: _campaign(mode="closed", isd_d_m=isd, n_u=2) for isd in (400, 200, 100)}


@pytest.fixture(scope="session")
def open_arms():
    return {label: _campaign(mode="open", isd_d_m=value, n_u=2)
            for label, value in (("200", "200"), ("inf", "inf"))}


class TestUnitOracles:
    """Criterion: unit-oracle suite."""

    def test_mmse_equals_matched_filter_without_interference(self):
        rng = np.random.default_rng(100)
        worst = 0.0
        for _ in range(20):
            h = rng.normal(size=8) + 1j * rng.normal(size=8)
            w = radio.mmse_weights(h, [(h, rng.uniform(0.1, 20))], 0.0)
            cos = abs(np.vdot(w, h)) / (np.linalg.norm(w) * np.linalg.norm(h))
            worst = max(worst, math.acos(min(1.0, cos)))
        _report("unit-oracle: MMSE degenerates to matched filter", worst < 1e-6,
                f"worst angle {worst:.2e} rad")

    def test_mmse_matches_direct_inversion(self):
        rng = np.random.default_rng(101)
        worst = 0.0
        for _ in range(20):
            h1 = rng.normal(size=6) + 1j * rng.normal(size=6)
            h2 = rng.normal(size=6) + 1j * rng.normal(size=6)
            s1, s2, other = rng.uniform(0.1, 10, 3)
            w = radio.mmse_weights(h1, [(h1, s1), (h2, s2)], other)
            a = s1 * np.outer(h1, h1.conj()) + s2 * np.outer(h2, h2.conj()) + (1 + other) * np.eye(6)
            oracle = np.linalg.inv(a) @ h1
            worst = max(worst, float(np.linalg.norm(w - oracle) / np.linalg.norm(oracle)))
        _report("unit-oracle: MMSE vs direct inversion", worst <= 1e-9, f"worst {worst:.2e}")

    def test_principal_eigenvector_matches_eigendecomposition(self):
        rng = np.random.default_rng(102)
        worst = 0.0
        for _ in range(10):
            m = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
            r = m @ m.conj().T
            v = radio.principal_eigenvector(r)
            top = np.linalg.eigh(r)[1][:, -1]
            worst = max(worst, math.acos(min(1.0, abs(np.vdot(v, top)))))
        _report("unit-oracle: principal eigenvector vs eigh", worst < 1e-6,
                f"worst angle {worst:.2e} rad")

    def test_steering_norm_equals_element_count(self):
        from uavcoex.antenna import UraGeometry, steering_vector
        rng = np.random.default_rng(103)
        ura = UraGeometry(8, 8)
        worst = 0.0
        for _ in range(50):
            v = steering_vector(ura, rng.uniform(0, 180), rng.uniform(-180, 180))
            worst = max(worst, abs(float(np.vdot(v, v).real) - 64.0) / 64.0)
        _report("unit-oracle: steering norm = element count", worst < 1e-12, f"worst {worst:.2e}")

    def test_two_antenna_toy_chain(self):
        from uavcoex.network import evaluate_slot
        noise_w = 2e-12
        h = {
            (0, 0): np.array([math.sqrt(2), 0.0], dtype=complex),
            (1, 0): np.array([1.0, 1.0], dtype=complex),
            (2, 0): np.array([1.0, 1.0j], dtype=complex),
            (0, 1): np.array([1.0, -1.0], dtype=complex),
            (1, 1): np.array([0.0, math.sqrt(2)], dtype=complex),
            (2, 1): np.array([1.0j, 1.0], dtype=complex),
        }
        gamma = {(0, 0): 3e-10, (1, 0): 1e-10, (2, 0): 5e-11,
                 (0, 1): 2e-11, (1, 1): 4e-11, (2, 1): 6e-10}
        p = {0: 0.01, 1: 0.02, 2: 0.2}
        budgets = evaluate_slot({0: (0, 1), 1: (2,)}, h, gamma, p, noise_w)

        # spreadsheet-style oracle with explicit scalar arithmetic
        snr0 = p[0] * gamma[(0, 0)] / noise_w
        snr1 = p[1] * gamma[(1, 0)] / noise_w
        other = p[2] * gamma[(2, 0)] / noise_w
        a11 = snr0 * 2.0 + snr1 + (1.0 + other)
        a12 = a21 = snr1
        a22 = snr1 + (1.0 + other)
        det = a11 * a22 - a12 * a21
        w = np.array([a22 * math.sqrt(2) / det, -a21 * math.sqrt(2) / det], dtype=complex)
        cg = lambda vec: abs(np.conj(w[0]) * vec[0] + np.conj(w[1]) * vec[1]) ** 2
        p_rx = p[0] * gamma[(0, 0)] * cg(h[(0, 0)])
        interf = p[1] * gamma[(1, 0)] * cg(h[(1, 0)]) + p[2] * gamma[(2, 0)] * cg(h[(2, 0)])
        noise = noise_w * float(abs(w[0]) ** 2 + abs(w[1]) ** 2)
        want = p_rx / (interf + noise)
        err = abs(budgets[0].sinr - want) / want
        _report("unit-oracle: hand-computed 2x2 toy chain", err <= 1e-9, f"rel err {err:.2e}")

    def test_rate_formula_time_share(self):
        value = radio.average_rate(1.0, 400e6, 1, 10)
        _report("unit-oracle: rate at 0 dB, 400 MHz, 10% share", value == 40e6,
                f"{value} bit/s (want exactly 4e7)")


def test_power_control_grid():
    params = radio.PowerControlParams()
    exact = all(radio.open_loop_power_dbm(params, float(pl)) == min(23.0, -82.0 + 0.8 * pl)
                for pl in range(0, 201))
    _report("power control law on 1 dB grid", exact, "min(23, -82 + 0.8*PL), exact")


def test_noise_limited_regime(cfg2):
    inr = cfg2.series("INR_dB", "UE").samples
    frac = float(np.mean(inr < 0.0))
    _report("noise-limited regime", frac >= 0.5,
            f"{frac:.3f} of UE INR samples below 0 dB (need >= 0.5)")


def test_power_control_benefit(cfg2, cfg3):
    med2 = quantile(cfg2.series("SINR_dB", "UE"), 0.5)
    med3 = quantile(cfg3.series("SINR_dB", "UE"), 0.5)
    delta = med2 - med3
    _report("power-control benefit", 0.5 <= delta <= 4.0,
            f"median UE SINR delta {delta:.2f} dB (need [0.5, 4])")


def _paired_bootstrap_median_gain(low, high, metric, population, replicates=1000):
    """Fraction of drop-paired bootstrap replicates where high beats low."""
    by_seed_low = {d.seed: [v for pop, m, _, v in d.sample_rows()
                            if m == metric and pop == population] for d in low.drops}
    by_seed_high = {d.seed: [v for pop, m, _, v in d.sample_rows()
                             if m == metric and pop == population] for d in high.drops}
    seeds = sorted(set(by_seed_low) & set(by_seed_high))
    rng = np.random.default_rng(12345)
    wins = 0
    for _ in range(replicates):
        picks = rng.choice(len(seeds), size=len(seeds), replace=True)
        lo = np.concatenate([by_seed_low[seeds[i]] for i in picks])
        hi = np.concatenate([by_seed_high[seeds[i]] for i in picks])
        if np.median(hi) > np.median(lo):
            wins += 1
    return wins / replicates


def test_mu_mimo_gain(cfg2, mu4):
    details = []
    ok = True
    for population in ("UE", "UAV"):
        med1 = quantile(cfg2.series("rate_bps", population), 0.5)
        med4 = quantile(mu4.series("rate_bps", population), 0.5)
        confidence = _paired_bootstrap_median_gain(cfg2, mu4, "rate_bps", population)
        ok = ok and med4 > med1 and confidence >= 0.95
        details.append(f"{population}: {med1 / 1e6:.1f} -> {med4 / 1e6:.1f} Mbit/s, "
                       f"bootstrap confidence {confidence:.3f}")
    _report("MU-MIMO rate gain (n_u=4 over n_u=1)", ok, "; ".join(details))


def test_closed_access_coverage(closed_sweep):
    f = {isd: closed_sweep[isd].outage_fraction("UAV") for isd in (400, 200, 100)}
    monotone = f[400] >= f[200] >= f[100]
    halved = (f[200] <= f[400] / 2.0) if f[400] > 0 else (f[200] == 0.0)
    _report("closed-access coverage", monotone and halved,
            f"UAV outage {f[400]:.3f} @400m, {f[200]:.3f} @200m, {f[100]:.3f} @100m")


def test_near_far_cancellation(closed_sweep):
    medians = [quantile(c.series("rate_bps", "UE"), 0.5) for c in closed_sweep.values()]
    spread = (max(medians) - min(medians)) / min(medians)
    _report("near-far cancellation", spread < 0.25,
            f"median UE rate varies {100 * spread:.1f}% across the dedicated ISD sweep")


def test_open_access_benefit(open_arms):
    details = []
    ok = True
    for population in ("UE", "UAV"):
        base = quantile(open_arms["inf"].series("rate_bps", population), 0.5)
        dense = quantile(open_arms["200"].series("rate_bps", population), 0.5)
        ok = ok and dense > base
        details.append(f"{population}: {base / 1e6:.1f} -> {dense / 1e6:.1f} Mbit/s")
    _report("open-access benefit", ok, "; ".join(details))


def test_determinism_across_parallelism(tmp_path):
    config = _desk_config(n_drops=6)
    seeds = list(range(1, 7))
    serial = run_campaign(config, seeds=seeds, parallelism=1)
    parallel = run_campaign(config, seeds=seeds, parallelism=8)
    files = {}
    for label, campaign in (("serial", serial), ("parallel", parallel)):
        csv_path = tmp_path / f"{label}.csv"
        json_path = tmp_path / f"{label}.json"
        write_samples_csv(csv_path, campaign)
        write_summary_json(json_path, campaign)
        files[label] = (csv_path.read_bytes(), json_path.read_bytes())
    identical = files["serial"] == files["parallel"]
    _report("determinism across parallelism 1 and 8", identical,
            "byte-identical samples.csv and summary.json")
