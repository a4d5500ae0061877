import math

import numpy as np
import pytest

from uavcoex import radio
from uavcoex.errors import BeamformingError


class TestConversions:
    def test_round_trips(self):
        for x in (-40.0, 0.0, 13.7, 80.0):
            assert math.isclose(radio.linear_to_db(radio.db_to_linear(x)), x, abs_tol=1e-12)
            assert math.isclose(radio.watt_to_dbm(radio.dbm_to_watt(x)), x, abs_tol=1e-12)

    def test_known_values(self):
        assert radio.dbm_to_watt(30.0) == 1.0
        assert radio.dbm_to_watt(0.0) == 1e-3
        assert radio.db_to_linear(0.0) == 1.0

    def test_noise_power(self):
        # -174 dBm/Hz + 6 dB figure over 400 MHz: about -82 dBm
        n = radio.noise_power_w(400e6, 6.0)
        assert math.isclose(radio.watt_to_dbm(n), -81.9794, abs_tol=1e-3)


class TestPowerControl:
    def test_open_loop_examples(self):
        params = radio.PowerControlParams()
        assert math.isclose(radio.open_loop_power_dbm(params, 100.0), -2.0, abs_tol=1e-9)
        assert math.isclose(radio.open_loop_power_dbm(params, 131.25), 23.0, abs_tol=1e-9)
        assert radio.open_loop_power_dbm(params, 0.0) == -82.0

    def test_formula_is_exact_on_a_grid(self):
        params = radio.PowerControlParams()
        for pl in range(0, 201):
            assert radio.open_loop_power_dbm(params, float(pl)) == min(23.0, -82.0 + 0.8 * pl)

    def test_monotone_and_capped(self):
        params = radio.PowerControlParams()
        previous = -math.inf
        for pl in np.linspace(0.0, 250.0, 501):
            p = radio.open_loop_power_dbm(params, float(pl))
            assert p >= previous
            assert p <= 23.0
            previous = p

    def test_full_power_modes(self):
        for mode in (radio.MAX_POWER, radio.OFF):
            params = radio.PowerControlParams(mode=mode)
            assert radio.open_loop_power_dbm(params, 40.0) == 23.0

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            radio.PowerControlParams(alpha=1.5)
        with pytest.raises(ValueError):
            radio.PowerControlParams(mode="closed_loop")


def _random_psd(n, seed, gap=None):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    r = m @ m.conj().T
    if gap is not None:  # force a clear dominant eigenvalue
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        v /= np.linalg.norm(v)
        r = r + gap * float(np.real(np.trace(r))) * np.outer(v, v.conj())
    return r


class TestPrincipalEigenvector:
    def test_identity_returns_the_deterministic_start(self):
        v = radio.principal_eigenvector(np.eye(4))
        assert np.allclose(v, np.ones(4) / 2.0)

    def test_diagonal_dominant_axis(self):
        v = radio.principal_eigenvector(np.diag([2.0, 1.0]))
        assert np.allclose(v, [1.0, 0.0], atol=1e-8)

    def test_matches_full_eigendecomposition(self):
        for seed in range(8):
            r = _random_psd(16, seed)
            v = radio.principal_eigenvector(r)
            vals, vecs = np.linalg.eigh(r)  # brute-force oracle
            top = vecs[:, -1]
            angle = math.acos(min(1.0, abs(np.vdot(v, top))))
            assert angle < 1e-6

    def test_residual_contract(self):
        for seed in range(5):
            r = _random_psd(12, seed + 50)
            v = radio.principal_eigenvector(r, tol=1e-9)
            lam = float(np.real(np.vdot(v, r @ v)))
            assert np.linalg.norm(r @ v - lam * v) <= 1e-9 * lam * 1.01
            assert math.isclose(np.linalg.norm(v), 1.0, rel_tol=1e-12)

    def test_phase_convention(self):
        for seed in range(5):
            v = radio.principal_eigenvector(_random_psd(8, seed + 9))
            pivot = int(np.argmax(np.abs(v)))
            assert abs(v[pivot].imag) < 1e-9
            assert v[pivot].real > 0

    def test_zero_matrix_raises(self):
        with pytest.raises(BeamformingError):
            radio.principal_eigenvector(np.zeros((4, 4)))

    def test_start_vector_in_nullspace_recovers(self):
        # rank-1 covariance orthogonal to the all-ones start
        a = np.array([1.0, -1.0, 0.0, 0.0]) / math.sqrt(2)
        r = np.outer(a, a)
        v = radio.principal_eigenvector(r)
        assert math.isclose(abs(np.vdot(v, a)), 1.0, rel_tol=1e-9)


class TestMmseWeights:
    def test_single_user_is_matched_filter(self):
        rng = np.random.default_rng(4)
        h = rng.normal(size=8) + 1j * rng.normal(size=8)
        w = radio.mmse_weights(h, [(h, 2.5)], 0.0)
        cos = abs(np.vdot(w, h)) / (np.linalg.norm(w) * np.linalg.norm(h))
        assert math.isclose(cos, 1.0, abs_tol=1e-9)

    def test_orthogonal_users_decouple(self):
        h1 = np.array([1.0, 0.0, 0.0, 0.0], dtype=complex) * 2.0
        h2 = np.array([0.0, 1.0, 0.0, 0.0], dtype=complex) * 2.0
        w = radio.mmse_weights(h1, [(h1, 3.0), (h2, 5.0)], 0.0)
        cos = abs(np.vdot(w, h1)) / (np.linalg.norm(w) * np.linalg.norm(h1))
        assert math.isclose(cos, 1.0, abs_tol=1e-12)

    def test_matches_direct_inversion_oracle(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            h1 = rng.normal(size=6) + 1j * rng.normal(size=6)
            h2 = rng.normal(size=6) + 1j * rng.normal(size=6)
            snr1, snr2, other = rng.uniform(0.1, 10, 3)
            w = radio.mmse_weights(h1, [(h1, snr1), (h2, snr2)], other)
            a = (snr1 * np.outer(h1, h1.conj()) + snr2 * np.outer(h2, h2.conj())
                 + (1 + other) * np.eye(6))
            oracle = np.linalg.inv(a) @ h1
            assert np.linalg.norm(w - oracle) <= 1e-9 * np.linalg.norm(oracle)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            radio.mmse_weights(np.ones(4), [(np.ones(3), 1.0)], 0.0)

    def test_negative_inputs_rejected(self):
        with pytest.raises(ValueError):
            radio.mmse_weights(np.ones(2), [(np.ones(2), -1.0)], 0.0)
        with pytest.raises(ValueError):
            radio.mmse_weights(np.ones(2), [(np.ones(2), 1.0)], -0.5)


class TestSinr:
    def test_no_interference_unit_combiner(self):
        n0 = radio.dbm_to_watt(-174.0 + 6.0)
        w = np.array([1.0 + 0j])
        p_rx = radio.dbm_to_watt(-72.0)
        s, i = radio.sinr((p_rx, 1.0, 1.0), [], [], w, n0, 400e6)
        assert i == 0.0
        # noise floor is about -82 dBm so the ratio is about 10 dB
        assert math.isclose(radio.linear_to_db(s), 9.9794, abs_tol=1e-3)

    def test_interference_limited_scale_invariance(self):
        w = np.array([1.0 + 0j, 0.5 - 0.5j])
        n0, bw = 1e-20, 1e8
        noise = n0 * bw * float(np.vdot(w, w).real)
        target = (1e-6, 1e-9, 2.0)
        interferers = [(1e4 * noise / (1e-9 * 2.0), 1e-9, 2.0)]  # I/noise = 1e4
        s1, i1 = radio.sinr(target, interferers, [], w, n0, bw)
        assert i1 > 1e3  # interference dominated
        doubled = [(2 * p, g, c) for p, g, c in interferers]
        s2, _ = radio.sinr((2 * target[0], target[1], target[2]), doubled, [], w, n0, bw)
        assert abs(s2 - s1) / s1 < 2e-4

    def test_sinr_bounded_by_snr(self):
        rng = np.random.default_rng(23)
        for _ in range(100):
            w = rng.normal(size=4) + 1j * rng.normal(size=4)
            target = tuple(rng.uniform(0.1, 2.0, 3))
            in_cell = [tuple(rng.uniform(0.1, 2.0, 3)) for _ in range(3)]
            out = [tuple(rng.uniform(0.1, 2.0, 3)) for _ in range(2)]
            s, i = radio.sinr(target, in_cell, out, w, 1e-15, 1e8)
            snr_only, _ = radio.sinr(target, [], [], w, 1e-15, 1e8)
            assert s <= snr_only
            assert i >= 0.0

    def test_mmse_is_optimal_against_true_channels(self):
        rng = np.random.default_rng(31)
        n0, bw = 4e-21, 4e8
        noise = n0 * bw
        h_u = rng.normal(size=8) + 1j * rng.normal(size=8)
        h_k = rng.normal(size=8) + 1j * rng.normal(size=8)
        p_u, p_k, g_u, g_k = 0.01, 0.02, 2e-9, 5e-9
        w = radio.mmse_weights(h_u, [(h_u, p_u * g_u / noise), (h_k, p_k * g_k / noise)], 0.0)

        def chain_sinr(wv):
            s, _ = radio.sinr((p_u, g_u, radio.combining_gain(wv, h_u)),
                              [(p_k, g_k, radio.combining_gain(wv, h_k))], [], wv, n0, bw)
            return s

        best = chain_sinr(w)
        for _ in range(20):
            d = rng.normal(size=8) + 1j * rng.normal(size=8)
            perturbed = w + 1e-2 * d / np.linalg.norm(d)
            assert chain_sinr(perturbed) <= best * (1 + 1e-12)


class TestAverageRate:
    def test_eq6_value_is_exact(self):
        assert radio.average_rate(1.0, 400e6, 1, 10) == 40e6

    def test_zero_sinr(self):
        assert radio.average_rate(0.0, 400e6, 2, 10) == 0.0

    def test_full_schedule_fraction(self):
        assert radio.average_rate(3.0, 1e8, 10, 10) == 1e8 * 2.0

    def test_monotone_in_sinr_linear_in_inputs(self):
        r1 = radio.average_rate(1.0, 1e8, 1, 4)
        r2 = radio.average_rate(2.0, 1e8, 1, 4)
        assert r2 > r1
        assert radio.average_rate(1.0, 2e8, 1, 4) == 2 * r1
        assert math.isclose(radio.average_rate(1.0, 1e8, 2, 4), 2 * r1, rel_tol=1e-12)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            radio.average_rate(1.0, 1e8, 2, 1)
        with pytest.raises(ValueError):
            radio.average_rate(1.0, 1e8, 1, 0)
