"""Link-level mathematics.

Open-loop uplink power control, long-term transmit eigen-beamforming,
per-slot MMSE receive combining, and the received-power / interference /
SINR / rate chain. All conversions are exact base-10; powers are watts
internally and dBm at interfaces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BeamformingError

OPEN_LOOP = "open_loop"
MAX_POWER = "max_power"
OFF = "off"
POWER_MODES = (OPEN_LOOP, MAX_POWER, OFF)


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def linear_to_db(linear):
    return 10.0 * np.log10(linear)


def dbm_to_watt(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watt_to_dbm(watt):
    return 10.0 * np.log10(watt) + 30.0


def noise_power_w(bandwidth_hz: float, noise_figure_db: float = 0.0,
                  noise_psd_dbm_hz: float = -174.0) -> float:
    """Thermal noise power over the bandwidth, including the receiver figure."""
    return dbm_to_watt(noise_psd_dbm_hz + noise_figure_db) * bandwidth_hz


@dataclass(frozen=True)
class PowerControlParams:
    p0_dbm: float = -82.0
    alpha: float = 0.8
    pmax_dbm: float = 23.0
    mode: str = OPEN_LOOP

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.mode not in POWER_MODES:
            raise ValueError(f"unknown power control mode {self.mode!r}")


def open_loop_power_dbm(params: PowerControlParams, coupling_loss_db: float) -> float:
    """Transmit power for one uplink: min(pmax, p0 + alpha * loss).

    Modes other than open loop transmit at full power (the "off" mode exists
    for experiments that bypass power control entirely).
    """
    if params.mode != OPEN_LOOP:
        return params.pmax_dbm
    return min(params.pmax_dbm, params.p0_dbm + params.alpha * coupling_loss_db)


def principal_eigenvector(matrix: np.ndarray, tol: float = 1e-9,
                          max_iterations: int = 100_000) -> np.ndarray:
    """Dominant eigenvector of a Hermitian PSD matrix by power iteration.

    Starts from the all-ones vector and iterates until the residual
    ||R v - lam v|| drops below tol * lam, then fixes the global phase so the
    largest-magnitude entry is real and positive (first such entry on ties).
    Deterministic by construction, so repeated calls agree bit for bit.

    When the two leading eigenvalues are nearly degenerate the iteration
    stalls inside the dominant plane; any vector there is an equivalent beam,
    so after ``max_iterations`` the current iterate is accepted as long as
    its relative residual is below 1e-5.
    """
    r = np.asarray(matrix)
    if r.ndim != 2 or r.shape[0] != r.shape[1]:
        raise ValueError("matrix must be square")
    n = r.shape[0]
    if n == 0 or not np.any(r):
        raise BeamformingError("zero covariance has no dominant direction")

    v = np.ones(n, dtype=complex) / math.sqrt(n)
    fallback = 0  # canonical-basis restarts if the start sits in the nullspace
    residual = math.inf
    lam = 0.0
    for _ in range(max_iterations):
        w = r @ v
        norm_w_sq = float(np.real(np.vdot(w, w)))
        if norm_w_sq == 0.0:
            if fallback >= n:
                raise BeamformingError("power iteration found no invariant direction")
            v = np.zeros(n, dtype=complex)
            v[fallback] = 1.0
            fallback += 1
            continue
        lam = float(np.real(np.vdot(v, w)))
        # Direct difference: the algebraic shortcut ||w||^2 - lam^2 cancels
        # catastrophically once the residual is small.
        residual = float(np.linalg.norm(w - lam * v))
        if lam > 0.0 and residual <= tol * lam:
            break
        v = w / math.sqrt(norm_w_sq)
    else:
        if lam <= 0.0:
            raise BeamformingError("covariance is not positive semidefinite")
        if residual > 1e-5 * lam:
            raise BeamformingError(
                f"power iteration stalled at relative residual {residual / lam:.2e}"
            )
    pivot = int(np.argmax(np.abs(v)))
    phase = v[pivot] / abs(v[pivot])
    return v * phase.conjugate()


def mmse_weights(h_target: np.ndarray,
                 co_scheduled: list[tuple[np.ndarray, float]],
                 other_cell_snr_sum: float = 0.0) -> np.ndarray:
    """MMSE receive vector for one user against its co-scheduled set.

    ``co_scheduled`` holds (channel, per-antenna snr) pairs for every active
    user of the cell, the target included. Out-of-cell interference enters as
    a white term: the identity is scaled by one plus the given snr sum.
    """
    h_target = np.asarray(h_target, dtype=complex)
    n = h_target.shape[0]
    if other_cell_snr_sum < 0:
        raise ValueError("out-of-cell snr sum must be non-negative")
    a = (1.0 + other_cell_snr_sum) * np.eye(n, dtype=complex)
    for h, snr in co_scheduled:
        h = np.asarray(h, dtype=complex)
        if h.shape != (n,):
            raise ValueError(f"channel dimension mismatch: {h.shape} vs ({n},)")
        if snr < 0:
            raise ValueError("snr must be non-negative")
        a += snr * np.outer(h, h.conj())
    return np.linalg.solve(a, h_target)


def combining_gain(w: np.ndarray, h: np.ndarray) -> float:
    """|w^* h|^2 of an (unnormalized) combiner against a channel vector."""
    return float(abs(np.vdot(w, h)) ** 2)


@dataclass(frozen=True)
class LinkBudget:
    """Everything that enters one user's per-slot SINR."""

    gamma: float            # linear large-scale link gain
    g: float                # combining gain |w^* h|^2
    p_tx_dbm: float
    p_rx_w: float
    interference_w: float
    noise_w: float          # N0 * B * ||w||^2

    @property
    def sinr(self) -> float:
        return self.p_rx_w / (self.interference_w + self.noise_w)

    @property
    def inr(self) -> float:
        return self.interference_w / self.noise_w


def sinr(target: tuple[float, float, float],
         in_cell: list[tuple[float, float, float]],
         out_of_cell: list[tuple[float, float, float]],
         w: np.ndarray, n0_w_hz: float, bandwidth_hz: float) -> tuple[float, float]:
    """SINR and INR, both linear, for one combined uplink.

    Every entry is a (tx power W, gamma, combining gain) triple; the
    combining gains must all be taken against the same receive vector ``w``.
    Received power is p * g * gamma, interference sums the same product over
    both interferer lists, and the noise floor is N0 * B * ||w||^2.
    """
    p, gamma, g = target
    p_rx = p * gamma * g
    interference = 0.0
    for pk, gk, ck in in_cell:
        interference += pk * gk * ck
    for pk, gk, ck in out_of_cell:
        interference += pk * gk * ck
    noise = n0_w_hz * bandwidth_hz * float(np.real(np.vdot(w, w)))
    return p_rx / (interference + noise), interference / noise


def average_rate(sinr_linear: float, bandwidth_hz: float,
                 n_active: int, n_associated: int) -> float:
    """Long-run throughput in bit/s of a user scheduled a fraction of slots.

    The user holds the whole bandwidth while active and is active in
    n_active / n_associated of the slots.
    """
    if n_associated < 1:
        raise ValueError("a scheduled user implies at least one associated user")
    if n_active > n_associated:
        raise ValueError("active count cannot exceed associated count")
    # Multiply before dividing so round ratios (e.g. 1/10 of 400 MHz) stay exact.
    return n_active * bandwidth_hz * math.log2(1.0 + sinr_linear) / n_associated
