"""Access policy, cell association, and per-slot multi-user scheduling.

Three sharing modes are supported. With a single operator every user
connects to the standard tier. With two operators in closed access, UAVs
may only use the dedicated tier and terrestrial users only the standard
one. Open access lets UAVs pick the strongest cell of either tier while
terrestrial users stay on the standard tier, which is how the dedicated
tier is reserved for aerial traffic in every mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import PipelineError
from .geometry import DEDICATED, STANDARD, UE, BaseStation, Sector, UserNode
from .radio import LinkBudget, combining_gain, mmse_weights, watt_to_dbm
from .rng import substream

SINGLE_MNO = "single"
CLOSED_ACCESS = "closed"
OPEN_ACCESS = "open"
ACCESS_MODES = (SINGLE_MNO, CLOSED_ACCESS, OPEN_ACCESS)


@dataclass(frozen=True, eq=False)
class Cell:
    """One sector of a base station; the unit users associate with."""

    id: int
    bs: BaseStation
    sector_index: int

    @property
    def sector(self) -> Sector:
        return self.bs.sectors[self.sector_index]

    @property
    def tier(self) -> str:
        return self.bs.tier

    @property
    def orientation(self) -> tuple[float, float]:
        s = self.sector
        return (s.boresight_azimuth_deg, s.tilt_deg)


def build_cells(base_stations: list[BaseStation]) -> list[Cell]:
    """Flatten stations into cells with sequential ids, in station order."""
    cells = []
    for bs in base_stations:
        for s in range(len(bs.sectors)):
            cells.append(Cell(len(cells), bs, s))
    return cells


def candidate_cells(user: UserNode, cells: list[Cell], mode: str) -> list[Cell]:
    """Cells the user is allowed to connect to under the sharing mode."""
    if mode not in ACCESS_MODES:
        raise ValueError(f"unknown access mode {mode!r}")
    if user.kind == UE or mode == SINGLE_MNO:
        return [c for c in cells if c.tier == STANDARD]
    if mode == CLOSED_ACCESS:
        return [c for c in cells if c.tier == DEDICATED]
    return list(cells)  # open access: either tier


@dataclass
class Association:
    """Outcome of cell selection for one drop."""

    serving: dict[int, int]                 # user id -> cell id
    users_of: dict[int, list[int]]          # cell id -> user ids, ascending
    outage_user_ids: list[int]              # no admissible serving cell

    def cell_load(self, cell_id: int) -> int:
        return len(self.users_of.get(cell_id, ()))


def associate(users: list[UserNode], cells: list[Cell], rx_power_w, mode: str) -> Association:
    """Connect every user to its strongest admissible cell.

    ``rx_power_w(user, cell)`` returns the long-term received power (linear,
    at maximum transmit power) or None when the link is unusable. Ties keep
    the lowest cell id; users with no usable candidate are marked in outage.
    """
    serving: dict[int, int] = {}
    users_of: dict[int, list[int]] = {}
    outage: list[int] = []
    for user in sorted(users, key=lambda u: u.id):
        best_cell = None
        best_power = -np.inf
        for cell in candidate_cells(user, cells, mode):
            power = rx_power_w(user, cell)
            if power is None:
                continue
            if power > best_power:  # strict: first (lowest id) wins ties
                best_power = power
                best_cell = cell
        if best_cell is None:
            outage.append(user.id)
        else:
            serving[user.id] = best_cell.id
            users_of.setdefault(best_cell.id, []).append(user.id)
    return Association(serving, users_of, outage)


@dataclass
class Schedule:
    """Per-cell slot grid; each slot lists the active user ids."""

    slots_of: dict[int, list[tuple[int, ...]]] = field(default_factory=dict)
    n_slots: int = 0

    def active_in(self, cell_id: int, slot: int) -> tuple[int, ...]:
        slots = self.slots_of.get(cell_id)
        return slots[slot] if slots else ()


def build_schedule(association: Association, n_u: int, n_slots: int, seed: int) -> Schedule:
    """Random round-robin: permute each cell's users once, fill slots cyclically.

    Every slot activates min(n_u, cell load) users; over the grid each user
    is active in a fraction n_u / load of the slots, up to one slot of
    rounding. Cells with load <= n_u have all their users active every slot.
    """
    if n_u < 1:
        raise ValueError("n_u must be at least 1")
    schedule = Schedule(n_slots=n_slots)
    for cell_id in sorted(association.users_of):
        user_ids = association.users_of[cell_id]
        if not user_ids:
            continue
        rng = substream(seed, "schedule", cell_id)
        order = [user_ids[i] for i in rng.permutation(len(user_ids))]
        n = len(order)
        slots = []
        if n <= n_u:
            slots = [tuple(sorted(order))] * n_slots
        else:
            cursor = 0
            for _ in range(n_slots):
                picks = [order[(cursor + i) % n] for i in range(n_u)]
                cursor = (cursor + n_u) % n
                slots.append(tuple(sorted(picks)))
        schedule.slots_of[cell_id] = slots
    return schedule


def evaluate_slot(active_by_cell: dict[int, tuple[int, ...]],
                  h, gamma, p_tx_w: dict[int, float],
                  noise_w: float) -> dict[int, LinkBudget]:
    """Receive-side evaluation of one network-wide slot.

    ``h`` and ``gamma`` map (user id, cell id) to the effective channel and
    the large-scale gain of that link; ``p_tx_w`` holds transmit powers in
    watts and ``noise_w`` is the pre-combining noise power N0 * B.

    For every cell and active user, the MMSE combiner sees the co-scheduled
    users' channels plus the out-of-cell activity as a white snr sum; the
    interference then re-applies that combiner to every other active user's
    actual channel, in cell and out.
    """
    results: dict[int, LinkBudget] = {}
    try:
        for cell_id, actives in active_by_cell.items():
            if not actives:
                continue
            other_snr = 0.0
            others: list[int] = []
            for other_cell, other_actives in active_by_cell.items():
                if other_cell == cell_id:
                    continue
                for k in other_actives:
                    other_snr += p_tx_w[k] * gamma[(k, cell_id)] / noise_w
                    others.append(k)
            co = [(h[(k, cell_id)], p_tx_w[k] * gamma[(k, cell_id)] / noise_w)
                  for k in actives]
            for u in actives:
                w = mmse_weights(h[(u, cell_id)], co, other_snr)
                interference = 0.0
                for k in actives:
                    if k == u:
                        continue
                    interference += (p_tx_w[k] * gamma[(k, cell_id)]
                                     * combining_gain(w, h[(k, cell_id)]))
                for k in others:
                    interference += (p_tx_w[k] * gamma[(k, cell_id)]
                                     * combining_gain(w, h[(k, cell_id)]))
                g_u = combining_gain(w, h[(u, cell_id)])
                results[u] = LinkBudget(
                    gamma=gamma[(u, cell_id)],
                    g=g_u,
                    p_tx_dbm=float(watt_to_dbm(p_tx_w[u])),
                    p_rx_w=p_tx_w[u] * gamma[(u, cell_id)] * g_u,
                    interference_w=interference,
                    noise_w=noise_w * float(np.real(np.vdot(w, w))),
                )
    except KeyError as exc:
        raise PipelineError(f"missing precomputed link quantity for key {exc}") from exc
    return results
