"""Element radiation patterns and uniform rectangular array responses.

Angles follow the antenna-local convention of :mod:`uavcoex.geometry`:
zenith angle theta in [0, 180] measured from the local z axis, azimuth phi
in (-180, 180] measured from the local x axis, boresight at (90, 0).

Array elements sit in the local y-z plane (broadside arrays): rows are
stacked along local z, columns along local y, both on a regular grid in
units of the carrier wavelength.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import PatternLoadError


@dataclass(frozen=True)
class ParametricElementPattern:
    """Sectorized element: quadratic rolloff in both cuts with hard floors.

    theta_3db/phi_3db are the half-power beamwidths, sla_v caps the vertical
    attenuation, a_m caps the horizontal attenuation and the combined one.
    """

    theta_3db_deg: float = 65.0
    phi_3db_deg: float = 65.0
    sla_v_db: float = 30.0
    a_m_db: float = 30.0
    g_max_dbi: float = 8.0

    def __post_init__(self):
        if self.theta_3db_deg <= 0 or self.phi_3db_deg <= 0:
            raise ValueError("beamwidths must be positive")
        if self.sla_v_db < 0 or self.a_m_db < 0:
            raise ValueError("attenuation limits must be non-negative")

    def gain_dbi(self, theta_deg: float, phi_deg: float) -> float:
        return element_gain_parametric(self, theta_deg, phi_deg)


def element_gain_parametric(pattern: ParametricElementPattern, theta_deg, phi_deg):
    """Element gain in dBi at local angles (theta_deg, phi_deg).

    Vertical cut 12*((theta-90)/theta_3db)^2 capped at sla_v, horizontal cut
    12*(phi/phi_3db)^2 capped at a_m, sum capped at a_m, subtracted from the
    peak gain. Accepts scalars or numpy arrays.
    """
    theta = np.asarray(theta_deg, dtype=float)
    phi = np.asarray(phi_deg, dtype=float)
    att_v = np.minimum(12.0 * ((theta - 90.0) / pattern.theta_3db_deg) ** 2, pattern.sla_v_db)
    att_h = np.minimum(12.0 * (phi / pattern.phi_3db_deg) ** 2, pattern.a_m_db)
    att = np.minimum(att_v + att_h, pattern.a_m_db)
    gain = pattern.g_max_dbi - att
    return float(gain) if gain.ndim == 0 else gain


@dataclass(frozen=True, eq=False)
class TabulatedPattern:
    """Full-sphere gain table on a rectangular (theta, phi) grid, in dBi."""

    theta_grid_deg: np.ndarray
    phi_grid_deg: np.ndarray
    gain_dbi: np.ndarray  # shape (len(theta_grid), len(phi_grid))

    def validate(self) -> None:
        t, p, g = self.theta_grid_deg, self.phi_grid_deg, self.gain_dbi
        if t.size < 2 or p.size < 2:
            raise PatternLoadError("pattern grid needs at least two nodes per axis")
        if np.any(np.diff(t) <= 0):
            raise PatternLoadError("theta grid is not strictly increasing")
        if np.any(np.diff(p) <= 0):
            raise PatternLoadError("phi grid is not strictly increasing")
        if t[0] > 0.0 or t[-1] < 180.0:
            raise PatternLoadError("theta grid must cover [0, 180] degrees")
        if p[0] > -180.0 or p[-1] < 180.0:
            raise PatternLoadError("phi grid must cover [-180, 180] degrees")
        if g.shape != (t.size, p.size):
            raise PatternLoadError(
                f"gain table shape {g.shape} does not match grid {(t.size, p.size)}"
            )
        bad = np.argwhere(~np.isfinite(g))
        if bad.size:
            i, j = bad[0]
            raise PatternLoadError(
                f"non-finite gain at theta={t[i]:g} deg (row {i}), phi={p[j]:g} deg (column {j})"
            )

    def gain_dbi_at(self, theta_deg: float, phi_deg: float) -> float:
        return element_gain_tabulated(self, theta_deg, phi_deg)


def element_gain_tabulated(pattern: TabulatedPattern, theta_deg, phi_deg):
    """Bilinear interpolation on the gain table; phi wraps modulo 360.

    Accepts scalars or numpy arrays of angles.
    """
    t = np.clip(np.asarray(theta_deg, dtype=float), 0.0, 180.0)
    p = np.asarray(phi_deg, dtype=float)
    # wrap only out-of-range azimuths so both grid endpoints stay exact
    p = np.where((p < -180.0) | (p > 180.0), (p + 180.0) % 360.0 - 180.0, p)
    tg, pg, g = pattern.theta_grid_deg, pattern.phi_grid_deg, pattern.gain_dbi

    i = np.clip(np.searchsorted(tg, t, side="right") - 1, 0, tg.size - 2)
    j = np.clip(np.searchsorted(pg, p, side="right") - 1, 0, pg.size - 2)
    ft = np.clip((t - tg[i]) / (tg[i + 1] - tg[i]), 0.0, 1.0)
    fp = np.clip((p - pg[j]) / (pg[j + 1] - pg[j]), 0.0, 1.0)
    top = g[i, j] * (1 - fp) + g[i, j + 1] * fp
    bottom = g[i + 1, j] * (1 - fp) + g[i + 1, j + 1] * fp
    out = top * (1 - ft) + bottom * ft
    return float(out) if out.ndim == 0 else out


def element_gain(pattern, theta_deg: float, phi_deg: float) -> float:
    """Dispatch on the pattern kind."""
    if isinstance(pattern, ParametricElementPattern):
        return element_gain_parametric(pattern, theta_deg, phi_deg)
    if isinstance(pattern, TabulatedPattern):
        return element_gain_tabulated(pattern, theta_deg, phi_deg)
    raise TypeError(f"unsupported pattern type {type(pattern).__name__}")


@dataclass(frozen=True)
class UraGeometry:
    """Uniform rectangular array: rows along local z, columns along local y."""

    rows: int
    cols: int
    spacing_wavelengths: float = 0.5

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("array needs at least one row and one column")
        if self.spacing_wavelengths <= 0:
            raise ValueError("element spacing must be positive")

    @property
    def n_elements(self) -> int:
        return self.rows * self.cols


def steering_vector(ura: UraGeometry, theta_deg: float, phi_deg: float) -> np.ndarray:
    """Unit-modulus array response, flattened row-major, length rows*cols.

    Element (p, q) carries phase 2*pi*spacing*(p*u + q*v), with direction
    cosines u = cos(theta) along the rows and v = sin(theta)*sin(phi) along
    the columns.
    """
    return steering_matrix(ura, np.atleast_1d(float(theta_deg)),
                           np.atleast_1d(float(phi_deg)))[0]


def steering_matrix(ura: UraGeometry, theta_deg: np.ndarray, phi_deg: np.ndarray) -> np.ndarray:
    """Stacked steering vectors, shape (n_directions, rows*cols)."""
    t = np.radians(np.asarray(theta_deg, dtype=float))
    p = np.radians(np.asarray(phi_deg, dtype=float))
    u = np.cos(t)
    v = np.sin(t) * np.sin(p)
    scale = 2.0 * math.pi * ura.spacing_wavelengths
    phases = scale * (u[:, None, None] * np.arange(ura.rows)[None, :, None]
                      + v[:, None, None] * np.arange(ura.cols)[None, None, :])
    return np.exp(1j * phases).reshape(t.size, ura.n_elements)


def default_uav_pattern_path() -> Path:
    """Bundled synthetic UAV-frame pattern (see data/uav_pattern_synthetic.csv)."""
    return Path(__file__).parent / "data" / "uav_pattern_synthetic.csv"


def load_pattern(path) -> TabulatedPattern:
    """Load a tabulated pattern from CSV.

    Format: lines starting with '#' are comments; the first data row holds a
    corner label followed by the phi grid in degrees; every following row
    holds the theta value and then one gain in dBi per phi node.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise PatternLoadError(f"cannot read pattern file {path}: {exc}") from exc

    rows = [
        row for row in csv.reader(text.splitlines())
        if row and row[0].strip() and not row[0].lstrip().startswith("#")
    ]
    if not rows:
        raise PatternLoadError(f"pattern file {path} contains no data")
    if len(rows) < 3 or len(rows[0]) < 3:
        raise PatternLoadError(f"pattern file {path} is too small to cover the sphere")

    try:
        phi_grid = np.array([float(v) for v in rows[0][1:]])
    except ValueError as exc:
        raise PatternLoadError(f"bad phi grid header in {path}: {exc}") from exc

    theta_vals, gains = [], []
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != phi_grid.size + 1:
            raise PatternLoadError(
                f"{path}: line {r} has {len(row) - 1} gain cells, expected {phi_grid.size}"
            )
        try:
            theta_vals.append(float(row[0]))
            gains.append([float(v) for v in row[1:]])
        except ValueError as exc:
            raise PatternLoadError(f"{path}: line {r}: {exc}") from exc

    pattern = TabulatedPattern(
        theta_grid_deg=np.array(theta_vals),
        phi_grid_deg=phi_grid,
        gain_dbi=np.array(gains),
    )
    pattern.validate()
    return pattern
