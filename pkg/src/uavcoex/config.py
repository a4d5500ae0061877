"""Scenario configuration: defaults, presets, and the key=value file format.

Defaults reproduce the baseline urban scenario: 1 km side, 200 m standard
intersite distance, 28 GHz carrier over 400 MHz, 6 dB station noise figure,
23 dBm user power cap, open-loop power control with P0 = -82 dBm and
alpha = 0.8, 10 associated users per cell, 65 degree element beamwidths.

Configuration files are plain text, one ``key = value`` per line, '#'
comments allowed. The same keys are accepted by the CLI ``--set``
overrides. An infinite dedicated-tier intersite distance is spelled
``inf`` and disables that tier.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from pathlib import Path

from .antenna import ParametricElementPattern, UraGeometry, default_uav_pattern_path
from .channel import ChannelParams, load_aerial_los_table
from .errors import ConfigurationError
from .network import ACCESS_MODES, SINGLE_MNO
from .radio import POWER_MODES, OPEN_LOOP, PowerControlParams


@dataclass
class ScenarioConfig:
    # Geometry
    area_side_m: float = 1000.0
    isd_s_m: float = 200.0
    isd_d_m: float = math.inf
    mode: str = SINGLE_MNO                  # single | closed | open
    std_bs_height_m: float = 10.0
    ded_bs_height_min_m: float = 10.0
    ded_bs_height_max_m: float = 30.0
    std_bs_tilt_deg: float = -12.0
    ded_bs_tilt_deg: float = 45.0
    min_ue_bs_2d_m: float = 10.0
    min_uav_bs_3d_m: float = 10.0
    ue_height_m: float = 1.5
    uav_height_m: float = 120.0
    dedicated_placement: str = "independent"

    # Radio
    bandwidth_hz: float = 400e6
    frequency_ghz: float = 28.0
    noise_figure_db: float = 6.0
    pmax_dbm: float = 23.0
    p0_dbm: float = -82.0
    alpha: float = 0.8
    ue_power_mode: str = OPEN_LOOP
    uav_power_mode: str = OPEN_LOOP

    # Arrays and element patterns
    bs_array_rows: int = 8
    bs_array_cols: int = 8
    user_array_rows: int = 4
    user_array_cols: int = 4
    array_spacing_wavelengths: float = 0.5
    theta_3db_deg: float = 65.0
    phi_3db_deg: float = 65.0
    sla_v_db: float = 30.0
    a_m_db: float = 30.0
    g_max_dbi: float = 8.0
    uav_pattern_file: str = ""              # empty: bundled synthetic pattern

    # Population and scheduling
    ues_per_cell: int = 5
    uavs_per_cell: int = 5
    table2_config: int | None = None        # 1, 2, or 3; expands on load
    n_u: int = 1                            # users scheduled per slot
    n_slots: int = 10
    n_drops: int = 50
    base_seed: int = 1
    sinr_outage_threshold_db: float = -6.0

    # Reduced cluster model
    n_nlos_paths: int = 4
    azimuth_spread_deg: float = 30.0
    elevation_spread_deg: float = 10.0
    excess_loss_mean_db: float = 6.0
    shadow_sigma_los_db: float = 4.0
    shadow_sigma_nlos_db: float = 7.8

    # Aerial channel surrogate
    aerial_los_d0_m: float = 200.0
    aerial_los_scale_m: float = 40.0
    aerial_outage_prob: float = 0.0
    aerial_los_table_file: str = ""
    aerial_los_const_db: float = 32.4
    aerial_los_dist_coef: float = 21.0
    aerial_los_freq_coef: float = 20.0
    aerial_nlos_const_db: float = 22.4
    aerial_nlos_dist_coef: float = 35.3
    aerial_nlos_freq_coef: float = 21.3

    # ------------------------------------------------------------------
    def validate(self) -> list[ConfigurationError]:
        """Collect every invariant violation; empty means the config is usable."""
        errors = []

        def check(ok, field, message):
            if not ok:
                errors.append(ConfigurationError(message, field=field))

        check(self.area_side_m > 0, "area_side_m", "must be positive")
        check(self.isd_s_m > 0, "isd_s_m", "must be positive")
        check(self.isd_d_m > 0, "isd_d_m", "must be positive (inf disables the tier)")
        check(self.mode in ACCESS_MODES, "mode", f"must be one of {ACCESS_MODES}")
        check(self.dedicated_placement == "independent", "dedicated_placement",
              "only 'independent' is supported")
        check(self.ded_bs_height_min_m <= self.ded_bs_height_max_m,
              "ded_bs_height_min_m", "range is inverted")
        check(self.bandwidth_hz > 0, "bandwidth_hz", "must be positive")
        check(self.frequency_ghz > 0, "frequency_ghz", "must be positive")
        check(0.0 <= self.alpha <= 1.0, "alpha", "must lie in [0, 1]")
        check(self.ue_power_mode in POWER_MODES, "ue_power_mode", f"must be one of {POWER_MODES}")
        check(self.uav_power_mode in POWER_MODES, "uav_power_mode", f"must be one of {POWER_MODES}")
        check(self.bs_array_rows >= 1 and self.bs_array_cols >= 1, "bs_array_rows", "need a non-empty array")
        check(self.user_array_rows >= 1 and self.user_array_cols >= 1, "user_array_rows", "need a non-empty array")
        check(self.array_spacing_wavelengths > 0, "array_spacing_wavelengths", "must be positive")
        check(self.theta_3db_deg > 0 and self.phi_3db_deg > 0, "theta_3db_deg", "beamwidths must be positive")
        check(self.sla_v_db >= 0 and self.a_m_db >= 0, "sla_v_db", "attenuation limits must be non-negative")
        check(self.ues_per_cell >= 0, "ues_per_cell", "must be non-negative")
        check(self.uavs_per_cell >= 0, "uavs_per_cell", "must be non-negative")
        check(self.table2_config in (None, 1, 2, 3), "table2_config", "must be 1, 2, or 3")
        check(self.n_u >= 1, "n_u", "must be at least 1")
        check(self.n_slots >= 1, "n_slots", "must be at least 1")
        check(self.n_drops >= 1, "n_drops", "must be at least 1")
        check(self.n_nlos_paths >= 0, "n_nlos_paths", "must be non-negative")
        check(self.excess_loss_mean_db >= 0, "excess_loss_mean_db", "must be non-negative")
        check(self.shadow_sigma_los_db >= 0 and self.shadow_sigma_nlos_db >= 0,
              "shadow_sigma_los_db", "shadowing deviations must be non-negative")
        check(0.0 <= self.aerial_outage_prob <= 1.0, "aerial_outage_prob", "must lie in [0, 1]")
        check(self.aerial_los_scale_m > 0, "aerial_los_scale_m", "must be positive")
        check(self.min_ue_bs_2d_m >= 0 and self.min_uav_bs_3d_m >= 0,
              "min_ue_bs_2d_m", "minimum distances must be non-negative")
        return errors

    def require_valid(self) -> "ScenarioConfig":
        errors = self.validate()
        if errors:
            raise errors[0]
        return self

    # Derived objects -----------------------------------------------------
    def seeds(self) -> list[int]:
        return list(range(self.base_seed, self.base_seed + self.n_drops))

    def bs_element_pattern(self) -> ParametricElementPattern:
        return ParametricElementPattern(self.theta_3db_deg, self.phi_3db_deg,
                                        self.sla_v_db, self.a_m_db, self.g_max_dbi)

    def bs_array(self) -> UraGeometry:
        return UraGeometry(self.bs_array_rows, self.bs_array_cols, self.array_spacing_wavelengths)

    def user_array(self) -> UraGeometry:
        return UraGeometry(self.user_array_rows, self.user_array_cols, self.array_spacing_wavelengths)

    def uav_pattern_path(self) -> Path:
        return Path(self.uav_pattern_file) if self.uav_pattern_file else default_uav_pattern_path()

    def channel_params(self) -> ChannelParams:
        table = None
        if self.aerial_los_table_file:
            table = load_aerial_los_table(self.aerial_los_table_file)
        return ChannelParams(
            n_scattered_paths=self.n_nlos_paths,
            azimuth_spread_deg=self.azimuth_spread_deg,
            elevation_spread_deg=self.elevation_spread_deg,
            excess_loss_mean_db=self.excess_loss_mean_db,
            shadow_sigma_los_db=self.shadow_sigma_los_db,
            shadow_sigma_nlos_db=self.shadow_sigma_nlos_db,
            aerial_los_d0_m=self.aerial_los_d0_m,
            aerial_los_scale_m=self.aerial_los_scale_m,
            aerial_outage_prob=self.aerial_outage_prob,
            aerial_los_coeffs=(self.aerial_los_const_db, self.aerial_los_dist_coef,
                               self.aerial_los_freq_coef),
            aerial_nlos_coeffs=(self.aerial_nlos_const_db, self.aerial_nlos_dist_coef,
                                self.aerial_nlos_freq_coef),
            aerial_los_table=table,
        )

    def power_control(self, kind: str) -> PowerControlParams:
        mode = self.uav_power_mode if kind == "uav" else self.ue_power_mode
        return PowerControlParams(self.p0_dbm, self.alpha, self.pmax_dbm, mode)

    # File round trip ------------------------------------------------------
    def to_text(self) -> str:
        lines = ["# uavcoex scenario configuration"]
        for f in dataclasses.fields(self):
            lines.append(f"{f.name} = {_format_value(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    def to_file(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def from_file(cls, path) -> "ScenarioConfig":
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
        return cls().with_overrides(parse_key_values(text))

    def with_overrides(self, overrides: dict[str, str]) -> "ScenarioConfig":
        """New config with the given raw key=value overrides applied.

        A ``table2_config`` key expands into its population and power-control
        fields first, so explicit keys in the same batch still win.
        """
        cfg = dataclasses.replace(self)
        items = dict(overrides)
        if "table2_config" in items:
            cfg = _apply_field(cfg, "table2_config", items.pop("table2_config"))
            if cfg.table2_config is not None:
                cfg = _expand_table2(cfg)
        for key, raw in items.items():
            cfg = _apply_field(cfg, key, raw)
        return cfg


# A few short spellings accepted at the CLI and in files.
_ALIASES = {
    "isd_s": "isd_s_m",
    "isd_d": "isd_d_m",
    "area": "area_side_m",
    "bandwidth": "bandwidth_hz",
    "frequency": "frequency_ghz",
    "seed": "base_seed",
}

_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ScenarioConfig)}


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else ("inf" if value > 0 else "-inf")
    return str(value)


def _parse_value(field: str, raw: str):
    kind = _FIELD_TYPES[field]
    raw = raw.strip()
    try:
        if kind == "float":
            return float(raw)
        if kind == "int":
            return int(raw)
        if kind == "int | None":
            return None if raw == "" else int(raw)
        return raw  # str fields keep the raw token
    except ValueError as exc:
        raise ConfigurationError(f"cannot parse {raw!r} as {kind}", field=field) from exc


def resolve_key(key: str) -> str:
    key = key.strip()
    key = _ALIASES.get(key, key)
    if key not in _FIELD_TYPES:
        raise ConfigurationError("unknown configuration key", field=key)
    return key


def _apply_field(cfg: ScenarioConfig, key: str, raw: str) -> ScenarioConfig:
    name = resolve_key(key)
    return dataclasses.replace(cfg, **{name: _parse_value(name, str(raw))})


def _expand_table2(cfg: ScenarioConfig) -> ScenarioConfig:
    """Population mix and UAV power control of the three studied setups."""
    selector = cfg.table2_config
    if selector == 1:
        return dataclasses.replace(cfg, ues_per_cell=10, uavs_per_cell=0)
    if selector == 2:
        return dataclasses.replace(cfg, ues_per_cell=5, uavs_per_cell=5,
                                   uav_power_mode="open_loop")
    if selector == 3:
        return dataclasses.replace(cfg, ues_per_cell=5, uavs_per_cell=5,
                                   uav_power_mode="max_power")
    raise ConfigurationError("must be 1, 2, or 3", field="table2_config")


def parse_key_values(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; later duplicates win."""
    result: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigurationError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        result[key.strip()] = value.split("#", 1)[0].strip()
    return result


def parse_set_option(option: str) -> tuple[str, str]:
    """Split one --set key=value token."""
    if "=" not in option:
        raise ConfigurationError(f"--set expects key=value, got {option!r}")
    key, _, value = option.partition("=")
    return key.strip(), value.strip()


# Bundled presets: (description, overrides). Full-scale presets mirror the
# published study; desk-* presets shrink the area and drop count for CI.
_FULL = {"area_side_m": "1000", "n_drops": "50"}
_DESK = {"area_side_m": "500", "n_drops": "10"}

PRESETS: dict[str, tuple[str, dict[str, str]]] = {
    "table1-config1": ("Single operator, no UAVs, SU-MIMO",
                       {**_FULL, "mode": "single", "table2_config": "1", "n_u": "1"}),
    "table1-config2": ("Single operator, 50% UAVs with open-loop power, SU-MIMO",
                       {**_FULL, "mode": "single", "table2_config": "2", "n_u": "1"}),
    "table1-config3": ("Single operator, 50% UAVs at full power, SU-MIMO",
                       {**_FULL, "mode": "single", "table2_config": "3", "n_u": "1"}),
    "fig5-mumimo": ("Single operator, 50% UAVs, MU-MIMO base (sweep n_u over 1,2,4)",
                    {**_FULL, "mode": "single", "table2_config": "2", "n_u": "2"}),
    "fig6-closed": ("Two operators, closed access, dedicated ISD 200 m, n_u = 2",
                    {**_FULL, "mode": "closed", "table2_config": "2", "isd_d_m": "200", "n_u": "2"}),
    "fig7-open": ("Two operators, open access, dedicated ISD 200 m, n_u = 2",
                  {**_FULL, "mode": "open", "table2_config": "2", "isd_d_m": "200", "n_u": "2"}),
    "desk-config1": ("Desk-scale variant of table1-config1",
                     {**_DESK, "mode": "single", "table2_config": "1", "n_u": "1"}),
    "desk-config2": ("Desk-scale variant of table1-config2",
                     {**_DESK, "mode": "single", "table2_config": "2", "n_u": "1"}),
    "desk-config3": ("Desk-scale variant of table1-config3",
                     {**_DESK, "mode": "single", "table2_config": "3", "n_u": "1"}),
    "desk-mumimo": ("Desk-scale variant of fig5-mumimo",
                    {**_DESK, "mode": "single", "table2_config": "2", "n_u": "2"}),
    "desk-closed": ("Desk-scale variant of fig6-closed",
                    {**_DESK, "mode": "closed", "table2_config": "2", "isd_d_m": "200", "n_u": "2"}),
    "desk-open": ("Desk-scale variant of fig7-open",
                  {**_DESK, "mode": "open", "table2_config": "2", "isd_d_m": "200", "n_u": "2"}),
}


def preset_overrides(name: str) -> dict[str, str]:
    if name not in PRESETS:
        known = ", ".join(sorted(PRESETS))
        raise ConfigurationError(f"unknown preset {name!r}; known presets: {known}")
    return dict(PRESETS[name][1])
