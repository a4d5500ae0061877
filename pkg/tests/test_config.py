import math

import pytest

from uavcoex.config import (
    PRESETS,
    ScenarioConfig,
    parse_key_values,
    parse_set_option,
    preset_overrides,
    resolve_key,
)
from uavcoex.errors import ConfigurationError


class TestDefaults:
    def test_baseline_parameter_table(self):
        cfg = ScenarioConfig()
        assert cfg.area_side_m == 1000.0
        assert cfg.isd_s_m == 200.0
        assert math.isinf(cfg.isd_d_m)
        assert cfg.std_bs_height_m == 10.0
        assert (cfg.ded_bs_height_min_m, cfg.ded_bs_height_max_m) == (10.0, 30.0)
        assert cfg.bandwidth_hz == 400e6
        assert cfg.frequency_ghz == 28.0
        assert cfg.noise_figure_db == 6.0
        assert cfg.uav_height_m == 120.0
        assert cfg.pmax_dbm == 23.0
        assert (cfg.theta_3db_deg, cfg.phi_3db_deg) == (65.0, 65.0)
        assert (cfg.p0_dbm, cfg.alpha) == (-82.0, 0.8)
        assert cfg.ues_per_cell + cfg.uavs_per_cell == 10
        assert (cfg.min_ue_bs_2d_m, cfg.min_uav_bs_3d_m) == (10.0, 10.0)
        assert cfg.validate() == []

    def test_bs_and_user_arrays(self):
        cfg = ScenarioConfig()
        assert cfg.bs_array().n_elements == 64
        assert cfg.user_array().n_elements == 16


class TestOverridesAndRoundTrip:
    def test_file_round_trip_is_lossless(self, tmp_path):
        cfg = ScenarioConfig().with_overrides(
            {"mode": "open", "isd_d": "200", "n_u": "2", "uav_power_mode": "max_power"})
        path = tmp_path / "scenario.cfg"
        cfg.to_file(path)
        again = ScenarioConfig.from_file(path)
        assert again == cfg

    def test_infinite_isd_round_trip(self, tmp_path):
        cfg = ScenarioConfig().with_overrides({"isd_d": "inf"})
        assert math.isinf(cfg.isd_d_m)
        path = tmp_path / "scenario.cfg"
        cfg.to_file(path)
        assert math.isinf(ScenarioConfig.from_file(path).isd_d_m)

    def test_aliases(self):
        cfg = ScenarioConfig().with_overrides({"area": "500", "isd_s": "150", "seed": "42"})
        assert (cfg.area_side_m, cfg.isd_s_m, cfg.base_seed) == (500.0, 150.0, 42)

    def test_unknown_key_names_the_field(self):
        with pytest.raises(ConfigurationError) as err:
            ScenarioConfig().with_overrides({"warp_factor": "9"})
        assert "warp_factor" in str(err.value)

    def test_bad_value_type(self):
        with pytest.raises(ConfigurationError):
            ScenarioConfig().with_overrides({"n_u": "two"})

    def test_parse_key_values(self):
        text = "# comment\n\nn_u = 2\nmode = closed  # trailing\n"
        assert parse_key_values(text) == {"n_u": "2", "mode": "closed"}
        with pytest.raises(ConfigurationError):
            parse_key_values("just words\n")

    def test_parse_set_option(self):
        assert parse_set_option("isd_d=inf") == ("isd_d", "inf")
        with pytest.raises(ConfigurationError):
            parse_set_option("isd_d")

    def test_resolve_key(self):
        assert resolve_key("isd_d") == "isd_d_m"
        with pytest.raises(ConfigurationError):
            resolve_key("nope")


class TestTableTwoConfigs:
    def test_config1_is_all_terrestrial(self):
        cfg = ScenarioConfig().with_overrides({"table2_config": "1"})
        assert (cfg.ues_per_cell, cfg.uavs_per_cell) == (10, 0)

    def test_config2_uses_open_loop(self):
        cfg = ScenarioConfig().with_overrides({"table2_config": "2"})
        assert (cfg.ues_per_cell, cfg.uavs_per_cell) == (5, 5)
        assert cfg.uav_power_mode == "open_loop"

    def test_config3_uses_max_power(self):
        cfg = ScenarioConfig().with_overrides({"table2_config": "3"})
        assert cfg.uav_power_mode == "max_power"

    def test_explicit_key_beats_expansion_in_same_batch(self):
        cfg = ScenarioConfig().with_overrides({"table2_config": "2", "uavs_per_cell": "3"})
        assert cfg.uavs_per_cell == 3

    def test_invalid_selector(self):
        cfg = ScenarioConfig().with_overrides({"n_u": "1"})
        with pytest.raises(ConfigurationError):
            cfg.with_overrides({"table2_config": "4"})


class TestValidation:
    def test_alpha_out_of_range_names_field(self):
        cfg = ScenarioConfig().with_overrides({"alpha": "1.5"})
        errors = cfg.validate()
        assert any(e.field == "alpha" for e in errors)

    def test_bad_mode(self):
        cfg = ScenarioConfig().with_overrides({"mode": "shared"})
        assert any(e.field == "mode" for e in cfg.validate())

    def test_require_valid_raises_first(self):
        cfg = ScenarioConfig().with_overrides({"alpha": "1.5"})
        with pytest.raises(ConfigurationError):
            cfg.require_valid()

    def test_dedicated_placement_pinned(self):
        cfg = ScenarioConfig().with_overrides({"dedicated_placement": "cosited"})
        assert any(e.field == "dedicated_placement" for e in cfg.validate())


class TestPresets:
    def test_all_presets_validate(self):
        for name in PRESETS:
            cfg = ScenarioConfig().with_overrides(preset_overrides(name))
            assert cfg.validate() == [], name

    def test_expected_presets_exist(self):
        for name in ("table1-config1", "table1-config2", "table1-config3",
                     "fig5-mumimo", "fig6-closed", "fig7-open",
                     "desk-config2", "desk-closed", "desk-open"):
            assert name in PRESETS

    def test_desk_presets_are_small(self):
        cfg = ScenarioConfig().with_overrides(preset_overrides("desk-config2"))
        assert cfg.area_side_m == 500.0
        assert cfg.n_drops == 10

    def test_unknown_preset(self):
        with pytest.raises(ConfigurationError):
            preset_overrides("fig99")

    def test_layering_file_then_preset_then_cli(self):
        # file < preset < explicit override
        cfg = ScenarioConfig().with_overrides({"n_u": "3", "area": "800"})  # "file"
        cfg = cfg.with_overrides(preset_overrides("desk-mumimo"))           # preset: n_u=2
        assert cfg.n_u == 2 and cfg.area_side_m == 500.0
        cfg = cfg.with_overrides({"n_u": "4"})                              # cli
        assert cfg.n_u == 4
