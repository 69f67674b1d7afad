import json
import math

import numpy as np
import pytest

from polarsim.config import (
    SCHEMA_VERSION,
    ConfigError,
    config_from_dict,
    default_config,
    dump_config,
    load_config,
)
from polarsim.records import (
    ResultRecord,
    Table,
    load_record,
    read_table_csv,
    save_record,
    write_gnuplot,
    write_table_csv,
)


class TestConfig:
    def test_defaults_per_experiment(self):
        assert default_config("grid").sample_counts == (4, 8, 16, 32)
        assert default_config("switching").sample_counts == (6, 8, 16, 24, 32)
        assert default_config("switching").switching_windows == (0.05, 0.1, 0.2)
        assert default_config("qber").ds_grid[-1] == 0.3 and len(default_config("qber").ds_grid) == 13
        with pytest.raises(ConfigError):
            default_config("bogus")

    def test_json_round_trip(self, tmp_path):
        for exp in ("grid", "switching", "qber", "track"):
            cfg = default_config(exp)
            dump_config(cfg, tmp_path / f"{exp}.json")
            assert load_config(tmp_path / f"{exp}.json") == cfg

    def test_partial_document(self):
        cfg = config_from_dict({"experiment": "grid", "seed": 7, "sample_counts": [8, 16], "sigma_i": 0})
        assert cfg.seed == 7 and cfg.sample_counts == (8, 16) and cfg.sigma_i == 0.0
        assert isinstance(cfg.sigma_i, float)

    @pytest.mark.parametrize(
        "patch",
        [
            {"sigma": 0.1},
            {"schema_version": SCHEMA_VERSION + 1},
            {"sigma_i": -0.1},
            {"exposure": 0},
            {"sample_counts": [5]},
            {"sample_counts": []},
            {"sample_counts": [16, 24]},
            {"repeats": 2.5},
            {"seed": "abc"},
            {"ds_grid": [0.1, 2.5]},
            {"switching_windows": [0.1, -0.05]},
            {"tau_interpretation": "guess"},
            {"angle_convention": "other"},
            {"track_axis": [0, 0, 0]},
            {"track_kind": "jitter"},
        ],
    )
    def test_rejected(self, patch):
        with pytest.raises(ConfigError):
            config_from_dict({"experiment": "grid", **patch})

    def test_switching_rejects_direct_count(self):
        with pytest.raises(ConfigError):
            config_from_dict({"experiment": "switching", "sample_counts": [4, 8]})

    def test_missing_experiment(self):
        with pytest.raises(ConfigError):
            config_from_dict({"seed": 1})

    def test_bad_files(self, tmp_path):
        (tmp_path / "a.json").write_text("{not json")
        (tmp_path / "b.json").write_text("[1, 2]")
        for name in ("a.json", "b.json", "missing.json"):
            with pytest.raises(ConfigError):
                load_config(tmp_path / name)


def sample_record() -> ResultRecord:
    t = Table(("i", "name", "x"), [(0, "a", 0.1), (1, "b", 1 / 3), (2, "c", -2.5e-17)])
    return ResultRecord("grid", default_config("grid").to_dict(), {"mean_x": float(np.mean(t.column("x")))}, {"t": t})


class TestRecords:
    def test_table_helpers(self):
        t = sample_record().tables["t"]
        assert t.column("name") == ["a", "b", "c"]
        assert t.where(name="b") == [{"i": 1, "name": "b", "x": 1 / 3}]

    def test_json_round_trip(self):
        r = sample_record()
        back = ResultRecord.from_json(r.to_json())
        assert back == r
        assert back.payload_bytes() == r.payload_bytes()

    def test_payload_excludes_timestamp(self):
        a, b = sample_record(), sample_record()
        b.created_utc = "1970-01-01T00:00:00+00:00"
        assert a.payload_bytes() == b.payload_bytes()
        assert "created_utc" in json.loads(a.to_json())

    def test_csv_round_trip(self, tmp_path):
        t = sample_record().tables["t"]
        write_table_csv(t, tmp_path / "t.csv")
        assert read_table_csv(tmp_path / "t.csv") == t

    def test_save_and_load(self, tmp_path):
        r = sample_record()
        path = save_record(r, tmp_path / "out")
        assert path.name == "result.json"
        assert (tmp_path / "out" / "t.csv").exists()
        assert load_record(tmp_path / "out") == r
        loaded = load_record(path)
        assert loaded.summary["mean_x"] == pytest.approx(np.mean(loaded.tables["t"].column("x")), abs=1e-12)

    def test_non_finite_rejected(self):
        r = sample_record()
        r.summary["bad"] = math.nan
        with pytest.raises(ValueError):
            r.to_json()

    def test_gnuplot_blocks(self, tmp_path):
        t = sample_record().tables["t"]
        write_gnuplot(tmp_path / "p.dat", [("first", t), ("second", t)])
        text = (tmp_path / "p.dat").read_text()
        blocks = text.split("\n\n\n")
        assert len(blocks) == 2
        assert blocks[0].splitlines()[:2] == ["# first", "# i name x"]
        assert blocks[1].splitlines()[2] == "0 a 0.1"
