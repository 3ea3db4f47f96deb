import copy
import csv
import hashlib
import json

import numpy as np
import pytest

from chainqst import cli
from chainqst.config import config_from_dict, default_config_dict, load_config, schedule_from_dict, schedule_to_dict
from chainqst.errors import ValidationError


def write_config(tmp_path, d):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(d))
    return str(p)


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], float)


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


class TestConfig:
    def test_default_loads(self, config):
        assert config.chain.n == 4
        assert config.target.duration == 84.0
        assert len(config.chain.static_couplings) == 3

    def test_missing_coupling_path(self):
        d = default_config_dict()
        d["static_couplings"] = d["static_couplings"][:2]
        with pytest.raises(ValidationError) as exc:
            config_from_dict(d)
        assert exc.value.path == "static_couplings"

    def test_field_path_reported(self):
        d = default_config_dict()
        d["qubits"][2]["t1"] = -1.0
        with pytest.raises(ValidationError) as exc:
            config_from_dict(d)
        assert exc.value.path.startswith("qubits[2]")

    def test_unknown_field(self):
        d = default_config_dict()
        d["qubits"][0]["colour"] = "blue"
        with pytest.raises(ValidationError):
            config_from_dict(d)

    def test_bad_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        with pytest.raises(ValidationError):
            load_config(p)

    def test_schedule_round_trip(self, chain, schedule):
        back = schedule_from_dict(schedule_to_dict(schedule), chain)
        np.testing.assert_allclose(back.effective_couplings, schedule.effective_couplings, rtol=1e-12)

    def test_stale_schedule_rejected(self, chain, schedule):
        d = schedule_to_dict(schedule)
        d["effective_couplings"][0] = [1.1 * x for x in d["effective_couplings"][0]]
        with pytest.raises(ValidationError):
            schedule_from_dict(d, chain)


class TestCli:
    def test_missing_coupling_exit(self, tmp_path, capsys):
        d = default_config_dict()
        d["static_couplings"] = d["static_couplings"][:2]
        code = cli.main(["synthesize", "--config", write_config(tmp_path, d), "--out", str(tmp_path / "o")])
        assert code == cli.EXIT_INVALID
        assert "static_couplings" in capsys.readouterr().err

    def test_unknown_subcommand(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["teleport"])
        assert exc.value.code == cli.EXIT_INVALID

    def test_infeasible_target(self, tmp_path, capsys):
        code = cli.main(["synthesize", "--duration", "10", "--out", str(tmp_path)])
        assert code == cli.EXIT_INVALID
        assert "headroom" in capsys.readouterr().err.lower()

    def test_flat_chevron_is_numerical(self, tmp_path):
        args = ["chevron", "--epsilon", "0", "--nu-points", "5", "--t-max-ns", "20", "--workers", "1"]
        assert cli.main(args + ["--out", str(tmp_path)]) == cli.EXIT_NUMERICAL

    def test_synthesize_ratio(self, tmp_path):
        assert cli.main(["synthesize", "--out", str(tmp_path)]) == cli.EXIT_OK
        head, data = read_csv(tmp_path / "schedule.csv")
        g = data[:, head.index("g_eff_mhz")]
        np.testing.assert_allclose(g / g[0], [1, 2 / np.sqrt(3), 1], rtol=1e-9)
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["subcommand"] == "synthesize"
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert set(manifest["artifacts"]) >= {"schedule.csv", "schedule.json"}

    def test_evolve_peak(self, tmp_path):
        assert cli.main(["evolve", "--out", str(tmp_path)]) == cli.EXIT_OK
        head, data = read_csv(tmp_path / "trajectory.csv")
        t = data[:, 0]
        last = data[:, head.index("p_e_q3")]
        assert abs(t[np.argmax(last)] - 84.0) <= 1.0

    def test_schedule_file_reused(self, tmp_path):
        cli.main(["synthesize", "--out", str(tmp_path / "a")])
        code = cli.main(["phase-scan", "--schedule", str(tmp_path / "a" / "schedule.json"), "--points", "5", "--out", str(tmp_path / "b")])
        assert code == cli.EXIT_OK

    def test_deterministic_outputs(self, tmp_path):
        args = ["fidelity-decay", "--shots", "500", "--m-max", "21", "--seed", "7", "--out", str(tmp_path)]
        assert cli.main(args) == cli.EXIT_OK
        first = {p.name: digest(p) for p in tmp_path.glob("*.csv")}
        assert cli.main(args) == cli.EXIT_OK
        second = {p.name: digest(p) for p in tmp_path.glob("*.csv")}
        assert first and first == second

    def test_self_check(self, tmp_path):
        assert cli.main(["self-check", "--out", str(tmp_path)]) == cli.EXIT_OK
