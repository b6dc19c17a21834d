"""Command-line interface: output formats, exit codes, and determinism."""

import json
import math

import numpy as np
import pytest

from gainflow import cli, lqr_core

DEMO = {
    "n": 2, "m": 1,
    "a": [-2.0, 1.0, 0.0, -1.0],
    "b": [1.0, 1.0],
    "q": [1.0, 0.0, 0.0, 1.0],
    "r": [2.0],
}
SCALAR = {"n": 1, "m": 1, "a": [-1.0], "b": [1.0], "q": [1.0], "r": [1.0]}


@pytest.fixture
def demo_path(tmp_path):
    path = tmp_path / "demo.json"
    path.write_text(json.dumps(DEMO))
    return str(path)


@pytest.fixture
def scalar_path(tmp_path):
    path = tmp_path / "scalar.json"
    path.write_text(json.dumps(SCALAR))
    return str(path)


def run(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestFloatFormat:
    def test_round_trip(self):
        for x in (0.1, 5.0 / 18.0, math.pi, 1e-300, -3.5e17, 0.0):
            assert float(cli.fmt_float(x)) == x

    def test_nan(self):
        assert cli.fmt_float(float("nan")) == "nan"

    def test_json_round_trip(self):
        blob = cli.dump_json({"x": [0.1, 1.0 / 3.0], "n": 3, "ok": True, "none": None})
        parsed = json.loads(blob)
        assert parsed["x"][1] == 1.0 / 3.0
        assert parsed["n"] == 3 and parsed["ok"] is True and parsed["none"] is None


class TestLoadInstance:
    def test_demo(self, demo_path):
        sys_, k0 = cli.load_instance(demo_path)
        assert sys_.n == 2 and sys_.m == 1 and k0 is None

    def test_k0_field(self, tmp_path):
        data = dict(DEMO, k0=[0.5, 0.5])
        path = tmp_path / "inst.json"
        path.write_text(json.dumps(data))
        _, k0 = cli.load_instance(str(path))
        assert np.array_equal(k0, [[0.5, 0.5]])

    def test_missing_field(self, tmp_path):
        data = {k: v for k, v in DEMO.items() if k != "r"}
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        with pytest.raises(ValueError):
            cli.load_instance(str(path))

    def test_wrong_length(self, tmp_path):
        data = dict(DEMO, b=[1.0])
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        with pytest.raises(ValueError):
            cli.load_instance(str(path))


class TestCare:
    def test_demo(self, capsys, demo_path):
        code, out, _ = run(capsys, ["care", demo_path, "--k0", "0,0"])
        assert code == 0
        result = json.loads(out)
        assert result["residual"] <= 1e-10
        k_star = lqr_core.kleinman(lqr_core.demo_system(), [[0.0, 0.0]]).k_star
        assert np.allclose(result["k_star"], k_star, atol=1e-12)

    def test_scalar(self, capsys, scalar_path):
        code, out, _ = run(capsys, ["care", scalar_path, "--k0", "0"])
        assert code == 0
        assert abs(json.loads(out)["k_star"][0][0] - 0.41421356) < 1e-7

    def test_sampled_k0_deterministic(self, capsys, demo_path):
        _, out1, _ = run(capsys, ["care", demo_path, "--seed", "4"])
        _, out2, _ = run(capsys, ["care", demo_path, "--seed", "4"])
        assert out1 == out2

    def test_malformed_json_exits_2(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        code, _, err = run(capsys, ["care", str(bad), "--k0", "0,0"])
        assert code == 2
        assert json.loads(err)["error"] == "InputError"

    def test_unstable_k0_exits_3(self, capsys, demo_path):
        code, _, err = run(capsys, ["care", demo_path, "--k0", "0,-2"])
        assert code == 3
        assert json.loads(err)["error"] == "NotStabilizing"

    def test_float_text_round_trips(self, capsys, demo_path):
        _, out, _ = run(capsys, ["care", demo_path, "--k0", "0,0"])
        result = json.loads(out)
        oracle = lqr_core.kleinman(lqr_core.demo_system(), [[0.0, 0.0]])
        assert result["k_star"][0][0] == oracle.k_star[0, 0]
        assert result["p_star"][1][0] == oracle.p_star[1, 0]


class TestEval:
    def test_bellman_origin(self, capsys, demo_path):
        code, out, _ = run(capsys, ["eval", demo_path, "--k", "0,0", "--objective", "bellman"])
        assert code == 0
        result = json.loads(out)
        assert abs(result["value"] - 5.0 / 18.0) < 1e-12
        assert result["in_K"] is True and result["in_K_sigma"] is True
        assert result["abscissa"] < 0
        assert len(result["m_eigs"]) == 2
        assert result["grad"] is not None

    def test_gradient_near_zero_at_oracle_gain(self, capsys, demo_path):
        k_star = lqr_core.kleinman(lqr_core.demo_system(), [[0.0, 0.0]]).k_star
        spec = ",".join(str(x) for x in k_star.ravel())
        for objective in ("bellman", "lqr"):
            code, out, _ = run(capsys, ["eval", demo_path, "--k", spec, "--objective", objective])
            assert code == 0
            grad = np.array(json.loads(out)["grad"])
            assert np.linalg.norm(grad) <= 1e-6

    def test_unstable_gain_bellman_has_null_grad(self, capsys, demo_path):
        # (0, -2) is unstable (k2 < -k1 - 1) but inside the sigma set
        code, out, _ = run(capsys, ["eval", demo_path, "--k", "0,-2", "--objective", "bellman"])
        assert code == 0
        result = json.loads(out)
        assert result["grad"] is None
        assert "grad_reason" in result
        assert result["in_K"] is False and result["in_K_sigma"] is True

    def test_boundary_exits_3(self, capsys, demo_path):
        code, _, err = run(capsys, ["eval", demo_path, "--k", "0,-1", "--objective", "bellman"])
        assert code == 3
        assert json.loads(err)["error"] == "NotInSigmaSet"

    def test_lqr_requires_stability(self, capsys, demo_path):
        code, _, err = run(capsys, ["eval", demo_path, "--k", "0,-3", "--objective", "lqr"])
        assert code == 3
        assert json.loads(err)["error"] == "NotStabilizing"

    def test_lqr_reports_gramian_eigs(self, capsys, demo_path):
        code, out, _ = run(capsys, ["eval", demo_path, "--k", "0,0", "--objective", "lqr"])
        assert code == 0
        result = json.loads(out)
        assert abs(result["value"] - 5.0 / 6.0) < 1e-12
        assert all(w > 0 for w in result["y_eigs"])


class TestFlow:
    def test_demo_trajectory(self, capsys, demo_path, tmp_path):
        out_csv = tmp_path / "traj.csv"
        code, out, _ = run(capsys, ["flow", demo_path, "--kind", "bellman",
                                    "--k0", "0,0", "--out", str(out_csv)])
        assert code == 0
        summary = json.loads(out)
        assert summary["status"] == "ConvergedGradTol"
        k_star = lqr_core.kleinman(lqr_core.demo_system(), [[0.0, 0.0]]).k_star
        assert np.linalg.norm(np.array(summary["k_final"]) - k_star) <= 1e-6

        lines = out_csv.read_text().strip().split("\n")
        assert lines[0] == "t,k_11,k_12,objective,grad_norm,abscissa"
        rows = [[float(x) for x in line.split(",")] for line in lines[1:]]
        assert len(rows) == summary["samples"]
        ts = [r[0] for r in rows]
        assert all(b > a for a, b in zip(ts, ts[1:]))
        assert all(r[5] < 0 for r in rows)
        objs = [r[3] for r in rows]
        assert all(b <= a + 1e-10 * (1 + abs(a)) for a, b in zip(objs, objs[1:]))
        # final CSV row matches the JSON summary
        assert rows[-1][1] == summary["k_final"][0][0]
        assert rows[-1][2] == summary["k_final"][0][1]

    def test_unstable_k0_exits_3(self, capsys, demo_path, tmp_path):
        code, _, err = run(capsys, ["flow", demo_path, "--kind", "lqr",
                                    "--k0", "0,-2", "--out", str(tmp_path / "t.csv")])
        assert code == 3
        assert json.loads(err)["error"] == "NotStabilizing"

    def test_missing_k0_exits_2(self, capsys, demo_path, tmp_path):
        code, _, err = run(capsys, ["flow", demo_path, "--kind", "bellman",
                                    "--out", str(tmp_path / "t.csv")])
        assert code == 2


class TestGrid:
    def test_demo_grid(self, capsys, demo_path, tmp_path):
        out_csv = tmp_path / "grid.csv"
        code, out, _ = run(capsys, ["grid", demo_path, "--objective", "bellman",
                                    "--k1=-3:3:13", "--k2=-3:3:13",
                                    "--out", str(out_csv)])
        assert code == 0
        lines = out_csv.read_text().strip().split("\n")
        assert lines[0] == "k1,k2,value,stable"
        cells = {}
        for line in lines[1:]:
            k1s, k2s, vals, stab = line.split(",")
            cells[(float(k1s), float(k2s))] = (float(vals), stab)
        value, stable = cells[(0.0, 0.0)]
        assert abs(value - 5.0 / 18.0) < 1e-12 and stable == "1"
        value, stable = cells[(0.0, -1.0)]
        assert math.isnan(value) and stable == "0"
        for (k1, k2), (_, stable) in cells.items():
            assert (stable == "1") == (k2 > -k1 - 1.0 + 1e-9)

    def test_wrong_dimensions_exit_3(self, capsys, scalar_path, tmp_path):
        code, _, err = run(capsys, ["grid", scalar_path, "--k1", "0:1:2",
                                    "--k2", "0:1:2", "--out", str(tmp_path / "g.csv")])
        assert code == 3

    def test_bad_axis_spec_exits_2(self, capsys, demo_path, tmp_path):
        code, _, _ = run(capsys, ["grid", demo_path, "--k1", "0:1",
                                  "--k2", "0:1:2", "--out", str(tmp_path / "g.csv")])
        assert code == 2


class TestBench:
    CONFIG = {
        "num_instances": 4,
        "seed": 3,
        "time_grid": [0.0, 2.0, 4.0, 6.0, 8.0, 10.0],
    }

    def write_config(self, tmp_path, data=None):
        path = tmp_path / "bench.json"
        path.write_text(json.dumps(data if data is not None else self.CONFIG))
        return str(path)

    def test_outputs(self, capsys, tmp_path):
        cfg = self.write_config(tmp_path)
        out_dir = tmp_path / "out"
        code, out, _ = run(capsys, ["bench", "--config", cfg, "--out", str(out_dir)])
        assert code == 0
        assert json.loads(out)["instances"] == 4
        for i in range(4):
            csv_path = out_dir / f"instance_{i:04d}.csv"
            lines = csv_path.read_text().strip().split("\n")
            assert lines[0] == "t,rho_bellman,rho_lqr,rho_natural"
            first = [float(x) for x in lines[1].split(",")]
            assert first[0] == 0.0
            assert all(abs(r - 1.0) <= 1e-12 for r in first[1:])
        summary = json.loads((out_dir / "summary.json").read_text())
        assert summary["num_instances"] == 4
        assert set(summary["median"]) == {"bellman", "lqr", "natural"}
        assert len(summary["instances"]) == 4

    def test_byte_identical_reruns(self, capsys, tmp_path):
        cfg = self.write_config(tmp_path)
        dirs = [tmp_path / "run1", tmp_path / "run2"]
        for d in dirs:
            code, _, _ = run(capsys, ["bench", "--config", cfg, "--out", str(d)])
            assert code == 0
        files1 = sorted(p.name for p in dirs[0].iterdir())
        files2 = sorted(p.name for p in dirs[1].iterdir())
        assert files1 == files2
        for name in files1:
            assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()

    def test_zero_instances_exits_2(self, capsys, tmp_path):
        cfg = self.write_config(tmp_path, {"num_instances": 0})
        code, _, err = run(capsys, ["bench", "--config", cfg, "--out", str(tmp_path / "o")])
        assert code == 2
        assert json.loads(err)["error"] == "InputError"

    def test_unknown_config_key_exits_2(self, capsys, tmp_path):
        cfg = self.write_config(tmp_path, {"num_instances": 2, "horizon": 5})
        code, _, _ = run(capsys, ["bench", "--config", cfg, "--out", str(tmp_path / "o")])
        assert code == 2

    def test_malformed_config_exits_2(self, capsys, tmp_path):
        path = tmp_path / "bench.json"
        path.write_text("[1, 2")
        code, _, _ = run(capsys, ["bench", "--config", str(path), "--out", str(tmp_path / "o")])
        assert code == 2

    def test_seed_flag_overrides(self, capsys, tmp_path):
        cfg = self.write_config(tmp_path, {"num_instances": 2, "seed": 1,
                                           "time_grid": [0.0, 5.0], "flows": ["bellman"]})
        d1, d2, d3 = tmp_path / "a", tmp_path / "b", tmp_path / "c"
        run(capsys, ["bench", "--config", cfg, "--out", str(d1)])
        run(capsys, ["bench", "--config", cfg, "--out", str(d2), "--seed", "99"])
        run(capsys, ["bench", "--config", cfg, "--out", str(d3), "--seed", "99"])
        assert (d1 / "summary.json").read_bytes() != (d2 / "summary.json").read_bytes()
        assert (d2 / "summary.json").read_bytes() == (d3 / "summary.json").read_bytes()

    def test_flows_subset_header(self, capsys, tmp_path):
        cfg = self.write_config(tmp_path, {"num_instances": 1, "seed": 8,
                                           "time_grid": [0.0, 5.0], "flows": ["bellman"]})
        out_dir = tmp_path / "sub"
        code, _, _ = run(capsys, ["bench", "--config", cfg, "--out", str(out_dir)])
        assert code == 0
        lines = (out_dir / "instance_0000.csv").read_text().strip().split("\n")
        assert lines[0] == "t,rho_bellman"


def test_unknown_subcommand_exits_2(capsys):
    assert cli.main(["frobnicate"]) == 2
