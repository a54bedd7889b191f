"""Command-line contract: exit codes, JSON/CSV formats, determinism."""

import json
import math

import pytest

import logweight as lw
from logweight.cli import main


@pytest.fixture()
def state_file(tmp_path):
    path = tmp_path / "state.json"
    rc = main(["construct", "--family", "ramey_ullrich", "--h", "2",
               "--t0", "0.95", "--t-stop", "0.9999", "--out", str(path)])
    assert rc == 0
    return path


class TestConstruct:
    def test_happy_path_stdout(self, capsys):
        rc = main(["construct", "--family", "ramey_ullrich", "--h", "2",
                   "--t0", "0.95", "--t-stop", "0.9999"])
        captured = capsys.readouterr()
        assert rc == 0
        state = json.loads(captured.out)
        assert set(state) == {"h", "x0", "xs", "deltas", "log_as", "es"}
        assert state["h"] == 2
        assert len(state["xs"]) == len(state["es"]) + 1

    def test_deterministic_output(self, tmp_path):
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        for p in (p1, p2):
            assert main(["construct", "--family", "exp_power", "--params", "1",
                         "--t-stop", "0.999", "--out", str(p)]) == 0
        assert p1.read_bytes() == p2.read_bytes()

    def test_h_below_two_rejected(self, capsys):
        rc = main(["construct", "--family", "ramey_ullrich", "--h", "1",
                   "--t0", "0.95"])
        assert rc == 2
        assert "error" in capsys.readouterr().err

    def test_nonconvex_table_rejected(self, tmp_path, capsys):
        # monotone omega whose log-log profile has a concave kink
        table = [[0.1, 1.0], [0.3, 4.5], [0.5, 5.0], [0.7, 5.5], [0.9, 60.0]]
        spec = tmp_path / "bad_nonconvex.json"
        spec.write_text(json.dumps({"family": "tabulated", "table": table}))
        rc = main(["construct", "--weight", str(spec), "--x0", "-2.0",
                   "--t-stop", "0.85"])
        assert rc == 2
        assert "not strictly convex" in capsys.readouterr().err

    def test_malformed_flags_exit_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["construct", "--no-such-flag"])
        assert exc.value.code == 2


class TestVerify:
    def test_sandwich_pass(self, state_file, capsys):
        rc = main(["verify", "sandwich", "--state", str(state_file),
                   "--family", "ramey_ullrich", "--t-points", "200",
                   "--angles", "32"])
        captured = capsys.readouterr()
        assert rc == 0
        report = json.loads(captured.out)
        assert report["passed"] is True
        assert report["lower_margin"] > 0

    def test_lemmas_pass(self, state_file, capsys):
        rc = main(["verify", "lemmas", "--state", str(state_file),
                   "--family", "ramey_ullrich", "--samples", "20"])
        assert rc == 0
        assert json.loads(capsys.readouterr().out)["passed"] is True

    def test_wrong_weight_is_input_error(self, state_file, capsys):
        rc = main(["verify", "lemmas", "--state", str(state_file),
                   "--family", "exp_power", "--params", "1"])
        assert rc == 2

    def test_envelope_sawtooth_fails_equivalence(self, capsys):
        rc = main(["verify", "envelope", "--family",
                   "perturbed_unbounded_sawtooth"])
        captured = capsys.readouterr()
        assert rc == 1
        report = json.loads(captured.out)
        assert report["equivalent"] is False
        assert report["gap"] > 10.0

    def test_envelope_convex_passes(self, capsys):
        rc = main(["verify", "envelope", "--family", "ramey_ullrich"])
        assert rc == 0
        assert json.loads(capsys.readouterr().out)["equivalent"] is True

    def test_hadamard(self, capsys):
        rc = main(["verify", "hadamard", "--random-polys", "10", "--seed", "7"])
        assert rc == 0
        report = json.loads(capsys.readouterr().out)
        assert report["min_second_diff"] >= -1e-7

    def test_ball_monomial(self, state_file, capsys):
        rc = main(["verify", "ball", "--state", str(state_file),
                   "--family", "ramey_ullrich", "--poly-family", "monomial_d1",
                   "--t-points", "8", "--sphere-samples", "64"])
        captured = capsys.readouterr()
        assert rc == 0
        report = json.loads(captured.out)
        assert report["family"]["passed"] and report["lower_bound"]["passed"]

    def test_ball_coordinate_family_rejected(self, state_file, capsys):
        rc = main(["verify", "ball", "--state", str(state_file),
                   "--family", "ramey_ullrich", "--poly-family", "coordinate_d2",
                   "--degrees", "8", "--sphere-samples", "64"])
        captured = capsys.readouterr()
        assert rc == 1
        report = json.loads(captured.out)
        assert report["passed"] is False

    def test_missing_state_file(self, capsys):
        rc = main(["verify", "sandwich", "--state", "/nonexistent.json",
                   "--family", "ramey_ullrich"])
        assert rc == 2


class TestEmit:
    def test_row_count_and_header(self, state_file, tmp_path):
        out = tmp_path / "grid.csv"
        rc = main(["emit", "--state", str(state_file), "--family",
                   "ramey_ullrich", "--t-points", "10", "--angles", "4",
                   "--out", str(out)])
        assert rc == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == ("t,theta,log_g1_abs,log_g2_abs,log_sum,"
                            "log_omega,lower_margin,upper_margin")
        assert len(lines) == 1 + 10 * 4

    def test_log_sum_recomputation(self, state_file, tmp_path):
        out = tmp_path / "grid.csv"
        main(["emit", "--state", str(state_file), "--family", "ramey_ullrich",
              "--t-points", "6", "--angles", "3", "--out", str(out)])
        state = lw.ConstructionState.from_json_dict(
            json.loads(state_file.read_text()))
        pair = lw.split_parity(state)
        for line in out.read_text().strip().split("\n")[1:]:
            vals = [float(v) for v in line.split(",")]
            t, theta, _, _, log_sum = vals[:5]
            z = t * complex(math.cos(theta), math.sin(theta))
            ref = lw.modulus_sum(pair, z)
            assert log_sum == pytest.approx(ref, rel=1e-12)

    def test_empty_grid_header_only(self, state_file, tmp_path):
        out = tmp_path / "empty.csv"
        rc = main(["emit", "--state", str(state_file), "--family",
                   "ramey_ullrich", "--t-points", "0", "--angles", "4",
                   "--out", str(out)])
        assert rc == 0
        assert out.read_text().strip().split("\n") == [
            "t,theta,log_g1_abs,log_g2_abs,log_sum,log_omega,"
            "lower_margin,upper_margin"]

    def test_byte_identical_reruns(self, state_file, tmp_path):
        outs = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            main(["emit", "--state", str(state_file), "--family",
                  "ramey_ullrich", "--t-points", "10", "--angles", "4",
                  "--out", str(out)])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_rows_sorted_by_t_then_theta(self, state_file, tmp_path):
        out = tmp_path / "grid.csv"
        main(["emit", "--state", str(state_file), "--family", "ramey_ullrich",
              "--t-points", "5", "--angles", "3", "--out", str(out)])
        rows = [tuple(float(v) for v in line.split(",")[:2])
                for line in out.read_text().strip().split("\n")[1:]]
        assert rows == sorted(rows)
