import json

import numpy as np
import pytest

from releq import (
    Configuration,
    Problem,
    document_from,
    save_document,
)
from releq.cli import main

import oracles


@pytest.fixture
def two_body_doc(tmp_path):
    prob = Problem(2, [1.0, 1.0], [1.0], -1.5)
    cfg = Configuration(oracles.two_body_points(1.0, 1.0, 1.0, -1.5))
    path = tmp_path / "twobody.json"
    save_document(path, document_from(prob, cfg))
    return path


@pytest.fixture
def trigon_doc(tmp_path):
    prob = Problem(2, [1.0, 1.0, 1.0], [1.0], -1.5)
    rho = oracles.ngon_circumradius(3, 1.0, 1.0, -1.5)
    cfg = Configuration(oracles.ngon_points(3, rho))
    path = tmp_path / "trigon.json"
    save_document(path, document_from(prob, cfg))
    return path


@pytest.fixture
def problem_only_doc(tmp_path):
    prob = Problem(2, [1.0, 1.0, 1.0], [1.0], -1.5)
    path = tmp_path / "three.json"
    save_document(path, document_from(prob))
    return path


class TestVerify:
    def test_oracle_passes(self, two_body_doc, capsys):
        code = main(["verify", str(two_body_doc), "--t-end", "0.5"])
        out = capsys.readouterr().out
        assert code == 0
        report = json.loads(out.split("\n", 1)[1])
        assert report["passed"] is True
        assert all(g["gap"] < 1e-12 for g in report["lemma_gaps"])

    def test_perturbed_positions_fail(self, two_body_doc, tmp_path, capsys):
        raw = json.loads(two_body_doc.read_text())
        raw["positions"][0][0] += 0.1
        bad = tmp_path / "perturbed.json"
        bad.write_text(json.dumps(raw))
        code = main(["verify", str(bad), "--t-end", "0.5"])
        out = capsys.readouterr().out
        assert code == 1
        report = json.loads(out.split("\n", 1)[1])
        assert report["residual"]["max_norm"] > 1e-3

    def test_out_of_domain_exponent(self, two_body_doc, tmp_path, capsys):
        raw = json.loads(two_body_doc.read_text())
        raw["exponent"] = -0.3
        bad = tmp_path / "bad_a.json"
        bad.write_text(json.dumps(raw))
        code = main(["verify", str(bad)])
        err = capsys.readouterr().err
        assert code == 2
        assert "a < -1/2" in err

    def test_missing_positions(self, problem_only_doc, capsys):
        assert main(["verify", str(problem_only_doc)]) == 2
        assert "positions" in capsys.readouterr().err

    def test_missing_file_is_io_error(self, tmp_path):
        assert main(["verify", str(tmp_path / "nope.json")]) == 3

    def test_malformed_json(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["verify", str(path)]) == 2

    def test_report_written_to_out(self, two_body_doc, tmp_path, capsys):
        out_path = tmp_path / "report.json"
        code = main(["verify", str(two_body_doc), "--t-end", "0.5",
                     "--out", str(out_path)])
        assert code == 0
        report = json.loads(out_path.read_text())
        assert report["residual"]["max_norm"] < 1e-13
        # summary still on stdout
        assert capsys.readouterr().out.startswith("verify: PASS")

    def test_gap_rows_cover_every_cluster_size(self, trigon_doc, tmp_path):
        out_path = tmp_path / "report.json"
        code = main(["verify", str(trigon_doc), "--t-end", "0.5",
                     "--out", str(out_path)])
        assert code == 0
        report = json.loads(out_path.read_text())
        assert [g["l"] for g in report["lemma_gaps"]] == [2, 3]
        assert len(report["weighted_centroid_residual"]) == 2


class TestSolve:
    def test_requires_positions(self, problem_only_doc, capsys):
        assert main(["solve", str(problem_only_doc)]) == 2
        assert "positions" in capsys.readouterr().err

    def test_damping_flags_accepted(self, two_body_doc, tmp_path):
        out = tmp_path / "solved.json"
        code = main(["solve", str(two_body_doc), "--damping-init", "1e-2",
                     "--damping-grow", "5", "--damping-shrink", "0.4",
                     "--out", str(out)])
        assert code == 0
        assert json.loads(out.read_text())["termination"] == "converged"

    def test_perturbed_seed_converges(self, two_body_doc, tmp_path, capsys):
        raw = json.loads(two_body_doc.read_text())
        raw["positions"][0][0] += 0.05
        raw["positions"][1][1] -= 0.03
        seed_doc = tmp_path / "seed.json"
        seed_doc.write_text(json.dumps(raw))
        out_path = tmp_path / "solved.json"
        code = main(["solve", str(seed_doc), "--out", str(out_path)])
        assert code == 0
        payload = json.loads(out_path.read_text())
        assert payload["termination"] == "converged"
        pts = np.array(payload["points"])
        sep = np.linalg.norm(pts[0] - pts[1])
        assert sep == pytest.approx(2.0 ** (1.0 / 3.0), abs=1e-10)


class TestSearch:
    def test_byte_identical_runs(self, problem_only_doc, tmp_path):
        out1 = tmp_path / "s1.json"
        out2 = tmp_path / "s2.json"
        args = ["search", str(problem_only_doc), "--trials", "40",
                "--seed", "7"]
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_jobs_do_not_change_output(self, problem_only_doc, tmp_path):
        out1 = tmp_path / "j1.json"
        out2 = tmp_path / "j4.json"
        args = ["search", str(problem_only_doc), "--trials", "30",
                "--seed", "3"]
        assert main(args + ["--jobs", "1", "--out", str(out1)]) == 0
        assert main(args + ["--jobs", "4", "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_csv_fingerprints(self, problem_only_doc, tmp_path):
        out = tmp_path / "classes.csv"
        assert main(["search", str(problem_only_doc), "--trials", "40",
                     "--seed", "5", "--format", "csv",
                     "--out", str(out)]) == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0].startswith("class,hits,iterations,residual_max,d0")
        assert len(lines) == 3  # header + the two known classes

    def test_bad_trials_flag(self, problem_only_doc, capsys):
        assert main(["search", str(problem_only_doc), "--trials", "0"]) == 2


class TestContinue:
    def test_rows_match_closed_form(self, two_body_doc, tmp_path):
        out = tmp_path / "cont.csv"
        code = main(["continue", str(two_body_doc), "--a-target", "-1.0",
                     "--steps", "10", "--format", "csv", "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert len(lines) == 11
        header = lines[0].split(",")
        a_col = header.index("a")
        d_col = header.index("min_pairwise_distance")
        for line in lines[1:]:
            cells = line.split(",")
            a_val = float(cells[a_col])
            sep = float(cells[d_col])
            exact = oracles.two_body_separation(1.0, 1.0, 1.0, a_val)
            assert sep == pytest.approx(exact, abs=1e-10)

    def test_bad_target_rejected(self, two_body_doc, capsys):
        assert main(["continue", str(two_body_doc),
                     "--a-target", "-0.4"]) == 2
        assert "-0.5" in capsys.readouterr().err


class TestProbe:
    def test_single_probe_json(self, problem_only_doc, tmp_path, capsys):
        out = tmp_path / "probe.json"
        code = main(["probe", str(problem_only_doc), "--trials", "40",
                     "--seed", "2", "--out", str(out)])
        assert code == 0
        report = json.loads(out.read_text())
        assert report["classes_found"] == 2
        assert report["min_pairwise_distance"] > 0.0
        summary = capsys.readouterr().out
        assert summary.startswith("probe: classes=2")

    def test_sweep_csv(self, two_body_doc, tmp_path):
        out = tmp_path / "sweep.csv"
        code = main(["probe", str(two_body_doc), "--trials", "15",
                     "--seed", "2", "--omegas", "0.5,1,2",
                     "--format", "csv", "--out", str(out)])
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "omega_scale,classes_found,c_hat,C_hat,trials,converged"
        assert len(lines) == 4
        for line, omega in zip(lines[1:], (0.5, 1.0, 2.0)):
            cells = line.split(",")
            exact = 2.0 ** (1.0 / 3.0) * omega ** (-2.0 / 3.0)
            assert float(cells[2]) == pytest.approx(exact, rel=1e-6)

    def test_probe_byte_identical(self, problem_only_doc, tmp_path):
        out1 = tmp_path / "p1.json"
        out2 = tmp_path / "p2.json"
        args = ["probe", str(problem_only_doc), "--trials", "25",
                "--seed", "6"]
        assert main(args + ["--jobs", "1", "--out", str(out1)]) == 0
        assert main(args + ["--jobs", "3", "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()


class TestIntegrate:
    def test_trigon_deviation_summary(self, trigon_doc, tmp_path, capsys):
        out = tmp_path / "traj.csv"
        code = main(["integrate", str(trigon_doc), "--t-end", "6.2831853",
                     "--tol", "1e-10", "--format", "csv", "--out", str(out)])
        assert code == 0
        summary = capsys.readouterr().out
        deviation = float(summary.split("deviation=")[1])
        assert deviation < 1e-6
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "t,body,q0,q1,v0,v1"
        assert len(lines) == 1 + 65 * 3

    def test_json_trajectory(self, two_body_doc, tmp_path):
        out = tmp_path / "traj.json"
        code = main(["integrate", str(two_body_doc), "--t-end", "1.0",
                     "--samples", "8", "--out", str(out)])
        assert code == 0
        payload = json.loads(out.read_text())
        assert len(payload["times"]) == 9
        assert payload["deviation"] < 1e-7


def test_unknown_command_exits_2():
    assert main(["frobnicate"]) == 2


def test_jobs_default_from_env(monkeypatch):
    from releq.cli import build_parser

    monkeypatch.setenv("RELEQ_JOBS", "6")
    args = build_parser().parse_args(["search", "x.json"])
    assert args.jobs == 6
    monkeypatch.setenv("RELEQ_JOBS", "bogus")
    args = build_parser().parse_args(["search", "x.json"])
    assert args.jobs == 1


def test_out_path_in_missing_directory_is_io_error(two_body_doc, tmp_path):
    missing = tmp_path / "no" / "such" / "dir" / "x.json"
    assert main(["verify", str(two_body_doc), "--t-end", "0.5",
                 "--out", str(missing)]) == 3
