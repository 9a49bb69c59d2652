import csv
import json

import numpy as np
import pytest

from magkepler.cli import main
from magkepler.orbits import OrbitElements, eccentricity

from helpers import make_elements


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("MAGKEPLER_OUTPUT_DIR", raising=False)
    return tmp_path


def write_json(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


def elements_file(path, k=2, mu=1.2, seed=90, a_range=(0.4, 0.65)):
    rng = np.random.default_rng(seed)
    el = make_elements(k, mu, rng, a_range=a_range)
    return write_json(path, el.to_dict()), el


def circle_elements_payload():
    return {"k": 1, "A": [0.0, 0.0, 0.0],
            "Lbar": {"metric": "euclidean", "dim": 3, "grade": 2,
                     "terms": [{"idx": [1, 2], "c": 1.0}]}}


class TestSimulate:
    def test_circle_benchmark(self, workdir, capsys):
        code = main(["simulate", "--circle", "--t-end", "25",
                     "--output", "run.csv"])
        out = capsys.readouterr().out
        assert code == 0
        report = json.loads(out)
        assert report["status"] == "ok"
        assert report["max_drift"] < 1e-8
        assert set(report["drifts"]) == {"E", "L", "A", "V", "Lbar",
                                         "xi_pairing", "xi_spectral",
                                         "xi_pfaffian"}
        assert (workdir / "run.csv").exists()
        assert not list(workdir.glob("*.tmp.*"))

    def test_deterministic_bytes(self, workdir, capsys):
        argv = ["simulate", "--circle", "--t-end", "12.5",
                "--samples", "41", "--output", "det.csv"]
        assert main(argv) == 0
        first_stdout = capsys.readouterr().out
        first_file = (workdir / "det.csv").read_bytes()
        assert main(argv) == 0
        second_stdout = capsys.readouterr().out
        assert first_stdout == second_stdout
        assert (workdir / "det.csv").read_bytes() == first_file

    def test_elements_pipeline(self, workdir, capsys):
        path, el = elements_file(workdir / "el.json")
        code = main(["simulate", "--elements", path, "--t-end", "50",
                     "--format", "csv", "--output", "orbit.csv"])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["dim"] == 5
        # the charge comes from the elements, not from --mu
        from magkepler.orbits import implied_magnetic_charge
        assert abs(abs(report["mu"]) - implied_magnetic_charge(el)) < 1e-12
        with open(workdir / "orbit.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        scale = 1.0 + float(np.dot(el.A, el.A))
        assert all(abs(float(r["conic_residual"])) < 1e-8 * scale
                   for r in rows)

    def test_json_format(self, workdir, capsys):
        code = main(["simulate", "--circle", "--t-end", "6",
                     "--samples", "11", "--format", "json",
                     "--output", "run.json"])
        assert code == 0
        doc = json.loads((workdir / "run.json").read_text())
        assert len(doc["samples"]) == 11
        assert doc["metadata"]["mu"] == 0.0

    def test_output_dir_env(self, workdir, capsys, monkeypatch):
        target = workdir / "outputs"
        monkeypatch.setenv("MAGKEPLER_OUTPUT_DIR", str(target))
        code = main(["simulate", "--circle", "--t-end", "6",
                     "--samples", "11", "--output", "run.csv"])
        assert code == 0
        assert (target / "run.csv").exists()

    def test_zero_charge_plane_through_axis(self, workdir, capsys):
        # uncharged orbits may sweep past the half-axis freely
        payload = {"k": 1, "A": [0.1, 0.05, 0.03],
                   "Lbar": {"metric": "euclidean", "dim": 3, "grade": 2,
                            "terms": [{"idx": [1, 2], "c": 1.0},
                                      {"idx": [2, 3], "c": -0.3}]}}
        path = write_json(workdir / "tilted.json", payload)
        code = main(["simulate", "--elements", path, "--t-end", "120",
                     "--samples", "160", "--output", "t.csv"])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["status"] == "ok"
        assert report["mu"] == 0.0

    def test_even_dimension_rejected(self, workdir, capsys):
        assert main(["simulate", "--circle", "--dim", "4"]) == 2

    def test_charged_circle_rejected(self, workdir, capsys):
        assert main(["simulate", "--circle", "--mu", "0.5"]) == 2

    def test_config_validation(self, workdir, capsys):
        assert main(["simulate", "--circle", "--samples", "1"]) == 2
        assert main(["simulate", "--circle", "--rel-tol", "0.5"]) == 2
        assert main(["simulate", "--circle", "--t-end", "-1"]) == 2

    def test_malformed_inputs(self, workdir, capsys):
        garbage = workdir / "bad.json"
        garbage.write_text("{not json")
        assert main(["simulate", "--elements", str(garbage)]) == 2
        assert main(["simulate", "--elements", "missing.json"]) == 2
        short = write_json(workdir / "short.json", {"r": [1, 0], "v": [0, 1]})
        assert main(["simulate", "--state", short]) == 2

    def test_membership_violation_is_exit_five(self, workdir, capsys):
        payload = circle_elements_payload()
        payload["A"] = [0.0, 0.0, 2.0]
        path = write_json(workdir / "bad_el.json", payload)
        assert main(["simulate", "--elements", path]) == 5

    def test_initial_state_on_string_is_usage_error(self, workdir, capsys):
        path = write_json(workdir / "string.json",
                          {"r": [0.0, 0.0, -1.0], "v": [0.0, 1.0, 0.0]})
        assert main(["simulate", "--state", path]) == 2

    def test_collision_aborts_with_exit_three(self, workdir, capsys):
        path = write_json(workdir / "plunge.json",
                          {"r": [1.0, 0.0, 0.0], "v": [-0.3, 0.0, 0.0]})
        code = main(["simulate", "--state", path, "--t-end", "5",
                     "--rel-tol", "1e-8", "--abs-tol", "1e-8"])
        assert code == 3

    def test_drift_bound_exceeded_is_exit_four(self, workdir, capsys):
        code = main(["simulate", "--circle", "--t-end", "25",
                     "--drift-bound", "1e-16", "--output", "d.csv"])
        assert code == 4
        report = json.loads(capsys.readouterr().out)
        assert report["status"] == "drift_exceeded"


class TestTools:
    def test_classify_circle(self, workdir, capsys):
        path = write_json(workdir / "c.json", circle_elements_payload())
        assert main(["classify", path]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc == {"class": "ellipse", "E": -0.5, "e": 0.0, "mu": 0.0}

    def test_construct_output(self, workdir, capsys):
        path, el = elements_file(workdir / "el.json")
        assert main(["construct", path]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert set(doc) == {"q", "v", "eta", "rotation", "implied_mu"}
        assert len(doc["rotation"]) == 25
        q = np.array(doc["q"])
        assert q[-1] > 0 and np.allclose(q[:-1], 0.0, atol=1e-12)

    def test_lightcone_round_trip(self, workdir, capsys):
        path, el = elements_file(workdir / "el.json", seed=91)
        assert main(["lightcone", path]) == 0
        lc_text = capsys.readouterr().out
        lc_path = workdir / "lc.json"
        lc_path.write_text(lc_text)
        assert main(["lightcone", "--invert", str(lc_path)]) == 0
        back = OrbitElements.from_dict(json.loads(capsys.readouterr().out))
        assert np.max(np.abs(back.A - el.A)) < 1e-12
        assert (back.Lbar - el.Lbar).coeff_norm() < 1e-12

    def test_act_identity_echo(self, workdir, capsys):
        path, _ = elements_file(workdir / "el.json", seed=92)
        assert main(["lightcone", path]) == 0
        lc_text = capsys.readouterr().out
        lc_path = workdir / "lc.json"
        lc_path.write_text(lc_text)
        assert main(["act", str(lc_path)]) == 0
        assert capsys.readouterr().out == lc_text

    def test_act_scaling_and_errors(self, workdir, capsys):
        path, _ = elements_file(workdir / "el.json", seed=93)
        main(["lightcone", path])
        lc_doc = json.loads(capsys.readouterr().out)
        lc_path = write_json(workdir / "lc.json", lc_doc)
        assert main(["act", lc_path, "--scale", "2"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert np.allclose(doc["a"], 2.0 * np.array(lc_doc["a"]), atol=1e-14)
        assert main(["act", lc_path, "--scale", "0"]) == 2
        capsys.readouterr()
        bad = write_json(workdir / "t.json",
                         {"matrix": (2.0 * np.eye(6)).ravel().tolist()})
        assert main(["act", lc_path, "--transform", bad]) == 5

    def test_check_lemma(self, workdir, capsys):
        code = main(["check-lemma", "--dim", "5", "--mu", "0.5",
                     "--samples", "60", "--seed", "7"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["max_residual"] < 1e-10
        assert 1.8 < doc["covariant_order"]["min"] <= \
            doc["covariant_order"]["max"] < 2.2
        assert main(["check-lemma", "--dim", "4"]) == 2

    def test_fit_csv_and_json(self, workdir, capsys):
        path, el = elements_file(workdir / "el.json", seed=94)
        assert main(["simulate", "--elements", path, "--t-end", "120",
                     "--samples", "160", "--format", "csv",
                     "--output", "orbit.csv"]) == 0
        capsys.readouterr()
        assert main(["fit", "orbit.csv"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert abs(doc["eccentricity"] - eccentricity(el)) < 1e-6
        assert main(["simulate", "--elements", path, "--t-end", "120",
                     "--samples", "160", "--format", "json",
                     "--output", "orbit.json"]) == 0
        capsys.readouterr()
        assert main(["fit", "orbit.json"]) == 0
        doc2 = json.loads(capsys.readouterr().out)
        assert abs(doc2["eccentricity"] - doc["eccentricity"]) < 1e-12

    def test_fit_rejects_degenerate(self, workdir, capsys):
        line = [{"t": 0.0, "r": [float(i), 0.0, 0.0]} for i in range(1, 13)]
        path = write_json(workdir / "line.json", {"samples": line})
        assert main(["fit", str(path)]) == 5

    def test_output_flag_writes_file(self, workdir, capsys):
        path = write_json(workdir / "c.json", circle_elements_payload())
        assert main(["classify", path, "--output", "out.json"]) == 0
        doc = json.loads((workdir / "out.json").read_text())
        assert doc["class"] == "ellipse"


class TestParser:
    def test_no_command_is_usage_error(self, capsys):
        assert main([]) == 2

    def test_unknown_command(self, capsys):
        assert main(["frobnicate"]) == 2
