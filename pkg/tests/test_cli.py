"""Tests for the command-line front end: outputs, reports and exit codes."""
import json

import numpy as np
import pytest

from src.engine.behavior import quantum_behavior
from src.engine.states import product_state, random_state
from src.engine.tomography import simulate_statistics
from src.io.file_manager import FileManager
from src.models.behavior import Behavior, SettingsSet
from src.models.polarization import CIRCULAR, DIAGONAL, HORIZONTAL, PolarizationVector
from src.ui.cli import EXIT_INPUT, EXIT_NEGATIVE, EXIT_OK, EXIT_UNDECIDED, main

FAST = ["--probes", "500"]


def _save(tmp_path, name, data):
    path = str(tmp_path / name)
    FileManager.save_json(data, path)
    return path


def _read(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


@pytest.fixture
def contradictory(tmp_path):
    """Alice measures H twice and reports opposite certain outcomes."""
    s = SettingsSet(alice=(HORIZONTAL, HORIZONTAL), bob=(HORIZONTAL,))
    table = np.zeros((2, 1, 2, 2))
    table[0, 0, 0, 0] = 1.0
    table[1, 0, 1, 0] = 1.0
    return _save(tmp_path, "contradictory.json", Behavior(table).to_dict()), _save(tmp_path, "hh.json", s.to_dict())


@pytest.fixture
def shifted(tmp_path):
    """A product behavior whose first photon sits between the points of an 8-point grid."""
    s = SettingsSet(alice=(HORIZONTAL, DIAGONAL), bob=(HORIZONTAL,))
    b = quantum_behavior(product_state(PolarizationVector.from_bloch(np.pi / 4, 0.0), HORIZONTAL), s)
    return _save(tmp_path, "shifted.json", b.to_dict()), _save(tmp_path, "hd.json", s.to_dict())


@pytest.fixture
def product_behavior(tmp_path):
    out = str(tmp_path / "hv_behavior.json")
    assert main(["gen-behavior", "preset:product_hv", "preset:hv", "-o", out]) == EXIT_OK
    return out


class TestGenBehavior:
    """Tests for gen-behavior and chsh."""

    def test_singlet_chsh(self, tmp_path, capsys):
        out = str(tmp_path / "b.json")
        csv_path = str(tmp_path / "b.csv")
        code = main(["gen-behavior", "preset:singlet", "preset:chsh", "-o", out, "--csv", csv_path])
        assert code == EXIT_OK
        data = _read(out)
        assert data["chsh"] == pytest.approx(2 * np.sqrt(2), abs=1e-9)
        assert data["noSignalling"]["ok"] is True
        assert open(csv_path, encoding="utf-8").read().startswith("x;y;")
        assert "Valor CHSH" in capsys.readouterr().out

    def test_chsh_command(self, tmp_path):
        out = str(tmp_path / "b.json")
        report = str(tmp_path / "r.json")
        main(["gen-behavior", "preset:singlet", "preset:chsh", "-o", out])
        assert main(["chsh", out, "--report", report]) == EXIT_OK
        verdicts = _read(report)["verdicts"]
        assert verdicts["functional"] == "chsh"
        assert verdicts["value"] == pytest.approx(2 * np.sqrt(2), abs=1e-9)

    def test_missing_input(self, tmp_path, capsys):
        report = str(tmp_path / "r.json")
        code = main(["gen-behavior", str(tmp_path / "nope.json"), "preset:chsh", "-o", str(tmp_path / "b.json"),
                     "--report", report])
        assert code == EXIT_INPUT
        assert "Error de entrada" in capsys.readouterr().err
        assert _read(report)["exitCode"] == EXIT_INPUT

    def test_shape_mismatch_is_input_error(self, tmp_path, product_behavior):
        assert main(["chsh", product_behavior]) == EXIT_INPUT


class TestLeggett:
    """Tests for the leggett command."""

    def test_member(self, tmp_path, product_behavior, capsys):
        report = str(tmp_path / "r.json")
        certs = str(tmp_path / "certs")
        code = main(["leggett", product_behavior, "-s", "preset:hv", "--grid", "8", *FAST,
                     "--certificates", certs, "--report", report])
        assert code == EXIT_OK
        assert "MIEMBRO" in capsys.readouterr().out
        instance = _read(report)["verdicts"]["instances"][0]
        assert instance["status"] == "member"
        assert instance["certificateCheck"]["ok"] is True
        assert instance["validation"]["valid"] is True
        model = _read(instance["files"]["model"])
        assert sum(e["weight"] for e in model["subensembles"]) == pytest.approx(1.0)

    def test_refuted(self, tmp_path, contradictory):
        behavior, settings = contradictory
        report = str(tmp_path / "r.json")
        lp_dir = str(tmp_path / "lp")
        code = main(["leggett", behavior, "-s", settings, "--grid", "128", *FAST, "--lp-dump", lp_dir,
                     "--report", report])
        assert code == EXIT_NEGATIVE
        instance = _read(report)["verdicts"]["instances"][0]
        assert instance["status"] == "refuted"
        assert instance["certificateCheck"]["ok"] is True
        assert open(instance["files"]["program"], encoding="utf-8").read().startswith("\\ contradictory")

    def test_undecided(self, tmp_path, shifted):
        behavior, settings = shifted
        assert main(["leggett", behavior, "-s", settings, "--grid", "8", *FAST]) == EXIT_UNDECIDED

    def test_explicit_slack(self, tmp_path, contradictory):
        behavior, settings = contradictory
        report = str(tmp_path / "r.json")
        code = main(["leggett", behavior, "-s", settings, "--grid", "16", *FAST, "--slack", "0.001",
                     "--report", report])
        assert code == EXIT_UNDECIDED
        assert _read(report)["verdicts"]["instances"][0]["slack"] == pytest.approx(0.001)

    def test_negative_slack_rejected(self, contradictory):
        behavior, settings = contradictory
        with pytest.raises(SystemExit) as err:
            main(["leggett", behavior, "-s", settings, "--slack", "-1"])
        assert err.value.code == 2

    def test_batch_exit_code_aggregates(self, tmp_path, contradictory):
        behavior, settings = contradictory
        # Alice always detects H, Bob never does: the pair (H, V) reproduces it
        table = np.zeros((2, 1, 2, 2))
        table[:, 0, 0, 1] = 1.0
        member = _save(tmp_path, "certain.json", Behavior(table).to_dict())
        report = str(tmp_path / "r.json")
        code = main(["leggett", member, behavior, "-s", settings, "--grid", "128", *FAST, "--report", report])
        assert code == EXIT_NEGATIVE
        statuses = [i["status"] for i in _read(report)["verdicts"]["instances"]]
        assert statuses == ["member", "refuted"]

    def test_worker_processes(self, tmp_path, product_behavior):
        report = str(tmp_path / "r.json")
        code = main(["--threads", "2", "leggett", product_behavior, product_behavior, "-s", "preset:hv",
                     "--grid", "8", *FAST, "--report", report])
        assert code == EXIT_OK
        assert [i["status"] for i in _read(report)["verdicts"]["instances"]] == ["member", "member"]

    def test_reports_are_reproducible(self, tmp_path, shifted):
        behavior, settings = shifted
        first, second = str(tmp_path / "a.json"), str(tmp_path / "b.json")
        for report in (first, second):
            main(["--seed", "7", "leggett", behavior, "-s", settings, "--grid", "8", *FAST, "--report", report])
        assert open(first, "rb").read() == open(second, "rb").read()
        data = _read(first)
        assert data["seed"] == 7
        assert "timings" not in data
        assert len(data["inputs"]["behavior"]["sha256"]) == 64

    def test_timings_on_request(self, tmp_path, shifted):
        behavior, settings = shifted
        report = str(tmp_path / "r.json")
        main(["--timings", "leggett", behavior, "-s", settings, "--grid", "8", *FAST, "--report", report])
        assert "membership" in _read(report)["timings"]


class TestSeparabilityCommands:
    """Tests for ppt, weak-model and tomography."""

    def test_ppt_separable(self):
        assert main(["ppt", "preset:maximally_mixed"]) == EXIT_OK

    def test_ppt_entangled_writes_witness(self, tmp_path):
        witness = str(tmp_path / "w.json")
        assert main(["ppt", "preset:werner_half", "--witness", witness]) == EXIT_NEGATIVE
        assert FileManager.load_state(witness, allow_witness=True).witness

    def test_weak_model(self, tmp_path):
        out = str(tmp_path / "weak.json")
        report = str(tmp_path / "r.json")
        assert main(["weak-model", "preset:singlet", "preset:chsh", "-o", out, "--report", report]) == EXIT_OK
        verdicts = _read(report)["verdicts"]
        assert verdicts["bobMalusViolated"] is True
        assert verdicts["reproductionError"] < 1e-10
        assert _read(out)["witness"] is False

    def test_weak_model_witness_needs_flag(self, tmp_path):
        witness = str(tmp_path / "w.json")
        main(["ppt", "preset:singlet", "--witness", witness])
        out = str(tmp_path / "weak.json")
        assert main(["weak-model", witness, "preset:chsh", "-o", out]) == EXIT_INPUT
        assert main(["weak-model", witness, "preset:chsh", "-o", out, "--allow-witness"]) == EXIT_OK
        assert _read(out)["reproductionError"] is None

    def test_tomography(self, tmp_path):
        target = random_state(np.random.default_rng(101), dim=2)
        dirs = [DIAGONAL, CIRCULAR, HORIZONTAL, PolarizationVector(1, -1)]
        stats = _save(tmp_path, "stats.json",
                      {"records": [r.to_dict() for r in simulate_statistics(target, dirs, 0.2, 0.1)]})
        out = str(tmp_path / "rho.json")
        assert main(["tomography", stats, "-o", out]) == EXIT_OK
        assert FileManager.load_state(out).matrix.max_abs_diff(target.matrix) < 1e-9


class TestModelCommands:
    """Tests for grid, maximize, gen-model and axiom-check."""

    def test_grid(self, tmp_path):
        out = str(tmp_path / "grid.json")
        assert main(["grid", "6", "-o", out, *FAST]) == EXIT_OK
        grid = FileManager.load_grid(out)
        assert len(grid) == 6

    def test_maximize_with_grid_file(self, tmp_path):
        grid = str(tmp_path / "grid.json")
        model = str(tmp_path / "model.json")
        report = str(tmp_path / "r.json")
        main(["grid", "2", "-o", grid, *FAST])
        code = main(["maximize", "preset:chsh", "preset:chsh", "--grid-file", grid, "--model", model,
                     "--report", report])
        assert code == EXIT_OK
        verdicts = _read(report)["verdicts"]
        assert verdicts["status"] == "optimal"
        assert verdicts["value"] <= 2.0 + 1e-7
        assert len(FileManager.load_model(model)) >= 1

    def test_gen_model_then_axiom_check(self, tmp_path):
        model = str(tmp_path / "axiom.json")
        product = str(tmp_path / "product.json")
        assert main(["--seed", "3", "gen-model", "preset:chsh", "--grid", "12", *FAST, "-o", model]) == EXIT_OK
        report = str(tmp_path / "r.json")
        assert main(["axiom-check", model, "-o", product, "--report", report]) == EXIT_OK
        assert _read(report)["verdicts"]["productForm"] is True
        assert len(FileManager.load_model(product)) == 4

    def test_axiom_check_mixed_post_selection(self, tmp_path):
        model = str(tmp_path / "axiom.json")
        main(["gen-model", "preset:hv", "--grid", "4", *FAST, "--pairs", "1", "-o", model])
        data = _read(model)
        half = [{"weight": 0.5, "w": HORIZONTAL.to_dict()}, {"weight": 0.5, "w": PolarizationVector(0, 1).to_dict()}]
        for entry in data["ensembles"]:
            entry["mixture"] = half
        broken = _save(tmp_path, "broken.json", data)
        report = str(tmp_path / "r.json")
        assert main(["axiom-check", broken, "--report", report]) == EXIT_NEGATIVE
        assert _read(report)["verdicts"]["productForm"] is False
