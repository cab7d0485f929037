import csv
import dataclasses
import json

import numpy as np
import pytest

from logicnet import (
    Layer,
    QuantizedNet,
    Universe,
    atom,
    atoms_family,
    combine,
    make_config,
    save_pipeline_config,
    save_predicates,
    save_weights,
)
from logicnet.cli import ExperimentConfig, main
from logicnet.errors import ConfigError


def and_net_with_copy_layer():
    """First layer copies the inputs into the trace, second computes AND."""
    return QuantizedNet(
        (Layer(((1, 0), (0, 1)), (0, 0)), Layer(((1, 1),), (-1,))),
        "clipped-relu",
        2,
        2,
    )


def or_net():
    return QuantizedNet((Layer(((1, 1),), (-1,)),), "sign", 2, 2)


def read_files(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir())}


class TestExperimentConfig:
    def test_unknown_top_level_key(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"command": "capacity", "parameters": {}, "extra": 1}))
        with pytest.raises(ConfigError, match="unknown keys"):
            ExperimentConfig.from_file(path)

    def test_unknown_parameter_key(self):
        with pytest.raises(ConfigError, match="unknown parameters"):
            ExperimentConfig("capacity", {"w": 1, "n_max": 2, "frobnicate": 3})

    def test_missing_required_parameter(self):
        with pytest.raises(ConfigError, match="missing parameters"):
            ExperimentConfig("compile", {})

    def test_unknown_command(self):
        with pytest.raises(ConfigError, match="unknown command"):
            ExperimentConfig("train", {})


class TestCapacityCommand:
    def test_small_sweep(self, tmp_path):
        out = tmp_path / "cap"
        code = main(["capacity", "--w", "1", "--n-max", "3", "--out", str(out)])
        assert code == 0
        with open(out / "capacity.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert [r["n"] for r in rows] == ["2", "3"]
        assert all(r["representable"] == "false" for r in rows)
        assert (out / "capacity.png").stat().st_size > 0
        assert (out / "capacity.json").exists()

    def test_precondition_error_exits_one(self, tmp_path, capsys):
        code = main(["capacity", "--w", "3", "--n-max", "3", "--out", str(tmp_path / "x")])
        assert code == 1
        assert "n_max >= w + 1" in capsys.readouterr().err

    def test_rerun_is_byte_identical(self, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["capacity", "--w", "2", "--n-max", "4", "--out", str(out_a)]) == 0
        assert main(["capacity", "--w", "2", "--n-max", "4", "--out", str(out_b)]) == 0
        assert read_files(out_a) == read_files(out_b)

    def test_unexpected_representable_row_exits_two(self, tmp_path, monkeypatch):
        from logicnet import separability as sep
        from logicnet.cli import separability as cli_sep
        from logicnet.separability import CapacityReport, SeparabilityWitness

        fake = CapacityReport(
            w=1,
            n=2,
            subsets_tested=1,
            representable=True,
            witness=SeparabilityWitness(("x1",), (1.0,), -0.5),
            elapsed=0.0,
        )
        monkeypatch.setattr(cli_sep, "exhaust_capacity", lambda w, n, **kw: fake)
        code = main(["capacity", "--w", "1", "--n-max", "2", "--out", str(tmp_path / "v")])
        assert code == 2

    def test_config_file_drive(self, tmp_path):
        cfg = {
            "command": "capacity",
            "parameters": {"w": 1, "n_max": 2},
            "output_dir": str(tmp_path / "from_file"),
            "seed": 7,
        }
        path = tmp_path / "exp.json"
        path.write_text(json.dumps(cfg))
        assert main(["capacity", "--config", str(path)]) == 0
        meta = json.loads((tmp_path / "from_file" / "run_meta.json").read_text())
        assert meta["seed"] == 7
        assert meta["command"] == "capacity"

    def test_config_command_mismatch(self, tmp_path, capsys):
        path = tmp_path / "exp.json"
        path.write_text(json.dumps({"command": "capacity", "parameters": {"w": 1, "n_max": 2}}))
        code = main(["compile", "--config", str(path)])
        assert code == 1
        assert "invoked as" in capsys.readouterr().err


class TestCompileCommand:
    def test_and_fixture_verifies_without_collision(self, tmp_path):
        weights = tmp_path / "and.json"
        save_weights(and_net_with_copy_layer(), weights)
        out = tmp_path / "and_out"
        assert main(["compile", "--weights", str(weights), "--out", str(out)]) == 0
        verdict = json.loads((out / "verification.json").read_text())
        assert verdict["verified"] is True
        assert verdict["indistinguishable_pair"] is None
        circuit = json.loads((out / "circuit.json").read_text())
        assert circuit["depth"] == 2
        assert (out / "compile.png").stat().st_size > 0

    def test_or_fixture_reports_collision(self, tmp_path):
        weights = tmp_path / "or.json"
        save_weights(or_net(), weights)
        out = tmp_path / "or_out"
        assert main(["compile", "--weights", str(weights), "--out", str(out)]) == 0
        verdict = json.loads((out / "verification.json").read_text())
        assert verdict["verified"] is True
        assert verdict["indistinguishable_pair"] == [1, 2]

    def test_malformed_weights_exits_one(self, tmp_path, capsys):
        weights = tmp_path / "bad.json"
        weights.write_text("{broken")
        code = main(["compile", "--weights", str(weights), "--out", str(tmp_path / "o")])
        assert code == 1
        assert "bad.json" in capsys.readouterr().err

    def test_missing_file_exits_one(self, tmp_path):
        assert main(["compile", "--weights", str(tmp_path / "nope.json")]) == 1


class TestPipelineCommand:
    def write_identity_config(self, tmp_path, v=3):
        cfg = make_config(tuple("abc")[:v], np.eye(v), np.eye(v), np.eye(v))
        path = tmp_path / "pipe.json"
        save_pipeline_config(cfg, path)
        return path

    def test_identity_run(self, tmp_path):
        path = self.write_identity_config(tmp_path)
        out = tmp_path / "run"
        code = main(
            [
                "pipeline",
                "--pipeline-config",
                str(path),
                "--steps",
                "5",
                "--seed-tokens",
                "2",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        lines = (out / "trace.jsonl").read_text().splitlines()
        assert len(lines) == 5
        for line in lines:
            obj = json.loads(line)
            assert obj["selected_token"] == 2
            assert obj["hallucination_residual"] == 0.0
        with open(out / "summary.csv", newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert [r["selected_token"] for r in rows] == ["2"] * 5
        assert (out / "pipeline.png").stat().st_size > 0

    def test_rank_deficient_config_lists_aliases(self, tmp_path):
        backward = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
        cfg = make_config(("a", "b", "c"), backward, np.eye(2), np.ones((3, 2)))
        path = tmp_path / "pipe.json"
        save_pipeline_config(cfg, path)
        out = tmp_path / "run"
        assert main(
            ["pipeline", "--pipeline-config", str(path), "--steps", "2", "--out", str(out)]
        ) == 0
        report = json.loads((out / "null_space.json").read_text())
        assert [0, 2] in report["aliased_pairs"]
        assert report["aliased_symbols"] == [["a", "c"]]

    def test_rerun_byte_identical(self, tmp_path):
        path = self.write_identity_config(tmp_path)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        args = ["pipeline", "--pipeline-config", str(path), "--steps", "7"]
        assert main(args + ["--out", str(out_a)]) == 0
        assert main(args + ["--out", str(out_b)]) == 0
        assert read_files(out_a) == read_files(out_b)

    def test_dimension_error_before_any_step(self, tmp_path, capsys):
        path = tmp_path / "pipe.json"
        path.write_text(
            json.dumps(
                {
                    "version": 1,
                    "symbols": ["a", "b"],
                    "Lplus": {"rows": 1, "cols": 2, "data": [[1.0, 0.0]]},
                    "M": {"rows": 1, "cols": 1, "data": [[1.0]]},
                    "S": {"rows": 1, "cols": 1, "data": [[1.0]]},
                }
            )
        )
        out = tmp_path / "never"
        code = main(
            ["pipeline", "--pipeline-config", str(path), "--steps", "3", "--out", str(out)]
        )
        assert code == 1
        assert not out.exists()  # failed at load, before any output


class TestMetaphorCommand:
    def write_inputs(self, tmp_path):
        u = Universe(2)
        x1, x2 = atom(1, u), atom(2, u)
        xor = combine("xor", [x1, x2])
        targets = tmp_path / "targets.json"
        basis = tmp_path / "basis.json"
        save_predicates(targets, [xor, x1])
        save_predicates(basis, list(atoms_family(u)))
        return targets, basis

    def test_reports(self, tmp_path):
        targets, basis = self.write_inputs(tmp_path)
        out = tmp_path / "met"
        code = main(
            ["metaphor", "--targets", str(targets), "--basis", str(basis), "--out", str(out)]
        )
        assert code == 0
        with open(out / "metaphor.csv", newline="") as fh:
            rows = {r["target"]: r for r in csv.DictReader(fh)}
        assert float(rows["xor(x1,x2)"]["residual_sse"]) == pytest.approx(1.0, abs=1e-9)
        assert rows["xor(x1,x2)"]["in_span"] == "false"
        assert float(rows["x1"]["residual_sse"]) == 0.0
        assert rows["x1"]["in_span"] == "true"
        classes = json.loads((out / "alias_classes.json").read_text())
        assert classes["classes"] == [["xor(x1,x2)"], ["x1"]]
        assert (out / "metaphor.png").stat().st_size > 0

    def test_duplicate_targets_share_class(self, tmp_path):
        u = Universe(2)
        x1 = atom(1, u)
        copy = dataclasses.replace(x1, name="x1_copy")
        targets = tmp_path / "targets.json"
        basis = tmp_path / "basis.json"
        save_predicates(targets, [x1, copy])
        save_predicates(basis, list(atoms_family(u)))
        out = tmp_path / "met"
        assert main(
            ["metaphor", "--targets", str(targets), "--basis", str(basis), "--out", str(out)]
        ) == 0
        classes = json.loads((out / "alias_classes.json").read_text())
        assert classes["classes"] == [["x1", "x1_copy"]]

    def test_universe_mismatch_exits_one(self, tmp_path, capsys):
        u2, u3 = Universe(2), Universe(3)
        targets = tmp_path / "targets.json"
        basis = tmp_path / "basis.json"
        save_predicates(targets, [atom(1, u2)])
        save_predicates(basis, [atom(1, u3)])
        code = main(
            ["metaphor", "--targets", str(targets), "--basis", str(basis), "--out", str(tmp_path / "o")]
        )
        assert code == 1
        assert "share one universe" in capsys.readouterr().err

    def test_no_affine_flag(self, tmp_path):
        targets, basis = self.write_inputs(tmp_path)
        out = tmp_path / "met"
        assert main(
            [
                "metaphor",
                "--targets",
                str(targets),
                "--basis",
                str(basis),
                "--no-affine",
                "--out",
                str(out),
            ]
        ) == 0
        meta = json.loads((out / "run_meta.json").read_text())
        assert meta["parameters"]["affine"] is False
        # without the intercept the xor residual drops to the raw projection gap
        with open(out / "metaphor.csv", newline="") as fh:
            rows = {r["target"]: r for r in csv.DictReader(fh)}
        assert rows["x1"]["in_span"] == "true"


class TestUsageErrors:
    def test_bad_flag_exits_one(self, capsys):
        assert main(["capacity", "--bogus"]) == 1

    def test_missing_required_parameter_exits_one(self, capsys):
        assert main(["capacity", "--w", "1"]) == 1
        assert "missing parameters" in capsys.readouterr().err
