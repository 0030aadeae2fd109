import json
import math
from types import SimpleNamespace

import numpy as np
import pytest

from nffbeam import InvalidInputError, build_frequency, build_layout, total_field, tr_phases, FocalTarget
from nffbeam.analysis import contribution_phasors
from nffbeam.cli import main, run_scenario
from nffbeam.config import parse_config
from nffbeam.field_engine import ElementModel
from nffbeam.geometry import box_grid
from nffbeam.serialize import FIELD_COLUMNS, read_field_csv, write_field_map

BASE = """
target: {x: 0.0, y: 0.0, z: 0.5}
grid: {kind: axial-line, z_min: 0.1, z_max: 1.5, samples: 561}
"""


def write_cfg(tmp_path, text, name="scenario.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def run(tmp_path, command, text, capsys=None):
    cfg = write_cfg(tmp_path, text)
    out = tmp_path / "out"
    code = main([command, "--config", str(cfg), "--out", str(out), "--quiet"])
    return code, out


class TestCompare:
    def test_default_scenario(self, tmp_path):
        code, out = run(tmp_path, "compare", BASE)
        assert code == 0
        rep = json.loads((out / "comparison.json").read_text())
        assert rep["checks"] == {"tr_equals_ray_optic": True, "tr_peak_not_farther": True, "tr_peak_stronger": True}
        assert rep["phase_deltas"]["tr|ray-optic"] < 1e-9
        summary = json.loads((out / "summary.json").read_text())
        for name in summary["files"]:
            assert (out / name).exists()
        assert summary["layout_hash"] == build_layout().layout_hash()
        assert summary["config"]["frequency_hz"] == 5.8e9
        assert summary["reports"]["tr"]["spot_definition"].startswith("-3 dB")

    def test_needs_single_target(self, tmp_path):
        code, _ = run(tmp_path, "compare", "target: [{z: 0.5}, {z: 0.6}]\n")
        assert code == 2


def test_synth_quantized_lattice(tmp_path):
    code, out = run(tmp_path, "synth", BASE + "quantization_bits: 6\n")
    assert code == 0
    doc = json.loads((out / "excitations.json").read_text())
    step = 2 * math.pi / 64
    assert {e["method"] for e in doc["excitations"]} == {"tr", "ray-optic", "far-field"}
    for e in doc["excitations"]:
        for key in ("phases_rad", "normalized_phases_rad"):
            k = np.asarray(e[key]) / step
            np.testing.assert_allclose(k, np.round(k), atol=1e-9)
    assert (out / "excitations.csv").read_text().startswith("target_index,method,element,")


def test_field_single_point_at_target(tmp_path):
    text = """
element_model: {kind: isotropic}
target: {x: 0.03, y: -0.02, z: 0.4}
methods: [tr]
grid: {kind: points, points: [[0.03, -0.02, 0.4]]}
"""
    code, out = run(tmp_path, "field", text)
    assert code == 0
    lines = (out / "field_tr.csv").read_text().splitlines()
    assert lines[0] == "x_m,y_m,z_m,re,im,abs" and len(lines) == 2
    magnitude = float(lines[1].split(",")[5])
    fs, lay = build_frequency(5.8e9), build_layout()
    t = FocalTarget.at(0.03, -0.02, 0.4)
    c = contribution_phasors(lay, tr_phases(lay, t, fs), t, fs)
    assert magnitude == pytest.approx(np.sum(np.abs(c)), rel=1e-12)


def test_steer_outputs(tmp_path):
    text = "target: [{y: -0.1, z: 0.5}, {y: 0.1, z: 0.5}]\nmethods: [tr]\noutput: {formats: [csv]}\n"
    code, out = run(tmp_path, "steer", text)
    assert code == 0
    reps = json.loads((out / "steer.json").read_text())["reports"]
    assert reps[0]["peak_position"][1] < 0 < reps[1]["peak_position"][1]
    assert (out / "steer_t0.csv").exists() and not (out / "steer_t0.json").exists()


class TestExitCodes:
    @pytest.mark.parametrize(
        "text",
        ["target: {z: 0.5\n", "collumns: 8\ntarget: {z: 0.5}\n", "frequency_hz: -5\ntarget: {z: 0.5}\n"],
    )
    def test_validation_failures(self, tmp_path, capsys, text):
        code, _ = run(tmp_path, "field", text)
        assert code == 2
        rec = json.loads(capsys.readouterr().err.strip())
        assert rec["status"] == "error" and rec["exit_code"] == 2

    def test_missing_config(self, tmp_path, capsys):
        assert main(["synth", "--config", str(tmp_path / "missing.yaml"), "--quiet"]) == 2

    def test_singularity(self, tmp_path, capsys):
        # a slot center of the first column
        text = "target: {z: 0.5}\ngrid: {kind: points, points: [[0, 0, 0.3], [-0.144, -0.0728, 0.0]]}\n"
        code, _ = run(tmp_path, "field", text)
        assert code == 3
        rec = json.loads(capsys.readouterr().err.strip())
        assert rec["error_type"] == "SingularityError" and rec["point_index"] == 1

    def test_unwritable_output(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, BASE)
        blocker = tmp_path / "blocker"
        blocker.write_text("not a directory")
        assert main(["compare", "--config", str(cfg), "--out", str(blocker / "sub"), "--quiet"]) == 3
        rec = json.loads(capsys.readouterr().err.strip())
        assert "blocker" in rec["path"]

    def test_bad_subcommand(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["explode", "--config", "x"])
        assert err.value.code == 2


def test_human_summary(tmp_path, capsys):
    cfg = write_cfg(tmp_path, BASE)
    assert main(["compare", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    out = capsys.readouterr().out
    assert "check tr_peak_stronger: pass" in out


class TestFormats:
    def test_csv_round_trip_bit_exact(self, tmp_path, freq):
        lay = build_layout()
        grid = box_grid((-0.1, 0.1), (-0.1, 0.1), (0.2, 0.6), (4, 3, 5))
        fmap = total_field(lay, tr_phases(lay, FocalTarget.at(0, 0, 0.5), freq), ElementModel(), grid, freq)
        path = write_field_map(fmap, tmp_path / "m.csv")
        raw = path.read_bytes()
        assert b"\r" not in raw and raw.endswith(b"\n")
        assert raw.split(b"\n")[0].decode() == ",".join(FIELD_COLUMNS)
        pts, vals = read_field_csv(path)
        assert np.array_equal(pts, fmap.points())
        assert vals.tobytes() == fmap.values.tobytes()
        first = raw.split(b"\n")[1].decode().split(",")
        assert all(len(f.split("e")[0].replace("-", "").replace(".", "")) == 17 for f in first)

    def test_json_map(self, tmp_path, freq):
        lay = build_layout(2, 0.02)
        grid = box_grid((-0.1, 0.1), (-0.1, 0.1), (0.2, 0.6), (2, 2, 2))
        fmap = total_field(lay, tr_phases(lay, FocalTarget.at(0, 0, 0.5), freq), ElementModel(), grid, freq)
        doc = json.loads(write_field_map(fmap, tmp_path / "m.json", "json").read_text())
        assert doc["columns"] == list(FIELD_COLUMNS) and len(doc["rows"]) == 8
        assert complex(doc["rows"][3][3], doc["rows"][3][4]) == fmap.values[3]

    def test_empty_refused(self, tmp_path):
        empty = SimpleNamespace(values=np.array([], dtype=complex))
        with pytest.raises(InvalidInputError):
            write_field_map(empty, tmp_path / "e.csv")
        assert not (tmp_path / "e.csv").exists()

    def test_unknown_format(self, tmp_path, freq):
        lay = build_layout(1, 0.02)
        grid = box_grid((-0.1, 0.1), (-0.1, 0.1), (0.2, 0.6), (2, 2, 2))
        fmap = total_field(lay, tr_phases(lay, FocalTarget.at(0, 0, 0.5), freq), ElementModel(), grid, freq)
        with pytest.raises(InvalidInputError):
            write_field_map(fmap, tmp_path / "m.xml", "xml")


def test_golden_bytes_stable_across_runs(tmp_path):
    cfg = parse_config(BASE)
    a = run_scenario(cfg, "compare", tmp_path / "a")
    b = run_scenario(cfg, "compare", tmp_path / "b")
    for name in a.files:
        if name != "summary.json":
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes(), name
    assert a.files == b.files
