import json

import numpy as np
import pytest

from contactlab.config import (
    build_grid,
    build_potential,
    load_config_file,
    resolve_config,
)
from contactlab.errors import FormatError, ValidationError
from contactlab.fieldio import read_field, write_field
from contactlab.fields import WaveField
from contactlab.grids import BoxGrid3D
from contactlab.meanfield import gaussian_packet
from contactlab.report import RunReport, canonical_json, emit_report, write_csv


class TestFieldIO:
    def test_roundtrip_is_bitwise(self, tmp_path):
        field = gaussian_packet(BoxGrid3D(m=16, side=9.0), 1.3)
        path = tmp_path / "f.fld"
        write_field(field, path)
        back = read_field(path)
        assert np.array_equal(field.values, back.values)
        assert back.grid.m == 16
        assert back.grid.side == 9.0

    def test_truncated_file_reports_byte_counts(self, tmp_path):
        field = gaussian_packet(BoxGrid3D(m=16, side=9.0), 1.3)
        path = tmp_path / "f.fld"
        write_field(field, path)
        blob = path.read_bytes()
        path.write_bytes(blob[:-5])
        with pytest.raises(FormatError, match="expected .* got"):
            read_field(path)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "f.fld"
        path.write_bytes(b"NOT-A-FIELD-FILE" + b"\x00" * 64)
        with pytest.raises(FormatError, match="magic"):
            read_field(path)

    def test_non_power_of_two_rejected(self, tmp_path):
        field = gaussian_packet(BoxGrid3D(m=16, side=9.0), 1.3)
        path = tmp_path / "f.fld"
        write_field(field, path)
        blob = bytearray(path.read_bytes())
        blob[16:20] = (17).to_bytes(4, "little")
        path.write_bytes(bytes(blob))
        with pytest.raises(FormatError, match="power of two"):
            read_field(path)


class TestCanonicalJson:
    def test_keys_sorted_and_floats_pinned(self):
        doc = {"b": 1.0 / 3.0, "a": 7}
        text = canonical_json(doc)
        assert text.index('"a"') < text.index('"b"')
        assert "0.33333333333333331" in text

    def test_non_finite_values_survive(self):
        text = canonical_json({"x": float("nan"), "y": float("inf")})
        parsed = json.loads(text)
        assert parsed["x"] == "nan"
        assert parsed["y"] == "inf"

    def test_output_parses_as_json(self):
        doc = {"nested": {"list": [1, 2.5, "s", True, None]}}
        assert json.loads(canonical_json(doc)) == doc

    def test_identical_input_identical_bytes(self):
        doc = {"values": list(np.linspace(0, 1, 7)), "n": 7}
        assert canonical_json(doc) == canonical_json(json.loads(canonical_json(doc)))


class TestReportEmission:
    def report(self):
        return RunReport(
            config_echo={"command": "twobody", "seed": 0},
            results={"eigenvalues": [-6.32, -1.2]},
            provenance={"contactlab_version": "0.1.0"},
            warnings=[],
            tables={"eigenvalues": (["n", "lambda"], [[1, -6.32], [2, -1.2]])},
        )

    def test_emit_writes_json_and_csv(self, tmp_path):
        written = emit_report(self.report(), tmp_path, wall_time=0.5)
        names = sorted(p.split("/")[-1] for p in written)
        assert names == ["eigenvalues.csv", "report.json", "timing.txt"]
        doc = json.loads((tmp_path / "report.json").read_text())
        assert doc["warnings"] == []
        lines = (tmp_path / "eigenvalues.csv").read_text().splitlines()
        assert lines[0] == "n,lambda"
        assert len(lines) == 3

    def test_wall_time_stays_out_of_report(self, tmp_path):
        emit_report(self.report(), tmp_path, wall_time=1.23)
        assert "1.23" not in (tmp_path / "report.json").read_text()

    def test_csv_row_width_checked(self, tmp_path):
        with pytest.raises(ValidationError):
            write_csv(tmp_path / "x.csv", ["a", "b"], [[1]])


class TestConfig:
    def test_toml_and_json_agree(self, tmp_path):
        toml_path = tmp_path / "c.toml"
        toml_path.write_text('g = 0.5\nm = 16\n')
        json_path = tmp_path / "c.json"
        json_path.write_text('{"g": 0.5, "m": 16}')
        a = resolve_config("gp-groundstate", load_config_file(toml_path), 0, ".")
        b = resolve_config("gp-groundstate", load_config_file(json_path), 0, ".")
        assert a.parameters == b.parameters

    def test_defaults_materialized(self, tmp_path):
        path = tmp_path / "c.toml"
        path.write_text("g = 0.5\n")
        cfg = resolve_config("gp-groundstate", load_config_file(path), 3, ".")
        assert cfg.parameters["omega"] == 1.0
        assert cfg.parameters["trap"] == "harmonic"
        assert cfg.echo()["seed"] == 3

    def test_unknown_key_rejected(self):
        with pytest.raises(ValidationError, match="unknown key"):
            resolve_config("gp-groundstate", {"g": 1.0, "typo": 2}, 0, ".")

    def test_nested_unknown_key_rejected(self):
        raw = {"potential": {"coupling": 1.0, "oops": 1},
               "grid": {"n": 10, "r_max": 1.0}}
        with pytest.raises(ValidationError, match="unknown key"):
            resolve_config("twobody", raw, 0, ".")

    def test_missing_required_key_rejected(self):
        with pytest.raises(ValidationError, match="required"):
            resolve_config("gp-groundstate", {}, 0, ".")

    def test_wrong_type_rejected(self):
        with pytest.raises(ValidationError, match="number"):
            resolve_config("gp-groundstate", {"g": "strong"}, 0, ".")

    def test_builders_produce_objects(self):
        raw = {"potential": {"coupling": 2.0,
                             "shape": {"kind": "gaussian", "sigma": 0.5}},
               "grid": {"n": 100, "r_max": 4.0}}
        cfg = resolve_config("twobody", raw, 0, ".")
        spec = build_potential(cfg.parameters["potential"])
        grid = build_grid(cfg.parameters["grid"])
        assert spec.coupling == 2.0
        assert grid.n == 100

    def test_unknown_command_rejected(self):
        with pytest.raises(ValidationError, match="unknown command"):
            resolve_config("frobnicate", {}, 0, ".")
