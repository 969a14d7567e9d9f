import csv
import io
import json

import numpy as np
import pytest

from lmthresh import PotConfig, analyze, gpd_g, lmrd_lower_bound
from lmthresh.cli import run_cli
from lmthresh.report import (
    DIAGNOSTIC_COLUMNS,
    InputError,
    build_lmrd,
    diagnostics_tsv,
    lmrd_csv,
    read_observations,
    read_report,
    report_from_dict,
    report_to_dict,
    write_report,
)

from conftest import gpd_draw


@pytest.fixture(scope="module")
def data():
    return gpd_draw(600, 1.2, -0.1, seed=17) + 1.0


@pytest.fixture(scope="module")
def report(data):
    return analyze(data, PotConfig(n_sim=150, seed=3, obs_per_year=20))


@pytest.fixture
def csv_file(tmp_path, data):
    p = tmp_path / "obs.csv"
    lines = ["year,hs"] + [f"{1900 + i},{float(v)!r}" for i, v in enumerate(data)]
    p.write_text("\n".join(lines) + "\n")
    return p


class TestReadObservations:
    def test_header_by_name(self, csv_file, data):
        x = read_observations(csv_file, "hs")
        np.testing.assert_array_equal(x, data)

    def test_header_autodetect(self, csv_file, data):
        np.testing.assert_array_equal(read_observations(csv_file, 1), data)

    def test_no_header(self, tmp_path):
        p = tmp_path / "a.txt"
        p.write_text("\n".join(str(v) for v in range(30)))
        assert read_observations(p).size == 30

    def test_bad_row_names_line(self, tmp_path):
        p = tmp_path / "b.csv"
        rows = ["x"] + [str(v) for v in range(25)]
        rows[7] = "oops"
        p.write_text("\n".join(rows))
        with pytest.raises(InputError, match=r":8:"):
            read_observations(p)

    def test_nonfinite(self, tmp_path):
        p = tmp_path / "c.csv"
        p.write_text("\n".join(["1.0"] * 24 + ["inf"]))
        with pytest.raises(InputError, match="non-finite"):
            read_observations(p)

    def test_too_short(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("\n".join(["1.0"] * 19))
        with pytest.raises(InputError, match="at least 20"):
            read_observations(p)

    def test_missing_column(self, csv_file):
        with pytest.raises(InputError, match="no column"):
            read_observations(csv_file, "tp")

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            read_observations(tmp_path / "nope.csv")


class TestJsonReport:
    def test_round_trip(self, report):
        d = report_to_dict(report)
        assert report_to_dict(report_from_dict(d)) == d

    def test_file_round_trip(self, report, tmp_path):
        p = tmp_path / "r.json"
        write_report(report, p)
        d = json.loads(p.read_text())
        assert report_to_dict(read_report(p)) == d

    def test_strict_json(self, report):
        text = json.dumps(report_to_dict(report), allow_nan=False)
        assert "NaN" not in text

    def test_fields(self, report):
        d = report_to_dict(report)
        assert d["config"]["seed"] == 3
        assert d["config"]["p_start"] == pytest.approx(0.25)
        assert "elapsed_seconds" not in d
        assert "elapsed_seconds" in report_to_dict(report, include_timing=True)
        for name, m in d["methods"].items():
            assert len(m["diagnostics"]) == 10
            if m["selected_index"] is not None:
                assert set(m["return_levels"]) == {"100", "10000"}


class TestDiagnosticsTsv:
    def test_layout(self, report):
        outs = [r.outcome for r in report.results.values()]
        rows = list(csv.reader(io.StringIO(diagnostics_tsv(outs)), delimiter="\t"))
        assert tuple(rows[0]) == DIAGNOSTIC_COLUMNS
        assert len(rows) == 1 + 20
        assert {r[0] for r in rows[1:]} == {"alcbsm", "algfsm"}

    def test_fs_recomputable_from_p(self, report):
        out = report.results["algfsm"].outcome
        rows = list(csv.DictReader(io.StringIO(diagnostics_tsv(out)), delimiter="\t"))
        p = np.array([float(r["p"]) for r in rows])
        fs = np.array([float(r["fs"]) for r in rows])
        expect = np.cumsum(-np.log1p(-p)) / np.arange(1, p.size + 1)
        np.testing.assert_allclose(fs, expect, rtol=1e-5)

    def test_missing_values_are_na(self, report):
        out = report.results["alcbsm"].outcome
        rows = list(csv.DictReader(io.StringIO(diagnostics_tsv(out)), delimiter="\t"))
        assert all(r["z"] == "NA" for r in rows)


class TestLmrd:
    def test_curves(self, report):
        ex = build_lmrd(report.results["alcbsm"].outcome)
        np.testing.assert_allclose(ex.gpd_curve[:, 1], gpd_g(ex.gpd_curve[:, 0]), atol=1e-12)
        np.testing.assert_allclose(ex.lower_bound[:, 1], lmrd_lower_bound(ex.lower_bound[:, 0]), atol=1e-12)
        assert ex.points.shape == (10, 3)
        assert ex.tau4_bands.shape[1] == 4

    def test_csv(self, report):
        text = lmrd_csv(build_lmrd(report.results["alcbsm"].outcome))
        rows = list(csv.DictReader(io.StringIO(text)))
        kinds = {r["kind"] for r in rows}
        assert {"candidate", "gpd_curve", "lower_bound", "tau4_band_lo", "tau3_band_hi"} <= kinds
        for r in rows:
            if r["kind"] == "gpd_curve":
                assert float(r["t4"]) == pytest.approx(gpd_g(float(r["t3"])), abs=1e-12)


class TestCli:
    def _args(self, csv_file, tmp_path, *extra):
        return [
            "--input", str(csv_file), "--column", "hs", "--nsim", "120", "--seed", "42",
            "--rl", "100,10000", "--obs-per-year", "20.26",
            "--out-report", str(tmp_path / "r.json"),
            "--out-diagnostics", str(tmp_path / "d.tsv"),
            "--out-lmrd", str(tmp_path / "l.csv"),
            *extra,
        ]

    def test_success(self, csv_file, tmp_path):
        code = run_cli(self._args(csv_file, tmp_path))
        d = json.loads((tmp_path / "r.json").read_text())
        selected = all(m["selected_index"] is not None for m in d["methods"].values())
        assert code == (0 if selected else 3)
        assert d["config"]["obs_per_year"] == 20.26
        assert (tmp_path / "d.tsv").read_text().startswith("method\ti\tu_i")
        assert (tmp_path / "l.csv").read_text().startswith("kind,i,t3,t4")

    def test_single_method(self, csv_file, tmp_path):
        run_cli(self._args(csv_file, tmp_path, "--method", "algfsm"))
        d = json.loads((tmp_path / "r.json").read_text())
        assert list(d["methods"]) == ["algfsm"]

    def test_stdout(self, csv_file, capsys):
        code = run_cli(["--input", str(csv_file), "--column", "1", "--method", "alcbsm"])
        d = json.loads(capsys.readouterr().out)
        assert code in (0, 3)
        assert d["n"] == 600

    def test_none_selected_exit(self, tmp_path):
        p = tmp_path / "c.csv"
        x = np.abs(np.random.default_rng(5).standard_cauchy(2000))
        p.write_text("\n".join(repr(float(v)) for v in x))
        code = run_cli(["--input", str(p), "--method", "alcbsm", "--alpha-cb", "0.001",
                        "--out-report", str(tmp_path / "r.json")])
        assert code == 3

    def test_constant_input(self, tmp_path, capsys):
        p = tmp_path / "k.csv"
        p.write_text("\n".join(["2.5"] * 40))
        assert run_cli(["--input", str(p)]) == 2
        assert "error" in capsys.readouterr().err

    def test_bad_flags(self, csv_file):
        assert run_cli(["--input", str(csv_file), "--method", "bogus"]) == 2
        assert run_cli(["--input", str(csv_file), "--obs-per-year", "0"]) == 2
        assert run_cli(["--input", str(csv_file), "--candidates", "1"]) == 2

    def test_missing_input(self, tmp_path):
        assert run_cli(["--input", str(tmp_path / "missing.csv")]) == 2

    def test_byte_identical(self, csv_file, tmp_path):
        outs = []
        for k, workers in enumerate(["1", "3", "1"]):
            d = tmp_path / f"run{k}"
            d.mkdir()
            run_cli(self._args(csv_file, d, "--workers", workers))
            outs.append(tuple((d / f).read_bytes() for f in ("r.json", "d.tsv", "l.csv")))
        assert outs[0] == outs[1] == outs[2]
