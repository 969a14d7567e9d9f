"""Reading observations and writing reports, diagnostics and ratio-diagram data.

JSON numbers use Python's shortest round-trip repr; TSV numbers are rendered
with six significant digits. Missing values are ``null`` in JSON and ``NA``
in TSV/CSV.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .asymptotics import ConfidenceBand
from .distributions import GpdParams
from .errors import LmomError
from .inference import MethodResult, PotConfig, PotReport
from .lmoments import gpd_g, lmrd_lower_bound
from .selectors import CandidateDiagnostic, CandidateGrid, SelectionOutcome

__all__ = [
    "SCHEMA_VERSION",
    "InputError",
    "read_observations",
    "report_to_dict",
    "report_from_dict",
    "write_report",
    "read_report",
    "DIAGNOSTIC_COLUMNS",
    "diagnostics_tsv",
    "write_diagnostics",
    "LmrdExport",
    "build_lmrd",
    "lmrd_csv",
    "write_lmrd",
]

SCHEMA_VERSION = 1
MIN_OBSERVATIONS = 20
NA = "NA"


class InputError(LmomError):
    """Unreadable or invalid input data."""


def read_observations(
    path,
    column: str | int = 0,
    delimiter: str = ",",
    header: bool | None = None,
) -> np.ndarray:
    """Load one numeric column from a delimited text file.

    ``column`` is a 0-based index or a header name. With ``header=None`` the
    first row is treated as a header only if its selected field is not a
    number. Any later non-numeric or non-finite row is an error that names
    its line.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc
    rows = [(k + 1, r) for k, r in enumerate(csv.reader(io.StringIO(text), delimiter=delimiter)) if r]
    if not rows:
        raise InputError(f"{path}: no data")
    if isinstance(column, str) and not column.lstrip("-").isdigit():
        header = True if header is None else header
        if not header:
            raise InputError("a column name needs a header row")
        names = [c.strip() for c in rows[0][1]]
        if column not in names:
            raise InputError(f"{path}: no column named {column!r} (have {names})")
        idx = names.index(column)
    else:
        idx = int(column)
    if header is None:
        first = rows[0][1]
        header = idx < len(first) and not _is_number(first[idx])
    body = rows[1:] if header else rows
    values = []
    for line, row in body:
        try:
            v = float(row[idx])
        except (IndexError, ValueError):
            raise InputError(f"{path}:{line}: cannot read a number from column {column!r}") from None
        if not math.isfinite(v):
            raise InputError(f"{path}:{line}: non-finite value {row[idx]!r}")
        values.append(v)
    if len(values) < MIN_OBSERVATIONS:
        raise InputError(f"{path}: {len(values)} observations; need at least {MIN_OBSERVATIONS}")
    return np.array(values)


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


# ---------------------------------------------------------------------------
# JSON report


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _band_dict(b: ConfidenceBand | None):
    if b is None:
        return None
    return {"center": _num(b.center), "lower": _num(b.lower), "upper": _num(b.upper), "level": _num(b.level)}


def _diag_dict(d: CandidateDiagnostic) -> dict:
    return {
        "index": d.index,
        "u": _num(d.u),
        "n_u": d.n_u,
        "t3": _num(d.t3),
        "t4": _num(d.t4),
        "xi_hat": _num(d.xi_hat),
        "band_tau4": _band_dict(d.band_tau4),
        "band_tau3": _band_dict(d.band_tau3),
        "z": _num(d.z),
        "p": _num(d.p),
        "fs": _num(d.fs) if d.fs != math.inf else "inf",
        "status": d.status,
        "warnings": list(d.warnings),
    }


def _config_dict(c: PotConfig, grid: CandidateGrid) -> dict:
    return {
        "n_candidates": c.n_candidates,
        "p_start": _num(grid.probabilities[0]),
        "p_end": _num(grid.probabilities[-1]),
        "methods": list(c.methods),
        "alpha_cb": c.alpha_cb,
        "alpha_gof": c.alpha_gof,
        "n_sim": c.n_sim,
        "seed": c.seed,
        "return_periods": [float(t) for t in c.return_periods],
        "obs_per_year": c.obs_per_year,
    }


def report_to_dict(report: PotReport, include_timing: bool = False) -> dict:
    methods = {}
    for name, res in report.results.items():
        out = res.outcome
        methods[name] = {
            "selected_index": out.selected_index,
            "u_star": _num(out.u_star),
            "n_star": out.n_star,
            "alpha": _num(out.alpha),
            "fit": None if res.fit is None else {
                "sigma": res.fit.sigma, "xi": res.fit.xi, "valid": res.fit.valid,
            },
            "zeta": _num(res.zeta),
            "return_levels": {f"{t:g}": v for t, v in res.return_levels.items()},
            "warnings": list(res.warnings),
            "diagnostics": [_diag_dict(d) for d in out.diagnostics],
        }
    d = {
        "schema_version": SCHEMA_VERSION,
        "n": report.n,
        "config": _config_dict(report.config, report.grid),
        "grid": {
            "probabilities": [float(p) for p in report.grid.probabilities],
            "thresholds": [float(u) for u in report.grid.thresholds],
            "exceedance_counts": [int(k) for k in report.grid.exceedance_counts],
        },
        "methods": methods,
    }
    if include_timing:
        d["elapsed_seconds"] = report.elapsed_seconds
    return d


def _f(x):
    if x is None:
        return math.nan
    if x == "inf":
        return math.inf
    return float(x)


def _band_from(d):
    return None if d is None else ConfidenceBand(_f(d["center"]), _f(d["lower"]), _f(d["upper"]), _f(d["level"]))


def report_from_dict(d: dict) -> PotReport:
    if d.get("schema_version") != SCHEMA_VERSION:
        raise InputError(f"unsupported report schema {d.get('schema_version')!r}")
    c = d["config"]
    config = PotConfig(
        n_candidates=c["n_candidates"],
        p_start=c["p_start"],
        p_end=c["p_end"],
        methods=tuple(c["methods"]),
        alpha_cb=c["alpha_cb"],
        alpha_gof=c["alpha_gof"],
        n_sim=c["n_sim"],
        seed=c["seed"],
        return_periods=tuple(c["return_periods"]),
        obs_per_year=c["obs_per_year"],
    )
    g = d["grid"]
    grid = CandidateGrid(
        np.array(g["probabilities"], dtype=float),
        np.array(g["thresholds"], dtype=float),
        np.array(g["exceedance_counts"], dtype=int),
    )
    results = {}
    for name, m in d["methods"].items():
        diags = [
            CandidateDiagnostic(
                index=x["index"], u=_f(x["u"]), n_u=x["n_u"], t3=_f(x["t3"]), t4=_f(x["t4"]),
                xi_hat=_f(x["xi_hat"]), band_tau4=_band_from(x["band_tau4"]),
                band_tau3=_band_from(x["band_tau3"]), z=_f(x["z"]), p=_f(x["p"]), fs=_f(x["fs"]),
                status=x["status"], warnings=list(x["warnings"]),
            )
            for x in m["diagnostics"]
        ]
        outcome = SelectionOutcome(name, m["selected_index"], m["u_star"], m["n_star"], diags, _f(m["alpha"]))
        fit = None if m["fit"] is None else GpdParams(m["fit"]["sigma"], m["fit"]["xi"], m["fit"]["valid"])
        results[name] = MethodResult(
            outcome, fit, m["zeta"], {float(k): v for k, v in m["return_levels"].items()}, list(m["warnings"])
        )
    return PotReport(d["n"], grid, config, results, d.get("elapsed_seconds", math.nan))


def write_report(report: PotReport, path, include_timing: bool = False) -> None:
    text = json.dumps(report_to_dict(report, include_timing), indent=2, allow_nan=False) + "\n"
    _write(path, text)


def read_report(path) -> PotReport:
    try:
        return report_from_dict(json.loads(Path(path).read_text()))
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from exc


def _write(path, text: str) -> None:
    path = Path(path)
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc


# ---------------------------------------------------------------------------
# TSV diagnostics

DIAGNOSTIC_COLUMNS = (
    "method", "i", "u_i", "n_u", "t3", "t4",
    "tau4_lower", "tau4_upper", "tau3_lower", "tau3_upper",
    "z", "p", "fs", "status",
)


def _g6(x) -> str:
    if x is None:
        return NA
    x = float(x)
    if math.isnan(x):
        return NA
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.6g}"


def _diag_row(method: str, d: CandidateDiagnostic) -> list[str]:
    b4, b3 = d.band_tau4, d.band_tau3
    return [
        method, str(d.index), _g6(d.u), str(d.n_u), _g6(d.t3), _g6(d.t4),
        _g6(b4.lower if b4 else None), _g6(b4.upper if b4 else None),
        _g6(b3.lower if b3 else None), _g6(b3.upper if b3 else None),
        _g6(d.z), _g6(d.p), _g6(d.fs), d.status,
    ]


def diagnostics_tsv(outcomes) -> str:
    """Tab-separated per-candidate table for one or more selection outcomes."""
    if isinstance(outcomes, SelectionOutcome):
        outcomes = [outcomes]
    lines = ["\t".join(DIAGNOSTIC_COLUMNS)]
    for out in outcomes:
        lines.extend("\t".join(_diag_row(out.method, d)) for d in out.diagnostics)
    return "\n".join(lines) + "\n"


def write_diagnostics(outcomes, path) -> None:
    _write(path, diagnostics_tsv(outcomes))


# ---------------------------------------------------------------------------
# L-moment ratio diagram export


@dataclass(frozen=True)
class LmrdExport:
    """Points, curves and band segments for drawing the ratio diagram elsewhere.

    ``points`` rows are ``(i, t3, t4)``; ``tau4_bands`` rows ``(i, t3, lower, upper)``
    (vertical segments); ``tau3_bands`` rows ``(i, t4, lower, upper)``
    (horizontal segments).
    """

    points: np.ndarray
    gpd_curve: np.ndarray
    lower_bound: np.ndarray
    tau4_bands: np.ndarray
    tau3_bands: np.ndarray


def build_lmrd(outcome: SelectionOutcome, n_curve: int = 201) -> LmrdExport:
    t3 = np.linspace(-1.0, 1.0, n_curve)
    pts, b4, b3 = [], [], []
    for d in outcome.diagnostics:
        if math.isfinite(d.t3) and math.isfinite(d.t4):
            pts.append((d.index, d.t3, d.t4))
        if d.band_tau4 is not None:
            b4.append((d.index, d.t3, d.band_tau4.lower, d.band_tau4.upper))
        if d.band_tau3 is not None:
            b3.append((d.index, d.t4, d.band_tau3.lower, d.band_tau3.upper))
    return LmrdExport(
        np.array(pts, dtype=float).reshape(-1, 3),
        np.column_stack([t3, gpd_g(t3)]),
        np.column_stack([t3, lmrd_lower_bound(t3)]),
        np.array(b4, dtype=float).reshape(-1, 4),
        np.array(b3, dtype=float).reshape(-1, 4),
    )


def lmrd_csv(export: LmrdExport) -> str:
    """Long-format CSV with columns ``kind,i,t3,t4``.

    Band segments are written as their two endpoints (``*_lo`` / ``*_hi`` rows).
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["kind", "i", "t3", "t4"])
    r = repr
    for i, a, b in export.points:
        w.writerow(["candidate", int(i), r(float(a)), r(float(b))])
    for a, b in export.gpd_curve:
        w.writerow(["gpd_curve", NA, r(float(a)), r(float(b))])
    for a, b in export.lower_bound:
        w.writerow(["lower_bound", NA, r(float(a)), r(float(b))])
    for i, a, lo, hi in export.tau4_bands:
        w.writerow(["tau4_band_lo", int(i), r(float(a)), r(float(lo))])
        w.writerow(["tau4_band_hi", int(i), r(float(a)), r(float(hi))])
    for i, b, lo, hi in export.tau3_bands:
        w.writerow(["tau3_band_lo", int(i), r(float(lo)), r(float(b))])
        w.writerow(["tau3_band_hi", int(i), r(float(hi)), r(float(b))])
    return buf.getvalue()


def write_lmrd(export: LmrdExport, path) -> None:
    _write(path, lmrd_csv(export))

