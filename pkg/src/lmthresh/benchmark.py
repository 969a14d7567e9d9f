"""Seeded Monte Carlo harness for threshold-selector behaviour.

A scenario fixes a parent distribution with known tail structure, draws
replicate samples on independent streams ``(seed, replicate)``, runs the
selectors on each and aggregates in replicate order, so the metrics do not
depend on how many worker processes were used.
"""
from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .distributions import (
    GpdParams,
    KappaParams,
    RandomStream,
    gpd_quantile,
    kappa_quantile,
)
from .errors import DomainError, LmomError
from .inference import METHODS, PotConfig, analyze

__all__ = ["ScenarioSpec", "BenchmarkMetrics", "Parent", "run_benchmark", "load_scenario", "main"]


@dataclass(frozen=True)
class Parent:
    """Parent distribution of a scenario.

    ``kind`` is ``gpd`` (uses ``sigma``, ``xi``), ``kappa`` (``mu``, ``sigma``,
    ``xi``, ``h``) or ``spliced``: a scipy.stats ``body`` distribution below
    its ``q0`` quantile and a GPd(``sigma``, ``xi``) shifted to start at that
    quantile above it.
    """

    kind: str = "gpd"
    sigma: float = 1.0
    xi: float = 0.0
    mu: float = 0.0
    h: float = 1.0
    body: str = "lognorm"
    body_params: dict = field(default_factory=lambda: {"s": 0.5})
    q0: float = 0.6

    def __post_init__(self):
        if self.kind not in ("gpd", "kappa", "spliced"):
            raise DomainError(f"unknown parent kind {self.kind!r}")
        if self.kind == "spliced" and not 0 < self.q0 < 1:
            raise DomainError("splice quantile must be in (0, 1)")

    def _body(self):
        return getattr(stats, self.body)(**self.body_params)

    @property
    def splice_point(self) -> float:
        return float(self._body().ppf(self.q0)) if self.kind == "spliced" else 0.0

    def quantile(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self.kind == "gpd":
            return gpd_quantile(p, GpdParams(self.sigma, self.xi))
        if self.kind == "kappa":
            return kappa_quantile(p, KappaParams(self.mu, self.sigma, self.xi, self.h))
        body = self._body()
        tail_p = np.clip((p - self.q0) / (1.0 - self.q0), 0.0, None)
        tail = self.splice_point + gpd_quantile(tail_p, GpdParams(self.sigma, self.xi))
        return np.where(p <= self.q0, body.ppf(np.minimum(p, self.q0)), tail)

    @property
    def tail_xi(self) -> float:
        """Shape of the exact GPd tail, NaN when the parent has none."""
        if self.kind == "kappa" and self.h != 1:
            return math.nan
        return self.xi

    @property
    def appropriate_probability(self) -> float:
        """Lowest non-exceedance probability above which excesses are exactly GPd."""
        return self.q0 if self.kind == "spliced" else 0.0


@dataclass(frozen=True)
class ScenarioSpec:
    parent: Parent = field(default_factory=Parent)
    n: int = 2000
    reps: int = 200
    methods: tuple[str, ...] = METHODS
    n_candidates: int = 10
    p_start: float | None = None
    p_end: float | None = None
    alpha_cb: float = 0.05
    alpha_gof: float = 0.1
    n_sim: int = 500
    seed: int = 0
    obs_per_year: float = 1.0
    return_period: float = 100.0

    def __post_init__(self):
        if self.reps < 1:
            raise DomainError("reps must be at least 1")
        if self.n < 20:
            raise DomainError("sample size must be at least 20")

    def config(self, replicate: int) -> PotConfig:
        return PotConfig(
            n_candidates=self.n_candidates,
            p_start=self.p_start,
            p_end=self.p_end,
            methods=tuple(self.methods),
            alpha_cb=self.alpha_cb,
            alpha_gof=self.alpha_gof,
            n_sim=self.n_sim,
            # keep the per-replicate GoF streams apart from the data stream
            seed=int(np.random.SeedSequence([self.seed, replicate, 1]).generate_state(1)[0]),
            return_periods=(self.return_period,),
            obs_per_year=self.obs_per_year,
        )


@dataclass
class BenchmarkMetrics:
    methods: tuple[str, ...]
    reps: int
    selection_frequencies: dict[str, list[float]]
    none_rate: dict[str, float]
    failure_rate: dict[str, float]
    xi_bias: dict[str, float]
    xi_rmse: dict[str, float]
    rl_relative_bias: dict[str, float]
    true_return_level: float
    mean_runtime: float = math.nan

    def to_dict(self, include_timing: bool = False) -> dict:
        d = asdict(self)
        d["methods"] = list(self.methods)
        if not include_timing:
            d.pop("mean_runtime")
        return _clean(d)


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _replicate(spec: ScenarioSpec, r: int):
    """Outcome of one replicate: per method ``(index or None, xi_hat, rl)``; ``None`` on failure."""
    rng = RandomStream(spec.seed, (r, 0)).generator()
    x = spec.parent.quantile(rng.random(spec.n))
    t0 = time.perf_counter()
    try:
        report = analyze(x, spec.config(r))
    except LmomError:
        return None, time.perf_counter() - t0
    out = {}
    for m, res in report.results.items():
        o = res.outcome
        xi = res.fit.xi if res.fit is not None else math.nan
        rl = res.return_levels.get(spec.return_period, math.nan)
        out[m] = (o.selected_index, xi, rl)
    return out, time.perf_counter() - t0


def _replicate_star(args):
    return _replicate(*args)


def run_benchmark(spec: ScenarioSpec, workers: int = 1) -> BenchmarkMetrics:
    """Run every replicate of a scenario and summarise selector behaviour."""
    jobs = [(spec, r) for r in range(spec.reps)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_replicate_star, jobs, chunksize=max(1, spec.reps // (4 * workers))))
    else:
        rows = [_replicate(*j) for j in jobs]

    p_true = 1.0 - 1.0 / (spec.return_period * spec.obs_per_year)
    rl_true = float(spec.parent.quantile(p_true)) if 0 < p_true < 1 else math.nan
    xi_true = spec.parent.tail_xi
    I = spec.n_candidates
    freqs, none, fail, bias, rmse, rlb = {}, {}, {}, {}, {}, {}
    for m in spec.methods:
        counts = np.zeros(I)
        n_none = n_fail = 0
        xis, rls = [], []
        for res, _ in rows:
            if res is None:
                n_fail += 1
                continue
            idx, xi, rl = res[m]
            if idx is None:
                n_none += 1
                continue
            counts[idx] += 1
            xis.append(xi)
            rls.append(rl)
        # failed replicates count as "none selected" so frequencies sum to one
        freqs[m] = (counts / spec.reps).tolist()
        none[m] = (n_none + n_fail) / spec.reps
        fail[m] = n_fail / spec.reps
        xis = np.array(xis)
        rls = np.array(rls)
        err = xis[np.isfinite(xis)] - xi_true
        bias[m] = float(np.mean(err)) if err.size else math.nan
        rmse[m] = float(np.sqrt(np.mean(err**2))) if err.size else math.nan
        rel = rls[np.isfinite(rls)] / rl_true - 1.0
        rlb[m] = float(np.mean(rel)) if rel.size and math.isfinite(rl_true) else math.nan
    runtime = float(np.mean([t for _, t in rows]))
    return BenchmarkMetrics(tuple(spec.methods), spec.reps, freqs, none, fail, bias, rmse, rlb, rl_true, runtime)


def load_scenario(path) -> ScenarioSpec:
    """Read a JSON scenario whose keys mirror :class:`ScenarioSpec` fields."""
    raw = json.loads(Path(path).read_text())
    parent = Parent(**raw.pop("parent", {}))
    if "methods" in raw:
        raw["methods"] = tuple(raw["methods"])
    unknown = set(raw) - set(ScenarioSpec.__dataclass_fields__)
    if unknown:
        raise DomainError(f"unknown scenario keys: {sorted(unknown)}")
    return ScenarioSpec(parent=parent, **raw)


def main(argv=None) -> int:
    import argparse

    ap = argparse.ArgumentParser(prog="lmthresh-bench", description="Monte Carlo benchmark of threshold selectors")
    ap.add_argument("scenario", help="JSON scenario file")
    ap.add_argument("--out", help="write metrics JSON here instead of stdout")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--timing", action="store_true", help="include mean runtime in the metrics")
    args = ap.parse_args(argv)
    try:
        spec = load_scenario(args.scenario)
    except (OSError, ValueError, TypeError) as exc:
        ap.exit(2, f"lmthresh-bench: error: {exc}\n")
    metrics = run_benchmark(spec, workers=args.workers)
    text = json.dumps(metrics.to_dict(args.timing), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text, end="")
    return 0
