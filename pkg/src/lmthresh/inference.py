"""Return levels and the end-to-end POT analysis."""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .distributions import GpdParams, RandomStream, gpd_fit_pwm
from .errors import DomainError, LmomError
from .lmoments import as_sample
from .selectors import (
    CandidateGrid,
    SelectionOutcome,
    alcbsm_select,
    algfsm_select,
    build_grid,
    excesses,
)

__all__ = ["PotConfig", "MethodResult", "PotReport", "return_level", "analyze", "METHODS"]

METHODS = ("alcbsm", "algfsm")
XI_ZERO_TOL = 1e-9


@dataclass(frozen=True)
class PotConfig:
    n_candidates: int = 10
    p_start: float | None = None
    p_end: float | None = None
    methods: tuple[str, ...] = METHODS
    alpha_cb: float = 0.05
    alpha_gof: float = 0.1
    n_sim: int = 500
    seed: int = 0
    return_periods: tuple[float, ...] = (100.0, 10000.0)
    obs_per_year: float = 1.0
    workers: int = 1

    def __post_init__(self):
        if not self.obs_per_year > 0:
            raise DomainError("obs_per_year must be positive")
        if any(not t >= 1 for t in self.return_periods):
            raise DomainError("return periods must be at least one year")
        bad = set(self.methods) - set(METHODS)
        if bad or not self.methods:
            raise DomainError(f"unknown methods {sorted(bad)}; choose from {METHODS}")
        if self.n_sim < 2:
            raise DomainError("n_sim must be at least 2")


def return_level(u_star: float, params: GpdParams, zeta: float, obs_per_year: float, period: float) -> float:
    """Level exceeded on average once every ``period`` years.

    ``zeta`` is the fraction of observations above ``u_star`` and
    ``obs_per_year`` the mean number of observations per year.
    """
    if not 0 < zeta <= 1:
        raise DomainError("exceedance rate must be in (0, 1]")
    m = period * obs_per_year * zeta
    if not m > 1:
        raise DomainError(f"period * obs_per_year * zeta = {m:.4g} <= 1; level would sit below threshold")
    sigma, xi = params.sigma, params.xi
    lm = math.log(m)
    if abs(xi) < XI_ZERO_TOL:
        return u_star + sigma * lm
    return u_star + sigma * math.expm1(xi * lm) / xi


@dataclass
class MethodResult:
    outcome: SelectionOutcome
    fit: GpdParams | None = None
    zeta: float | None = None
    return_levels: dict[float, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)


@dataclass
class PotReport:
    n: int
    grid: CandidateGrid
    config: PotConfig
    results: dict[str, MethodResult]
    elapsed_seconds: float = math.nan

    @property
    def any_unselected(self) -> bool:
        return any(not r.outcome.selected for r in self.results.values())


def _run_method(name: str, s, grid: CandidateGrid, config: PotConfig) -> SelectionOutcome:
    if name == "alcbsm":
        return alcbsm_select(s, grid, config.alpha_cb)
    return algfsm_select(
        s, grid, config.alpha_gof, config.n_sim, RandomStream(config.seed), workers=config.workers
    )


def _post_selection(outcome: SelectionOutcome, s, config: PotConfig) -> MethodResult:
    res = MethodResult(outcome)
    if not outcome.selected:
        res.warnings.append("no threshold selected")
        return res
    try:
        fit = gpd_fit_pwm(excesses(s, outcome.u_star))
    except LmomError as exc:
        res.warnings.append(f"GPd fit failed at selected level: {exc}")
        return res
    res.fit = fit
    if not fit.valid:
        res.warnings.append(f"asymptotics-invalid: xi_hat = {fit.xi:.4g} outside (-0.5, 0.5)")
    res.zeta = outcome.n_star / s.n
    for period in config.return_periods:
        try:
            res.return_levels[period] = return_level(
                outcome.u_star, fit, res.zeta, config.obs_per_year, period
            )
        except DomainError as exc:
            res.warnings.append(f"RL{period:g}: {exc}")
    return res


def analyze(sample, config: PotConfig | None = None) -> PotReport:
    """Build the grid, run the configured selectors and estimate return levels.

    A method that selects nothing is reported as such rather than raising.
    """
    config = config or PotConfig()
    t0 = time.perf_counter()
    s = as_sample(sample)
    grid = build_grid(s, config.n_candidates, config.p_start, config.p_end)
    if config.workers > 1 and len(config.methods) > 1:
        with ThreadPoolExecutor(max_workers=len(config.methods)) as pool:
            outs = list(pool.map(lambda m: _run_method(m, s, grid, config), config.methods))
    else:
        outs = [_run_method(m, s, grid, config) for m in config.methods]
    results = {m: _post_selection(o, s, config) for m, o in zip(config.methods, outs)}
    return PotReport(s.n, grid, config, results, time.perf_counter() - t0)

