"""Candidate threshold grids and the two automatic selectors.

``alcbsm_select`` accepts the lowest candidate whose excess ratio pair falls in
both conditional confidence bands around the GPd curve. ``algfsm_select``
scores every candidate with a Kappa-simulated goodness-of-fit statistic and
applies the ForwardStop rule to the ordered p-values.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import (
    ConfidenceBand,
    ci_tau3_given_t4,
    ci_tau4_given_t3,
    lmom_acov,
    pwm_acov,
    ratio_acov,
)
from .distributions import (
    KappaParams,
    RandomStream,
    gpd_fit_pwm,
    kappa_fit_lmom,
    kappa_sample,
    std_normal_cdf,
)
from .errors import DomainError, GridError, LmomError
from .lmoments import ObservationSample, as_sample, gpd_g, gpd_g_inv, l_ratios_rows, l_statistics

log = logging.getLogger(__name__)

__all__ = [
    "CandidateGrid",
    "CandidateDiagnostic",
    "SelectionOutcome",
    "GRID_PRESETS",
    "build_grid",
    "excesses",
    "alcbsm_select",
    "gof_z_statistic",
    "gof_pvalue",
    "forward_stop",
    "algfsm_select",
]

ACCEPTED = "accepted"
REJECTED = "rejected"
INDETERMINATE = "indeterminate"

# (p_start, p_end) by number of candidates
GRID_PRESETS = {10: (0.25, 0.925), 20: (0.25, 0.95)}
MIN_EXCESSES = 4


@dataclass(frozen=True)
class CandidateGrid:
    probabilities: np.ndarray
    thresholds: np.ndarray
    exceedance_counts: np.ndarray

    def __len__(self) -> int:
        return len(self.thresholds)


@dataclass
class CandidateDiagnostic:
    index: int
    u: float
    n_u: int
    t3: float = math.nan
    t4: float = math.nan
    xi_hat: float = math.nan
    band_tau4: ConfidenceBand | None = None
    band_tau3: ConfidenceBand | None = None
    z: float = math.nan
    p: float = math.nan
    fs: float = math.nan
    status: str = INDETERMINATE
    warnings: list[str] = field(default_factory=list)


@dataclass
class SelectionOutcome:
    method: str
    selected_index: int | None
    u_star: float | None
    n_star: int | None
    diagnostics: list[CandidateDiagnostic]
    alpha: float = math.nan

    @property
    def selected(self) -> bool:
        return self.selected_index is not None


def build_grid(
    sample,
    n_candidates: int = 10,
    p_start: float | None = None,
    p_end: float | None = None,
) -> CandidateGrid:
    """Equal-step sample-quantile candidates.

    Candidate ``k`` uses probability ``p_k`` and threshold ``x_{ceil(n p_k):n}``;
    its excesses are the observations strictly above the threshold. When the
    endpoints are omitted the presets for 10 or 20 candidates are used.
    """
    s = as_sample(sample)
    if n_candidates < 2:
        raise GridError("need at least two candidate thresholds")
    if p_start is None or p_end is None:
        preset = GRID_PRESETS.get(n_candidates, (0.25, 0.95))
        p_start = preset[0] if p_start is None else p_start
        p_end = preset[1] if p_end is None else p_end
    if not 0 < p_start < p_end < 1:
        raise GridError(f"need 0 < p_start < p_end < 1, got ({p_start}, {p_end})")
    probs = np.linspace(p_start, p_end, n_candidates)
    # guard against n*p landing a hair above an integer through rounding
    ranks = np.maximum(np.ceil(s.n * probs - 1e-9).astype(int), 1)
    thresholds = s.values[ranks - 1]
    counts = s.n - np.searchsorted(s.values, thresholds, side="right")
    if counts[-1] < MIN_EXCESSES:
        raise GridError(
            f"only {counts[-1]} observations exceed the last candidate "
            f"(p = {p_end:g}); need at least {MIN_EXCESSES}"
        )
    return CandidateGrid(probs, thresholds, counts)


def excesses(sample, u: float) -> ObservationSample:
    s = as_sample(sample)
    return ObservationSample(s.values[s.values > u] - u)


def _band_diagnostic(exc: ObservationSample, diag: CandidateDiagnostic, alpha: float) -> None:
    ls = l_statistics(exc)
    diag.t3, diag.t4 = ls.t3, ls.t4
    fit = gpd_fit_pwm(exc)
    diag.xi_hat = fit.xi
    if not fit.valid:
        diag.warnings.append(f"asymptotics-invalid: xi_hat = {fit.xi:.4g} outside (-0.5, 0.5)")
    Lam = lmom_acov(pwm_acov(fit))
    rc4 = ratio_acov(Lam, ls.l2, ls.t3, gpd_g(ls.t3))
    diag.band_tau4 = ci_tau4_given_t3(ls.t3, exc.n, alpha, rc4)
    rc3 = ratio_acov(Lam, ls.l2, gpd_g_inv(ls.t4) if ls.t4 > 0 else math.nan, ls.t4)
    diag.band_tau3 = ci_tau3_given_t4(ls.t4, exc.n, alpha, rc3)


def alcbsm_select(sample, grid: CandidateGrid, alpha: float = 0.05) -> SelectionOutcome:
    """Lowest candidate whose (t3, t4) lies inside both GPd confidence bands.

    Every candidate is evaluated so the diagnostics form a full trace; the
    selection is the first ``accepted`` one. Candidates whose bands cannot be
    built (non-positive t4, shape estimate with infinite variance, degenerate
    excesses) are ``indeterminate`` and count as failures.
    """
    if not 0 < alpha < 0.5:
        raise DomainError("alpha must be in (0, 0.5)")
    s = as_sample(sample)
    diags = []
    for i, (u, n_u) in enumerate(zip(grid.thresholds, grid.exceedance_counts)):
        diag = CandidateDiagnostic(i + 1, float(u), int(n_u))
        try:
            _band_diagnostic(excesses(s, u), diag, alpha)
        except LmomError as exc:
            diag.status = INDETERMINATE
            diag.warnings.append(f"indeterminate: {exc}")
        else:
            ok = diag.band_tau4.contains(diag.t4) and diag.band_tau3.contains(diag.t3)
            diag.status = ACCEPTED if ok else REJECTED
        diags.append(diag)
    chosen = next((d for d in diags if d.status == ACCEPTED), None)
    return _outcome("alcbsm", chosen, diags, alpha)


def _outcome(method, chosen, diags, alpha):
    if chosen is None:
        return SelectionOutcome(method, None, None, None, diags, alpha)
    return SelectionOutcome(method, chosen.index - 1, chosen.u, chosen.n_u, diags, alpha)


@dataclass(frozen=True)
class GofResult:
    z: float
    kappa: KappaParams
    bias: float
    sd: float
    t3: float
    t4: float


def gof_z_statistic(exc, n_sim: int, stream: RandomStream) -> GofResult:
    """GPd goodness-of-fit measure for one excess sample.

    Fits a Kappa distribution to the sample L-moments, simulates ``n_sim``
    samples of the same size from it, and standardises the gap between the
    GPd-implied L-kurtosis ``g(t3)`` and the observed ``t4`` using the
    simulated bias and spread of ``t4``.
    """
    exc = as_sample(exc)
    if n_sim < 2:
        raise DomainError("need at least two simulated samples")
    ls = l_statistics(exc)
    kappa = kappa_fit_lmom(ls.l1, ls.l2, ls.t3, ls.t4)
    sims = kappa_sample(kappa, exc.n, stream, size=n_sim)
    _, t4_sim = l_ratios_rows(sims, presorted=True)
    if not np.all(np.isfinite(t4_sim)):
        raise DomainError("simulated sample with zero L-scale")
    bias = float(np.mean(t4_sim)) - ls.t4
    ss = float(np.sum((t4_sim - ls.t4) ** 2)) - n_sim * bias * bias
    sd = math.sqrt(max(ss, 0.0) / (n_sim - 1))
    if not sd > 0:
        raise DomainError("simulated L-kurtosis has zero spread")
    z = (gpd_g(ls.t3) - ls.t4 + bias) / sd
    return GofResult(z, kappa, bias, sd, ls.t3, ls.t4)


def gof_pvalue(z):
    """Two-sided normal p-value ``2 - 2 Phi(|z|)``."""
    z = np.abs(np.asarray(z, dtype=float))
    # 2 Phi(-|z|) equals 2 - 2 Phi(|z|) without cancellation in the tail
    out = 2.0 * std_normal_cdf(-z)
    return float(out) if np.ndim(out) == 0 else out


def forward_stop(pvalues, alpha: float) -> tuple[int, np.ndarray]:
    """ForwardStop cutoff for ordered hypotheses.

    Returns ``(k_hat, fs)`` where ``fs[k-1] = -(1/k) sum_{i<=k} log(1 - p_i)``
    and ``k_hat`` is the largest ``k`` with ``fs[k-1] <= alpha`` (0 if none).
    A p-value of exactly 1 contributes an infinite term.
    """
    p = np.asarray(pvalues, dtype=float)
    if p.ndim != 1:
        raise DomainError("p-values must be a flat sequence")
    if np.any((p < 0) | (p > 1) | np.isnan(p)):
        raise DomainError("p-values must lie in [0, 1]")
    with np.errstate(divide="ignore"):
        fs = np.cumsum(-np.log1p(-p)) / np.arange(1, p.size + 1)
    hits = np.flatnonzero(fs <= alpha)
    k_hat = int(hits[-1] + 1) if hits.size else 0
    return k_hat, fs


def _gof_candidate(s, i, u, n_u, n_sim, stream):
    diag = CandidateDiagnostic(i + 1, float(u), int(n_u))
    try:
        res = gof_z_statistic(excesses(s, u), n_sim, stream.spawn(i))
    except LmomError as exc:
        diag.p = 0.0
        diag.status = INDETERMINATE
        diag.warnings.append(f"indeterminate (p set to 0): {exc}")
        try:
            ls = l_statistics(excesses(s, u))
            diag.t3, diag.t4 = ls.t3, ls.t4
        except LmomError:
            pass
    else:
        diag.t3, diag.t4, diag.z = res.t3, res.t4, res.z
        diag.p = gof_pvalue(res.z)
        diag.status = ACCEPTED
    return diag


def algfsm_select(
    sample,
    grid: CandidateGrid,
    alpha: float = 0.1,
    n_sim: int = 500,
    stream: RandomStream | None = None,
    workers: int = 1,
) -> SelectionOutcome:
    """Goodness-of-fit selection with ForwardStop.

    Candidate ``i`` (1-based) simulates on ``stream.spawn(i - 1)``, so results
    do not depend on ``workers``. The selected level is the one right after
    the ForwardStop cutoff; nothing is selected when every hypothesis is
    rejected. Candidates whose Kappa fit fails get ``p = 0``.
    """
    if not 0 < alpha < 1:
        raise DomainError("alpha must be in (0, 1)")
    s = as_sample(sample)
    stream = stream or RandomStream(0)
    args = [(s, i, u, n_u, n_sim, stream) for i, (u, n_u) in
            enumerate(zip(grid.thresholds, grid.exceedance_counts))]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            diags = list(pool.map(lambda a: _gof_candidate(*a), args))
    else:
        diags = [_gof_candidate(*a) for a in args]
    k_hat, fs = forward_stop([d.p for d in diags], alpha)
    for k, d in enumerate(diags):
        d.fs = float(fs[k])
        if d.status != INDETERMINATE:
            d.status = REJECTED if k < k_hat else ACCEPTED
    chosen = diags[k_hat] if k_hat < len(diags) else None
    if chosen is not None and chosen.status == INDETERMINATE:
        log.warning("ALGFSM selected candidate %d whose Kappa fit failed", chosen.index)
    return _outcome("algfsm", chosen, diags, alpha)
