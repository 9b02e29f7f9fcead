"""Survival predictive-performance metrics.

Kaplan-Meier estimation, Harrell / IPCW concordance, cumulative/dynamic
time-dependent ROC curves with inverse-probability-of-censoring weights, an
event-density-weighted integrated AUC, and model-based risk markers.
"""

from __future__ import annotations

import warnings as _warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import MetricError, SpecError
from .model import (
    ModelSpec,
    Theta,
    expected_survival_time,
    survival,
)

__all__ = [
    "StepSurvival",
    "RocCurve",
    "kaplan_meier",
    "concordance_index",
    "time_dependent_roc",
    "integrated_auc",
    "default_time_grid",
    "risk_marker",
    "risk_markers",
]


@dataclass(frozen=True, eq=False)
class StepSurvival:
    """Right-continuous step survival function.

    ``values[k]`` is the survival just after ``jump_times[k]``; the function
    is 1 before the first jump.
    """

    jump_times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        jt = np.asarray(self.jump_times, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if jt.shape != vals.shape or jt.ndim != 1:
            raise SpecError("jump_times and values must be equal-length vectors")
        if jt.size and (np.any(np.diff(jt) <= 0) or np.any(jt <= 0)):
            raise SpecError("jump_times must be positive and strictly increasing")
        if np.any(np.diff(vals) > 1e-15) or (vals.size and (vals[0] > 1.0 or vals[-1] < 0.0)):
            raise SpecError("values must be non-increasing within [0, 1]")
        object.__setattr__(self, "jump_times", jt)
        object.__setattr__(self, "values", vals)

    def evaluate(self, t) -> np.ndarray:
        """S(t), right-continuous."""
        idx = np.searchsorted(self.jump_times, np.asarray(t, dtype=float), side="right")
        padded = np.concatenate([[1.0], self.values])
        return padded[idx]

    def left_limit(self, t) -> np.ndarray:
        """S(t-), the value just before t."""
        idx = np.searchsorted(self.jump_times, np.asarray(t, dtype=float), side="left")
        padded = np.concatenate([[1.0], self.values])
        return padded[idx]


@dataclass(frozen=True, eq=False)
class RocCurve:
    """Time-dependent ROC curve at one horizon."""

    horizon: float
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float

    def __post_init__(self):
        fpr = np.asarray(self.fpr, dtype=float)
        tpr = np.asarray(self.tpr, dtype=float)
        if fpr.shape != tpr.shape:
            raise SpecError("fpr and tpr must have equal length")
        if np.any(np.diff(fpr) < -1e-12) or np.any(np.diff(tpr) < -1e-12):
            raise SpecError("ROC sweep must be monotone")
        area = float(np.trapezoid(tpr, fpr))
        if abs(area - self.auc) > 1e-10:
            raise SpecError("auc does not match the trapezoid area of the curve")
        object.__setattr__(self, "fpr", fpr)
        object.__setattr__(self, "tpr", tpr)


def kaplan_meier(times, status) -> StepSurvival:
    """Product-limit estimator.

    At a tied time all events are processed before censorings, i.e. subjects
    censored at t still count as at risk for events at t.
    """
    times = np.asarray(times, dtype=float)
    status = np.asarray(status)
    if times.ndim != 1 or times.size < 1:
        raise SpecError("kaplan_meier needs at least one observation")
    if status.shape != times.shape:
        raise SpecError("times and status must have equal length")
    order = np.argsort(times, kind="stable")
    t_sorted = times[order]
    d_sorted = status[order].astype(int)
    uniq, start = np.unique(t_sorted, return_index=True)
    n = times.size
    at_risk = n - start
    events = np.add.reduceat(d_sorted, start)
    keep = events > 0
    if not np.any(keep):
        return StepSurvival(np.empty(0), np.empty(0))
    factors = 1.0 - events[keep] / at_risk[keep]
    return StepSurvival(uniq[keep], np.cumprod(factors))


def concordance_index(risk, times, status, method: str = "harrell") -> float:
    """Concordance between risk scores and observed survival ordering.

    Higher risk must mean an earlier predicted event.  A pair is comparable
    when the earlier subject's event was observed and its time is strictly
    smaller; concordant pairs have the earlier subject riskier, and risk ties
    count one half.  ``method="ipcw"`` weights each comparable pair by the
    inverse squared censoring survival at the earlier time (Uno-style);
    with no censoring the two methods coincide.  Returns 0.5 (with a warning)
    when no pair is comparable.
    """
    risk = np.asarray(risk, dtype=float)
    times = np.asarray(times, dtype=float)
    status = np.asarray(status)
    if not (risk.shape == times.shape == status.shape) or risk.ndim != 1:
        raise SpecError("risk, times, and status must be equal-length vectors")
    if method not in ("harrell", "ipcw"):
        raise SpecError(f"unknown concordance method {method!r}")

    earlier = (status[:, None] == 1) & (times[:, None] < times[None, :])
    if method == "ipcw":
        censor_km = kaplan_meier(times, 1 - status)
        g = censor_km.left_limit(times)
        g = np.maximum(g, np.min(g[g > 0]) if np.any(g > 0) else 1.0)
        pair_weight = (1.0 / g**2)[:, None] * np.ones_like(times)[None, :]
    else:
        pair_weight = np.ones(earlier.shape)
    weights = np.where(earlier, pair_weight, 0.0)
    total = weights.sum()
    if total == 0.0:
        _warnings.warn("no comparable pairs; returning 0.5", stacklevel=2)
        return 0.5
    concordant = (risk[:, None] > risk[None, :]) * 1.0 + (
        risk[:, None] == risk[None, :]
    ) * 0.5
    return float((weights * concordant).sum() / total)


def time_dependent_roc(marker, times, status, horizon: float) -> RocCurve:
    """Cumulative/dynamic ROC at ``horizon`` with IPCW case weights.

    Cases are subjects with an observed event by the horizon; controls are
    subjects still at risk beyond it.  Subjects censored before the horizon
    carry no weight; the remaining case weights are inverse censoring
    survival at the event time, control weights inverse censoring survival at
    the horizon.  The sweep runs over the unique marker values, classifying
    ``marker >= cut`` as predicted positive, so tied markers trace diagonal
    segments and the trapezoid area equals the tie-corrected
    Mann-Whitney statistic.
    """
    marker = np.asarray(marker, dtype=float)
    times = np.asarray(times, dtype=float)
    status = np.asarray(status)
    if not (marker.shape == times.shape == status.shape):
        raise SpecError("marker, times, and status must be equal-length vectors")
    horizon = float(horizon)
    if not (times.min() <= horizon <= times.max()):
        raise MetricError(
            f"horizon {horizon} lies outside the observed time range "
            f"[{times.min():g}, {times.max():g}]"
        )
    case = (times <= horizon) & (status == 1)
    control = times > horizon
    if not case.any() or not control.any():
        raise MetricError(
            f"degenerate horizon {horizon}: "
            f"{int(case.sum())} cases, {int(control.sum())} controls"
        )

    censor_km = kaplan_meier(times, 1 - status)
    g_event = censor_km.left_limit(times)
    g_horizon = float(censor_km.evaluate(horizon))
    positive = np.concatenate([g_event[g_event > 0], [g_horizon] if g_horizon > 0 else []])
    floor = float(np.min(positive)) if positive.size else 1.0
    w_case = np.where(case, 1.0 / np.maximum(g_event, floor), 0.0)
    w_control = np.where(control, 1.0 / max(g_horizon, floor), 0.0)

    cuts = np.unique(marker)[::-1]
    fpr = [0.0]
    tpr = [0.0]
    case_total = w_case.sum()
    control_total = w_control.sum()
    for cut in cuts:
        positive_mask = marker >= cut
        tpr.append(float(w_case[positive_mask].sum() / case_total))
        fpr.append(float(w_control[positive_mask].sum() / control_total))
    fpr_arr = np.asarray(fpr)
    tpr_arr = np.asarray(tpr)
    auc = float(np.trapezoid(tpr_arr, fpr_arr))
    return RocCurve(horizon=horizon, fpr=fpr_arr, tpr=tpr_arr, auc=auc)


def default_time_grid(times, status, n_points: int = 9) -> np.ndarray:
    """Deciles of the observed event times between the 10th and 90th percentile."""
    times = np.asarray(times, dtype=float)
    status = np.asarray(status)
    event_times = times[status == 1]
    if event_times.size < 2:
        raise MetricError("need at least two event times to build a grid")
    grid = np.quantile(event_times, np.linspace(0.1, 0.9, n_points))
    return np.unique(grid)


def integrated_auc(
    marker_at: Callable[[float], np.ndarray],
    times,
    status,
    grid: Sequence[float] | None = None,
) -> float:
    """Event-density-weighted average of AUC(t) over a time grid.

    ``marker_at(t)`` must return the per-subject risk markers used at
    horizon t.  Weights are the Kaplan-Meier event-distribution increments
    accumulated between consecutive grid points, normalized to sum to one.
    Degenerate horizons are skipped with a warning; if every horizon is
    degenerate a :class:`MetricError` is raised.
    """
    times = np.asarray(times, dtype=float)
    status = np.asarray(status)
    grid_arr = (
        default_time_grid(times, status) if grid is None else np.asarray(grid, dtype=float)
    )
    if grid_arr.size < 2:
        raise MetricError("the iAUC grid needs at least two points")
    if np.any(np.diff(grid_arr) <= 0):
        raise SpecError("the iAUC grid must be strictly increasing")

    event_km = kaplan_meier(times, status)
    cdf = 1.0 - event_km.evaluate(grid_arr)
    previous = np.concatenate([[0.0], cdf[:-1]])
    increments = cdf - previous

    aucs = []
    weights = []
    for t_k, w_k in zip(grid_arr, increments):
        try:
            curve = time_dependent_roc(marker_at(float(t_k)), times, status, float(t_k))
        except MetricError as exc:
            _warnings.warn(f"skipping horizon {t_k:g}: {exc}", stacklevel=2)
            continue
        aucs.append(curve.auc)
        weights.append(w_k)
    if not aucs:
        raise MetricError("every horizon in the iAUC grid was degenerate")
    weights_arr = np.asarray(weights)
    if weights_arr.sum() <= 0:
        weights_arr = np.ones_like(weights_arr)
    weights_arr = weights_arr / weights_arr.sum()
    return float(weights_arr @ np.asarray(aucs))


def risk_marker(
    theta: Theta,
    spec: ModelSpec,
    x_row,
    mode: str = "neg_expected_time",
    horizon: float | None = None,
) -> float:
    """Scalar risk score from a fitted model; higher means riskier.

    ``neg_expected_time`` is minus the expected survival time;
    ``one_minus_survival`` is the failure probability by ``horizon``.
    """
    if mode == "neg_expected_time":
        return -expected_survival_time(theta, spec, x_row).estimate
    if mode == "one_minus_survival":
        if horizon is None:
            raise SpecError("mode 'one_minus_survival' needs a horizon")
        return 1.0 - survival(theta, spec, x_row, horizon)
    raise SpecError(f"unknown risk marker mode {mode!r}")


def risk_markers(
    theta: Theta,
    spec: ModelSpec,
    covariates,
    mode: str = "neg_expected_time",
    horizon: float | None = None,
) -> np.ndarray:
    """Vectorized :func:`risk_marker` over the rows of a covariate matrix."""
    covariates = np.atleast_2d(np.asarray(covariates, dtype=float))
    return np.array(
        [risk_marker(theta, spec, row, mode=mode, horizon=horizon) for row in covariates]
    )
