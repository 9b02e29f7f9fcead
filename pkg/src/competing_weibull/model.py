"""Competing (min-linear) Weibull accelerated failure time model.

The observed log time is the minimum of per-group linear predictors plus
Gumbel(minimum) noise: ``log T = min_l (alpha_l + x_l' beta_l + sigma_l eps_l)``.
Equivalently, T is the minimum of independent Weibull times with scale
``exp(mu_l)`` and shape ``1/sigma_l``.  This module holds the parameter and
data containers and the exact evaluation of the joint survival, hazard,
density, per-group winning probabilities, latent-time sampling, and expected
survival time with a Mill's-ratio tail bound.

All evaluation is done in log space (with group reductions applied in sorted
order, so results are invariant under group relabelling) and every function
here is a pure function of immutable inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate

from .errors import ConfigError, DomainError, SpecError

__all__ = [
    "GroupSpec",
    "ModelSpec",
    "GroupParams",
    "Theta",
    "Dataset",
    "QuadratureConfig",
    "ExpectedSurvivalTime",
    "group_log_scale",
    "log_scales",
    "survival",
    "log_survival",
    "hazard",
    "hazard_by_group",
    "density",
    "winning_probability",
    "sample_event",
    "sample_events",
    "expected_survival_time",
    "tail_integral_bounds",
    "auto_cutoff",
]

# Mean of the Gumbel(minimum) error is -EULER_GAMMA, its sd is pi/sqrt(6).
EULER_GAMMA = 0.5772156649015329


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=float, copy=True)
    out.setflags(write=False)
    return out


def _sorted_sum(values: np.ndarray) -> float:
    # Summing in sorted order makes group reductions independent of the
    # group labelling, which keeps fits bit-identical under relabelling.
    return float(np.sum(np.sort(values, kind="stable")))


def _sorted_rowsum(values: np.ndarray) -> np.ndarray:
    return np.sum(np.sort(values, axis=1, kind="stable"), axis=1)


def _sorted_logsumexp(logs: np.ndarray) -> float:
    m = float(np.max(logs))
    if not math.isfinite(m):
        return m
    return m + math.log(_sorted_sum(np.exp(logs - m)))


@dataclass(frozen=True)
class GroupSpec:
    """Covariate index set of one competing group (columns of the X matrix)."""

    covariate_indices: tuple[int, ...]

    def __init__(self, covariate_indices: Sequence[int]):
        idx = tuple(int(j) for j in covariate_indices)
        if any(j < 0 for j in idx):
            raise SpecError(f"covariate indices must be nonnegative, got {idx}")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise SpecError(
                f"covariate indices must be strictly increasing, got {idx}"
            )
        object.__setattr__(self, "covariate_indices", idx)

    @property
    def n_covariates(self) -> int:
        return len(self.covariate_indices)


@dataclass(frozen=True)
class ModelSpec:
    """Structural specification: number of groups and their covariate sets."""

    groups: tuple[GroupSpec, ...]
    p: int

    def __init__(self, groups: Sequence[GroupSpec], p: int):
        groups = tuple(groups)
        p = int(p)
        if len(groups) < 1:
            raise SpecError("a model needs at least one group")
        if p < 0:
            raise SpecError(f"covariate count must be nonnegative, got {p}")
        for g, group in enumerate(groups):
            if group.covariate_indices and group.covariate_indices[-1] >= p:
                raise SpecError(
                    f"group {g} uses covariate index "
                    f"{group.covariate_indices[-1]} but only p={p} columns exist"
                )
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "p", p)

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    def check_identifiable(self) -> None:
        """Reject duplicated covariate sets (allowed for evaluation, not fitting)."""
        seen: dict[tuple[int, ...], int] = {}
        for g, group in enumerate(self.groups):
            if group.covariate_indices in seen:
                raise SpecError(
                    f"groups {seen[group.covariate_indices]} and {g} have identical "
                    f"covariate sets {group.covariate_indices}; such models are "
                    "unidentifiable and cannot be fitted"
                )
            seen[group.covariate_indices] = g


@dataclass(frozen=True, eq=False)
class GroupParams:
    """Parameters of one group: intercept, coefficients, and noise scale.

    ``sigma`` is the Gumbel noise scale, i.e. the reciprocal of the Weibull
    shape of that group's latent time.
    """

    alpha: float
    beta: np.ndarray
    sigma: float

    def __init__(self, alpha: float, beta: Sequence[float], sigma: float):
        beta_arr = _readonly(np.atleast_1d(np.asarray(beta, dtype=float)))
        if beta_arr.ndim != 1:
            raise SpecError("beta must be a vector")
        sigma = float(sigma)
        if not (sigma > 0.0) or not math.isfinite(sigma):
            raise SpecError(f"sigma must be a positive finite real, got {sigma}")
        alpha = float(alpha)
        if not math.isfinite(alpha) or not np.all(np.isfinite(beta_arr)):
            raise SpecError("alpha and beta must be finite")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta_arr)
        object.__setattr__(self, "sigma", sigma)


@dataclass(frozen=True, eq=False)
class Theta:
    """Full parameter vector: one :class:`GroupParams` per group.

    The flattened layout is ``(alpha_1, beta_1..., sigma_1, alpha_2, ...)``.
    """

    groups: tuple[GroupParams, ...]

    def __init__(self, groups: Sequence[GroupParams]):
        object.__setattr__(self, "groups", tuple(groups))

    def validate_against(self, spec: ModelSpec) -> None:
        if len(self.groups) != spec.n_groups:
            raise SpecError(
                f"theta has {len(self.groups)} groups, spec has {spec.n_groups}"
            )
        for g, (params, group) in enumerate(zip(self.groups, spec.groups)):
            if params.beta.shape[0] != group.n_covariates:
                raise SpecError(
                    f"group {g}: beta has length {params.beta.shape[0]} but the "
                    f"covariate set has {group.n_covariates} entries"
                )

    @property
    def n_params(self) -> int:
        return sum(2 + g.beta.shape[0] for g in self.groups)

    def flatten(self) -> np.ndarray:
        parts = []
        for g in self.groups:
            parts.append([g.alpha])
            parts.append(g.beta)
            parts.append([g.sigma])
        return np.concatenate(parts)

    @staticmethod
    def from_flat(flat: Sequence[float], spec: ModelSpec) -> "Theta":
        flat = np.asarray(flat, dtype=float)
        expected = sum(2 + g.n_covariates for g in spec.groups)
        if flat.shape != (expected,):
            raise SpecError(
                f"flat parameter vector has shape {flat.shape}, expected ({expected},)"
            )
        groups = []
        pos = 0
        for group in spec.groups:
            k = group.n_covariates
            groups.append(
                GroupParams(flat[pos], flat[pos + 1 : pos + 1 + k], flat[pos + 1 + k])
            )
            pos += k + 2
        return Theta(groups)

    def with_group(self, index: int, params: GroupParams) -> "Theta":
        groups = list(self.groups)
        groups[index] = params
        return Theta(groups)


def parameter_names(spec: ModelSpec, covariate_names: Sequence[str] | None = None):
    """Labels for the flattened parameter vector, e.g. ``g1.beta[x3]``."""
    if covariate_names is None:
        covariate_names = [f"x{j + 1}" for j in range(spec.p)]
    names = []
    for g, group in enumerate(spec.groups, start=1):
        names.append(f"g{g}.alpha")
        names.extend(f"g{g}.beta[{covariate_names[j]}]" for j in group.covariate_indices)
        names.append(f"g{g}.sigma")
    return names


@dataclass(frozen=True, eq=False)
class Dataset:
    """Right-censored survival data: times, event indicators, covariates."""

    times: np.ndarray
    status: np.ndarray
    covariates: np.ndarray

    def __init__(self, times, status, covariates):
        times = _readonly(np.asarray(times, dtype=float))
        covariates = _readonly(np.atleast_2d(np.asarray(covariates, dtype=float)))
        status_arr = np.asarray(status)
        if times.ndim != 1 or times.shape[0] < 1:
            raise SpecError("times must be a nonempty vector")
        if not np.all(np.isfinite(times)) or not np.all(times > 0.0):
            raise SpecError("times must be strictly positive and finite")
        if status_arr.shape != times.shape:
            raise SpecError("status must have the same length as times")
        if not np.all(np.isin(status_arr, (0, 1))):
            raise SpecError("status entries must be 0 (censored) or 1 (event)")
        status_int = np.ascontiguousarray(status_arr, dtype=np.int8)
        status_int.setflags(write=False)
        if covariates.shape[0] != times.shape[0]:
            raise SpecError(
                f"covariate matrix has {covariates.shape[0]} rows for "
                f"{times.shape[0]} subjects"
            )
        if not np.all(np.isfinite(covariates)):
            raise SpecError("covariate matrix must be finite (no missing values)")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "status", status_int)
        object.__setattr__(self, "covariates", covariates)

    @property
    def n(self) -> int:
        return self.times.shape[0]

    @property
    def p(self) -> int:
        return self.covariates.shape[1]


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def group_log_scale(params: GroupParams, x_row, group: GroupSpec) -> float:
    """Linear predictor mu_l = alpha_l + x[A_l] . beta_l for one group."""
    x_row = np.asarray(x_row, dtype=float)
    if params.beta.shape[0] != group.n_covariates:
        raise SpecError(
            f"beta has length {params.beta.shape[0]} but the group selects "
            f"{group.n_covariates} covariates"
        )
    if group.covariate_indices and (x_row.ndim != 1 or x_row.shape[0] <= group.covariate_indices[-1]):
        raise SpecError("covariate row is too short for this group's index set")
    if not group.covariate_indices:
        return float(params.alpha)
    return float(params.alpha + x_row[list(group.covariate_indices)] @ params.beta)


def log_scales(theta: Theta, spec: ModelSpec, x_row) -> np.ndarray:
    """Vector of per-group linear predictors (mu_1, ..., mu_L)."""
    theta.validate_against(spec)
    return np.array(
        [group_log_scale(g, x_row, s) for g, s in zip(theta.groups, spec.groups)]
    )


def _sigmas(theta: Theta) -> np.ndarray:
    return np.array([g.sigma for g in theta.groups])


def _check_time(t: float, allow_zero: bool = False) -> float:
    t = float(t)
    if not math.isfinite(t):
        raise DomainError(f"time must be finite, got {t}")
    if t < 0.0 or (t == 0.0 and not allow_zero):
        raise DomainError(f"time must be positive, got {t}")
    return t


def _log_group_values(mu: np.ndarray, sigma: np.ndarray, t: float):
    """Per-group (log hazard, cumulative hazard) of the latent Weibull times."""
    log_t = math.log(t)
    z = (log_t - mu) / sigma
    with np.errstate(over="ignore"):
        cumhaz = np.exp(z)
    log_haz = z - log_t - np.log(sigma)
    return log_haz, cumhaz


def log_survival(theta: Theta, spec: ModelSpec, x_row, t: float) -> float:
    """log S(t | x); the per-group log survivals add up."""
    t = _check_time(t, allow_zero=True)
    if t == 0.0:
        return 0.0
    mu = log_scales(theta, spec, x_row)
    _, cumhaz = _log_group_values(mu, _sigmas(theta), t)
    return -_sorted_sum(cumhaz)


def survival(theta: Theta, spec: ModelSpec, x_row, t: float) -> float:
    """Joint survival S(t | x) = exp(-sum_l (t / exp(mu_l))^(1/sigma_l)).

    ``t = 0`` returns the right limit 1.0; negative times are a domain error.
    """
    return math.exp(log_survival(theta, spec, x_row, t))


def hazard_by_group(theta: Theta, spec: ModelSpec, x_row, t: float) -> np.ndarray:
    """Per-group hazards (h_1(t), ..., h_L(t)); the total hazard is their sum."""
    t = _check_time(t)
    mu = log_scales(theta, spec, x_row)
    log_haz, _ = _log_group_values(mu, _sigmas(theta), t)
    with np.errstate(over="ignore"):
        return np.exp(log_haz)


def hazard(theta: Theta, spec: ModelSpec, x_row, t: float) -> float:
    """Total hazard h(t | x) = sum_l h_l(t | x)."""
    t = _check_time(t)
    mu = log_scales(theta, spec, x_row)
    log_haz, _ = _log_group_values(mu, _sigmas(theta), t)
    return math.exp(_sorted_logsumexp(log_haz))


def density(theta: Theta, spec: ModelSpec, x_row, t: float) -> float:
    """Density f(t | x) = S(t | x) h(t | x)."""
    t = _check_time(t)
    mu = log_scales(theta, spec, x_row)
    log_haz, cumhaz = _log_group_values(mu, _sigmas(theta), t)
    return math.exp(_sorted_logsumexp(log_haz) - _sorted_sum(cumhaz))


def winning_probability(theta: Theta, spec: ModelSpec, x_row, t: float) -> np.ndarray:
    """Probability that each group produced an event at time t.

    This is the hazard share ``h_l(t) / h(t)``, equal to the ratio of the
    joint density of (event time, cause l) to the marginal density.
    Components are positive and sum to one.
    """
    t = _check_time(t)
    mu = log_scales(theta, spec, x_row)
    log_haz, _ = _log_group_values(mu, _sigmas(theta), t)
    shifted = log_haz - np.max(log_haz)
    num = np.exp(shifted)
    return num / _sorted_sum(num)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def sample_events(
    theta: Theta, spec: ModelSpec, covariates, rng: np.random.Generator
):
    """Draw (event time, winning group) for each covariate row.

    Each group's latent time is drawn by inverting the Gumbel(minimum) error:
    ``eps = log(-log(1 - U))`` with U uniform on (0, 1), then
    ``T_l = exp(mu_l + sigma_l * eps_l)``; the event is the smallest latent
    time and the cause its argmin.  Fully deterministic given the generator
    state.
    """
    theta.validate_against(spec)
    covariates = np.atleast_2d(np.asarray(covariates, dtype=float))
    n = covariates.shape[0]
    L = spec.n_groups
    sigma = _sigmas(theta)
    mu = np.empty((n, L))
    for l, (params, group) in enumerate(zip(theta.groups, spec.groups)):
        if group.covariate_indices:
            mu[:, l] = params.alpha + covariates[:, list(group.covariate_indices)] @ params.beta
        else:
            mu[:, l] = params.alpha
    u = rng.random((n, L))
    # Guard the open-interval requirement: u == 0 would give eps = -inf.
    u = np.maximum(u, np.finfo(float).tiny)
    eps = np.log(-np.log1p(-u))
    log_latent = mu + sigma[None, :] * eps
    causes = np.argmin(log_latent, axis=1)
    times = np.exp(log_latent[np.arange(n), causes])
    return times, causes.astype(np.int64)


def sample_event(theta: Theta, spec: ModelSpec, x_row, rng: np.random.Generator):
    """Single-subject version of :func:`sample_events`."""
    times, causes = sample_events(theta, spec, np.atleast_2d(x_row), rng)
    return float(times[0]), int(causes[0])


# ---------------------------------------------------------------------------
# Expected survival time
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadratureConfig:
    """Controls the finite integral and the automatic cutoff selection."""

    abs_tol: float = 1e-8
    rel_tol: float = 1e-8
    max_subdivisions: int = 200
    cutoff_survival: float = 1e-6

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ConfigError("quadrature tolerances must be positive")
        if not (0.0 < self.cutoff_survival < 0.5):
            raise ConfigError("cutoff_survival must lie in (0, 0.5)")


@dataclass(frozen=True)
class ExpectedSurvivalTime:
    """Expected survival time split into finite and tail parts.

    ``estimate = finite_part + tail_part`` where the tail term
    ``S(cutoff) / h(cutoff)`` always lies inside
    ``[tail_lower, tail_upper]``, the Mill's-ratio sandwich for the exact
    tail integral.
    """

    estimate: float
    tail_lower: float
    tail_upper: float
    cutoff: float
    finite_part: float
    tail_part: float


def _log_survival_mu(mu: np.ndarray, sigma: np.ndarray, t: float) -> float:
    log_t = math.log(t)
    with np.errstate(over="ignore"):
        return -_sorted_sum(np.exp((log_t - mu) / sigma))


def _auto_cutoff_mu(mu: np.ndarray, sigma: np.ndarray, tail_survival: float) -> float:
    target = math.log(tail_survival)
    hi = 1.0
    for _ in range(200):
        if _log_survival_mu(mu, sigma, hi) <= target:
            break
        hi *= 2.0
    else:
        raise ConfigError("could not bracket the survival cutoff")
    lo = hi / 2.0 if hi > 1.0 else 0.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _log_survival_mu(mu, sigma, mid) <= target:
            hi = mid
        else:
            lo = mid
    # the log-space bisection can leave S(hi) a few ulps above the target
    while math.exp(_log_survival_mu(mu, sigma, hi)) > tail_survival:
        hi = math.nextafter(hi, math.inf)
    return hi


def auto_cutoff(
    theta: Theta, spec: ModelSpec, x_row, tail_survival: float = 1e-6
) -> float:
    """Smallest time at which the joint survival drops to ``tail_survival``."""
    if not (0.0 < tail_survival < 1.0):
        raise ConfigError("tail_survival must lie in (0, 1)")
    return _auto_cutoff_mu(log_scales(theta, spec, x_row), _sigmas(theta), tail_survival)


def _tail_bounds_mu(mu: np.ndarray, sigma: np.ndarray, cutoff: float):
    s = math.exp(_log_survival_mu(mu, sigma, cutoff))
    if not s < 0.5:
        raise ConfigError(
            f"cutoff {cutoff} violates S(cutoff) < 0.5 (got S = {s}); "
            "increase the cutoff"
        )
    log_haz, _ = _log_group_values(mu, sigma, cutoff)
    h = math.exp(_sorted_logsumexp(log_haz))
    mass = cutoff * h
    if not mass > 1.0:
        raise ConfigError(
            f"cutoff {cutoff} violates cutoff * h(cutoff) > 1 (got {mass}); "
            "the tail bounds are not well-defined"
        )
    point = s / h
    sigma_min = float(np.min(sigma))
    lower = point * (1.0 - (1.0 / sigma_min) / mass)
    upper = point * (1.0 + 1.0 / (mass - 1.0))
    return lower, point, upper


def tail_integral_bounds(theta: Theta, spec: ModelSpec, x_row, cutoff: float):
    """Mill's-ratio sandwich for the tail integral of S beyond ``cutoff``.

    Returns ``(lower, point, upper)`` where ``point = S(cutoff)/h(cutoff)`` is
    the tail approximation and the exact integral of S over
    ``[cutoff, infinity)`` lies between the bounds.  Requires
    ``S(cutoff) < 0.5`` and ``cutoff * h(cutoff) > 1``.
    """
    cutoff = _check_time(cutoff)
    return _tail_bounds_mu(log_scales(theta, spec, x_row), _sigmas(theta), cutoff)


def _expected_time_mu(
    mu: np.ndarray,
    sigma: np.ndarray,
    cutoff: float | None,
    quadrature: QuadratureConfig,
) -> ExpectedSurvivalTime:
    if cutoff is None:
        cutoff = _auto_cutoff_mu(mu, sigma, quadrature.cutoff_survival)
    else:
        cutoff = _check_time(cutoff)
    lower, point, upper = _tail_bounds_mu(mu, sigma, cutoff)
    inv_sigma = 1.0 / sigma
    scale = np.exp(-mu * inv_sigma)

    def integrand(t: float) -> float:
        with np.errstate(over="ignore"):
            return math.exp(-float(np.sum(np.sort(scale * t**inv_sigma))))

    finite, _ = integrate.quad(
        integrand,
        0.0,
        cutoff,
        epsabs=quadrature.abs_tol,
        epsrel=quadrature.rel_tol,
        limit=quadrature.max_subdivisions,
    )
    return ExpectedSurvivalTime(
        estimate=finite + point,
        tail_lower=lower,
        tail_upper=upper,
        cutoff=float(cutoff),
        finite_part=finite,
        tail_part=point,
    )


def expected_survival_time(
    theta: Theta,
    spec: ModelSpec,
    x_row,
    cutoff: float | None = None,
    quadrature: QuadratureConfig | None = None,
) -> ExpectedSurvivalTime:
    """Expected survival time E[T | x] = integral of S(t | x) over t > 0.

    The integral over ``[0, cutoff]`` is evaluated by adaptive
    Gauss-Kronrod quadrature; the remainder is approximated by
    ``S(cutoff) / h(cutoff)`` and bracketed by the Mill's-ratio bounds.
    When ``cutoff`` is omitted it is chosen automatically as the smallest
    time with ``S(t) < quadrature.cutoff_survival``.
    """
    quadrature = quadrature or QuadratureConfig()
    mu = log_scales(theta, spec, x_row)
    return _expected_time_mu(mu, _sigmas(theta), cutoff, quadrature)
