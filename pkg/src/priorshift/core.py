"""Likelihood recovery from posteriors and priors, and the Bayes update.

Given a classifier's posterior vector ``p`` for one example and the class
priors ``pi`` it was trained under, the class likelihoods (up to scale) are
the null vector of

    M[i, i] = (p[i] - 1) * pi[i]
    M[i, j] = p[i] * pi[j]          (j != i)

``A = M + I`` is strictly positive with unit column sums, so its Perron
vector exists, is positive, and has eigenvalue exactly one. Re-weighting the
recovered likelihoods with new priors yields the adapted posteriors.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import linalg
from .linalg import DimensionError

__all__ = [
    "DEFAULT_EPS",
    "RESIDUAL_TOL",
    "SIMPLEX_INPUT_TOL",
    "SimplexError",
    "DimensionError",
    "ConvergenceError",
    "ProbabilityVector",
    "LikelihoodVector",
    "AdaptationMatrix",
    "SolveReport",
    "SolverConfig",
    "clamp_eps",
    "build_m_matrix",
    "build_a_matrix",
    "recover_likelihoods",
    "closed_form_likelihoods",
    "update_posteriors",
    "adapt",
    "adapt_batch",
    "map_class",
]

DEFAULT_EPS = 1e-12
RESIDUAL_TOL = 1e-10
# Raw inputs must already be on the simplex up to this slack; clamping and
# renormalization then make them exact.
SIMPLEX_INPUT_TOL = 1e-6


class SimplexError(ValueError):
    """Input is not a usable probability vector."""


class ConvergenceError(RuntimeError):
    """The eigenvector solve stopped at its iteration cap."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


def clamp_eps():
    """Clamping floor, overridable through ``PRIORSHIFT_EPS``."""
    raw = os.environ.get("PRIORSHIFT_EPS")
    if raw is None or raw.strip() == "":
        return DEFAULT_EPS
    try:
        eps = float(raw)
    except ValueError:
        raise ValueError(f"PRIORSHIFT_EPS must be a number, got {raw!r}") from None
    if not 0 < eps < 0.5:
        raise ValueError(f"PRIORSHIFT_EPS must lie in (0, 0.5), got {eps!r}")
    return eps


def _frozen(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ProbabilityVector:
    """A strictly positive point on the probability simplex.

    Elements are clamped to at least ``eps`` and renormalized, so exact zeros
    and ones from real classifiers are accepted. Anything negative,
    non-finite, or not summing to one (within ``SIMPLEX_INPUT_TOL``) is
    rejected.
    """

    values: np.ndarray
    eps: float | None = field(default=None, repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.shape[0] < 2:
            raise SimplexError(f"need a 1-D vector with at least 2 classes, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise SimplexError("probabilities must be finite")
        if np.any(v < 0):
            raise SimplexError("probabilities must be nonnegative")
        total = v.sum()
        if abs(total - 1.0) > SIMPLEX_INPUT_TOL:
            raise SimplexError(f"probabilities sum to {total!r}, not 1")
        eps = clamp_eps() if self.eps is None else float(self.eps)
        v = np.maximum(v, eps)
        object.__setattr__(self, "values", _frozen(v / v.sum()))
        object.__setattr__(self, "eps", eps)

    @classmethod
    def from_counts(cls, counts, eps=None):
        """Priors from raw class frequencies."""
        c = np.asarray(counts, dtype=np.float64)
        if c.ndim != 1 or not np.all(np.isfinite(c)) or np.any(c < 0) or c.sum() <= 0:
            raise SimplexError("counts must be finite, nonnegative and not all zero")
        return cls(c / c.sum(), eps=eps)

    @classmethod
    def coerce(cls, obj):
        return obj if isinstance(obj, cls) else cls(obj)

    @property
    def n(self):
        return self.values.shape[0]

    def __len__(self):
        return self.n

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


@dataclass(frozen=True, eq=False)
class LikelihoodVector:
    """Class likelihoods up to a positive scale, stored L1-normalized."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise ValueError("likelihoods must be a finite, strictly positive 1-D vector")
        object.__setattr__(self, "values", _frozen(v / v.sum()))

    @property
    def n(self):
        return self.values.shape[0]

    def __len__(self):
        return self.n

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


@dataclass(frozen=True, eq=False)
class AdaptationMatrix:
    """``A = M + I``: strictly positive with unit column sums."""

    entries: np.ndarray

    @property
    def n(self):
        return self.entries.shape[0]

    @property
    def generator(self):
        """``M = A - I``."""
        return self.entries - np.eye(self.n)

    def column_sums(self):
        # fsum so the check measures the matrix, not the summation order
        return np.array([math.fsum(col) for col in self.entries.T])

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


@dataclass(frozen=True)
class SolveReport:
    likelihoods: LikelihoodVector
    iterations: int
    residual_inf: float
    converged: bool


@dataclass(frozen=True)
class SolverConfig:
    """Solver settings.

    ``method`` picks the production path for :func:`adapt`: ``"ratio"`` uses
    the closed form, ``"eigen"`` the Perron-vector solve. ``solver`` picks how
    the Perron vector is found: ``"shifted"`` iterates the inverse of
    ``delta*I - M`` with ``delta = shift_fraction * min(priors)``, ``"plain"``
    iterates ``A`` itself.
    """

    tol: float = 1e-13
    max_iter: int = 10_000
    method: Literal["ratio", "eigen"] = "ratio"
    solver: Literal["shifted", "plain"] = "shifted"
    shift_fraction: float = 1e-3

    def __post_init__(self):
        if self.method not in ("ratio", "eigen"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.solver not in ("shifted", "plain"):
            raise ValueError(f"unknown solver {self.solver!r}")
        if not self.tol > 0 or self.max_iter < 1:
            raise ValueError("tol must be positive and max_iter at least 1")


def _pair(posteriors, priors):
    p = ProbabilityVector.coerce(posteriors)
    q = ProbabilityVector.coerce(priors)
    if p.n != q.n:
        raise DimensionError(f"posteriors have {p.n} classes but priors have {q.n}")
    return p, q


def build_m_matrix(posteriors, priors):
    """The homogeneous system whose null vector is the likelihood vector."""
    p, q = _pair(posteriors, priors)
    pv, qv = p.values, q.values
    m = np.outer(pv, qv)
    m[np.diag_indices(p.n)] = (pv - 1.0) * qv
    return m


def build_a_matrix(posteriors, priors):
    p, q = _pair(posteriors, priors)
    pv, qv = p.values, q.values
    a = np.outer(pv, qv)
    # 1 + (p_i - 1) pi_i, written to keep the diagonal away from cancellation
    a[np.diag_indices(p.n)] = 1.0 - (1.0 - pv) * qv
    return AdaptationMatrix(_frozen(a))


def closed_form_likelihoods(posteriors, priors):
    """L1-normalized posterior/prior ratios."""
    p, q = _pair(posteriors, priors)
    return LikelihoodVector(p.values / q.values)


def recover_likelihoods(posteriors, priors, cfg=None):
    """Perron vector of the adaptation matrix, with diagnostics.

    Non-convergence is reported through ``SolveReport.converged`` rather than
    raised; :func:`adapt` turns it into :class:`ConvergenceError`.
    """
    cfg = cfg or SolverConfig()
    p, q = _pair(posteriors, priors)
    m = build_m_matrix(p, q)
    if cfg.solver == "shifted":
        delta = cfg.shift_fraction * q.values.min()
        x, iterations, converged = linalg.shifted_power_iteration(
            m, delta, tol=cfg.tol, max_iter=cfg.max_iter
        )
    else:
        a = build_a_matrix(p, q)
        x, iterations, converged = linalg.power_iteration(
            a.entries, tol=cfg.tol, max_iter=cfg.max_iter
        )
    residual = float(np.abs(m @ x).max())
    converged = bool(converged and residual <= RESIDUAL_TOL and np.all(x > 0))
    if np.all(x > 0):
        likelihoods = LikelihoodVector(x)
    else:
        # only reachable on a failed solve; keep the report well-formed
        likelihoods = LikelihoodVector(np.maximum(x, np.finfo(float).tiny))
    return SolveReport(likelihoods, iterations, residual, converged)


def update_posteriors(likelihoods, new_priors):
    """Bayes' rule with recovered likelihoods and new priors.

    ``likelihoods`` may carry any positive scale.
    """
    lik = np.asarray(likelihoods, dtype=np.float64)
    q = ProbabilityVector.coerce(new_priors)
    if lik.ndim != 1 or lik.shape[0] != q.n:
        raise DimensionError(f"likelihoods have shape {lik.shape} but new priors have {q.n} classes")
    if not np.all(np.isfinite(lik)) or np.any(lik <= 0):
        raise ValueError("likelihoods must be finite and strictly positive")
    w = lik * q.values
    return ProbabilityVector(w / w.sum(), eps=q.eps)


def adapt(posteriors, old_priors, new_priors, cfg=None):
    """Re-express ``posteriors`` under ``new_priors``."""
    cfg = cfg or SolverConfig()
    p, q = _pair(posteriors, old_priors)
    q_new = ProbabilityVector.coerce(new_priors)
    if q_new.n != p.n:
        raise DimensionError(f"new priors have {q_new.n} classes, expected {p.n}")
    if cfg.method == "ratio":
        lik = closed_form_likelihoods(p, q)
    else:
        report = recover_likelihoods(p, q, cfg)
        if not report.converged:
            raise ConvergenceError(
                f"eigen solve did not converge after {report.iterations} iterations "
                f"(residual {report.residual_inf:.3g})",
                report,
            )
        lik = report.likelihoods
    return update_posteriors(lik, q_new)


def adapt_batch(rows, old_priors, new_priors, cfg=None, return_likelihoods=False):
    """Adapt every row of a 2-D posterior array.

    Returns an ``(n_rows, n_classes)`` array, plus the likelihood array when
    ``return_likelihoods`` is set. Row order is preserved.
    """
    cfg = cfg or SolverConfig()
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2:
        raise DimensionError(f"expected a 2-D array of posteriors, got shape {rows.shape}")
    q_old = ProbabilityVector.coerce(old_priors)
    q_new = ProbabilityVector.coerce(new_priors)
    if not rows.shape[1] == q_old.n == q_new.n:
        raise DimensionError(
            f"rows have {rows.shape[1]} classes, old priors {q_old.n}, new priors {q_new.n}"
        )
    out = np.empty_like(rows)
    liks = np.empty_like(rows)
    for i, row in enumerate(rows):
        p = ProbabilityVector(row, eps=q_old.eps)
        if cfg.method == "ratio":
            lik = closed_form_likelihoods(p, q_old)
        else:
            report = recover_likelihoods(p, q_old, cfg)
            if not report.converged:
                raise ConvergenceError(
                    f"row {i}: eigen solve did not converge after {report.iterations} iterations",
                    report,
                )
            lik = report.likelihoods
        liks[i] = lik.values
        out[i] = update_posteriors(lik, q_new).values
    if return_likelihoods:
        return out, liks
    return out


def map_class(posteriors):
    """Index of the largest posterior; ties go to the lowest index."""
    return int(np.argmax(np.asarray(posteriors)))
