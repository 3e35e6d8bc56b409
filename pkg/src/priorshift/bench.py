"""Synthetic 1-D Gaussian benchmark for prior-shift adaptation.

Two (or more) classes share a variance. A "direct posterior" classifier is
simulated by exact Bayes posteriors under the training priors. Test data is
drawn under new priors and classified twice: by the stale posteriors, and by
posteriors adapted to the new priors through the likelihood-recovery path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import core
from .core import ProbabilityVector, SolverConfig

__all__ = [
    "SAMPLING_METHOD",
    "GaussianClassSpec",
    "LabeledSample",
    "Dataset",
    "ExperimentReport",
    "DEFAULT_SPECS",
    "gaussian_pdf",
    "optimal_boundary",
    "expected_error_rate",
    "sample_dataset",
    "true_posteriors",
    "demo_datasets",
    "run_demo",
    "histogram",
    "write_plot_data",
]

SAMPLING_METHOD = (
    "numpy PCG64 seeded via SeedSequence(seed); labels by Generator.choice with the "
    "class priors, values by Generator.normal (ziggurat) with the class mean and shared variance"
)

HIST_LO, HIST_HI, HIST_WIDTH = -5.0, 5.0, 0.2


@dataclass(frozen=True)
class GaussianClassSpec:
    mean: float
    variance: float = 1.0

    def __post_init__(self):
        if not self.variance > 0:
            raise ValueError(f"variance must be positive, got {self.variance!r}")


DEFAULT_SPECS = (GaussianClassSpec(-1.0, 1.0), GaussianClassSpec(1.0, 1.0))


@dataclass(frozen=True)
class LabeledSample:
    value: float
    label: int


@dataclass(frozen=True, eq=False)
class Dataset:
    """Sampled feature values with their class labels, as parallel arrays."""

    values: np.ndarray
    labels: np.ndarray

    def __len__(self):
        return self.values.shape[0]

    def __iter__(self):
        for v, y in zip(self.values, self.labels):
            yield LabeledSample(float(v), int(y))


def gaussian_pdf(d, spec):
    var = spec.variance
    return math.exp(-((d - spec.mean) ** 2) / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)


def _shared_variance(specs):
    variances = {s.variance for s in specs}
    if len(variances) != 1:
        raise ValueError("all classes must share one variance")
    return variances.pop()


def optimal_boundary(priors, mu1=-1.0, mu2=1.0, sigma2=1.0):
    """Feature value where the two class posteriors are equal.

    ``(mu1 + mu2)/2 + sigma2 * ln(pi2/pi1) / (mu1 - mu2)``, which for means at
    -1 and +1 with unit variance is ``-ln(pi2/pi1) / 2``.
    """
    q = ProbabilityVector.coerce(priors)
    if q.n != 2:
        raise ValueError("the decision boundary is defined for two classes only")
    if mu1 == mu2:
        raise ValueError("class means must differ")
    if not sigma2 > 0:
        raise ValueError("variance must be positive")
    pi1, pi2 = q.values
    return (mu1 + mu2) / 2.0 + sigma2 * math.log(pi2 / pi1) / (mu1 - mu2)


def _classify_by_threshold(values, boundary, mu1, mu2):
    # ties at the boundary go to class 0, same as argmax
    if mu1 < mu2:
        return np.where(values <= boundary, 0, 1)
    return np.where(values >= boundary, 0, 1)


def _norm_cdf(z):
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def expected_error_rate(boundary, priors, specs=DEFAULT_SPECS):
    """Population error of thresholding at ``boundary`` under ``priors``."""
    q = ProbabilityVector.coerce(priors)
    s1, s2 = specs
    sd = math.sqrt(_shared_variance(specs))
    if s1.mean < s2.mean:
        miss1 = 1.0 - _norm_cdf((boundary - s1.mean) / sd)
        miss2 = _norm_cdf((boundary - s2.mean) / sd)
    else:
        miss1 = _norm_cdf((boundary - s1.mean) / sd)
        miss2 = 1.0 - _norm_cdf((boundary - s2.mean) / sd)
    return float(q.values[0] * miss1 + q.values[1] * miss2)


def sample_dataset(priors, specs, n, seed):
    """Draw ``n`` labeled samples; identical arguments give identical data.

    ``seed`` is an integer or a ``numpy.random.SeedSequence``.
    """
    q = ProbabilityVector.coerce(priors)
    if len(specs) != q.n:
        raise ValueError(f"{len(specs)} class specs for {q.n} priors")
    if n <= 0:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    labels = rng.choice(q.n, size=n, p=q.values)
    means = np.array([s.mean for s in specs])
    sds = np.sqrt([s.variance for s in specs])
    values = rng.normal(means[labels], sds[labels])
    labels.setflags(write=False)
    values.setflags(write=False)
    return Dataset(values, labels)


def true_posteriors(d, priors, specs):
    """Exact Bayes posteriors for feature value ``d``.

    Computed in log space, so far-tail samples do not underflow.
    """
    q = ProbabilityVector.coerce(priors)
    log_w = np.array(
        [-((d - s.mean) ** 2) / (2.0 * s.variance) - 0.5 * math.log(s.variance) for s in specs]
    ) + np.log(q.values)
    w = np.exp(log_w - log_w.max())
    return ProbabilityVector(w / w.sum(), eps=q.eps)


@dataclass(frozen=True)
class ExperimentReport:
    n: int
    seed: int
    old_priors: tuple
    new_priors: tuple
    class_counts: tuple
    old_errors: tuple
    adapted_errors: tuple
    old_error_rate: float
    adapted_error_rate: float
    boundary_old: float | None
    boundary_new: float | None
    expected_old_error_rate: float | None
    expected_adapted_error_rate: float | None
    boundary_agreement: float | None
    method: str
    old_decisions: np.ndarray = field(repr=False, compare=False)
    adapted_decisions: np.ndarray = field(repr=False, compare=False)

    def format(self):
        def vec(xs):
            return ",".join(repr(float(x)) for x in xs)

        lines = [
            f"# sampling: {SAMPLING_METHOD}",
            f"seed\t{self.seed}",
            f"n\t{self.n}",
            f"old_priors\t{vec(self.old_priors)}",
            f"new_priors\t{vec(self.new_priors)}",
            f"likelihood_path\t{self.method}",
        ]
        if self.boundary_old is not None:
            lines += [
                f"boundary_old\t{self.boundary_old:.17g}",
                f"boundary_new\t{self.boundary_new:.17g}",
            ]
        for k, count in enumerate(self.class_counts):
            lines.append(
                f"class_{k}\tcount={count}\told_errors={self.old_errors[k]}"
                f"\tadapted_errors={self.adapted_errors[k]}"
            )
        lines.append(f"old_error_rate\t{self.old_error_rate:.6f}")
        lines.append(f"adapted_error_rate\t{self.adapted_error_rate:.6f}")
        if self.expected_old_error_rate is not None:
            lines.append(f"expected_old_error_rate\t{self.expected_old_error_rate:.6f}")
            lines.append(f"expected_adapted_error_rate\t{self.expected_adapted_error_rate:.6f}")
            lines.append(f"boundary_agreement\t{self.boundary_agreement:.6f}")
        return "\n".join(lines) + "\n"


def run_demo(
    seed=0,
    n=10_000,
    old_priors=(0.5, 0.5),
    new_priors=(0.8, 0.2),
    specs=DEFAULT_SPECS,
    cfg=None,
):
    """Classify data drawn under ``new_priors`` with stale and adapted posteriors.

    ``cfg`` defaults to the eigenvector path so the benchmark exercises the
    Perron-vector recovery rather than the ratio shortcut.
    """
    cfg = cfg or SolverConfig(method="eigen")
    q_old = ProbabilityVector.coerce(old_priors)
    q_new = ProbabilityVector.coerce(new_priors)
    specs = tuple(specs)
    if not len(specs) == q_old.n == q_new.n:
        raise ValueError("specs, old priors and new priors must have the same length")
    _shared_variance(specs)

    _, data = demo_datasets(seed, n, q_old, q_new, specs)
    old_post = np.array([true_posteriors(d, q_old, specs).values for d in data.values])
    adapted = core.adapt_batch(old_post, q_old, q_new, cfg)
    old_dec = np.argmax(old_post, axis=1)
    new_dec = np.argmax(adapted, axis=1)

    k = q_new.n
    counts = np.bincount(data.labels, minlength=k)
    old_err = np.bincount(data.labels[old_dec != data.labels], minlength=k)
    new_err = np.bincount(data.labels[new_dec != data.labels], minlength=k)

    b_old = b_new = e_old = e_new = agreement = None
    if k == 2:
        var = specs[0].variance
        mu1, mu2 = specs[0].mean, specs[1].mean
        b_old = optimal_boundary(q_old, mu1, mu2, var)
        b_new = optimal_boundary(q_new, mu1, mu2, var)
        e_old = expected_error_rate(b_old, q_new, specs)
        e_new = expected_error_rate(b_new, q_new, specs)
        thresh = _classify_by_threshold(data.values, b_new, mu1, mu2)
        agreement = float(np.mean(thresh == new_dec))

    return ExperimentReport(
        n=n,
        seed=seed,
        old_priors=tuple(float(x) for x in q_old.values),
        new_priors=tuple(float(x) for x in q_new.values),
        class_counts=tuple(int(c) for c in counts),
        old_errors=tuple(int(c) for c in old_err),
        adapted_errors=tuple(int(c) for c in new_err),
        old_error_rate=float(old_err.sum() / n),
        adapted_error_rate=float(new_err.sum() / n),
        boundary_old=b_old,
        boundary_new=b_new,
        expected_old_error_rate=e_old,
        expected_adapted_error_rate=e_new,
        boundary_agreement=agreement,
        method=f"{cfg.method}/{cfg.solver}",
        old_decisions=old_dec,
        adapted_decisions=new_dec,
    )


def demo_datasets(seed, n, old_priors, new_priors, specs=DEFAULT_SPECS):
    """Training-time and deployment-time datasets from independent child streams."""
    old_stream, new_stream = np.random.SeedSequence(seed).spawn(2)
    return (
        sample_dataset(old_priors, specs, n, old_stream),
        sample_dataset(new_priors, specs, n, new_stream),
    )


def histogram(data, n_classes):
    """Per-class counts in 0.2-wide bins over [-5, 5]; out-of-range values are dropped."""
    n_bins = int(round((HIST_HI - HIST_LO) / HIST_WIDTH))
    edges = HIST_LO + HIST_WIDTH * np.arange(n_bins + 1)
    counts = np.stack(
        [np.histogram(data.values[data.labels == k], bins=edges)[0] for k in range(n_classes)]
    )
    return edges[:-1], counts


def write_plot_data(path, data, n_classes):
    """Write ``class_index<TAB>bin_left<TAB>count`` lines."""
    lefts, counts = histogram(data, n_classes)
    with Path(path).open("w") as fh:
        for k in range(n_classes):
            for left, c in zip(lefts, counts[k]):
                fh.write(f"{k}\t{left:.1f}\t{int(c)}\n")
