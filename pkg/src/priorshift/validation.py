"""Property sweeps behind ``priorshift validate``.

Each check draws random simplex instances, measures the worst deviation of
one invariant, and compares it with a fixed tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bench, core, linalg
from .core import RESIDUAL_TOL, SolverConfig

__all__ = ["CheckResult", "random_simplex", "run_all"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    tolerance: float
    passed: bool
    instances: int

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return (
            f"{status}  {self.name:<24} max={self.measured:.3e}  tol={self.tolerance:.1e}"
            f"  instances={self.instances}"
        )


def _result(name, measured, tol, instances):
    return CheckResult(name, float(measured), tol, bool(measured <= tol), instances)


def random_simplex(rng, n):
    """Uniform draw from the (n-1)-simplex."""
    return rng.dirichlet(np.ones(n))


def check_column_sums(rng, instances, perturb=0.0):
    worst = 0.0
    for _ in range(instances):
        n = int(rng.integers(2, 101))
        a = core.build_a_matrix(random_simplex(rng, n), random_simplex(rng, n)).entries.copy()
        a[0, :] += perturb
        sums = np.array([math.fsum(col) for col in a.T])
        worst = max(worst, np.abs(sums - 1.0).max())
    return _result("column_sums", worst, 1e-14, instances)


def check_oracle(rng, instances, cfg):
    """Eigenvector vs posterior/prior ratio, residual and positivity in one sweep."""
    dev = resid = 0.0
    unconverged = nonpositive = 0
    for _ in range(instances):
        n = int(rng.integers(2, 101))
        p, q = random_simplex(rng, n), random_simplex(rng, n)
        rep = core.recover_likelihoods(p, q, cfg)
        if not rep.converged:
            unconverged += 1
            continue
        ratio = core.closed_form_likelihoods(p, q).values
        dev = max(dev, np.abs(rep.likelihoods.values - ratio).max())
        resid = max(resid, rep.residual_inf)
        nonpositive += int(np.any(rep.likelihoods.values <= 0))
    return [
        _result("oracle_equivalence", dev, 1e-10, instances),
        _result("null_residual", resid, RESIDUAL_TOL, instances),
        _result("converged", unconverged, 0, instances),
        _result("positivity", nonpositive, 0, instances),
    ]


def check_gram(rng, instances, cfg):
    worst = 0.0
    for _ in range(instances):
        n = int(rng.integers(2, 9))
        p, q = random_simplex(rng, n), random_simplex(rng, n)
        x = core.recover_likelihoods(p, q, cfg).likelihoods.values
        try:
            g = linalg.gram_smallest_eigvec(core.build_m_matrix(p, q))
        except linalg.EigenSolverError:
            worst = math.inf
            continue
        worst = max(worst, np.abs(g - x).max())
    return _result("gram_cross_check", worst, 1e-8, instances)


def check_round_trip(rng, instances, cfg):
    worst = 0.0
    eigen = SolverConfig(cfg.tol, cfg.max_iter, "eigen", cfg.solver, cfg.shift_fraction)
    ratio = SolverConfig(cfg.tol, cfg.max_iter, "ratio", cfg.solver, cfg.shift_fraction)
    for _ in range(instances):
        n = int(rng.integers(2, 101))
        p = core.ProbabilityVector(random_simplex(rng, n))
        q = random_simplex(rng, n)
        for c in (eigen, ratio):
            worst = max(worst, np.abs(core.adapt(p, q, q, c).values - p.values).max())
    return _result("round_trip", worst, 1e-12, instances)


def check_scale_invariance(rng, instances):
    worst = 0.0
    for _ in range(instances):
        n = int(rng.integers(2, 101))
        lik = core.closed_form_likelihoods(random_simplex(rng, n), random_simplex(rng, n)).values
        q = random_simplex(rng, n)
        base = core.update_posteriors(lik, q).values
        for alpha in (1e-6, 1.0, 1e6):
            worst = max(worst, np.abs(core.update_posteriors(alpha * lik, q).values - base).max())
    return _result("scale_invariance", worst, 1e-12, instances)


def check_dense_eigen(rng, instances, cfg):
    """Full eigendecomposition of A for small n: top eigenvalue and its vector."""
    eig_dev = vec_dev = 0.0
    for _ in range(instances):
        n = int(rng.integers(2, 9))
        p, q = random_simplex(rng, n), random_simplex(rng, n)
        w, v = np.linalg.eig(core.build_a_matrix(p, q).entries)
        k = int(np.argmax(w.real))
        eig_dev = max(eig_dev, abs(w[k] - 1.0))
        top = v[:, k].real
        top = top / top.sum()
        x = core.recover_likelihoods(p, q, cfg).likelihoods.values
        vec_dev = max(vec_dev, np.abs(top - x).max())
    return [
        _result("dense_max_eigenvalue", eig_dev, 1e-12, instances),
        _result("dense_eigenvector", vec_dev, 1e-10, instances),
    ]


def check_matvec_mass(rng, instances):
    worst = 0.0
    for _ in range(instances):
        n = int(rng.integers(2, 101))
        a = core.build_a_matrix(random_simplex(rng, n), random_simplex(rng, n)).entries
        x = rng.random(n)
        worst = max(worst, abs(math.fsum(linalg.matvec(a, x)) - math.fsum(x)) / math.fsum(x))
    return _result("matvec_l1_mass", worst, 1e-14, instances)


def check_boundaries():
    b_equal = abs(bench.optimal_boundary((0.5, 0.5)))
    b_shift = abs(bench.optimal_boundary((0.8, 0.2)) - math.log(2.0))
    return [
        _result("boundary_equal_priors", b_equal, 0.0, 1),
        _result("boundary_shifted_priors", b_shift, 1e-12, 1),
    ]


def run_all(instances=1000, seed=0, perturb_column_sums=0.0, cfg=None):
    """Run every check and return the list of results."""
    cfg = cfg or SolverConfig(method="eigen")
    small = max(1, min(instances, 100))
    streams = np.random.SeedSequence(seed).spawn(7)
    rngs = [np.random.default_rng(s) for s in streams]
    results = [check_column_sums(rngs[0], instances, perturb_column_sums)]
    results += check_oracle(rngs[1], instances, cfg)
    results.append(check_gram(rngs[2], small, cfg))
    results.append(check_round_trip(rngs[3], instances, cfg))
    results.append(check_scale_invariance(rngs[4], small))
    results += check_dense_eigen(rngs[5], small, cfg)
    results.append(check_matvec_mass(rngs[6], small))
    results += check_boundaries()
    return results
