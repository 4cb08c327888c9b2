"""Randomized checks of the operator inequalities used in the coding proofs.

Every check reports a slack that is nonnegative when the inequality holds;
a trial counts as a violation when the slack is below ``-VIOLATION_TOL``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from covertmac import qlinalg as ql
from covertmac.infomeasures import pinching_map

VIOLATION_TOL = 1e-9

CHECKS = (
    "hayashi_nagaoka",
    "gentle_measurement",
    "pinching_inequality",
    "pinching_trace_identity",
    "commuting_power_subadditivity",
    "scalar_log_inequality",
)


@dataclass
class CheckResult:
    trials: int = 0
    violations: int = 0
    worst_slack: float = math.inf

    def record(self, slack: float):
        self.trials += 1
        self.worst_slack = min(self.worst_slack, slack)
        if slack < -VIOLATION_TOL:
            self.violations += 1

    def to_dict(self) -> dict:
        worst = None if self.trials == 0 else self.worst_slack
        return {"trials": self.trials, "violations": self.violations, "worst_slack": worst}


@dataclass
class LemmaReport:
    seed: int
    dims: tuple
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.violations == 0 for c in self.checks.values())

    def to_dict(self) -> dict:
        return {"seed": self.seed, "dims": list(self.dims), "ok": self.ok,
                "checks": {k: v.to_dict() for k, v in self.checks.items()}}


def _random_effect(d: int, rng: np.random.Generator) -> np.ndarray:
    """Random ``0 <= A <= I``; a third of the draws are projectors to hit the boundary."""
    u = ql.random_unitary(d, rng)
    if rng.random() < 1 / 3:
        lam = (rng.random(d) < 0.5).astype(float)
    else:
        lam = rng.random(d)
    return (u * lam) @ u.conj().T


def _random_projector(d: int, rng: np.random.Generator) -> np.ndarray:
    u = ql.random_unitary(d, rng)
    k = int(rng.integers(0, d + 1))
    v = u[:, :k]
    return v @ v.conj().T


def _degenerate_state(d: int, rng: np.random.Generator) -> np.ndarray:
    """Full-rank state with a few repeated eigenvalues, so pinching is nontrivial."""
    levels = rng.random(int(rng.integers(1, d + 1))) + 0.05
    lam = rng.choice(levels, size=d)
    u = ql.random_unitary(d, rng)
    out = (u * (lam / lam.sum())) @ u.conj().T
    return (out + out.conj().T) / 2


def hayashi_nagaoka_slack(S: np.ndarray, T: np.ndarray) -> float:
    """``min eig(2(I - S) + 4T - (I - (S+T)^{-1/2} S (S+T)^{-1/2}))``."""
    d = S.shape[0]
    inv = ql.mpow(S + T, -0.5, support_only=True)
    lhs = np.eye(d) - inv @ S @ inv
    return ql.min_eig(2 * (np.eye(d) - S) + 4 * T - lhs)


def gentle_measurement_slack(rho: np.ndarray, proj: np.ndarray) -> float:
    a = max(0.0, 1.0 - float(np.trace(proj @ rho).real))
    return 2 * math.sqrt(a) - ql.trace_norm(proj @ rho @ proj - rho)


def pinching_inequality_slack(rho: np.ndarray, sigma: np.ndarray) -> float:
    pinched, v = pinching_map(sigma, rho)
    return ql.min_eig(v * pinched - rho)


def pinching_trace_slack(rho1: np.ndarray, rho2: np.ndarray, sigma: np.ndarray) -> float:
    a = np.trace(pinching_map(sigma, rho1)[0] @ rho2)
    b = np.trace(rho1 @ pinching_map(sigma, rho2)[0])
    return -abs(a - b)


def commuting_power_slack(a: np.ndarray, b: np.ndarray, s: float) -> float:
    """``min eig(A^s + B^s - (A + B)^s)`` for commuting PSD ``A, B``."""
    return ql.min_eig(ql.mpow(a, s) + ql.mpow(b, s) - ql.mpow(a + b, s))


def scalar_log_slack(x: float, alpha: float) -> float:
    """Smaller gap of ``ln(1+x) <= ln(1+x^a)/a <= x^a/a`` (natural log)."""
    mid = math.log1p(x ** alpha) / alpha
    return min(mid - math.log1p(x), x ** alpha / alpha - mid)


def lemma_checks(seed: int = 0, trials: int = 1000, dims=tuple(range(2, 9))) -> LemmaReport:
    dims = tuple(int(d) for d in dims)
    if trials > 0 and not dims:
        raise ValueError("need at least one dimension")
    if any(d < 1 for d in dims):
        raise ValueError("dimensions must be positive")
    report = LemmaReport(seed, dims, {name: CheckResult() for name in CHECKS})
    rng = np.random.default_rng(seed)
    for _ in range(trials):
        c = report.checks
        d = int(rng.choice(dims))

        S, T = _random_effect(d, rng), _random_effect(d, rng)
        c["hayashi_nagaoka"].record(hayashi_nagaoka_slack(S, T))

        rho = ql.random_density_matrix(d, rng)
        c["gentle_measurement"].record(gentle_measurement_slack(rho, _random_projector(d, rng)))

        sigma = _degenerate_state(d, rng)
        c["pinching_inequality"].record(pinching_inequality_slack(rho, sigma))
        c["pinching_trace_identity"].record(pinching_trace_slack(rho, ql.random_density_matrix(d, rng), sigma))

        u = ql.random_unitary(d, rng)
        a = (u * rng.random(d)) @ u.conj().T
        b = (u * rng.random(d)) @ u.conj().T
        c["commuting_power_subadditivity"].record(commuting_power_slack(a, b, float(rng.random())))

        x = float(10.0 ** rng.uniform(-6, 6))
        alpha = float(rng.uniform(1e-3, 1.0))
        c["scalar_log_inequality"].record(scalar_log_slack(x, alpha))
    return report
