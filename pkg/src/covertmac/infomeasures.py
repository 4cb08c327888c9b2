"""Entropies, Holevo-type conditional mutual informations and divergences (bits)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from covertmac import qlinalg as ql
from covertmac.channel import CqTable, conditional_average

INF = math.inf
PINCH_GROUP_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class InputDistribution:
    """``p1(x1) p2(x2) p3(x3 | x1, x2)``; ``p3_given_12`` has shape ``(k1, k2, k3)``."""

    p1: np.ndarray
    p2: np.ndarray
    p3_given_12: np.ndarray

    def __post_init__(self):
        p1 = np.asarray(self.p1, dtype=float)
        p2 = np.asarray(self.p2, dtype=float)
        p3 = np.asarray(self.p3_given_12, dtype=float)
        if p1.ndim != 1 or p2.ndim != 1 or p3.shape[:2] != (p1.size, p2.size) or p3.ndim != 3:
            raise ValueError(f"inconsistent shapes {p1.shape}, {p2.shape}, {p3.shape}")
        for name, p in (("p1", p1), ("p2", p2)):
            if np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
                raise ValueError(f"{name} is not a probability vector")
        if np.any(p3 < 0) or np.max(np.abs(p3.sum(axis=2) - 1)) > 1e-12:
            raise ValueError("p3_given_12 rows are not probability vectors")
        for name, p in (("p1", p1), ("p2", p2), ("p3_given_12", p3)):
            p.setflags(write=False)
            object.__setattr__(self, name, p)

    @property
    def alphabet_sizes(self) -> tuple:
        return self.p3_given_12.shape

    def joint(self) -> np.ndarray:
        return self.p1[:, None, None] * self.p2[None, :, None] * self.p3_given_12

    @classmethod
    def uniform(cls, k1: int, k2: int, k3: int) -> "InputDistribution":
        return cls(np.full(k1, 1 / k1), np.full(k2, 1 / k2), np.full((k1, k2, k3), 1 / k3))

    @classmethod
    def point_mass(cls, sizes, symbols) -> "InputDistribution":
        k1, k2, k3 = sizes
        p1, p2 = np.zeros(k1), np.zeros(k2)
        p1[symbols[0]] = 1.0
        p2[symbols[1]] = 1.0
        p3 = np.zeros((k1, k2, k3))
        p3[:, :, symbols[2]] = 1.0
        return cls(p1, p2, p3)

    def to_dict(self) -> dict:
        return {"p1": self.p1.tolist(), "p2": self.p2.tolist(), "p3_given_12": self.p3_given_12.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "InputDistribution":
        return cls(np.asarray(d["p1"]), np.asarray(d["p2"]), np.asarray(d["p3_given_12"]))

    def total_variation(self, other: "InputDistribution") -> float:
        return 0.5 * float(np.abs(self.joint() - other.joint()).sum())


@dataclass(frozen=True)
class RegionBounds:
    """Receiver terms ``b*`` and warden terms ``e*`` of the covert region, in bits."""

    b1: float
    b2: float
    b12: float
    e1: float
    e2: float
    e12: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("b1", "b2", "b12", "e1", "e2", "e12")}


def _spectrum(rho) -> np.ndarray:
    a = ql.as_matrix(rho)
    return np.linalg.eigvalsh((a + a.conj().T) / 2)


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum()) + 0.0


def von_neumann_entropy(rho, support_cut: float | None = None) -> float:
    w = _spectrum(rho)
    cut = ql.SUPPORT_CUT * max(float(w.max(initial=0.0)), 1e-300) if support_cut is None else support_cut
    w = w[w > cut]
    return max(0.0, float(-(w * np.log2(w)).sum()))


_TARGET_AXES = {"B": "b_states", "E": "e_states"}


def holevo_cmi(table: CqTable, dist: InputDistribution, target: str, s: Iterable[int], t: Iterable[int] = ()) -> float:
    """``I(X_s; target | X_t)`` on the classical-quantum state of ``table`` and ``dist``.

    Transmitters are labelled 1, 2, 3. Computed as the entropy difference
    ``H(target | X_t) - H(target | X_s, X_t)``, with every conditional state
    obtained by classical averaging over the unconditioned inputs.
    """
    s, t = set(s), set(t)
    if s & t:
        raise ValueError(f"conditioning sets overlap: {sorted(s & t)}")
    if not s or not (s | t) <= {1, 2, 3}:
        raise ValueError(f"invalid transmitter sets {sorted(s)}, {sorted(t)}")
    states = getattr(table, _TARGET_AXES[target])
    joint = dist.joint()
    if joint.shape != table.alphabet_sizes:
        raise ql.DimensionError("distribution and table alphabets differ")
    return max(0.0, _cond_entropy(states, joint, t) - _cond_entropy(states, joint, s | t)) + 0.0


def _cond_entropy(states: np.ndarray, joint: np.ndarray, given: set) -> float:
    axes = sorted(i - 1 for i in given)
    total = 0.0
    for symbols in np.ndindex(*[joint.shape[a] for a in axes]):
        mass, avg = conditional_average(states, joint, axes, symbols)
        if mass > 0:
            total += mass * von_neumann_entropy(avg)
    return total


REGION_TERMS = (
    ("b1", "B", {1, 3}, {2}),
    ("b2", "B", {2, 3}, {1}),
    ("b12", "B", {1, 2, 3}, set()),
    ("e1", "E", {1}, set()),
    ("e2", "E", {2}, set()),
    ("e12", "E", {1, 2, 3}, set()),
)


def region_bounds(table: CqTable, dist: InputDistribution) -> RegionBounds:
    return RegionBounds(**{name: holevo_cmi(table, dist, tgt, s, t) for name, tgt, s, t in REGION_TERMS})


def _supports_contained(rho: np.ndarray, sigma: np.ndarray, tol: float = 1e-9) -> bool:
    w, v = np.linalg.eigh((sigma + sigma.conj().T) / 2)
    cut = ql.SUPPORT_CUT * max(float(w.max()), 1e-300)
    kernel = v[:, w <= cut]
    if kernel.shape[1] == 0:
        return True
    leak = np.trace(kernel.conj().T @ rho @ kernel).real
    return leak <= tol


def quantum_rel_entropy(rho, sigma) -> float:
    """``D(rho || sigma)`` in bits, or ``math.inf`` when ``supp(rho)`` leaves ``supp(sigma)``."""
    r, s = ql.as_matrix(rho), ql.as_matrix(sigma)
    if r.shape != s.shape:
        raise ql.DimensionError(f"shape mismatch {r.shape} vs {s.shape}")
    if not _supports_contained(r, s):
        return INF
    log_r = ql.matrix_function(r, np.log2, support_only=True)
    log_s = ql.matrix_function(s, np.log2, support_only=True)
    return max(0.0, float(np.trace(r @ (log_r - log_s)).real)) + 0.0


def sandwiched_quasi(rho, sigma, alpha: float) -> float:
    """``tr[(sigma^{-a} rho sigma^{-a})^{1+alpha}]`` with ``a = alpha / (2 (1 + alpha))``."""
    r, s = ql.as_matrix(rho), ql.as_matrix(sigma)
    s_pow = ql.mpow(s, -alpha / (2 * (1 + alpha)))
    inner = s_pow @ r @ s_pow
    w = np.clip(_spectrum((inner + inner.conj().T) / 2), 0.0, None)
    return float(np.sum(w ** (1 + alpha)))


def sandwiched_renyi(rho, sigma, alpha: float) -> float:
    """Sandwiched Renyi divergence of order ``1 + alpha`` in bits, ``0 < alpha <= 1``."""
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    r, s = ql.as_matrix(rho), ql.as_matrix(sigma)
    if r.shape != s.shape:
        raise ql.DimensionError(f"shape mismatch {r.shape} vs {s.shape}")
    if not _supports_contained(r, s):
        return INF
    return math.log2(sandwiched_quasi(r, s, alpha)) / alpha


def eigen_groups(sigma, group_tol: float = PINCH_GROUP_TOL) -> list:
    """Eigenprojectors of ``sigma`` with eigenvalues within ``group_tol`` (relative) merged."""
    spec = ql.hermitian_eig(sigma)
    w, v = spec.eigenvalues, spec.eigenvectors
    scale = max(float(np.max(np.abs(w))), 1e-300)
    groups, start = [], 0
    for j in range(1, len(w) + 1):
        if j == len(w) or w[start] - w[j] > group_tol * scale:
            vk = v[:, start:j]
            groups.append(vk @ vk.conj().T)
            start = j
    return groups


def pinching_map(sigma, rho, group_tol: float = PINCH_GROUP_TOL):
    """Pinch ``rho`` with the eigenspaces of ``sigma``; returns ``(pinched, v)``."""
    s, r = ql.as_matrix(sigma), ql.as_matrix(rho)
    if s.shape != r.shape:
        raise ql.DimensionError(f"shape mismatch {s.shape} vs {r.shape}")
    groups = eigen_groups(s, group_tol)
    out = sum(p @ r @ p for p in groups)
    return (out + out.conj().T) / 2, len(groups)


def count_distinct(values, group_tol: float = PINCH_GROUP_TOL) -> int:
    """Number of groups after merging sorted values closer than ``group_tol`` (relative)."""
    w = np.sort(np.asarray(values, dtype=float))[::-1]
    if w.size == 0:
        return 0
    scale = max(float(np.max(np.abs(w))), 1e-300)
    return 1 + int(np.sum(w[:-1] - w[1:] > group_tol * scale))


def cq_sandwiched_renyi(probs, cond_states, sigma, alpha: float) -> float:
    """Sandwiched Renyi divergence of the cq state ``sum_x p_x |x><x| (x) rho_x``
    from ``rho_X (x) sigma`` (order ``1 + alpha``, bits).

    The block structure reduces it to ``(1/alpha) log2 sum_x p_x Q(rho_x, sigma)``.
    """
    total = 0.0
    for p, rho_x in zip(probs, cond_states):
        if p <= 0:
            continue
        if not _supports_contained(rho_x, sigma):
            return INF
        total += p * sandwiched_quasi(rho_x, sigma, alpha)
    return math.log2(total) / alpha


def cq_state(probs, cond_states) -> np.ndarray:
    """Block-diagonal matrix ``sum_x p_x |x><x| (x) rho_x``."""
    k = len(probs)
    d = cond_states[0].shape[0]
    out = np.zeros((k * d, k * d), dtype=complex)
    for x, (p, r) in enumerate(zip(probs, cond_states)):
        out[x * d:(x + 1) * d, x * d:(x + 1) * d] = p * r
    return out
