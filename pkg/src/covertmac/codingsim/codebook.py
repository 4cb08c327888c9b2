"""Random codebooks and the product states they induce."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from covertmac import qlinalg as ql
from covertmac.channel import CqTable
from covertmac.infomeasures import InputDistribution

MAX_DIM = 4096


class DimensionCapError(ValueError):
    """Raised before allocating an operator above the dimension cap."""


@dataclass(frozen=True)
class SimParams:
    n: int
    R1: float
    R2: float
    delta: float = 0.5
    alpha: float = 0.5
    num_codebooks: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("blocklength must be >= 1")
        if self.R1 < 0 or self.R2 < 0:
            raise ValueError("rates must be nonnegative")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if self.num_codebooks < 1:
            raise ValueError("need at least one codebook")

    @property
    def message_counts(self) -> tuple:
        return message_count(self.n, self.R1), message_count(self.n, self.R2)


def message_count(n: int, rate: float) -> int:
    """``floor(2^{n R})``, guarded against rounding just below an integer."""
    return max(1, int(math.floor(2.0 ** (n * rate) + 1e-9)))


def check_dim(d: int, n: int, cap: int = MAX_DIM) -> int:
    total = d ** n
    if total > cap:
        raise DimensionCapError(f"dimension {d}^{n} = {total} exceeds cap {cap}")
    return total


@dataclass(frozen=True, eq=False)
class Codebook:
    """Symbol sequences: ``x1[m1]``, ``x2[m2]`` and ``x3[m1, m2]``, each of length ``n``."""

    x1: np.ndarray
    x2: np.ndarray
    x3: np.ndarray

    @property
    def n(self) -> int:
        return self.x1.shape[1]

    @property
    def sizes(self) -> tuple:
        return self.x1.shape[0], self.x2.shape[0]

    def codeword(self, m1: int, m2: int) -> tuple:
        M1, M2 = self.sizes
        if not (0 <= m1 < M1 and 0 <= m2 < M2):
            raise IndexError(f"message pair {(m1, m2)} outside {M1} x {M2}")
        return self.x1[m1], self.x2[m2], self.x3[m1, m2]

    def pairs(self):
        M1, M2 = self.sizes
        for m1 in range(M1):
            for m2 in range(M2):
                yield m1, m2


def codebook_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for codebook ``index`` under a run seed."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def generate_codebook(dist: InputDistribution, params: SimParams, rng: np.random.Generator) -> Codebook:
    n = params.n
    M1, M2 = params.message_counts
    k1, k2, k3 = dist.alphabet_sizes
    x1 = rng.choice(k1, size=(M1, n), p=dist.p1)
    x2 = rng.choice(k2, size=(M2, n), p=dist.p2)
    cdf = np.cumsum(dist.p3_given_12, axis=2)
    cdf[..., -1] = 1.0
    u = rng.random((M1, M2, n))
    rows = cdf[x1[:, None, :], x2[None, :, :]]
    x3 = np.minimum((u[..., None] >= rows).sum(axis=-1), k3 - 1)
    # a symbol with zero conditional probability can only be hit through the cdf clamp above
    return Codebook(x1, x2, x3)


def product_state(local_states: np.ndarray, x1n, x2n, x3n) -> np.ndarray:
    """``(x)_t local_states[x1_t, x2_t, x3_t]``."""
    return reduce(np.kron, (local_states[a, b, c] for a, b, c in zip(x1n, x2n, x3n)))


def encode_joint_state(cb: Codebook, m1: int, m2: int, table: CqTable) -> np.ndarray:
    """Joint ``(B E)^n`` output for a message pair, positions in time order."""
    check_dim(table.d_B * table.d_E, cb.n)
    return product_state(table.joint_states, *cb.codeword(m1, m2))


def receiver_state(cb: Codebook, m1: int, m2: int, table: CqTable) -> np.ndarray:
    check_dim(table.d_B, cb.n)
    return product_state(table.b_states, *cb.codeword(m1, m2))


def warden_conditional(cb: Codebook, m1: int, m2: int, table: CqTable) -> np.ndarray:
    check_dim(table.d_E, cb.n)
    return product_state(table.e_states, *cb.codeword(m1, m2))


def warden_state(cb: Codebook, table: CqTable) -> np.ndarray:
    """Uniform average over message pairs of the warden's ``E^n`` states."""
    check_dim(table.d_E, cb.n)
    cache: dict = {}
    total = None
    count = 0
    for m1, m2 in cb.pairs():
        key = tuple(map(tuple, cb.codeword(m1, m2)))
        if key not in cache:
            cache[key] = product_state(table.e_states, *key)
        total = cache[key] if total is None else total + cache[key]
        count += 1
    out = total / count
    return (out + out.conj().T) / 2


def tensor_power_state(rho: np.ndarray, n: int) -> np.ndarray:
    check_dim(rho.shape[0], n)
    return ql.tensor_power(rho, n)
