"""The three-transmitter channel with a warden and its classical-quantum table.

A channel reaches the rest of the package as a :class:`CqTable`: one joint
output state on ``B (x) E`` per input triple ``(x1, x2, x3)`` plus the
warden's no-communication state ``rho0``. Tables can be compiled from a
Kraus description with signal ensembles, or built directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from covertmac import qlinalg as ql

MAX_ALPHABET = 8
MAX_OUTPUT_DIM = 4


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SignalEnsemble:
    """Input states ``states[x]`` prepared by one transmitter for symbol ``x``."""

    states: tuple

    def __post_init__(self):
        if len(self.states) < 1:
            raise ValueError("an ensemble needs at least one symbol")
        states = tuple(_frozen(ql.check_density_matrix(s)) for s in self.states)
        dims = {s.shape[0] for s in states}
        if len(dims) != 1:
            raise ql.DimensionError(f"ensemble states have mixed dimensions {sorted(dims)}")
        object.__setattr__(self, "states", states)

    @property
    def alphabet_size(self) -> int:
        return len(self.states)

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    @classmethod
    def computational(cls, dim: int, size: int | None = None) -> "SignalEnsemble":
        """Orthogonal pure states ``|0>, ..., |size-1>`` in dimension ``dim``."""
        size = dim if size is None else size
        states = []
        for x in range(size):
            s = np.zeros((dim, dim), dtype=complex)
            s[x, x] = 1.0
            states.append(s)
        return cls(tuple(states))


@dataclass(frozen=True, eq=False)
class PhysicalChannel:
    input_dims: tuple
    output_dims: tuple
    kraus_ops: tuple

    def __post_init__(self):
        object.__setattr__(self, "input_dims", tuple(int(d) for d in self.input_dims))
        object.__setattr__(self, "output_dims", tuple(int(d) for d in self.output_dims))
        object.__setattr__(self, "kraus_ops", tuple(_frozen(ql.as_matrix(k)) for k in self.kraus_ops))

    @property
    def d_in(self) -> int:
        return int(np.prod(self.input_dims))

    @property
    def d_out(self) -> int:
        return int(np.prod(self.output_dims))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = sum(k @ rho @ k.conj().T for k in self.kraus_ops)
        return (out + out.conj().T) / 2


@dataclass(frozen=True, eq=False)
class InnocentConfig:
    """The three no-communication input states ``phi_1, phi_2, phi_3``."""

    states: tuple

    def __post_init__(self):
        if len(self.states) != 3:
            raise ValueError("need exactly three innocent states")
        object.__setattr__(self, "states", tuple(_frozen(ql.check_density_matrix(s)) for s in self.states))

    @classmethod
    def from_symbols(cls, ensembles: Sequence[SignalEnsemble], symbols: Sequence[int]) -> "InnocentConfig":
        return cls(tuple(e.states[int(x)] for e, x in zip(ensembles, symbols)))


@dataclass
class ValidationReport:
    ok: bool
    completeness_residual: float
    problems: list = field(default_factory=list)


def validate_channel(ch: PhysicalChannel, tol: float = 1e-10) -> ValidationReport:
    """Check Kraus completeness and dimension bookkeeping; never raises."""
    problems = []
    d_in, d_out = ch.d_in, ch.d_out
    if len(ch.input_dims) != 3:
        problems.append(f"expected three input dims, got {ch.input_dims}")
    if len(ch.output_dims) != 2:
        problems.append(f"expected output dims (d_B, d_E), got {ch.output_dims}")
    if not ch.kraus_ops:
        problems.append("no Kraus operators")
        return ValidationReport(False, float("inf"), problems)
    for i, k in enumerate(ch.kraus_ops):
        if k.shape != (d_out, d_in):
            problems.append(f"Kraus operator {i} has shape {k.shape}, expected {(d_out, d_in)}")
    if problems:
        return ValidationReport(False, float("inf"), problems)
    gram = sum(k.conj().T @ k for k in ch.kraus_ops)
    residual = ql.trace_norm(gram - np.eye(d_in))
    if float(np.max(np.abs(gram - np.eye(d_in)))) > tol:
        problems.append(f"Kraus completeness violated (residual {residual:.6g})")
    return ValidationReport(not problems, residual, problems)


@dataclass(frozen=True, eq=False)
class CqTable:
    """Joint output states indexed by input symbols.

    ``joint_states`` has shape ``(k1, k2, k3, d_B*d_E, d_B*d_E)``.
    """

    joint_states: np.ndarray
    d_B: int
    d_E: int
    rho0: np.ndarray

    def __post_init__(self):
        js = np.array(self.joint_states, dtype=complex)
        if js.ndim != 5:
            raise ql.DimensionError("joint_states must be indexed as [x1, x2, x3, row, col]")
        D = int(self.d_B) * int(self.d_E)
        if js.shape[3:] != (D, D):
            raise ql.DimensionError(f"joint states have shape {js.shape[3:]}, expected {(D, D)}")
        for idx in np.ndindex(*js.shape[:3]):
            try:
                ql.check_density_matrix(js[idx])
            except ql.NotPhysicalError as exc:
                raise ql.NotPhysicalError(f"entry (x1,x2,x3)={idx}: {exc}") from exc
        rho0 = ql.check_density_matrix(self.rho0)
        if rho0.shape != (self.d_E, self.d_E):
            raise ql.DimensionError(f"rho0 has shape {rho0.shape}, expected {(self.d_E, self.d_E)}")
        js.setflags(write=False)
        object.__setattr__(self, "joint_states", js)
        object.__setattr__(self, "rho0", _frozen(rho0))
        object.__setattr__(self, "d_B", int(self.d_B))
        object.__setattr__(self, "d_E", int(self.d_E))
        b = np.empty(js.shape[:3] + (self.d_B, self.d_B), dtype=complex)
        e = np.empty(js.shape[:3] + (self.d_E, self.d_E), dtype=complex)
        for idx in np.ndindex(*js.shape[:3]):
            b[idx] = ql.partial_trace(js[idx], [self.d_B, self.d_E], [0])
            e[idx] = ql.partial_trace(js[idx], [self.d_B, self.d_E], [1])
        b.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "_b", b)
        object.__setattr__(self, "_e", e)

    @property
    def alphabet_sizes(self) -> tuple:
        return tuple(self.joint_states.shape[:3])

    @property
    def b_states(self) -> np.ndarray:
        """Receiver marginals, shape ``(k1, k2, k3, d_B, d_B)``."""
        return self._b

    @property
    def e_states(self) -> np.ndarray:
        """Warden marginals, shape ``(k1, k2, k3, d_E, d_E)``."""
        return self._e

    @classmethod
    def from_marginals(cls, b_states, e_states, rho0) -> "CqTable":
        """Build a table whose joint outputs are the products ``rho_B (x) rho_E``."""
        b = np.asarray(b_states, dtype=complex)
        e = np.asarray(e_states, dtype=complex)
        if b.shape[:3] != e.shape[:3]:
            raise ql.DimensionError("B and E tables index different alphabets")
        js = np.empty(b.shape[:3] + (b.shape[3] * e.shape[3],) * 2, dtype=complex)
        for idx in np.ndindex(*b.shape[:3]):
            js[idx] = np.kron(b[idx], e[idx])
        return cls(js, b.shape[3], e.shape[3], rho0)

    def restrict(self, x1=None, x2=None, x3=None) -> "CqTable":
        """Sub-table keeping only the listed symbols of each transmitter."""
        sel = [np.arange(k) if s is None else np.asarray(s, dtype=int) for k, s in zip(self.alphabet_sizes, (x1, x2, x3))]
        js = self.joint_states[np.ix_(*sel)]
        return CqTable(js, self.d_B, self.d_E, self.rho0)


def compile_cq_table(
    ch: PhysicalChannel,
    e1: SignalEnsemble,
    e2: SignalEnsemble,
    e3: SignalEnsemble,
    innocent: InnocentConfig,
    max_alphabet: int = MAX_ALPHABET,
    max_output_dim: int = MAX_OUTPUT_DIM,
) -> CqTable:
    """Push every product input ``theta^x1 (x) vartheta^x2 (x) tau^x3`` through the channel."""
    ensembles = (e1, e2, e3)
    if tuple(e.dim for e in ensembles) != ch.input_dims:
        raise ql.DimensionError(f"ensemble dims {[e.dim for e in ensembles]} do not match channel inputs {ch.input_dims}")
    if tuple(s.shape[0] for s in innocent.states) != ch.input_dims:
        raise ql.DimensionError("innocent state dimensions do not match channel inputs")
    if any(e.alphabet_size > max_alphabet for e in ensembles):
        raise ValueError(f"alphabet size above cap {max_alphabet}")
    d_B, d_E = ch.output_dims
    if max(d_B, d_E) > max_output_dim:
        raise ValueError(f"output dimension above cap {max_output_dim}")
    ks = tuple(e.alphabet_size for e in ensembles)
    js = np.empty(ks + (d_B * d_E, d_B * d_E), dtype=complex)
    for x1, x2, x3 in np.ndindex(*ks):
        rho_in = ql.tensor_product(e1.states[x1], e2.states[x2], e3.states[x3])
        js[x1, x2, x3] = ch.apply(rho_in)
    out0 = ch.apply(ql.tensor_product(*innocent.states))
    rho0 = ql.partial_trace(out0, [d_B, d_E], [1])
    return CqTable(js, d_B, d_E, (rho0 + rho0.conj().T) / 2)


@dataclass(frozen=True, eq=False)
class Marginals:
    """Averaged output states of a table under an input distribution.

    ``b_given[i][x]`` and ``e_given[i][x]`` are the receiver and warden states
    conditioned on transmitter ``i+1`` sending ``x``; entries for symbols of
    zero probability are ``None``.
    """

    rho_B: np.ndarray
    rho_E: np.ndarray
    b_given: tuple
    e_given: tuple
    table: CqTable

    def b_joint(self, x1: int, x2: int, x3: int) -> np.ndarray:
        return self.table.b_states[x1, x2, x3]

    def e_joint(self, x1: int, x2: int, x3: int) -> np.ndarray:
        return self.table.e_states[x1, x2, x3]


def conditional_average(states: np.ndarray, joint: np.ndarray, axes: Sequence[int], symbols: Sequence[int]):
    """Average of ``states`` over the joint law conditioned on ``X_axes = symbols``.

    Returns ``(probability of the condition, averaged state or None)``.
    """
    sel = [slice(None)] * 3
    for ax, x in zip(axes, symbols):
        sel[ax] = x
    w = joint[tuple(sel)]
    s = states[tuple(sel)]
    mass = float(w.sum())
    if mass <= 0:
        return 0.0, None
    avg = np.tensordot(w, s, axes=(tuple(range(w.ndim)), tuple(range(w.ndim)))) / mass
    return mass, (avg + avg.conj().T) / 2


def marginals(table: CqTable, dist) -> Marginals:
    joint = dist.joint()
    if joint.shape != table.alphabet_sizes:
        raise ql.DimensionError(f"distribution alphabets {joint.shape} do not match table {table.alphabet_sizes}")
    _, rho_B = conditional_average(table.b_states, joint, (), ())
    _, rho_E = conditional_average(table.e_states, joint, (), ())
    b_given, e_given = [], []
    for ax, k in enumerate(table.alphabet_sizes):
        b_given.append(tuple(conditional_average(table.b_states, joint, (ax,), (x,))[1] for x in range(k)))
        e_given.append(tuple(conditional_average(table.e_states, joint, (ax,), (x,))[1] for x in range(k)))
    return Marginals(rho_B, rho_E, tuple(b_given), tuple(e_given), table)
