"""Eigenvalue-band typical projectors for product states."""

from __future__ import annotations

from functools import reduce
from typing import Iterable, Sequence

import numpy as np

from covertmac import qlinalg as ql
from covertmac.channel import CqTable, conditional_average, marginals
from covertmac.infomeasures import InputDistribution, von_neumann_entropy
from covertmac.codingsim.codebook import check_dim

BAND_SLACK = 1e-12


def band_projector(local_states: Sequence[np.ndarray], delta: float) -> np.ndarray:
    """Projector onto the product eigenvectors of ``(x)_t local_states[t]`` whose
    eigenvalue product ``lam`` obeys ``| -log2(lam)/n - Hbar | <= delta``, where
    ``Hbar`` is the average entropy of the local states.
    """
    n = len(local_states)
    if n == 0:
        raise ValueError("need at least one position")
    check_dim(local_states[0].shape[0], n)
    specs = [ql.hermitian_eig(s) for s in local_states]
    target = float(np.mean([von_neumann_entropy(s) for s in local_states]))
    with np.errstate(divide="ignore"):
        surprisal = [-np.log2(np.clip(sp.eigenvalues, 0.0, None)) for sp in specs]
    rate = reduce(np.add.outer, surprisal).ravel() / n
    mask = np.abs(rate - target) <= delta + BAND_SLACK
    if not mask.any():
        d = int(np.prod([s.shape[0] for s in local_states]))
        return np.zeros((d, d), dtype=complex)
    basis = reduce(np.kron, (sp.eigenvectors for sp in specs))[:, mask]
    return basis @ basis.conj().T


def typical_projector(rho, n: int, delta: float) -> np.ndarray:
    r = ql.check_density_matrix(rho)
    return band_projector([r] * n, delta)


def _local_conditionals(table: CqTable, dist: InputDistribution, seqs, given: set) -> list:
    joint = dist.joint()
    axes = sorted(i - 1 for i in given)
    out = []
    for t in range(len(seqs[0])):
        symbols = [int(seqs[a][t]) for a in axes]
        if len(axes) == 3:
            out.append(np.asarray(table.b_states[tuple(symbols)]))
            continue
        mass, avg = conditional_average(table.b_states, joint, axes, symbols)
        if avg is None:
            raise ValueError(f"conditioning symbols {symbols} at position {t} have zero probability")
        out.append(avg)
    return out


def cond_typical_projector(
    table: CqTable,
    dist: InputDistribution,
    x1n,
    x2n,
    x3n,
    conditioning: Iterable[int],
    delta: float,
    nested: bool = True,
) -> np.ndarray:
    """Conditionally typical projector of the receiver's ``B^n`` system.

    ``conditioning`` lists the transmitters (labels 1-3) whose symbols are
    fixed; the others are averaged out under ``dist``. With ``nested`` the
    projector is intersected with the coarser ones so that
    ``P(x1,x2,x3) <= P(x_i) <= P()`` holds exactly.
    """
    seqs = [np.asarray(x1n), np.asarray(x2n), np.asarray(x3n)]
    if len({len(s) for s in seqs}) != 1:
        raise ValueError("sequence lengths differ")
    given = set(conditioning)
    if not given <= {1, 2, 3}:
        raise ValueError(f"invalid conditioning set {sorted(given)}")
    n = len(seqs[0])
    if not given:
        return typical_projector(marginals(table, dist).rho_B, n, delta)
    raw = band_projector(_local_conditionals(table, dist, seqs, given), delta)
    if not nested:
        return raw
    coarser = [set()] if len(given) == 1 else [{1}, {2}]
    out = raw
    for c in coarser:
        out = ql.projector_intersection(out, cond_typical_projector(table, dist, *seqs, c, delta, nested=True))
    return out
