"""Square-root (pretty-good) measurement decoder and its exact error probability."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from covertmac import qlinalg as ql
from covertmac.channel import CqTable, marginals
from covertmac.infomeasures import InputDistribution
from covertmac.codingsim.codebook import Codebook, check_dim, receiver_state
from covertmac.codingsim.typical import cond_typical_projector, typical_projector


@dataclass(frozen=True, eq=False)
class DecoderPovm:
    """``elements[m1, m2]`` on ``B^n`` plus the completion ``I - sum(elements)``."""

    elements: np.ndarray
    completion: np.ndarray

    def completeness_residual(self) -> float:
        d = self.completion.shape[0]
        total = self.elements.sum(axis=(0, 1)) + self.completion
        return float(np.max(np.abs(total - np.eye(d))))


def srm(upsilons: np.ndarray, support_cut: float | None = None) -> DecoderPovm:
    """Square-root measurement ``S^{-1/2} U_m S^{-1/2}`` with ``S = sum_m U_m``.

    ``upsilons`` has shape ``(M1, M2, d, d)``. The inverse square root acts on
    ``supp(S)``; whatever lies outside it goes to the completion.
    """
    d = upsilons.shape[-1]
    S = upsilons.sum(axis=(0, 1))
    S = (S + S.conj().T) / 2
    s_inv_half = ql.mpow(S, -0.5, support_only=True, support_cut=support_cut)
    elements = s_inv_half @ upsilons @ s_inv_half
    elements = (elements + np.conj(np.swapaxes(elements, -1, -2))) / 2
    completion = np.eye(d) - elements.sum(axis=(0, 1))
    return DecoderPovm(elements, (completion + completion.conj().T) / 2)


def build_srm_decoder(
    cb: Codebook,
    table: CqTable,
    dist: InputDistribution,
    delta: float,
    nested: bool = False,
) -> DecoderPovm:
    """Decoder with ``U_m = P P(codeword m) P``, ``P`` the typical projector of ``rho_B``."""
    n = cb.n
    d = check_dim(table.d_B, n)
    code_proj = typical_projector(marginals(table, dist).rho_B, n, delta)
    M1, M2 = cb.sizes
    ups = np.empty((M1, M2, d, d), dtype=complex)
    cache: dict = {}
    for m1, m2 in cb.pairs():
        word = cb.codeword(m1, m2)
        key = tuple(map(tuple, word))
        if key not in cache:
            cond = cond_typical_projector(table, dist, *word, {1, 2, 3}, delta, nested=nested)
            cache[key] = code_proj @ cond @ code_proj
        ups[m1, m2] = cache[key]
    return srm(ups)


def exact_error(cb: Codebook, dec: DecoderPovm, table: CqTable) -> float:
    """Average over message pairs of ``tr[(I - Lambda_m) rho_{B^n | m}]``."""
    errs = [
        1.0 - float(np.trace(dec.elements[m1, m2] @ receiver_state(cb, m1, m2, table)).real)
        for m1, m2 in cb.pairs()
    ]
    return float(np.clip(np.mean(errs), 0.0, 1.0))
