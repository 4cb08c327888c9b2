"""Small reference channels with known structure."""

from __future__ import annotations

import numpy as np

from covertmac.channel import CqTable


def pure_qubit(theta: float) -> np.ndarray:
    """``|psi><psi|`` with ``psi = (cos theta, sin theta)``."""
    v = np.array([np.cos(theta), np.sin(theta)], dtype=complex)
    return np.outer(v, v.conj())


def parity_channel(theta_b: float = 0.675, theta_e: float = 0.3) -> CqTable:
    """Binary alphabets, qubit B and E.

    The receiver sees ``pure(+-theta_b)`` keyed on ``x1 xor x2``; the warden
    sees ``pure(theta_e)`` or ``pure(pi/2 - theta_e)`` keyed on
    ``x1 xor x2 xor x3``. ``rho0`` is the even mixture of the two warden
    states, so uniform inputs are covert and the warden learns nothing about
    either message on its own.
    """
    b = np.empty((2, 2, 2, 2, 2), dtype=complex)
    e = np.empty_like(b)
    for x1, x2, x3 in np.ndindex(2, 2, 2):
        b[x1, x2, x3] = pure_qubit(theta_b if (x1 ^ x2) == 0 else -theta_b)
        e[x1, x2, x3] = pure_qubit(theta_e if (x1 ^ x2 ^ x3) == 0 else np.pi / 2 - theta_e)
    rho0 = (pure_qubit(theta_e) + pure_qubit(np.pi / 2 - theta_e)) / 2
    return CqTable.from_marginals(b, e, rho0)


def warden_blind_channel(theta_b: float = 0.675, sigma: np.ndarray | None = None) -> CqTable:
    """Receiver as in :func:`parity_channel`; the warden always sees ``sigma = rho0``."""
    sigma = np.eye(2, dtype=complex) / 2 if sigma is None else np.asarray(sigma, dtype=complex)
    b = np.empty((2, 2, 2, 2, 2), dtype=complex)
    for x1, x2, x3 in np.ndindex(2, 2, 2):
        b[x1, x2, x3] = pure_qubit(theta_b if (x1 ^ x2) == 0 else -theta_b)
    e = np.broadcast_to(sigma, (2, 2, 2) + sigma.shape)
    return CqTable.from_marginals(b, e, sigma)


def constant_channel(rho_b: np.ndarray, rho_e: np.ndarray, sizes=(2, 2, 2), rho0=None) -> CqTable:
    """Every input produces ``rho_b (x) rho_e``."""
    b = np.broadcast_to(rho_b, tuple(sizes) + rho_b.shape)
    e = np.broadcast_to(rho_e, tuple(sizes) + rho_e.shape)
    return CqTable.from_marginals(b, e, rho_e if rho0 is None else rho0)


def classical_table(p_b: np.ndarray, p_e: np.ndarray, q0: np.ndarray) -> CqTable:
    """Diagonal table from conditional laws ``p_b[x1, x2, x3, y]`` and ``p_e[x1, x2, x3, z]``."""
    p_b, p_e = np.asarray(p_b, dtype=float), np.asarray(p_e, dtype=float)
    b = np.zeros(p_b.shape + (p_b.shape[-1],), dtype=complex)
    e = np.zeros(p_e.shape + (p_e.shape[-1],), dtype=complex)
    for idx in np.ndindex(*p_b.shape[:3]):
        b[idx] = np.diag(p_b[idx])
        e[idx] = np.diag(p_e[idx])
    return CqTable.from_marginals(b, e, np.diag(np.asarray(q0, dtype=float)).astype(complex))
