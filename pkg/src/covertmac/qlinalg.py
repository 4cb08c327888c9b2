"""Dense complex linear algebra for small Hilbert spaces.

Matrices are plain ``numpy`` arrays. Factor ordering is fixed globally:
``A1 (x) A2 (x) A3`` on the input side and ``B (x) E`` on the output side,
with the usual row-major Kronecker index convention. All logarithms are
base 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Callable, Iterable, Sequence

import numpy as np

TOL_HERM = 1e-10
TOL_TR = 1e-10
TOL_PSD = 1e-10
TOL_PROJ = 1e-9
TOL_EIG = 1e-10
SUPPORT_CUT = 1e-12


class DimensionError(ValueError):
    """Raised when operator dimensions are inconsistent."""


class NotHermitianError(ValueError):
    """Raised when an operator expected to be Hermitian is not."""


class NotPhysicalError(ValueError):
    """Raised when an operator is not a valid density matrix."""


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in descending order and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionError(f"expected a 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _square(m) -> np.ndarray:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    return a


def hermiticity_residual(m) -> float:
    a = _square(m)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def is_hermitian(m, tol: float = TOL_HERM) -> bool:
    return hermiticity_residual(m) <= tol


def check_density_matrix(
    m,
    tol_herm: float = TOL_HERM,
    tol_tr: float = TOL_TR,
    tol_psd: float = TOL_PSD,
) -> np.ndarray:
    """Validate ``m`` as a quantum state and return it as a complex array.

    Raises:
        NotPhysicalError: if ``m`` is not Hermitian, not unit trace, or has an
            eigenvalue below ``-tol_psd``.
    """
    a = _square(m)
    herm = hermiticity_residual(a)
    if herm > tol_herm:
        raise NotPhysicalError(f"not Hermitian (residual {herm:.3g})")
    tr = np.trace(a).real
    if abs(tr - 1.0) > tol_tr:
        raise NotPhysicalError(f"trace {tr:.12g} differs from 1")
    lam_min = float(np.linalg.eigvalsh((a + a.conj().T) / 2)[0])
    if lam_min < -tol_psd:
        raise NotPhysicalError(f"negative eigenvalue {lam_min:.3g}")
    return a


def is_density_matrix(m, **tols) -> bool:
    try:
        check_density_matrix(m, **tols)
    except (NotPhysicalError, DimensionError, ValueError):
        return False
    return True


def is_projector(m, tol_herm: float = TOL_HERM, tol_proj: float = TOL_PROJ) -> bool:
    a = _square(m)
    if hermiticity_residual(a) > tol_herm:
        return False
    return float(np.max(np.abs(a @ a - a), initial=0.0)) <= tol_proj


def tensor_product(*factors) -> np.ndarray:
    """Kronecker product of the factors, left to right."""
    if not factors:
        raise ValueError("need at least one factor")
    return reduce(np.kron, (as_matrix(f) for f in factors))


def tensor_power(m, n: int) -> np.ndarray:
    if n < 1:
        raise ValueError("tensor power needs n >= 1")
    return tensor_product(*([m] * n))


def partial_trace(m, factor_dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every factor not listed in ``keep`` (0-based factor indices).

    The kept factors stay in their original order.
    """
    a = _square(m)
    dims = [int(d) for d in factor_dims]
    total = int(np.prod(dims)) if dims else 1
    if total != a.shape[0]:
        raise DimensionError(f"factor dims {dims} do not match matrix dimension {a.shape[0]}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {len(dims)} factors")
    nf = len(dims)
    t = a.reshape(dims + dims)
    # einsum subscripts: row index i_k, column index j_k; traced factors share a label
    letters = iter("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ")
    rows = [next(letters) for _ in range(nf)]
    cols = [rows[k] if k not in keep else next(letters) for k in range(nf)]
    out = [rows[k] for k in keep] + [cols[k] for k in keep]
    res = np.einsum("".join(rows) + "".join(cols) + "->" + "".join(out), t)
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return res.reshape(d_keep, d_keep)


def hermitian_eig(h, tol_herm: float = TOL_HERM) -> SpectralDecomposition:
    """Full spectral decomposition of a Hermitian matrix, eigenvalues descending.

    Each eigenvector's phase is fixed so that its first non-negligible
    component is real and positive; eigenvectors sharing an eigenvalue are
    ordered lexicographically by their components, which makes the output
    deterministic for a given input.
    """
    a = _square(h)
    herm = hermiticity_residual(a)
    if herm > tol_herm:
        raise NotHermitianError(f"not Hermitian (residual {herm:.3g})")
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    w = w[::-1].copy()
    v = v[:, ::-1].copy()
    for j in range(v.shape[1]):
        col = v[:, j]
        idx = int(np.argmax(np.abs(col) > 1e-8 * np.max(np.abs(col))))
        v[:, j] = col * (abs(col[idx]) / col[idx])
    scale = max(1.0, float(np.max(np.abs(w), initial=0.0)))
    order = sorted(
        range(len(w)),
        key=lambda j: (
            -round(w[j] / (scale * 1e-9)),
            tuple(np.round(-v[:, j].real, 9)),
            tuple(np.round(-v[:, j].imag, 9)),
        ),
    )
    return SpectralDecomposition(eigenvalues=w[order], eigenvectors=v[:, order])


def _support_threshold(w: np.ndarray, support_cut: float | None) -> float:
    if support_cut is not None:
        return support_cut
    return SUPPORT_CUT * max(float(np.max(np.abs(w), initial=0.0)), 1e-300)


def matrix_function(
    h,
    f: Callable[[np.ndarray], np.ndarray],
    support_only: bool = False,
    support_cut: float | None = None,
) -> np.ndarray:
    """Apply ``f`` spectrally: ``V f(L) V^dagger``.

    With ``support_only`` the eigenvalues at or below the support cut are
    dropped and the result vanishes on that kernel. The default cut is
    ``1e-12`` times the largest eigenvalue magnitude.
    """
    a = _square(h)
    if hermiticity_residual(a) > TOL_HERM:
        raise NotHermitianError("matrix_function needs a Hermitian input")
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    if support_only:
        keep = w > _support_threshold(w, support_cut)
        w, v = w[keep], v[:, keep]
    if w.size == 0:
        return np.zeros_like(a)
    with np.errstate(all="raise"):
        try:
            fw = np.asarray(f(w), dtype=complex)
        except FloatingPointError as exc:
            raise ValueError(f"function undefined on the retained spectrum: {exc}") from exc
    if not np.all(np.isfinite(fw)):
        raise ValueError("function undefined on the retained spectrum")
    return (v * fw) @ v.conj().T


def mpow(h, p: float, support_only: bool = True, support_cut: float | None = None) -> np.ndarray:
    """Real power of a PSD matrix; negative powers act on the support only."""
    return matrix_function(h, lambda w: np.power(np.clip(w, 0.0, None), p), support_only, support_cut)


def sqrtm_psd(h) -> np.ndarray:
    a = _square(h)
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def support_projector(h, support_cut: float | None = None) -> np.ndarray:
    return matrix_function(h, np.ones_like, support_only=True, support_cut=support_cut)


def trace_norm(m) -> float:
    a = _square(m)
    if is_hermitian(a, 1e-12):
        return float(np.sum(np.abs(np.linalg.eigvalsh((a + a.conj().T) / 2))))
    return float(np.sum(np.linalg.svd(a, compute_uv=False)))


def fidelity(rho, sigma) -> float:
    """Root fidelity ``|| sqrt(rho) sqrt(sigma) ||_1``."""
    r, s = _square(rho), _square(sigma)
    if r.shape != s.shape:
        raise DimensionError(f"shape mismatch {r.shape} vs {s.shape}")
    return float(np.sum(np.linalg.svd(sqrtm_psd(r) @ sqrtm_psd(s), compute_uv=False)))


def psd_project(m, tol: float = TOL_PSD) -> np.ndarray:
    """Clip small negative eigenvalues and renormalize to unit trace.

    Raises:
        NotPhysicalError: if an eigenvalue lies below ``-tol``, which signals a
            genuinely unphysical operator rather than rounding drift.
    """
    a = _square(m)
    if hermiticity_residual(a) > TOL_HERM:
        raise NotHermitianError("psd_project needs a Hermitian input")
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    if w[0] < -tol:
        raise NotPhysicalError(f"eigenvalue {w[0]:.3g} below -{tol:g}")
    w = np.clip(w, 0.0, None)
    total = w.sum()
    if total <= 0:
        raise NotPhysicalError("operator has no positive spectrum")
    out = (v * (w / total)) @ v.conj().T
    return (out + out.conj().T) / 2


def min_eig(h) -> float:
    a = _square(h)
    return float(np.linalg.eigvalsh((a + a.conj().T) / 2)[0])


def projector_intersection(p, q, tol: float = 1e-9) -> np.ndarray:
    """Projector onto ``range(p) & range(q)`` for two orthogonal projectors."""
    a, b = _square(p), _square(q)
    w, v = np.linalg.eigh((a + b) / 2)
    keep = w > 1.0 - tol
    vk = v[:, keep]
    return vk @ vk.conj().T


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Ginibre-ensemble random state of the given rank (full rank by default)."""
    k = dim if rank is None else rank
    g = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (g + g.conj().T) / 2
