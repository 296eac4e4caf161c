"""Fourier-domain T-SVD: truncated (fixed tubal rank) and tolerance-driven.

Each Fourier slice ``k < ceil((T+1)/2)`` is factored by a complex matrix SVD;
the remaining slices follow from conjugate symmetry. Slice 0 and, for even
``T``, the Nyquist slice are real for real input and are factored as real
matrices so that the spatial-domain factors come out exactly real.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleRankError, NumericFailureError, ShapeMismatchError
from .tensor_core import (
    as_real,
    fft_tube,
    half_slices,
    ifft_tube,
    is_self_conjugate,
    smallest_rank,
)
from .tprod import tprod_fast, ttranspose


@dataclass
class TsvdFactors:
    """``X ≈ U * S * V^T`` with ``u`` I1xRxT, ``s`` RxRxT (f-diagonal), ``v`` I2xRxT.

    ``sigma`` holds the Fourier-domain singular values of every slice
    (``T x min(I1, I2)``, not truncated); ``error`` is the Frobenius norm of
    the truncation residual obtained from them by Parseval.
    """

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray
    sigma: np.ndarray = field(repr=False)
    error: float = 0.0

    @property
    def rank(self):
        return self.u.shape[1]


def _slice_svd(a):
    try:
        return np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericFailureError(f"SVD failed to converge: {exc}") from exc


def slice_svds(x):
    """Thin SVDs of Fourier slices ``0..ceil((T+1)/2)-1`` of a real I1xI2xT tensor.

    Returns ``(x_hat, factors)`` where ``factors[k] = (U, s, Vh)``.
    """
    x = as_real(x)
    if x.ndim != 3:
        raise ShapeMismatchError(f"T-SVD needs a third-order tensor, got {x.shape}")
    T = x.shape[2]
    x_hat = fft_tube(x)
    factors = []
    for k in range(half_slices(T)):
        a = x_hat[:, :, k]
        if is_self_conjugate(k, T):
            a = a.real
        factors.append(_slice_svd(a))
    return x_hat, factors


def full_spectrum(factors, T):
    """Singular values of all ``T`` slices (mirrors copied), shape ``T x m``."""
    h = half_slices(T)
    sig = np.stack([f[1] for f in factors], axis=0)
    out = np.empty((T, sig.shape[1]))
    out[:h] = sig
    for k in range(h, T):
        out[k] = sig[T - k]
    return out


def tail_energy(sigma, r):
    """``sum_k sum_{j >= r} sigma[k, j]^2`` (spatial error squared times ``T``)."""
    return float(np.sum(sigma[:, r:] ** 2))


def _assemble(factors, r, shape, sigma):
    I1, I2, T = shape
    h = half_slices(T)
    u_hat = np.zeros((I1, r, T), dtype=np.complex128)
    s_hat = np.zeros((r, r, T), dtype=np.complex128)
    v_hat = np.zeros((I2, r, T), dtype=np.complex128)
    diag = np.arange(r)
    for k in range(h):
        U, s, Vh = factors[k]
        u_hat[:, :, k] = U[:, :r]
        s_hat[diag, diag, k] = s[:r]
        v_hat[:, :, k] = Vh[:r, :].conj().T
    for k in range(h, T):
        u_hat[:, :, k] = np.conj(u_hat[:, :, T - k])
        s_hat[:, :, k] = s_hat[:, :, T - k]
        v_hat[:, :, k] = np.conj(v_hat[:, :, T - k])
    error = np.sqrt(tail_energy(sigma, r) / T)
    return TsvdFactors(
        u=ifft_tube(u_hat),
        s=ifft_tube(s_hat),
        v=ifft_tube(v_hat),
        sigma=sigma,
        error=float(error),
    )


def tsvd_truncated(x, r):
    """Rank-``r`` truncated T-SVD."""
    x = as_real(x)
    if x.ndim != 3:
        raise ShapeMismatchError(f"T-SVD needs a third-order tensor, got {x.shape}")
    m = min(x.shape[0], x.shape[1])
    if not 1 <= r <= m:
        raise InfeasibleRankError(f"tubal rank {r} outside 1..{m} for shape {x.shape}")
    _, factors = slice_svds(x)
    sigma = full_spectrum(factors, x.shape[2])
    return _assemble(factors, r, x.shape, sigma)


def tsvd_full(x):
    x = as_real(x)
    return tsvd_truncated(x, min(x.shape[0], x.shape[1]))


def tsvd_tolerance(x, delta):
    """Smallest tubal rank ``R`` with ``||x - U*S*V^T||_F <= delta``.

    The spatial budget ``delta`` becomes the Fourier budget ``delta^2 * T``
    because ``sum |x_hat|^2 = T * sum |x|^2`` under the unnormalized FFT.
    """
    if delta < 0:
        raise ValueError(f"delta must be nonnegative, got {delta}")
    x = as_real(x)
    if x.ndim != 3:
        raise ShapeMismatchError(f"T-SVD needs a third-order tensor, got {x.shape}")
    T = x.shape[2]
    _, factors = slice_svds(x)
    sigma = full_spectrum(factors, T)
    r = smallest_rank(np.sum(sigma ** 2, axis=0), delta ** 2 * T)
    return _assemble(factors, r, x.shape, sigma)


def tsvd_reconstruct(f):
    """``U * S * V^T``."""
    if f.u.shape[1] != f.s.shape[0] or f.s.shape[1] != f.v.shape[1]:
        raise ShapeMismatchError(
            f"non-conformable factors u{f.u.shape} s{f.s.shape} v{f.v.shape}"
        )
    return tprod_fast(tprod_fast(f.u, f.s), ttranspose(f.v))
