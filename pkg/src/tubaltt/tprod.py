"""t-product algebra on real third-order tensors.

The t-product ``C = X * Y`` of ``X`` (I1 x I2 x T) and ``Y`` (I2 x I4 x T) is
the matrix product in which scalar multiplication is replaced by circular
convolution of tubes. :func:`tprod_reference` materializes the block-circulant
matrix and is kept as the slow ground truth; :func:`tprod_fast` works slice by
slice in the Fourier domain and only multiplies ``ceil((T+1)/2)`` slices.
"""

import numpy as np

from .errors import ShapeMismatchError
from .tensor_core import (
    DEFAULT_REAL_TOL,
    as_real,
    fft_tube,
    fill_conjugate_slices,
    half_slices,
    ifft_tube,
)


def _check_conformable(x, y):
    if x.ndim != 3 or y.ndim != 3:
        raise ShapeMismatchError(f"t-product needs third-order operands, got {x.shape} and {y.shape}")
    if x.shape[1] != y.shape[0]:
        raise ShapeMismatchError(f"inner sizes differ: {x.shape} * {y.shape}")
    if x.shape[2] != y.shape[2]:
        raise ShapeMismatchError(f"tube lengths differ: {x.shape[2]} vs {y.shape[2]}")


def circ(x):
    """Block-circulant matrix of size ``(I1*T) x (I2*T)``.

    Block ``(i, j)`` (0-based) is frontal slice ``(i - j) mod T``.
    """
    x = as_real(x)
    I1, I2, T = x.shape
    out = np.empty((I1 * T, I2 * T))
    for i in range(T):
        for j in range(T):
            out[i * I1:(i + 1) * I1, j * I2:(j + 1) * I2] = x[:, :, (i - j) % T]
    return out


def unfold(y):
    """Stack the frontal slices of ``y`` vertically: ``(I2*T) x I4``."""
    y = np.asarray(y)
    I2, I4, T = y.shape
    return np.concatenate([y[:, :, k] for k in range(T)], axis=0)


def fold(m, shape):
    """Inverse of :func:`unfold` for a target ``shape = (I1, I4, T)``."""
    I1, I4, T = shape
    return np.stack([m[k * I1:(k + 1) * I1, :] for k in range(T)], axis=2)


def tprod_reference(x, y):
    """``fold(circ(x) @ unfold(y))``. O((I*T)^2) memory; use for checking only."""
    x = as_real(x)
    y = as_real(y)
    _check_conformable(x, y)
    return fold(circ(x) @ unfold(y), (x.shape[0], y.shape[1], x.shape[2]))


def slice_products(x_hat, y_hat, all_slices=False):
    """Slice-wise matrix products of Fourier-domain tensors.

    Only the first ``ceil((T+1)/2)`` slices are multiplied; the rest are
    conjugate mirrors. ``all_slices=True`` multiplies every slice instead.
    """
    T = x_hat.shape[2]
    c_hat = np.empty((x_hat.shape[0], y_hat.shape[1], T), dtype=np.complex128)
    n = T if all_slices else half_slices(T)
    c_hat[:, :, :n] = np.einsum("ijk,jlk->ilk", x_hat[:, :, :n], y_hat[:, :, :n])
    if not all_slices:
        fill_conjugate_slices(c_hat)
    return c_hat


def tprod_fast(x, y, all_slices=False, tol=DEFAULT_REAL_TOL):
    """FFT-based t-product. Matches :func:`tprod_reference` to round-off."""
    x = as_real(x)
    y = as_real(y)
    _check_conformable(x, y)
    c_hat = slice_products(fft_tube(x), fft_tube(y), all_slices=all_slices)
    return ifft_tube(c_hat, enforce_real=True, tol=tol)


tprod = tprod_fast


def ttranspose(x):
    """t-transpose: transpose every frontal slice, reverse slices 2..T."""
    x = np.asarray(x)
    if x.ndim != 3:
        raise ShapeMismatchError(f"ttranspose needs a third-order tensor, got {x.shape}")
    T = x.shape[2]
    order = (-np.arange(T)) % T
    return np.ascontiguousarray(np.transpose(x, (1, 0, 2))[:, :, order])


def identity_tensor(size, T):
    if size < 1 or T < 1:
        raise ValueError(f"identity_tensor needs size, T >= 1, got {size}, {T}")
    out = np.zeros((size, size, T))
    out[:, :, 0] = np.eye(size)
    return out


def is_partially_orthogonal(q, tol=1e-8):
    """True iff ``||Q^T * Q - I_R||_F <= tol`` for an ``I x R x T`` tensor."""
    q = as_real(q)
    if q.ndim != 3:
        raise ShapeMismatchError(f"expected a third-order tensor, got {q.shape}")
    gram = tprod_fast(ttranspose(q), q)
    return float(np.linalg.norm(gram - identity_tensor(q.shape[1], q.shape[2]))) <= tol


def is_orthogonal(q, tol=1e-8):
    """True iff ``Q^T * Q = Q * Q^T = I`` within ``tol`` in Frobenius norm."""
    q = as_real(q)
    if q.ndim != 3 or q.shape[0] != q.shape[1]:
        raise ShapeMismatchError(f"orthogonality needs an I x I x T tensor, got {q.shape}")
    ident = identity_tensor(q.shape[0], q.shape[2])
    qt = ttranspose(q)
    left = np.linalg.norm(tprod_fast(qt, q) - ident)
    right = np.linalg.norm(tprod_fast(q, qt) - ident)
    return bool(left <= tol and right <= tol)


def is_f_diagonal(s, tol=1e-8):
    """True iff every Fourier slice of ``s`` is diagonal up to ``tol`` (entrywise)."""
    s = np.asarray(s)
    if s.ndim != 3:
        raise ShapeMismatchError(f"expected a third-order tensor, got {s.shape}")
    s_hat = fft_tube(s)
    off = ~np.eye(s.shape[0], s.shape[1], dtype=bool)
    if not off.any():
        return True
    return bool(np.max(np.abs(s_hat[off, :])) <= tol)


def circular_convolve(a, b):
    """Direct O(T^2) circular convolution of two tubes."""
    a = np.asarray(a)
    b = np.asarray(b)
    T = a.shape[0]
    out = np.zeros(T, dtype=np.result_type(a, b))
    for t in range(T):
        for s in range(T):
            out[t] += a[s] * b[(t - s) % T]
    return out


def tubal_outer_product(vectors):
    """Tubal outer product of hyper-vectors ``a_n`` (each ``I_n x T``).

    Entry tube ``(i_1, ..., i_N)`` is ``a_1(i_1) ⊛ ... ⊛ a_N(i_N)``; the
    result has shape ``I_1 x ... x I_N x T``.
    """
    vectors = [as_real(a) for a in vectors]
    if not vectors:
        raise ValueError("need at least one hyper-vector")
    T = vectors[0].shape[-1]
    for a in vectors:
        if a.ndim != 2:
            raise ShapeMismatchError(f"hyper-vectors must be I x T matrices, got {a.shape}")
        if a.shape[1] != T:
            raise ShapeMismatchError(f"tube lengths differ: {a.shape[1]} vs {T}")
    out_hat = np.fft.fft(vectors[0], axis=-1)
    for a in vectors[1:]:
        a_hat = np.fft.fft(a, axis=-1)
        out_hat = out_hat[..., None, :] * a_hat.reshape((1,) * (out_hat.ndim - 1) + a_hat.shape)
    return ifft_tube(out_hat)
