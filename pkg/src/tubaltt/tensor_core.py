"""Dense tensor substrate: column-major reshape, tube-mode FFT, norms.

Tensors are plain ``numpy.ndarray`` objects of dtype float64 (real) or
complex128 (Fourier domain). The distinguished *tube mode* is always the last
axis. All reshapes in this package follow column-major (Fortran, first index
fastest) linearization so that results match MATLAB-style reshapes; never call
``ndarray.reshape`` with the default C order on tensor data.

Functions here never mutate their inputs.
"""

import math

import numpy as np

from .errors import ResidualImaginaryError, ShapeMismatchError

DEFAULT_REAL_TOL = 1e-8


def as_real(x):
    """Return ``x`` as a float64 array (no copy when already float64)."""
    return np.asarray(x, dtype=np.float64)


def reshape(x, new_shape):
    """Reinterpret ``x`` with ``new_shape`` under column-major linearization.

    Entry order in memory-independent (Fortran) order is preserved: the entry
    at linear offset ``k`` of ``x`` lands at linear offset ``k`` of the result.
    """
    x = np.asarray(x)
    new_shape = tuple(int(s) for s in new_shape)
    if any(s < 0 for s in new_shape):
        raise ShapeMismatchError(f"negative mode size in {new_shape}")
    if math.prod(new_shape) != x.size:
        raise ShapeMismatchError(
            f"cannot reshape {x.shape} ({x.size} entries) to {new_shape} "
            f"({math.prod(new_shape)} entries)"
        )
    return np.reshape(x, new_shape, order="F")


def flat(x):
    """Column-major data vector of ``x``."""
    return np.ravel(np.asarray(x), order="F")


def fft_tube(x):
    """Unnormalized DFT of every tube (fiber along the last mode)."""
    x = np.asarray(x)
    if x.ndim < 2:
        raise ShapeMismatchError(f"fft_tube needs order >= 2, got shape {x.shape}")
    return np.fft.fft(x, axis=-1)


def ifft_tube(x_hat, enforce_real=True, tol=DEFAULT_REAL_TOL):
    """Inverse of :func:`fft_tube` (scales by ``1/T``).

    With ``enforce_real`` the imaginary residue must satisfy
    ``max|imag| <= tol * (1 + max|real|)``; the real part is returned.
    Otherwise the complex result is returned as is.
    """
    x_hat = np.asarray(x_hat)
    out = np.fft.ifft(x_hat, axis=-1)
    if not enforce_real:
        return out
    if out.size == 0:
        return out.real.copy()
    max_imag = float(np.max(np.abs(out.imag)))
    max_real = float(np.max(np.abs(out.real)))
    if max_imag > tol * (1.0 + max_real):
        raise ResidualImaginaryError(max_imag, max_real)
    return np.ascontiguousarray(out.real)


def half_slices(T):
    """Number of Fourier slices computed explicitly for tube length ``T``.

    Equals ``ceil((T + 1) / 2)``; for even ``T`` this includes the
    self-conjugate Nyquist slice ``T/2`` (0-based).
    """
    return T // 2 + 1


def mirror_index(k, T):
    """0-based index of the conjugate partner of Fourier slice ``k``."""
    return (T - k) % T


def is_self_conjugate(k, T):
    return mirror_index(k, T) == k


def fill_conjugate_slices(x_hat, conj=True):
    """Fill slices ``ceil((T+1)/2)..T-1`` (0-based) from their partners in place.

    ``conj=False`` copies without conjugation (used for singular values).
    """
    T = x_hat.shape[-1]
    for k in range(half_slices(T), T):
        partner = x_hat[..., T - k]
        x_hat[..., k] = np.conj(partner) if conj else partner
    return x_hat


def frobenius_norm(x):
    return float(np.linalg.norm(np.ravel(np.asarray(x))))


def relative_error(x, y):
    """``||x - y||_F / ||x||_F`` with ``x`` the reference."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ShapeMismatchError(f"shape mismatch {x.shape} vs {y.shape}")
    nx = frobenius_norm(x)
    if nx == 0.0:
        raise ValueError("relative_error: reference tensor has zero norm")
    return frobenius_norm(x - y) / nx


def frontal_slice(x, k):
    """Frontal slice ``X(:, :, k)`` of a third-order tensor, 1-based ``k``."""
    x = np.asarray(x)
    if x.ndim != 3:
        raise ShapeMismatchError(f"frontal_slice needs a third-order tensor, got {x.shape}")
    if not 1 <= k <= x.shape[2]:
        raise IndexError(f"slice index {k} out of range 1..{x.shape[2]}")
    return x[:, :, k - 1]


def to_third_order(x):
    """View an order-(N+1) tensor as ``I1 x (I2...IN) x T`` (column-major)."""
    x = np.asarray(x)
    if x.ndim < 2:
        raise ShapeMismatchError(f"need at least a tube mode and one more mode, got {x.shape}")
    if x.ndim == 2:
        return reshape(x, (x.shape[0], 1, x.shape[1]))
    return reshape(x, (x.shape[0], math.prod(x.shape[1:-1]), x.shape[-1]))


def smallest_rank(energies, budget):
    """Smallest ``r >= 1`` with ``sum(energies[r:]) <= budget``.

    ``energies`` are per-index squared singular values in nonincreasing
    order (summed over slices where applicable).
    """
    energies = np.asarray(energies, dtype=np.float64)
    m = energies.shape[0]
    if m == 0:
        return 0
    tails = np.concatenate([np.cumsum(energies[::-1])[::-1], [0.0]])
    ok = np.nonzero(tails[1:] <= budget)[0]
    return int(ok[0]) + 1 if ok.size else m
