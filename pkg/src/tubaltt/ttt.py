"""Tubal tensor train (TTT): format, TTT-SVD construction, contraction.

A TTT represents a hyper-tensor ``X`` of size ``I_1 x ... x I_N`` with tube
length ``T`` (stored as an ``I_1 x ... x I_N x T`` array) by cores
``Y[n]`` of shape ``R_{n-1} x I_n x R_n x T`` with ``R_0 = R_N = 1``. Every
tube of ``X`` is the chain of t-products
``Y[0][0, i_1] * Y[1][:, i_2] * ... * Y[N-1][:, i_N, 0]``.

The tube mode is always stored last, so a truncated T-SVD factor
``U`` of shape ``(r_{n-1} I_n) x r_n x T`` becomes a core by a column-major
reshape alone.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleRankError, ShapeMismatchError
from .tensor_core import (
    as_real,
    fft_tube,
    fill_conjugate_slices,
    frobenius_norm,
    half_slices,
    ifft_tube,
    reshape,
)
from .tprod import tprod_fast, ttranspose
from .tsvd import tsvd_tolerance, tsvd_truncated
from .tt import check_rank_profile


@dataclass
class TttFormat:
    """TTT cores; ``local_errors`` are the per-step truncation errors ``delta_n``."""

    cores: list
    local_errors: list = field(default_factory=list)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.cores:
            raise InfeasibleRankError("a TTT format needs at least one core")
        T = self.cores[0].shape[-1] if self.cores[0].ndim == 4 else None
        prev = 1
        for n, g in enumerate(self.cores):
            if g.ndim != 4:
                raise InfeasibleRankError(
                    f"core {n} has shape {g.shape}, expected R x I x R' x T"
                )
            if g.shape[3] != T:
                raise InfeasibleRankError(f"core {n} has tube length {g.shape[3]}, expected {T}")
            if g.shape[0] != prev:
                raise InfeasibleRankError(
                    f"rank chain broken at core {n}: left rank {g.shape[0]} != {prev}"
                )
            prev = g.shape[2]
        if prev != 1:
            raise InfeasibleRankError(f"last core has right rank {prev}, expected 1")

    @property
    def order(self):
        return len(self.cores)

    @property
    def tube_length(self):
        return self.cores[0].shape[3]

    @property
    def shape(self):
        """Hyper-tensor sizes ``(I_1, ..., I_N)`` without the tube mode."""
        return tuple(g.shape[1] for g in self.cores)

    @property
    def full_shape(self):
        return self.shape + (self.tube_length,)

    @property
    def ranks(self):
        """Boundary-augmented profile ``(1, R_1, ..., R_{N-1}, 1)``."""
        return (1,) + tuple(g.shape[2] for g in self.cores)

    @property
    def internal_ranks(self):
        return self.ranks[1:-1]

    def param_count(self):
        return sum(g.size for g in self.cores)

    def numel(self):
        return math.prod(self.full_shape)


def ttt_param_count(f=None, shape=None, ranks=None, T=None):
    """Stored entries ``sum_n R_{n-1} I_n R_n T``.

    Pass either a :class:`TttFormat` or ``shape`` (``I_1..I_N``), internal
    ``ranks`` and tube length ``T``.
    """
    if f is not None:
        return f.param_count()
    full = (1,) + tuple(ranks) + (1,)
    if len(full) != len(shape) + 1:
        raise InfeasibleRankError(f"{len(ranks)} internal ranks do not fit shape {tuple(shape)}")
    return sum(full[n] * shape[n] * full[n + 1] for n in range(len(shape))) * T


def _split_input(x):
    x = as_real(x)
    if x.ndim < 3:
        raise ShapeMismatchError(
            f"TTT needs at least two hyper-modes plus the tube mode, got shape {x.shape}"
        )
    return x, x.shape[:-1], x.shape[-1]


def _carry(f):
    """``S * V^T`` of a T-SVD."""
    return tprod_fast(f.s, ttranspose(f.v))


def _ttt_sweep(x, choose):
    """Alternate column-major reshapes and truncated T-SVDs.

    ``choose(n, c)`` returns the T-SVD factors of the step-``n`` hyper-matrix ``c``.
    """
    x, shape, T = _split_input(x)
    N = len(shape)
    cores, errors = [], []
    c = x
    prev = 1
    for n in range(N - 1):
        rows = prev * shape[n]
        c = reshape(c, (rows, c.size // (rows * T), T))
        f = choose(n, c)
        r = f.rank
        cores.append(reshape(f.u, (prev, shape[n], r, T)))
        errors.append(f.error)
        c = _carry(f)
        prev = r
    cores.append(reshape(c, (prev, shape[-1], 1, T)))
    return TttFormat(cores, errors)


def ttt_svd(x, ranks):
    """TTT-SVD with a prescribed internal tubal rank profile ``(r_1..r_{N-1})``."""
    x, shape, _ = _split_input(x)
    ranks = check_rank_profile(shape, ranks)
    return _ttt_sweep(x, lambda n, c: tsvd_truncated(c, ranks[n]))


def ttt_svd_tolerance(x, eps_rel):
    """TTT-SVD whose global relative error is at most ``eps_rel``.

    Every step gets the same local budget ``eps_rel * ||x|| / sqrt(N-1)``.
    """
    if eps_rel < 0:
        raise ValueError(f"eps_rel must be nonnegative, got {eps_rel}")
    x, shape, _ = _split_input(x)
    delta = eps_rel * frobenius_norm(x) / math.sqrt(len(shape) - 1)
    return _ttt_sweep(x, lambda n, c: tsvd_tolerance(c, delta))


def ttt_contract(f):
    """Full ``I_1 x ... x I_N x T`` tensor of a TTT format.

    The chain of t-products is evaluated slice-wise in the Fourier domain
    (half the slices, the rest by conjugate symmetry) with a single inverse
    FFT at the end.
    """
    cores = f.cores if isinstance(f, TttFormat) else list(f)
    T = cores[0].shape[3]
    h = half_slices(T)
    hats = [fft_tube(g)[..., :h] for g in cores]
    w = hats[0][0]  # I_1 x R_1 x h
    for g in hats[1:]:
        r, n, r2, _ = g.shape
        w = np.einsum("prk,rnsk->pnsk", w, g)
        w = reshape(w, (w.shape[0] * n, r2, h))
    out = np.empty((w.shape[0], T), dtype=np.complex128)
    out[:, :h] = w[:, 0, :]
    fill_conjugate_slices(out)
    shape = tuple(g.shape[1] for g in cores)
    return reshape(ifft_tube(out), shape + (T,))


def ttt_tube(f, index):
    """Tube ``X(i_1, ..., i_N, :)`` (0-based indices) via chained t-products."""
    if len(index) != f.order:
        raise IndexError(f"need {f.order} indices, got {len(index)}")
    for n, (i, size) in enumerate(zip(index, f.shape)):
        if not 0 <= i < size:
            raise IndexError(f"index {i} out of range for mode {n} of size {size}")
    acc = f.cores[0][:, index[0], :, :]
    for g, i in zip(f.cores[1:], index[1:]):
        acc = tprod_fast(acc, g[:, i, :, :])
    return acc[0, 0, :]
