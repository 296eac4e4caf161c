"""Seeded synthetic instances: planted TTT/TT/T-SVD tensors and Bernoulli masks.

All generators take a ``numpy.random.Generator``; :func:`make_rng` builds the
PCG64 generator the CLI uses, so a seed fully determines every byte written.
"""

import numpy as np

from .tensor_core import frobenius_norm
from .tprod import tprod_fast, ttranspose
from .tsvd import tsvd_full
from .tt import TtFormat, check_rank_profile
from .ttt import TttFormat, ttt_contract


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def random_ttt(rng, shape, T, ranks):
    """TTT format with i.i.d. standard normal cores."""
    ranks = check_rank_profile(shape, ranks)
    full = (1,) + ranks + (1,)
    cores = [
        rng.standard_normal((full[n], shape[n], full[n + 1], T)) for n in range(len(shape))
    ]
    return TttFormat(cores)


def random_tt(rng, shape, ranks, complex_=False):
    ranks = check_rank_profile(shape, ranks)
    full = (1,) + ranks + (1,)
    cores = []
    for n in range(len(shape)):
        g = rng.standard_normal((full[n], shape[n], full[n + 1]))
        if complex_:
            g = g + 1j * rng.standard_normal(g.shape)
        cores.append(g)
    return TtFormat(cores)


def planted_ttt(rng, shape, T, ranks, noise=0.0):
    """Tensor contracted from random cores, plus Gaussian noise of relative size ``noise``."""
    x = ttt_contract(random_ttt(rng, shape, T, ranks))
    if noise > 0:
        x = add_noise(rng, x, noise)
    return x


def add_noise(rng, x, level):
    """``x + n`` with ``||n||_F = level * ||x||_F``."""
    n = rng.standard_normal(x.shape)
    return x + n * (level * frobenius_norm(x) / frobenius_norm(n))


def random_orthogonal_factor(rng, n, r, T):
    """``n x r x T`` tensor with ``Q^T * Q = I_r`` (from a full T-SVD)."""
    f = tsvd_full(rng.standard_normal((n, max(n, r), T)))
    return f.u[:, :r, :]


def planted_tsvd(rng, I1, I2, T, rank, noise=0.0):
    """``U * S * V^T`` with partially orthogonal ``U``, ``V`` and random positive tubal spectrum."""
    u = random_orthogonal_factor(rng, I1, rank, T)
    v = random_orthogonal_factor(rng, I2, rank, T)
    s = np.zeros((rank, rank, T))
    vals = np.sort(rng.uniform(1.0, 10.0, size=rank))[::-1]
    s[np.arange(rank), np.arange(rank), 0] = vals
    x = tprod_fast(tprod_fast(u, s), ttranspose(v))
    if noise > 0:
        x = add_noise(rng, x, noise)
    return x


def bernoulli_mask(rng, shape, missing):
    """0/1 float mask; each entry is missing (0) with probability ``missing``."""
    if not 0.0 <= missing <= 1.0:
        raise ValueError(f"missing fraction must lie in [0, 1], got {missing}")
    return (rng.random(shape) >= missing).astype(np.float64)


def random_feasible_ranks(rng, shape, max_rank):
    """Internal rank profile drawn uniformly from ``1..min(max_rank, cap_n)``."""
    ranks = []
    prev = 1
    for n in range(len(shape) - 1):
        cap = min(prev * shape[n], int(np.prod(shape[n + 1:])), max_rank)
        r = int(rng.integers(1, cap + 1))
        ranks.append(r)
        prev = r
    return tuple(ranks)
