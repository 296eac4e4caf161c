"""Tensor completion by alternating low-rank projection and data re-imposition.

Iteration (``C_1 = M``)::

    X_n     = L(C_n)
    C_{n+1} = Omega ⊙ M + (1 - Omega) ⊙ X_n

where ``L`` is a TTT (fixed ranks or tolerance) or T-SVD (tubal rank)
approximation. Unobserved entries start at zero.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleRankError, MaskError, ShapeMismatchError
from .tensor_core import as_real, frobenius_norm, reshape, to_third_order
from .tsvd import tsvd_reconstruct, tsvd_truncated
from .tt import check_rank_profile
from .ttt import ttt_contract, ttt_svd, ttt_svd_tolerance


@dataclass
class TttBackend:
    """Low-TTT-rank projection; give exactly one of ``ranks`` / ``tol``."""

    ranks: tuple = None
    tol: float = None

    def __post_init__(self):
        if (self.ranks is None) == (self.tol is None):
            raise ValueError("TTT backend needs exactly one of ranks or tol")

    def check(self, shape):
        if self.ranks is not None:
            check_rank_profile(shape[:-1], self.ranks)

    def __call__(self, c):
        if self.ranks is not None:
            return ttt_contract(ttt_svd(c, self.ranks))
        return ttt_contract(ttt_svd_tolerance(c, self.tol))


@dataclass
class TsvdBackend:
    """Low-tubal-rank projection of the ``I1 x (I2...IN) x T`` view."""

    rank: int

    def check(self, shape):
        mid = int(np.prod(shape[1:-1])) if len(shape) > 2 else 1
        m = min(shape[0], mid)
        if not 1 <= self.rank <= m:
            raise InfeasibleRankError(f"tubal rank {self.rank} outside 1..{m} for shape {shape}")

    def __call__(self, c):
        c3 = to_third_order(c)
        return reshape(tsvd_reconstruct(tsvd_truncated(c3, self.rank)), c.shape)


@dataclass
class CompletionProblem:
    observed: np.ndarray
    mask: np.ndarray
    backend: object
    max_iters: int = 100
    stop_tol: float = 1e-4

    def __post_init__(self):
        self.observed = as_real(self.observed)
        self.mask = as_real(self.mask)
        if self.observed.shape != self.mask.shape:
            raise MaskError(
                f"mask shape {self.mask.shape} differs from data shape {self.observed.shape}"
            )
        if not np.all((self.mask == 0.0) | (self.mask == 1.0)):
            raise MaskError("mask entries must be exactly 0 or 1")
        if np.any(self.observed[self.mask == 0.0] != 0.0):
            # M is defined to be zero off the observed set
            self.observed = self.observed * self.mask


@dataclass
class IterationRecord:
    iteration: int
    observed_rel_error: float
    change: float
    full_rel_error: float = None


@dataclass
class CompletionResult:
    """``estimate`` is the last low-rank iterate ``X_n``; ``imputed`` is
    ``C_{n+1}``, i.e. the estimate with observed entries restored."""

    estimate: np.ndarray
    imputed: np.ndarray
    trace: list = field(default_factory=list)
    converged: bool = False


def complete(problem, truth=None, callback=None):
    """Run the completion iteration; returns a :class:`CompletionResult`.

    ``change`` in the trace is ``||X_n - X_{n-1}|| / ||X_{n-1}||``; for the
    first iteration, where no previous estimate exists, it is the relative
    movement of the iterate ``||C_2 - C_1|| / ||C_1||`` (zero when every entry
    is observed). The loop stops once ``change <= stop_tol``.

    ``callback(n, c_next, x_n)`` sees every iterate (used by fidelity tests).
    """
    M, omega = problem.observed, problem.mask
    if truth is not None:
        truth = as_real(truth)
        if truth.shape != M.shape:
            raise ShapeMismatchError(f"truth shape {truth.shape} differs from {M.shape}")
    problem.backend.check(M.shape)
    unobserved = 1.0 - omega
    m_obs = omega * M
    obs_norm = frobenius_norm(m_obs)
    truth_norm = frobenius_norm(truth) if truth is not None else None

    c = M.copy()
    prev = None
    trace = []
    converged = False
    x = c
    for n in range(1, problem.max_iters + 1):
        x = problem.backend(c)
        c_next = m_obs + unobserved * x
        if prev is None:
            base = frobenius_norm(c)
            change = frobenius_norm(c_next - c) / base if base > 0 else 0.0
        else:
            base = frobenius_norm(prev)
            change = frobenius_norm(x - prev) / base if base > 0 else 0.0
        rec = IterationRecord(
            iteration=n,
            observed_rel_error=(frobenius_norm(omega * x - m_obs) / obs_norm) if obs_norm > 0 else 0.0,
            change=float(change),
        )
        if truth is not None and truth_norm > 0:
            rec.full_rel_error = frobenius_norm(x - truth) / truth_norm
        trace.append(rec)
        if callback is not None:
            callback(n, c_next, x)
        c = c_next
        prev = x
        if change <= problem.stop_tol:
            converged = True
            break
    return CompletionResult(estimate=x, imputed=c, trace=trace, converged=converged)
