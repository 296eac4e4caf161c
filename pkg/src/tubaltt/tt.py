"""Classical tensor train (TT): TT-SVD, contraction, and two-core sweeps (ATCU).

Cores are order-3 arrays ``G[n]`` of shape ``R_{n-1} x I_n x R_n`` with
``R_0 = R_N = 1``. Real and complex data are both supported; the Fourier
slices handled by :mod:`tubaltt.tatcu` are complex.

Unfoldings are column-major throughout, consistent with
:func:`tubaltt.tensor_core.reshape`.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleRankError, NumericFailureError
from .tensor_core import frobenius_norm, reshape, smallest_rank


@dataclass
class TtFormat:
    """TT cores plus the local truncation errors recorded while building them."""

    cores: list
    local_errors: list = field(default_factory=list)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if not self.cores:
            raise InfeasibleRankError("a TT format needs at least one core")
        prev = 1
        for n, g in enumerate(self.cores):
            if g.ndim != 3:
                raise InfeasibleRankError(f"core {n} has shape {g.shape}, expected order 3")
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
    def shape(self):
        return tuple(g.shape[1] for g in self.cores)

    @property
    def ranks(self):
        """Boundary-augmented rank profile ``(1, R_1, ..., R_{N-1}, 1)``."""
        return (1,) + tuple(g.shape[2] for g in self.cores)

    @property
    def internal_ranks(self):
        return self.ranks[1:-1]

    @property
    def is_complex(self):
        return any(np.iscomplexobj(g) for g in self.cores)

    def param_count(self):
        return sum(g.size for g in self.cores)

    def copy(self):
        return TtFormat([g.copy() for g in self.cores], list(self.local_errors))


def _svd(a):
    try:
        return np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericFailureError(f"SVD failed to converge: {exc}") from exc


def check_rank_profile(shape, ranks):
    """Validate internal ranks ``r_n <= min(r_{n-1} I_n, I_{n+1}...I_N)``."""
    ranks = tuple(int(r) for r in ranks)
    N = len(shape)
    if len(ranks) != N - 1:
        raise InfeasibleRankError(
            f"expected {N - 1} internal ranks for shape {tuple(shape)}, got {ranks}"
        )
    prev = 1
    for n, r in enumerate(ranks):
        cap = min(prev * shape[n], math.prod(shape[n + 1:]))
        if not 1 <= r <= cap:
            raise InfeasibleRankError(
                f"rank r_{n + 1} = {r} infeasible (must lie in 1..{cap}) for shape {tuple(shape)}"
            )
        prev = r
    return ranks


def tt_svd(x, ranks=None, eps=None):
    """TT-SVD with either fixed internal ``ranks`` or relative tolerance ``eps``.

    In tolerance mode each of the ``N-1`` truncations may discard
    ``eps * ||x|| / sqrt(N-1)`` in Frobenius norm, so the total relative error
    is at most ``eps``. The local errors are stored on the result.
    """
    if (ranks is None) == (eps is None):
        raise ValueError("give exactly one of ranks or eps")
    x = np.asarray(x)
    if not np.iscomplexobj(x):
        x = x.astype(np.float64, copy=False)
    shape = x.shape
    N = len(shape)
    if N == 1:
        return TtFormat([reshape(x, (1, shape[0], 1)).copy()])
    if ranks is not None:
        ranks = check_rank_profile(shape, ranks)
        budget = None
    else:
        if eps < 0:
            raise ValueError(f"eps must be nonnegative, got {eps}")
        budget = (eps * frobenius_norm(x)) ** 2 / (N - 1)

    cores, errors = [], []
    c = x
    prev = 1
    for n in range(N - 1):
        c = reshape(c, (prev * shape[n], c.size // (prev * shape[n])))
        U, s, Vh = _svd(c)
        if budget is None:
            r = ranks[n]
        else:
            r = smallest_rank(s ** 2, budget)
        errors.append(float(np.sqrt(np.sum(s[r:] ** 2))))
        cores.append(reshape(U[:, :r], (prev, shape[n], r)))
        c = s[:r, None] * Vh[:r, :]
        prev = r
    cores.append(reshape(c, (prev, shape[-1], 1)))
    return TtFormat(cores, errors)


def tt_contract(f):
    """Dense tensor represented by a :class:`TtFormat`."""
    cores = f.cores if isinstance(f, TtFormat) else list(f)
    w = reshape(cores[0], (cores[0].shape[1], cores[0].shape[2]))
    for g in cores[1:]:
        r, n, r2 = g.shape
        w = w @ reshape(g, (r, n * r2))
        w = reshape(w, (w.shape[0] * n, r2))
    return reshape(w, tuple(g.shape[1] for g in cores))


def left_interface(cores):
    """Contract cores into a ``(I_1...I_k) x R_k`` matrix (``1 x 1`` if empty)."""
    dtype = np.result_type(*cores) if cores else np.float64
    w = np.ones((1, 1), dtype=dtype)
    for g in cores:
        r, n, r2 = g.shape
        w = reshape(w @ reshape(g, (r, n * r2)), (w.shape[0] * n, r2))
    return w


def right_interface(cores):
    """Contract cores into an ``R_{k-1} x (I_k...I_N)`` matrix (``1 x 1`` if empty)."""
    dtype = np.result_type(*cores) if cores else np.float64
    w = np.ones((1, 1), dtype=dtype)
    for g in reversed(cores):
        r, n, r2 = g.shape
        w = reshape(reshape(g, (r * n, r2)) @ w, (r, n * w.shape[1]))
    return w


def left_orthogonalize(cores, upto):
    """QR-sweep so cores ``0..upto-1`` become left-orthogonal (in place)."""
    for k in range(upto):
        r, n, r2 = cores[k].shape
        q, rr = np.linalg.qr(reshape(cores[k], (r * n, r2)))
        cores[k] = reshape(q, (r, n, q.shape[1]))
        nxt = cores[k + 1]
        merged = rr @ reshape(nxt, (nxt.shape[0], nxt.size // nxt.shape[0]))
        cores[k + 1] = reshape(merged, (rr.shape[0], nxt.shape[1], nxt.shape[2]))
    return cores


def _project_pair(x, cores, k):
    """Best supercore for positions ``k, k+1`` given the orthogonal environment.

    Returns the ``(R_{k-1} I_k) x (I_{k+1} R_{k+1})`` matrix
    ``L^H X R^H`` where ``L``/``R`` are the left/right interfaces.
    """
    shape = x.shape
    L = left_interface(cores[:k])
    R = right_interface(cores[k + 2:])
    p = L.shape[0]
    xm = reshape(x, (p, x.size // p))
    y = L.conj().T @ xm
    q = R.shape[1]
    y = reshape(y, (y.size // q, q)) @ R.conj().T
    rl, rr = L.shape[1], R.shape[0]
    return reshape(y, (rl * shape[k], shape[k + 1] * rr))


def atcu(x, eps_abs, init=None, max_sweeps=4, callback=None):
    """Two-core alternating update (DMRG-2 style) under an absolute error budget.

    Starting from ``init`` (default: tolerance-mode TT-SVD at the same budget),
    sweeps right-to-left then left-to-right. At each adjacent pair the merged
    core is the projection of ``x`` onto the orthogonal environment; it is split
    by SVD at the smallest rank whose discarded energy fits in what is left of
    ``eps_abs**2`` after the environment's own projection error. Each split can
    raise or lower the bond rank, which tends to rebalance the ranks that
    TT-SVD's uniform per-step budget produces.

    The lowest-parameter format seen at the end of a half-sweep whose measured
    error is at most ``eps_abs`` is returned (the initial format counts), so
    the result never violates the budget that the initializer met.

    ``callback(cores, k, direction)`` is invoked after every split.
    """
    if eps_abs < 0:
        raise ValueError(f"eps_abs must be nonnegative, got {eps_abs}")
    x = np.asarray(x)
    if not np.iscomplexobj(x):
        x = x.astype(np.float64, copy=False)
    N = x.ndim
    norm = frobenius_norm(x)
    if norm == 0.0:
        cores = [np.zeros((1, n, 1), dtype=x.dtype) for n in x.shape]
        return TtFormat(cores, [0.0])
    if N == 1:
        return TtFormat([reshape(x, (1, x.shape[0], 1)).copy()], [0.0])

    if init is None:
        current = tt_svd(x, eps=eps_abs / norm)
    else:
        current = init.copy()
        current.validate()
    cores = [g.astype(np.result_type(g, x), copy=True) for g in current.cores]
    left_orthogonalize(cores, N - 1)

    def measured(cs):
        return frobenius_norm(x - tt_contract(cs))

    err0 = measured(cores)
    best = None
    if err0 <= eps_abs:
        best = TtFormat([g.copy() for g in cores], [err0])
    norm2 = norm ** 2
    noise = (64 * np.finfo(np.float64).eps * norm) ** 2
    schedule = [("left", list(range(N - 2, -1, -1))), ("right", list(range(N - 1)))]

    for _ in range(max_sweeps):
        changed = False
        for direction, positions in schedule:
            before = tuple(g.shape[2] for g in cores)
            for k in positions:
                w = _project_pair(x, cores, k)
                U, s, Vh = _svd(w)
                resid = max(norm2 - float(np.sum(s ** 2)), 0.0)
                budget = max(eps_abs ** 2 - resid, 0.0) + noise
                r = smallest_rank(s ** 2, budget)
                rl, n1 = cores[k].shape[:2]
                n2, rr = cores[k + 1].shape[1:]
                if direction == "right":
                    left = U[:, :r]
                    right = s[:r, None] * Vh[:r, :]
                else:
                    left = U[:, :r] * s[:r]
                    right = Vh[:r, :]
                cores[k] = reshape(left, (rl, n1, r))
                cores[k + 1] = reshape(right, (r, n2, rr))
                if callback is not None:
                    callback(cores, k, direction)
            changed |= tuple(g.shape[2] for g in cores) != before
            err = measured(cores)
            params = sum(g.size for g in cores)
            if err <= eps_abs and (best is None or params < best.param_count()):
                best = TtFormat([g.copy() for g in cores], [err])
        if not changed and best is not None:
            break

    if best is None:
        # Budget only missed at round-off level; the TT-SVD split is the fallback.
        fallback = tt_svd(x, eps=eps_abs / norm)
        best = TtFormat(fallback.cores, [measured(fallback.cores)])
    return best
