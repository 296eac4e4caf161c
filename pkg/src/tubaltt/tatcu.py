"""TATCU: TTT construction from per-Fourier-slice TT approximations.

The tube-mode FFT decouples the TTT problem into one ordinary TT problem per
frequency. Each of the first ``ceil((T+1)/2)`` slices is approximated by
:func:`tubaltt.tt.atcu` within its budget ``eta_k = eps * ||X_hat_k||_F``;
partner slices take conjugated cores. Slice ranks are padded with zeros to
their componentwise maximum, stacked along a frequency axis and inverse
transformed into real tubal cores.

With these budgets ``sum_k eta_k^2 = eps^2 * sum_k ||X_hat_k||^2
= eps^2 * T * ||X||^2``, so Parseval bounds the assembled error by
``eps * ||X||``. The final verification (and halving of budgets) only guards
against round-off.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ShapeMismatchError, ToleranceNotMetError
from .tensor_core import (
    as_real,
    fft_tube,
    frobenius_norm,
    half_slices,
    ifft_tube,
    is_self_conjugate,
    relative_error,
)
from .tt import TtFormat, atcu, tt_contract
from .ttt import TttFormat, ttt_contract

# relative error that floating-point contraction cannot get below; a request
# of eps_rel = 0 is accepted once the error reaches this floor
ROUNDOFF_FLOOR = 1e-12


@dataclass
class SliceBudget:
    slice_index: int
    energy: float
    eta: float


@dataclass
class SpectralTtSet:
    """One (complex) TT per Fourier slice, in slice order."""

    slices: list

    @property
    def synchronized_ranks(self):
        profiles = np.array([s.ranks for s in self.slices])
        return tuple(int(r) for r in profiles.max(axis=0))


@dataclass
class TatcuResult:
    ttt: TttFormat
    rel_error: float
    rounds: int
    budgets: list = field(repr=False)
    slice_ranks: list = field(repr=False)


def allocate_budgets(energies, eps_rel):
    """Energy-proportional budgets ``eta_k = eps_rel * sqrt(energy_k)``."""
    if eps_rel < 0:
        raise ValueError(f"eps_rel must be nonnegative, got {eps_rel}")
    return [
        SliceBudget(k, float(e), float(eps_rel * np.sqrt(e))) for k, e in enumerate(energies)
    ]


def slice_energies(x_hat):
    return [float(np.sum(np.abs(x_hat[..., k]) ** 2)) for k in range(x_hat.shape[-1])]


def _pad_core(g, left, right):
    out = np.zeros((left, g.shape[1], right), dtype=g.dtype)
    out[: g.shape[0], :, : g.shape[2]] = g
    return out


def synchronize_ranks(s):
    """Zero-pad every slice's cores to the componentwise maximal rank profile."""
    full = s.synchronized_ranks
    padded = []
    for tt in s.slices:
        if tt.ranks == full:
            padded.append(tt)
            continue
        cores = [_pad_core(g, full[n], full[n + 1]) for n, g in enumerate(tt.cores)]
        padded.append(TtFormat(cores, list(tt.local_errors)))
    return SpectralTtSet(padded)


def spectral_tt(x_hat, budgets, max_sweeps=4):
    """Per-slice ATCU on half of the spectrum, conjugate mirror for the rest."""
    T = x_hat.shape[-1]
    h = half_slices(T)
    slices = [None] * T
    for k in range(h):
        a = x_hat[..., k]
        if is_self_conjugate(k, T):
            # slices 0 and T/2 are real for real input; real cores keep the
            # assembled tubal cores real
            a = np.ascontiguousarray(a.real)
        slices[k] = atcu(a, budgets[k].eta, max_sweeps=max_sweeps)
    for k in range(h, T):
        partner = slices[T - k]
        slices[k] = TtFormat([np.conj(g) for g in partner.cores], list(partner.local_errors))
    return SpectralTtSet(slices)


def assemble(s):
    """Stack synchronized spectral cores along frequency and inverse FFT them."""
    s = synchronize_ranks(s)
    N = s.slices[0].order
    cores = []
    for n in range(N):
        stacked = np.stack(
            [np.asarray(tt.cores[n], dtype=np.complex128) for tt in s.slices], axis=-1
        )
        cores.append(ifft_tube(stacked))
    return TttFormat(cores)


def tatcu(x, eps_rel, max_refinements=3, max_sweeps=4):
    """TTT approximation with relative error at most ``eps_rel``.

    A tolerance below :data:`ROUNDOFF_FLOOR` is treated as met at the floor.
    Raises :class:`ToleranceNotMetError` (carrying the best result) when the
    bound is still violated after ``max_refinements`` budget halvings.
    """
    if eps_rel < 0:
        raise ValueError(f"eps_rel must be nonnegative, got {eps_rel}")
    x = as_real(x)
    if x.ndim < 3:
        raise ShapeMismatchError(
            f"TATCU needs at least two hyper-modes plus the tube mode, got shape {x.shape}"
        )
    x_hat = fft_tube(x)
    budgets = allocate_budgets(slice_energies(x_hat), eps_rel)
    norm = frobenius_norm(x)
    best = None
    for rounds in range(max_refinements + 1):
        spectral = spectral_tt(x_hat, budgets, max_sweeps=max_sweeps)
        ttt = assemble(spectral)
        err = relative_error(x, ttt_contract(ttt)) if norm > 0 else 0.0
        result = TatcuResult(ttt, err, rounds, budgets, [t.ranks for t in spectral.slices])
        if best is None or err < best.rel_error:
            best = result
        if err <= max(eps_rel, ROUNDOFF_FLOOR):
            return result
        budgets = [SliceBudget(b.slice_index, b.energy, b.eta / 2) for b in budgets]
    raise ToleranceNotMetError(eps_rel, best.rel_error, best)


def spectral_reconstruction(s):
    """Per-slice dense reconstructions (used to check padding exactness)."""
    return [tt_contract(tt) for tt in s.slices]
