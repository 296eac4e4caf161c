import importlib

import numpy as np
import pytest

from tubaltt.errors import ShapeMismatchError, ToleranceNotMetError
from tubaltt.synth import planted_ttt, random_tt, random_ttt
from tubaltt.tatcu import (
    SliceBudget,
    SpectralTtSet,
    allocate_budgets,
    assemble,
    slice_energies,
    spectral_reconstruction,
    spectral_tt,
    synchronize_ranks,
    tatcu,
)
from tubaltt.tensor_core import fft_tube, frobenius_norm, relative_error
from tubaltt.tt import TtFormat, atcu, tt_contract
from tubaltt.ttt import ttt_contract


def test_budgets_uniform_energy():
    b = allocate_budgets([4.0] * 5, 0.1)
    assert all(x.eta == pytest.approx(0.2, abs=1e-15) for x in b)
    assert [x.slice_index for x in b] == list(range(5))


def test_budgets_single_energetic_slice():
    b = allocate_budgets([0.0, 9.0, 0.0], 0.5)
    assert [x.eta for x in b] == [0.0, 1.5, 0.0]


def test_budgets_sum_identity(rng):
    e = rng.uniform(0, 10, size=17)
    eps = 0.37
    b = allocate_budgets(e, eps)
    assert abs(sum(x.eta ** 2 for x in b) - eps ** 2 * e.sum()) <= 1e-12 * e.sum()
    with pytest.raises(ValueError):
        allocate_budgets(e, -0.1)


def test_budgets_match_fourier_energy(rng):
    x = rng.standard_normal((3, 4, 6))
    x_hat = fft_tube(x)
    b = allocate_budgets(slice_energies(x_hat), 0.2)
    total = np.sum(np.abs(x_hat) ** 2)
    assert abs(sum(s.eta ** 2 for s in b) - 0.04 * total) <= 1e-12 * total
    # Parseval: the same sum in the spatial domain carries a factor T
    assert abs(total - 6 * frobenius_norm(x) ** 2) <= 1e-12 * total


def test_synchronize_pads_and_preserves(rng):
    a = random_tt(rng, (3, 4, 3), (2, 3), complex_=True)
    b = random_tt(rng, (3, 4, 3), (3, 2), complex_=True)
    s = SpectralTtSet([a, b])
    assert s.synchronized_ranks == (1, 3, 3, 1)
    before = spectral_reconstruction(s)
    padded = synchronize_ranks(s)
    assert all(t.ranks == (1, 3, 3, 1) for t in padded.slices)
    for u, v in zip(before, spectral_reconstruction(padded)):
        assert np.max(np.abs(u - v)) <= 1e-12


def test_synchronize_identity_cases(rng):
    a = random_tt(rng, (3, 4, 3), (2, 2))
    one = synchronize_ranks(SpectralTtSet([a]))
    assert all(np.array_equal(g, h) for g, h in zip(one.slices[0].cores, a.cores))
    two = synchronize_ranks(SpectralTtSet([a, a.copy()]))
    assert all(t.ranks == a.ranks for t in two.slices)


@pytest.mark.parametrize("T", [1, 4, 5, 8])
def test_planted_exact(rng, T):
    x = ttt_contract(random_ttt(rng, (4, 5, 3), T, (2, 2)))
    res = tatcu(x, 1e-6)
    assert res.rel_error <= 1e-6
    assert res.ttt.internal_ranks == (2, 2)
    assert not np.iscomplexobj(res.ttt.cores[0])


def test_large_eps_first_pass(rng):
    x = rng.standard_normal((3, 4, 5))
    res = tatcu(x, 1.0)
    assert res.rounds == 0 and res.rel_error <= 1.0


def test_unit_tube_matches_atcu(rng):
    x = rng.standard_normal((4, 3, 5, 1))
    eps = 0.2
    res = tatcu(x, eps)
    direct = atcu(x[..., 0], eps * frobenius_norm(x))
    np.testing.assert_allclose(ttt_contract(res.ttt)[..., 0], tt_contract(direct), atol=1e-10)
    assert res.rel_error <= eps


def test_conjugate_pairs_and_reality(rng):
    x = planted_ttt(rng, (4, 4, 3), 6, (2, 2), noise=0.1)
    x_hat = fft_tube(x)
    budgets = allocate_budgets(slice_energies(x_hat), 0.1)
    s = spectral_tt(x_hat, budgets)
    for k in range(1, 6):
        for g, h in zip(s.slices[k].cores, s.slices[6 - k].cores):
            np.testing.assert_array_equal(g, np.conj(h))
    for tt, b in zip(s.slices, budgets):
        k = b.slice_index
        assert frobenius_norm(x_hat[..., k] - tt_contract(tt)) <= b.eta * (1 + 1e-9) + 1e-9
    ttt = assemble(s)
    for g in ttt.cores:
        assert g.dtype == np.float64


def test_global_guarantee(rng):
    for _ in range(30):
        T = int(rng.integers(1, 9))
        N = int(rng.integers(2, 5))
        shape = tuple(int(v) for v in rng.integers(2, 6, size=N))
        x = rng.standard_normal(shape + (T,))
        eps = float(rng.uniform(0.05, 0.5))
        res = tatcu(x, eps)
        err = frobenius_norm(x - ttt_contract(res.ttt))
        assert err <= (eps + 1e-8) * frobenius_norm(x)


def test_monotone_refinement(rng):
    for _ in range(5):
        x = planted_ttt(rng, (4, 5, 4), 5, (2, 3), noise=0.2)
        x_hat = fft_tube(x)
        budgets = allocate_budgets(slice_energies(x_hat), 0.3)
        errs = []
        for _ in range(4):
            errs.append(relative_error(x, ttt_contract(assemble(spectral_tt(x_hat, budgets)))))
            budgets = [SliceBudget(b.slice_index, b.energy, b.eta / 2) for b in budgets]
        assert all(b <= a + 1e-12 for a, b in zip(errs, errs[1:]))


def test_tolerance_not_met(monkeypatch, rng):
    x = rng.standard_normal((3, 3, 3, 4))

    def sloppy(a, eps_abs, **kw):
        # ignores the budget: a rank-1 guess
        cores = [np.ones((1, n, 1), dtype=a.dtype) for n in a.shape]
        return TtFormat(cores, [0.0])

    monkeypatch.setattr(importlib.import_module("tubaltt.tatcu"), "atcu", sloppy)
    with pytest.raises(ToleranceNotMetError) as info:
        tatcu(x, 0.01, max_refinements=2)
    assert info.value.best_error > 0.01
    assert info.value.result.rounds <= 2


def test_rejects_bad_input(rng):
    with pytest.raises(ShapeMismatchError):
        tatcu(rng.standard_normal((4, 5)), 0.1)
    with pytest.raises(ValueError):
        tatcu(rng.standard_normal((4, 5, 2)), -1)
