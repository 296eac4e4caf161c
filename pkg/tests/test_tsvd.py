import numpy as np
import pytest

from tubaltt.errors import InfeasibleRankError
from tubaltt.synth import planted_tsvd, random_orthogonal_factor
from tubaltt.tensor_core import fft_tube, frobenius_norm, relative_error
from tubaltt.tprod import (
    identity_tensor,
    is_f_diagonal,
    is_partially_orthogonal,
    tprod_fast,
    ttranspose,
)
from tubaltt.tsvd import tsvd_full, tsvd_reconstruct, tsvd_tolerance, tsvd_truncated


def _structure_ok(f):
    assert is_partially_orthogonal(f.u) and is_partially_orthogonal(f.v)
    assert is_f_diagonal(f.s)
    s_hat = fft_tube(f.s)
    for k in range(s_hat.shape[2]):
        d = np.diag(s_hat[:, :, k])
        assert np.max(np.abs(d.imag)) <= 1e-8 * (1 + np.abs(d).max())
        assert np.all(d.real >= -1e-10)
        assert np.all(np.diff(d.real) <= 1e-10)


def test_identity_factorization():
    x = identity_tensor(3, 4)
    f = tsvd_truncated(x, 3)
    _structure_ok(f)
    np.testing.assert_allclose(f.s, identity_tensor(3, 4), atol=1e-12)
    np.testing.assert_allclose(tsvd_reconstruct(f), x, atol=1e-12)


@pytest.mark.parametrize("shape", [(5, 4, 6), (6, 3, 5), (3, 7, 1), (4, 4, 8)])
def test_full_rank_is_exact(rng, shape):
    x = rng.standard_normal(shape)
    f = tsvd_full(x)
    _structure_ok(f)
    assert f.u.shape == (shape[0], min(shape[:2]), shape[2])
    assert relative_error(x, tsvd_reconstruct(f)) <= 1e-10


def test_planted_rank_two_recovered(rng):
    T = 5
    u0 = random_orthogonal_factor(rng, 6, 2, T)
    v0 = random_orthogonal_factor(rng, 5, 2, T)
    s0 = np.zeros((2, 2, T))
    s0[0, 0] = rng.standard_normal(T)
    s0[1, 1] = rng.standard_normal(T)
    x = tprod_fast(tprod_fast(u0, s0), ttranspose(v0))
    assert relative_error(x, tsvd_reconstruct(tsvd_truncated(x, 2))) <= 1e-8


def test_infeasible_rank(rng):
    x = rng.standard_normal((3, 4, 2))
    for r in (0, 4):
        with pytest.raises(InfeasibleRankError):
            tsvd_truncated(x, r)


def test_tolerance_extremes(rng):
    x = rng.standard_normal((4, 4, 3))
    assert tsvd_tolerance(x, frobenius_norm(x)).rank == 1
    assert tsvd_tolerance(x, 0.0).rank == 4
    with pytest.raises(ValueError):
        tsvd_tolerance(x, -1.0)


def test_tolerance_finds_planted_rank(rng):
    x = planted_tsvd(rng, 6, 5, 4, 2)
    e = rng.standard_normal(x.shape)
    x = x + 1e-6 * e / frobenius_norm(e)
    f = tsvd_tolerance(x, 1e-4)
    assert f.rank == 2
    assert frobenius_norm(x - tsvd_reconstruct(f)) <= 1e-4


def test_dominant_spectrum_rank_one(rng):
    T = 4
    u = random_orthogonal_factor(rng, 5, 3, T)
    v = random_orthogonal_factor(rng, 4, 3, T)
    s = np.zeros((3, 3, T))
    s[0, 0, 0], s[1, 1, 0], s[2, 2, 0] = 10.0, 1e-12, 1e-12
    x = tprod_fast(tprod_fast(u, s), ttranspose(v))
    assert relative_error(x, tsvd_reconstruct(tsvd_truncated(x, 1))) <= 1e-11


@pytest.mark.parametrize("T", [1, 4, 5])
def test_delta_scaling_by_tube_length(rng, T):
    """The spatial tolerance is met exactly at the boundary chosen via delta^2 * T."""
    x = rng.standard_normal((5, 6, T))
    errors = [tsvd_truncated(x, r).error for r in range(1, 6)]
    for r, err in enumerate(errors, start=1):
        # just above a rank's error admits that rank; just below forces more
        assert tsvd_tolerance(x, err * (1 + 1e-9)).rank <= r
        if r < 5 and err > 0:
            assert tsvd_tolerance(x, err * (1 - 1e-6)).rank > r


@pytest.mark.parametrize("r", [1, 2, 3])
def test_eckart_young(rng, r):
    x = rng.standard_normal((5, 4, 6))
    f = tsvd_truncated(x, r)
    actual = frobenius_norm(x - tsvd_reconstruct(f))
    assert abs(actual - f.error) <= 1e-10 * frobenius_norm(x)
    for _ in range(100):
        y = x + 0.3 * rng.standard_normal(x.shape)
        rival = tsvd_reconstruct(tsvd_truncated(y, r))
        assert frobenius_norm(x - rival) >= actual - 1e-10


def test_error_monotone_in_rank(rng):
    x = rng.standard_normal((6, 5, 7))
    errs = [frobenius_norm(x - tsvd_reconstruct(tsvd_truncated(x, r))) for r in range(1, 6)]
    assert all(a >= b - 1e-12 for a, b in zip(errs, errs[1:]))
    assert errs[-1] <= 1e-10 * frobenius_norm(x)


def test_factors_are_real(rng):
    f = tsvd_truncated(rng.standard_normal((4, 5, 6)), 2)
    assert not np.iscomplexobj(f.u) and not np.iscomplexobj(f.s) and not np.iscomplexobj(f.v)
