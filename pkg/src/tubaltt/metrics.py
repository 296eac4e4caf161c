"""Reconstruction quality metrics: MSE/PSNR, SSIM, RMSE, ERGAS, SAM, UIQI.

Windowed statistics (SSIM, UIQI) use a uniform square window slid with
stride 1 over valid positions and the unbiased ``1/(n-1)`` (co)variance
normalization. Multiband images are ``H x W x B`` with bands last.
"""

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ShapeMismatchError

PSNR_INF = float("inf")


def _pair(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ShapeMismatchError(f"shape mismatch {x.shape} vs {y.shape}")
    return x, y


def mse(x, y):
    x, y = _pair(x, y)
    return float(np.sum((x - y) ** 2) / x.size)


def psnr_from_mse(m, peak=255.0):
    if m == 0.0:
        return PSNR_INF
    return float(10.0 * math.log10(peak ** 2 / m))


def mse_psnr(x, y, peak=255.0):
    """``(MSE, PSNR)``; PSNR is ``inf`` when the inputs coincide."""
    if peak <= 0:
        raise ValueError(f"peak must be positive, got {peak}")
    m = mse(x, y)
    return m, psnr_from_mse(m, peak)


def rmse(x, y):
    return math.sqrt(mse(x, y))


def window_means(a, win):
    """Means of every ``win x win`` window (valid positions, stride 1)."""
    h, w = a.shape
    if h < win or w < win:
        raise ShapeMismatchError(f"image {a.shape} smaller than {win}x{win} window")
    s = np.zeros((h + 1, w + 1))
    s[1:, 1:] = np.cumsum(np.cumsum(a, axis=0), axis=1)
    total = s[win:, win:] - s[:-win, win:] - s[win:, :-win] + s[:-win, :-win]
    return total / (win * win)


def _window_stats(x, y, win):
    n = win * win
    mx = window_means(x, win)
    my = window_means(y, win)
    scale = n / (n - 1) if n > 1 else 1.0
    vx = (window_means(x * x, win) - mx * mx) * scale
    vy = (window_means(y * y, win) - my * my) * scale
    cxy = (window_means(x * y, win) - mx * my) * scale
    return mx, my, vx, vy, cxy


def ssim(x, y, data_range=255.0, win=8, k1=0.01, k2=0.03):
    """Mean SSIM over all ``win x win`` windows of two 2-D images."""
    x, y = _pair(x, y)
    if x.ndim != 2:
        raise ShapeMismatchError(f"ssim expects 2-D images, got {x.shape}")
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2
    mx, my, vx, vy, cxy = _window_stats(x, y, win)
    num = (2 * mx * my + c1) * (2 * cxy + c2)
    den = (mx * mx + my * my + c1) * (vx + vy + c2)
    return float(np.mean(num / den))


def ssim_mean(x, y, data_range=255.0, win=8):
    """SSIM of 2-D images, or the band average for ``H x W x B`` inputs."""
    x, y = _pair(x, y)
    if x.ndim == 2:
        return ssim(x, y, data_range, win)
    return float(np.mean(per_band(ssim, x, y, data_range=data_range, win=win)))


def per_band(fn, x, y, **kw):
    return [fn(x[:, :, b], y[:, :, b], **kw) for b in range(x.shape[2])]


def ergas(x, y, ratio=1.0):
    """``100 * ratio * sqrt(mean_b (RMSE_b / mean(x_b))^2)`` over bands of ``x``."""
    x, y = _pair(x, y)
    if x.ndim == 2:
        x, y = x[:, :, None], y[:, :, None]
    means = x.mean(axis=(0, 1))
    bad = [int(b) for b in np.nonzero(means == 0.0)[0]]
    if bad:
        raise ValueError(f"ERGAS undefined: reference bands {bad} have zero mean")
    band_rmse = np.sqrt(np.mean((x - y) ** 2, axis=(0, 1)))
    return float(100.0 * ratio * np.sqrt(np.mean((band_rmse / means) ** 2)))


@dataclass
class SamResult:
    degrees: float
    skipped: int


def sam(x, y, with_skipped=False):
    """Mean spectral angle in degrees over pixels where both spectra are nonzero.

    The angle is evaluated as ``2 atan2(|u - v|, |u + v|)`` on the unit spectra,
    which is exact for identical or proportional spectra where ``acos`` of a
    rounded cosine is not.
    """
    x, y = _pair(x, y)
    if x.ndim == 2:
        x, y = x[:, :, None], y[:, :, None]
    xs = x.reshape(-1, x.shape[-1])
    ys = y.reshape(-1, y.shape[-1])
    nx = np.linalg.norm(xs, axis=1)
    ny = np.linalg.norm(ys, axis=1)
    ok = (nx > 0) & (ny > 0)
    skipped = int(np.count_nonzero(~ok))
    if not ok.any():
        res = SamResult(0.0, skipped)
    else:
        u = xs[ok] / nx[ok, None]
        v = ys[ok] / ny[ok, None]
        ang = 2.0 * np.arctan2(np.linalg.norm(u - v, axis=1), np.linalg.norm(u + v, axis=1))
        res = SamResult(float(np.degrees(np.mean(ang))), skipped)
    return res if with_skipped else res.degrees


@dataclass
class UiqiResult:
    value: float
    skipped: int


def uiqi(x, y, win=8, with_skipped=False):
    """Wang-Bovik universal image quality index, averaged over windows.

    Windows where both variances and both means vanish are degenerate: they
    count as 1 when the two windows agree and are skipped otherwise.
    """
    x, y = _pair(x, y)
    if x.ndim != 2:
        raise ShapeMismatchError(f"uiqi expects 2-D images, got {x.shape}")
    mx, my, vx, vy, cxy = _window_stats(x, y, win)
    num = (2 * cxy) * (2 * mx * my)
    den = (vx + vy) * (mx * mx + my * my)
    good = den != 0
    q = np.zeros_like(den)
    q[good] = num[good] / den[good]
    degenerate = ~good
    same = degenerate & (mx == my) & (vx == vy)
    q[same] = 1.0
    keep = good | same
    skipped = int(np.count_nonzero(~keep))
    value = float(np.mean(q[keep])) if keep.any() else float("nan")
    res = UiqiResult(value, skipped)
    return res if with_skipped else res.value


def uiqi_mean(x, y, win=8):
    x, y = _pair(x, y)
    if x.ndim == 2:
        return uiqi(x, y, win)
    return float(np.mean(per_band(uiqi, x, y, win=win)))


def relative_error(x, y):
    x, y = _pair(x, y)
    nx = np.linalg.norm(x)
    if nx == 0:
        raise ValueError("relative error undefined for a zero reference")
    return float(np.linalg.norm(x - y) / nx)


@dataclass
class MetricReport:
    mse: float
    psnr_db: float
    rel_err: float
    rmse: float
    ssim: float = None
    ergas: float = None
    sam_deg: float = None
    uiqi: float = None
    psnr_band_mean_db: float = None
    per_band: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_dict(self):
        d = asdict(self)
        for key in ("psnr_db", "psnr_band_mean_db"):
            if d[key] == PSNR_INF:
                d[key] = "inf"
        for band in d["per_band"]:
            if band.get("psnr_db") == PSNR_INF:
                band["psnr_db"] = "inf"
        return d


def metric_report(x, y, peak=255.0, ssim_window=8, uiqi_window=8, ergas_ratio=1.0):
    """All metrics for a reference ``x`` and estimate ``y``.

    Image metrics (SSIM, UIQI, SAM, ERGAS) are filled in for 2-D and
    ``H x W x B`` inputs; other shapes get MSE/PSNR/RMSE/relative error only.
    A per-band breakdown is attached for multiband inputs, together with
    ``psnr_band_mean_db``, the mean of the finite per-band PSNRs.
    """
    x, y = _pair(x, y)
    m, p = mse_psnr(x, y, peak)
    nx = float(np.linalg.norm(x))
    rep = MetricReport(
        mse=m,
        psnr_db=p,
        rel_err=float(np.linalg.norm(x - y) / nx) if nx > 0 else float("nan"),
        rmse=math.sqrt(m),
    )
    if x.ndim not in (2, 3):
        rep.notes.append(f"image metrics skipped for order-{x.ndim} input")
        return rep
    small = min(x.shape[0], x.shape[1])
    if small >= ssim_window:
        rep.ssim = ssim_mean(x, y, peak, ssim_window)
    else:
        rep.notes.append("ssim skipped: image smaller than window")
    if small >= uiqi_window:
        rep.uiqi = uiqi_mean(x, y, uiqi_window)
    else:
        rep.notes.append("uiqi skipped: image smaller than window")
    s = sam(x, y, with_skipped=True)
    rep.sam_deg = s.degrees
    if s.skipped:
        rep.notes.append(f"sam skipped {s.skipped} zero-norm pixels")
    try:
        rep.ergas = ergas(x, y, ergas_ratio)
    except ValueError as exc:
        rep.notes.append(str(exc))
    if x.ndim == 3:
        for b in range(x.shape[2]):
            xb, yb = x[:, :, b], y[:, :, b]
            bm, bp = mse_psnr(xb, yb, peak)
            band = {"band": b, "mse": bm, "psnr_db": bp, "rmse": math.sqrt(bm)}
            if small >= ssim_window:
                band["ssim"] = ssim(xb, yb, peak, ssim_window)
            if small >= uiqi_window:
                band["uiqi"] = uiqi(xb, yb, uiqi_window)
            rep.per_band.append(band)
        # multiband convention: PSNR per band with the common peak, then averaged
        psnrs = [b["psnr_db"] for b in rep.per_band]
        rep.psnr_band_mean_db = PSNR_INF if all(math.isinf(v) for v in psnrs) else float(
            np.mean([v for v in psnrs if not math.isinf(v)])
        )
    return rep
