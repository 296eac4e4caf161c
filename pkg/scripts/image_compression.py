"""Compare TTT-SVD, TATCU and TT-SVD on PPM images at a common relative error bound.

    python3 scripts/image_compression.py img1.ppm img2.ppm --tol 0.15

Each 512x512x3 image is reshaped column-major to 4x...x4x3 (nine 4s) and
compressed with every method; one row per image and method is printed.
Convert PNG/JPEG inputs to binary PPM first, e.g. ``convert in.png out.ppm``.
"""

import argparse
import time

from tubaltt import io as tio
from tubaltt.cli import run_method
from tubaltt.metrics import metric_report
from tubaltt.tensor_core import reshape

RESHAPE = (4,) * 9 + (3,)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("images", nargs="+")
    ap.add_argument("--tol", type=float, default=0.15)
    ap.add_argument("--methods", default="ttt-svd,tatcu,tt-svd")
    args = ap.parse_args()

    print(f"{'image':<24}{'method':<10}{'rel_err':>9}{'PSNR':>8}{'SSIM':>8}{'CF':>10}{'sec':>7}")
    for path in args.images:
        img = tio.read_image(path)
        x = reshape(img, RESHAPE) if img.size == 512 * 512 * 3 else img
        for method in args.methods.split(","):
            t0 = time.perf_counter()
            f, recon = run_method(x, method, tol=args.tol)
            wall = time.perf_counter() - t0
            rep = metric_report(img, reshape(recon, img.shape), peak=255.0)
            print(f"{path[-24:]:<24}{method:<10}{rep.rel_err:>9.4f}{rep.psnr_db:>8.2f}"
                  f"{rep.ssim:>8.4f}{x.size / f.param_count():>10.2f}{wall:>7.2f}")


if __name__ == "__main__":
    main()
