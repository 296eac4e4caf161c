"""Command-line interface: ``tubaltt {compress,reconstruct,complete,metrics,gen,info}``.

Reports are JSON with sorted keys. Exit codes: 0 success, 2 usage or input
error, 3 numeric failure, 4 tolerance not met.
"""

import argparse
import contextlib
import csv
import json
import math
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import io as tio
from .completion import CompletionProblem, TsvdBackend, TttBackend, complete
from .errors import (
    FormatError,
    NumericFailureError,
    ResidualImaginaryError,
    ToleranceNotMetError,
    TubalError,
)
from .metrics import metric_report
from .synth import bernoulli_mask, make_rng, planted_tsvd, random_ttt
from .tatcu import tatcu
from .tensor_core import frobenius_norm, relative_error, reshape, to_third_order
from .tprod import tprod_fast, ttranspose
from .tsvd import tsvd_tolerance, tsvd_truncated
from .tt import tt_contract, tt_svd
from .ttt import TttFormat, ttt_contract, ttt_svd, ttt_svd_tolerance

EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_TOLERANCE = 4

METHODS = ("ttt-svd", "tatcu", "tt-svd", "tsvd")


class UsageError(TubalError, ValueError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    input: str = None
    output: str = None
    method: str = "ttt-svd"
    ranks: str = None
    tol: float = None
    reshape: str = None
    seed: int = None
    peak: float = None
    ssim_window: int = 8
    uiqi_window: int = 8
    ergas_ratio: float = 1.0
    max_refinements: int = 3
    threads: int = None

    def validate(self):
        if self.subcommand in ("compress", "complete") and (self.ranks is None) == (self.tol is None):
            raise UsageError("give exactly one of --ranks or --tol")
        if self.tol is not None and self.tol < 0:
            raise UsageError(f"--tol must be nonnegative, got {self.tol}")


def parse_int_list(text, what="list"):
    try:
        vals = [int(v) for v in text.replace(" ", "").split(",") if v != ""]
    except ValueError as exc:
        raise UsageError(f"cannot parse {what} {text!r}: {exc}") from exc
    if not vals or any(v < 1 for v in vals):
        raise UsageError(f"{what} {text!r} must list positive integers")
    return tuple(vals)


def normalize_ranks(text, expected):
    """Accept internal ``r_1..r_{N-1}`` or boundary-augmented ``1,r_1,..,1`` profiles."""
    vals = parse_int_list(text, "rank profile")
    if len(vals) == expected + 2 and vals[0] == 1 and vals[-1] == 1:
        vals = vals[1:-1]
    if len(vals) != expected:
        raise UsageError(
            f"rank profile {text!r} has {len(vals)} internal entries, expected {expected}"
        )
    return vals


def apply_reshape(x, spec):
    if spec is None:
        return x
    shape = parse_int_list(spec, "reshape")
    if math.prod(shape) != x.size:
        raise UsageError(f"reshape {shape} has {math.prod(shape)} entries, input has {x.size}")
    return reshape(x, shape)


def default_peak(path, x):
    if str(path).lower().endswith((".pgm", ".ppm", ".pnm")):
        return 255.0
    peak = float(np.max(np.abs(x))) if x.size else 1.0
    return peak if peak > 0 else 1.0


def dump(report, path=None):
    text = json.dumps(report, sort_keys=True, indent=2, default=_json_default)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    print(text)


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _clean(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return v


def _tsvd_as_ttt(f):
    """Store a T-SVD as a two-core TTT: ``U`` and ``S * V^T``."""
    I1, R, T = f.u.shape
    carry = tprod_fast(f.s, ttranspose(f.v))
    return TttFormat([reshape(f.u, (1, I1, R, T)), reshape(carry, (R, carry.shape[1], 1, T))])


def run_method(x, method, ranks=None, tol=None, max_refinements=3):
    """Return ``(factor_format, reconstruction)`` for the compressed tensor ``x``."""
    if method == "ttt-svd":
        if x.ndim < 3:
            raise UsageError(f"ttt-svd needs order >= 3 (hyper-modes + tube), got {x.shape}")
        f = ttt_svd(x, normalize_ranks(ranks, x.ndim - 2)) if ranks else ttt_svd_tolerance(x, tol)
        return f, ttt_contract(f)
    if method == "tatcu":
        if ranks:
            raise UsageError("tatcu is tolerance-driven; use --tol")
        res = tatcu(x, tol, max_refinements=max_refinements)
        return res.ttt, ttt_contract(res.ttt)
    if method == "tt-svd":
        f = tt_svd(x, ranks=normalize_ranks(ranks, x.ndim - 1)) if ranks else tt_svd(x, eps=tol)
        return f, tt_contract(f)
    if method == "tsvd":
        x3 = to_third_order(x)
        if ranks:
            f = tsvd_truncated(x3, normalize_ranks(ranks, 1)[0])
        else:
            f = tsvd_tolerance(x3, tol * frobenius_norm(x3))
        ttt = _tsvd_as_ttt(f)
        return ttt, reshape(ttt_contract(ttt), x.shape)
    raise UsageError(f"unknown method {method!r}")


def _metrics_block(ref, est, cfg, peak):
    rep = metric_report(
        ref, est, peak=peak, ssim_window=cfg.ssim_window,
        uiqi_window=cfg.uiqi_window, ergas_ratio=cfg.ergas_ratio,
    )
    return rep.to_dict()


def cmd_compress(cfg, report_path=None):
    original = tio.load_any(cfg.input)
    x = apply_reshape(original, cfg.reshape)
    peak = cfg.peak or default_peak(cfg.input, original)
    t0 = time.perf_counter()
    f, recon = run_method(x, cfg.method, cfg.ranks, cfg.tol, cfg.max_refinements)
    wall = time.perf_counter() - t0
    tio.write_factors(cfg.output, f)
    params = tio.payload_param_count(cfg.output)
    recon_orig = reshape(recon, original.shape)
    report = {
        "command": "compress",
        "method": cfg.method,
        "input": str(cfg.input),
        "input_shape": list(original.shape),
        "shape": list(x.shape),
        "numel": int(x.size),
        "param_count": int(params),
        "compression_factor": x.size / params,
        "ranks": list(f.internal_ranks),
        "rank_profile": list(f.ranks),
        "tol": cfg.tol,
        "requested_ranks": cfg.ranks,
        "rel_err": relative_error(x, recon) if frobenius_norm(x) > 0 else 0.0,
        "peak": peak,
        "metrics": _metrics_block(original, recon_orig, cfg, peak),
        "wall_time_s": wall,
        "output": str(cfg.output),
    }
    dump(report, report_path)
    return 0


def cmd_reconstruct(cfg, shape=None, report=None):
    f = tio.read_factors(cfg.input)
    y = ttt_contract(f) if isinstance(f, TttFormat) else tt_contract(f)
    target = None
    if shape:
        target = parse_int_list(shape, "shape")
    elif report:
        with open(report) as fh:
            target = tuple(json.load(fh)["input_shape"])
    if target is not None:
        if math.prod(target) != y.size:
            raise UsageError(f"cannot reshape reconstruction of {y.size} entries to {target}")
        y = reshape(y, target)
    out = str(cfg.output)
    if out.lower().endswith((".pgm", ".ppm")):
        tio.write_image(out, y)
    else:
        tio.write_tensor(out, y)
    dump({"command": "reconstruct", "shape": list(y.shape), "output": out})
    return 0


def cmd_complete(cfg, observed, mask, truth=None, max_iters=100, stop_tol=1e-4,
                 trace_path=None, report_path=None):
    m_orig = tio.load_any(observed)
    w_orig = tio.load_any(mask)
    if m_orig.shape != w_orig.shape:
        raise UsageError(f"mask shape {w_orig.shape} differs from data shape {m_orig.shape}")
    m = apply_reshape(m_orig, cfg.reshape)
    w = apply_reshape(w_orig, cfg.reshape)
    t_orig = tio.load_any(truth) if truth else None
    t = apply_reshape(t_orig, cfg.reshape) if truth else None
    if cfg.method in ("ttt", "ttt-svd"):
        backend = (TttBackend(ranks=normalize_ranks(cfg.ranks, m.ndim - 2)) if cfg.ranks
                   else TttBackend(tol=cfg.tol))
    elif cfg.method == "tsvd":
        if not cfg.ranks:
            raise UsageError("the tsvd completion backend needs --ranks (one tubal rank)")
        backend = TsvdBackend(normalize_ranks(cfg.ranks, 1)[0])
    else:
        raise UsageError(f"unknown completion method {cfg.method!r}")
    t0 = time.perf_counter()
    res = complete(CompletionProblem(m, w, backend, max_iters, stop_tol), truth=t)
    wall = time.perf_counter() - t0
    est = reshape(res.estimate, m_orig.shape)
    out = str(cfg.output)
    if out.lower().endswith((".pgm", ".ppm")):
        tio.write_image(out, est)
    else:
        tio.write_tensor(out, est)
    if trace_path:
        with open(trace_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "observed_rel_error", "change", "full_rel_error"])
            for r in res.trace:
                writer.writerow([r.iteration, repr(r.observed_rel_error), repr(r.change),
                                 "" if r.full_rel_error is None else repr(r.full_rel_error)])
    report = {
        "command": "complete",
        "method": cfg.method,
        "shape": list(m.shape),
        "iterations": len(res.trace),
        "converged": res.converged,
        "observed_fraction": float(np.mean(w)),
        "final_change": res.trace[-1].change,
        "final_observed_rel_error": res.trace[-1].observed_rel_error,
        "wall_time_s": wall,
        "output": out,
    }
    if t_orig is not None:
        peak = cfg.peak or default_peak(truth, t_orig)
        report["full_rel_error"] = res.trace[-1].full_rel_error
        report["metrics"] = _metrics_block(t_orig, est, cfg, peak)
    dump(report, report_path)
    return 0


def cmd_metrics(cfg, reference, estimate):
    x = tio.load_any(reference)
    y = tio.load_any(estimate)
    peak = cfg.peak or default_peak(reference, x)
    rep = _metrics_block(x, y, cfg, peak)
    rep["peak"] = peak
    rep["command"] = "metrics"
    dump(rep)
    return 0


def cmd_gen(kind, args):
    rng = make_rng(args.seed)
    report = {"command": "gen", "kind": kind, "seed": args.seed, "output": args.output}
    if kind == "ttt":
        shape = parse_int_list(args.shape, "shape")
        ranks = normalize_ranks(args.ranks, len(shape) - 1)
        f = random_ttt(rng, shape, args.tube, ranks)
        x = ttt_contract(f)
        if args.noise:
            n = rng.standard_normal(x.shape)
            x = x + n * (args.noise * frobenius_norm(x) / frobenius_norm(n))
        if args.factors:
            tio.write_factors(args.factors, f)
        report.update(shape=list(x.shape), ranks=list(ranks), noise=args.noise)
    elif kind == "tsvd":
        I1, I2 = parse_int_list(args.shape, "shape")
        x = planted_tsvd(rng, I1, I2, args.tube, args.rank, noise=args.noise)
        report.update(shape=list(x.shape), rank=args.rank, noise=args.noise)
    elif kind == "mask":
        shape = parse_int_list(args.shape, "shape")
        x = bernoulli_mask(rng, shape, args.missing)
        report.update(shape=list(shape), missing=args.missing,
                      observed=int(np.count_nonzero(x)))
    else:
        raise UsageError(f"unknown generator {kind!r}")
    tio.write_tensor(args.output, x)
    dump(report)
    return 0


def cmd_info(path):
    with open(path, "rb") as fh:
        buf = fh.read()
    magic = buf[:4]
    if magic == tio.TENSOR_MAGIC:
        x = tio.decode_tensor(buf)
        print("TensorFile")
        print(f"dtype: {x.dtype}")
        print(f"dims: {'x'.join(str(d) for d in x.shape)}")
        print(f"numel: {x.size}")
    elif magic == tio.FACTOR_MAGIC:
        f, payload = tio.decode_factors(buf, with_payload=True)
        kind = "TTT" if isinstance(f, TttFormat) else ("TT-complex" if f.is_complex else "TT-real")
        print(f"FactorFile kind: {kind}")
        print(f"modes: {'x'.join(str(d) for d in f.shape)}")
        if isinstance(f, TttFormat):
            print(f"tube length: {f.tube_length}")
        print(f"rank profile: {','.join(str(r) for r in f.ranks)}")
        for n, g in enumerate(f.cores):
            print(f"core {n + 1}: {'x'.join(str(d) for d in g.shape)}")
        print(f"param count: {f.param_count()}")
        print(f"payload bytes: {payload}")
    elif buf[:2] in (b"P5", b"P6"):
        x = tio.decode_pnm(buf)
        print(f"PNM image {buf[:2].decode()}")
        print(f"dims: {'x'.join(str(d) for d in x.shape)}")
    else:
        raise FormatError(f"unrecognized file magic {magic!r}", 0)
    return 0


def _add_cfg_flags(p, methods=METHODS, default_method="ttt-svd"):
    p.add_argument("--method", choices=methods, default=default_method)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--ranks", help="internal (2,3,2) or boundary-augmented (1,2,3,2,1) profile")
    g.add_argument("--tol", type=float, help="relative error tolerance")
    p.add_argument("--reshape", help="column-major reshape, e.g. 4,4,4,4,4,4,4,4,4,3")
    _add_metric_flags(p)


def _add_metric_flags(p):
    p.add_argument("--peak", type=float, help="PSNR peak (default 255 for images, data max otherwise)")
    p.add_argument("--ssim-window", type=int, default=8)
    p.add_argument("--uiqi-window", type=int, default=8)
    p.add_argument("--ergas-ratio", type=float, default=1.0)


def build_parser():
    ap = argparse.ArgumentParser(prog="tubaltt", description=__doc__.splitlines()[0])
    ap.add_argument("--threads", type=int, help="cap BLAS/slice-loop threads")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("compress", help="compress a tensor or PGM/PPM image")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True, help="factor file to write")
    p.add_argument("--report", help="also write the JSON report here")
    p.add_argument("--max-refinements", type=int, default=3)
    _add_cfg_flags(p)

    p = sub.add_parser("reconstruct", help="contract a factor file")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--shape", help="reshape the result to this shape")
    g.add_argument("--report", help="compress report whose input_shape to restore")

    p = sub.add_parser("complete", help="tensor completion")
    p.add_argument("--observed", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--truth")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--trace", help="per-iteration CSV trace")
    p.add_argument("--report")
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--stop-tol", type=float, default=1e-4)
    _add_cfg_flags(p, methods=("ttt", "tsvd"), default_method="ttt")

    p = sub.add_parser("metrics", help="quality metrics between two tensors/images")
    p.add_argument("reference")
    p.add_argument("estimate")
    _add_metric_flags(p)

    p = sub.add_parser("gen", help="seeded synthetic instances")
    p.add_argument("kind", choices=("ttt", "tsvd", "mask"))
    p.add_argument("--shape", required=True, help="hyper-mode sizes (ttt), I1,I2 (tsvd), full shape (mask)")
    p.add_argument("--tube", type=int, default=1)
    p.add_argument("--ranks", help="planted TTT ranks")
    p.add_argument("--rank", type=int, default=1, help="planted tubal rank")
    p.add_argument("--noise", type=float, default=0.0, help="relative noise level")
    p.add_argument("--missing", type=float, default=0.7, help="missing fraction for masks")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--factors", help="also write the planted TTT factors")
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("info", help="describe a TensorFile, FactorFile or image")
    p.add_argument("path")
    return ap


def _thread_limit(n):
    if not n:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=n)


def dispatch(args):
    sc = args.subcommand
    if sc == "compress":
        cfg = RunConfig(sc, args.input, args.output, args.method, args.ranks, args.tol,
                        args.reshape, peak=args.peak, ssim_window=args.ssim_window,
                        uiqi_window=args.uiqi_window, ergas_ratio=args.ergas_ratio,
                        max_refinements=args.max_refinements)
        cfg.validate()
        return cmd_compress(cfg, args.report)
    if sc == "reconstruct":
        return cmd_reconstruct(RunConfig(sc, args.input, args.output), args.shape, args.report)
    if sc == "complete":
        cfg = RunConfig(sc, None, args.output, args.method, args.ranks, args.tol, args.reshape,
                        peak=args.peak, ssim_window=args.ssim_window,
                        uiqi_window=args.uiqi_window, ergas_ratio=args.ergas_ratio)
        cfg.validate()
        return cmd_complete(cfg, args.observed, args.mask, args.truth, args.max_iters,
                            args.stop_tol, args.trace, args.report)
    if sc == "metrics":
        cfg = RunConfig(sc, peak=args.peak, ssim_window=args.ssim_window,
                        uiqi_window=args.uiqi_window, ergas_ratio=args.ergas_ratio)
        return cmd_metrics(cfg, args.reference, args.estimate)
    if sc == "gen":
        if args.kind == "ttt" and not args.ranks:
            raise UsageError("gen ttt needs --ranks")
        return cmd_gen(args.kind, args)
    if sc == "info":
        return cmd_info(args.path)
    raise UsageError(f"unknown subcommand {sc}")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with _thread_limit(args.threads):
            return dispatch(args)
    except ToleranceNotMetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except (NumericFailureError, ResidualImaginaryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (TubalError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
