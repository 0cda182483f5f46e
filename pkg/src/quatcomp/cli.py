"""Command-line front end for the completion solvers.

Subcommands:

* ``complete`` - recover one image (or synthetic instance) through a mask.
* ``mask``     - generate and save a mask file from a pattern description.
* ``sweep``    - run ``complete`` across a range of truncation ranks.
* ``bench``    - cross-product benchmark from a JSON config, with timing.

Exit codes: 0 success, 1 usage or I/O error, 2 run completed but the
solver did not converge (the report is still written).
"""

from __future__ import annotations

import argparse
import csv
import importlib.resources
import json
import math
import os
import re
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import imaging
from .completion import (
    Mask,
    SolverConfig,
    dwqtnn_complete,
    qnn_svt_baseline,
    qtnn_complete,
    random_low_rank,
    wqtnn_complete,
)
from .quat import QMatrix

METHODS = ("qtnn", "wqtnn", "dwqtnn", "qnn-baseline")
REPORT_COLUMNS = ("image", "method", "r", "pattern", "psnr", "ssim",
                  "rel_error", "iterations", "wall_seconds", "converged",
                  "seed")
_SYNTH_RE = re.compile(
    r"^synth:(\d+)x(\d+):rank=(\d+)(?::scale=([0-9.eE+-]+))?(?::seed=(\d+))?$")


class CliError(Exception):
    """Usage or I/O failure; maps to exit code 1."""


@dataclass
class LoadedInput:
    name: str
    data: QMatrix
    truth: QMatrix | None  # known ground truth (synthetic or full image)
    is_image: bool


def _load_input(spec: str) -> LoadedInput:
    m = _SYNTH_RE.match(spec)
    if m:
        rows, cols, rank = int(m.group(1)), int(m.group(2)), int(m.group(3))
        scale = float(m.group(4)) if m.group(4) else 1.0
        seed = int(m.group(5)) if m.group(5) else 0
        rng = np.random.default_rng(seed)
        truth = random_low_rank(rows, cols, rank, rng, scale=scale)
        return LoadedInput(name=spec, data=truth, truth=truth, is_image=False)
    if not os.path.exists(spec):
        raise CliError(f"input not found: {spec}")
    try:
        img = imaging.load_image(spec)
    except OSError as exc:
        raise CliError(f"cannot read image {spec}: {exc}") from exc
    q = imaging.encode(img)
    return LoadedInput(name=spec, data=q, truth=q, is_image=True)


def _resolve_mask(args, shape: tuple[int, int]) -> Mask:
    if args.mask:
        if not os.path.exists(args.mask):
            raise CliError(f"mask file not found: {args.mask}")
        mask = imaging.load_mask(args.mask)
    elif args.pattern:
        try:
            pattern = imaging.parse_pattern(args.pattern)
            mask = imaging.make_mask(pattern, *shape)
        except (ValueError, imaging.GeometryError) as exc:
            raise CliError(f"bad pattern {args.pattern!r}: {exc}") from exc
    else:
        raise CliError("either --mask or --pattern is required")
    if mask.shape != shape:
        raise CliError(
            f"mask shape {mask.shape} does not match input {shape}")
    return mask


def _build_config(args) -> SolverConfig:
    if args.method in ("qtnn", "wqtnn", "dwqtnn") and args.rank is None:
        raise CliError(f"--rank is required for method {args.method}")
    if args.method in ("qtnn", "qnn-baseline"):
        cfg = SolverConfig.qtnn_defaults(r=args.rank or 1)
    else:
        cfg = SolverConfig.dwqtnn_defaults(r=args.rank or 1)
    overrides = {}
    for flag, name in (("rho", "rho"), ("beta0", "beta0"), ("cap", "beta_max"),
                       ("tol", "outer_tol"), ("inner_tol", "inner_tol"),
                       ("max_outer", "max_outer"), ("max_inner", "max_inner"),
                       ("theta1", "theta1"), ("theta2", "theta2"),
                       ("weight_side", "weight_side"), ("seed", "rng_seed")):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[name] = value
    try:
        return replace(cfg, **overrides)
    except ValueError as exc:
        raise CliError(f"invalid solver configuration: {exc}") from exc


def _run_method(method: str, data: QMatrix, mask: Mask, cfg: SolverConfig):
    solver = {"qtnn": qtnn_complete, "wqtnn": wqtnn_complete,
              "dwqtnn": dwqtnn_complete,
              "qnn-baseline": qnn_svt_baseline}[method]
    return solver(data, mask, cfg)


def _report_row(inp: LoadedInput, method: str, pattern: str,
                cfg: SolverConfig, report) -> dict:
    row = {"image": inp.name, "method": method, "r": cfg.r,
           "pattern": pattern, "psnr": None, "ssim": None, "rel_error": None,
           "iterations": report.outer_iterations,
           "wall_seconds": report.wall_seconds,
           "converged": report.converged, "seed": cfg.rng_seed}
    if inp.is_image:
        rec = imaging.encode(imaging.decode(report.recovered))
        row["psnr"] = imaging.psnr(inp.truth, rec)
        row["ssim"] = imaging.ssim(inp.truth, rec)
    elif inp.truth is not None:
        denom = max(inp.truth.norm(), np.finfo(float).tiny)
        row["rel_error"] = (report.recovered - inp.truth).norm() / denom
    return row


def _atomic_write(path: str, writer) -> None:
    """Write via a temp file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            writer(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path: str, rows: list[dict]) -> None:
    def do_write(fh):
        w = csv.DictWriter(fh, fieldnames=REPORT_COLUMNS)
        w.writeheader()
        for row in rows:
            out = dict(row)
            if out["psnr"] == math.inf:
                out["psnr"] = "inf"
            w.writerow(out)

    _atomic_write(path, do_write)


def _save_recovered(inp: LoadedInput, report, path: str) -> None:
    if inp.is_image:
        directory = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=os.path.splitext(path)[1])
        os.close(fd)
        try:
            imaging.save_image(imaging.decode(report.recovered), tmp)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    else:
        def do_write(fh):
            json.dump({"rows": report.recovered.rows,
                       "cols": report.recovered.cols,
                       "planes": report.recovered.planes.tolist()}, fh)

        _atomic_write(path, do_write)


def _thread_count(n_tasks: int) -> int:
    cap = os.environ.get("QUATCOMP_THREADS")
    try:
        cap = int(cap) if cap else 1
    except ValueError:
        cap = 1
    return max(1, min(cap, n_tasks))


# -- subcommands ----------------------------------------------------------

def cmd_complete(args) -> int:
    inp = _load_input(args.input)
    mask = _resolve_mask(args, inp.data.shape)
    cfg = _build_config(args)
    report = _run_method(args.method, inp.data, mask, cfg)
    row = _report_row(inp, args.method, args.pattern or args.mask, cfg, report)
    if args.out:
        _save_recovered(inp, report, args.out)
    if args.report:
        _write_csv(args.report, [row])
    print(f"{args.method} r={cfg.r} iterations={row['iterations']} "
          f"converged={row['converged']} psnr={row['psnr']} "
          f"rel_error={row['rel_error']}")
    return 0 if report.converged else 2


def cmd_mask(args) -> int:
    try:
        pattern = imaging.parse_pattern(args.pattern)
        mask = imaging.make_mask(pattern, args.rows, args.cols)
    except (ValueError, imaging.GeometryError) as exc:
        raise CliError(f"bad pattern {args.pattern!r}: {exc}") from exc
    if args.out.endswith(".json"):
        imaging.save_mask_json(mask, args.out)
    else:
        imaging.save_mask_png(mask, args.out)
    print(f"mask {mask.rows}x{mask.cols} observed={mask.count()} "
          f"-> {args.out}")
    return 0


def _sweep_rows(args, inp: LoadedInput, mask: Mask,
                ranks: list[int]) -> list[dict]:
    def run_one(r: int) -> dict:
        sub = argparse.Namespace(**vars(args))
        sub.rank = r
        cfg = _build_config(sub)
        report = _run_method(args.method, inp.data, mask, cfg)
        return _report_row(inp, args.method, args.pattern or args.mask,
                           cfg, report)

    workers = _thread_count(len(ranks))
    if workers == 1:
        return [run_one(r) for r in ranks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_one, ranks))


def _score(row: dict) -> float:
    if row["psnr"] is not None:
        return float(row["psnr"])
    if row["rel_error"] is not None:
        return -float(row["rel_error"])
    return -math.inf


def cmd_sweep(args) -> int:
    if args.r_max < args.r_min or args.r_min < 1:
        raise CliError(f"empty or invalid rank range "
                       f"[{args.r_min}, {args.r_max}]")
    inp = _load_input(args.input)
    mask = _resolve_mask(args, inp.data.shape)
    ranks = list(range(args.r_min, args.r_max + 1))
    rows = _sweep_rows(args, inp, mask, ranks)
    best = max(rows, key=_score)
    best_row = dict(best)
    best_row["image"] = f"best:{best_row['image']}"
    rows.append(best_row)
    if args.report:
        _write_csv(args.report, rows)
    for row in rows:
        print(f"r={row['r']} psnr={row['psnr']} rel_error={row['rel_error']} "
              f"converged={row['converged']}")
    return 0


def cmd_bench(args) -> int:
    try:
        with open(args.config) as fh:
            config = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read bench config {args.config}: {exc}") from exc
    try:
        inputs = config["inputs"]
        methods = config["methods"]
        patterns = config["patterns"]
    except (KeyError, TypeError) as exc:
        raise CliError(f"malformed bench config: missing {exc}") from exc
    for method in methods:
        if method not in METHODS:
            raise CliError(f"unknown method {method!r} in bench config")
    overrides = config.get("config", {})
    rank = int(overrides.get("r", 1))

    tasks = [(inp_spec, method, pattern)
             for inp_spec in inputs for method in methods
             for pattern in patterns]

    def run_one(task):
        inp_spec, method, pattern_text = task
        inp = _load_input(inp_spec)
        pattern = imaging.parse_pattern(pattern_text)
        mask = imaging.make_mask(pattern, *inp.data.shape)
        if method in ("qtnn", "qnn-baseline"):
            cfg = SolverConfig.qtnn_defaults(r=rank)
        else:
            cfg = SolverConfig.dwqtnn_defaults(r=rank)
        allowed = {k: v for k, v in overrides.items() if k != "r"}
        if allowed:
            cfg = replace(cfg, **allowed)
        report = _run_method(method, inp.data, mask, cfg)
        return _report_row(inp, method, pattern_text, cfg, report)

    workers = _thread_count(len(tasks))
    if workers == 1:
        rows = [run_one(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_one, tasks))

    per_method = {}
    for method in methods:
        times = [r["wall_seconds"] for r in rows if r["method"] == method]
        per_method[method] = {"runs": len(times),
                              "mean_wall_seconds": float(np.mean(times))}
    summary = {"rows": [_jsonable(r) for r in rows], "per_method": per_method}
    _validate_summary(summary)
    if args.report:
        _write_csv(args.report, rows)
    if args.summary:
        _atomic_write(args.summary, lambda fh: json.dump(summary, fh, indent=2))
    for method, stats in per_method.items():
        print(f"{method}: runs={stats['runs']} "
              f"mean_wall_seconds={stats['mean_wall_seconds']:.3f}")
    return 0


def _jsonable(row: dict) -> dict:
    out = dict(row)
    if out["psnr"] == math.inf:
        out["psnr"] = "inf"
    return out


def _validate_summary(summary: dict) -> None:
    import jsonschema

    schema = json.loads(importlib.resources.files("quatcomp")
                        .joinpath("report_schema.json").read_text())
    jsonschema.validate(summary, schema)


# -- parser ---------------------------------------------------------------

def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--beta0", "--eps1", dest="beta0", type=float, default=None)
    p.add_argument("--cap", type=float, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--inner-tol", dest="inner_tol", type=float, default=None)
    p.add_argument("--max-outer", dest="max_outer", type=int, default=None)
    p.add_argument("--max-inner", dest="max_inner", type=int, default=None)
    p.add_argument("--theta1", type=float, default=None)
    p.add_argument("--theta2", type=float, default=None)
    p.add_argument("--weight-side", dest="weight_side",
                   choices=("rows", "cols"), default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--mask", default=None, help="mask file (png or json)")
    p.add_argument("--pattern", default=None,
                   help="pattern, e.g. random:p=0.5,seed=7")
    p.add_argument("--report", default=None, help="CSV report path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quatcomp",
        description="Low-rank quaternion matrix completion for color images")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("complete", help="recover one input through a mask")
    p.add_argument("--input", required=True,
                   help="image path or synth:MxN:rank=K:scale=S:seed=T")
    _add_solver_flags(p)
    p.add_argument("--out", default=None, help="recovered output path")
    p.set_defaults(func=cmd_complete)

    p = sub.add_parser("mask", help="generate a mask file")
    p.add_argument("--pattern", required=True)
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("sweep", help="sweep the truncation rank")
    p.add_argument("--input", required=True)
    _add_solver_flags(p)
    p.add_argument("--r-min", dest="r_min", type=int, required=True)
    p.add_argument("--r-max", dest="r_max", type=int, required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="cross-product benchmark from a config")
    p.add_argument("--config", required=True, help="JSON bench config")
    p.add_argument("--report", default=None, help="CSV report path")
    p.add_argument("--summary", default=None, help="JSON summary path")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; the contract wants 1
        return 1 if exc.code else 0
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
