"""
Command-line front end.

    changeprob analyze in.pgm --angles 30 --delays 3:23 --out results/
    changeprob simulate --kind surface --size 512 512 --hx 0.4 --hy 0.8 --seed 1 --out data/
    changeprob validate-fbm --hurst 0.5 --n 65536 --reps 100 --delays 3:32 --out fbm/
    changeprob noise in.pgm --angles 20 --delays 3,25 --out noise/
    changeprob theorem1-check --alpha 2 --beta 0.8
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import warnings

import numpy as np

from . import __version__
from .changes import AnalysisConfig, analyze, median_hurst, tau_max
from .gaussian import GaussianModel, theorem1_h_of_delay
from .ingest import HeightField, crop, grid_point_cloud, image_std, read_pgm, read_xyz, write_pgm
from .profiles import INTERPOLATIONS
from .reports import (render_delay_svg, render_median_polar_svg, render_polar_svg, run_fbm_validation,
                      run_noise_experiment, write_csv)
from .simulate import RNG_ALGORITHM, simulate_fbm, simulate_surface

__all__ = ["main", "parse_delays", "build_parser"]

DEFAULT_REL_SIGMAS = "0,1e-4,1e-3,1e-2,5e-2,1e-1"


class CliError(Exception):
    """Bad user input detected after argument parsing."""


def parse_delays(spec: str | None, default_max: int | None = None) -> tuple:
    """
    Parse ``a:b`` (inclusive integer range) or ``t1,t2,...``.

    ``None`` or an empty string gives ``3:default_max``.
    """
    if not spec:
        if default_max is None:
            raise CliError("no delays given and no default upper bound available")
        if default_max < 3:
            raise CliError(f"default delay range 3:{default_max} is empty")
        return tuple(range(3, default_max + 1))
    try:
        if ":" in spec:
            a, b = spec.split(":", 1)
            lo, hi = int(a), int(b)
            if hi < lo:
                raise CliError(f"empty delay range {spec!r}")
            return tuple(range(lo, hi + 1))
        out = tuple(int(t) for t in spec.split(",") if t.strip())
    except ValueError as exc:
        raise CliError(f"cannot parse delays {spec!r}") from exc
    if not out:
        raise CliError(f"cannot parse delays {spec!r}")
    return out


def _floats(spec: str) -> list:
    try:
        return [float(s) for s in spec.split(",") if s.strip()]
    except ValueError as exc:
        raise CliError(f"cannot parse number list {spec!r}") from exc


def _load_field(args) -> HeightField:
    path = args.input
    if not os.path.exists(path):
        raise CliError(f"input file not found: {path}")
    if path.lower().endswith((".xyz", ".txt", ".csv")):
        if args.cell_size is None:
            raise CliError("--cell-size is required for point-cloud input")
        field = grid_point_cloud(read_xyz(path), args.cell_size)
    else:
        field = read_pgm(path)
    if args.crop:
        try:
            x0, y0, w, h = (int(v) for v in args.crop.split(","))
        except ValueError as exc:
            raise CliError(f"--crop expects x0,y0,w,h, got {args.crop!r}") from exc
        field = crop(field, x0, y0, w, h)
    return field


def _out_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _write_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_analyze(args) -> int:
    field = _load_field(args)
    tmax = tau_max(field.w_x, field.w_y)
    delays = parse_delays(args.delays, tmax)
    config = AnalysisConfig(n_phi=args.angles, delays=delays, delta=args.delta,
                            detrend=not args.no_detrend, interpolation=args.interp)
    matrix = analyze(field, config, workers=args.workers)
    out = _out_dir(args.out)
    write_csv(matrix, os.path.join(out, "p_hat.csv"), "p_hat")
    write_csv(matrix, os.path.join(out, "h_hat.csv"), "h_hat")
    render_polar_svg(matrix, None, os.path.join(out, "polar.svg"))
    render_delay_svg(matrix, os.path.join(out, "delay.svg"))
    hi = min(tmax, int(matrix.delays.max()))
    wanted = set(range(3, hi + 1))
    if hi >= 3 and wanted <= set(int(t) for t in matrix.delays):
        med = median_hurst(matrix, 3, hi)
        render_median_polar_svg(matrix.angles_deg, med, os.path.join(out, "median_polar.svg"))
    else:
        print(f"warning: delays do not cover 3..{hi}; median_polar.svg not written", file=sys.stderr)
    print(f"analyzed {field.w_x}x{field.w_y} field: {len(matrix.angles_deg)} angles x "
          f"{len(matrix.delays)} delays -> {out}")
    return 0


def cmd_simulate(args) -> int:
    out = _out_dir(args.out)
    info = {"kind": args.kind, "seed": args.seed, "rng": RNG_ALGORITHM, "version": __version__}
    if args.kind == "surface":
        w, h = args.size
        field = simulate_surface(w, h, args.hx, args.hy, args.seed)
        path = os.path.join(out, "surface.pgm")
        write_pgm(field, path, bitdepth=args.bitdepth)
        info.update(w=w, h=h, H_x=args.hx, H_y=args.hy, bitdepth=args.bitdepth)
    else:
        sim = simulate_fbm(args.n, args.hurst, args.seed)
        path = os.path.join(out, "fbm_path.csv")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("k,x\n")
            fh.writelines(f"{k},{v!r}\n" for k, v in enumerate(sim.path.tolist()))
        info.update(n=args.n, H=args.hurst)
    _write_json(info, os.path.join(out, "run.json"))
    print(f"wrote {path}")
    return 0


def cmd_validate_fbm(args) -> int:
    taus = parse_delays(args.delays, None)
    report = run_fbm_validation(args.hurst, args.n, args.reps, taus, args.seed)
    out = _out_dir(args.out)
    report.write(os.path.join(out, "fbm_validation.csv"), os.path.join(out, "fbm_validation.svg"))
    m = report.mean
    print(f"H = {args.hurst}: mean H(tau) over tau in {taus[0]}..{taus[-1]} ranges "
          f"{m.min():.4f} .. {m.max():.4f} (spread {np.ptp(m):.4f})")
    return 0


def cmd_noise(args) -> int:
    field = _load_field(args)
    taus = parse_delays(args.delays, None)
    sig_img = image_std(field)
    sigmas = [r * sig_img for r in _floats(args.sigmas)]
    report = run_noise_experiment(field, sigmas, taus, n_phi=args.angles, seed=args.seed,
                                  interpolation=args.interp, detrend=not args.no_detrend)
    out = _out_dir(args.out)
    report.write(os.path.join(out, "noise.csv"), os.path.join(out, "noise.svg"))
    _write_json({"seed": args.seed, "rng": RNG_ALGORITHM, "sigma_img": sig_img,
                 "n_phi": args.angles, "taus": list(taus)}, os.path.join(out, "run.json"))
    print(f"sigma_img = {sig_img:.6g}; wrote {out}/noise.csv")
    return 0


def cmd_theorem1(args) -> int:
    model = GaussianModel.cauchy(args.alpha, args.beta)
    target = model.hurst
    rows = ["n,tau,H_tau,abs_err"]
    for n in range(args.nmax + 1):
        h = theorem1_h_of_delay(model, 2 ** n)
        rows.append(f"{n},{2 ** n},{h!r},{abs(h - target)!r}")
    text = "\n".join(rows) + "\n"
    sys.stdout.write(f"# Cauchy increments alpha={args.alpha} beta={args.beta}, limit H = {target}\n")
    sys.stdout.write(text)
    if args.out:
        out = _out_dir(args.out)
        with open(os.path.join(out, "theorem1.csv"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return 0


def _add_analysis_flags(p, default_angles):
    p.add_argument("input", help="binary PGM (P5) or XYZ point cloud")
    p.add_argument("--angles", type=int, default=default_angles, help="number of directions in [0, 180)")
    p.add_argument("--delays", default=None, help="a:b (inclusive) or comma list; default 3:tau_max")
    p.add_argument("--delta", type=float, default=1.0, help="spacing between parallel profiles, pixels")
    p.add_argument("--no-detrend", action="store_true", help="skip plane removal")
    p.add_argument("--interp", choices=INTERPOLATIONS, default="bilinear")
    p.add_argument("--cell-size", type=float, default=None, help="grid spacing for XYZ input")
    p.add_argument("--crop", default=None, help="x0,y0,w,h applied after loading")
    p.add_argument("--out", default=".", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="changeprob", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="change-probability and Hurst matrices for a height field")
    _add_analysis_flags(p, 30)
    p.add_argument("--workers", type=int, default=1, help="threads for the per-angle work")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="synthetic surface (PGM) or fBm path (CSV)")
    p.add_argument("--kind", choices=("surface", "fbm"), default="surface")
    p.add_argument("--size", type=int, nargs=2, default=(512, 512), metavar=("W", "H"))
    p.add_argument("--hx", type=float, default=0.4, help="Hurst exponent along rows")
    p.add_argument("--hy", type=float, default=0.8, help="Hurst exponent along columns")
    p.add_argument("--n", type=int, default=2 ** 16, help="fBm path length")
    p.add_argument("--hurst", type=float, default=0.7, help="fBm Hurst exponent")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bitdepth", type=int, choices=(8, 16), default=16)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate-fbm", help="Hurst estimates on simulated fBm paths")
    p.add_argument("--hurst", type=float, default=0.5)
    p.add_argument("--n", type=int, default=2 ** 16)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--delays", default="3:32")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_validate_fbm)

    p = sub.add_parser("noise", help="robustness of the estimators to white noise")
    _add_analysis_flags(p, 20)
    p.set_defaults(delays="3,25")
    p.add_argument("--sigmas", default=DEFAULT_REL_SIGMAS, help="noise levels relative to the image std")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("theorem1-check", help="H(2**n) for Cauchy-class increments")
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--beta", type=float, default=0.8)
    p.add_argument("--nmax", type=int, default=10)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_theorem1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
