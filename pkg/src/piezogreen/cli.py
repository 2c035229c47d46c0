"""Command-line front end.

Exit codes: 0 success, 1 validation/computation failure, 2 usage error.
Data goes to stdout (or ``--out``), diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .decoupled import decoupled_consistency
from .fields import load_points, load_sources, superpose
from .greens import UPPER_LABELS, GreensFunction, thread_count, upper_triangle
from .kernels import determinant_identity_check
from .materials import (KEYS, MaterialFileError, ValidationError, builtin_material, load_material)
from .oracle import DEFAULT_NODES, OriginSingularity, integrate, scaled_deviation
from .spectrum import DegenerateSpectrum, residue_zero_diagnostic, solve_spectrum

DEFAULT_SEED = 12345
VALIDATE_TOL = 1e-8
BUILTINS = ("zno", "pzt4")


class UsageError(Exception):
    pass


def fmt(v) -> str:
    """17 significant digits: round-trips every double."""
    return format(float(v), ".17g")


def fmt_complex(z) -> str:
    z = complex(z)
    if z.imag == 0:
        return fmt(z.real)
    sign = "+" if z.imag >= 0 else "-"
    return f"{fmt(z.real)}{sign}{fmt(abs(z.imag))}j"


def read_material(spec: str):
    path = Path(spec)
    if not path.exists() and spec.lower() in BUILTINS:
        return builtin_material(spec.lower())
    return load_material(path)


def parse_vector(text: str, n: int, what: str):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{what}: expected {n} comma-separated numbers, got {text!r}") from None
    if len(vals) != n:
        raise UsageError(f"{what}: expected {n} comma-separated numbers, got {len(vals)}")
    return vals


def parse_range(text: str, what: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"{what}: expected start:stop:count, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"{what}: expected start:stop:count, got {text!r}") from None
    if n < 1:
        raise UsageError(f"{what}: count must be >= 1")
    return np.linspace(lo, hi, n)


def _out(args):
    if getattr(args, "out", None):
        return open(args.out, "w", encoding="utf-8", newline="")
    return None


def cmd_roots(args, stdout, stderr) -> int:
    m = read_material(args.material)
    try:
        spec = solve_spectrum(m)
    except DegenerateSpectrum as exc:
        spec = exc.spectrum
        print(f"error: {exc}", file=stderr)
        if spec is None:
            return 1
        status = 1
    else:
        status = 0
    rho, z = parse_vector(args.point, 2, "--point")
    s = residue_zero_diagnostic(spec, rho, z)
    for name, value in zip("ABCD", spec.coefficients):
        print(f"coeff{name} = {fmt(value)}", file=stdout)
    for l, a in enumerate(spec.roots, 1):
        print(f"A{l} = {fmt_complex(a)}", file=stdout)
    print(f"degeneracy_gap = {fmt(spec.degeneracy_gap)}", file=stdout)
    print(f"residue zeros at rho={fmt(rho)}, z={fmt(z)}:", file=stdout)
    for l, v in enumerate(s, 1):
        print(f"s{l} = {fmt_complex(v)}  |s{l}| = {fmt(abs(v))}", file=stdout)
    if np.any(np.abs(s) >= 1):
        print("error: a residue zero lies outside the unit circle", file=stderr)
        status = 1
    return status


def cmd_eval(args, stdout, stderr) -> int:
    m = read_material(args.material)
    x, y, z = parse_vector(args.point, 3, "--point")
    green = GreensFunction(m)
    if args.repr == "cyl":
        comp = green.cylindrical(float(np.hypot(x, y)), z)
        names = ("G_phiphi", "G_rhorho", "G_rhoz", "G_zz", "G_rho4", "G_z4", "G_44")
        values = [getattr(comp, n) for n in names]
    else:
        names = UPPER_LABELS
        values = upper_triangle(green(x, y, z))
    if args.format == "csv":
        print(",".join(names), file=stdout)
        print(",".join(fmt(v) for v in values), file=stdout)
    else:
        for n, v in zip(names, values):
            print(f"{n:9s} {fmt(v)}", file=stdout)
    return 0


def cmd_grid(args, stdout, stderr) -> int:
    if args.axis_plane != "rz":
        raise UsageError("only --axis-plane rz is supported")
    m = read_material(args.material)
    rho = parse_range(args.rho, "--rho")
    z = parse_range(args.z, "--z")
    if np.any(rho < 0):
        raise UsageError("--rho values must be non-negative")
    rr, zz = np.meshgrid(rho, z, indexing="ij")
    pts = np.column_stack([rr.ravel(), np.zeros(rr.size), zz.ravel()])
    g = GreensFunction(m).evaluate(pts, threads=args.threads)
    vals = upper_triangle(g)
    fh = _out(args)
    try:
        w = csv.writer(fh or stdout, lineterminator="\n")
        w.writerow(["rho", "z", *UPPER_LABELS])
        for p, row in zip(pts, vals):
            w.writerow([fmt(p[0]), fmt(p[2]), *(fmt(v) for v in row)])
    finally:
        if fh:
            fh.close()
    return 0


def cmd_validate(args, stdout, stderr) -> int:
    m = read_material(args.material)
    if args.points < 1:
        raise UsageError("--points must be >= 1")
    green = GreensFunction(m)
    print(f"material: valid; degeneracy gap {green.spectrum.degeneracy_gap:.3e}", file=stdout)
    det = max(determinant_identity_check(m, a) for a in (0.0, 0.5, 1.0, 2.0, 10.0))
    print(f"determinant identity residual: {det:.3e}", file=stdout)
    rng = np.random.default_rng(args.seed)
    pts = rng.standard_normal((args.points, 3))
    g = green.evaluate(pts, threads=args.threads)
    dev = np.array([scaled_deviation(g[i], integrate(green.cartesian, pts[i], args.nodes))
                    for i in range(len(pts))])
    print(f"points: {len(pts)}  nodes: {args.nodes}  seed: {args.seed}", file=stdout)
    print(f"max relative deviation:  {dev.max():.6e}", file=stdout)
    print(f"mean relative deviation: {dev.mean():.6e}", file=stdout)
    if dev.max() > VALIDATE_TOL:
        print(f"error: deviation exceeds {VALIDATE_TOL:g}", file=stderr)
        return 1
    return 0


def cmd_decoupled(args, stdout, stderr) -> int:
    m = read_material(args.material)
    if not m.is_decoupled:
        print("note: piezoelectric constants set to zero for the decoupled check", file=stderr)
        m = m.decoupled()
    report = decoupled_consistency(m)
    print(report, file=stdout)
    return 0 if report.passed else 1


def cmd_field(args, stdout, stderr) -> int:
    m = read_material(args.material)
    sources = load_sources(args.sources)
    pts = load_points(args.points)
    u = superpose(GreensFunction(m), sources, pts, threads=args.threads)
    fh = _out(args)
    try:
        w = csv.writer(fh or stdout, lineterminator="\n")
        w.writerow(["x", "y", "z", "u1", "u2", "u3", "phi"])
        for p, row in zip(pts, u):
            w.writerow([fmt(v) for v in (*p, *row)])
    finally:
        if fh:
            fh.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="piezogreen",
        description="Closed-form electroelastic Green's function of hexagonal piezoelectrics.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    material_help = f"material file (keys: {' '.join(KEYS)}) or a builtin: {', '.join(BUILTINS)}"

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.add_argument("--material", required=True, help=material_help)
        p.set_defaults(func=func)
        return p

    def threads(p):
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default: PIEZOGREEN_THREADS or all cores)")

    p = add("roots", cmd_roots, "cubic coefficients, material roots and residue-zero diagnostic")
    p.add_argument("--point", default="1,1", help="rho,z for the |s_l| diagnostic (default 1,1)")

    p = add("eval", cmd_eval, "Green's function at one point")
    p.add_argument("--point", required=True, help="x,y,z in metres")
    p.add_argument("--repr", choices=("cart", "cyl"), default="cart")
    p.add_argument("--format", choices=("pretty", "csv"), default="pretty")

    p = add("grid", cmd_grid, "Green's function on a (rho, z) grid, CSV")
    p.add_argument("--axis-plane", default="rz", help="sampling plane (only rz)")
    p.add_argument("--rho", required=True, help="start:stop:count")
    p.add_argument("--z", required=True, help="start:stop:count")
    p.add_argument("--out", help="output CSV (default stdout)")
    threads(p)

    p = add("validate", cmd_validate, "closed form against angular quadrature at random points")
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--nodes", type=int, default=DEFAULT_NODES)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    threads(p)

    add("decoupled", cmd_decoupled, "zero-coupling consistency report")

    p = add("field", cmd_field, "displacement and potential of point sources, CSV")
    p.add_argument("--sources", required=True, help="lines 'x y z F1 F2 F3 F4' with F4 = -charge")
    p.add_argument("--points", required=True, help="lines 'x y z'")
    p.add_argument("--out", help="output CSV (default stdout)")
    threads(p)
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        parser.print_usage(stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(stderr)
        return 2
    if getattr(args, "threads", None) is None and hasattr(args, "threads"):
        try:
            args.threads = thread_count()
        except ValueError as exc:
            print(f"error: {exc}", file=stderr)
            return 2
    try:
        return args.func(args, stdout, stderr)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return 2
    except DegenerateSpectrum as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    except (ValidationError, MaterialFileError, OriginSingularity, ValueError,
            ArithmeticError, OSError) as exc:
        print(f"error: {exc}", file=stderr)
        return 1


run = main


if __name__ == "__main__":
    sys.exit(main())
