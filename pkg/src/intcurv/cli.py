"""Command line interface: ``intcurv {gen,invariants,estimate,sweep,riemann}``.

Every command writes a CSV whose ``#`` header records the tool version and
the full flag set.  Exit codes: 0 success, 2 invalid input, 3 numerical
failure (only escalated from row-level flags with ``--strict``).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import component_asymptotics, patch_asymptotics, shell_asymptotics
from .convergence import geometric_grid, line_angle, loglog_slope, matched_eigenvalues
from .descriptors import (CurvatureSingularityError, DescriptorError, curvature_from_component,
                          curvature_from_patch, eig_sym)
from .domains import (ConvergenceError, QuadratureConfig, cloud_patch_invariants,
                      component_invariants, patch_invariants, shell_invariants)
from .models import (ChartError, GraphModel, HypersurfaceModel, PointCloud, SphereModel,
                     SubmanifoldGraph, format_cloud_csv, read_cloud_csv,
                     write_cloud_csv)
from .submanifold import AdaptedFrame, FrameError, submanifold_curvature

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3


class InvalidInput(Exception):
    pass


class NumericalFailure(Exception):
    pass


# ---------------------------------------------------------------------------
# argument handling


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _common(p: argparse.ArgumentParser, model=True, scales=True):
    p.add_argument("--input", help="point cloud CSV (# dim=<d> header)")
    p.add_argument("--output", default="-", help="output CSV path, '-' for stdout")
    if model:
        p.add_argument("--model", choices=["sphere", "graph", "codim2"],
                       help="analytic model instead of an input cloud")
        p.add_argument("--kappas", type=_floats, help="graph principal curvatures, e.g. 2,1")
        p.add_argument("--cubic-scale", type=float, default=0.0,
                       help="std-dev of random symmetric cubic graph coefficients")
        p.add_argument("--model-seed", type=int, default=0, help="seed for cubic coefficients")
        p.add_argument("--radius", type=float, default=1.0, help="sphere radius")
        p.add_argument("--dim", type=int, help="ambient dimension")
    if scales:
        p.add_argument("--eps", type=float, default=0.2, help="largest scale eps0")
        p.add_argument("--levels", type=int, default=4, help="scales eps0 * 2**-j, j < levels")
        p.add_argument("--eps-grid", type=_floats, help="explicit strictly decreasing scales")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--config", help="key = value file; command-line flags take precedence")
    p.add_argument("--strict", action="store_true", help="exit 3 on any numerical flag")


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="intcurv", description="Curvature from PCA integral invariants.")
    parser.add_argument("--version", action="version", version=f"intcurv {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("gen", help="sample a synthetic patch into a cloud CSV")
    _common(p, scales=False)
    p.add_argument("--eps", type=float, default=0.2, help="sampling ball radius")
    p.add_argument("--count", type=int, default=1000)
    subs["gen"] = p

    p = sub.add_parser("invariants", help="volume, barycenter and eigenvalues per scale")
    _common(p)
    p.add_argument("--domain", choices=["patch", "component", "shell"], default="patch")
    p.add_argument("--center", type=_floats, help="ball centre for cloud input (default origin)")
    p.add_argument("--area", type=float, help="patch area estimate for cloud input")
    subs["invariants"] = p

    p = sub.add_parser("estimate", help="curvature descriptors per scale")
    _common(p)
    p.add_argument("--domain", choices=["patch", "component"], default="patch")
    p.add_argument("--center", type=_floats)
    p.add_argument("--area", type=float)
    p.add_argument("--h-tol", type=float, default=1e-3)
    subs["estimate"] = p

    p = sub.add_parser("sweep", help="numerical vs asymptotic invariants with slope fit")
    _common(p)
    p.add_argument("--domain", choices=["patch", "component", "shell"], default="patch")
    p.add_argument("--quantity", choices=["volume", "barycenter", "eigenvalues"],
                   action="append", help="repeatable; default all three")
    subs["sweep"] = p

    p = sub.add_parser("riemann", help="second fundamental form and Riemann tensor")
    _common(p, scales=False)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--n", type=int, help="intrinsic dimension (detected when omitted)")
    p.add_argument("--count", type=int, default=100000, help="sample size for --model")
    p.add_argument("--sample-radius", type=float, help="sampling radius (default 1.05 eps)")
    p.add_argument("--center", type=_floats)
    p.add_argument("--frame", choices=["estimated", "exact"], default="estimated")
    p.add_argument("--h-tol", type=float, default=1e-3)
    subs["riemann"] = p
    return parser, subs


def read_config(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInput(f"{path}:{lineno}: expected 'key = value'")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def parse_args(argv):
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = read_config(args.config)
        sp = subs[args.command]
        known = {a.dest: a for a in sp._actions}
        defaults = {}
        for k, v in cfg.items():
            if k not in known or k in ("config", "help"):
                raise InvalidInput(f"unknown config key {k!r} for {args.command}")
            act = known[k]
            if isinstance(act, argparse._StoreTrueAction):
                defaults[k] = v.lower() in ("1", "true", "yes", "on")
            elif act.type is not None:
                defaults[k] = act.type(v)
            else:
                defaults[k] = v
        sp.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


# ---------------------------------------------------------------------------
# shared helpers


def _model_from_args(args):
    if args.model is None:
        return None
    if args.model == "sphere":
        dim = args.dim or 3
        return SphereModel(args.radius, dim)
    if args.model == "codim2":
        H = np.array([[[1.0, 0.0], [0.0, -1.0]], [[0.0, 1.0], [1.0, 0.0]]])
        return SubmanifoldGraph(H)
    if not args.kappas:
        raise InvalidInput("--model graph needs --kappas")
    n = len(args.kappas)
    if args.dim is not None and args.dim != n + 1:
        raise InvalidInput(f"--dim {args.dim} disagrees with {n} curvatures")
    cubic = None
    if args.cubic_scale:
        rng = np.random.default_rng(args.model_seed)
        cubic = rng.normal(scale=args.cubic_scale, size=(n,) * 3)
    return GraphModel(args.kappas, cubic=cubic)


def _scales(args) -> list:
    if getattr(args, "eps_grid", None):
        s = list(args.eps_grid)
    else:
        if args.levels < 1:
            raise InvalidInput("--levels must be >= 1")
        s = list(geometric_grid(args.eps, args.levels))
    if any(not e > 0 for e in s) or any(b >= a for a, b in zip(s, s[1:])):
        raise InvalidInput("scales must be positive and strictly decreasing")
    return s


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _header(args, extra=()) -> list:
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("command",)}
    lines = [f"intcurv {__version__} {args.command}",
             "flags: " + " ".join(f"{k}={_flag_text(v)}" for k, v in flags.items())]
    return lines + list(extra)


def _flag_text(v):
    if isinstance(v, list):
        return ",".join(_fmt(x) for x in v)
    return _fmt(v) if v is not None else "none"


class _Writer:
    def __init__(self, path):
        self.path = path
        self.lines = []

    def comment(self, text):
        self.lines.append(f"# {text}")

    def row(self, values):
        self.lines.append(",".join(_fmt(v) for v in values))

    def close(self):
        text = "\n".join(self.lines) + "\n"
        if self.path in (None, "-"):
            sys.stdout.write(text)
        else:
            Path(self.path).write_text(text)


def _pmap(fn, items, jobs):
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def _load_cloud(args) -> PointCloud:
    try:
        return read_cloud_csv(args.input)
    except OSError as e:
        raise InvalidInput(f"cannot read {args.input}: {e}")


def _source(args):
    model = _model_from_args(args)
    if (model is None) == (args.input is None):
        raise InvalidInput("give exactly one of --model or --input")
    return model, (None if model is not None else _load_cloud(args))


def _center(args, dim):
    c = np.zeros(dim) if not getattr(args, "center", None) else np.array(args.center)
    if c.shape != (dim,):
        raise InvalidInput(f"--center needs {dim} coordinates")
    return c


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args) -> int:
    if args.count < 1:
        raise InvalidInput("--count must be >= 1")
    model = _model_from_args(args)
    if model is None:
        raise InvalidInput("gen needs --model")
    cloud = model.sample_patch(args.eps, args.count, seed=args.seed)
    manifest = [f"intcurv {__version__} gen", f"model={model!r}"]
    manifest.append("flags: " + " ".join(
        f"{k}={_flag_text(v)}" for k, v in sorted(vars(args).items())
        if k not in ("command", "output", "jobs")))
    if args.output in (None, "-"):
        sys.stdout.write(format_cloud_csv(cloud, manifest))
    else:
        write_cloud_csv(cloud, args.output, manifest)
    return EXIT_OK


def _model_invariants(model, domain, eps):
    if domain == "patch":
        return patch_invariants(model, eps=eps)
    if domain == "component":
        return component_invariants(model, eps=eps)
    return shell_invariants(model, eps=eps)


def cmd_invariants(args) -> int:
    model, cloud = _source(args)
    scales = _scales(args)
    if isinstance(model, SubmanifoldGraph):
        raise InvalidInput("invariants needs a hypersurface model or a cloud")
    if cloud is not None and args.domain != "patch":
        raise InvalidInput("clouds only support --domain patch")
    d = model.ambient_dim if model is not None else cloud.ambient_dim

    def one(eps):
        if model is not None:
            return _model_invariants(model, args.domain, eps)
        return cloud_patch_invariants(cloud, _center(args, d), eps, args.area)

    out = _Writer(args.output)
    for line in _header(args):
        out.comment(line)
    out.row(["eps", "volume", "normalized"] + [f"s_{i + 1}" for i in range(d)]
            + [f"lambda_{i + 1}" for i in range(d)] + ["flag"])
    for eps in scales:
        try:
            inv = one(eps)
        except (ValueError, ConvergenceError) as e:
            if args.strict:
                raise NumericalFailure(str(e))
            out.row([eps] + [""] * (2 + 2 * d) + [type(e).__name__])
            continue
        lam = eig_sym(inv.covariance).eigenvalues
        out.row([eps, inv.volume, inv.normalized] + list(inv.barycenter) + list(lam) + [""])
    out.close()
    return EXIT_OK


def _estimate_one(model, cloud, args, eps, d):
    if model is not None:
        if args.domain == "component":
            return curvature_from_component(component_invariants(model, eps=eps))
        return curvature_from_patch(patch_invariants(model, eps=eps), h_tol=args.h_tol)
    inv = cloud_patch_invariants(cloud, _center(args, d), eps, args.area)
    return curvature_from_patch(inv, h_tol=args.h_tol)


def cmd_estimate(args) -> int:
    model, cloud = _source(args)
    if isinstance(model, SubmanifoldGraph):
        raise InvalidInput("estimate needs a hypersurface; use riemann for codimension > 1")
    if cloud is not None and args.domain == "component":
        raise InvalidInput("the component domain needs a model with a side classifier")
    scales = _scales(args)
    d = model.ambient_dim if model is not None else cloud.ambient_dim
    n = d - 1
    oracle = model.exact_curvatures() if model is not None else None

    def one(eps):
        try:
            return _estimate_one(model, cloud, args, eps, d), ""
        except CurvatureSingularityError as e:
            return None, "negative_H2"
        except (DescriptorError, ChartError) as e:
            return None, type(e).__name__
        except ValueError:
            return None, "insufficient_neighbors"
        except ConvergenceError:
            return None, "no_convergence"

    results = _pmap(one, scales, args.jobs)
    out = _Writer(args.output)
    extra = []
    if oracle is not None:
        extra.append("reference: " + " ".join(f"kappa_{i + 1}={_fmt(k)}"
                                              for i, k in enumerate(np.sort(oracle.kappas)[::-1])))
    for line in _header(args, extra):
        out.comment(line)
    cols = ["eps"] + [f"kappa_{i + 1}" for i in range(n)] + ["H", "scalar_curv"]
    if oracle is not None:
        cols += [f"angle_dir_{i + 1}" for i in range(n)] + ["angle_normal"]
    out.row(cols + ["flags"])
    failed = False
    for eps, (est, flag) in zip(scales, results):
        if est is None:
            failed = True
            out.row([eps] + [""] * (len(cols) - 1) + [flag])
            continue
        flags = []
        if oracle is not None:
            est = est.oriented(oracle.normal)
        if est.singular:
            flags.append("H_singular")
            failed = True
        if est.umbilic:
            flags.append("umbilic")
        kap = list(est.kappas) if est.kappas is not None else [None] * n
        row = [eps] + kap + [est.H, est.scalar_curv]
        if oracle is not None:
            order = np.argsort(-oracle.kappas, kind="stable")
            if est.kappas is not None and not est.umbilic:
                row += [line_angle(est.principal_directions[i], oracle.directions[order[i]])
                        for i in range(n)]
            else:
                row += [None] * n
            row.append(line_angle(est.normal, oracle.normal))
        out.row(row + [";".join(flags)])
    out.close()
    if failed and args.strict:
        raise NumericalFailure("numerical flags raised (see output)")
    return EXIT_OK


def _sweep_values(model, domain, eps, quantities):
    """Numerical and asymptotic values of the requested quantities at one scale."""
    n = model.n
    k = model.kappas
    N = model.normal
    inv = _model_invariants(model, domain, eps)
    asym = {"patch": patch_asymptotics, "component": component_asymptotics,
            "shell": shell_asymptotics}[domain](n, eps, k)
    rows = []
    if "volume" in quantities:
        rows.append(("volume", 0, inv.volume, asym.volume))
    if "barycenter" in quantities:
        if domain == "shell":
            comp = inv.info["component"]
            rate = inv.volume * float(np.dot(inv.barycenter - comp.barycenter, N)) / comp.volume
            rows.append(("barycenter", 0, rate, asym.barycenter_normal))
        else:
            rows.append(("barycenter", 0, float(np.dot(inv.barycenter - inv.center, N)),
                         asym.barycenter_normal))
    if "eigenvalues" in quantities:
        basis = None
        if domain == "shell":
            basis = eig_sym(inv.info["component"].covariance).eigenvectors
        lam = matched_eigenvalues(inv, k, N, basis=basis)
        for i in range(n + 1):
            rows.append(("eigenvalues", i + 1, lam[i], asym.eigenvalues[i]))
    return rows, asym.truncation_orders


def cmd_sweep(args) -> int:
    model = _model_from_args(args)
    if model is None or not isinstance(model, HypersurfaceModel):
        raise InvalidInput("sweep needs --model sphere or --model graph (an exact oracle)")
    scales = _scales(args)
    quantities = args.quantity or ["volume", "barycenter", "eigenvalues"]
    try:
        results = _pmap(lambda e: _sweep_values(model, args.domain, e, quantities),
                        scales, args.jobs)
    except ConvergenceError as e:
        raise NumericalFailure(str(e))
    orders = results[0][1]
    out = _Writer(args.output)
    extra = ["truncation_orders: " + " ".join(f"{k}={v}" for k, v in orders.items())]
    for line in _header(args, extra):
        out.comment(line)
    out.row(["quantity", "index", "eps", "numerical", "asymptotic", "abs_error"])
    series = {}
    for eps, (rows, _) in zip(scales, results):
        for q, i, num, pred in rows:
            err = abs(num - pred)
            out.row([q, i, eps, num, pred, err])
            series.setdefault((q, i), []).append((eps, num, err))
    if len(scales) < 3:
        print("intcurv: fewer than 3 scales, slope fit refused", file=sys.stderr)
    else:
        for (q, i), vals in series.items():
            e = [v[0] for v in vals]
            rel = max(v[2] / max(abs(v[1]), 1e-300) for v in vals)
            if rel < 1e-12:
                out.comment(f"slope {q}[{i}] = exact (max relative error {rel:.1e})")
            else:
                out.comment(f"slope {q}[{i}] = {loglog_slope(e, [v[2] for v in vals]):.6g}")
    out.close()
    return EXIT_OK


def cmd_riemann(args) -> int:
    model, cloud = _source(args)
    eps = args.eps
    if not eps > 0:
        raise InvalidInput("--eps must be positive")
    frame = None
    if model is not None:
        if args.count < 1:
            raise InvalidInput("--count must be >= 1")
        radius = args.sample_radius or 1.05 * eps
        cloud = model.sample_patch(radius, args.count, seed=args.seed)
        if args.frame == "exact":
            if isinstance(model, SubmanifoldGraph):
                frame = AdaptedFrame(model.tangent_basis, model.normal_basis)
            else:
                frame = AdaptedFrame(model.rotation[:, :-1].T, model.rotation[:, -1:].T)
    elif args.frame == "exact":
        raise InvalidInput("--frame exact needs --model")
    center = _center(args, cloud.ambient_dim)
    try:
        sc = submanifold_curvature(cloud, center, eps, n=args.n, frame=frame, h_tol=args.h_tol)
    except FrameError as e:
        raise NumericalFailure(str(e))
    out = _Writer(args.output)
    provenance = f"frame: {sc.diagnostics['frame_source']}"
    for line in _header(args, [provenance]):
        out.comment(line)
    out.row(["quantity", "i", "j", "k", "l", "value"])
    n, k = sc.n, sc.k
    for j in range(k):
        out.row(["H", j + 1, "", "", "", sc.mean_curvature_vector[j]])
    for a in range(n):
        for b in range(a, n):
            for j in range(k):
                out.row(["II", a + 1, b + 1, j + 1, "", sc.second_fundamental_form[a, b, j]])
    for (a, b, c, d), v in sc.independent_components().items():
        out.row(["R", a, b, c, d, v])
    for a in range(n):
        for b in range(a, n):
            out.row(["Ric", a + 1, b + 1, "", "", sc.ricci[a, b]])
    out.row(["scalar", "", "", "", "", sc.scalar])
    sym = sc.diagnostics["symmetry_residuals"]
    out.comment("symmetry residuals: " + " ".join(f"{k}={v:.1e}" for k, v in sym.items()))
    singular = [j + 1 for j, e in enumerate(sc.estimates) if e.singular]
    if singular:
        out.comment("H-singular projections (curvatures from H and scalar curvature): "
                    + ",".join(map(str, singular)))
    out.close()
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "invariants": cmd_invariants, "estimate": cmd_estimate,
            "sweep": cmd_sweep, "riemann": cmd_riemann}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except SystemExit as e:  # argparse validation
        return int(e.code) if isinstance(e.code, int) else EXIT_INVALID
    except (InvalidInput, ValueError, TypeError) as e:
        print(f"intcurv: error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalFailure, ArithmeticError, ConvergenceError) as e:
        print(f"intcurv: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
