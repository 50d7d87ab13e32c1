"""Command-line entry point: ``resolventlab <subcommand> [flags]``.

Every run prints its result (JSON or CSV) to stdout.  With ``--out DIR`` the
result is also written to DIR together with ``run.json``, the resolved
configuration and library version, from which the run can be repeated.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys

import numpy as np

from . import LabError, __version__

_COMPLEX_CHARS = re.compile(r"^[0-9.eE+\-ij]+$")


def parse_complex(text):
    """'a+bi', 'a-bi', 'bi', 'a' with optional spaces and exponents."""
    compact = "".join(text.split())
    if not _COMPLEX_CHARS.match(compact):
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}")
    try:
        return complex(compact.replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def format_complex(z):
    z = complex(z)
    sign = "-" if z.imag < 0 or (z.imag == 0 and math.copysign(1, z.imag) < 0) else "+"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


def parse_grid(text):
    """'a:b:n' -> n evenly spaced points from a to b."""
    try:
        a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b:n, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("grid needs n >= 1")
    return np.linspace(a, b, n)


def parse_range(text):
    try:
        a, b = (int(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b, got {text!r}") from None
    if b < a:
        raise argparse.ArgumentTypeError("range end below start")
    return range(a, b + 1)


def parse_floats(text):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


# ---------------------------------------------------------------- output


class Output:
    def __init__(self, args):
        self.args = args
        self.files = {}

    def json(self, name, obj):
        text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
        self.files[name + ".json"] = text
        return text

    def csv(self, name, header, rows):
        buf = io.StringIO(newline="")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_cell(v) for v in row])
        buf.write(f"# seed={self.args.seed}, version={__version__}\n")
        text = buf.getvalue()
        self.files[name + ".csv"] = text
        return text

    def flush(self, config):
        for text in self.files.values():
            sys.stdout.write(text)
        if self.args.out:
            os.makedirs(self.args.out, exist_ok=True)
            for name, text in self.files.items():
                with open(os.path.join(self.args.out, name), "w", encoding="utf-8", newline="\n") as fh:
                    fh.write(text)
            run = {"config": config, "version": __version__}
            with open(os.path.join(self.args.out, "run.json"), "w", encoding="utf-8", newline="\n") as fh:
                fh.write(json.dumps(run, indent=2, sort_keys=True) + "\n")


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return v


def _jsonable(v):
    if isinstance(v, complex):
        return format_complex(v)
    if isinstance(v, range):
        return f"{v.start}:{v.stop - 1}"
    if isinstance(v, np.ndarray):
        return [float(x) for x in v]
    return v


def resolved_config(args):
    return {k: _jsonable(v) for k, v in sorted(vars(args).items()) if k not in ("func",)}


# ---------------------------------------------------------------- subcommands


def cmd_region(args, out):
    from .region import SectorParams, dist_to_sector_boundary, map_to_zeta, parabolic_boundary_profile, xi_membership

    params = SectorParams(args.m, args.delta)
    if args.profile_alphas:
        rows = parabolic_boundary_profile(args.profile_alphas, params)
        out.csv("profile", ["re_zeta", "im_zeta", "ratio"], rows)
        return
    if args.z is None:
        raise LabError("region needs --z or --profile-alphas")
    zeta = map_to_zeta(args.z, args.m)
    out.json("region", {"member": bool(xi_membership(args.z, params)),
                        "dist": float(dist_to_sector_boundary(args.z, args.m)),
                        "zeta": format_complex(zeta),
                        "zeta_re": zeta.real, "zeta_im": zeta.imag})


def cmd_residue(args, out):
    from . import residue as rs

    val = rs.fourier_transform_mz(args.t, args.z, args.m)
    ora = rs.fourier_transform_oracle(args.t, args.z, args.m, epsabs=1e-13 * args.tol_scale,
                                      epsrel=1e-11 * args.tol_scale)
    res = {"value_re": val.real, "value_im": val.imag, "oracle_re": ora.real,
           "oracle_im": ora.imag, "rel_err": abs(val - ora) / abs(ora)}
    if args.check_identity:
        worst = 0.0
        for f in (0.0, 0.5, 1.0, 2.0):
            lhs, rhs = rs.resolvent_multiplier_identity(f * abs(args.z), args.z, args.m)
            worst = max(worst, abs(lhs - rhs) / abs(lhs))
        A = rs.partial_fractions(args.m).A
        res["identity_rel_err"] = worst
        res["partial_fraction_coeff_err"] = float(np.max(np.abs(A - rs.roots_of_unity(args.m) / args.m)))
    out.json("residue", res)


def _symbol(name, n):
    from .oscint import parse_symbol

    return parse_symbol(name, n)


def _build_model(args, eigenfunctions=False):
    from . import spectra as sp

    if args.model == "torus":
        if args.symbol not in ("euclid", "lp4"):
            raise LabError(f"torus symbol must be euclid or lp4, got {args.symbol!r}")
        res = 1 if eigenfunctions else None
        return sp.build_torus_model(args.n, _symbol(args.symbol, args.n), args.cutoff,
                                    grid_resolution=res, m=args.m)
    if args.model == "zoll":
        shift = 0.5 * (args.n - 1)
        K = int(math.floor(args.cutoff - shift - 0.5))
        return sp.build_zoll_model(args.n, K, jitter=args.jitter, m=args.m, seed=args.seed,
                                   eigenfunctions=eigenfunctions)
    if args.model == "file":
        if not args.file:
            raise LabError("--model file needs --file PATH")
        return sp.load_custom_spectrum(args.file, n=args.n, m=args.m)
    raise LabError(f"unknown model {args.model!r}")


def cmd_spectra(args, out):
    from . import spectra as sp

    model = _build_model(args)
    if args.report == "count":
        alphas = np.arange(1, int(math.floor(model.cutoff)) + 1, dtype=float)
        out.csv("count", ["alpha", "N"], [(a, sp.counting_function(model, a)) for a in alphas])
    elif args.report == "weyl":
        if model.kind == "torus":
            C, err = sp.weyl_constant(model)
        elif model.kind == "file" or model.kind == "custom":
            raise LabError("the Weyl report needs a torus or Zoll model")
        else:
            C, err = sp.sphere_volume(model.n) * (2 * math.pi) ** (-model.n) * \
                math.pi ** (model.n / 2) / math.gamma(model.n / 2 + 1), 0.0
        a = float(model.cutoff) - 1.0
        N = sp.counting_function(model, a)
        out.json("weyl", {"C": C, "C_err": err, "alpha": a, "N": N,
                          "N_over_alpha_n": N / a**model.n, "rel_dev": abs(N / a**model.n - C) / C})
    else:
        reports, slope, outside = sp.cluster_report(model, C=max(args.jitter, 1e-9))
        out.csv("clusters", ["k", "center", "halfwidth", "count"],
                [(r.k, r.center, r.halfwidth, r.count) for r in reports])
        out.json("clusters", {"degree": slope, "outside": outside})


def cmd_multiplier(args, out):
    from . import multiplier as mp
    from .region import dist_to_sector_boundary, power

    tol = 1e-12 * args.tol_scale
    bumps = mp.BumpFunctions(args.eps)
    tau = args.tau_grid
    m = args.m
    if args.op == "series":
        r = abs(args.z)
        rows = []
        sums = [mp.series_bound(m, r, a) for a in tau]
        top = max(sums)
        for a, s in zip(tau, sums):
            rows.append((a, s, 0.0, s / top))
        out.csv("series", ["tau", "re", "im", "bound_ratio"], rows)
        return
    if args.op == "apply":
        vals = 1.0 / (tau**m - power(args.z, m))
        bound = (1 + tau**m) * np.abs(vals)
    elif args.op == "mzloc":
        vals = np.atleast_1d(mp.localized_multiplier(tau, args.z, m, bumps, tol=tol))
        bound = np.abs(vals) * abs(args.z) ** (m - 1)
    elif args.op == "rz":
        vals = np.atleast_1d(mp.nonlocal_multiplier(tau, args.z, m, bumps, tol=tol))
        bound = dist_to_sector_boundary(args.z, m) * np.abs(vals)
    else:
        vals = np.atleast_1d(mp.dyadic_piece(tau, args.z, m, args.j, bumps, tol=tol))
        bound = (1 + tau) ** m * np.abs(vals)
    out.csv(args.op, ["tau", "re", "im", "bound_ratio"],
            [(t, v.real, v.imag, b) for t, v, b in zip(tau, vals, bound)])


def cmd_probe(args, out):
    from . import multiplier as mp
    from . import probe as pr

    if args.what == "region":
        alphas = np.arange(5.0, 205.0, 5.0)
        res = pr.scalar_region_inequalities(alphas, [0.1, 0.5, 1.0], args.m)
        out.csv("region", ["alpha", "value"], list(zip(alphas, res["im_ratio_by_alpha"])))
        out.json("region", {k: v for k, v in res.items() if k != "im_ratio_by_alpha"})
        return
    if args.what == "blowup":
        model = _build_model(args, eigenfunctions=args.model != "file")
        rows = pr.blowup_sequence(model, args.k_range, args.beta_rule)
        out.csv("blowup", ["k", "branch", "alpha_k", "beta_k", "L_k", "density_k"],
                [(s.k, s.branch, s.alpha_k, s.beta_k, s.L_k, s.density_k) for s in rows])
        return
    model = _build_model(args, eigenfunctions=True)
    if args.what == "bernstein":
        alphas = [a for a in (2.0, 4.0, 8.0, 16.0) if 8 * a <= model.cutoff]
        if len(alphas) < 2:
            raise LabError("bernstein probe needs cutoff >= 32")
        slope, ratios = pr.bernstein_probe(model, pr.default_beta_bump(), alphas, args.p, args.q)
        out.csv("bernstein", ["alpha", "value"], list(zip(alphas, ratios)))
        out.json("bernstein", {"slope": slope, "expected": model.n * (1 / args.p - 1 / args.q)})
        return
    if args.z is None:
        raise LabError(f"probe {args.what} needs --z")
    alpha = args.z.real
    if args.what == "l2":
        value = pr.l2_resolvent_norm(model, args.z).value
    elif args.what == "l1linf":
        value = pr.l1_linf_norm(mp.resolvent_kernel(model, args.z)).value
    else:
        res = pr.pq_lower_bound(model, mp.Multiplier.resolvent(args.z, model.m), args.p, args.q,
                                tol=1e-10 * args.tol_scale, seed=args.seed)
        value = res.value
        out.json("pq", {"value": value, "iterations": res.iterations, "converged": res.converged})
    out.csv(args.what, ["alpha", "value"], [(alpha, value)])


def cmd_oscint(args, out):
    from . import oscint as oi

    sym = oi.parse_symbol(args.symbol, args.n)
    x = np.asarray(args.x, dtype=float)
    if x.size != args.n:
        raise LabError(f"--x needs {args.n} components")
    if not np.linalg.norm(x) > 0:
        raise LabError("--x must be nonzero")
    xhat = x / np.linalg.norm(x)
    a, b, k = args.fit_radii
    radii = np.geomspace(a, b, k)
    rows = []
    if args.w is None:
        for r in radii:
            v, _ = oi.surface_measure_ft(sym, r * xhat, rtol=1e-6 * args.tol_scale)
            bound = r ** (-(args.n - 1) / 2)
            rows.append((r, abs(v), bound, abs(v) / bound))
    else:
        if args.n != 2:
            raise LabError("the weighted resolvent integral is implemented for n = 2")
        for r in radii:
            v = oi.weighted_resolvent_integral(sym, r * xhat, args.w, tol=1e-9 * args.tol_scale)
            bound = oi.lemma_bound(r * xhat, args.w, args.n)
            rows.append((r, abs(v), bound, abs(v) / bound))
    out.csv("oscint", ["radius", "abs_value", "bound", "ratio"], rows)
    conv = oi.strict_convexity_check(sym)
    out.json("oscint", {"min_curvature": conv["min_curvature"],
                        "strictly_convex": bool(conv["strictly_convex"]),
                        "max_ratio": max(r[3] for r in rows)})


def cmd_suite(args, out):
    from .acceptance import SUITES, run_suite

    if args.name not in SUITES:
        raise LabError(f"unknown suite {args.name!r}")
    results = run_suite(args.name, echo=lambda s: print(s, file=sys.stderr, flush=True))
    out.csv("suite", ["criterion", "title", "passed", "measured"],
            [(r.number, r.title, r.passed, json.dumps({k: _plain(v) for k, v in r.measured.items()},
                                                      sort_keys=True)) for r in results])
    return 0 if all(r.passed for r in results) else 1


def _plain(v):
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


# ---------------------------------------------------------------- parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--out", default=None, help="directory for result files and run.json")
    common.add_argument("--tol-scale", type=float, default=1.0,
                        help="multiplies the default numerical tolerances")

    parser = argparse.ArgumentParser(prog="resolventlab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("region", parents=[common], help="sector membership and boundary profile")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--z", type=parse_complex)
    p.add_argument("--profile-alphas", type=parse_floats)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("residue", parents=[common], help="closed-form Fourier transform vs oracle")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--z", type=parse_complex, required=True)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--check-identity", action="store_true")
    p.set_defaults(func=cmd_residue)

    def model_flags(p):
        p.add_argument("--model", choices=("torus", "zoll", "file"), default="torus")
        p.add_argument("--n", type=int, default=2)
        p.add_argument("--m", type=int, default=2)
        p.add_argument("--cutoff", type=float, default=20.0)
        p.add_argument("--symbol", default="euclid")
        p.add_argument("--file")
        p.add_argument("--jitter", type=float, default=0.0)

    p = sub.add_parser("spectra", parents=[common], help="model spectra and counting reports")
    model_flags(p)
    p.add_argument("--report", choices=("count", "weyl", "clusters"), default="count")
    p.set_defaults(func=cmd_spectra)

    p = sub.add_parser("multiplier", parents=[common], help="multiplier splitting on a tau grid")
    p.add_argument("--op", choices=("apply", "mzloc", "rz", "dyadic", "series"), default="mzloc")
    p.add_argument("--z", type=parse_complex, default=complex(0.0, 2.0))
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--j", type=int, default=0)
    p.add_argument("--tau-grid", type=parse_grid, default=parse_grid("0:10:11"))
    p.set_defaults(func=cmd_multiplier)

    p = sub.add_parser("probe", parents=[common], help="operator-norm probes and blow-up sequences")
    p.add_argument("--what", choices=("l2", "l1linf", "pq", "bernstein", "blowup", "region"),
                   default="l2")
    model_flags(p)
    p.add_argument("--z", type=parse_complex)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--k-range", type=parse_range, default=parse_range("5:20"))
    p.add_argument("--beta-rule", default="inv-k")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("oscint", parents=[common], help="cosphere Fourier decay and resolvent integrals")
    p.add_argument("--symbol", default="euclid")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--x", type=parse_floats, default=[1.0, 0.0])
    p.add_argument("--w", type=parse_complex)
    p.add_argument("--fit-radii", type=_parse_fit_radii, default=(5.0, 50.0, 8))
    p.set_defaults(func=cmd_oscint)

    p = sub.add_parser("suite", parents=[common], help="run an acceptance group")
    p.add_argument("name", choices=("identities", "region", "spectra", "blowup", "oscint", "all"))
    p.set_defaults(func=cmd_suite)
    return parser


def _parse_fit_radii(text):
    try:
        a, b, k = text.split(":")
        a, b, k = float(a), float(b), int(k)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b:k, got {text!r}") from None
    if not 0 < a < b or k < 2:
        raise argparse.ArgumentTypeError("need 0 < a < b and k >= 2")
    return a, b, k


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    out = Output(args)
    try:
        status = args.func(args, out) or 0
    except (LabError, OSError) as exc:
        err = {"module": args.command, "op": getattr(args, "op", None) or getattr(args, "what", None)
               or args.command, "message": str(exc)}
        print(json.dumps(err, sort_keys=True), file=sys.stderr)
        return 1
    out.flush(resolved_config(args))
    return status


if __name__ == "__main__":
    sys.exit(main())
