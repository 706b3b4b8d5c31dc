"""Command-line front end: one subcommand per analysis.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure
(no root or crossing), 4 result disagrees with the printed reference.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import NoRootError
from .outputs import OUT_ENV, default_out_dir, write_csv, write_json

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_MISMATCH = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


class Mismatch(RuntimeError):
    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload or {}


# ---------------------------------------------------------------------------
# subcommands; each returns a dict summary printed as JSON on stdout


def _plan(args, steps):
    return {"subcommand": args.command, "config": _config_of(args), "steps": steps}


def cmd_map_verify(args, out, cfg):
    from .ed import verify_mapping

    if args.dry_run:
        return _plan(args, [f"dense blocked diagonalization of the L=2 torus at J={args.J}, K={args.K}, lambda={args.lam}", "dense ED of both sublattice Potts models"])
    rep = verify_mapping(args.J, args.K, args.lam, tol=args.tol)
    payload = rep.to_json()
    write_json(out / "map_verify.json", payload, cfg)
    print("PASS" if rep.passed else "FAIL", f"difference={rep.difference:.3e}", file=sys.stderr)
    if not rep.passed:
        raise Mismatch("mapping check failed", payload)
    return payload


def cmd_degeneracy(args, out, cfg):
    from .ed import degeneracy_report

    if args.dry_run:
        return _plan(args, [f"blocked spectrum of the L={args.L} torus, d={args.d}, lambda={args.lam}"])
    rep = degeneracy_report(args.L, args.d, args.J, args.K, args.lam, args.tol)
    write_json(out / "degeneracy.json", rep, cfg)
    if not args.no_plots:
        from .plotting import bar_plot

        levels = np.array(rep["levels"])
        bar_plot(out / "degeneracy.png", list(range(len(levels))), levels - levels[0], "E - E0", "lowest levels")
    return rep


def cmd_clusters(args, out, cfg):
    from .clusters import clusters_to_json, enumerate_clusters, enumerate_site_clusters

    if args.max_size < 1 or args.max_size > 8:
        raise ConfigError("--max-size must be in 1..8")
    if args.dry_run:
        return _plan(args, [f"enumerate {args.kind} clusters up to size {args.max_size}"])
    cl = enumerate_clusters(args.max_size) if args.kind == "bond" else enumerate_site_clusters(args.max_size)
    (out / "clusters.json").parent.mkdir(parents=True, exist_ok=True)
    (out / "clusters.json").write_text(clusters_to_json(cl))
    counts = {}
    for c in cl:
        counts[c.size] = counts.get(c.size, 0) + 1
    rows = [(k, counts[k], sum(c.embeddings_per_site for c in cl if c.size == k)) for k in sorted(counts)]
    write_csv(out / "cluster_counts.csv", ["size", "free_clusters", "embeddings_per_site"], rows, cfg)
    return {"counts": {str(k): v for k, v, _ in rows}}


def _series_payload(series, name, unit, extra=None):
    d = {"name": name, "unit": unit, **series.to_json()}
    if extra:
        d.update(extra)
    return d


def _check_against(series, key, lo, hi):
    from .series import load_reference_series

    ref = load_reference_series(key)
    bad = {k: (str(series[k]), str(ref[k])) for k in range(lo, hi + 1) if series[k] != ref[k]}
    if bad:
        raise Mismatch(f"{key} differs from the reference", {"mismatches": bad})


def cmd_pcut_series(args, out, cfg):
    from .pcut.evaluate import calibration, ground_energy_series

    if args.dry_run:
        return _plan(args, [f"PCUT coefficients through order {args.order}", f"{args.regime}-coupling linked-cluster sum"])
    s = ground_energy_series(args.regime, args.order, threads=args.threads, cap=args.cap)
    cal = calibration(args.regime)
    payload = _series_payload(s, f"{args.regime}_energy", cal.unit, {"dropped_constant": {"J": cal.dropped[0], "lambda": cal.dropped[1]}})
    write_json(out / f"energy_{args.regime}.json", payload, cfg)
    write_csv(out / f"energy_{args.regime}.csv", ["order", "coefficient", "value"], [(k, c, float(c)) for k, c in enumerate(s.coeffs)], cfg)
    if args.check:
        if args.regime == "small":
            _check_against(s, "small_energy", 0, args.order)
        else:
            _check_against(s, "large_energy", 1, args.order)
    return payload


def cmd_gap(args, out, cfg):
    from .pcut.evaluate import gap_series, one_qp_amplitudes

    if args.dry_run:
        return _plan(args, [f"one-quasiparticle hopping amplitudes through order {args.order}", "sum amplitudes at k = 0"])
    amps = one_qp_amplitudes(args.order, threads=args.threads, cap=args.cap)
    s = gap_series(args.order, amps)
    payload = _series_payload(s, "small_gap", "3J", {"hopping": {f"{dx},{dy}": v.to_json()["coefficients"] for (dx, dy), v in amps.items()}})
    write_json(out / "gap.json", payload, cfg)
    write_csv(out / "gap.csv", ["order", "coefficient", "value"], [(k, c, float(c)) for k, c in enumerate(s.coeffs)], cfg)
    if args.check:
        _check_against(s, "small_gap", 0, args.order)
    return payload


def cmd_dispersion(args, out, cfg):
    from .pcut.evaluate import dispersion, one_qp_amplitudes

    if args.grid < 2:
        raise ConfigError("--grid must be >= 2")
    if args.dry_run:
        return _plan(args, [f"hopping amplitudes through order {args.order}", f"omega(k) on a {args.grid}x{args.grid} grid at x={args.x}"])
    amps = one_qp_amplitudes(args.order, threads=args.threads, cap=args.cap)
    ks = 2 * math.pi * np.arange(args.grid) / args.grid - math.pi
    powers = args.x ** np.arange(args.order + 1)
    rows, best = [], None
    for kx in ks:
        for ky in ks:
            w = float(dispersion((kx, ky), amps) @ powers)
            rows.append((kx, ky, w))
            if best is None or w < best[2] - 1e-12:
                best = (kx, ky, w)
    write_csv(out / "dispersion.csv", ["kx", "ky", "omega"], rows, cfg)
    # cut along (0,0) -> (pi,0) -> (pi,pi) -> (0,0)
    path = [(t, 0.0) for t in np.linspace(0, math.pi, 40)] + [(math.pi, t) for t in np.linspace(0, math.pi, 40)]
    path += [(t, t) for t in np.linspace(math.pi, 0, 40)]
    cut = [float(dispersion(k, amps) @ powers) for k in path]
    if not args.no_plots:
        from .plotting import line_plot

        line_plot(out / "dispersion.png", np.arange(len(cut)), {"omega": cut}, "path index  G-X-M-G", "omega / 3J", f"x = {args.x}")
    rep = {"x": args.x, "order": args.order, "minimum": {"k": [best[0], best[1]], "omega": best[2]}}
    write_json(out / "dispersion_report.json", rep, cfg)
    return rep


def _gap_source(args):
    from .series import load_reference_series

    if args.source == "reference":
        return load_reference_series("small_gap")
    from .pcut.evaluate import gap_series

    return gap_series(args.order, threads=args.threads)


def cmd_extrapolate(args, out, cfg):
    from .analysis import dlog_pade_gap_closure

    if args.xmax <= 0:
        raise ConfigError("--xmax must be positive")
    if args.dry_run:
        return _plan(args, [f"gap series from {args.source}", "DlogPade poles and bare-series roots"])
    gap = _gap_source(args)
    rep = dlog_pade_gap_closure(gap, window=(0.0, args.xmax))
    payload = rep.to_json()
    write_json(out / "gap_closure.json", payload, cfg)
    bare = rep.metadata["bare_roots"]
    write_csv(out / "bare_roots.csv", ["order", "x_root"], [(int(k), v if v is not None else float("nan")) for k, v in bare.items()], cfg)
    if not args.no_plots:
        from .plotting import line_plot

        xs = np.linspace(0, min(args.xmax, 0.25), 300)
        curves = {f"order {k}": np.polyval(np.array(gap.as_floats()[: k + 1])[::-1], xs) for k in range(4, gap.order + 1)}
        orders = [int(k) for k, v in bare.items() if v is not None and int(k) >= 4]
        inset = (orders, {"root": [bare[str(k)] for k in orders]}, "root") if orders else None
        line_plot(out / "gap_closure.png", xs, curves, "x", "gap / 3J", vlines=[rep.value], inset=inset, ylim=(-0.5, 1.1), inset_loc=(0.1, 0.1))
    return payload


def _merge_inputs(args):
    from .pcut.evaluate import calibration
    from .series import RationalSeries, load_reference_series

    sc = load_reference_series("small_energy")
    lc = load_reference_series("large_energy")
    # the printed large-coupling constant is replaced by the calibrated one
    lc = RationalSeries("h", [Fraction(0)] + list(lc.coeffs[1:]))
    if args.order is not None:
        sc, lc = sc.truncate(args.order), lc.truncate(args.order)
    return sc, lc, calibration("small"), calibration("large")


def cmd_merge_energy(args, out, cfg):
    from .analysis import absolute_energies, feynman_hellmann_derivatives, merge_and_locate_crossing

    if not 0 < args.theta_min < args.theta_max < math.pi / 2:
        raise ConfigError("need 0 < theta-min < theta-max < pi/2")
    if args.dry_run:
        return _plan(args, ["small- and large-coupling absolute energies on the theta grid", "crossing by bracketing and Brent refinement"])
    sc, lc, csc, clc = _merge_inputs(args)
    th = np.linspace(args.theta_min, args.theta_max, args.points)
    rep = merge_and_locate_crossing(sc, lc, csc, clc, th)
    e_sc, e_lc = absolute_energies(sc, lc, csc, clc, th)
    der = feynman_hellmann_derivatives(sc, lc, csc, clc, th, check=False)
    rows = [(t, a, b, min(a, b), der["sc"][0][i], der["lc"][0][i], der["sc"][1][i], der["lc"][1][i]) for i, (t, a, b) in enumerate(zip(th, e_sc, e_lc))]
    write_csv(out / "merge_energy.csv", ["theta", "E_sc", "E_lc", "E_min", "dE_sc", "dE_lc", "d2E_sc", "d2E_lc"], rows, cfg)
    payload = rep.to_json()
    write_json(out / "merge_report.json", payload, cfg)
    if not args.no_plots:
        from .plotting import line_plot

        line_plot(out / "merge_energy.png", th, {"small coupling": e_sc, "large coupling": e_lc}, "theta", "E / site", vlines=[rep.value])
    return payload


def cmd_meanfield_scan(args, out, cfg):
    from .meanfield import scan_transition

    if args.xmax < 0.3:
        raise ConfigError("--xmax must be >= 0.3 so the scan covers the transition window")
    if args.points < 10:
        raise ConfigError("--points must be >= 10")
    if args.dry_run:
        return _plan(args, [f"{args.points} grid points, {args.restarts} restarts each (seed {args.seed})", "kink detection and branch-crossing refinement"])
    xs = np.linspace(0.0, args.xmax, args.points)
    rep, xs, e, states = scan_transition(xs, restarts=args.restarts, seed=args.seed)
    rows = []
    for x, en, st in zip(xs, e, states):
        w = np.abs(np.array(st.amplitudes)) ** 2
        rows.append((x, en, st.branch, *w))
    write_csv(out / "meanfield.csv", ["x", "energy", "branch", "w0", "w1", "w2"], rows, cfg)
    payload = rep.to_json()
    write_json(out / "meanfield_report.json", payload, cfg)
    if not args.no_plots:
        from .plotting import line_plot

        d = np.gradient(e, xs)
        line_plot(out / "meanfield.png", xs, {"energy": e}, "x", "E / site (J = 1)", vlines=[rep.value], inset=(xs, {"dE/dx": d}, "dE/dx"))
    return payload


def cmd_gme_scan(args, out, cfg):
    from .gme import gme_scan

    if args.xmax < 0.3:
        raise ConfigError("--xmax must be >= 0.3")
    if args.n < 4:
        raise ConfigError("--n must be >= 4")
    if args.dry_run:
        return _plan(args, [f"n={args.n}, {args.points} grid points, {args.restarts} restarts (seed {args.seed})"])
    xs = np.linspace(0.0, args.xmax, args.points)
    sc = gme_scan(xs, n=args.n, restarts=args.restarts, seed=args.seed)
    rows = [(x, g, d, dd, *a) for x, g, d, dd, a in zip(sc.xs, sc.gme, sc.dgme, sc.d2gme, sc.angles)]
    write_csv(out / "gme.csv", ["x", "gme", "dgme_dx", "d2gme_dx2", "theta", "phi", "alpha", "beta"], rows, cfg)
    payload = {"n": args.n, "convexity_change": sc.convexity_change, "jump_location": sc.jump_location, "jump_size": sc.jump_size}
    write_json(out / "gme_report.json", payload, cfg)
    if sc.convexity_change is None:
        raise NoRootError("no convexity change in the scan window")
    if not args.no_plots:
        from .plotting import line_plot

        line_plot(out / "gme.png", sc.xs, {"GME": sc.gme}, "x", "GME", f"n = {args.n}", vlines=[sc.convexity_change], inset=(sc.xs, {"d": sc.dgme}, "dGME/dx"))
    return payload


def cmd_series_vs_ed(args, out, cfg):
    from .ed import open_grid_graph, series_vs_ed
    from .pcut.evaluate import cluster_energy_series

    if args.nx * args.ny > 8:
        raise ConfigError("cluster too large for dense exact arithmetic (nx*ny <= 8)")
    if args.dry_run:
        return _plan(args, [f"cluster PCUT series of the open {args.nx}x{args.ny} patch through order {args.order}", "dense ED on 8 log-spaced x in [1e-3, 1e-2]"])
    g = open_grid_graph(args.nx, args.ny)
    s = cluster_energy_series("small", g.num_sites, list(g.bonds), args.order)
    rep = series_vs_ed(g, s)
    write_csv(out / "series_vs_ed.csv", ["x", "abs_error"], list(zip(rep.xs, rep.errors)), cfg)
    payload = {"slope": rep.slope, "order": rep.order, "certified": rep.certified, "series": s.to_json()}
    write_json(out / "series_vs_ed.json", payload, cfg)
    if not args.no_plots:
        from .plotting import scatter_plot

        lx = np.log(rep.xs)
        a, b = np.polyfit(lx, np.log(rep.errors), 1)
        scatter_plot(out / "series_vs_ed.png", rep.xs, rep.errors, "x", "|E_series - E_ED|", f"slope {rep.slope:.2f}", True, True, (rep.xs, np.exp(b + a * lx)))
    if not rep.certified:
        raise Mismatch("error slope below order + 1 - 0.3", payload)
    return payload


# ---------------------------------------------------------------------------
# parser


COMMANDS = {
    "map-verify": cmd_map_verify,
    "degeneracy": cmd_degeneracy,
    "clusters": cmd_clusters,
    "pcut-series": cmd_pcut_series,
    "gap": cmd_gap,
    "dispersion": cmd_dispersion,
    "extrapolate": cmd_extrapolate,
    "merge-energy": cmd_merge_energy,
    "meanfield-scan": cmd_meanfield_scan,
    "gme-scan": cmd_gme_scan,
    "series-vs-ed": cmd_series_vs_ed,
}

_COMMON = {"command", "config", "out", "threads", "dry_run", "no_plots"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser():
    p = _Parser(prog="kitaev-potts", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file of option values (keys are option names with underscores)")
    common.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or ./kp_out)")
    common.add_argument("--threads", type=int, default=None, help="worker processes (default: all cores)")
    common.add_argument("--dry-run", action="store_true", help="validate and print the plan only")
    common.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("map-verify", parents=[common], help="check the Kitaev-Potts to Potts mapping by ED")
    s.add_argument("--J", type=float, default=1.0)
    s.add_argument("--K", type=float, default=1.0)
    s.add_argument("--lambda", dest="lam", type=float, default=0.3)
    s.add_argument("--tol", type=float, default=1e-9)

    s = sub.add_parser("degeneracy", parents=[common], help="ground multiplet on the L=2 torus")
    s.add_argument("--L", type=int, default=2)
    s.add_argument("--d", type=int, default=3)
    s.add_argument("--J", type=float, default=1.0)
    s.add_argument("--K", type=float, default=1.0)
    s.add_argument("--lambda", dest="lam", type=float, default=0.0)
    s.add_argument("--tol", type=float, default=1e-9)

    s = sub.add_parser("clusters", parents=[common], help="enumerate linked clusters")
    s.add_argument("--kind", choices=["bond", "site"], default="bond")
    s.add_argument("--max-size", type=int, default=5)

    for name, hlp in (("pcut-series", "ground-state energy series"), ("gap", "one-quasiparticle gap series")):
        s = sub.add_parser(name, parents=[common], help=hlp)
        if name == "pcut-series":
            s.add_argument("--regime", choices=["small", "large"], default="small")
        s.add_argument("--order", type=int, default=4)
        s.add_argument("--cap", type=int, default=5, help="largest order accepted")
        s.add_argument("--check", action="store_true", help="compare with the printed coefficients (exit 4 on mismatch)")

    s = sub.add_parser("dispersion", parents=[common], help="one-quasiparticle dispersion on a k grid")
    s.add_argument("--order", type=int, default=3)
    s.add_argument("--cap", type=int, default=5)
    s.add_argument("--x", type=float, default=0.05)
    s.add_argument("--grid", type=int, default=32)

    s = sub.add_parser("extrapolate", parents=[common], help="gap closure from DlogPade and bare roots")
    s.add_argument("--source", choices=["reference", "engine"], default="reference")
    s.add_argument("--order", type=int, default=4, help="engine order when --source engine")
    s.add_argument("--xmax", type=float, default=0.5)

    s = sub.add_parser("merge-energy", parents=[common], help="small/large coupling energy crossing")
    s.add_argument("--order", type=int, default=None, help="truncate both series")
    s.add_argument("--theta-min", type=float, default=0.05)
    s.add_argument("--theta-max", type=float, default=1.5)
    s.add_argument("--points", type=int, default=581)

    s = sub.add_parser("meanfield-scan", parents=[common], help="product-state energy along x")
    s.add_argument("--xmax", type=float, default=0.3)
    s.add_argument("--points", type=int, default=121)
    s.add_argument("--restarts", type=int, default=64)
    s.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("gme-scan", parents=[common], help="geometric entanglement along x")
    s.add_argument("--n", type=int, default=25)
    s.add_argument("--xmax", type=float, default=0.3)
    s.add_argument("--points", type=int, default=61)
    s.add_argument("--restarts", type=int, default=8)
    s.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("series-vs-ed", parents=[common], help="cluster series error scaling against ED")
    s.add_argument("--nx", type=int, default=2)
    s.add_argument("--ny", type=int, default=3)
    s.add_argument("--order", type=int, default=4)
    return p


def _config_of(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in {"config", "out", "dry_run", "threads"}}


def _apply_config(parser, argv):
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        data = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    known = set(vars(args))
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    # explicit flags win over config values
    defaults = parser.parse_args([args.command])
    for k, v in data.items():
        if getattr(args, k) == getattr(defaults, k, None):
            setattr(args, k, v)
    return args


def _validate(args):
    if args.threads is not None and args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    for name in ("order", "points", "restarts", "cap"):
        v = getattr(args, name, None)
        if v is not None and (not isinstance(v, int) or v < 0):
            raise ConfigError(f"--{name} must be a non-negative integer")
    if getattr(args, "restarts", 1) is not None and getattr(args, "restarts", 1) < 1:
        raise ConfigError("--restarts must be >= 1")
    if getattr(args, "order", None) is not None and getattr(args, "cap", None) is not None and args.order > args.cap:
        raise ConfigError(f"order {args.order} exceeds cap {args.cap}")


def _error(kind, message, code, payload=None):
    body = {"error": kind, "message": str(message), "exit_code": code}
    if payload:
        body["details"] = payload
    print(json.dumps(body, default=str), file=sys.stderr)
    return code


def main(argv=None):
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        _validate(args)
    except ConfigError as exc:
        return _error("invalid_config", exc, EXIT_INVALID)
    if args.threads is None:
        args.threads = os.cpu_count() or 1
    out = Path(args.out) if args.out else default_out_dir()
    cfg = _config_of(args)
    try:
        result = COMMANDS[args.command](args, out, cfg)
    except ConfigError as exc:
        return _error("invalid_config", exc, EXIT_INVALID)
    except Mismatch as exc:
        return _error("mismatch", exc, EXIT_MISMATCH, exc.payload)
    except NoRootError as exc:
        return _error("numerical_failure", exc, EXIT_NUMERIC)
    except ValueError as exc:
        return _error("invalid_config", exc, EXIT_INVALID)
    print(json.dumps(result, indent=2, default=str))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
