"""Command-line interface.

Every subcommand resolves its flags into a JSON-serializable config dict,
computes a :class:`~compressible.output.Table` from that dict alone, and
writes it as CSV or JSON with the config embedded in the header.  Because
the computation only sees the config, ``--check FILE`` can rebuild any
output from its own header.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, plotting
from .distributions import parse_distribution
from .errors import CompressibleError, DomainError
from .instance_opt import KAPPA0, io_constant, robust_nsp_check, trivial_guarantee_test
from .metrics import (
    compressibility_report,
    critical_undersampling,
    g_curve,
    g_values,
    h_values,
)
from .output import Table, make_meta, parse, render, values_match
from .rng import default_seed
from .simulation import (
    CSV_FIELDS,
    DECODERS,
    K_RULES,
    ExperimentConfig,
    crossing_point,
    iter_experiment,
    summarize,
)
from .transforms import (
    MODEL_PRESETS,
    TRANSFORMS,
    average_sorted_magnitudes,
    expected_order_statistics,
    iid_patch_set,
    load_patch_set,
)

CHECK_ROWS = 3


# -- argument types -------------------------------------------------------------


def grid(text):
    """``start:stop:count`` (inclusive linspace) or a comma-separated list."""
    try:
        if ":" in text:
            a, b, n = text.split(":")
            n = int(n)
            if n < 1:
                raise ValueError
            vals = np.linspace(float(a), float(b), n)
        else:
            vals = np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; use start:stop:count or a,b,c")
    if vals.size == 0:
        raise argparse.ArgumentTypeError("empty grid")
    return [round(float(v), 12) for v in vals]


def dist_spec(text):
    try:
        return parse_distribution(text).spec
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _range_check(values, lo, hi, name, lo_open=False, hi_open=False):
    for v in values:
        if (v < lo or (lo_open and v == lo)) or (v > hi or (hi_open and v == hi)):
            raise DomainError(f"{name} value {v} outside {'(' if lo_open else '['}{lo}, {hi}{')' if hi_open else ']'}")


# -- commands -------------------------------------------------------------------


def cmd_gfun(cfg) -> Table:
    dist = parse_distribution(cfg["dist"])
    _range_check(cfg["kappas"], 0.0, 1.0, "kappa")
    curve = g_curve(dist, cfg["q"], cfg["kappas"], method=cfg["method"])
    methods = sorted({p.method for p in curve.points})
    return Table(["kappa", "G"], [[p.kappa, p.value] for p in curve.points], {"methods": methods})


def cmd_hfun(cfg) -> Table:
    dist = parse_distribution(cfg["dist"])
    _range_check(cfg["deltas"], 0.0, 1.0, "delta", lo_open=True, hi_open=True)
    rows = [[h.delta, h.value, h.rho_star] for h in h_values(dist, cfg["deltas"])]
    return Table(["delta", "H", "rho_star"], rows)


def cmd_delta0(cfg) -> Table:
    rows = []
    for spec in cfg["dists"]:
        r = critical_undersampling(parse_distribution(spec))
        rows.append([spec, r.delta0, r.marker, ";".join(f"{c:.6g}" for c in r.crossings)])
    return Table(["dist", "delta0", "marker", "crossings"], rows)


def cmd_report(cfg) -> Table:
    dist = parse_distribution(cfg["dist"])
    rep = compressibility_report(dist, cfg["deltas"])
    rows = [[h.delta, h.value, h.rho_star, 1.0 - h.delta] for h in rep.h_samples]
    extra = {
        "dist": dist.spec,
        "moment_verdict": rep.moment_verdict,
        "second_moment_finite": rep.second_moment_finite,
        "fourth_moment_finite": rep.fourth_moment_finite,
        "delta0": rep.delta0.delta0,
        "delta0_marker": rep.delta0.marker,
        "crossings": list(rep.delta0.crossings),
    }
    return Table(["delta", "H", "rho_star", "ls_error"], rows, extra)


def _experiment(cfg, **over) -> ExperimentConfig:
    keys = ("dist", "n", "deltas", "decoders", "k_rule", "rho", "k", "trials", "tol", "max_iters")
    kw = {k: cfg[k] for k in keys if k in cfg}
    kw["master_seed"] = cfg["seed"]
    kw.update(over)
    return ExperimentConfig(**kw)


def cmd_simulate(cfg) -> Table:
    exp = _experiment(cfg)
    if cfg.get("summary"):
        rows = summarize(iter_experiment(exp))
        cols = ["decoder", "delta", "count", "mean", "median", "std", "failures", "nonconverged", "mean_k"]
        return Table(cols, [[getattr(r, c) for c in cols] for r in rows])
    rows = [[getattr(r, c) for c in CSV_FIELDS] for r in iter_experiment(exp)]
    return Table(list(CSV_FIELDS), rows)


def cmd_iocheck(cfg) -> Table:
    a = trivial_guarantee_test(parse_distribution(cfg["dist"]))
    d = a.to_dict()
    cols = ["dist", "kappa0", "g1_at_kappa0", "trivial_at_kappa0", "weak_boundary_delta0"]
    return Table(cols, [[d[c] for c in cols]])


def cmd_nspfuzz(cfg) -> Table:
    from .simulation import gaussian_encoder

    phi = gaussian_encoder(cfg["m"], cfg["n"], cfg["seed"])
    r = robust_nsp_check(phi, cfg["eta"], cfg["k"], cfg["directions"], seed=cfg["seed"])
    cols = ["m", "n", "k", "eta", "directions", "worst_ratio", "holds_so_far", "io_constant"]
    return Table(cols, [[cfg["m"], cfg["n"], r.k, r.eta, r.directions, r.worst_ratio,
                         r.holds_so_far, io_constant(cfg["eta"])]])


def cmd_imgstats(cfg) -> Table:
    if cfg.get("synthetic"):
        ps = iid_patch_set(parse_distribution(cfg["synthetic"]), cfg["size"], cfg["count"], cfg["seed"])
    elif cfg.get("dir"):
        ps = load_patch_set(cfg["dir"], cfg["size"], cfg["count"], cfg["seed"])
    else:
        raise DomainError("imgstats needs --dir or --synthetic")
    curve = average_sorted_magnitudes(ps, cfg["transform"])
    n = curve.values.size
    models = {name: expected_order_statistics(MODEL_PRESETS[name], n).values for name in cfg["models"]}
    cols = ["rank", "value"] + [f"model_{name}" for name in models]
    rows = [[int(r), float(v)] + [float(models[m][i]) for m in models]
            for i, (r, v) in enumerate(zip(curve.ranks, curve.values))]
    extra = {"patches": len(ps), "model_specs": {m: MODEL_PRESETS[m] for m in models},
             "model_curves": "quantile approximation Fbar^-1(1 - n/(N+1))"}
    return Table(cols, rows, extra)


def cmd_fig2(cfg) -> Table:
    dist = parse_distribution(cfg["dist"])
    deltas = cfg["deltas"]
    hv = h_values(dist, deltas)
    exp = _experiment(cfg, decoders=("oracle", "l1"), k_rule="best_rho")
    summ = {(r.decoder, r.delta): r for r in summarize(iter_experiment(exp))}
    rows = []
    for d, h in zip(deltas, hv):
        o, l1 = summ.get(("oracle", d)), summ.get(("l1", d))
        rows.append([d, 1.0 - d, h.value, h.rho_star,
                     o.mean if o else None, l1.mean if l1 else None,
                     l1.nonconverged if l1 else None, (l1.failures if l1 else 0) + (o.failures if o else 0)])
    cols = ["delta", "ls_analytic", "oracle_analytic", "rho_star", "oracle_mc", "l1_mc",
            "l1_nonconverged", "failures"]
    t = Table(cols, rows)
    ls = [r[1] for r in rows]
    oa = [r[2] for r in rows]
    t.extra = {
        "l1_ls_crossing": crossing_point(deltas, [r[5] for r in rows], ls),
        "oracle_ls_crossing": crossing_point(deltas, oa, ls),
        "oracle_10db_delta": crossing_point(deltas, oa, [0.1] * len(rows)),
        "oracle_20db_delta": crossing_point(deltas, oa, [0.01] * len(rows)),
    }
    return t


def cmd_fig4(cfg) -> Table:
    dist = parse_distribution(cfg["dist"])
    k = np.asarray(cfg["kappas"], dtype=float)
    _range_check(k, 0.0, 1.0, "kappa")
    g1 = g_values(dist, 1, k)
    step = np.where(k <= KAPPA0, 0.5, 0.0)
    return Table(["kappa", "G1", "step_bound"], [[a, b, c] for a, b, c in zip(k, g1, step)],
                 {"kappa0": KAPPA0})


def cmd_fig5(cfg) -> Table:
    _range_check(cfg["taus"], 0.0, 4.0, "tau", lo_open=True)
    rows = []
    for tau in cfg["taus"]:
        try:
            r = critical_undersampling(parse_distribution(f"ggd:{tau!r}"))
            rows.append([tau, r.delta0, r.marker, None])
        except CompressibleError as exc:
            rows.append([tau, None, None, f"{type(exc).__name__}: {exc}"])
    return Table(["tau", "delta0", "marker", "error"], rows)


def _svg_gfun(t, path, cfg):
    plotting.curve(t, path, "kappa", ["G"], "κ", f"G_{cfg['q']:g}(κ)")


def _svg_hfun(t, path, cfg):
    plotting.curve(t, path, "delta", ["H"], "δ", "H(δ)")


def _svg_report(t, path, cfg):
    plotting.report(t, path, t.extra["dist"], t.extra["delta0"], t.extra["moment_verdict"])


def _svg_imgstats(t, path, cfg):
    plotting.curve(t, path, "rank", [c for c in t.columns if c != "rank"], "rank",
                   "mean sorted magnitude", logx=True, logy=True)


COMMANDS = {
    "gfun": (cmd_gfun, _svg_gfun),
    "hfun": (cmd_hfun, _svg_hfun),
    "delta0": (cmd_delta0, None),
    "report": (cmd_report, _svg_report),
    "simulate": (cmd_simulate, None),
    "iocheck": (cmd_iocheck, None),
    "nspfuzz": (cmd_nspfuzz, None),
    "imgstats": (cmd_imgstats, _svg_imgstats),
    "fig2": (cmd_fig2, lambda t, p, c: plotting.fig2(t, p, c["dist"])),
    "fig4": (cmd_fig4, lambda t, p, c: plotting.fig4(t, p)),
    "fig5": (cmd_fig5, lambda t, p, c: plotting.fig5(t, p)),
}

_OUTPUT_KEYS = {"command", "format", "svg", "out", "check"}


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="compressible",
        description="Compressibility functionals and Gaussian compressed sensing experiments.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--check", metavar="FILE", help="recompute a previous output from its header and compare rows")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")

    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("--format", choices=("csv", "json"), default="csv")
    out.add_argument("--out", metavar="PATH", help="output file (default: stdout)")

    svg = argparse.ArgumentParser(add_help=False)
    svg.add_argument("--svg", metavar="PATH", help="also render a figure")

    seed = argparse.ArgumentParser(add_help=False)
    seed.add_argument("--seed", type=int, default=None, help="master seed (default: $COMPRESSIBLE_SEED or 20120101)")

    def add(name, help, parents=()):
        return sub.add_parser(name, help=help, description=help, parents=[out, *parents])

    s = add("gfun", "G_q(kappa) on a kappa grid", [svg])
    s.add_argument("dist", type=dist_spec)
    s.add_argument("--q", type=float, default=2.0)
    s.add_argument("--kappas", type=grid, default=grid("0:1:101"))
    s.add_argument("--method", choices=("auto", "closed_form", "quadrature"), default="auto")

    s = add("hfun", "H(delta) and the minimizing rho", [svg])
    s.add_argument("dist", type=dist_spec)
    s.add_argument("--deltas", type=grid, default=grid("0.01:0.99:99"))

    s = add("delta0", "critical undersampling ratio for one or more distributions")
    s.add_argument("dists", type=dist_spec, nargs="+")

    s = add("report", "moment verdict, H samples and delta0 for a distribution", [svg])
    s.add_argument("dist", type=dist_spec)
    s.add_argument("--deltas", type=grid, default=grid("0.05:0.95:19"))

    s = add("simulate", "Monte Carlo decoding experiment", [seed])
    s.add_argument("dist", type=dist_spec)
    s.add_argument("--n", type=int, default=256)
    s.add_argument("--deltas", type=grid, default=grid("0.5"))
    s.add_argument("--decoders", type=lambda t: t.split(","), default=["ls"],
                   help=f"comma-separated subset of {','.join(DECODERS)}")
    s.add_argument("--k-rule", dest="k_rule", choices=K_RULES, default="best_rho")
    s.add_argument("--rho", type=float, default=None)
    s.add_argument("--k", type=int, default=None)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--tol", type=float, default=1e-7)
    s.add_argument("--max-iters", dest="max_iters", type=int, default=50_000)
    s.add_argument("--summary", action="store_true", help="emit per-(decoder, delta) summaries")

    s = add("iocheck", "instance-optimality triviality test")
    s.add_argument("dist", type=dist_spec)

    s = add("nspfuzz", "randomized falsifier for the robust null space property", [seed])
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--eta", type=float, default=1.0)
    s.add_argument("--directions", type=int, default=1000)

    s = add("imgstats", "average sorted transform magnitudes of image patches", [svg, seed])
    s.add_argument("--dir", help="directory of binary PGM images")
    s.add_argument("--synthetic", type=dist_spec, help="use iid patches from this distribution instead")
    s.add_argument("--size", type=int, default=8)
    s.add_argument("--count", type=int, default=100)
    s.add_argument("--transform", choices=TRANSFORMS, default="dct")
    s.add_argument("--models", type=lambda t: [m for m in t.split(",") if m], default=list(MODEL_PRESETS))

    s = add("fig2", "relative error vs undersampling: LS, oracle and l1", [svg, seed])
    s.add_argument("--dist", type=dist_spec, default="laplace")
    s.add_argument("--n", type=int, default=256)
    s.add_argument("--trials", type=int, default=500)
    s.add_argument("--deltas", type=grid, default=grid("0.05:0.95:19"))
    s.add_argument("--tol", type=float, default=1e-7)
    s.add_argument("--max-iters", dest="max_iters", type=int, default=50_000)

    s = add("fig4", "G_1 with the 1/2 step bound up to kappa0", [svg])
    s.add_argument("--dist", type=dist_spec, default="laplace")
    s.add_argument("--kappas", type=grid, default=grid("0:1:101"))

    s = add("fig5", "delta0 of the generalized Gaussian against its shape", [svg])
    s.add_argument("--taus", type=grid, default=grid("0.25:2:8"))
    return p


def resolve_config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in _OUTPUT_KEYS}
    if "seed" in cfg and cfg["seed"] is None:
        cfg["seed"] = default_seed()
    if args.command == "imgstats":
        bad = [m for m in cfg["models"] if m not in MODEL_PRESETS]
        if bad:
            raise DomainError(f"unknown model(s) {bad}; choose from {list(MODEL_PRESETS)}")
    return cfg


def run(command, cfg) -> Table:
    return COMMANDS[command][0](cfg)


def _sample_indices(n):
    if n <= CHECK_ROWS:
        return list(range(n))
    return sorted({0, n // 2, n - 1})


def check_file(path) -> tuple[bool, list[str]]:
    """Recompute a prior output and compare a few rows."""
    meta, cols, rows = parse(Path(path).read_text())
    msgs = []
    if meta.get("tool") != "compressible":
        return False, [f"{path}: not produced by this tool"]
    if meta.get("version") != __version__:
        msgs.append(f"note: written by version {meta.get('version')}, checking with {__version__}")
    command = meta.get("command")
    if command not in COMMANDS:
        return False, msgs + [f"unknown command {command!r} in header"]
    fresh = run(command, meta["config"])
    if fresh.columns != cols:
        return False, msgs + [f"columns differ: {cols} vs {fresh.columns}"]
    if len(fresh.rows) != len(rows):
        return False, msgs + [f"row count differs: {len(rows)} vs {len(fresh.rows)}"]
    ok = True
    for i in _sample_indices(len(rows)):
        for c, a, b in zip(cols, rows[i], fresh.rows[i]):
            if isinstance(b, (np.floating, np.integer)):
                b = b.item()
            if not values_match(a, b):
                ok = False
                msgs.append(f"row {i} column {c}: file has {a!r}, recomputed {b!r}")
    msgs.append(f"{'ok' if ok else 'MISMATCH'}: {command}, rows {_sample_indices(len(rows))} of {len(rows)}")
    return ok, msgs


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.check:
        if args.command:
            parser.error("--check takes no subcommand")
        try:
            ok, msgs = check_file(args.check)
        except (OSError, ValueError, KeyError) as exc:
            print(f"error: cannot check {args.check}: {exc}", file=sys.stderr)
            return 1
        for m in msgs:
            print(m, file=sys.stderr if not ok else sys.stdout)
        return 0 if ok else 1
    if not args.command:
        parser.error("a subcommand is required")
    try:
        cfg = resolve_config(args)
        table = run(args.command, cfg)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CompressibleError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    text = render(table, make_meta(args.command, cfg, table.extra), args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    svg = getattr(args, "svg", None)
    if svg:
        COMMANDS[args.command][1](table, svg, cfg)
    return 0


if __name__ == "__main__":
    sys.exit(main())
