"""Command-line front end.

Commands:
  run <config>         execute one scenario from a plain-text config
  stability ...        critical grid-spacing sweep
  appendix ...         beta-stability scan of a standalone tail variant
  table <id>           reproduce a published table (t1..t9, a2)
  quad ...             dump a quadrature rule

Exit codes: 0 success, 1 usage/config error, 2 numerical failure.
All outputs are CSV files under the chosen output directory.
"""

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from .config import ConfigError, config_to_scenario, parse_config, render_config
from .quadrature import RootFindError, laguerre_rule, gauss_legendre_rule
from .scenarios import run_scenario
from .space import write_coeff_csv, write_solution_csv
from .spectra import NoStableSpacing, beta_stability_scan, critical_dz
from .tables import TABLE_IDS, build_table
from .timestepping import SingularMatrixError, TimeLoopBlowUp


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.6e}"
    return "" if x is None else str(x)


def _write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for row in rows:
            wr.writerow([_fmt(v) for v in row])
    return path


def _write_matrix_csv(path, M):
    rows = [(i, j, M[i, j]) for i in range(M.shape[0]) for j in range(M.shape[1])
            if M[i, j] != 0.0]
    return _write_csv(path, ["row", "col", "value"], rows)


def cmd_run(args):
    text = Path(args.config).read_text()
    cfg = parse_config(text)
    scn = config_to_scenario(cfg)
    outdir = Path(cfg.get("output", "dir", "out"))
    outdir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    art = run_scenario(scn)
    wall = time.perf_counter() - t0
    files = []
    sol = outdir / "solution.csv"
    write_solution_csv(sol, art.final, art.space, plot_tail=args.plot_tail)
    files.append(sol)
    coef = outdir / "coefficients.csv"
    write_coeff_csv(coef, art.final, art.space)
    files.append(coef)
    for i, (t, st) in enumerate(art.snapshots):
        snap = outdir / f"snapshot_{i:04d}.csv"
        write_solution_csv(snap, st, art.space, plot_tail=args.plot_tail)
        files.append(snap)
    if art.rel_errors is not None:
        err = outdir / "errors.csv"
        _write_csv(err, ["norm", "absolute", "relative"], [
            ("l1", art.abs_errors.l1, art.rel_errors.l1),
            ("l2", art.abs_errors.l2, art.rel_errors.l2),
            ("linf", art.abs_errors.linf, art.rel_errors.linf),
        ])
        files.append(err)
    if art.snapshots and (scn.source == "manufactured" or scn.damping is not None):
        # run summary: per-snapshot error norms against the natural reference
        # (exact solution for the manufactured test, zero for damping runs)
        from extdg.space import error_norms
        from extdg.scenarios import ManufacturedSolution
        rows = []
        for (t, st) in art.snapshots:
            if scn.source == "manufactured":
                ms = ManufacturedSolution(scn.mu, scn.u)
                ref = (lambda tt: (lambda z: ms.exact(z, tt)))(t)
            else:
                ref = None
            ab, _ = error_norms(st, ref, art.space, ng=scn.ng)
            rows.append((t, ab.l1, ab.l2, ab.linf))
        summ = outdir / "summary.csv"
        _write_csv(summ, ["t", "l1", "l2", "linf"], rows)
        files.append(summ)
    if args.dump_matrix:
        from extdg.scenarios import _build_operator
        op = _build_operator(scn, art.space)
        mat = outdir / "matrix.csv"
        _write_matrix_csv(mat, op.linear_matrix())
        files.append(mat)
    manifest = {
        "config": render_config(cfg),
        "resolved": {
            "beta": art.space.beta, "sigma": scn.resolved_sigma(),
            "dz": scn.dz, "dt": scn.dt, "dofs": art.space.dofs,
        },
        "artifacts": [str(f) for f in files],
        "timings": {**art.timings, "total": wall},
        "tail_dof_share": art.tail_dof_share,
    }
    mpath = outdir / "manifest.json"
    mpath.write_text(json.dumps(manifest, indent=2))
    for f in files + [mpath]:
        if not Path(f).exists() or Path(f).stat().st_size == 0:
            raise RuntimeError(f"artifact {f} missing or empty")
    print(f"wrote {len(files) + 1} artifacts to {outdir}")
    if art.rel_errors is not None:
        print(f"relative errors: l1={art.rel_errors.l1:.3e} "
              f"l2={art.rel_errors.l2:.3e} linf={art.rel_errors.linf:.3e}")
    print(f"tail dof share: {art.tail_dof_share:.4%}")
    return 0


def _parse_range(text):
    return [float(x) for x in text.split(",")]


def cmd_stability(args):
    rows = []
    for p in [int(x) for x in args.p.split(",")]:
        for q in [int(x) for x in args.q.split(",")]:
            for sigma in _parse_range(args.sigma):
                for pe in _parse_range(args.pe):
                    res = critical_dz(p, q, sigma, pe, n_max=args.n_max)
                    rows.append((p, q, sigma, pe, res.dz_cr))
                    print(f"p={p} q={q} sigma={sigma} pe={pe}: "
                          f"dz_cr = 1/{res.n_star}"
                          + ("" if res.monotone else "  [non-monotone tail]"))
    path = _write_csv(Path(args.out) / "stability.csv",
                      ["p", "q", "sigma", "pe", "dz_cr"], rows)
    print(f"wrote {path}")
    return 0


def cmd_appendix(args):
    grid = np.geomspace(args.beta_min, args.beta_max, args.points)
    res = beta_stability_scan(args.form, args.basis, args.bc, args.pe,
                              rule=args.rule, q=args.q, beta_grid=grid)
    rows = [(args.form, args.basis, args.bc, args.rule or "", b, args.pe, m, int(s))
            for (b, m, s) in res.rows()]
    path = _write_csv(Path(args.out) / "appendix_scan.csv",
                      ["form", "basis", "bc", "rule", "beta", "pe",
                       "max_re_lambda", "stable"], rows)
    print(f"pattern: {res.pattern}"
          + (f", lower boundary {res.lower:.4g}" if res.lower else "")
          + (f", upper boundary {res.upper:.4g}" if res.upper else ""))
    print(f"wrote {path}")
    return 0


def cmd_table(args):
    tid = args.id
    res = build_table(tid)
    outdir = Path(args.out)
    path = _write_csv(outdir / f"{tid}.csv", res.header, res.rows)
    _write_csv(outdir / f"{tid}.expected.csv", res.header, res.expected)
    print(f"wrote {path} and {path.with_suffix('.expected.csv').name}")
    if res.notes:
        print(res.notes)
    return 0


def cmd_quad(args):
    if args.family == "gauss_legendre":
        rule = gauss_legendre_rule(args.m + 1)
    else:
        rule = laguerre_rule(args.family, args.beta, args.m, modified=not args.plain)
    rows = [(i, x, w) for i, (x, w) in enumerate(zip(rule.nodes, rule.weights))]
    path = _write_csv(Path(args.out) / "quadrature.csv",
                      ["index", "node", "weight"], rows)
    print(f"wrote {path}")
    return 0


def make_parser():
    ap = argparse.ArgumentParser(prog="extdg",
                                 description="Extended DG solver on the half line")
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario from a config file")
    p_run.add_argument("config")
    p_run.add_argument("--plot-tail", type=float, default=0.0,
                       help="extend the solution dump this far past the interface")
    p_run.add_argument("--dump-matrix", action="store_true",
                       help="also dump the assembled linear operator as CSV triplets")
    p_run.set_defaults(func=cmd_run)

    p_st = sub.add_parser("stability", help="critical grid-spacing sweep")
    p_st.add_argument("--p", required=True, help="comma list of degrees")
    p_st.add_argument("--q", required=True, help="comma list of tail mode counts")
    p_st.add_argument("--sigma", required=True, help="comma list of penalties")
    p_st.add_argument("--pe", required=True, help="comma list of Peclet numbers")
    p_st.add_argument("--n-max", type=int, default=100)
    p_st.add_argument("--out", default="out")
    p_st.set_defaults(func=cmd_stability)

    p_ap = sub.add_parser("appendix", help="beta-stability scan of a tail variant")
    p_ap.add_argument("--form", required=True,
                      choices=["strong", "weak_nodal", "weak_modal"])
    p_ap.add_argument("--basis", required=True, choices=["function", "polynomial"])
    p_ap.add_argument("--bc", required=True, choices=["dirichlet", "neumann"])
    p_ap.add_argument("--rule", choices=["GLR", "GL"])
    p_ap.add_argument("--pe", type=float, required=True)
    p_ap.add_argument("--q", type=int, default=50)
    p_ap.add_argument("--beta-min", type=float, required=True)
    p_ap.add_argument("--beta-max", type=float, required=True)
    p_ap.add_argument("--points", type=int, default=13)
    p_ap.add_argument("--out", default="out")
    p_ap.set_defaults(func=cmd_appendix)

    p_tb = sub.add_parser("table", help="reproduce a published table")
    p_tb.add_argument("id", choices=list(TABLE_IDS))
    p_tb.add_argument("--out", default="out")
    p_tb.set_defaults(func=cmd_table)

    p_qd = sub.add_parser("quad", help="dump a quadrature rule")
    p_qd.add_argument("--family", required=True,
                      choices=["gauss_legendre", "GL", "GLR"])
    p_qd.add_argument("--beta", type=float, default=1.0)
    p_qd.add_argument("--m", type=int, required=True,
                      help="max index (rule has m+1 nodes)")
    p_qd.add_argument("--plain", action="store_true",
                      help="plain weights instead of modified ones")
    p_qd.add_argument("--out", default="out")
    p_qd.set_defaults(func=cmd_quad)
    return ap


def main(argv=None):
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (SingularMatrixError, TimeLoopBlowUp, NoStableSpacing,
            RootFindError, RuntimeError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
