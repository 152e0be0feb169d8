"""Command-line entry point ``twrn-rd``.

Exit codes: 0 success, 2 invalid input, 3 solver did not converge (outputs
are still written and flagged), 1 when ``verify`` finds a failing check.
"""
from __future__ import annotations

import argparse
import sys
import time
import warnings
from pathlib import Path

from . import __version__
from .errors import BudgetExceeded, NoConvergence, UnknownCommand, ValidationError
from .io import RunManifest, csv_text, load_channel, load_config, load_source, manifest_path, to_jsonable, write_csv, write_json

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INVALID = 2
EXIT_NO_CONVERGENCE = 3

COMMANDS = ("rd", "bounds", "cr", "dsbs-figures", "gaussian", "jscc", "verify", "oracle")


def _common(p: argparse.ArgumentParser, source=True, dists=True):
    if source:
        p.add_argument("--source", required=True, help="JSON joint source file")
    if dists:
        p.add_argument("--d1", type=float, action="append", help="distortion target for X (repeatable)")
        p.add_argument("--d2", type=float, action="append", help="distortion target for Y (repeatable)")
    p.add_argument("--config", help="JSON file with solver settings")
    p.add_argument("--tol", type=float, help="solver tolerance")
    p.add_argument("--starts", type=int, help="number of starts for non-convex solvers")
    p.add_argument("--grid-k", type=int, help="oracle grid resolution")
    p.add_argument("--seed", type=int, help="random seed (TWRN_RD_SEED overrides)")
    p.add_argument("--jobs", type=int, default=1, help="worker cap (computations run in one process)")
    p.add_argument("--out", help="output file (CSV/JSON) or directory")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twrn-rd", description="Rate-distortion and feasibility tools for the two-way relay downlink.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("rd", help="marginal, conditional, joint or Wyner-Ziv RD values")
    _common(p)
    p.add_argument("--solver", default="conditional", choices=("marginal", "conditional", "joint", "wyner-ziv"))
    p.add_argument("--which", type=int, default=1, choices=(1, 2), help="which receiver's source (1 = X)")

    p = sub.add_parser("bounds", help="bound ladder R_L, R_U**, R_U*, R_U at distortion pairs")
    _common(p)
    p.add_argument("--no-cr", action="store_true", help="skip the common-reconstruction rate")

    p = sub.add_parser("cr", help="common-reconstruction RD at distortion pairs")
    _common(p)

    p = sub.add_parser("dsbs-figures", help="CSV tables of the DSBS curves, one per rho")
    _common(p, source=False, dists=False)
    p.add_argument("--rho", type=float, action="append", required=True, help="crossover (repeatable)")
    p.add_argument("--step", type=float, default=0.005, help="distortion grid step")

    p = sub.add_parser("gaussian", help="Gaussian region value in closed form")
    _common(p, source=False)
    p.add_argument("--sigma-x2", type=float, default=1.0)
    p.add_argument("--sigma-y2", type=float, default=1.0)
    p.add_argument("--rho", type=float, required=True, help="correlation coefficient")

    p = sub.add_parser("jscc", help="joint source-channel feasibility verdicts")
    _common(p)
    p.add_argument("--channel", required=True, help="JSON broadcast channel file")
    p.add_argument("--kappa", type=float, help="override the bandwidth expansion of the channel file")
    p.add_argument("--check", default="all", choices=("all", "cut-set", "cr", "zero-distortion"))

    p = sub.add_parser("verify", help="run the invariant suite over bundled instances")
    _common(p, source=False, dists=False)
    p.add_argument("--only", action="append", help="restrict to a named check (repeatable)")

    p = sub.add_parser("oracle", help="brute-force grid minimum of an objective")
    _common(p)
    p.add_argument("--objective", default="conditional1")
    p.add_argument("--card", type=int, help="auxiliary alphabet size")
    p.add_argument("--symmetric", action="store_true", help="tie rows by the complement symmetry")
    p.add_argument("--budget", type=float, default=1e8)
    return ap


def _pairs(args):
    d1 = args.d1 or []
    d2 = args.d2 or []
    if not d1 and not d2:
        raise ValidationError("give at least one --d1 or --d2")
    if d1 and d2 and len(d1) != len(d2):
        if len(d1) == 1:
            d1 = d1 * len(d2)
        elif len(d2) == 1:
            d2 = d2 * len(d1)
        else:
            raise ValidationError("--d1 and --d2 must be repeated equally often")
    if not d2:
        d2 = [None] * len(d1)
    if not d1:
        d1 = [None] * len(d2)
    return list(zip(d1, d2))


def _config(args):
    over = {"tol": args.tol, "n_starts": args.starts, "grid_resolution": args.grid_k, "seed": args.seed}
    return load_config(args.config, over)


class _Run:
    """Book-keeping shared by the subcommands."""

    def __init__(self, args):
        self.args = args
        self.cfg = _config(args)
        self.inputs = {}
        self.converged = True
        self.caught = []
        self.t0 = time.perf_counter()

    def emit(self, text: str, default_name: str):
        """Print ``text`` or write it to ``--out``; writes the manifest alongside."""
        out = self.args.out
        if out is None:
            sys.stdout.write(text)
            return None
        path = Path(out)
        if path.is_dir() or out.endswith(("/", "\\")):
            path = path / default_name
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        self.manifest(path)
        print(f"wrote {path}")
        return path

    def ok(self) -> bool:
        return self.converged and not any(issubclass(w.category, NoConvergence) for w in self.caught)

    def manifest(self, out_path):
        RunManifest(
            command=self.args.command,
            inputs=self.inputs,
            config=to_jsonable(self.cfg),
            output=str(out_path),
            wall_time=round(time.perf_counter() - self.t0, 3),
            converged=self.ok(),
        ).write(manifest_path(out_path))


def _cmd_rd(run):
    from .auxiliary import wyner_ziv_rd
    from .rd import conditional_rd, joint_rd, marginal_rd

    a = run.args
    src = load_source(a.source)
    run.inputs["source"] = a.source
    rows = []
    for d1, d2 in _pairs(a):
        d = d1 if a.which == 1 else d2
        if a.solver == "joint":
            if d1 is None or d2 is None:
                raise ValidationError("the joint solver needs both --d1 and --d2")
            r = joint_rd(src, d1, d2, run.cfg)
            rate, conv = r.rate, r.converged
        elif d is None:
            raise ValidationError(f"--d{a.which} is required")
        elif a.solver == "marginal":
            s = src if a.which == 1 else src.swapped()
            r = marginal_rd(s.q_x, s.delta1, d, run.cfg)
            rate, conv = r.rate, r.converged
        elif a.solver == "conditional":
            r = conditional_rd(src, a.which, d, run.cfg)
            rate, conv = r.rate, r.converged
        else:
            r = wyner_ziv_rd(src, a.which, d, run.cfg)
            rate, conv = r.rate, r.converged
        run.converged &= bool(conv)
        rows.append((a.solver, a.which, d1, d2, rate, bool(conv)))
    return run.emit(csv_text(("solver", "which", "d1", "d2", "rate", "converged"), rows), "rd.csv")


def _cmd_bounds(run):
    from .bounds import BUNDLE_COLUMNS, bound_bundle

    a = run.args
    src = load_source(a.source)
    run.inputs["source"] = a.source
    rows = []
    for d1, d2 in _pairs(a):
        if d1 is None or d2 is None:
            raise ValidationError("bounds need both --d1 and --d2")
        b = bound_bundle(src, d1, d2, run.cfg, with_cr=not a.no_cr)
        rows.append([b.row()[c] for c in BUNDLE_COLUMNS])
        print(f"d=({d1:g},{d2:g}) r_l={b.r_l:.6f} r_u**={b.r_u_dstar:.6f} r_u*={b.r_u_star:.6f} "
              f"r_u={b.r_u:.6f} ordering_ok={b.ordering_ok}", file=sys.stderr)
    return run.emit(csv_text(BUNDLE_COLUMNS, rows), "bounds.csv")


def _cmd_cr(run):
    from .cr import SWEEP_COLUMNS, cr_sweep

    a = run.args
    src = load_source(a.source)
    run.inputs["source"] = a.source
    pairs = _pairs(a)
    if any(d is None for p in pairs for d in p):
        raise ValidationError("cr needs both --d1 and --d2")
    rows = cr_sweep(src, pairs, run.cfg)
    return run.emit(csv_text(SWEEP_COLUMNS, [[r[c] for c in SWEEP_COLUMNS] for r in rows]), "cr.csv")


def _cmd_figures(run):
    from .closed_forms import default_grid, figure_curves

    a = run.args
    outdir = Path(a.out or ".")
    written = []
    for rho in a.rho:
        t = figure_curves(rho, default_grid(a.step))
        path = outdir / f"dsbs_rho_{rho:g}.csv"
        write_csv(path, ("d", "r", "cr_upper", "is_past_dstar"), list(t.rows()))
        written.append(str(path))
        print(f"rho={rho:g} d*={t.d_star:.6f} -> {path}")
    run.inputs["rho"] = list(a.rho)
    run.manifest(outdir)
    return written


def _cmd_gaussian(run):
    from .closed_forms import GaussianSpec, gaussian_region

    a = run.args
    spec = GaussianSpec(a.sigma_x2, a.sigma_y2, a.rho)
    rows = []
    for d1, d2 in _pairs(a):
        if d1 is None or d2 is None:
            raise ValidationError("gaussian needs both --d1 and --d2")
        rows.append((a.sigma_x2, a.sigma_y2, a.rho, d1, d2, gaussian_region(spec, d1, d2)))
    return run.emit(csv_text(("sigma_x2", "sigma_y2", "rho", "d1", "d2", "rate"), rows), "gaussian.csv")


def _cmd_jscc(run):
    import json

    from .jscc import jscc_cr_achievable, jscc_cut_set_feasible, tuncel_zero_distortion_feasible

    a = run.args
    src = load_source(a.source)
    bc = load_channel(a.channel)
    if a.kappa is not None:
        bc = bc.with_kappa(a.kappa)
    run.inputs.update(source=a.source, channel=a.channel)
    out = []
    for d1, d2 in _pairs(a):
        if d1 is None or d2 is None:
            raise ValidationError("jscc needs both --d1 and --d2")
        item = {"d1": d1, "d2": d2, "kappa": bc.kappa}
        if a.check in ("all", "cut-set"):
            item["cut_set"] = jscc_cut_set_feasible(src, bc, d1, d2, run.cfg)
        if a.check in ("all", "cr"):
            item["cr_achievable"] = jscc_cr_achievable(src, bc, d1, d2, run.cfg)
        if a.check in ("all", "zero-distortion") and src.is_hamming():
            item["zero_distortion"] = tuncel_zero_distortion_feasible(src, bc, run.cfg)
        for k, v in item.items():
            if hasattr(v, "status"):
                print(f"d=({d1:g},{d2:g}) {k}: {v.status} ({v.kind})", file=sys.stderr)
        out.append(item)
    text = json.dumps(to_jsonable(out), indent=2, sort_keys=True) + "\n"
    return run.emit(text, "jscc.json")


def _cmd_verify(run):
    from .verify import CHECK_COLUMNS, CHECKS, run_checks

    a = run.args
    names = a.only or list(CHECKS)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ValidationError(f"unknown check(s): {', '.join(unknown)}")

    def show(r):
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name}: {r.value:.3g} (limit {r.threshold:g}, {r.seconds:.1f}s)")

    res = run_checks(run.cfg, names, progress=show)
    rows = [(r.name, r.passed, r.value, r.threshold, r.detail) for r in res]
    if a.out:
        run.emit(csv_text(CHECK_COLUMNS, rows), "verify.csv")
    n_fail = sum(not r.passed for r in res)
    print(f"{len(res) - n_fail}/{len(res)} checks passed")
    return n_fail


def _cmd_oracle(run):
    import json

    from .oracle import GridSpec, complement_symmetry, grid_min_channel

    a = run.args
    src = load_source(a.source)
    run.inputs["source"] = a.source
    k = a.grid_k or run.cfg.grid_resolution
    out = []
    for d1, d2 in _pairs(a):
        sym = complement_symmetry(src, a.objective) if a.symmetric else None
        r = grid_min_channel(src, a.objective, (d1, d2), GridSpec(k=k, card=a.card, budget=int(a.budget), symmetry=sym))
        print(f"d=({d1},{d2}) value={r.value:.6f} gap={r.guaranteed_gap:.3g} channels={r.n_channels}", file=sys.stderr)
        out.append({"objective": a.objective, "d1": d1, "d2": d2, "k": k, "value": r.value,
                    "guaranteed_gap": r.guaranteed_gap, "relaxed_value": r.relaxed_value,
                    "modulus": r.modulus, "n_channels": r.n_channels, "argmin": r.argmin.probs})
    text = json.dumps(to_jsonable(out), indent=2, sort_keys=True) + "\n"
    return run.emit(text, "oracle.json")


HANDLERS = {
    "rd": _cmd_rd,
    "bounds": _cmd_bounds,
    "cr": _cmd_cr,
    "dsbs-figures": _cmd_figures,
    "gaussian": _cmd_gaussian,
    "jscc": _cmd_jscc,
    "verify": _cmd_verify,
    "oracle": _cmd_oracle,
}


def run(argv=None) -> int:
    """Parse ``argv`` and execute one subcommand; returns the exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv and not argv[0].startswith("-") and argv[0] not in COMMANDS:
        err = UnknownCommand(f"unknown command {argv[0]!r}; choose from {', '.join(COMMANDS)}")
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.command is None:
        parser.print_help()
        return EXIT_INVALID
    try:
        r = _Run(args)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", NoConvergence)
            r.caught = caught
            result = HANDLERS[args.command](r)
        for w in caught:
            if issubclass(w.category, NoConvergence):
                print(f"warning: {w.message}", file=sys.stderr)
            else:
                warnings.showwarning(w.message, w.category, w.filename, w.lineno)
        if not r.ok():
            return EXIT_NO_CONVERGENCE
        if args.command == "verify" and result:
            return EXIT_FAIL
        return EXIT_OK
    except (ValidationError, BudgetExceeded) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
