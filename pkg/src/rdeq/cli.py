"""Command-line front end: sweeps, verification, search, simulation and symmetry checks.

Data go to standard output or ``--out``; with ``--out`` a run manifest is
written next to it (``<out>.manifest.json``) and can be fed back through
``--config`` to reproduce the same bytes.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import closed_form as cf
from . import coding_sim as cs
from . import optimizer as opt
from .model import DomainError, ValidationError, make_erased_source

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
_GLOBAL_KEYS = {"out", "config", "manifest"}


class UsageError(ValueError):
    pass


# -- parsing helpers --------------------------------------------------------

def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if v == 0.0:
            return "0"
        return format(v, ".12g")
    return str(v)


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (inclusive), a comma list, or a single number."""
    text = str(text).strip()
    if not text:
        raise UsageError("empty grid")
    try:
        if ":" in text:
            parts = [float(t) for t in text.split(":")]
            if len(parts) != 3:
                raise UsageError(f"grid {text!r} must look like start:stop:step")
            start, stop, step = parts
            if step <= 0 or stop < start:
                raise UsageError(f"grid {text!r} needs step > 0 and stop >= start")
            count = (stop - start) / step
            k_max = int(math.floor(count + 1e-12 / step))
            return [round(start + k * step, 12) for k in range(k_max + 1)]
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse grid {text!r}: {exc}") from None


def parse_int_list(text: str) -> list[int]:
    vals = parse_grid(text)
    out = [int(round(v)) for v in vals]
    if any(abs(v - o) > 1e-9 for v, o in zip(vals, out)):
        raise UsageError(f"expected integers in {text!r}")
    return out


def _json_clean(obj):
    if isinstance(obj, dict):
        return {str(k): _json_clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _json_clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return None if not math.isfinite(v) else v
    return obj


def dump_json(obj) -> str:
    return json.dumps(_json_clean(obj), sort_keys=True, indent=2) + "\n"


def dump_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


# -- commands ---------------------------------------------------------------

def _free_and_fixed(args) -> tuple[str, float, list[float]]:
    d1, d2 = parse_grid(args.d1), parse_grid(args.d2)
    if len(d1) > 1 and len(d2) > 1:
        raise UsageError("give a grid for only one of --d1 / --d2")
    if len(d2) > 1:
        return "d1", d1[0], d2
    return "d2", d2[0], d1


def _check_p(p) -> None:
    if p is not None and not (0.0 < p < 1.0):
        raise UsageError(f"--p must lie strictly between 0 and 1, got {p}")


def cmd_curve(args) -> tuple[str, int]:
    _check_p(args.p)
    fixed, value, grid = _free_and_fixed(args)
    rows = []
    if args.case == "informed" and args.alpha is None:
        # one row per point: the minimum-rate member of the frontier
        for g in grid:
            d1, d2 = (value, g) if fixed == "d1" else (g, value)
            try:
                _, a_max = cf.frontier_regime(d1, d2, args.p)
                alpha = [min(d1, a_max)]
            except cf.RegimeError:
                alpha = None
            rows += cf.curve_sweep("informed", args.p, fixed, value, [g], alpha)
    else:
        alpha = parse_grid(args.alpha) if args.alpha is not None else None
        rows = cf.curve_sweep(args.case, args.p, fixed, value, grid, alpha)
    for r in rows:
        if not r.admissible:
            print(f"inadmissible point d1={fmt(r.d1)} d2={fmt(r.d2)}: {r.note}", file=sys.stderr)
    header = ["d1", "d2", "p", "region", "rate_bits", "equivocation_bits", "clamped"]
    data = [[r.d1, r.d2, r.p, r.region, r.rate, r.equivocation, r.clamped] for r in rows]
    return dump_csv(header, data), EXIT_OK


def cmd_frontier(args) -> tuple[str, int]:
    _check_p(args.p)
    try:
        regime, a_max = cf.frontier_regime(args.d1, args.d2, args.p)
    except cf.RegimeError:
        labels = cf.classify_informed(args.d1, args.d2, args.p)
        raise UsageError(f"point lies in {';'.join(labels)}, not in G4 or G5; "
                         "its closed form is available through curve --case informed") from None
    grid = parse_grid(args.alpha) if args.alpha is not None else None
    sweep = cf.frontier_informed(args.d1, args.d2, args.p, grid)
    for a, why in sweep.rejected:
        print(f"alpha={fmt(a)} skipped: {why}", file=sys.stderr)
    header = ["alpha", "beta", "rate_bits", "equivocation_bits", "regime", "optimality"]
    data = [[fp.alpha, fp.beta, fp.rate, fp.equivocation, sweep.regime, sweep.optimality]
            for fp in sweep.points]
    return dump_csv(header, data), EXIT_OK


def cmd_regions(args) -> tuple[str, int]:
    _check_p(args.p)
    g1, g2 = parse_grid(args.d1), parse_grid(args.d2)
    if len(g1) < 2 or len(g2) < 2:
        raise UsageError("regions needs at least two grid points along each axis")
    data = []
    for d1 in g1:
        for d2 in g2:
            if args.case == "uninformed":
                label = cf.classify_uninformed(d1, d2, args.p)
            else:
                label = ";".join(cf.classify_informed(d1, d2, args.p))
            data.append([d1, d2, label])
    return dump_csv(["d1", "d2", "labels"], data), EXIT_OK


CHANNELS = ("L2", "L3", "L4", "G3", "G4")


def verification_cases(p: float, grid_size: int, alpha_count: int = 11):
    """Deduplicated parameter sets for every named test channel at erasure probability p."""
    d1s = np.linspace(0.0, 0.5, grid_size)
    d2s = np.linspace(0.0, 0.5, grid_size)
    seen = set()
    for d1 in d1s:
        for d2 in d2s:
            d1f, d2f = float(d1), float(d2)
            cands = []
            if d2f <= p / 2:
                cands += [("L2", (p, d2f)), ("G3", (p, d2f))]
            cands.append(("L3", (p, d1f)))
            if d2f < p * d1f and d2f / p < 0.5:
                cands.append(("L4", (p, d1f, d2f)))
            a_lo = max(0.0, (d1f - (1 - p) / 2) / p)
            a_hi = min(d1f / p, 1.0)
            for a in np.linspace(a_lo, a_hi, alpha_count):
                cands.append(("G4", (p, d1f, float(a))))
            for key in cands:
                if key not in seen:
                    seen.add(key)
                    yield key


def _expected(name: str, params: tuple) -> dict:
    h = cf.h
    if name == "L2":
        p, d2 = params
        return {"rate": p * (1 - h(d2 / p)), "equivocation": cf.side_info_entropy(p), "d1": 0.5, "d2": d2}
    if name == "L3":
        p, d1 = params
        return {"rate": 1 - h(d1), "equivocation": cf.equivocation_uninformed(d1, p), "d1": d1, "d2": p * d1}
    if name == "L4":
        p, d1, d2 = params
        return {"rate": cf.rate_uninformed(d1, d2, p), "equivocation": cf.equivocation_uninformed(d1, p),
                "d1": d1, "d2": d2}
    if name == "G3":
        p, d2 = params
        return {"rate": p * (1 - h(d2 / p)), "equivocation": cf.side_info_entropy(p),
                "d1": d2 + (1 - p) / 2, "d2": d2}
    p, d1, a = params
    fv = cf.frontier_value(d1, p, a)
    return {"rate": fv.rate, "equivocation": fv.equivocation, "d1": d1, "d2": p * min(a, 1 - a)}


_CONSTRUCT = {
    "L2": opt.paper_channel_L2, "L3": opt.paper_channel_L3, "L4": opt.paper_channel_L4,
    "G3": opt.paper_channel_G3, "G4": opt.paper_channel_G4,
}


def run_verification(ps, grid_size: int, only=None, alpha_count: int = 11) -> dict:
    names = CHANNELS if not only else tuple(only)
    report = {n: {"cases": 0, "max_abs_error": 0.0, "worst": None} for n in names}
    for p in ps:
        source = make_erased_source(p)
        for name, params in verification_cases(p, grid_size, alpha_count):
            if name not in report:
                continue
            ev = opt.evaluate(_CONSTRUCT[name](*params), source)
            got = ev.point.as_dict()
            want = _expected(name, params)
            err = max(abs(got[k] - want[k]) for k in want)
            entry = report[name]
            entry["cases"] += 1
            if entry["worst"] is None or err > entry["max_abs_error"]:
                entry["max_abs_error"] = err
                entry["worst"] = {"params": list(params), "expected": want, "computed": got}
    return report


def cmd_verify(args) -> tuple[str, int]:
    only = [s.strip() for s in args.only.split(",")] if args.only else None
    if only:
        bad = [s for s in only if s not in CHANNELS]
        if bad:
            raise UsageError(f"unknown channel(s) {bad}; choose from {list(CHANNELS)}")
    ps = parse_grid(args.p)
    for p in ps:
        _check_p(p)
    report = run_verification(ps, args.grid_size, only, args.alpha_count)
    ok = all(e["max_abs_error"] <= args.tol for e in report.values())
    out = {"channels": report, "tolerance": args.tol, "p_values": ps, "grid_size": args.grid_size,
           "passed": ok}
    return dump_json(out), EXIT_OK if ok else EXIT_FAIL


def cmd_search(args) -> tuple[str, int]:
    _check_p(args.p)
    cfg = opt.SearchConfig(restarts=args.restarts, steps=args.steps, step_scale=args.step_scale,
                           seed=args.seed, d1=args.d1, d2=args.d2, e=args.e,
                           w1_size=args.w1_size, w2_size=args.w2_size)
    source = make_erased_source(args.p)
    res = opt.random_search(args.case, source, cfg)
    out = {
        "case": args.case,
        "targets": {"d1": args.d1, "d2": args.d2, "e": args.e, "p": args.p},
        "samples": res.samples,
        "feasible_samples": res.feasible,
        "status": "found" if res.found else "empty",
        "bound": opt.closed_form_bound(args.case, args.p, args.d1, args.d2, args.e),
        "best": None,
    }
    if res.found:
        out["best"] = {"channel": res.best.candidate.channel.probs, "point": res.best.point.as_dict(),
                       "restart": res.best_restart}
    return dump_json(out), EXIT_OK


SIM_HEADER = ["scheme", "n", "seed", "rate_bits_used", "equiv_rate_bits", "limit_bits", "gap_bits",
              "distortion1", "distortion2", "encoding_failure", "decode_failure", "bin_uniformity",
              "exact", "samples"]


def cmd_simulate(args) -> tuple[str, int]:
    _check_p(args.p)
    ns = parse_int_list(args.n)
    seeds = parse_int_list(args.seeds) if args.seeds is not None else [args.seed]
    if not seeds:
        raise UsageError("seed list is empty")
    if not ns or min(ns) < 1:
        raise UsageError("blocklengths must be positive")
    base = cs.Scenario.designated(args.scheme)
    sc = cs.Scenario(
        scheme=args.scheme,
        p=base.p if args.p is None else args.p,
        d1=base.d1 if args.d1 is None else args.d1,
        d2=base.d2 if args.d2 is None else args.d2,
        alpha=args.alpha,
        crossover=base.crossover if args.crossover is None else args.crossover,
        rate_excess=base.rate_excess if args.rate_excess is None else args.rate_excess,
    )
    eps = cs.TREND_EPSILON[args.scheme] if args.epsilon is None else args.epsilon
    rows = []
    for n in ns:
        for seed in seeds:
            cfg = cs.SimConfig(n=n, epsilon=eps, rate_slack=args.rate_slack, seed=seed,
                               max_states=args.max_states, exact_only=args.exact_only,
                               mc_samples=args.mc_samples)
            r = cs.run_scenario(sc, cfg)
            rows.append([r.scheme, r.n, r.seed, r.rate_bits_used, r.equiv_rate, r.limit_value, r.gap,
                         r.distortion1, r.distortion2, r.encoding_failure_prob, r.decode_failure_prob,
                         r.bin_uniformity_stat, r.exact, r.samples])
    return dump_csv(SIM_HEADER, rows), EXIT_OK


def cmd_symmetry(args) -> tuple[str, int]:
    _check_p(args.p)
    if args.samples < 0:
        raise UsageError("sample count must be nonnegative")
    if args.samples == 0:
        print("warning: zero samples requested; the check passes vacuously", file=sys.stderr)
    rep = opt.symmetry_suite(args.samples, args.seed, args.p)
    rep["p"] = args.p
    return dump_json(rep), EXIT_OK if rep["failed"] == 0 else EXIT_FAIL


COMMANDS = {
    "curve": cmd_curve, "frontier": cmd_frontier, "regions": cmd_regions, "verify": cmd_verify,
    "search": cmd_search, "simulate": cmd_simulate, "symmetry": cmd_symmetry,
}


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output path (default: standard output)")
    common.add_argument("--config", help="key=value file or a run manifest (JSON)")
    common.add_argument("--seed", type=int, default=0, help="master seed")

    parser = argparse.ArgumentParser(prog="rdeq", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"rdeq {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curve", parents=[common], help="closed-form rate/equivocation along one distortion")
    p.add_argument("--case", choices=("uninformed", "informed"), default="uninformed")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--d1", required=True, help="value or start:stop:step grid")
    p.add_argument("--d2", required=True, help="value or start:stop:step grid")
    p.add_argument("--alpha", help="frontier parameter grid for informed points in G4/G5")

    p = sub.add_parser("frontier", parents=[common], help="parametric frontier in G4/G5")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--d1", type=float, required=True)
    p.add_argument("--d2", type=float, required=True)
    p.add_argument("--alpha", help="alpha grid (default: 513 points over the admissible range)")

    p = sub.add_parser("regions", parents=[common], help="region labels over a (d1, d2) grid")
    p.add_argument("--case", choices=("uninformed", "informed"), default="informed")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--d1", default="0:1:0.05")
    p.add_argument("--d2", default="0:1:0.05")

    p = sub.add_parser("verify", parents=[common], help="named test channels against closed forms")
    p.add_argument("--p", default="0.1,0.25,0.4", help="erasure probabilities")
    p.add_argument("--grid-size", type=int, default=50)
    p.add_argument("--alpha-count", type=int, default=11)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--only", help="comma list of channels (L2,L3,L4,G3,G4)")

    p = sub.add_parser("search", parents=[common], help="random search over test channels")
    p.add_argument("--case", choices=("uninformed", "informed"), default="uninformed")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--d1", type=float, required=True)
    p.add_argument("--d2", type=float, required=True)
    p.add_argument("--e", type=float, help="minimum equivocation")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--step-scale", type=float, default=0.3)
    p.add_argument("--w1-size", type=int, default=2)
    p.add_argument("--w2-size", type=int, default=2)

    p = sub.add_parser("simulate", parents=[common], help="finite-blocklength binning schemes")
    p.add_argument("--scheme", choices=cs.SCHEMES, required=True)
    p.add_argument("--n", default="4,8,12", help="blocklengths")
    p.add_argument("--seeds", help="seed list or start:stop:step (default: --seed)")
    p.add_argument("--p", type=float)
    p.add_argument("--d1", type=float)
    p.add_argument("--d2", type=float)
    p.add_argument("--alpha", type=float, help="kaspi: use the G4 channel with this alpha")
    p.add_argument("--crossover", type=float, help="wz: crossover of U = X xor noise")
    p.add_argument("--rate-excess", type=float, help="sw: bin rate above H(X|Y)")
    p.add_argument("--epsilon", type=float, help="typicality slack (default: calibrated per scheme)")
    p.add_argument("--rate-slack", type=float, default=0.05)
    p.add_argument("--max-states", type=int, default=cs.DEFAULT_MAX_STATES)
    p.add_argument("--mc-samples", type=int, default=4096)
    p.add_argument("--exact-only", action="store_true")

    p = sub.add_parser("symmetry", parents=[common], help="symmetrisation check on random decoders")
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--p", type=float, help="fixed erasure probability (default: random per sample)")
    return parser


def _option_map(parser: argparse.ArgumentParser, command: str) -> dict:
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    sp = sub.choices[command]
    out = {}
    for act in sp._actions:
        for opt_str in act.option_strings:
            if opt_str.startswith("--"):
                out[act.dest] = (opt_str, act)
    return out


def _config_argv(path: str, command: str, options: dict) -> list[str]:
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        man = json.loads(text)
        if man.get("command") != command:
            raise UsageError(f"manifest is for {man.get('command')!r}, not {command!r}")
        items = man.get("params", {}).items()
    else:
        items = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            items.append((k.strip(), v.strip()))
    argv = []
    for key, val in items:
        dest = key.replace("-", "_")
        if dest in _GLOBAL_KEYS or dest not in options:
            raise UsageError(f"unknown config key {key!r} for {command}")
        opt_str, act = options[dest]
        if isinstance(act, argparse._StoreTrueAction):
            if str(val).lower() in ("1", "true", "yes"):
                argv.append(opt_str)
            continue
        if val is None:
            continue
        argv += [opt_str, str(val)]
    return argv


def _resolve(argv: list[str]):
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    command = next((a for a in argv if a in COMMANDS), None)
    if known.config and command:
        # file values go first so explicit flags win
        extra = _config_argv(known.config, command, _option_map(parser, command))
        i = argv.index(command)
        argv = argv[:i + 1] + extra + argv[i + 1:]
    return parser, parser.parse_args(argv)


def _manifest(args, data: str) -> dict:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in _GLOBAL_KEYS | {"command"}}
    return {
        "tool": "rdeq",
        "version": __version__,
        "command": args.command,
        "params": params,
        "seed": args.seed,
        "data_sha256": hashlib.sha256(data.encode("utf-8")).hexdigest(),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        _, args = _resolve(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    except (UsageError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        data, code = COMMANDS[args.command](args)
    except (UsageError, DomainError, ValidationError, cf.RegimeError, opt.RangeError,
            cs.BudgetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        Path(args.out).write_text(data, encoding="utf-8", newline="\n")
        man = dump_json(_manifest(args, data))
        Path(str(args.out) + ".manifest.json").write_text(man, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(data)
        sys.stdout.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
