"""Command-line experiment runner.

Subcommands: gen (write an instance file), eval (cost/optimum/ratio report),
verify (axiom, certificate, dual, and ratio suites), gap-demo (the harmonic
disjunction family where certificates are cheap but strategies are not).
Exit codes: 0 pass, 1 check failure, 2 usage or parse error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import instances as inst_mod
from .core import (
    ConstantFunctionError,
    LimitError,
    expected_cost,
    optimal_expected_cost,
    sample_input,
)
from .instances import Instance, InstanceFormatError
from .policies import (
    DualGreedyPolicy,
    GreedyPolicy,
    bounds,
    cost_order_policy,
    cp_ratio_policy,
    run_policy,
)
from .problems import (
    RankingInstance,
    expected_certificate_cost_disjunction,
    harmonic_gap_instance,
    min_knapsack_adg,
    min_knapsack_bruteforce,
    ranking_utility,
)
from .utility import (
    cdnf_utility,
    threshold_utility,
    truth_table_utility,
)
from .verify import (
    check_axioms,
    check_dual_feasibility,
    check_goal_certificate,
    make_adg_driver,
    make_greedy_driver,
    make_policy_driver,
    observed_alpha,
    ratio_vs_opt,
)

COLUMNS = (
    "instance-id",
    "kind",
    "n",
    "engine",
    "expected_cost",
    "opt",
    "ratio",
    "bound",
    "alpha",
    "pass",
)
RATIO_TOL = 1e-6


@dataclass
class ExperimentConfig:
    engine: str = "greedy"
    seed: int = 0
    max_n: int = 14
    trials: int = 2000
    fmt: str = "csv"
    out: Optional[str] = None


# ---------------------------------------------------------------------------
# report plumbing


def _fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _emit_rows(rows, fmt: str, out: Optional[str]) -> None:
    if fmt == "json":
        text = json.dumps(rows, indent=2, sort_keys=True) + "\n"
    else:
        lines = [",".join(COLUMNS)]
        for row in rows:
            lines.append(",".join(_fmt_cell(row[col]) for col in COLUMNS))
        text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# eval


def _instance_oracle(inst: Instance):
    """Object with arity/evaluate/certificate for the exhaustive optimum."""
    if inst.kind == "linear-system":
        return RankingInstance(inst.f)
    return inst.f


def _instance_utility(inst: Instance):
    if inst.kind == "threshold":
        return threshold_utility(inst.f)
    if inst.kind == "thresholds":
        return inst.f.utility()
    if inst.kind in ("cdnf", "disjunction"):
        return cdnf_utility(inst.f)
    if inst.kind == "truthtable":
        return truth_table_utility(inst.f)
    if inst.kind == "linear-system":
        return ranking_utility(inst.f)
    raise InstanceFormatError(f"no utility construction for kind {inst.kind!r}")


def _adg_claimed_bound(inst: Instance, alpha: Optional[float]) -> Optional[float]:
    if inst.kind == "threshold":
        return 3.0
    if inst.kind == "thresholds":
        return float(inst.f.d_max)
    return alpha


def _sampled_cost(policy, inst: Instance, trials: int, seed: int) -> float:
    total = 0.0
    for k in range(trials):
        x = sample_input(inst.dist, seed + k)
        total += run_policy(policy, x, inst.n, inst.costs).total_cost
    return total / trials


def _eval_knapsack(inst: Instance) -> dict:
    _, cost = min_knapsack_adg(inst.f)
    _, opt = min_knapsack_bruteforce(inst.f)
    ratio = 1.0 if opt == 0 and cost <= RATIO_TOL else (cost / opt if opt else math.inf)
    return {
        "instance-id": inst.id,
        "kind": inst.kind,
        "n": inst.n,
        "engine": "adg",
        "expected_cost": cost,
        "opt": opt,
        "ratio": ratio,
        "bound": 2.0,
        "alpha": None,
        "pass": cost <= 2.0 * opt + RATIO_TOL,
    }


def eval_instance(inst: Instance, cfg: ExperimentConfig) -> dict:
    if inst.kind == "knapsack":
        return _eval_knapsack(inst)

    try:
        g = _instance_utility(inst)
    except ConstantFunctionError:
        g = None

    alpha = None
    if g is None:
        cost = 0.0
        bound = 0.0
    elif cfg.engine == "greedy":
        policy = GreedyPolicy(g, inst.dist, inst.costs)
        bound = bounds(g).lnq_bound
    elif cfg.engine == "adg":
        policy = DualGreedyPolicy(g, inst.dist, inst.costs)
        if inst.n <= min(cfg.max_n, 12):
            alpha = observed_alpha(g, inst.dist, inst.costs)
        bound = _adg_claimed_bound(inst, alpha)
    elif cfg.engine == "baseline":
        policy = cost_order_policy(inst.costs, _instance_oracle(inst))
        bound = float(inst.n)
    else:
        raise InstanceFormatError(f"unknown engine {cfg.engine!r}")

    if g is not None:
        if inst.n <= cfg.max_n:
            cost = expected_cost(policy, inst.dist, inst.costs)
        else:
            cost = _sampled_cost(policy, inst, max(1, cfg.trials), cfg.seed)

    opt = None
    if inst.n <= cfg.max_n:
        opt, _ = optimal_expected_cost(_instance_oracle(inst), inst.dist, inst.costs, limit=cfg.max_n)

    ratio = None
    passed = None
    if opt is not None:
        ratio = 1.0 if opt == 0 and cost <= RATIO_TOL else (cost / opt if opt else math.inf)
        if bound is not None:
            passed = cost <= bound * opt + RATIO_TOL
    return {
        "instance-id": inst.id,
        "kind": inst.kind,
        "n": inst.n,
        "engine": cfg.engine if g is not None else "constant",
        "expected_cost": cost,
        "opt": opt,
        "ratio": ratio,
        "bound": bound,
        "alpha": alpha,
        "pass": passed,
    }


def cmd_eval(args) -> int:
    cfg = ExperimentConfig(
        engine=args.engine, seed=args.seed, max_n=args.max_n, trials=args.trials,
        fmt=args.format, out=args.out,
    )
    rows = []
    for path in args.instances:
        try:
            inst = inst_mod.load(path)
        except (InstanceFormatError, OSError) as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            return 2
        try:
            rows.append(eval_instance(inst, cfg))
        except LimitError as exc:
            print(f"error: {path}: {exc}", file=sys.stderr)
            return 2
    rows.sort(key=lambda r: r["instance-id"])
    _emit_rows(rows, cfg.fmt, cfg.out)
    return 0 if all(r["pass"] is not False for r in rows) else 1


# ---------------------------------------------------------------------------
# gen


def cmd_gen(args) -> int:
    try:
        inst = inst_mod.generate_instance(args.kind, args.n, args.seed, m=args.m)
    except (InstanceFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = inst_mod.dumps(inst)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# verify


def _verify_lines(cfg: ExperimentConfig):
    seed = cfg.seed
    n_small = min(cfg.max_n, 6)
    lines = []

    def record(name: str, ok: bool, detail: str = ""):
        lines.append((ok, f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else "")))

    # Utility axioms, exhaustive at small arity and randomized larger.
    axiom_cases = []
    for case in inst_mod.threshold_battery(3, seed, n_lo=3, n_hi=4):
        axiom_cases.append(("threshold", threshold_utility(case.f)))
    for case in inst_mod.cdnf_battery(3, seed + 1, n_lo=3, n_hi=4):
        axiom_cases.append(("cdnf", cdnf_utility(case.f)))
    for case in inst_mod.truth_table_battery(2, seed + 2, n_lo=3, n_hi=4):
        axiom_cases.append(("truthtable", truth_table_utility(case.f)))
    for name, g in axiom_cases:
        rep = check_axioms(g, "exhaustive")
        record(f"axioms exhaustive {name} (n={g.arity})", rep.ok, rep.message)
    for case in inst_mod.threshold_battery(2, seed + 3, n_lo=8, n_hi=8):
        g = threshold_utility(case.f)
        rep = check_axioms(g, "random", trials=cfg.trials, seed=seed)
        record(f"axioms random threshold (n={g.arity}, {rep.checked} checks)", rep.ok, rep.message)

    # Goal-certificate equivalence.
    for case in inst_mod.threshold_battery(3, seed + 4, n_lo=3, n_hi=n_small):
        rep = check_goal_certificate(threshold_utility(case.f), case.f)
        record(f"goal-certificate {case.id}", rep.ok, rep.message)
    for case in inst_mod.cdnf_battery(3, seed + 5, n_lo=3, n_hi=n_small):
        rep = check_goal_certificate(cdnf_utility(case.f), case.f)
        record(f"goal-certificate {case.id}", rep.ok, rep.message)

    # Dual feasibility and the objective identity.
    for case in inst_mod.threshold_battery(3, seed + 6, n_lo=3, n_hi=n_small):
        cert = check_dual_feasibility(threshold_utility(case.f), case.dist, case.costs)
        record(
            f"dual-feasibility {case.id} ({cert.runs} runs)",
            cert.ok and cert.objective_gap <= 1e-6,
            f"objective gap {cert.objective_gap:.2e}"
            + ("" if cert.ok else f"; {len(cert.violations)} violations"),
        )

    # Cost ratios against the exhaustive optimum.
    n_hi = min(cfg.max_n, 8)
    rep = ratio_vs_opt(
        make_adg_driver(threshold_utility, lambda case, g: 3.0),
        inst_mod.threshold_battery(10, seed + 7, n_lo=3, n_hi=n_hi),
    )
    record(f"threshold adg ratio <= 3 (worst {rep.worst_ratio:.3f})", rep.ok)
    rep = ratio_vs_opt(
        make_greedy_driver(cdnf_utility, "goal"),
        inst_mod.cdnf_battery(10, seed + 8, n_lo=3, n_hi=n_hi),
    )
    record(f"cdnf greedy ratio <= ln(kd)+1 (worst {rep.worst_ratio:.3f})", rep.ok)
    rep = ratio_vs_opt(
        make_greedy_driver(cdnf_utility, "single"),
        inst_mod.cdnf_battery(10, seed + 8, n_lo=3, n_hi=n_hi),
    )
    record(f"cdnf greedy ratio <= 2(ln P + 1) (worst {rep.worst_ratio:.3f})", rep.ok)
    rep = ratio_vs_opt(
        make_policy_driver(
            lambda case: cp_ratio_policy(case.dist, case.costs, "or"),
            lambda case: 1.0,
        ),
        inst_mod.disjunction_battery(12, seed + 9, n_lo=2, n_hi=n_hi),
        tol=1e-9,
    )
    record(f"disjunction cost/prob ordering exact (worst {rep.worst_ratio:.9f})", rep.ok)
    rep = ratio_vs_opt(
        make_policy_driver(
            lambda case: cost_order_policy(case.costs, case.f),
            lambda case: float(case.f.arity),
        ),
        inst_mod.cdnf_battery(8, seed + 10, n_lo=3, n_hi=n_hi),
    )
    record(f"increasing-cost baseline ratio <= n (worst {rep.worst_ratio:.3f})", rep.ok)
    rep = ratio_vs_opt(
        make_greedy_driver(lambda fs: fs.utility(), "goal"),
        inst_mod.threshold_set_battery(6, seed + 11, m_hi=3, n_lo=3, n_hi=n_hi),
    )
    record(f"simultaneous greedy ratio <= ln(sum goals)+1 (worst {rep.worst_ratio:.3f})", rep.ok)
    rep = ratio_vs_opt(
        make_adg_driver(lambda fs: fs.utility(), lambda case, g: float(case.f.d_max)),
        inst_mod.threshold_set_battery(6, seed + 11, m_hi=3, n_lo=3, n_hi=n_hi),
    )
    record(f"simultaneous adg ratio <= max coefficient mass (worst {rep.worst_ratio:.3f})", rep.ok)
    return lines


def cmd_verify(args) -> int:
    cfg = ExperimentConfig(
        seed=args.seed, max_n=args.max_n, trials=args.trials, fmt=args.format, out=args.out
    )
    lines = _verify_lines(cfg)
    text = "\n".join(line for _, line in lines) + "\n"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    ok = all(flag for flag, _ in lines)
    if not ok:
        print("verification failed", file=sys.stderr)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# gap-demo


def cmd_gap_demo(args) -> int:
    try:
        ns = [int(s) for s in args.ns.split(",") if s]
    except ValueError:
        print(f"error: bad --ns value {args.ns!r}", file=sys.stderr)
        return 2
    rows = []
    for n in ns:
        _, d, c = harmonic_gap_instance(n)
        opt = expected_cost(cp_ratio_policy(d, c, "or"), d, c)
        cert = expected_certificate_cost_disjunction(d, c)
        harmonic = float(sum(Fraction(1, t) for t in range(1, n + 1)))
        rows.append(
            {
                "n": n,
                "opt": opt,
                "harmonic": harmonic,
                "certificate_cost": cert,
                "gap": opt / cert if cert else math.inf,
            }
        )
    if args.format == "json":
        text = json.dumps(rows, indent=2, sort_keys=True) + "\n"
    else:
        cols = ("n", "opt", "harmonic", "certificate_cost", "gap")
        lines = [",".join(cols)]
        for row in rows:
            lines.append(",".join(_fmt_cell(row[c]) for c in cols))
        text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sbfe",
        description="Sequential Boolean function evaluation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate an instance file")
    gen.add_argument("--kind", required=True, choices=inst_mod.KINDS)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--m", type=int, default=2, help="formula count for set kinds")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", default=None)
    gen.set_defaults(func=cmd_gen)

    ev = sub.add_parser("eval", help="evaluate instances and report cost ratios")
    ev.add_argument("instances", nargs="+", help="instance files (sbfe-1 JSON)")
    ev.add_argument("--engine", default="greedy", choices=("greedy", "adg", "baseline"))
    ev.add_argument("--seed", type=int, default=0)
    ev.add_argument("--max-n", type=int, default=14, dest="max_n")
    ev.add_argument("--trials", type=int, default=200)
    ev.add_argument("--format", default="csv", choices=("csv", "json"))
    ev.add_argument("--out", default=None)
    ev.set_defaults(func=cmd_eval)

    ver = sub.add_parser("verify", help="run the verification suites")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--max-n", type=int, default=8, dest="max_n")
    ver.add_argument("--trials", type=int, default=2000)
    ver.add_argument("--format", default="csv", choices=("csv", "json"))
    ver.add_argument("--out", default=None)
    ver.set_defaults(func=cmd_verify)

    gap = sub.add_parser("gap-demo", help="harmonic gap between strategy and certificate cost")
    gap.add_argument("--ns", default="4,8,16", help="comma-separated sizes")
    gap.add_argument("--seed", type=int, default=0)
    gap.add_argument("--format", default="csv", choices=("csv", "json"))
    gap.add_argument("--out", default=None)
    gap.set_defaults(func=cmd_gap_demo)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
