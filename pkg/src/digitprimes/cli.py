"""digitprimes command-line front end.

Subcommands: count, arcs, characters, assumptions, plan, sieve.  Scalar
reports are a single JSON object; ensemble reports are JSON lines.  Every
report embeds its fully resolved configuration and is byte-identical across
reruns with the same seed.  Exit codes: 0 ok, 2 parameter/usage, 3 resource
budget, 4 internal consistency.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from digitprimes import arcs as arcs_mod
from digitprimes import charsums, digits, empirics, kernels, sieve
from digitprimes.errors import (
    ConsistencyError,
    DigitprimesError,
    ParameterError,
    ResourceError,
    TermOverflowError,
)

ALPHA_MODULI = (3, 5, 7, 9, 27, 25)
ALPHA_Q0_MAX = 30
ALPHA_INTERVALS = 8


def load_thresholds(path: str | None = None) -> dict:
    """Calibrated pass/fail constants: explicit path, ./thresholds.json, or
    the copy shipped inside the package."""
    if path:
        return json.loads(Path(path).read_text())
    local = Path("thresholds.json")
    if local.exists():
        return json.loads(local.read_text())
    return json.loads(resources.files("digitprimes").joinpath("thresholds.json").read_text())


def parse_digits(text: str | None, n: int) -> digits.DigitConstraint:
    pairs = []
    if text:
        for item in text.split(","):
            j, _, b = item.partition(":")
            try:
                pairs.append((int(j), int(b)))
            except ValueError:
                raise ParameterError(f"bad digit spec {item!r}; expected j:b") from None
    return digits.make_constraint(n, pairs)


def default_arc_cutoff(n: int) -> int:
    """Largest power-of-two B with 2B^2 <= N, capped at 2^8."""
    return 1 << min(8, (n - 1) // 2)


def _resolved(args, **extra) -> dict:
    config = {
        "command": args.command,
        "seed": getattr(args, "seed", 0),
        "format": args.format,
        "threads": getattr(args, "threads", 1),
    }
    config.update(extra)
    return config


def cmd_count(args) -> dict:
    constraint = parse_digits(args.digits, args.n)
    table = sieve.build_prime_table(args.n, cache_dir=args.cache_dir, threads=args.threads)
    count = sieve.count_exact(constraint, table)
    pi_n = table.popcount()
    N = 1 << args.n
    scale = 2.0 ** -constraint.r
    model_pi = scale * pi_n
    model_nlogn = scale * N / math.log(N)
    return {
        "config": _resolved(args, n=args.n, digits=constraint.describe()),
        "n": args.n,
        "r": constraint.r,
        "exact_count": count,
        "pi_N": pi_n,
        "model_pi": model_pi,
        "model_nlogn": model_nlogn,
        "ratio_pi": count / model_pi,
        "ratio_nlogn": count / model_nlogn,
    }


def cmd_arcs(args) -> dict:
    if args.n > 22:
        raise ResourceError("grid memory cap: n must be at most 22 for arcs")
    constraint = parse_digits(args.digits, args.n)
    B = args.B or default_arc_cutoff(args.n)
    M = args.M or (1 << (args.n + 1))
    table = sieve.build_mangoldt_table(args.n, cache_dir=args.cache_dir, threads=args.threads)
    windows = digits.build_windows(args.n)
    fvals = digits.f_values(constraint, windows)
    s_grid = arcs_mod.grid_transform(table.values, M)
    sf_grid = arcs_mod.grid_transform(fvals, M)
    dec = arcs_mod.decompose_arcs(B, M, args.n)
    mean = digits.mean_f(constraint, windows)
    major = arcs_mod.major_arc_integral(dec, s_grid, sf_grid, mean)
    minor = arcs_mod.minor_arc_sup(dec, s_grid)
    total = arcs_mod.parseval_integral(s_grid, sf_grid, M)
    direct = float(np.dot(table.values, fvals))
    plan = arcs_mod.plan_parameters(args.n, constraint.r, args.gamma)
    return {
        "config": _resolved(args, n=args.n, digits=constraint.describe(), B=B, M=M,
                            gamma=args.gamma),
        "n": args.n,
        "r": constraint.r,
        "B": B,
        "M": M,
        "integral": total,
        "direct_correlation": direct,
        "parseval_rel_dev": abs(total - direct) / max(1.0, abs(direct)),
        "main_term": major.main_term,
        "major_value": major.value,
        "residual": major.residual,
        "minor_contrib": major.minor_value,
        "minor_sup": minor.sup,
        "minor_sup_ratio": minor.ratio,
        "sf_l1": arcs_mod.sf_l1(sf_grid, M),
        "mean_f": mean,
        "plan": {"B": plan.B, "T": plan.T, "flags": plan.flags},
    }


def cmd_characters(args) -> list[dict]:
    if args.q is None or args.q < 1:
        raise ParameterError("characters needs --q >= 1")
    table = None
    if args.n:
        if args.q > 100 or args.n > 22:
            raise ResourceError("psi streaming limited to q <= 100, n <= 22")
        table = sieve.build_mangoldt_table(args.n, cache_dir=args.cache_dir,
                                           threads=args.threads)
    rows = []
    worst_tau = 0.0
    worst_expansion = 0.0
    vanishing_flagged = 0
    for chi in charsums.characters_mod(args.q):
        q1, _ = charsums.conductor(chi)
        tau = charsums.gauss_sum(chi)
        rep = charsums.verify_tau_induced(chi)
        worst_tau = max(worst_tau, rep.delta)
        ok, delta, _ = charsums.additive_expansion_max_delta(chi)
        if ok:
            worst_expansion = max(worst_expansion, delta)
        if q1 < chi.q and abs(rep.left) <= 1e-9:
            vanishing_flagged += 1
        rows.append({
            "q": chi.q,
            "index": chi.index,
            "conductor": q1,
            "is_principal": chi.is_principal,
            "gauss_sum": [tau.real, tau.imag],
            "psi_max": charsums.psi_chi_max(chi, table) if table else None,
        })
    rows.append({
        "summary": True,
        "q": args.q,
        "config": _resolved(args, q=args.q, n=args.n),
        "tau_induced_max_delta": worst_tau,
        "additive_expansion_max_delta": worst_expansion,
        "vanishing_tau_count": vanishing_flagged,
        "ramanujan_consistent": bool(charsums.ramanujan_row(args.q) is not None),
    })
    return rows


def cmd_assumptions(args) -> list[dict]:
    if args.n > 22:
        raise ResourceError("assumption measurements capped at n = 22")
    constraint = parse_digits(args.digits, args.n)
    B = args.B or (1 << 8)
    windows = digits.build_windows(args.n)
    fvals = digits.f_values(constraint, windows)
    thresholds = load_thresholds(args.thresholds)
    rows: list[dict] = []
    summary = kappa_summary = empirics.kappa_weighted_sum(B, constraint, windows)
    for rep in kappa_summary.reports:
        rows.append({"kind": "kappa", "q0": rep.q0, "measured": rep.measured})
    ensemble = empirics.alpha_ensemble(constraint, windows, ALPHA_MODULI,
                                       ALPHA_Q0_MAX, ALPHA_INTERVALS, fvals)
    for rep in ensemble.reports:
        rows.append({
            "kind": "alpha", "q1": rep.q1, "chi_index": rep.chi_index,
            "q0": rep.q0, "start": rep.start, "length": rep.length,
            "measured": rep.measured,
        })
    medians = ensemble.medians
    alpha_max = ensemble.max_measured
    rng = np.random.default_rng(args.seed)
    failures = []
    degenerate = 0
    for trial in range(args.trials):
        r1 = int(rng.integers(1, 4))
        D = int(rng.integers(12, 21))
        delta_j = 10 * r1 * D + int(rng.integers(1, 40))
        inst = empirics.sample_instance(rng, args.n, r1, D, delta_j, args.Q)
        rep = empirics.diophantine_count(inst)
        degenerate += rep.degenerate
        if not rep.within_bound:
            failures.append({
                "kind": "diophantine_failure", "trial": trial,
                "exponents": list(inst.exponents), "numerators": list(inst.numerators),
                "delta_j": inst.delta_j, "D": inst.D, "Q": inst.Q,
                "count": rep.count, "bound": rep.bound,
            })
    rows.extend(failures)
    success_rate = 1.0 - len(failures) / max(1, args.trials)
    kappa_worst = max((r.measured for r in summary.reports), default=0.0)
    rows.append({
        "kind": "summary",
        "config": _resolved(args, n=args.n, digits=constraint.describe(), B=B,
                            Q=args.Q, trials=args.trials),
        "kappa_weighted_sum": summary.weighted_sum,
        "kappa_individual_max": kappa_worst,
        "kappa_weighted_pass": summary.weighted_sum
        <= thresholds["kappa_weighted_max"]["value"],
        "kappa_individual_pass": kappa_worst
        <= thresholds["kappa_individual_max"]["value"],
        "alpha_medians": {str(q): m for q, m in medians.items()},
        "alpha_max": alpha_max,
        "alpha_max_pass": alpha_max <= thresholds["alpha_max"]["value"],
        "diophantine_success_rate": success_rate,
        "diophantine_pass": success_rate >= thresholds["diophantine_min_success"]["value"],
        "diophantine_degenerate": degenerate,
        "seed": args.seed,
    })
    return rows


def cmd_plan(args) -> dict:
    constraint = parse_digits(args.digits, args.n)
    r = args.r if args.r is not None else constraint.r
    plan = arcs_mod.plan_parameters(args.n, r, args.gamma)
    return {
        "config": _resolved(args, n=args.n, r=r, gamma=args.gamma),
        "n": plan.n,
        "r": plan.r,
        "gamma": plan.gamma,
        "C": plan.C,
        "B": plan.B,
        "T": plan.T,
        "flags": plan.flags,
        "all_satisfied": plan.all_satisfied,
    }


def cmd_sieve(args) -> dict:
    table = sieve.build_prime_table(args.n, cache_dir=args.cache_dir, threads=args.threads)
    out = {
        "config": _resolved(args, n=args.n, cache_dir=str(args.cache_dir or "")),
        "n": args.n,
        "pi_N": table.popcount(),
        "kernel": kernels.kernel_name(),
    }
    if args.mangoldt:
        mt = sieve.build_mangoldt_table(args.n, prime_table=table,
                                        cache_dir=args.cache_dir, threads=args.threads)
        out["psi_N"] = sieve.chebyshev_psi(1 << args.n, mt)
    return out


def _emit(payload, args) -> None:
    if args.format == "csv":
        text = _to_csv(payload)
    elif isinstance(payload, list):
        text = "\n".join(json.dumps(row) for row in payload) + "\n"
    else:
        text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _flatten(row: dict, prefix: str = "") -> dict:
    flat = {}
    for key, value in row.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(_flatten(value, name + "."))
        else:
            flat[name] = value
    return flat


def _to_csv(payload) -> str:
    rows = payload if isinstance(payload, list) else [payload]
    flats = [_flatten(r) for r in rows]
    fields: list[str] = []
    for flat in flats:
        for key in flat:
            if key not in fields:
                fields.append(key)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields)
    writer.writeheader()
    for flat in flats:
        writer.writerow(flat)
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="digitprimes")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, digits_flag=True, require_n=True):
        p.add_argument("--n", type=int, required=require_n, default=0)
        if digits_flag:
            p.add_argument("--digits", default="", help="j:b[,j:b...]")
        p.add_argument("--B", type=int, default=None)
        p.add_argument("--M", type=int, default=None)
        p.add_argument("--gamma", type=float, default=0.5)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", default=None)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--cache-dir", default=None)
        p.add_argument("--thresholds", default=None)

    common(sub.add_parser("count"))
    common(sub.add_parser("arcs"))
    p = sub.add_parser("characters")
    common(p, require_n=False)
    p.add_argument("--q", type=int, required=True)
    p = sub.add_parser("assumptions")
    common(p)
    p.add_argument("--Q", type=int, default=1 << 12)
    p.add_argument("--trials", type=int, default=1000)
    p = sub.add_parser("plan")
    common(p)
    p.add_argument("--r", type=int, default=None)
    p = sub.add_parser("sieve")
    common(p, digits_flag=False)
    p.add_argument("--mangoldt", action="store_true")
    return parser


COMMANDS = {
    "count": cmd_count,
    "arcs": cmd_arcs,
    "characters": cmd_characters,
    "assumptions": cmd_assumptions,
    "plan": cmd_plan,
    "sieve": cmd_sieve,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload = COMMANDS[args.command](args)
        _emit(payload, args)
    except (ResourceError, TermOverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ConsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (ParameterError, DigitprimesError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
