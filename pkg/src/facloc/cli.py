"""Command-line front end.

Exit codes: 0 success or pass, 1 verification failure, 2 usage or parse error.
All reports go to stdout as JSON; diagnostics go to stderr.
"""

import argparse
import json
import math
import sys
from typing import List, Optional

import numpy as np

from . import equal_cost, pick_the_loser, verify
from .cost import Radius, from_dict
from .distribution import Discrete, distribution
from .instance import Instance


class ParseError(ValueError):
    pass


def _line_of(text: str, key: str) -> int:
    needle = f'"{key}"'
    for number, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return number
    return 1


def parse_instance(text: str) -> Instance:
    """Instance from the JSON file format; errors name the field and line."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}: malformed JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ParseError("line 1: top level must be an object")

    def fail(field, msg):
        return ParseError(f"line {_line_of(text, field)}: field '{field}': {msg}")

    for field in ("k", "locations", "cost"):
        if field not in data:
            raise ParseError(f"line 1: missing field '{field}'")
    k = data["k"]
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise fail("k", "must be a positive integer")
    locs = data["locations"]
    if not isinstance(locs, list) or not locs:
        raise fail("locations", "must be a nonempty list")
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v) for v in locs):
        raise fail("locations", "all locations must be finite numbers")
    if not isinstance(data["cost"], dict):
        raise fail("cost", "must be an object")
    try:
        cost = from_dict(data["cost"])
    except (KeyError, TypeError) as exc:
        raise fail("cost", f"missing or bad parameter {exc}") from None
    except ValueError as exc:
        raise fail("cost", str(exc)) from None
    bound = None
    domain = data.get("domain", {"kind": "line"})
    if not isinstance(domain, dict) or domain.get("kind") not in ("line", "bounded"):
        raise fail("domain", "kind must be 'line' or 'bounded'")
    if domain["kind"] == "bounded":
        bound = domain.get("length")
        if isinstance(bound, bool) or not isinstance(bound, (int, float)):
            raise fail("domain", "bounded domain needs a numeric length")
    try:
        return Instance(tuple(locs), k, cost, bound)
    except ValueError as exc:
        msg = str(exc)
        field = "locations" if "location" in msg else "domain" if "domain" in msg else "cost"
        raise fail(field, msg) from None


def instance_to_dict(inst: Instance) -> dict:
    out = {"k": inst.k, "locations": list(inst.locations), "cost": inst.cost.to_dict()}
    if inst.bound is not None:
        out["domain"] = {"kind": "bounded", "length": inst.bound}
    return out


# ---------------------------------------------------------------------------
# output


def _plain(obj):
    """Recursively convert numpy values into plain Python for json."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def emit(report: dict) -> None:
    # float repr is the shortest string that round-trips the double
    sys.stdout.write(json.dumps(_plain(report), indent=2, sort_keys=True) + "\n")


def dist_to_dict(dist) -> dict:
    if isinstance(dist, Discrete):
        return {"kind": "discrete", "length": dist.length, "support": dist.support,
                "probs": dist.probs, "equal_cost": dist.equal_cost}
    return {"kind": "mixture", "length": dist.length, "lambda": dist.lam, "atom_0": dist.atom,
            "atom_length": dist.atom, "uniform_weight": 1.0 - 2 * dist.atom, "equal_cost": dist.equal_cost}


# ---------------------------------------------------------------------------
# subcommands


def _load(path: str) -> Instance:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse_instance(text)


def cmd_ec_run(args) -> int:
    inst = _load(args.input)
    if isinstance(inst.cost, Radius):
        fac = equal_cost.radius_variant(inst)
        costs = equal_cost.radius_costs(inst, inst.x)
        emit({"mechanism": "ec-radius", "seed": args.seed, "facilities": fac, "costs": costs})
        return 0
    out = equal_cost.run(inst)
    rng = np.random.default_rng(args.seed)
    X = float(equal_cost.draw_offset(out.dist, rng))
    fac = equal_cost._pad(out.place(X), inst.k)
    costs = inst.cost(np.abs(inst.x[:, None] - fac[None, :]).min(axis=1))
    emit({"mechanism": "ec", "seed": args.seed, "offset": X, "facilities": fac, "costs": costs})
    return 0


def cmd_ec_expected(args) -> int:
    inst = _load(args.input)
    if isinstance(inst.cost, Radius):
        fac = equal_cost.radius_variant(inst)
        costs = equal_cost.radius_costs(inst, inst.x)
        emit({"mechanism": "ec-radius", "facilities": fac, "agent_costs": costs,
              "max_cost": float(costs.max()), "social_cost": float(costs.sum())})
        return 0
    out = equal_cost.run(inst)
    emit({
        "mechanism": "ec",
        "covering": {"length": out.length, "starts": out.covering.starts},
        "distribution": dist_to_dict(out.dist),
        "equal_cost": out.dist.equal_cost,
        "agent_costs": equal_cost.agent_expected_costs(out, inst.x),
        "expected_max_cost": equal_cost.expected_max_cost(out, inst.x),
        "expected_social_cost": equal_cost.expected_social_cost(out, inst.x),
    })
    return 0


def cmd_ptl_probs(args) -> int:
    inst = _load(args.input)
    rep = pick_the_loser.loser_probabilities(inst)
    kappa = np.where(rep.even, rep.kappa, 0.0)
    emit({"mechanism": "ptl", "kappa": kappa, "q": rep.q, "served_all": rep.served_all,
          "expected_social_cost": pick_the_loser.expected_social_cost(inst)})
    return 0


def cmd_ptl_sample(args) -> int:
    inst = _load(args.input)
    loser, fac = pick_the_loser.sample_loser(inst, np.random.default_rng(args.seed))
    emit({"mechanism": "ptl", "seed": args.seed, "loser": loser, "facilities": fac})
    return 0


def cmd_dist_solve(args) -> int:
    try:
        descriptor = json.loads(args.cost)
    except json.JSONDecodeError as exc:
        raise ParseError(f"--cost: malformed JSON: {exc.msg}") from None
    if not isinstance(descriptor, dict):
        raise ParseError("--cost: must be a JSON object")
    try:
        c = from_dict(descriptor)
    except (KeyError, TypeError) as exc:
        raise ParseError(f"--cost: missing or bad parameter {exc}") from None
    except ValueError as exc:
        raise ParseError(f"--cost: {exc}") from None
    if not (math.isfinite(args.length) and args.length >= 0):
        raise ParseError("--length: must be a finite nonnegative number")
    try:
        dist = distribution(c, args.length)
    except ValueError as exc:
        raise ParseError(f"--cost: {exc}") from None
    emit(dist_to_dict(dist))
    return 0


def _verify_equal_cost(args, gens):
    if args.mech != "ec":
        raise ParseError("--mech: equal-cost check applies to ec only")
    worst = {"deviation": -1.0}
    for t, rng in enumerate(gens):
        c = verify.random_cost(rng)
        ell = float(rng.uniform(0.5, 25.0))
        dev = verify.check_equal_cost(c, ell, 100, rng)
        if dev > worst["deviation"]:
            worst = {"trial": t, "deviation": dev, "length": ell, "cost": c.to_dict()}
    return worst["deviation"] <= args.tol, worst


def _sp_instance(mech, rng):
    if mech == "ptl":
        return verify.random_ptl_instance(rng, n_max=6)
    return verify.random_instance(rng, n_max=8, k_max=4)


def _verify_sp(args, gens):
    worst = None
    for t, rng in enumerate(gens):
        inst = _sp_instance(args.mech, rng)
        f = verify.deviation_search(args.mech, inst, args.resolution, args.tol)
        if worst is None or f.score > worst["finding"]["score"]:
            worst = {"trial": t, "instance": instance_to_dict(inst), "finding": f.to_dict()}
    return not worst["finding"]["violation"], worst


def _verify_gsp(args, gens):
    worst = None
    for t, rng in enumerate(gens):
        x = tuple(rng.uniform(0.0, 100.0, 4))
        k = 3 if args.mech == "ptl" else 2
        inst = Instance(x, k, verify.random_cost(rng))
        f = verify.coalition_search(args.mech, inst, 2, args.resolution or 50, args.tol)
        if worst is None or f.score > worst["finding"]["score"]:
            worst = {"trial": t, "instance": instance_to_dict(inst), "finding": f.to_dict()}
    return not worst["finding"]["violation"], worst


def _verify_ratio(args, gens):
    if args.mech not in ("ec", "ptl"):
        raise ParseError("--mech: ratio check applies to ec or ptl")
    objectives = ("max", "social") if args.objective == "both" else (args.objective,)
    worst = {}
    ok = True
    for t, rng in enumerate(gens):
        inst = verify.random_ptl_instance(rng) if args.mech == "ptl" else verify.random_instance(rng)
        for obj in objectives:
            r = verify.ratio_report(args.mech, [inst], obj, args.tol)[0]
            ok &= r.ok
            if obj not in worst or r.ratio > worst[obj]["ratio"]:
                worst[obj] = {"trial": t, **r.to_dict()}
    return ok, worst


CHECKS = {"equal-cost": _verify_equal_cost, "sp": _verify_sp, "gsp": _verify_gsp, "ratio": _verify_ratio}


def cmd_verify(args) -> int:
    if args.resolution is None:
        args.resolution = 50 if args.check == "gsp" else 200
    if args.trials < 1:
        raise ParseError("--trials: must be positive")
    gens = verify.trial_generators(args.seed, args.trials)
    passed, worst = CHECKS[args.check](args, gens)
    emit({"check": args.check, "mechanism": args.mech, "trials": args.trials, "seed": args.seed,
          "tol": args.tol, "pass": bool(passed), "worst": worst})
    return 0 if passed else 1


def cmd_oracle(args) -> int:
    inst = _load(args.input)
    if args.which == "opt-sc":
        value = verify.opt_social_cost(inst)
    else:
        value = verify.opt_max_cost(inst)
    emit({"oracle": args.which, "value": value})
    return 0


# ---------------------------------------------------------------------------


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be in [0, 2^64)")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="facloc", description="Strategyproof k-facility location on the line.")
    sub = p.add_subparsers(dest="group", required=True)

    ec = sub.add_parser("ec", help="Equal Cost mechanism").add_subparsers(dest="action", required=True)
    r = ec.add_parser("run", help="sample one outcome")
    r.add_argument("-i", "--input", required=True)
    r.add_argument("--seed", type=_seed, default=0)
    r.set_defaults(func=cmd_ec_run)
    e = ec.add_parser("expected", help="exact expected costs")
    e.add_argument("-i", "--input", required=True)
    e.set_defaults(func=cmd_ec_expected)

    ptl = sub.add_parser("ptl", help="Pick the Loser mechanism").add_subparsers(dest="action", required=True)
    pp = ptl.add_parser("probs", help="exact loser probabilities")
    pp.add_argument("-i", "--input", required=True)
    pp.set_defaults(func=cmd_ptl_probs)
    ps = ptl.add_parser("sample", help="draw the loser")
    ps.add_argument("-i", "--input", required=True)
    ps.add_argument("--seed", type=_seed, default=0)
    ps.set_defaults(func=cmd_ptl_sample)

    dist = sub.add_parser("dist", help="equalizing distribution").add_subparsers(dest="action", required=True)
    ds = dist.add_parser("solve")
    ds.add_argument("--length", type=float, required=True)
    ds.add_argument("--cost", required=True, help="cost descriptor as JSON")
    ds.set_defaults(func=cmd_dist_solve)

    v = sub.add_parser("verify", help="property suites over random instances")
    v.add_argument("check", choices=sorted(CHECKS))
    v.add_argument("--mech", choices=["ec", "ptl", "mean"], default="ec")
    v.add_argument("--trials", type=int, default=20)
    v.add_argument("--seed", type=_seed, default=0)
    v.add_argument("--tol", type=float, default=verify.DEFAULT_TOL)
    v.add_argument("--resolution", type=int, default=None, help="grid points per misreport axis")
    v.add_argument("--objective", choices=["max", "social", "both"], default="both")
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", help="optimal objective values")
    o.add_argument("which", choices=["opt-sc", "opt-mc"])
    o.add_argument("-i", "--input", required=True)
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
