"""Acceptance criteria, one test each.  Every test prints a PASS/FAIL line
(collected again in the terminal summary) and then asserts it."""

import json
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import record
from facloc import equal_cost as ec
from facloc import pick_the_loser as ptl
from facloc import verify as V
from facloc.cli import main
from facloc.cost import Exponential, Linear, PiecewiseLinear, Radius
from facloc.covering import fit_bounded, min_cover
from facloc.distribution import (build_system, distribution, equal_cost_value, expected_cost_at, solve_symmetric,
                                 two_piece_closed_form)
from facloc.instance import Instance


class Clock:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.seconds = time.perf_counter() - self.start


def finish(number, name, ok, seconds, limit, detail=""):
    fast = limit is None or seconds < limit
    budget = f"{seconds:.1f}s" + ("" if limit is None else f" / {limit}s")
    record(number, name, ok and fast, f"{detail} [{budget}]")
    assert ok, detail
    assert fast, f"took {seconds:.1f}s, limit {limit}s"


def test_01_linear_closed_form(capsys):
    beta = 1.7
    errs = []
    with Clock() as t:
        for ell in (1, 2.5, 7):
            main(["dist", "solve", "--length", str(ell), "--cost", json.dumps({"kind": "linear", "slope": beta})])
            d = json.loads(capsys.readouterr().out)
            errs.append(max(abs(d["probs"][0] - 0.5), abs(d["probs"][1] - 0.5),
                            abs(d["support"][0]), abs(d["support"][1] - ell), abs(d["equal_cost"] - beta * ell / 2)))
    with capsys.disabled():
        finish(1, "linear two-point form", max(errs) <= 1e-12, t.seconds, 1, f"max err {max(errs):.1e}")


def test_02_exponential_closed_form(capsys):
    rng = np.random.default_rng(2)
    worst = 0.0
    with Clock() as t:
        for _ in range(20):
            ell, lam = rng.uniform(0.1, 50), rng.uniform(0.01, 3)
            c = Exponential(lam)
            xs = rng.uniform(0, ell, 100)
            vals = expected_cost_at(distribution(c, ell), c, xs)
            worst = max(worst, np.abs(vals - ell * lam / (ell * lam + 2)).max())
    with capsys.disabled():
        finish(2, "exponential mixture", worst < 1e-9, t.seconds, 5, f"max dev {worst:.1e}")


def test_03_solver_vs_closed_form(capsys):
    rng = np.random.default_rng(3)
    eq = shape = recon = 0.0
    with Clock() as t:
        for ratio in (1.5, 2, 5):
            c = PiecewiseLinear((ratio, 1.0), 1.0)
            for ell in (3, 7, 10, 20, 20.5):
                d = distribution(c, ell)
                eq = max(eq, V.check_equal_cost(c, ell, 100, rng))
                p = d.probs
                shape = max(shape, np.abs(p - p[::-1]).max(), -p.min(), abs(p.sum() - 1))
                support, closed = two_piece_closed_form(ratio, 1.0, ell)
                recon = max(recon, np.abs(closed - p).max(), np.abs(support - d.support).max())
    ok = eq < 1e-9 and shape <= 1e-12 and recon <= 1e-12
    with capsys.disabled():
        finish(3, "solver vs two-piece closed form", ok, t.seconds, 10,
               f"eq dev {eq:.1e}, shape {shape:.1e}, closed-form gap {recon:.1e}")


def test_04_solver_contract(capsys):
    rng = np.random.default_rng(4)
    worst = 0.0
    with Clock() as t:
        for _ in range(500):
            slopes = np.sort(rng.uniform(0.01, 10, int(rng.integers(1, 13))))[::-1]
            ell = float(rng.uniform(0.05, 25))
            p = solve_symmetric(build_system(ell, slopes))
            worst = max(worst, -p.min(), abs(p.sum() - 1), np.abs(p - p[::-1]).max())
    with capsys.disabled():
        finish(4, "solve_symmetric contract", worst <= 1e-12, t.seconds, 30, f"worst {worst:.1e}")


def test_05_monotone_continuous(capsys):
    rng = np.random.default_rng(5)
    drop = jump = 0.0
    with Clock() as t:
        for _ in range(50):
            c = V.random_cost(rng)
            w = c.width if isinstance(c, PiecewiseLinear) else 1.0
            ells = np.sort(rng.uniform(0, 25, 200))
            C = np.array([equal_cost_value(c, l) for l in ells])
            drop = max(drop, -np.diff(C).min())
            for m in range(1, int(25 / w) + 1):
                at = m * w
                mid = equal_cost_value(c, at)
                for side in (np.nextafter(at, 0), at * (1 - 1e-10), at * (1 + 1e-10), np.nextafter(at, np.inf)):
                    jump = max(jump, abs(equal_cost_value(c, side) - mid))
    with capsys.disabled():
        finish(5, "C(l) monotone and continuous", drop <= 1e-12 and jump < 1e-6, t.seconds, 30,
               f"max drop {drop:.1e}, max jump {jump:.1e}")


def test_06_ec_ratios(capsys):
    gens = V.trial_generators(6, 500)
    worst = {"max": -np.inf, "agent": -np.inf, "social": -np.inf}
    with Clock() as t:
        for rng in gens:
            inst = V.random_instance(rng, n_max=10, k_max=5)
            out = ec.run(inst)
            half = inst.cost(out.length / 2)
            worst["max"] = max(worst["max"], ec.expected_max_cost(out, inst.x) - 2 * half)
            worst["agent"] = max(worst["agent"], (ec.agent_expected_costs(out, inst.x) - half).max())
            worst["social"] = max(worst["social"],
                                  ec.expected_social_cost(out, inst.x) - inst.n * V.opt_social_cost(inst))
    ok = all(v <= 1e-9 for v in worst.values())
    with capsys.disabled():
        finish(6, "EC ratio bounds", ok, t.seconds, 120,
               ", ".join(f"{k} excess over bound {v:.1e}" for k, v in worst.items()))


def test_07_ec_strategyproof(capsys):
    gain = -np.inf
    coalition = -np.inf
    with Clock() as t:
        for rng in V.trial_generators(7, 200):
            inst = V.random_instance(rng, n_max=8, k_max=4)
            gain = max(gain, V.deviation_search("ec", inst, 200).gain)
        for rng in V.trial_generators(77, 10):
            inst = Instance(tuple(rng.uniform(0, 100, 4)), 2, V.random_cost(rng))
            coalition = max(coalition, V.coalition_search("ec", inst, 2, 50, criterion="weak").score)
        control = V.deviation_search("mean", Instance((0, 3, 10, 40), 2, Linear(1.0)), 200).gain
    ok = gain <= 1e-9 and coalition <= 1e-9 and control > 0
    with capsys.disabled():
        finish(7, "EC strategyproofness", ok, t.seconds, 300,
               f"max gain {gain:.1e}, pair all-gain score {coalition:.1e}, mean control gain {control:.3g}")


def test_08_ptl_exactness(capsys):
    draws = 10**6
    norm = 0.0
    outside = 0
    checked = 0
    with Clock() as t:
        for rng in V.trial_generators(8, 1000):
            inst = V.random_ptl_instance(rng, n_max=10)
            norm = max(norm, abs(ptl.loser_probabilities(inst).q.sum() - 1))
        mc = np.random.default_rng(88)
        for _ in range(20):
            inst = V.random_ptl_instance(mc, n_min=3, n_max=10)
            q = ptl.loser_probabilities(inst).q
            freq = np.bincount(ptl.sample_losers(inst, mc, draws), minlength=inst.n) / draws
            sigma = np.sqrt(q * (1 - q) / draws)
            mask = q > 0
            outside += int((np.abs(freq - q)[mask] > 3 * sigma[mask]).sum())
            checked += int(mask.sum())
        hand = ptl.loser_probabilities(Instance((0, 1, 3, 5, 7), 4, Linear(1.0))).q
        hand_err = np.abs(hand[[1, 3]] - [0.75, 0.25]).max()
    ok = norm <= 1e-12 and outside == 0 and hand_err <= 1e-12
    with capsys.disabled():
        finish(8, "PTL loser probabilities", ok, t.seconds, 120,
               f"norm err {norm:.1e}, MC outside 3 sigma {outside}/{checked}, hand err {hand_err:.1e}")


def test_09_ptl_bounds(capsys):
    sc = mc = -np.inf
    gain = coalition = -np.inf
    with Clock() as t:
        for rng in V.trial_generators(9, 500):
            inst = V.random_ptl_instance(rng, n_max=10)
            rep = ptl.loser_probabilities(inst)
            sc = max(sc, ptl.expected_social_cost(inst) - 2 * rep.kappa.min())
            mc = max(mc, ptl.expected_max_cost(inst) - 4 * V.opt_max_cost(inst))
        for rng in V.trial_generators(99, 200):
            gain = max(gain, V.deviation_search("ptl", V.random_ptl_instance(rng, n_max=6), 200).gain)
        for rng in V.trial_generators(999, 10):
            inst = Instance(tuple(rng.uniform(0, 100, 4)), 3, V.random_cost(rng))
            coalition = max(coalition, V.coalition_search("ptl", inst, 2, 50, criterion="strong").score)
    ok = sc <= 1e-9 and mc <= 1e-9 and gain <= 1e-9 and coalition <= 1e-9
    with capsys.disabled():
        finish(9, "PTL bounds and strategyproofness", ok, t.seconds, 300,
               f"SC excess {sc:.1e}, MC excess {mc:.1e}, max gain {gain:.1e}, strong-GSP score {coalition:.1e}")


def test_10_oracles(capsys):
    dp_gap = mc_gap = 0.0
    len_mismatch = 0
    with Clock() as t:
        for rng in V.trial_generators(10, 100):
            inst = V.random_instance(rng, n_max=5, k_max=4)
            dp_gap = max(dp_gap, abs(V.opt_social_cost(inst) - V.brute_force_social_cost(inst, 10_000)))
            ell = V.brute_force_cover_length(inst.locations, inst.k)
            len_mismatch += ell != min_cover(inst.locations, inst.k).length
            mc_gap = max(mc_gap, abs(V.opt_max_cost(inst) - inst.cost(ell / 2)))
    ok = dp_gap <= 1e-6 and len_mismatch == 0 and mc_gap == 0.0
    with capsys.disabled():
        finish(10, "optimum oracles", ok, t.seconds, 60,
               f"DP vs grid {dp_gap:.1e}, length mismatches {len_mismatch}, MC gap {mc_gap:.1e}")


def test_11_bounded_domain(capsys):
    bad = 0
    with Clock() as t:
        for rng in V.trial_generators(11, 1000):
            L = float(rng.uniform(1, 200))
            xs = rng.uniform(0, L, int(rng.integers(1, 12)))
            cov = min_cover(xs, int(rng.integers(1, 6)))
            fit = fit_bounded(cov, L, xs)
            s, ell = fit.starts, fit.length
            contained = all(a >= 0 and L - a >= ell for a in s)
            disjoint = all(b - a >= ell for a, b in zip(s, s[1:]))
            covered = all(fit.covers(x) for x in xs)
            bad += not (contained and disjoint and covered)
        radius = (ec.radius_variant(Instance((0, 1), 1, Radius(1.0))) == (0.5,),
                  ec.radius_variant(Instance((0, 10), 1, Radius(1.0))) is None,
                  ec.radius_variant(Instance((0,), 1, Radius(2.5))) == (0.0,))
    ok = bad == 0 and all(radius)
    with capsys.disabled():
        finish(11, "bounded domain and radius rule", ok, t.seconds, 10,
               f"bounded-fit failures {bad}/1000, radius examples {sum(radius)}/3")


def _cli(args, env):
    return subprocess.run([sys.executable, "-m", "facloc", *args], capture_output=True, env=env)


def test_12_reproducible_cli(tmp_path, capsys):
    ecf = tmp_path / "ec.json"
    ecf.write_text(json.dumps({"k": 2, "locations": [0, 1.5, 5, 6, 13],
                               "cost": {"kind": "exponential", "lambda": 0.3}}))
    ptlf = tmp_path / "ptl.json"
    ptlf.write_text(json.dumps({"k": 4, "locations": [0, 1, 3, 5, 7], "cost": {"kind": "linear", "slope": 1}}))
    commands = [
        ["ec", "run", "-i", str(ecf), "--seed", "11"],
        ["ec", "expected", "-i", str(ecf)],
        ["ptl", "probs", "-i", str(ptlf)],
        ["ptl", "sample", "-i", str(ptlf), "--seed", "11"],
        ["dist", "solve", "--length", "7.5", "--cost", '{"kind":"piecewise_linear","slopes":[3,2,1]}'],
        ["verify", "equal-cost", "--mech", "ec", "--trials", "10", "--seed", "12"],
        ["verify", "sp", "--mech", "ec", "--trials", "3", "--seed", "12", "--resolution", "40"],
        ["verify", "sp", "--mech", "ptl", "--trials", "3", "--seed", "12", "--resolution", "40"],
        ["verify", "gsp", "--mech", "ptl", "--trials", "1", "--seed", "12", "--resolution", "10"],
        ["verify", "ratio", "--mech", "ec", "--trials", "10", "--seed", "12"],
        ["oracle", "opt-sc", "-i", str(ecf)],
        ["oracle", "opt-mc", "-i", str(ecf)],
    ]
    env = dict(os.environ)
    differ = []
    failed = []
    with Clock() as t:
        for cmd in commands:
            a, b = _cli(cmd, env), _cli(cmd, env)
            if a.returncode != 0:
                failed.append(" ".join(cmd[:2]))
            if a.stdout != b.stdout or a.returncode != b.returncode or not a.stdout:
                differ.append(" ".join(cmd[:2]))
    ok = not differ and not failed
    with capsys.disabled():
        finish(12, "byte-identical CLI reruns", ok, t.seconds, None,
               f"{len(commands)} commands, differing {differ}, nonzero exits {failed}")
