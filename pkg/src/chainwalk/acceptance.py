"""Release checks shared by the test suite and ``chainwalk --selftest``.

Each check returns a :class:`CheckResult`; nothing here raises on a failed
check, so a run always reports every line.
"""

from __future__ import annotations

import io
import itertools
import math
import os
import tempfile
import time
from contextlib import redirect_stdout
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import stats

from . import amplify, chain, planner
from .combinat import DomainSpec, all_vertices, apply_coin, reverse_coin
from .errors import InfeasibleError
from .radixstore import (
    RadixTree,
    build_pair,
    count_in_interval_not_tree,
    find_nth_not_in_tree,
    find_nth_not_in_two_trees,
    preimage_tree,
    swup_classical,
    to_bits,
)
from .rng import make_rng, trial_rng
from .walksim import (
    WalkConfig,
    fidelity_decay,
    mnrs_run,
    noise_bound,
    spectrum,
    uniform_edge_state,
)


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        info = ", ".join(f"{k}={v}" for k, v in self.detail.items())
        return f"[{tag}] {self.number}. {self.name}: {info}"


# -- 1 -----------------------------------------------------------------------


def check_spectra() -> CheckResult:
    t0 = time.perf_counter()
    ok = True
    detail = {}
    for N, R in ((6, 2), (8, 3), (10, 3)):
        cfg = WalkConfig.build(DomainSpec(N), R, lambda S: False)
        rep = spectrum(cfg)
        good = (
            rep.zero_phase_count == 1
            and rep.fixed_vector_overlap >= 1 - 1e-9
            and rep.min_nonzero_phase >= 2 * math.sqrt(rep.gap)
            and max(abs(p) for p in rep.eigenphases) <= math.pi
        )
        ok &= good
        detail[f"J({N},{R})"] = (
            f"zero={rep.zero_phase_count} overlap={rep.fixed_vector_overlap:.12f} "
            f"min={rep.min_nonzero_phase:.6f} ratio={rep.ratio_to_prediction:.9f}"
        )
    elapsed = time.perf_counter() - t0
    detail["seconds"] = round(elapsed, 2)
    return CheckResult(1, "walk spectra", ok and elapsed < 60, detail)


# -- 2 -----------------------------------------------------------------------


def check_amplification(trials: int = 200) -> CheckResult:
    grid = np.linspace(0.001, 0.5, 50)
    bound_ok = True
    for eps in grid:
        pu, pb = amplify.success_probabilities(float(eps))
        lb = amplify.lower_bound(float(eps))
        bound_ok &= pu >= lb and pb >= lb
    f = chain.random_function(4, 5, 0)
    C = chain.CollisionTable()
    cfg = WalkConfig.build(chain.domain_for(f, C), 4, lambda S: chain.is_marked(S, f, C))
    eps = cfg.epsilon
    sch = amplify.schedule(eps)
    p = math.sin(sch.alpha * (1 + 2 * sch.iters_uniform)) ** 2
    start = uniform_edge_state(cfg)
    hits = sum(mnrs_run(cfg, start, trial_rng(2024, t))[0] for t in range(trials))
    sigma = math.sqrt(trials * p * (1 - p))
    freq_ok = abs(hits - trials * p) <= 3 * sigma
    return CheckResult(
        2,
        "amplification guarantees",
        bool(bound_ok and freq_ok),
        {"grid_bounds_hold": bool(bound_ok), "epsilon": round(eps, 6),
         "hits": hits, "expected": round(trials * p, 3), "sigma": round(sigma, 3)},
    )


# -- 3 -----------------------------------------------------------------------


def check_residual_uniformity(seeds: int = 3) -> CheckResult:
    worst = 0.0
    support_ok = True
    events = 0
    runs = 0

    for n in (4, 5, 6):
        R = 4 if n < 6 else 3
        for m in (n + 1, n + 2):
            for seed in range(seeds):
                f = chain.random_function(n, m, seed)

                def hook(amps, spec, Rr, C, f=f):
                    nonlocal worst, support_ok, events
                    events += 1
                    verts = all_vertices(spec, Rr)
                    unmarked = np.array([not chain.is_marked(tuple(v), f, C) for v in verts])
                    expect = np.where(unmarked, 1 / math.sqrt(unmarked.sum()), 0.0)
                    support_ok &= bool(np.array_equal(np.abs(amps) > 1e-12, unmarked))
                    worst = max(worst, float(np.abs(amps - expect).max()))

                try:
                    chain.chained_session(f, 2, R, trial_rng(seed, n * 16 + m),
                                          backend="dense", on_residual=hook)
                except InfeasibleError:
                    pass  # function ran out of collisions; residuals seen so far still count
                runs += 1
    ok = support_ok and worst <= 1e-8 and events > 0
    return CheckResult(3, "residual uniformity after extraction", ok,
                       {"runs": runs, "extractions": events,
                        "max_deviation": f"{worst:.3e}", "support_exact": support_ok})


# -- 4 -----------------------------------------------------------------------


def _collision_images(f) -> int:
    _, counts = np.unique(f.table, return_counts=True)
    return int((counts >= 2).sum())


def check_chained(seeds: int = 20) -> CheckResult:
    ok = True
    detail = {}
    for k in (1, 2):
        ell = k + 2
        done, skipped, seed = 0, [], 0
        mism = 0
        while done < seeds:
            f = chain.random_function(6, 8, seed)
            if _collision_images(f) < 2**k:
                skipped.append(seed)
                seed += 1
                continue
            C, rep = chain.run_chained(f, k, ell, seed)
            expect = 0
            for w in rep.walks:
                table = chain.CollisionTable()
                # rebuild the table snapshot the walk saw
                pre = set(w.preimages)
                for u in w.images:
                    table.entries[u] = tuple(sorted(x for x in pre if int(f.table[x]) == u))
                eps = chain.marked_fraction(f, table, w.R)
                sch = amplify.schedule(float(eps))
                expect += sch.iters_bad if w.start == "bad" else sch.iters_uniform
            good = (chain.verify_table(C, f) and len(C) >= 2**k
                    and expect == rep.total_walk_iterations)
            mism += not good
            done += 1
            seed += 1
        ok &= mism == 0
        detail[f"k={k}"] = f"runs={done} failures={mism} skipped_seeds={skipped}"
    return CheckResult(4, "chained runs", ok, detail)


# -- 5 -----------------------------------------------------------------------


def bound_instances(count: int = 50, seed: int = 5):
    """Random enumerable (f, C, R) triples with genuine tables."""
    rng = make_rng(seed)
    out = []
    while len(out) < count:
        n = 4
        m = int(rng.integers(5, 7))
        f = chain.random_function(n, m, int(rng.integers(1 << 30)))
        C = chain.CollisionTable()
        values, counts = np.unique(f.table, return_counts=True)
        groups = [int(u) for u, c in zip(values, counts) if c >= 2]
        rng.shuffle(groups)
        for u in groups[: int(rng.integers(0, len(groups) + 1))]:
            C.add(u, np.flatnonzero(f.table == u).tolist())
        n_eff = f.domain_size - len(C.preimages)
        R = int(rng.integers(1, n_eff))
        out.append((f, C, R))
    return out


def check_epsilon_bounds() -> CheckResult:
    viol_lo = viol_hi = 0
    ratios = []
    for f, C, R in bound_instances():
        exact = chain.epsilon_exact(f, C, R, method="enumerate")
        lo, hi = chain.epsilon_bounds(R, len(C), f.m)
        viol_lo += exact < lo
        viol_hi += exact > hi
        if lo > 0:
            ratios.append(exact / lo)
    return CheckResult(5, "marked-fraction bounds", viol_lo + viol_hi == 0,
                       {"instances": 50, "below_lower": viol_lo, "above_upper": viol_hi,
                        "median_exact_over_lower": round(float(np.median(ratios)), 4)})


# -- 6 -----------------------------------------------------------------------


def reference_form(elements, n: int):
    """Canonical tree of a set built directly from its sorted bit strings."""
    strs = sorted(to_bits(int(x), n) for x in elements)
    if not strs:
        return None

    def lcp(ss):
        return os.path.commonprefix(ss)

    def node(ss, depth):
        if len(ss) == 1:
            return ("leaf", int(ss[0], 2))
        p = len(lcp(ss))
        left = [s for s in ss if s[p] == "0"]
        right = [s for s in ss if s[p] == "1"]
        pl, pr = lcp(left), lcp(right)
        return (pl[depth:], node(left, len(pl)), pr[depth:], node(right, len(pr)))

    return node(strs, 0)


def _layout_counts(elements, order, runs, allocator, seed):
    counts: dict = {}
    for t in range(runs):
        rng = trial_rng(seed, t)
        tree = RadixTree(4, capacity=7, allocator=allocator)
        for x in order:
            tree.insert(elements[x], rng)
        key = tree.layout()
        counts[key] = counts.get(key, 0) + 1
    return counts


def check_radix(appendix_cases: int = 10_000, swup_cases: int = 500) -> CheckResult:
    detail = {}
    rng = make_rng(6)
    # canonical forms, exhaustive for |S| <= 4 over 4 bits
    canon_bad = 0
    for size in range(5):
        for S in itertools.combinations(range(16), size):
            ref = reference_form(S, 4)
            for perm in itertools.permutations(S):
                t = RadixTree(4, max_size=4)
                for x in perm:
                    t.insert(x, rng)
                canon_bad += t.canonical_form() != ref
    for _ in range(100):
        S = rng.choice(256, 20, replace=False)
        ref = reference_form(S, 8)
        t = RadixTree(8, max_size=20)
        for x in rng.permutation(S):
            t.insert(int(x), rng)
        canon_bad += t.canonical_form() != ref
    detail["canonical_mismatches"] = canon_bad

    # layout distribution for a 3-element set in 7 cells
    elems = [0b0011, 0b0101, 0b1100]
    layouts = 6 * 5 * 4 * 3
    runs = layouts * 20
    p_fit, p_two = [], []
    for alloc in ("heap-tree", "random-search"):
        a = _layout_counts(elems, (0, 1, 2), runs, alloc, 61)
        b = _layout_counts(elems, (2, 0, 1), runs, alloc, 62)
        keys = sorted(set(a) | set(b))
        obs_a = np.array([a.get(k, 0) for k in keys])
        obs_b = np.array([b.get(k, 0) for k in keys])
        full_a = np.concatenate([obs_a, np.zeros(layouts - len(keys))])
        p_fit.append(stats.chisquare(full_a).pvalue if len(keys) <= layouts else 0.0)
        p_two.append(stats.chi2_contingency(np.vstack([obs_a, obs_b]))[1])
    layout_ok = min(p_fit) > 1e-3 and min(p_two) > 1e-3
    detail["layout_p_uniform"] = [round(float(p), 4) for p in p_fit]
    detail["layout_p_two_orders"] = [round(float(p), 4) for p in p_two]

    # appendix operations against sorted-array oracles
    mism = 0
    per_tree = 10
    for _ in range(appendix_cases // per_tree):
        n = int(rng.integers(1, 13))
        U = 1 << n
        size = int(rng.integers(0, min(U, 48) + 1))
        pool = rng.choice(U, size, replace=False)
        cut = int(rng.integers(0, size + 1))
        A, B = np.sort(pool[:cut]), np.sort(pool[cut:])
        ta = RadixTree(n, max_size=max(1, len(A)))
        tb = RadixTree(n, max_size=max(1, len(B)))
        for x in A:
            ta.insert(int(x), rng)
        for x in B:
            tb.insert(int(x), rng)
        comp_a = np.setdiff1d(np.arange(U), A)
        comp_ab = np.setdiff1d(comp_a, B)
        for _ in range(per_tree):
            if len(comp_a):
                i = int(rng.integers(len(comp_a)))
                mism += find_nth_not_in_tree(i, ta) != comp_a[i]
            u, v = np.sort(rng.integers(0, U + 1, 2))
            want = int(np.count_nonzero((comp_a >= u) & (comp_a < v)))
            mism += count_in_interval_not_tree(int(u), int(v), ta) != want
            if len(comp_ab):
                i = int(rng.integers(len(comp_ab)))
                mism += find_nth_not_in_two_trees(i, ta, tb) != comp_ab[i]
    detail["appendix_mismatches"] = mism

    # swap-update applied twice
    swup_bad = 0
    for case in range(swup_cases):
        f = chain.random_function(5, 7, case)
        C = chain.CollisionTable()
        values, counts = np.unique(f.table, return_counts=True)
        for u in values[counts >= 2][: int(rng.integers(0, 3))]:
            C.add(int(u), np.flatnonzero(f.table == u).tolist())
        spec = chain.domain_for(f, C)
        pts = spec.effective_points()
        R = int(rng.integers(1, 7))
        S = tuple(sorted(int(x) for x in rng.choice(pts, R, replace=False)))
        coin = (int(rng.integers(1, R + 1)), int(rng.integers(1, len(pts) - R + 1)))
        ts, tf = build_pair(S, f, C, rng, max_size=8)
        tp = preimage_tree(C, f.n, rng)
        back = swup_classical(ts, tf, coin, C, f, rng, tp)
        moved = tuple(sorted(ts.elements())) == apply_coin(S, coin, spec)
        back_ok = back == reverse_coin(S, coin, spec)
        again = swup_classical(ts, tf, back, C, f, rng, tp)
        same = (again == coin and tuple(sorted(ts.elements())) == S
                and sorted(tf.elements()) == sorted((int(f.table[x]) << f.n) | x for x in S))
        swup_bad += not (moved and back_ok and same)
    detail["swup_failures"] = swup_bad
    ok = canon_bad == 0 and layout_ok and mism == 0 and swup_bad == 0
    return CheckResult(6, "radix tree", ok, detail)


# -- 7 -----------------------------------------------------------------------


def check_noise(steps: int = 200) -> CheckResult:
    cfg = WalkConfig.build(DomainSpec(6), 2, lambda S: False)
    detail = {}
    ok = True
    for mu in (1e-4, 1e-5, 1e-6):
        ov = fidelity_decay(cfg, mu, steps, make_rng(7))
        margin = min(o - noise_bound(mu, i + 1) for i, o in enumerate(ov))
        ok &= margin >= 0
        detail[f"mu={mu:g}"] = f"final={ov[-1]:.6f} min_margin={margin:.3e}"
    return CheckResult(7, "noisy update bound", ok, detail)


# -- 8 -----------------------------------------------------------------------


def check_planner() -> CheckResult:
    detail = {}
    ok = True
    n = 100.0
    step = 1e-3 * n
    scan_ok = True
    for m in (110.0, 120.0, 130.0, 140.0, 150.0, 155.0):
        expect = 3 * n - 2 * m if m <= 4 * n / 3 else m / 4
        ks = np.arange(0.0, 2 * n - m + step / 2, step)
        br = [planner.collision_branch(float(k), m, n) for k in ks]
        switches = [ks[i] for i in range(1, len(ks)) if br[i] != br[i - 1]]
        scan_ok &= len(switches) == 1 and abs(switches[0] - expect) <= step + 1e-9
    detail["branch_switches_ok"] = scan_ok
    ok &= scan_ok
    r = planner.sieve_total(0.3875, 0.27, "new")
    sieve_ok = (abs(r.zeta - 0.1568) <= 5e-4 and abs(r.rho0 - 0.1214) <= 5e-4
                and abs(r.total_exp_d - 0.2563) <= 3e-4)
    _, _, old = planner.optimize_sieve("old")
    sieve_ok &= abs(old.total_exp_d - 0.2570) <= 5e-4
    detail["zeta"] = round(r.zeta, 5)
    detail["rho0"] = round(r.rho0, 5)
    detail["total_d_new"] = round(r.total_exp_d, 5)
    detail["optimum_d_old"] = round(old.total_exp_d, 5)
    ok &= sieve_ok
    lb = planner.limited_birthday(128, 32, 32, 0)
    vals_ok = abs(lb.exponent - (48 - 32 / 3)) <= 1e-9 and abs(lb.extra["classical_exponent"] - 65) <= 1e-9
    vals_ok &= abs(planner.r_collision(2, 10, 120, 100).exponent - (20 / 3 + 40)) <= 1e-9
    vals_ok &= abs(planner.r_collision(3, 0, 70, 100).exponent - 30) <= 1e-9
    vals_ok &= abs(planner.r_collision(3, 7, 49, 49).exponent - 25) <= 1e-9
    detail["examples_ok"] = bool(vals_ok)
    ok &= vals_ok
    return CheckResult(8, "planner values", bool(ok), detail)


# -- 9 -----------------------------------------------------------------------

DETERMINISM_COMMANDS = [
    ["plan", "--n", "100", "--m", "180", "--k", "60"],
    ["sieve-opt", "--formula", "new"],
    ["chain", "--n", "6", "--m", "8", "--k", "1", "--ell", "3", "--seed", "7"],
    ["grover", "--format", "csv"],
    ["spectrum", "--N", "6", "--R", "2", "--format", "csv"],
    ["walk", "--n", "4", "--m", "5", "--R", "4", "--trials", "20", "--seed", "3"],
    ["tree-fuzz", "--n", "6", "--ops", "200", "--seed", "11"],
    ["rank-select", "--n", "4", "--elements", "0,2,9,11,15", "--op", "nth-not-in", "--i", "6"],
]


def check_determinism() -> CheckResult:
    from .cli import main

    bad = []
    with tempfile.TemporaryDirectory() as tmp:
        for idx, argv in enumerate(DETERMINISM_COMMANDS):
            outs = []
            for rep in range(2):
                path = os.path.join(tmp, f"{idx}-{rep}.out")
                code = main(argv + ["--output", path])
                with open(path, "rb") as fh:
                    outs.append((code, fh.read()))
            if outs[0] != outs[1] or outs[0][0] != 0:
                bad.append(argv[0])
    return CheckResult(9, "command determinism", not bad,
                       {"commands": len(DETERMINISM_COMMANDS), "differing": bad})


CHECKS: list[Callable[[], CheckResult]] = [
    check_spectra,
    check_amplification,
    check_residual_uniformity,
    check_chained,
    check_epsilon_bounds,
    check_radix,
    check_noise,
    check_planner,
    check_determinism,
]


def run_all(echo: Callable[[str], None] = print) -> list[CheckResult]:
    results = []
    for check in CHECKS:
        res = check()
        echo(res.line())
        results.append(res)
    return results
