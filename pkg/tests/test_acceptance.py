"""Acceptance criteria, run at full size.

Each test prints (and adds to the run summary) one line
``[PASS|FAIL] criterion NN: <what> | cases, worst slack, seconds``.
Slack is signed: nonnegative means the property held with the stated tolerance
already folded in (see ``pnormcut.verify``).
"""

from __future__ import annotations

import itertools
import time

import pytest

from pnormcut.graph import maxcut_bruteforce
from pnormcut.numerics import decode_precision_bits
from pnormcut.verify import (PropertyCheck, cut_norm_graphs, pipeline_runs,
                             suite_cut_norm_identity, suite_decode, suite_deficiency, suite_duality,
                             suite_error_transfer, suite_localization, suite_pair_inequality,
                             suite_padding, suite_replication, suite_rounding_gap,
                             suite_sphere_maximum)

SEED = 0


def itertools_maxcut(g) -> int:
    """Independent oracle: plain enumeration of every sign vector with x_1 = +1."""
    best = 0
    for tail in itertools.product((-1, 1), repeat=g.n - 1):
        x = (1,) + tail
        best = max(best, sum(1 for u, v in g.edges if x[u - 1] != x[v - 1]))
    return best


def edges_cut(g, x) -> int:
    return sum(1 for u, v in g.edges if x[u - 1] != x[v - 1])


def report(log, number: int, title: str, checks, seconds: float,
           limit: float | None = None, extra: str = "") -> None:
    cases = sum(c.cases for c in checks)
    worst = min(c.worst_slack for c in checks)
    failed = [c.name for c in checks if not c.passed]
    over_time = limit is not None and seconds >= limit
    ok = not failed and not over_time
    budget = f" (limit {limit:.0f}s)" if limit is not None else ""
    line = (f"[{'PASS' if ok else 'FAIL'}] criterion {number:02d}: {title} | "
            f"cases {cases}, worst slack {worst:.3e}, {seconds:.2f}s{budget}{extra}")
    log.append(line)
    print(line)
    assert not failed, f"failed checks: {failed}"
    assert not over_time, f"took {seconds:.1f}s, limit {limit}s"


def timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module")
def pipeline():
    """Criterion-4 instances solved once (both weights) and shared with criterion 5."""
    runs, seconds = timed(pipeline_runs, SEED)
    return runs, seconds


def test_criterion_01_cut_norm_identity(acceptance_log):
    checks, seconds = timed(suite_cut_norm_identity, SEED)
    graphs = cut_norm_graphs(SEED)
    assert len(graphs) == 50 and max(g.n for g in graphs) <= 10
    oracle = PropertyCheck("Gray-code oracle agrees with itertools enumeration")
    for g in graphs:
        oracle.record(-abs(maxcut_bruteforce(g).value - itertools_maxcut(g)))
    report(acceptance_log, 1, "infinity,p norm of M(G) = 2 maxcut^(1/p), rel 1e-9",
           [*checks, oracle], seconds, limit=60)


def test_criterion_02_pair_inequality(acceptance_log):
    checks, seconds = timed(suite_pair_inequality, SEED, samples=100_000)
    assert sum(c.cases for c in checks) == 2 * 100_000
    report(acceptance_log, 2, "pair inequality and error-term sign, p in [2,10]",
           checks, seconds, limit=10)


def test_criterion_03_gadget_sphere_bounds(acceptance_log):
    t0 = time.perf_counter()
    checks = suite_sphere_maximum(SEED, n_max=8) + suite_deficiency(SEED, n_max=8)
    seconds = time.perf_counter() - t0
    report(acceptance_log, 3, "gadget cap n*2^p and deficiency bound, n <= 8",
           checks, seconds, limit=60)


def test_criterion_04_end_to_end_decode(acceptance_log, pipeline):
    runs, solve_seconds = pipeline
    assert len(runs) == 60  # 30 graphs x two weights
    checks, seconds = timed(suite_decode, SEED)
    seconds += solve_seconds
    independent = PropertyCheck("decode agrees with itertools oracle and witness")
    precision_floor = PropertyCheck("instance precision meets decode_precision_bits")
    for g, p, _, res, _ in runs:
        mc = itertools_maxcut(g)
        independent.record(-abs(res.maxcut_rounded - mc))
        independent.record(-abs(edges_cut(g, res.witness_cut.witness) - mc))
        inst = res.details["instance"]
        precision_floor.record(inst.bits - decode_precision_bits(g.n, p, inst.alpha))
    report(acceptance_log, 4, "decoded max cut exact on 30 graphs x 2 weights, witness attains it",
           [*checks, independent, precision_floor], seconds, limit=300)


def test_criterion_05_rounding_gap(acceptance_log, pipeline):
    checks, seconds = timed(suite_rounding_gap, SEED)
    report(acceptance_log, 5, "0 <= rounding gap <= 1/n^2 on the decode instances",
           checks, seconds)


def test_criterion_06_localization(acceptance_log):
    checks, seconds = timed(suite_localization, SEED, sizes=(3, 4, 5), restarts=200, p="3")
    check = checks[0]
    n5 = check.detail["n=5"]["distance"]
    tight = PropertyCheck("n=5 distance at most 1e-6")
    tight.record(1e-6 - n5)
    distances = ", ".join(f"{k}: {v['distance']:.1e}" for k, v in check.detail.items())
    report(acceptance_log, 6, "ascent optimizer within 1/(4^p n^6) of a sign vector, p=3",
           [check, tight], seconds, extra=f" [{distances}]")


def test_criterion_07_replication(acceptance_log):
    checks, seconds = timed(suite_replication, SEED, count=10, ks=(1, 8, 27), p="3")
    report(acceptance_log, 7, "k-fold stack equals k^(1/3)-weighted copy, rel 1e-12",
           checks, seconds)


def test_criterion_08_duality(acceptance_log):
    checks, seconds = timed(suite_duality, SEED, count=20, restarts=200)
    esc = checks[0].detail["escalations"]
    report(acceptance_log, 8, "||M||_p = ||M^T||_p' on 20 random 5x5, rel 1e-6",
           checks, seconds, extra=f" [restart escalations: {esc}]")


def test_criterion_09_padding_invariance(acceptance_log):
    checks, seconds = timed(suite_padding, SEED, count=20)
    report(acceptance_log, 9, "all norms unchanged by square padding, rel 1e-12",
           checks, seconds)


def test_criterion_10_error_transfer(acceptance_log):
    checks, seconds = timed(suite_error_transfer, SEED, eps=(1e-4, 1e-3))
    report(acceptance_log, 10, "perturbed norm decodes within 2^(p-1) p eps maxcut + 1e-9",
           checks, seconds)
