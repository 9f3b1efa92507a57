"""Verification harness: each suite checks one family of properties against
independent oracles and reports the worst measured slack.

Slack is signed so that ``slack >= 0`` means the property held; a check passes
when its worst slack is nonnegative.  Tolerances are folded into the slack
(``slack = bound + tol - measured``) so one sign convention covers everything.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np
from gmpy2 import mpfr, mpq

from .gadget import (deficiency_bound, distance_to_signs, gadget_matrix, gadget_value,
                     gadget_values, pair_inequality_terms, sphere_samples)
from .graph import Graph, cut_value, incidence_matrix, maxcut_bruteforce, random_connected_graph
from .matrix import DenseMatrix
from .norms import (AscentConfig, dual_norm_pair, infinity_p_norm_exact, norm_1, norm_inf,
                    p_norm_ascent, p_norm_sign_search, power_sum, root_p)
from .numerics import as_p, pow_abs, precision
from .reduction import (BlockSpec, build_ztilde, decode_maxcut_from_inftyp,
                        default_alpha, pad_square, rounding_gap,
                        solve_maxcut_via_pnorm, sphere_distance_hp)

# Suite keywords accepted on the command line, in execution order.
SUITES = ("lemma4", "lemma5", "lemma6", "prop1", "prop2", "prop6", "prop7", "prop8",
          "duality", "replication", "padding")

CUT_NORM_EXPONENTS = ("1", "3/2", "2", "5/2", "3")
GADGET_EXPONENTS = ("5/2", "3", "4")


@dataclass
class PropertyCheck:
    name: str
    cases: int = 0
    worst_slack: float = math.inf
    failures: int = 0
    detail: dict = field(default_factory=dict)

    def record(self, slack) -> None:
        slack = float(slack)
        self.cases += 1
        if slack < self.worst_slack:
            self.worst_slack = slack
        if not slack >= 0:
            self.failures += 1

    def record_many(self, slacks) -> None:
        arr = np.asarray(slacks, dtype=np.float64).ravel()
        if arr.size == 0:
            return
        self.cases += int(arr.size)
        self.failures += int(np.count_nonzero(~(arr >= 0)))
        self.worst_slack = min(self.worst_slack, float(arr.min()))

    @property
    def passed(self) -> bool:
        return self.cases > 0 and self.failures == 0

    def to_record(self) -> dict:
        return {
            "property": self.name,
            "passed": self.passed,
            "cases": self.cases,
            "failures": self.failures,
            "worst_slack": self.worst_slack,
            **({"detail": self.detail} if self.detail else {}),
        }


@dataclass
class SuiteResult:
    suite: str
    checks: list
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_record(self) -> dict:
        return {"suite": self.suite, "passed": self.passed,
                "checks": [c.to_record() for c in self.checks]}


def _rel(a, b) -> float:
    """``|a - b| / max(|b|, tiny)`` evaluated in high precision."""
    with precision(256):
        a, b = mpfr(a), mpfr(b)
        den = abs(b) if b != 0 else mpfr(1)
        return float(abs(a - b) / den)


# -- shared instance sets ---------------------------------------------------

def cut_norm_graphs(seed: int, count: int = 50, n_max: int = 10) -> list[Graph]:
    """``count`` random connected graphs with ``2 <= n <= n_max``, varied density."""
    rng = np.random.default_rng([seed, 1])
    out = []
    for _ in range(count):
        n = int(rng.integers(2, n_max + 1))
        out.append(random_connected_graph(n, rng, density=float(rng.uniform(0.2, 0.9))))
    return out


def pipeline_graphs(seed: int, count: int = 30, n_min: int = 3, n_max: int = 7) -> list:
    """``(graph, p)`` pairs for the end-to-end decode suites."""
    rng = np.random.default_rng([seed, 4])
    ps = ("5/2", "3")
    out = []
    for i in range(count):
        n = int(rng.integers(n_min, n_max + 1))
        g = random_connected_graph(n, rng, density=float(rng.uniform(0.3, 0.9)))
        out.append((g, as_p(ps[i % 2])))
    return out


@lru_cache(maxsize=8)
def pipeline_runs(seed: int, count: int = 30, n_max: int = 7) -> tuple:
    """Each pipeline instance solved with ``alpha = 10 n**2`` and the default alpha."""
    runs = []
    for g, p in pipeline_graphs(seed, count, n_max=n_max):
        oracle = maxcut_bruteforce(g)
        for label, alpha in (("10n^2", 10 * g.n ** 2), ("default", None)):
            res = solve_maxcut_via_pnorm(g, p, alpha, AscentConfig(seed=seed))
            runs.append((g, p, label, res, oracle))
    return tuple(runs)


# -- suites -----------------------------------------------------------------

def suite_pair_inequality(seed: int = 0, samples: int = 100_000) -> list[PropertyCheck]:
    """Two-term power inequality and nonnegativity of its error term on random (x, y, p), p in
    [2, 10]."""
    rng = np.random.default_rng([seed, 0])
    p = rng.uniform(2.0, 10.0, samples)
    scale = 10.0 ** rng.uniform(-2, 1, (2, samples))
    x = rng.standard_normal(samples) * scale[0]
    y = rng.standard_normal(samples) * scale[1]
    lhs, bound, err = pair_inequality_terms(x, y, p)
    nonneg = PropertyCheck("error term nonnegative")
    ineq = PropertyCheck("refined pair inequality (relative to bound)")
    nonneg.record_many(err + 1e-12)
    ineq.record_many((bound - err - lhs) / bound + 1e-12)
    return [nonneg, ineq]


def suite_sphere_maximum(seed: int = 0, n_max: int = 8, samples: int = 10_000,
                         exponents=GADGET_EXPONENTS) -> list[PropertyCheck]:
    """Gadget objective equals n*2^p on sign vectors and never exceeds it on the sphere
    ||y||_p^p = n."""
    signs = PropertyCheck("sign vectors attain n*2^p")
    cap = PropertyCheck("sphere points stay below n*2^p")
    for p in map(as_p, exponents):
        two_p = float(pow_abs(2, p, 64))
        for n in range(2, n_max + 1):
            target = n * pow_abs(2, p, 128)
            for mask in range(1 << n):
                x = [-1 if (mask >> j) & 1 else 1 for j in range(n)]
                signs.record(1e-9 - abs(float(gadget_value(x, p, 128) - target)))
            rng = np.random.default_rng([seed, 5, n, p.numerator, p.denominator])
            y = sphere_samples(n, p, samples, rng)
            vals = gadget_values(y, float(p))
            cap.record_many(n * two_p + 1e-9 - vals)
    return [signs, cap]


def suite_deficiency(seed: int = 0, n_max: int = 8, samples: int = 10_000,
                     exponents=GADGET_EXPONENTS) -> list[PropertyCheck]:
    """Gadget objective on the sphere obeys the quadratic deficiency bound at the point's own
    distance to the sign vectors."""
    check = PropertyCheck("deficiency bound at each point's own distance c")
    capped = 0
    for p in map(as_p, exponents):
        two_p = float(pow_abs(2, p, 64))
        pf = float(p)
        for n in range(2, n_max + 1):
            rng = np.random.default_rng([seed, 6, n, p.numerator, p.denominator])
            y = sphere_samples(n, p, samples, rng)
            vals = gadget_values(y, pf)
            c = distance_to_signs(y)
            # A point farther than 1/2 from every sign vector is in particular
            # 1/2-far, so the c = 1/2 bound applies to it.
            capped += int(np.count_nonzero(c > 0.5))
            c_eff = np.minimum(c, 0.5)
            keep = c_eff > 0
            bound = n * two_p - 3.0 * (pf - 2.0) * c_eff ** 2 / (two_p * n * n)
            slack = bound + 1e-9 - vals
            check.record_many(slack[keep])
            # Cross-check the float bound against the high-precision formula.
            i = int(np.argmin(slack[keep]))
            ci = float(c_eff[keep][i])
            hp_bound = float(deficiency_bound(n, p, Fraction(ci), 64))
            check.record(1e-9 - abs(hp_bound - float(bound[keep][i])))
    check.detail["points_capped_at_half"] = capped
    return [check]


def suite_cut_norm_identity(seed: int = 0, count: int = 50, n_max: int = 10,
                            exponents=CUT_NORM_EXPONENTS,
                            graphs: list | None = None) -> list[PropertyCheck]:
    """Infinity,p norm of the incidence matrix equals 2*maxcut^(1/p), checked against the
    brute-force oracle."""
    check = PropertyCheck("infinity,p norm of M(G) equals 2*maxcut^(1/p) (relative 1e-9)")
    witness = PropertyCheck("enumeration witness cuts maxcut edges")
    graphs = cut_norm_graphs(seed, count, n_max) if graphs is None else graphs
    for g in graphs:
        mc = maxcut_bruteforce(g).value
        m = incidence_matrix(g)
        for p in map(as_p, exponents):
            est = infinity_p_norm_exact(m, p, bits=128)
            expected = 2 * root_p(mpfr(mc, 128), p, 128)
            check.record(1e-9 - _rel(est.value, expected))
            witness.record(-abs(cut_value(g, est.witness) - mc))
    return [check, witness]


def suite_error_transfer(seed: int = 0, count: int = 50, n_max: int = 10,
                         exponents=CUT_NORM_EXPONENTS, eps=(1e-4, 1e-3)) -> list[PropertyCheck]:
    """Relative perturbations of the exact infinity,p norm decode to the max cut within 2^(p-1)
    p eps maxcut."""
    check = PropertyCheck("perturbed norm decodes within 2^(p-1) p eps maxcut + 1e-9")
    declared = PropertyCheck("declared additive bound covers the actual error")
    for g in cut_norm_graphs(seed, count, n_max):
        mc = maxcut_bruteforce(g).value
        m = incidence_matrix(g)
        for p in map(as_p, exponents):
            f = infinity_p_norm_exact(m, p, bits=128).value
            for e in eps:
                allowed = float(pow_abs(2, p, 64)) / 2 * float(p) * e * mc + 1e-9
                for sign in (-1, 1):
                    with precision(128):
                        fe = f * (1 + sign * mpq(Fraction(e)))
                    res = decode_maxcut_from_inftyp(fe, p, rel_error=Fraction(e), bits=128)
                    err = abs(float(res.maxcut_estimate) - mc)
                    check.record(allowed - err)
                    declared.record(float(res.additive_error_bound) + 1e-12 - err)
    return [check, declared]


def suite_localization(seed: int = 0, sizes=(3, 4, 5), restarts: int = 200,
                       p="3") -> list[PropertyCheck]:
    """Ascent optimizer of the unit-gadget reduction lies within 1/(4^p n^6) of a sign vector
    after rescaling."""
    p = as_p(p)
    check = PropertyCheck("ascent optimizer of the unit-gadget instance is near a sign vector")
    rng = np.random.default_rng([seed, 6])
    for n in sizes:
        g = random_connected_graph(n, rng)
        inst = build_ztilde(g, p)
        est = p_norm_ascent(inst.matrix, p, AscentConfig(restarts=restarts, seed=seed))
        dist = sphere_distance_hp(est.witness, p, 128)
        bound = 1 / (pow_abs(4, p, 64) * n ** 6)
        check.record(float(bound) - float(dist))
        check.detail[f"n={n}"] = {"distance": float(dist), "bound": float(bound)}
    return [check]


def suite_rounding_gap(seed: int = 0, count: int = 30, n_max: int = 7) -> list[PropertyCheck]:
    """Rounding the optimizer of Z to signs loses between 0 and 1/n^2 of ||Zx||_p^p (on the
    sphere)."""
    lower = PropertyCheck("rounding gap is nonnegative")
    upper = PropertyCheck("rounding gap is at most 1/n^2")
    for g, p, _, res, _ in pipeline_runs(seed, count, n_max):
        inst = res.details["instance"]
        gap = rounding_gap(inst.matrix, res.details["witness"], p, res.details["polish_bits"])
        lower.record(gap)
        with precision(gap.precision):
            upper.record(mpq(1, g.n ** 2) - gap)
    return [lower, upper]


def suite_decode(seed: int = 0, count: int = 30, n_max: int = 7) -> list[PropertyCheck]:
    """End-to-end decode matches the brute-force max cut, with a valid rounding certificate and
    witness."""
    exact = PropertyCheck("decoded max cut equals the brute-force oracle")
    valid = PropertyCheck("rounding certificate |estimate - r| + bound < 1/2")
    witness = PropertyCheck("rounded witness achieves the max cut")
    upper = PropertyCheck("norm stays below 2*66pn^8/(p-2) at the default weight")
    for g, p, label, res, oracle in pipeline_runs(seed, count, n_max):
        exact.record(-abs(res.maxcut_rounded - oracle.value))
        est, bound = res.maxcut_estimate, res.additive_error_bound
        with precision(est.precision):
            valid.record(mpq(1, 2) - abs(est - res.maxcut_rounded) - bound)
        witness.record(-abs(res.witness_cut.value - oracle.value))
        if label == "default":
            cap = 2 * default_alpha(g.n, p) * mpq(66, 64)
            with precision(256):
                upper.record(mpfr(cap) - res.details["f"])
    return [exact, valid, witness, upper]


def _random_matrix(rng, rows: int, cols: int) -> DenseMatrix:
    return DenseMatrix(rng.uniform(-1.0, 1.0, (rows, cols)))


def suite_duality(seed: int = 0, count: int = 20, exponents=("5/2", "3"),
                  restarts: int = 200, size: int = 5) -> list[PropertyCheck]:
    """Ascent values of ||M||_p and ||M^T||_p' agree; one 10x restart escalation before failing."""
    check = PropertyCheck("||M||_p equals ||M^T||_p' (relative 1e-6)")
    rng = np.random.default_rng([seed, 8])
    escalations = 0
    for _ in range(count):
        m = _random_matrix(rng, size, size)
        for p in map(as_p, exponents):
            a, b = dual_norm_pair(m, p, AscentConfig(restarts=restarts, seed=seed))
            rel = _rel(a.value, b.value)
            if rel > 1e-6:
                escalations += 1
                a, b = dual_norm_pair(m, p, AscentConfig(restarts=10 * restarts, seed=seed))
                rel = _rel(a.value, b.value)
            check.record(1e-6 - rel)
    check.detail["escalations"] = escalations
    return [check]


def suite_replication(seed: int = 0, count: int = 10, ks=(1, 8, 27), p="3",
                      n: int = 4) -> list[PropertyCheck]:
    """k stacked gadget copies over M have the norm of the single copy weighted by k^(1/p)."""
    p = as_p(p)
    pointwise = PropertyCheck("stacked power sum equals the weighted single copy")
    norm = PropertyCheck("norm of the k-fold stack equals the k^(1/p)-weighted stack")
    rng = np.random.default_rng([seed, 7])
    gadget = gadget_matrix(n)
    cfg = AscentConfig(seed=seed)
    for _ in range(count):
        m = _random_matrix(rng, int(rng.integers(2, 7)), n)
        for k in ks:
            spec = BlockSpec(((gadget, k, 1), (m, 1, 1)))
            weighted = spec.collapse(p)
            x = rng.standard_normal(n)
            lhs = spec.power_sum(x, p, 128)
            rhs = power_sum(weighted.matvec(x), p, 128)
            pointwise.record(1e-12 - _rel(lhs, rhs))
            stacked = p_norm_ascent(spec.materialize(), p, cfg)
            single = p_norm_ascent(weighted, p, cfg)
            norm.record(1e-12 - _rel(stacked.value, single.value))
    return [pointwise, norm]


def _all_norms(m: DenseMatrix, cfg: AscentConfig) -> dict:
    out = {"1": norm_1(m).value, "inf": norm_inf(m).value}
    for p in ("1", "2", "5/2", "3"):
        out[f"inf,{p}"] = infinity_p_norm_exact(m, p, bits=128).value
    for p in ("3/2", "5/2", "3"):
        out[f"sign,{p}"] = p_norm_sign_search(m, p, bits=128).value
        out[f"ascent,{p}"] = p_norm_ascent(m, p, cfg, bits=128).value
    return out


def suite_padding(seed: int = 0, count: int = 20) -> list[PropertyCheck]:
    """Square zero-padding leaves every norm engine's value unchanged."""
    check = PropertyCheck("every norm unchanged by square zero-padding (relative 1e-12)")
    rng = np.random.default_rng([seed, 9])
    cfg = AscentConfig(seed=seed)
    for _ in range(count):
        rows, cols = rng.choice(np.arange(1, 8), 2, replace=False)
        m = _random_matrix(rng, int(rows), int(cols))
        before = _all_norms(m, cfg)
        after = _all_norms(pad_square(m), cfg)
        for key in before:
            check.record(1e-12 - _rel(after[key], before[key]))
    return [check]


_RUNNERS: dict[str, Callable] = {
    "lemma4": suite_pair_inequality,
    "lemma5": suite_sphere_maximum,
    "lemma6": suite_deficiency,
    "prop1": suite_cut_norm_identity,
    "prop2": suite_error_transfer,
    "prop6": suite_localization,
    "prop7": suite_rounding_gap,
    "prop8": suite_decode,
    "duality": suite_duality,
    "replication": suite_replication,
    "padding": suite_padding,
}

# Which suite accepts a size cap, and under which keyword.
_SIZE_KEYWORD = {"lemma5": "n_max", "lemma6": "n_max", "prop1": "n_max", "prop2": "n_max",
                 "prop7": "n_max", "prop8": "n_max"}


def run_suite(name: str, seed: int = 0, n_max: int | None = None, **kwargs) -> SuiteResult:
    if name not in _RUNNERS:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")
    if n_max is not None and name in _SIZE_KEYWORD:
        kwargs[_SIZE_KEYWORD[name]] = n_max
    t0 = time.perf_counter()
    checks = _RUNNERS[name](seed=seed, **kwargs)
    return SuiteResult(name, checks, time.perf_counter() - t0)


def run_suites(names, seed: int = 0, n_max: int | None = None) -> list[SuiteResult]:
    if isinstance(names, str):
        names = SUITES if names == "all" else (names,)
    return [run_suite(name, seed, n_max) for name in names]
