"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines; the Monte Carlo experiments are executed through the same config
path the CLI uses, and criterion 12 re-executes every config to check that
report files are reproduced byte for byte.
"""

import itertools
import math
import time

import numpy as np
import pytest

from reclab import (
    BoundInputs,
    HypothesisError,
    RecurrenceSpec,
    WrongModelError,
    BernoulliMeasure,
    canonical_json,
    compound_poisson_approximation_bound,
    exact_distribution,
    hitting_time_law_bound,
    poisson_approximation_bound,
    polya_aeppli_approximation_bound,
    poisson_pmf,
    rho,
    thue_morse_prefix,
    wp,
)
from reclab.cli import execute
from reclab.words import (
    overlap_set,
    overlap_set_bruteforce,
    periodic_extension,
    principal_period,
    principal_period_bruteforce,
)
from reclab.recurrence import kappa, minimal_feasible_lag

UNIFORM_CFG = {"type": "bernoulli", "probs": [0.5, 0.5]}

CONFIGS = {
    "c04-simulate": {
        "command": "simulate",
        "model": UNIFORM_CFG,
        "word": [1],
        "spec": {"d": [1, 2], "t": 0.5},
        "trials": 100_000,
        "seed": 404,
    },
    "c05-poisson-n6": {
        "command": "compare",
        "model": UNIFORM_CFG,
        "word": list(thue_morse_prefix(6).symbols),
        "spec": {"d": [1], "t": 1.0},
        "trials": 100_000,
        "seed": 505,
        "target": {"kind": "poisson"},
    },
    "c05-poisson-n12": {
        "command": "compare",
        "model": UNIFORM_CFG,
        "word": list(thue_morse_prefix(12).symbols),
        "spec": {"d": [1], "t": 1.0},
        "trials": 100_000,
        "seed": 505,
        "target": {"kind": "poisson"},
    },
    "c06-compound": {
        "command": "compare",
        "model": {"type": "bernoulli", "probs": [0.4, 0.6]},
        "word": [1] * 10,
        "spec": {"d": [1], "t": 1.0},
        "trials": 100_000,
        "seed": 606,
        "target": {"kind": "polya-aeppli"},
        "bound": "polya-aeppli",
    },
    "c07-nonconv": {
        "command": "nonconv",
        "p1": 0.75,
        "t": 1.0,
        "n_list": [8, 9, 10, 11, 12, 13],
        "trials": 100_000,
        "seed": 707,
    },
    "c08-hitting": {
        "command": "hitting",
        "model": UNIFORM_CFG,
        "word": [1, 0, 0, 0, 0, 0, 0, 0, 0, 0],
        "spec": {"d": [1], "t": 1.0},
        "t_grid": [0.25 * k for k in range(1, 13)],
        "trials": 100_000,
        "seed": 808,
    },
    "c11-ell2": {
        "command": "compare",
        "model": UNIFORM_CFG,
        "word": list(thue_morse_prefix(7).symbols),
        "spec": {"d": [1, 2], "t": 1.0},
        "trials": 50_000,
        "seed": 1111,
        "target": {"kind": "poisson"},
    },
}


class _Lab:
    """Executes experiment configs once and keeps the emitted report files."""

    def __init__(self, directory):
        self.dir = directory
        self.cache = {}

    def run(self, name):
        if name not in self.cache:
            report = execute(CONFIGS[name])
            (self.dir / f"{name}.json").write_text(canonical_json(report))
            self.cache[name] = report
        return self.cache[name]


@pytest.fixture(scope="module")
def lab(tmp_path_factory):
    return _Lab(tmp_path_factory.mktemp("acceptance"))


def check(name, ok, detail):
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{name}: {detail}"


def binary_words(n_lo, n_hi):
    for n in range(n_lo, n_hi + 1):
        yield from itertools.product((0, 1), repeat=n)


def test_01_period_oracle():
    start = time.time()
    mismatches = 0
    for w in binary_words(1, 14):
        if principal_period(w) != principal_period_bruteforce(w):
            mismatches += 1
        if overlap_set(w) != overlap_set_bruteforce(w):
            mismatches += 1
    elapsed = time.time() - start
    check(
        "01 period-oracle",
        mismatches == 0 and elapsed < 10.0,
        f"mismatches={mismatches}, elapsed={elapsed:.1f}s",
    )


def test_02_repeated_block_period():
    start = time.time()
    bad = 0
    for h in range(1, 6):
        for block in itertools.product((0, 1), repeat=h):
            ph = principal_period(block)
            if not (ph == h or h % ph != 0):
                continue
            for n in range(2 * h, 21):
                if principal_period(periodic_extension(block, n)) != h:
                    bad += 1
    elapsed = time.time() - start
    check(
        "02 repeated-block-period",
        bad == 0 and elapsed < 5.0,
        f"violations={bad}, elapsed={elapsed:.1f}s",
    )


def test_03_minimal_lag_equals_kappa():
    start = time.time()
    bad = checked = 0
    specs = [RecurrenceSpec(d) for d in [(1, 2), (1, 3), (2, 3), (1, 2, 3)]]
    for w in binary_words(1, 12):
        r = principal_period(w)
        for spec in specs:
            if len(w) < r * (spec.d_max + 1):
                continue
            checked += 1
            if minimal_feasible_lag(w, spec) != kappa(r, spec):
                bad += 1
    elapsed = time.time() - start
    check(
        "03 minimal-lag-kappa",
        bad == 0 and checked > 0 and elapsed < 60.0,
        f"violations={bad}, cases={checked}, elapsed={elapsed:.1f}s",
    )


def test_04_exact_vs_monte_carlo(lab):
    start = time.time()
    spec = RecurrenceSpec((1, 2), 0.5)
    model = BernoulliMeasure.uniform(2)
    exact = exact_distribution(model, [1], spec, 2)
    exact_err = float(np.abs(exact.mass - [5 / 8, 1 / 4, 1 / 8]).max())
    report = lab.run("c04-simulate")
    counts = {int(k): v for k, v in report["empirical"]["counts"].items()}
    trials = report["empirical"]["trials"]
    emp = np.zeros(3)
    for k, v in counts.items():
        emp[k] = v / trials
    tv = 0.5 * float(np.abs(emp - exact.mass).sum())
    elapsed = time.time() - start
    check(
        "04 exact-vs-mc",
        exact_err < 1e-12 and tv <= 0.01 and elapsed < 10.0,
        f"exact_err={exact_err:.2e}, tv={tv:.4f}, elapsed={elapsed:.1f}s",
    )


def test_05_poisson_limit_aperiodic_word(lab):
    start = time.time()
    tv6 = lab.run("c05-poisson-n6")["tv"]
    tv12 = lab.run("c05-poisson-n12")["tv"]
    elapsed = time.time() - start
    check(
        "05 poisson-limit",
        tv12 <= 0.03 and tv12 < tv6 and elapsed < 120.0,
        f"tv(n=12)={tv12:.4f}, tv(n=6)={tv6:.4f}, elapsed={elapsed:.1f}s",
    )


def test_06_geometric_compound_limit(lab):
    start = time.time()
    rho_val = rho(BernoulliMeasure.binary(0.6), [1] * 10, RecurrenceSpec((1,), 1.0))
    tv = lab.run("c06-compound")["tv"]
    elapsed = time.time() - start
    check(
        "06 compound-limit",
        abs(rho_val - 0.6) < 1e-12 and tv <= 0.02 and elapsed < 120.0,
        f"rho={rho_val:.12f}, tv={tv:.4f}, elapsed={elapsed:.1f}s",
    )


def test_07_no_single_limit_for_xor_measure(lab):
    start = time.time()
    report = lab.run("c07-nonconv")
    even_limit = math.exp(-0.625)
    odd_limit = math.exp(-0.5)
    thetas = {row["n"]: row["theta"] for row in report["rows"]}
    even_ok = all(abs(thetas[n] - even_limit) <= 0.02 for n in (8, 10, 12))
    odd_ok = all(abs(thetas[n] - odd_limit) <= 0.02 for n in (9, 11, 13))
    gap = min(thetas[n] for n in (9, 11, 13)) - max(thetas[n] for n in (8, 10, 12))
    elapsed = time.time() - start
    check(
        "07 nonconvergence",
        even_ok and odd_ok and gap > 0.04 and elapsed < 180.0,
        f"thetas={ {n: round(v, 4) for n, v in sorted(thetas.items())} }, "
        f"gap={gap:.4f}, elapsed={elapsed:.1f}s",
    )


def test_08_hitting_time_exponential_law(lab):
    start = time.time()
    report = lab.run("c08-hitting")
    word = CONFIGS["c08-hitting"]["word"]
    sup = max(abs(row["survival"] - row["predicted"]) for row in report["rows"])
    elapsed = time.time() - start
    check(
        "08 hitting-time-law",
        principal_period(word) == 10 and sup <= 0.02 and elapsed < 180.0,
        f"sup|emp-exp|={sup:.4f}, elapsed={elapsed:.1f}s",
    )


def test_09_poisson_pair_distance_envelope():
    start = time.time()
    grid = [round(0.1 * k, 1) for k in range(1, 31)]
    table = np.stack([poisson_pmf(lam, kmax=200).mass for lam in grid])
    violations = 0
    for i, lam in enumerate(grid):
        for j, gam in enumerate(grid):
            full_variation = float(np.abs(table[i] - table[j]).sum())
            if full_variation > 2 * wp(abs(lam - gam)) + 1e-12:
                violations += 1
    elapsed = time.time() - start
    check(
        "09 poisson-distance-envelope",
        violations == 0 and elapsed < 1.0,
        f"violations={violations}, elapsed={elapsed:.2f}s",
    )


def test_10_bound_evaluators():
    base = dict(
        n=10, ell=1, t=1.0, prob_word=2**-10, prob_period_prefix=2**-10,
        r=1, d_max=1, kappa=1, rho=0.5, psi0=0.0, psi_n=0.0,
        decay_rate=math.log(2), gap_start=0,
    )
    long_word = dict(base, n=20, prob_word=2**-20, prob_period_prefix=0.5)
    errs = []

    value = poisson_approximation_bound(BoundInputs(**base))
    errs.append(abs(value - (160 / 1024 + 60 / 1024)))

    value = compound_poisson_approximation_bound(BoundInputs(**long_word))
    errs.append(abs(value - (2**9 * (20**4 * 2**-10) + 2 * wp(10 * 400 * 2 * 2**-10))))

    value = hitting_time_law_bound(BoundInputs(**long_word))
    expected = 2**10 * 2 * (2 * 20**4 * 2 ** (-20 / 7)) + 2 * wp(10 * 2**-10 * 400 * 2)
    errs.append(abs(value - expected) / expected)

    value = polya_aeppli_approximation_bound(BoundInputs(**dict(base, iid=True)))
    expected = (
        2**10 * 2 * 10**4 * 2**-5 + 2 * wp(12 * 100 * 2 * 2**-5)
        + 1 / math.factorial(11)
    )
    errs.append(abs(value - expected) / expected)

    raised = 0
    try:
        poisson_approximation_bound(
            BoundInputs(**dict(base, ell=2, d_max=2, psi0=0.3, psi_n=0.3))
        )
    except HypothesisError:
        raised += 1
    try:
        compound_poisson_approximation_bound(
            BoundInputs(**dict(base, n=24, r=3, kappa=3, d_max=2,
                               prob_word=0.01, prob_period_prefix=0.1))
        )
    except HypothesisError:
        raised += 1
    try:
        polya_aeppli_approximation_bound(BoundInputs(**base))
    except WrongModelError:
        raised += 1

    check(
        "10 bound-evaluators",
        max(errs) < 1e-9 and raised == 3,
        f"max_err={max(errs):.2e}, designated_errors={raised}/3",
    )


def test_11_two_lag_poisson_case(lab):
    start = time.time()
    tv = lab.run("c11-ell2")["tv"]
    elapsed = time.time() - start
    check(
        "11 two-lag-poisson",
        tv <= 0.05 and elapsed < 300.0,
        f"tv={tv:.4f}, elapsed={elapsed:.1f}s",
    )


def test_12_reports_are_reproducible(lab):
    mismatched = []
    for name, config in CONFIGS.items():
        lab.run(name)
        first = (lab.dir / f"{name}.json").read_bytes()
        again = canonical_json(execute(config)).encode()
        if first != again:
            mismatched.append(name)
    check(
        "12 determinism",
        not mismatched,
        f"byte-identical={len(CONFIGS) - len(mismatched)}/{len(CONFIGS)}"
        + (f", mismatched={mismatched}" if mismatched else ""),
    )
