"""Monte Carlo engine, exact small-instance oracle, and experiments.

Trials are independent: every trial samples a fresh path.  Sampling is
batched for throughput; the batch schedule is a fixed function of the
configuration and batch generators are spawned deterministically from the
base seed, so a given (config, seed) pair always produces byte-identical
reports, independent of scheduling.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .distributions import Pmf, tv_distance
from .errors import (
    DegenerateParametersError,
    EnumerationCapError,
    HypothesisError,
    InvalidInputError,
    NoPositiveRateError,
)
from .measures import MeasureModel, XorCoupledMeasure, model_config
from .recurrence import RecurrenceSpec, horizon_N, rho as rho_of
from .words import WordLike, as_symbols, constant_word

_BATCH_BYTES = 1 << 26          # ~64 MB of path symbols per batch
_EXACT_BATCH = 1 << 20          # enumeration indices per batch
_CONFIDENCE_ALPHA = 0.01        # 99% Monte Carlo confidence radius


def _seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, (tuple, list)):
        return np.random.SeedSequence([int(x) for x in seed])
    return np.random.SeedSequence(int(seed))


def _batch_sizes(trials: int, length: int) -> list[int]:
    rows = max(1, min(trials, _BATCH_BYTES // max(length, 1)))
    out = [rows] * (trials // rows)
    if trials - rows * len(out):
        out.append(trials - rows * len(out))
    return out


def _window_all(eq: np.ndarray, n: int) -> np.ndarray:
    """acc[s] = all(eq[s : s+n]) along axis 1, by doubling window lengths."""
    powers = {1: eq}
    arr, m = eq, 1
    while 2 * m <= n:
        arr = arr[:, : arr.shape[1] - m] & arr[:, m:]
        m *= 2
        powers[m] = arr
    width = eq.shape[1] - n + 1
    acc = None
    offset, rem = 0, n
    for p in sorted(powers, reverse=True):
        if rem >= p:
            piece = powers[p][:, offset : offset + width]
            acc = piece.copy() if acc is None else acc & piece
            offset += p
            rem -= p
    return acc


def _match_starts(paths: np.ndarray, word: Sequence[int]) -> np.ndarray:
    """Boolean (trials, L-n+1) array of window-start positions matching word."""
    w = tuple(word)
    n = len(w)
    length = paths.shape[1]
    if n > length:
        raise InvalidInputError("paths shorter than the target word")
    if len(set(w)) == 1:
        return _window_all(paths == w[0], n)
    width = length - n + 1
    acc = paths[:, :width] == w[0]
    for j in range(1, n):
        acc &= paths[:, j : j + width] == w[j]
    return acc


def _joint_hits(match: np.ndarray, d: Sequence[int], n_horizon: int) -> np.ndarray:
    """(trials, N) booleans: simultaneous match at d_i * k for k = 1..N."""
    acc = match[:, d[0] : d[0] * n_horizon + 1 : d[0]]
    for di in d[1:]:
        acc = acc & match[:, di : di * n_horizon + 1 : di]
    return acc


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Histogram of an integer statistic over independent trials."""

    counts: dict[int, int]
    trials: int
    seed: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.trials:
            raise InvalidInputError("histogram does not sum to the trial count")
        if any(v < 0 for v in self.counts.values()) or self.trials < 1:
            raise InvalidInputError("counts must be nonnegative, trials >= 1")

    def frequency(self, k: int) -> float:
        return self.counts.get(k, 0) / self.trials

    def to_pmf(self) -> Pmf:
        top = max(self.counts)
        mass = np.zeros(top + 1)
        for k, v in self.counts.items():
            mass[k] = v / self.trials
        return Pmf(mass, 0.0)

    def to_json(self) -> dict:
        return {
            "counts": {str(k): v for k, v in sorted(self.counts.items())},
            "trials": self.trials,
            "seed": self.seed,
        }


def simulate_counts(
    model: MeasureModel,
    word: WordLike,
    spec: RecurrenceSpec,
    trials: int,
    seed: int,
    n_horizon: Optional[int] = None,
    cap: Optional[int] = None,
) -> EmpiricalDistribution:
    """Monte Carlo law of the recurrence count: fresh path per trial."""
    if trials < 1:
        raise InvalidInputError("need at least one trial")
    syms = as_symbols(word)
    if n_horizon is None:
        n_horizon = horizon_N(model.cylinder_prob(syms), spec, cap)
    length = spec.d_max * n_horizon + len(syms)
    sizes = _batch_sizes(trials, length)
    children = _seed_sequence(seed).spawn(len(sizes))
    hist = np.zeros(n_horizon + 1, dtype=np.int64)
    for rows, child in zip(sizes, children):
        rng = np.random.default_rng(child)
        paths = model.sample_array(length, rows, rng)
        if n_horizon == 0:
            hist[0] += rows
            continue
        hits = _joint_hits(_match_starts(paths, syms), spec.d, n_horizon)
        hist += np.bincount(hits.sum(axis=1), minlength=n_horizon + 1)
    counts = {int(k): int(v) for k, v in enumerate(hist) if v}
    base = seed if isinstance(seed, int) else 0
    return EmpiricalDistribution(counts=counts, trials=trials, seed=base)


def simulate_hitting_times(
    model: MeasureModel,
    word: WordLike,
    spec: RecurrenceSpec,
    max_k: int,
    trials: int,
    seed: int,
) -> np.ndarray:
    """First simultaneous-hit index per trial, 0 when censored at max_k."""
    if trials < 1 or max_k < 1:
        raise InvalidInputError("need trials >= 1 and max_k >= 1")
    syms = as_symbols(word)
    length = spec.d_max * max_k + len(syms)
    sizes = _batch_sizes(trials, length)
    children = _seed_sequence(seed).spawn(len(sizes))
    out = np.empty(trials, dtype=np.int64)
    at = 0
    for rows, child in zip(sizes, children):
        rng = np.random.default_rng(child)
        paths = model.sample_array(length, rows, rng)
        hits = _joint_hits(_match_starts(paths, syms), spec.d, max_k)
        found = hits.any(axis=1)
        first = hits.argmax(axis=1) + 1
        out[at : at + rows] = np.where(found, first, 0)
        at += rows
    return out


def _read_positions(spec: RecurrenceSpec, n: int, n_horizon: int) -> list[int]:
    pos = set()
    for k in range(1, n_horizon + 1):
        for di in spec.d:
            pos.update(range(di * k, di * k + n))
    return sorted(pos)


def _xor_runs(positions: list[int]) -> list[list[int]]:
    runs, cur = [], [0]
    for i in range(1, len(positions)):
        if positions[i] == positions[i - 1] + 1:
            cur.append(i)
        else:
            runs.append(cur)
            cur = [i]
    runs.append(cur)
    return runs


def _assignment_weights(model, digits: np.ndarray, positions: list[int]) -> np.ndarray:
    """Exact joint probability of the symbols in ``digits`` (rows: position
    index, columns: assignment) sitting at the given path coordinates."""
    from .measures import BernoulliMeasure, MarkovMeasure

    cols = digits.shape[1]
    if isinstance(model, BernoulliMeasure):
        pvec = np.asarray(model.probs)
        w = np.ones(cols)
        for p in range(len(positions)):
            w *= pvec[digits[p]]
        return w
    if isinstance(model, MarkovMeasure):
        w = model.stationary[digits[0]].copy()
        for p in range(1, len(positions)):
            gap = positions[p] - positions[p - 1]
            step = np.linalg.matrix_power(model.transition, gap)
            w *= step[digits[p - 1], digits[p]]
        return w
    if isinstance(model, XorCoupledMeasure):
        # maximal runs of consecutive coordinates are independent blocks
        pr = np.array([model.p0, model.p1])
        w = np.ones(cols)
        for run in _xor_runs(positions):
            alpha = np.zeros(cols, dtype=np.uint8)
            wa = pr[0] * np.ones(cols)
            wb = pr[1] * np.ones(cols)
            for p in run:
                alpha = alpha ^ digits[p]
                wa *= pr[alpha]
                wb *= pr[1 - alpha]
            w *= wa + wb
        return w
    raise InvalidInputError(f"no exact enumeration rule for {model!r}")


def exact_distribution(
    model: MeasureModel,
    word: WordLike,
    spec: RecurrenceSpec,
    n_horizon: int,
    max_positions: int = 24,
) -> Pmf:
    """Exact law of the recurrence count by enumerating the symbols at the
    positions actually read, weighting assignments by exact probabilities.

    Gaps between read positions are marginalized (for Markov models via
    transition-matrix powers), so the cost is alphabet^|positions|, capped
    through ``max_positions``.
    """
    if n_horizon < 0:
        raise InvalidInputError("horizon must be >= 0")
    if n_horizon == 0:
        return Pmf.point_mass(0)
    syms = as_symbols(word)
    positions = _read_positions(spec, len(syms), n_horizon)
    size = model.alphabet_size
    if len(positions) * math.log(size) > max_positions * math.log(2):
        raise EnumerationCapError(
            f"{len(positions)} read positions over {size} symbols exceeds "
            f"the 2^{max_positions} enumeration cap"
        )
    index_of = {p: i for i, p in enumerate(positions)}
    constraints = [
        [(index_of[di * k + j], a) for di in spec.d for j, a in enumerate(syms)]
        for k in range(1, n_horizon + 1)
    ]
    total = size ** len(positions)
    mass = np.zeros(n_horizon + 1)
    for start in range(0, total, _EXACT_BATCH):
        idx = np.arange(start, min(start + _EXACT_BATCH, total), dtype=np.int64)
        digits = np.empty((len(positions), len(idx)), dtype=np.uint8)
        scaled = idx
        for p in range(len(positions)):
            digits[p] = scaled % size
            scaled = scaled // size
        weights = _assignment_weights(model, digits, positions)
        s_val = np.zeros(len(idx), dtype=np.int64)
        for cons in constraints:
            xk = np.ones(len(idx), dtype=bool)
            for pi, a in cons:
                xk &= digits[pi] == a
            s_val += xk
        mass += np.bincount(s_val, weights=weights, minlength=n_horizon + 1)
    return Pmf(mass, max(0.0, 1.0 - float(mass.sum())))


def mc_radius(trials: int, alpha: float = _CONFIDENCE_ALPHA) -> float:
    """Conservative (1-alpha) confidence radius sqrt(ln(2/alpha)/(2 trials))."""
    return math.sqrt(math.log(2.0 / alpha) / (2.0 * trials))


@dataclass(frozen=True)
class ExperimentReport:
    """One experiment: empirical law vs target, with certified radii."""

    empirical: EmpiricalDistribution
    target: Optional[Pmf]
    tv: Optional[float]
    tv_radius: Optional[float]
    mc_radius: float
    bound_name: Optional[str] = None
    bound_value: Optional[float] = None
    config: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "empirical": self.empirical.to_json(),
            "target": self.target.to_json() if self.target is not None else None,
            "tv": self.tv,
            "tv_radius": self.tv_radius,
            "mc_radius": self.mc_radius,
            "bound": (
                {"name": self.bound_name, "value": self.bound_value}
                if self.bound_name
                else None
            ),
            "config": self.config,
        }


def compare_to_target(
    emp: EmpiricalDistribution,
    target: Pmf,
    bound_name: Optional[str] = None,
    bound_value: Optional[float] = None,
    config: Optional[dict] = None,
) -> ExperimentReport:
    """Plug-in TV distance (sup form) between the empirical law and the
    target, a 99% Monte Carlo confidence radius, and the target's
    truncation radius."""
    dist = tv_distance(emp.to_pmf(), target)
    return ExperimentReport(
        empirical=emp,
        target=target,
        tv=dist.value,
        tv_radius=dist.radius,
        mc_radius=mc_radius(emp.trials),
        bound_name=bound_name,
        bound_value=bound_value,
        config=config or {},
    )


def nonconvergence_sweep(
    p1: float,
    t: float,
    n_list: Sequence[int],
    trials: int,
    seed: int,
    cap: Optional[int] = None,
) -> dict:
    """Zero-count probability of the all-ones word under the XOR-coupled
    measure, word length by word length.

    The even and odd subsequences approach different limits,
    exp(-t(1 - 2 p0 p1)) and exp(-t/2), so no single limit law exists.
    """
    if p1 == 0.5:
        raise DegenerateParametersError(
            "p1 = 0.5 makes the even and odd limits coincide"
        )
    model = XorCoupledMeasure(p1)
    even_limit = math.exp(-t * (1.0 - 2.0 * model.p0 * model.p1))
    odd_limit = math.exp(-t / 2.0)
    spec = RecurrenceSpec((1,), t)
    rows = []
    for n in n_list:
        word = constant_word(1, n)
        emp = simulate_counts(model, word, spec, trials, (seed, n), cap=cap)
        rows.append(
            {
                "n": int(n),
                "horizon": horizon_N(model.cylinder_prob(word), spec, cap),
                "theta": emp.frequency(0),
                "predicted_limit": even_limit if n % 2 == 0 else odd_limit,
                "parity": "even" if n % 2 == 0 else "odd",
            }
        )
    return {
        "config": {
            "command": "nonconv",
            "p1": p1,
            "t": t,
            "n_list": [int(n) for n in n_list],
            "trials": trials,
            "seed": seed,
        },
        "even_limit": even_limit,
        "odd_limit": odd_limit,
        "mc_radius": mc_radius(trials),
        "rows": rows,
    }


def hitting_time_survival(
    model: MeasureModel,
    word: WordLike,
    spec: RecurrenceSpec,
    t_grid: Sequence[float],
    trials: int,
    seed: int,
    cap: Optional[int] = None,
) -> dict:
    """Empirical survival of the rescaled first hit, P(A)^ell * tau > t,
    against the exponential prediction exp(-(1-rho) t) and the governing
    error bound at each grid point."""
    from .bounds import bound_inputs, hitting_time_law_bound

    syms = as_symbols(word)
    prob = model.cylinder_prob(syms)
    t_grid = sorted(float(t) for t in t_grid)
    if not t_grid or t_grid[0] < 0:
        raise InvalidInputError("need a nonempty grid of t >= 0")
    scale = math.exp(-spec.ell * math.log(prob))
    max_k = horizon_N(prob, RecurrenceSpec(spec.d, max(t_grid[-1], 1e-9)), cap)
    max_k = max(max_k, 1)
    taus = simulate_hitting_times(model, syms, spec, max_k, trials, seed)
    censored = int((taus == 0).sum())
    rho_val = rho_of(model, syms, spec)
    rows = []
    for t in t_grid:
        surviving = int(((taus == 0) | (taus > t * scale)).sum())
        try:
            bi = bound_inputs(model, syms, RecurrenceSpec(spec.d, max(t, 1e-9)))
            bound = hitting_time_law_bound(bi)
        except (HypothesisError, NoPositiveRateError):
            bound = None
        rows.append(
            {
                "t": t,
                "survival": surviving / trials,
                "predicted": math.exp(-(1.0 - rho_val) * t),
                "bound": bound,
            }
        )
    return {
        "config": {
            "command": "hitting",
            "model": model_config(model),
            "word": list(syms),
            "spec": spec.config(),
            "t_grid": t_grid,
            "trials": trials,
            "seed": seed,
        },
        "rho": rho_val,
        "censored": censored,
        "mc_radius": mc_radius(trials),
        "rows": rows,
    }


def entropy_estimate(
    model: MeasureModel,
    omega_prefix: WordLike,
    spec: RecurrenceSpec,
    n_list: Sequence[int],
    trials: int,
    seed: int,
    cap: Optional[int] = None,
    window: float = 40.0,
) -> dict:
    """Growth rate of the first-hit time along nested prefixes.

    Per word length n the table reports the Monte Carlo mean of
    (1/n) log tau, the reference lines ell*h and h (h the model entropy;
    the two coincide at ell = 1), and the mean defect
    (1/n)(log tau + ell * log P(A_n)), which should vanish as n grows.
    Hits beyond the search window are counted as censored and excluded
    from the means.
    """
    prefix = as_symbols(omega_prefix)
    h = model.entropy()
    rows = []
    for n in n_list:
        if n > len(prefix):
            raise InvalidInputError(f"prefix shorter than requested n = {n}")
        word = prefix[:n]
        log_prob = model.log_cylinder_prob(word)
        max_k = horizon_N(
            model.cylinder_prob(word), RecurrenceSpec(spec.d, window), cap
        )
        taus = simulate_hitting_times(model, word, spec, max_k, trials, (seed, n))
        found = taus[taus > 0]
        censored = int(trials - len(found))
        if len(found):
            log_tau = np.log(found.astype(float))
            mean_rate = float(log_tau.mean()) / n
            residual = float((log_tau + spec.ell * log_prob).mean()) / n
        else:
            mean_rate = math.nan
            residual = math.nan
        rows.append(
            {
                "n": int(n),
                "mean_log_tau_over_n": mean_rate,
                "entropy": h,
                "ell_times_entropy": spec.ell * h,
                "mean_residual": residual,
                "censored": censored,
            }
        )
    return {
        "config": {
            "command": "entropy",
            "model": model_config(model),
            "omega_prefix": list(prefix),
            "spec": spec.config(),
            "n_list": [int(n) for n in n_list],
            "trials": trials,
            "seed": seed,
            "window": window,
        },
        "rows": rows,
    }


def canonical_json(obj) -> str:
    """Deterministic JSON rendering used for every report file."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
