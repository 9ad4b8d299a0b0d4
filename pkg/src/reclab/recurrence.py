"""Arithmetic recurrence families and the path-level counting statistics.

A recurrence spec fixes lags d_1 < ... < d_ell and an intensity t.  For a
target word A of length n and a path omega, the count over horizon N is

    S_N = sum_{k=1..N} prod_i 1[A occurs in omega at position d_i * k]

with 0-based path positions and k starting at 1.  The horizon is
N = floor(t * P(A)^{-ell}), which makes E S_N approximately t.
"""

from __future__ import annotations

import math
import os
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from .errors import (
    ConditioningError,
    HorizonCapError,
    InvalidInputError,
    PreconditionError,
    SupportExitWarning,
)
from .measures import MeasureModel
from .words import Word, WordLike, as_symbols, periodic_extension, principal_period

DEFAULT_HORIZON_CAP = 10**8


def horizon_cap() -> int:
    """Active horizon cap; RECLAB_MAX_HORIZON overrides the default 10^8."""
    raw = os.environ.get("RECLAB_MAX_HORIZON")
    return int(float(raw)) if raw else DEFAULT_HORIZON_CAP


@dataclass(frozen=True)
class RecurrenceSpec:
    """Lags d_1 < ... < d_ell (all >= 1) and intensity t > 0."""

    d: tuple[int, ...]
    t: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "d", tuple(int(x) for x in self.d))
        if len(self.d) < 1 or self.d[0] < 1:
            raise InvalidInputError("need at least one lag, all lags >= 1")
        if any(a >= b for a, b in zip(self.d, self.d[1:])):
            raise InvalidInputError(f"lags must be strictly increasing: {self.d}")
        if not self.t > 0:
            raise InvalidInputError(f"intensity must be positive, got {self.t}")

    @property
    def ell(self) -> int:
        return len(self.d)

    @property
    def d_max(self) -> int:
        return self.d[-1]

    @classmethod
    def from_config(cls, cfg: dict) -> "RecurrenceSpec":
        return cls(d=tuple(cfg["d"]), t=float(cfg.get("t", 1.0)))

    def config(self) -> dict:
        return {"d": list(self.d), "t": self.t}


def kappa(r: int, spec: Union[RecurrenceSpec, Sequence[int]]) -> int:
    """Least lag l such that hits at k and k+l are jointly satisfiable,
    for a target word of principal period r: lcm over i of r/gcd(r, d_i)."""
    if r < 1:
        raise InvalidInputError("period must be >= 1")
    d = spec.d if isinstance(spec, RecurrenceSpec) else tuple(spec)
    return math.lcm(*(r // math.gcd(r, di) for di in d))


def minimal_feasible_lag(word: WordLike, spec: RecurrenceSpec) -> int:
    """Smallest l >= 1 such that {X_m = 1, X_{m+l} = 1} is a nonempty event
    on the full shift, found by explicit constraint propagation.

    Valid for n >= r * (d_ell + 1) with r the word's principal period and
    any anchor m > 2 * d_ell * n (the answer does not depend on which);
    under that hypothesis it must equal kappa(r, spec).
    """
    syms = as_symbols(word)
    n = len(syms)
    r = principal_period(syms)
    needed = r * (spec.d_max + 1)
    if n < needed:
        raise PreconditionError(
            f"need n >= r*(d_max+1) = {needed} for period {r}, got n = {n}"
        )
    m = 2 * spec.d_max * n + 1
    for lag in range(1, n + 1):
        constraints: dict[int, int] = {}
        ok = True
        for start in [m, m + lag]:
            for di in spec.d:
                base = di * start
                for j, a in enumerate(syms):
                    prev = constraints.setdefault(base + j, a)
                    if prev != a:
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            return lag
    raise AssertionError("unreachable: lag = kappa is always feasible")


def rho(model: MeasureModel, word: WordLike, spec: RecurrenceSpec) -> float:
    """Cluster-continuation probability of the word under the model.

    With r the principal period, R the length-r prefix and k = kappa, this
    is the product over i of the conditional probability, given the
    cylinder of the word, that the periodic pattern extends to length
    n + d_i * k.  Computed from exact cylinder probabilities in log space.
    """
    syms = as_symbols(word)
    n = len(syms)
    log_pa = model.log_cylinder_prob(syms)
    if log_pa == -math.inf:
        raise ConditioningError("word has probability zero under this model")
    r = principal_period(syms)
    kap = kappa(r, spec)
    prefix = syms[:r]
    total = 0.0
    for di in spec.d:
        ext = periodic_extension(prefix, n + di * kap)
        log_ext = model.log_cylinder_prob(ext)
        if log_ext == -math.inf:
            warnings.warn(
                "periodic extension leaves the support of the model; rho = 0",
                SupportExitWarning,
            )
            return 0.0
        total += log_ext - log_pa
    return min(math.exp(total), 1.0)


def horizon_N(prob: float, spec: RecurrenceSpec, cap: Optional[int] = None) -> int:
    """floor(t * prob^(-ell)), guarded against overflow and the horizon cap."""
    if not prob > 0:
        raise InvalidInputError(f"cylinder probability must be positive, got {prob}")
    cap = horizon_cap() if cap is None else cap
    log_value = math.log(spec.t) - spec.ell * math.log(prob)
    if log_value > math.log(cap) + 1.0:
        raise HorizonCapError(math.exp(min(log_value, 700.0)), cap)
    value = spec.t * prob ** (-spec.ell)  # pow is correctly rounded, exp(log) is not
    if not value <= cap:
        raise HorizonCapError(value, cap)
    return int(value)


class GapProfile(NamedTuple):
    g: float          # infimum forward gap between consecutive lag tracks
    gamma: int        # first index from which tracks stay 2n apart


def gap_profile(spec: RecurrenceSpec, n: int) -> GapProfile:
    """Gap functions of the linear family q_i(k) = d_i * k.

    g(n) = n * min_i (d_{i+1} - d_i) and gamma(n) = ceil(2n / min diff).
    With a single lag there are no pairs to separate: (inf, 0).
    """
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if spec.ell == 1:
        return GapProfile(math.inf, 0)
    mdiff = min(b - a for a, b in zip(spec.d, spec.d[1:]))
    return GapProfile(n * mdiff, -(-2 * n // mdiff))


def gap_profile_general(qs: Sequence, n: int, k_max: int) -> GapProfile:
    """Gap functions for arbitrary increasing integer functions q_i.

    The infimum over k >= n is evaluated on the finite window [n, k_max]
    only; callers must pick k_max large enough for their family.
    """
    if n < 1 or k_max < n:
        raise InvalidInputError("need 1 <= n <= k_max")
    if len(qs) == 1:
        return GapProfile(math.inf, 0)
    diffs = [
        min(qs[i + 1](k) - qs[i](k) for i in range(len(qs) - 1))
        for k in range(0, k_max + 1)
    ]
    suffix_min = list(diffs)
    for k in range(k_max - 1, -1, -1):
        suffix_min[k] = min(suffix_min[k], suffix_min[k + 1])
    g = suffix_min[n]
    gamma = next((k for k in range(k_max + 1) if suffix_min[k] >= 2 * n), None)
    if gamma is None:
        raise InvalidInputError(f"gaps never reach {2*n} on [0, {k_max}]; raise k_max")
    return GapProfile(g, gamma)


def _haystack_needle(path: Union[WordLike, np.ndarray], syms: tuple[int, ...]):
    """Match representations for substring scans: bytes when every symbol
    fits a byte (fast C scans), tuples otherwise (countable alphabets)."""
    if isinstance(path, np.ndarray):
        if path.dtype == np.uint8 and max(syms) <= 255:
            return path.tobytes(), bytes(syms)
        path = tuple(int(a) for a in path)
    else:
        path = as_symbols(path)
    if max(syms) <= 255 and max(path) <= 255:
        return bytes(path), bytes(syms)
    return path, syms


def _occurrence_starts(path, word) -> set[int]:
    out = set()
    if isinstance(path, bytes):
        i = path.find(word)
        while i != -1:
            out.add(i)
            i = path.find(word, i + 1)
        return out
    n = len(word)
    for i in range(len(path) - n + 1):
        if path[i : i + n] == word:
            out.add(i)
    return out


def count_hits(
    path: Union[WordLike, np.ndarray],
    word: WordLike,
    spec: RecurrenceSpec,
    n_horizon: int,
) -> int:
    """The count S_N: number of k in {1..N} with the word occurring at
    every position d_i * k of the path simultaneously."""
    if n_horizon < 0:
        raise InvalidInputError("horizon must be >= 0")
    if n_horizon == 0:
        return 0
    syms = as_symbols(word)
    pb, needle = _haystack_needle(path, syms)
    needed = spec.d_max * n_horizon + len(syms)
    if len(pb) < needed:
        raise InvalidInputError(
            f"path length {len(pb)} < required {needed} for this horizon"
        )
    occ = _occurrence_starts(pb, needle)
    total = 0
    for k in range(1, n_horizon + 1):
        if all(di * k in occ for di in spec.d):
            total += 1
    return total


def hitting_time(
    path: Union[WordLike, np.ndarray],
    word: WordLike,
    spec: RecurrenceSpec,
    max_k: int,
) -> Optional[int]:
    """First k in {1..max_k} at which the simultaneous occurrence event
    holds, or None if it never does within the window."""
    if max_k < 1:
        raise InvalidInputError("max_k must be >= 1")
    syms = as_symbols(word)
    pb, needle = _haystack_needle(path, syms)
    needed = spec.d_max * max_k + len(syms)
    if len(pb) < needed:
        raise InvalidInputError(
            f"path length {len(pb)} < required {needed} for max_k = {max_k}"
        )
    occ = _occurrence_starts(pb, needle)
    for k in range(1, max_k + 1):
        if all(di * k in occ for di in spec.d):
            return k
    return None


@dataclass(frozen=True)
class CylinderContext:
    """Everything the bounds and experiments need about one target word."""

    word: Word
    r: int
    prefix: Word
    kappa: int
    rho: float
    prob: float
    horizon: int

    def __post_init__(self):
        if not 1 <= self.kappa <= self.r:
            raise InvalidInputError(f"kappa={self.kappa} outside [1, r={self.r}]")
        if not 0.0 <= self.rho <= 1.0:
            raise InvalidInputError(f"rho={self.rho} outside [0, 1]")


def cylinder_context(
    model: MeasureModel,
    word: WordLike,
    spec: RecurrenceSpec,
    cap: Optional[int] = None,
) -> CylinderContext:
    syms = as_symbols(word)
    prob = model.cylinder_prob(syms)
    if prob <= 0:
        raise ConditioningError("word has probability zero under this model")
    r = principal_period(syms)
    return CylinderContext(
        word=Word(syms),
        r=r,
        prefix=Word(syms[:r]),
        kappa=kappa(r, spec),
        rho=rho(model, syms, spec),
        prob=prob,
        horizon=horizon_N(prob, spec, cap),
    )
