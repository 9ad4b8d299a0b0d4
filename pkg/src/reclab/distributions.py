"""Target laws on the nonnegative integers, with certified truncation.

Every law is carried by a ``Pmf``: an explicit mass vector on {0..kmax}
plus an upper bound on the mass beyond kmax.  Truncation is never silent;
total-variation comparisons propagate the tail bounds as an explicit
uncertainty radius instead of pretending the vectors are the whole story.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import InvalidInputError

_NORM_TOL = 1e-9
_DEFAULT_TAIL_TARGET = 1e-10
_KMAX_LIMIT = 100_000


def wp(x: float) -> float:
    """x * exp(x); the factor appearing in all the approximation bounds.
    Saturates to inf instead of overflowing (the bound is vacuous there)."""
    try:
        return x * math.exp(x)
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class Pmf:
    """Probability mass on {0..kmax} plus a certified bound on the rest."""

    mass: np.ndarray
    tail_bound: float = 0.0

    def __post_init__(self):
        arr = np.asarray(self.mass, dtype=float).copy()
        if arr.ndim != 1 or arr.size == 0:
            raise InvalidInputError("mass must be a nonempty vector")
        if np.any(arr < -1e-12):
            raise InvalidInputError("mass entries must be nonnegative")
        arr = np.clip(arr, 0.0, None)
        arr.flags.writeable = False
        object.__setattr__(self, "mass", arr)
        object.__setattr__(self, "tail_bound", float(self.tail_bound))
        if self.tail_bound < 0:
            raise InvalidInputError("tail bound must be nonnegative")
        total = float(arr.sum()) + self.tail_bound
        if abs(total - 1.0) > _NORM_TOL:
            raise InvalidInputError(f"mass + tail = {total} is not normalized")

    @property
    def kmax(self) -> int:
        return len(self.mass) - 1

    def mean(self) -> float:
        """Mean of the truncated part (exact when the tail bound is tiny)."""
        return float(np.arange(len(self.mass)) @ self.mass)

    def prob(self, k: int) -> float:
        return float(self.mass[k]) if 0 <= k <= self.kmax else 0.0

    def to_json(self) -> dict:
        return {"mass": self.mass.tolist(), "tail": self.tail_bound}

    @classmethod
    def from_json(cls, obj: dict) -> "Pmf":
        return cls(np.asarray(obj["mass"], dtype=float), float(obj.get("tail", 0.0)))

    @classmethod
    def point_mass(cls, k: int) -> "Pmf":
        arr = np.zeros(k + 1)
        arr[k] = 1.0
        return cls(arr)


class TvDistance(NamedTuple):
    value: float
    radius: float


def tv_distance(p: Pmf, q: Pmf) -> TvDistance:
    """Total-variation distance in the sup-over-sets form: half the l1
    difference of the mass vectors, with half the summed tail bounds as a
    certified uncertainty radius."""
    n = max(len(p.mass), len(q.mass))
    pm = np.zeros(n)
    qm = np.zeros(n)
    pm[: len(p.mass)] = p.mass
    qm[: len(q.mass)] = q.mass
    value = 0.5 * float(np.abs(pm - qm).sum())
    return TvDistance(value, 0.5 * (p.tail_bound + q.tail_bound))


def _poisson_vector(t: float, kmax: int) -> np.ndarray:
    k = np.arange(kmax + 1)
    logfact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, kmax + 1)))))
    return np.exp(k * math.log(t) - t - logfact)


def default_poisson_kmax(t: float, target: float = _DEFAULT_TAIL_TARGET) -> int:
    """Smallest k with the crude tail bound t^(k+1)/(k+1)! below target."""
    term = t
    k = 0
    while term >= target and k < _KMAX_LIMIT:
        k += 1
        term *= t / (k + 1)
    return k


def poisson_pmf(t: float, kmax: Optional[int] = None) -> Pmf:
    """Poisson law with parameter t, truncated at kmax.

    The tail bound is the exact residual 1 - sum(mass), which is always
    at most t^(kmax+1)/(kmax+1)!.
    """
    if not t > 0:
        raise InvalidInputError(f"parameter must be positive, got {t}")
    if kmax is None:
        kmax = default_poisson_kmax(t)
    mass = _poisson_vector(t, kmax)
    return Pmf(mass, max(0.0, 1.0 - float(mass.sum())))


def _panjer(s: float, weighted_sizes: np.ndarray, kmax: int) -> np.ndarray:
    """Compound-Poisson recursion: p_k = (s/k) sum_j j q_j p_{k-j},
    with p_0 = exp(-s) and weighted_sizes[j] = j * q_j (index 0 unused)."""
    p = np.zeros(kmax + 1)
    p[0] = math.exp(-s)
    m = len(weighted_sizes) - 1
    for k in range(1, kmax + 1):
        jn = min(k, m)
        lo = k - jn - 1
        prev = p[k - 1 : lo : -1] if lo >= 0 else p[k - 1 :: -1]
        p[k] = (s / k) * float(weighted_sizes[1 : jn + 1] @ prev)
    return p


def compound_pmf(s: float, cluster: Pmf, kmax: Optional[int] = None) -> Pmf:
    """Law of a Poisson(s) number of i.i.d. positive cluster sizes.

    The cluster law must put no mass at 0.  A cluster with its own
    positive tail bound is allowed: the unknown part is folded into the
    result's tail bound (at most 1 - exp(-s * cluster_tail)).
    """
    if not s > 0:
        raise InvalidInputError(f"parameter must be positive, got {s}")
    if cluster.mass[0] > 1e-12:
        raise InvalidInputError("cluster sizes must be >= 1 (no mass at 0)")
    jw = np.arange(len(cluster.mass)) * cluster.mass
    known = math.exp(-s * cluster.tail_bound)  # mass reachable without the tail
    if kmax is None:
        kmax = 64
        while kmax < _KMAX_LIMIT:
            p = _panjer(s, jw, kmax)
            if known - float(p.sum()) < _DEFAULT_TAIL_TARGET:
                break
            kmax *= 2
    else:
        p = _panjer(s, jw, kmax)
    return Pmf(p, max(0.0, 1.0 - float(p.sum())))


def polya_aeppli_pmf(t: float, rho: float, kmax: Optional[int] = None) -> Pmf:
    """Geometric-cluster compound law: W ~ Poisson(t(1-rho)) clusters of
    i.i.d. sizes with P{size = k} = (1-rho) rho^(k-1).

    At rho = 0 every cluster has size 1 and the law is Poisson(t).
    """
    if not t > 0:
        raise InvalidInputError(f"parameter must be positive, got {t}")
    if not 0.0 <= rho < 1.0:
        raise InvalidInputError(f"rho must lie in [0, 1), got {rho}")
    s = t * (1.0 - rho)

    def build(km: int) -> np.ndarray:
        j = np.arange(km + 1, dtype=float)
        with np.errstate(divide="ignore"):
            jw = j * (1.0 - rho) * rho ** np.maximum(j - 1, 0)
        jw[0] = 0.0
        return _panjer(s, jw, km)

    if kmax is None:
        kmax = 64
        while kmax < _KMAX_LIMIT:
            p = build(kmax)
            if 1.0 - float(p.sum()) < _DEFAULT_TAIL_TARGET:
                break
            kmax *= 2
    else:
        p = build(kmax)
    return Pmf(p, max(0.0, 1.0 - float(p.sum())))


def geometric_cluster(rho: float, m: int) -> Pmf:
    """Geometric cluster-size law truncated at m, leftover in the tail bound."""
    if not 0.0 <= rho < 1.0:
        raise InvalidInputError(f"rho must lie in [0, 1), got {rho}")
    mass = np.zeros(m + 1)
    for j in range(1, m + 1):
        mass[j] = (1.0 - rho) * rho ** (j - 1)
    return Pmf(mass, max(0.0, 1.0 - float(mass.sum())))
