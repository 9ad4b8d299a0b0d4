"""Shift-invariant measures with exact cylinder probabilities.

Three families are shipped:

* ``BernoulliMeasure`` -- product measure, i.i.d. coordinates;
* ``MarkovMeasure`` -- stationary irreducible aperiodic finite chain;
* ``XorCoupledMeasure`` -- the image of a binary product measure under the
  sliding XOR map (x_i = u_i + u_{i+1} mod 2); its dependence coefficients
  vanish at every positive gap yet it is not a product measure.

Every model computes exact cylinder probabilities (linear and log space),
samples paths reproducibly, reports its uniform dependence coefficient
psi(m), and a per-symbol decay rate gamma with
max cylinder probability at length n <= exp(-gamma * n).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import InvalidInputError, NoPositiveRateError
from .words import Word, WordLike, as_symbols

_LOG_SPACE_CUTOFF = 50   # direct products below, exp(log-sum) above
_DP_VALIDATION_LEN = 64  # finite-length check horizon for the Markov rate


def _bit_sampler_threshold(p: float) -> int | None:
    """If p is an exact multiple of 1/256, the byte threshold; else None."""
    k = p * 256.0
    return int(k) if k == int(k) else None


class BernoulliMeasure:
    """Product measure with symbol probabilities ``probs``.

    Entries of 0 or 1 are tolerated so that deterministic paths can be
    simulated, but such a model is degenerate: it has no positive decay
    rate and the approximation bounds do not apply to it.
    """

    is_iid = True

    def __init__(self, probs: Sequence[float]):
        probs = tuple(float(p) for p in probs)
        if len(probs) < 2:
            raise InvalidInputError("need at least two symbols")
        if any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-9:
            raise InvalidInputError(f"probabilities must be >= 0 and sum to 1: {probs}")
        self.probs = probs
        self._log_probs = tuple(math.log(p) if p > 0 else -math.inf for p in probs)

    @classmethod
    def binary(cls, p1: float) -> "BernoulliMeasure":
        return cls((1.0 - p1, p1))

    @classmethod
    def uniform(cls, size: int) -> "BernoulliMeasure":
        return cls((1.0 / size,) * size)

    @property
    def alphabet_size(self) -> int:
        return len(self.probs)

    @property
    def is_degenerate(self) -> bool:
        return max(self.probs) >= 1.0

    def _check(self, word: WordLike) -> tuple[int, ...]:
        syms = as_symbols(word)
        if max(syms) >= len(self.probs):
            raise InvalidInputError(f"symbol {max(syms)} out of range for {self}")
        return syms

    def cylinder_prob(self, word: WordLike) -> float:
        syms = self._check(word)
        if len(syms) > _LOG_SPACE_CUTOFF:
            return math.exp(self.log_cylinder_prob(syms))
        out = 1.0
        for a in syms:
            out *= self.probs[a]
        return out

    def log_cylinder_prob(self, word: WordLike) -> float:
        syms = self._check(word)
        return sum(self._log_probs[a] for a in syms)

    def psi(self, m: int) -> float:
        if m < 0:
            raise InvalidInputError("gap must be >= 0")
        return 0.0

    def psi_is_upper_bound(self, m: int) -> bool:
        return False

    def gamma(self) -> float:
        pmax = max(self.probs)
        if pmax >= 1.0:
            raise NoPositiveRateError("a symbol has probability 1")
        return -math.log(pmax)

    def entropy(self) -> float:
        return -sum(p * math.log(p) for p in self.probs if p > 0)

    def sample_array(self, length: int, trials: int, rng: np.random.Generator) -> np.ndarray:
        if length < 1:
            raise InvalidInputError("path length must be >= 1")
        if len(self.probs) == 2:
            thresh = _bit_sampler_threshold(self.probs[1])
            if thresh is not None:
                words = (length + 7) // 8
                raw = rng.integers(
                    0, 2**64, size=(trials, words), dtype=np.uint64
                ).view(np.uint8)[:, :length]
                return (raw < thresh).view(np.uint8)
            return (rng.random((trials, length)) < self.probs[1]).view(np.uint8)
        cum = np.cumsum(self.probs)
        u = rng.random((trials, length))
        out = np.searchsorted(cum, u, side="right")
        return np.minimum(out, len(self.probs) - 1).astype(np.uint8)

    def __repr__(self):
        return f"BernoulliMeasure(probs={list(self.probs)})"


class MarkovMeasure:
    """Stationary measure of an irreducible aperiodic finite Markov chain."""

    is_iid = False

    def __init__(self, transition, stationary=None):
        P = np.asarray(transition, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 2:
            raise InvalidInputError("transition must be a square matrix, size >= 2")
        if np.any(P < 0) or np.any(np.abs(P.sum(axis=1) - 1.0) > 1e-12):
            raise InvalidInputError("rows must be nonnegative and sum to 1 within 1e-12")
        if not _is_primitive(P > 0):
            raise InvalidInputError("chain must be irreducible and aperiodic")
        self.transition = P
        pi = _stationary_vector(P) if stationary is None else np.asarray(stationary, float)
        if np.any(pi < 0) or abs(pi.sum() - 1.0) > 1e-9:
            raise InvalidInputError("stationary vector must be a probability vector")
        if np.max(np.abs(pi @ P - pi)) > 1e-10:
            raise InvalidInputError("stationary vector not fixed by the transition matrix")
        self.stationary = pi
        with np.errstate(divide="ignore"):
            self._logP = np.log(P)
            self._logpi = np.log(pi)

    @property
    def alphabet_size(self) -> int:
        return self.transition.shape[0]

    def _check(self, word: WordLike) -> tuple[int, ...]:
        syms = as_symbols(word)
        if max(syms) >= self.alphabet_size:
            raise InvalidInputError(f"symbol {max(syms)} out of range for {self!r}")
        return syms

    def cylinder_prob(self, word: WordLike) -> float:
        syms = self._check(word)
        if len(syms) > _LOG_SPACE_CUTOFF:
            lp = self.log_cylinder_prob(syms)
            return math.exp(lp) if lp > -math.inf else 0.0
        out = self.stationary[syms[0]]
        for a, b in zip(syms, syms[1:]):
            out *= self.transition[a, b]
        return float(out)

    def log_cylinder_prob(self, word: WordLike) -> float:
        syms = self._check(word)
        out = self._logpi[syms[0]]
        for a, b in zip(syms, syms[1:]):
            out += self._logP[a, b]
        return float(out)

    def psi(self, m: int) -> float:
        """Uniform dependence coefficient at gap m.

        The sup over events separated by an m-gap collapses, by the Markov
        property, to single-state atoms: max over (i, j) with positive
        stationary mass of |P^(m+1)(i,j) / pi_j - 1|.
        """
        if m < 0:
            raise InvalidInputError("gap must be >= 0")
        Pm = np.linalg.matrix_power(self.transition, m + 1)
        keep = self.stationary > 0
        ratios = Pm[:, keep] / self.stationary[keep]
        return float(np.max(np.abs(ratios - 1.0)))

    def psi_is_upper_bound(self, m: int) -> bool:
        return False

    def gamma(self) -> float:
        """Safe per-symbol decay rate for cylinder probabilities.

        Asymptotically the rate is the max-mean cycle of log transition
        weights; at short lengths the stationary prefactor can push the
        max cylinder probability above the pure cycle rate, so the value
        returned is the minimum of the cycle rate and the exact
        finite-length rates up to length 64.
        """
        spectral = -_max_mean_cycle(self._logP)
        rates = []
        m = np.array(self.stationary)
        for k in range(1, _DP_VALIDATION_LEN + 1):
            best = m.max()
            if best >= 1.0:
                raise NoPositiveRateError("a cylinder has probability 1")
            rates.append(-math.log(best) / k)
            m = np.max(m[:, None] * self.transition, axis=0)
        out = min(spectral, min(rates))
        if not out > 0:
            raise NoPositiveRateError("no positive decay rate for this chain")
        return out

    def entropy(self) -> float:
        P = self.transition
        with np.errstate(divide="ignore", invalid="ignore"):
            plogp = np.where(P > 0, P * np.log(P), 0.0)
        return float(-(self.stationary @ plogp.sum(axis=1)))

    def sample_array(self, length: int, trials: int, rng: np.random.Generator) -> np.ndarray:
        if length < 1:
            raise InvalidInputError("path length must be >= 1")
        cum_rows = np.cumsum(self.transition, axis=1)
        cum_pi = np.cumsum(self.stationary)
        out = np.empty((trials, length), dtype=np.uint8)
        top = self.alphabet_size - 1
        state = np.minimum(
            np.searchsorted(cum_pi, rng.random(trials), side="right"), top
        ).astype(np.uint8)
        out[:, 0] = state
        for i in range(1, length):
            u = rng.random(trials)
            state = np.minimum(
                (u[:, None] >= cum_rows[state]).sum(axis=1), top
            ).astype(np.uint8)
            out[:, i] = state
        return out

    def __repr__(self):
        return f"MarkovMeasure(size={self.alphabet_size})"


class XorCoupledMeasure:
    """Image of a binary product measure under the sliding XOR map.

    A cylinder [a_0..a_{n-1}] has exactly two preimage cylinders of
    length n+1, one starting with 0 and one with 1, built by
    alpha_{i+1} = alpha_i XOR a_i; the probability is the sum of the two
    product weights.  Dependence at any positive gap vanishes, while the
    gap-0 coefficient is only known through the explicit upper bound
    1 + 2(1/p0 + 1/p1), which is what psi(0) returns.
    """

    is_iid = False

    def __init__(self, p1: float):
        p1 = float(p1)
        if not 0.0 < p1 < 1.0:
            raise InvalidInputError(f"p1 must lie in (0,1), got {p1}")
        self.p1 = p1
        self.p0 = 1.0 - p1
        self._base = BernoulliMeasure.binary(p1)

    @property
    def alphabet_size(self) -> int:
        return 2

    def _preimages(self, word: WordLike) -> tuple[list[int], list[int]]:
        syms = as_symbols(word)
        if max(syms) > 1:
            raise InvalidInputError("XOR-coupled measure is binary")
        alpha = [0]
        for a in syms:
            alpha.append(alpha[-1] ^ a)
        beta = [1 - x for x in alpha]
        return alpha, beta

    def cylinder_prob(self, word: WordLike) -> float:
        alpha, beta = self._preimages(word)
        if len(alpha) > _LOG_SPACE_CUTOFF:
            return math.exp(self.log_cylinder_prob(word))
        p = (self.p0, self.p1)
        wa = wb = 1.0
        for x, y in zip(alpha, beta):
            wa *= p[x]
            wb *= p[y]
        return wa + wb

    def log_cylinder_prob(self, word: WordLike) -> float:
        alpha, beta = self._preimages(word)
        lp = (math.log(self.p0), math.log(self.p1))
        la = sum(lp[x] for x in alpha)
        lb = sum(lp[y] for y in beta)
        return float(np.logaddexp(la, lb))

    def psi(self, m: int) -> float:
        if m < 0:
            raise InvalidInputError("gap must be >= 0")
        if m >= 1:
            return 0.0
        return 1.0 + 2.0 * (1.0 / self.p0 + 1.0 / self.p1)

    def psi_is_upper_bound(self, m: int) -> bool:
        return m == 0

    def gamma(self) -> float:
        """Safe per-symbol rate -log(max(p0, p1)), valid at every length.

        The all-ones cylinder family decays at the sharper even-length
        rate ``gamma_even`` but other words (the all-zeros one) only decay
        at the marginal rate, so the safe rate is the marginal one.
        """
        return -math.log(max(self.p0, self.p1))

    @property
    def gamma_even(self) -> float:
        """Even-length decay rate of the all-ones cylinder family."""
        return -0.5 * math.log(self.p0 * self.p1)

    def entropy(self) -> float:
        # the sliding XOR map is two-to-one, which preserves entropy
        return self._base.entropy()

    def sample_array(self, length: int, trials: int, rng: np.random.Generator) -> np.ndarray:
        if length < 1:
            raise InvalidInputError("path length must be >= 1")
        u = self._base.sample_array(length + 1, trials, rng)
        return u[:, :-1] ^ u[:, 1:]

    def __repr__(self):
        return f"XorCoupledMeasure(p1={self.p1})"


MeasureModel = Union[BernoulliMeasure, MarkovMeasure, XorCoupledMeasure]


@dataclass(frozen=True)
class MixingProfile:
    """Dependence coefficients by gap plus the per-symbol decay rate."""

    psi: dict[int, float]
    gamma: float
    psi0_is_upper_bound: bool = False

    def __post_init__(self):
        vals = [self.psi[m] for m in sorted(self.psi)]
        if any(a < b - 1e-12 for a, b in zip(vals, vals[1:])):
            raise InvalidInputError("psi must be nonincreasing in the gap")
        if not self.gamma > 0:
            raise InvalidInputError("decay rate must be positive")


def mixing_profile(model: MeasureModel, max_gap: int) -> MixingProfile:
    psi = {m: model.psi(m) for m in range(max_gap + 1)}
    return MixingProfile(psi=psi, gamma=model.gamma(),
                         psi0_is_upper_bound=model.psi_is_upper_bound(0))


def sample_path(model: MeasureModel, length: int, seed: int) -> Word:
    """One path of the given length, reproducible from the seed."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return Word(tuple(int(a) for a in model.sample_array(length, 1, rng)[0]))


def cylinder_prob(model: MeasureModel, word: WordLike) -> float:
    return model.cylinder_prob(word)


def model_from_config(cfg: Union[dict, str]) -> MeasureModel:
    """Build a model from a JSON config.

    Accepted shapes: {"type":"bernoulli","probs":[...]},
    {"type":"markov","transition":[[...]]}, {"type":"xor","p1":0.75}.
    """
    if isinstance(cfg, str):
        cfg = json.loads(cfg)
    kind = cfg.get("type")
    if kind == "bernoulli":
        return BernoulliMeasure(cfg["probs"])
    if kind == "markov":
        return MarkovMeasure(cfg["transition"], cfg.get("stationary"))
    if kind == "xor":
        return XorCoupledMeasure(cfg["p1"])
    raise InvalidInputError(f"unknown model type {kind!r}")


def model_config(model: MeasureModel) -> dict:
    """Inverse of model_from_config, for embedding in reports."""
    if isinstance(model, BernoulliMeasure):
        return {"type": "bernoulli", "probs": list(model.probs)}
    if isinstance(model, MarkovMeasure):
        return {"type": "markov", "transition": model.transition.tolist()}
    if isinstance(model, XorCoupledMeasure):
        return {"type": "xor", "p1": model.p1}
    raise InvalidInputError(f"unknown model {model!r}")


def _is_primitive(mask: np.ndarray) -> bool:
    """Wielandt test: the chain is irreducible + aperiodic iff some power
    of the adjacency pattern (exponent at most (s-1)^2 + 1) is all-positive."""
    s = mask.shape[0]
    reach = np.eye(s, dtype=bool) | mask
    power = mask.copy()
    for _ in range((s - 1) ** 2 + 1):
        if power.all():
            return True
        power = (power @ mask) > 0
    return False


def _stationary_vector(P: np.ndarray) -> np.ndarray:
    s = P.shape[0]
    a = np.vstack([P.T - np.eye(s), np.ones(s)])
    b = np.zeros(s + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def _max_mean_cycle(logw: np.ndarray) -> float:
    """Karp's algorithm for the maximum mean cycle of a weighted digraph.

    ``logw[i, j]`` is the weight of edge i->j, -inf when absent.  The
    graph here is strongly connected, so the value is finite.
    """
    s = logw.shape[0]
    d = np.full((s + 1, s), -np.inf)
    d[0] = 0.0
    for k in range(1, s + 1):
        d[k] = np.max(d[k - 1][:, None] + logw, axis=0)
    best = -np.inf
    for v in range(s):
        if d[s, v] == -np.inf:
            continue
        ratios = [
            (d[s, v] - d[k, v]) / (s - k)
            for k in range(s)
            if d[k, v] > -np.inf
        ]
        if ratios:
            best = max(best, min(ratios))
    return float(best)
