"""Closed-form error bounds for the four approximation laws.

Every evaluator takes a ``BoundInputs`` bundle, checks its hypotheses
(raising ``HypothesisError`` / ``WrongModelError`` otherwise), and returns
the formula value verbatim.  Values above 1 are returned as computed; they
are still valid bounds on a total-variation quantity, just vacuous.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .distributions import wp
from .errors import HypothesisError, InvalidInputError, WrongModelError
from .measures import MeasureModel
from .recurrence import RecurrenceSpec, gap_profile, kappa as kappa_of, rho as rho_of
from .words import WordLike, as_symbols, principal_period

_T_FLOOR = 1e-9  # below this the 1/t factors are treated as infinite


def psi_threshold(ell: int) -> float:
    """Largest admissible psi_n: (3/2)^(1/(ell+1)) - 1."""
    return 1.5 ** (1.0 / (ell + 1)) - 1.0


@dataclass(frozen=True)
class BoundInputs:
    """Everything the four bound formulas read.

    ``decay_rate`` is the per-symbol rate Gamma with max cylinder
    probability at length n bounded by exp(-Gamma n); ``gap_start`` is
    gamma(n), the first index from which the lag tracks stay 2n apart.
    """

    n: int
    ell: int
    t: float
    prob_word: float
    prob_period_prefix: float
    r: int
    d_max: int
    kappa: int
    rho: float
    psi0: float
    psi_n: float
    decay_rate: float
    gap_start: int
    iid: bool = False

    def __post_init__(self):
        if min(self.n, self.ell, self.r, self.d_max, self.kappa) < 1:
            raise InvalidInputError("n, ell, r, d_max, kappa must be >= 1")
        if not (0.0 < self.prob_word <= 1.0 and 0.0 < self.prob_period_prefix <= 1.0):
            raise InvalidInputError("cylinder probabilities must lie in (0, 1]")
        if not (0.0 <= self.rho <= 1.0):
            raise InvalidInputError("rho must lie in [0, 1]")
        if self.t < 0 or self.gap_start < 0:
            raise InvalidInputError("t and gap_start must be >= 0")
        if not self.decay_rate > 0:
            raise InvalidInputError("decay rate must be positive")
        if self.psi_n > self.psi0 + 1e-12 or self.psi0 < 0:
            raise InvalidInputError("need 0 <= psi_n <= psi0")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "BoundInputs":
        return cls(**obj)


def bound_inputs(model: MeasureModel, word: WordLike, spec: RecurrenceSpec) -> BoundInputs:
    """Assemble the bundle for one (model, word, spec) configuration."""
    syms = as_symbols(word)
    n = len(syms)
    r = principal_period(syms)
    return BoundInputs(
        n=n,
        ell=spec.ell,
        t=spec.t,
        prob_word=model.cylinder_prob(syms),
        prob_period_prefix=model.cylinder_prob(syms[:r]),
        r=r,
        d_max=spec.d_max,
        kappa=kappa_of(r, spec),
        rho=rho_of(model, syms, spec),
        psi0=model.psi(0),
        psi_n=model.psi(n),
        decay_rate=model.gamma(),
        gap_start=gap_profile(spec, n).gamma,
        iid=getattr(model, "is_iid", False),
    )


def _check_psi(bi: BoundInputs) -> None:
    thr = psi_threshold(bi.ell)
    if not bi.psi_n < thr:
        raise HypothesisError(
            f"psi_n = {bi.psi_n} is not below the threshold "
            f"(3/2)^(1/(ell+1)) - 1 = {thr}"
        )


def _check_long_word(bi: BoundInputs) -> None:
    if not bi.n > bi.r * (bi.d_max + 6):
        raise HypothesisError(
            f"need n > r*(d_max+6) = {bi.r * (bi.d_max + 6)}, got n = {bi.n}"
        )


def _one_plus_inverse(t: float) -> float:
    return math.inf if t < _T_FLOOR else 1.0 + 1.0 / t


def poisson_approximation_bound(bi: BoundInputs) -> float:
    """TV error of the Poisson(t) approximation to the count law."""
    _check_psi(bi)
    gap_term = 0.0 if bi.gap_start == 0 else bi.gap_start * _one_plus_inverse(bi.t)
    if math.isinf(gap_term):
        return math.inf
    return (
        16.0 * bi.prob_word * (bi.ell**2 * bi.n * bi.t + gap_term)
        + 6.0 * bi.prob_period_prefix * bi.t * bi.n * bi.ell**2 * (1.0 + bi.psi0)
        + 2.0 * wp(2.0**bi.ell * bi.t * bi.psi_n + bi.gap_start * bi.prob_word)
    )


def compound_poisson_approximation_bound(bi: BoundInputs) -> float:
    """TV error of the general compound-Poisson approximation, valid for
    words longer than r*(d_max+6)."""
    _check_psi(bi)
    _check_long_word(bi)
    mix = (1.0 + bi.psi0) ** (2 * bi.ell)
    decay = math.exp(-bi.decay_rate * bi.n / 2.0)
    return 2.0 ** (2 * bi.ell + 7) * mix * (
        bi.d_max * bi.ell**2 * bi.n**4 * decay
        + bi.psi_n / (1.0 - math.exp(-bi.decay_rate))
    ) + 2.0 * wp(
        10.0 * mix * bi.d_max * bi.n**2 * (bi.t + 1.0) * decay
        + 2.0**bi.ell * bi.t * bi.psi_n
    )


def hitting_time_law_bound(bi: BoundInputs) -> float:
    """Error of the exponential law exp(-(1-rho) t) for the rescaled
    first-hit time; infinite below t = 1e-9 where the 1/t factor blows up."""
    _check_psi(bi)
    if bi.t < _T_FLOOR:
        return math.inf
    mix = (1.0 + bi.psi0) ** (2 * bi.ell)
    return 2.0 ** (2 * bi.ell + 8) * mix * (bi.t + 1.0) * (
        bi.psi_n / (1.0 - math.exp(-bi.decay_rate))
        + bi.d_max
        * bi.ell**2
        * bi.n**4
        * (1.0 + 1.0 / bi.t)
        * math.exp(-bi.decay_rate * bi.n / (bi.d_max + 6))
    ) + 2.0 * wp(
        2.0**bi.ell * bi.t * bi.psi_n
        + 10.0
        * math.exp(-bi.decay_rate * bi.n / 2.0)
        * mix
        * bi.d_max
        * bi.n**2
        * (bi.t + 1.0)
    )


def polya_aeppli_approximation_bound(bi: BoundInputs) -> float:
    """TV error of the geometric-cluster compound approximation; product
    (i.i.d.) measures only."""
    if not bi.iid:
        raise WrongModelError("the geometric-cluster bound needs an i.i.d. model")
    _check_long_word(bi)
    decay = math.exp(-bi.decay_rate * bi.n / 2.0)
    n0 = bi.n // bi.r
    if bi.t < _T_FLOOR:
        poisson_tail = 0.0
    else:
        poisson_tail = math.exp(
            (n0 + 1) * math.log(bi.t) - math.lgamma(n0 + 2)
        )
    return (
        2.0 ** (2 * bi.ell + 8) * (bi.t + 1.0) * bi.ell**2 * bi.d_max * bi.n**4 * decay
        + 2.0 * wp(12.0 * bi.d_max * bi.n**2 * (bi.t + 1.0) * decay)
        + poisson_tail
    )


BOUNDS = {
    "poisson": poisson_approximation_bound,
    "compound": compound_poisson_approximation_bound,
    "hitting": hitting_time_law_bound,
    "polya-aeppli": polya_aeppli_approximation_bound,
}
