"""Exact rational exponent calculus.

All parameter conditions, admissible-pair identities and Hölder splittings
are evaluated with :class:`fractions.Fraction`. No floating point value ever
enters this module: optimality is an exact identity and the strict theorem
bounds have to be decided, not approximated.

Infinite exponents are carried through their reciprocals (``1/q = 0``).
"""
import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple, Union

from .errors import DomainError, EligibilityError

logger = logging.getLogger(__name__)

RationalLike = Union[Fraction, int, str]

INF = "inf"

ZERO = Fraction(0)
HALF = Fraction(1, 2)
ONE = Fraction(1)


def to_rational(value: RationalLike) -> Fraction:
    """Convert an int, Fraction or decimal/ratio string to an exact Fraction."""
    if isinstance(value, bool):
        raise DomainError(f"not a rational: {value!r}")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as e:
            raise DomainError(f"not a rational: {value!r}") from e
    raise DomainError(f"floats are not accepted by the exponent calculus: {value!r}")


def reciprocal(value: Union[RationalLike, None]) -> Fraction:
    """Reciprocal of an extended rational; ``"inf"`` and ``None`` map to 0."""
    if value is None or (isinstance(value, str) and value.strip().lower() in ("inf", "∞")):
        return ZERO
    v = to_rational(value)
    if v == 0:
        raise DomainError("exponent 0 has no reciprocal")
    return 1 / v


def format_exponent(inverse: Fraction) -> str:
    """Render an extended rational given through its reciprocal."""
    if inverse == 0:
        return "∞"
    return str(1 / inverse)


class Theorem(str, Enum):
    """Theorem regimes whose hypotheses can be checked."""

    T1_1 = "t1.1"
    T1_2 = "t1.2"
    T1_3 = "t1.3"


@dataclass(frozen=True)
class Params:
    """Equation parameters: nonlinearity power, weight power, regularity, dimension."""

    alpha: Fraction
    b: Fraction
    s: Fraction = ZERO
    n: int = 3

    def __post_init__(self):
        object.__setattr__(self, "alpha", to_rational(self.alpha))
        object.__setattr__(self, "b", to_rational(self.b))
        object.__setattr__(self, "s", to_rational(self.s))
        problems = []
        if self.alpha <= 0:
            problems.append("alpha > 0")
        if self.b <= 0:
            problems.append("b > 0")
        if self.s < 0:
            problems.append("s >= 0")
        if self.n < 2:
            problems.append("n >= 2")
        if problems:
            raise DomainError("Params invariants violated: " + ", ".join(problems))


class PairStatus(str, Enum):
    NOT_ADMISSIBLE = "not_admissible"
    ADMISSIBLE = "admissible"
    OPTIMAL = "optimal"


@dataclass(frozen=True)
class AdmissiblePair:
    """A time/space exponent pair (q, r) stored through its reciprocals.

    ``r`` is the index of the admissibility condition; norms are taken in
    the spatial Lebesgue exponent ``3r``.
    """

    inv_q: Fraction
    inv_r: Fraction
    n: int = 3

    @classmethod
    def of(cls, q: Union[RationalLike, None], r: Union[RationalLike, None], n: int = 3) -> "AdmissiblePair":
        return cls(reciprocal(q), reciprocal(r), n)

    @property
    def q(self) -> Optional[Fraction]:
        """Time exponent, ``None`` for infinity."""
        return None if self.inv_q == 0 else 1 / self.inv_q

    @property
    def r(self) -> Optional[Fraction]:
        return None if self.inv_r == 0 else 1 / self.inv_r

    @property
    def gamma_r(self) -> Optional[Fraction]:
        """gamma(r), or None when r < 2 puts it outside the domain."""
        if self.inv_r < 0 or self.inv_r > HALF:
            return None
        return (self.n - 1) * (HALF - self.inv_r)

    def label(self) -> str:
        return f"({format_exponent(self.inv_q)}, {format_exponent(self.inv_r)})"

    def as_record(self) -> Dict[str, str]:
        gamma = self.gamma_r
        return {
            "q": format_exponent(self.inv_q),
            "r": format_exponent(self.inv_r),
            "n": str(self.n),
            "gamma_r": str(gamma) if gamma is not None else "undefined",
        }


@dataclass(frozen=True)
class PairClassification:
    pair: AdmissiblePair
    status: PairStatus
    failed: Tuple[str, ...] = ()

    @property
    def is_optimal(self) -> bool:
        return self.status is PairStatus.OPTIMAL


@dataclass(frozen=True)
class HoelderSplit:
    """Lebesgue exponents of the nonlinear-estimate Hölder splittings."""

    gamma_lebesgue: Optional[Fraction]
    r1: Optional[Fraction] = None
    r2: Optional[Fraction] = None
    p1: Optional[Fraction] = None
    p2: Optional[Fraction] = None
    n: int = 3


def gamma_of(r: Union[RationalLike, None], n: int = 3) -> Fraction:
    """gamma(r) = (n-1)(1/2 - 1/r) for r >= 2 (``"inf"`` allowed)."""
    inv_r = reciprocal(r)
    if inv_r < 0 or inv_r > HALF:
        raise DomainError(f"gamma(r) needs r >= 2, got r = {format_exponent(inv_r)}")
    return (n - 1) * (HALF - inv_r)


def classify_pair(pair: AdmissiblePair) -> PairClassification:
    """Classify a pair as not admissible, admissible or optimal; total function."""
    failed: List[str] = []
    if not (0 <= pair.inv_q <= HALF):
        failed.append("2 <= q <= inf")
    if not (0 <= pair.inv_r <= HALF):
        failed.append("2 <= r <= inf")
    gamma = pair.gamma_r
    two_over_q = 2 * pair.inv_q
    if gamma is not None:
        if pair.inv_q == HALF and pair.inv_r == 0 and gamma == 1:
            failed.append("(q, r, gamma(r)) != (2, inf, 1)")
        if not (0 <= two_over_q):
            failed.append("0 <= 2/q")
        if not (two_over_q <= gamma):
            failed.append("2/q <= gamma(r)")
        if not (gamma <= 1):
            failed.append("gamma(r) <= 1")
    if failed:
        return PairClassification(pair, PairStatus.NOT_ADMISSIBLE, tuple(failed))
    if two_over_q == gamma:
        return PairClassification(pair, PairStatus.OPTIMAL)
    return PairClassification(pair, PairStatus.ADMISSIBLE)


def _alpha_bound_t11(b: Fraction) -> Fraction:
    return (4 - 2 * b) / 3


def _check_alpha_t11(alpha: Fraction, b: Optional[Fraction]) -> None:
    if alpha <= 0:
        raise EligibilityError("0 < α")
    if b is None:
        # sup of (4-2b)/3 over b > 0, open
        if alpha >= Fraction(4, 3):
            raise EligibilityError("α < 4/3")
        return
    if not (0 < b < 2):
        raise EligibilityError("0 < b < 2")
    if not alpha < _alpha_bound_t11(b):
        raise EligibilityError("α < (4−2b)/3")


def theta1(alpha: RationalLike, b: Optional[RationalLike] = None) -> Fraction:
    """Time power (4 - α)/2 of the unweighted Hölder step."""
    a = to_rational(alpha)
    _check_alpha_t11(a, to_rational(b) if b is not None else None)
    value = (4 - a) / 2
    assert value > 0
    return value


def gamma_interval(b: RationalLike) -> Tuple[Fraction, Fraction]:
    """Open interval (2, 3/b) of Lebesgue exponents keeping |x|^{-b} in L^γ(B)."""
    bb = to_rational(b)
    if bb <= 0:
        raise DomainError("b > 0 required")
    upper = 3 / bb
    if upper <= 2:
        raise DomainError(f"(2, 3/b) is empty for b = {bb}")
    return Fraction(2), upper


def default_gamma(b: RationalLike) -> Fraction:
    """Midpoint of (2, 3/b)."""
    low, high = gamma_interval(b)
    return (low + high) / 2


def _check_gamma(gamma: Fraction, b: Fraction) -> None:
    low, high = Fraction(2), 3 / b
    if not (low < gamma < high):
        raise DomainError(f"γ = {gamma} outside (2, 3/b) = (2, {high})")


def theta2(alpha: RationalLike, gamma_lebesgue: RationalLike, b: RationalLike) -> Fraction:
    """Time power (αγ + 4γ - 6)/(2γ(α + 1)) of the weighted Hölder step."""
    a = to_rational(alpha)
    g = to_rational(gamma_lebesgue)
    bb = to_rational(b)
    _check_gamma(g, bb)
    if a <= 0:
        raise DomainError("α > 0 required")
    return (a * g + 4 * g - 6) / (2 * g * (a + 1))


def _lemma31_inverses(alpha: Fraction, gamma: Fraction) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
    """Reciprocal exponents (1/q1, 1/r1, 1/q2, 1/r2) of the two pairs."""
    inv_q1 = (alpha - 2) / (2 * (alpha + 1))
    inv_r1 = Fraction(3) / (2 * (alpha + 1))
    inv_q2 = ((alpha - 2) * gamma + 6) / (2 * gamma * (alpha + 1))
    inv_r2 = 3 * (gamma - 2) / (2 * gamma * (alpha + 1))
    return inv_q1, inv_r1, inv_q2, inv_r2


def _optimality_defect(inv_q: Fraction, inv_r: Fraction, n: int = 3) -> Fraction:
    """2/q - gamma(r), evaluated formally (no domain restriction on r)."""
    return 2 * inv_q - (n - 1) * (HALF - inv_r)


@dataclass
class Lemma31Pairs:
    first: PairClassification
    second: PairClassification
    first_identity: bool
    second_identity: bool
    anomalies: List[str] = field(default_factory=list)


def lemma31_pairs(alpha: RationalLike, gamma_lebesgue: RationalLike, b: RationalLike) -> Lemma31Pairs:
    """Build the two pairs of the unweighted/weighted Hölder steps.

    The optimality identity 2/q = γ(r) is checked exactly; a negative time
    exponent is reported as an anomaly, never raised.
    """
    a = to_rational(alpha)
    g = to_rational(gamma_lebesgue)
    bb = to_rational(b)
    _check_alpha_t11(a, bb)
    _check_gamma(g, bb)
    inv_q1, inv_r1, inv_q2, inv_r2 = _lemma31_inverses(a, g)
    first = AdmissiblePair(inv_q1, inv_r1)
    second = AdmissiblePair(inv_q2, inv_r2)
    anomalies = []
    for name, pair in (("first", first), ("second", second)):
        if pair.inv_q < 0:
            message = f"{name} pair has negative time exponent q = {format_exponent(pair.inv_q)}"
            logger.warning(message)
            anomalies.append(message)
    return Lemma31Pairs(
        first=classify_pair(first),
        second=classify_pair(second),
        first_identity=_optimality_defect(inv_q1, inv_r1) == 0,
        second_identity=_optimality_defect(inv_q2, inv_r2) == 0,
        anomalies=anomalies,
    )


def _vanishes_identically(poly: Callable[..., Fraction], n_vars: int, degree_bound: int, start: int = 3) -> bool:
    """Decide whether a polynomial of per-variable degree <= degree_bound is zero.

    A nonzero polynomial of that degree cannot vanish on a full
    (degree_bound + 1)^n_vars grid of distinct points.
    """
    nodes = [Fraction(start + k) for k in range(degree_bound + 1)]
    return all(poly(*point) == 0 for point in itertools.product(nodes, repeat=n_vars))


def verify_pair_identities(degree_bound: int = 4) -> Dict[str, bool]:
    """Certify both optimality identities as polynomial identities in α (and γ).

    Denominators are cleared with (α + 1) and γ(α + 1) respectively. Grid
    nodes start at 3 so no denominator vanishes.
    """

    def first(alpha: Fraction) -> Fraction:
        inv_q1, inv_r1, _, _ = _lemma31_inverses(alpha, Fraction(3))
        return (alpha + 1) * _optimality_defect(inv_q1, inv_r1)

    def second(alpha: Fraction, gamma: Fraction) -> Fraction:
        _, _, inv_q2, inv_r2 = _lemma31_inverses(alpha, gamma)
        return gamma * (alpha + 1) * _optimality_defect(inv_q2, inv_r2)

    return {
        "first_pair": _vanishes_identically(first, 1, degree_bound),
        "second_pair": _vanishes_identically(second, 2, degree_bound),
    }


@dataclass(frozen=True)
class HypothesisCheck:
    inequality: str
    holds: bool


@dataclass
class EligibilityReport:
    theorem: Theorem
    params: Params
    checks: List[HypothesisCheck]
    auxiliary: Dict[str, str] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.holds for c in self.checks)

    @property
    def violations(self) -> List[str]:
        return [f"{c.inequality} violated" for c in self.checks if not c.holds]


def validate_params(p: Params, theorem: Union[Theorem, str]) -> EligibilityReport:
    """Check each hypothesis of the chosen theorem exactly."""
    theorem = Theorem(theorem)
    a, b, s = p.alpha, p.b, p.s
    aux: Dict[str, str] = {}
    if theorem in (Theorem.T1_1, Theorem.T1_2):
        checks = [
            HypothesisCheck("0 < α", a > 0),
            HypothesisCheck("α < (4−2b)/3", a < _alpha_bound_t11(b)),
            HypothesisCheck("0 < b < 2", 0 < b < 2),
        ]
        aux["alpha_bound"] = str(_alpha_bound_t11(b))
        if 3 / b > 2:
            aux["gamma_interval"] = f"(2, {3 / b})"
        else:
            aux["gamma_interval"] = "empty for b >= 3/2; weighted Hölder step unavailable"
        p_exp = a + 1
        if p_exp > 1:
            aux["gagliardo_nirenberg_index"] = str(Fraction(3, 2) - 2 / (p_exp - 1))
    else:
        checks = [
            HypothesisCheck("1/2 < b < 3/2", HALF < b < Fraction(3, 2)),
            HypothesisCheck("0 < s", s > 0),
            HypothesisCheck("s < b − 1/2", s < b - HALF),
            HypothesisCheck("0 < α", a > 0),
            HypothesisCheck("α < (4−2b)/(3−2s)", 3 - 2 * s > 0 and a < (4 - 2 * b) / (3 - 2 * s)),
        ]
        aux["alpha_bound"] = str((4 - 2 * b) / (3 - 2 * s)) if 3 - 2 * s != 0 else "undefined"
        aux["weight_exponent"] = str(b + s)
        aux["weight_in_L2_of_ball"] = str(2 * (b + s) < p.n)
    report = EligibilityReport(theorem, p, checks, aux)
    if not report.passed:
        logger.info(f"Params {p} fail {theorem.value}: {', '.join(report.violations)}")
    return report


def lemma41_split(p: Params, p2: Optional[RationalLike] = None) -> Tuple[HoelderSplit, Dict[str, object]]:
    """Hölder split of the Ḣ^s nonlinear estimate.

    Returns the split and the exponent pair used for the ‖|u|^α D^s u‖ term,
    together with its classification.
    """
    a, b, s = p.alpha, p.b, p.s
    if a + 1 - 2 * s * a <= 0 or 3 - 2 * b <= 0:
        raise DomainError("p2 lower bound undefined: need α+1−2sα > 0 and b < 3/2")
    bound = max(6 / (a + 1 - 2 * s * a), 6 / (3 - 2 * b))
    chosen = bound + 1 if p2 is None else to_rational(p2)
    if not chosen > bound:
        raise DomainError(f"p2 = {chosen} must exceed {bound}")
    r2 = 1 / (HALF - 1 / chosen)
    info: Dict[str, object] = {"p2_lower_bound": bound, "r2_below_3_over_b": r2 < 3 / b}

    # weight term D^s|x|^{-b} ~ |x|^{-b-s} is in L^{r1}(B) for (b+s) r1 < n
    r1 = p1 = None
    upper_r1 = Fraction(p.n) / (b + s)
    if upper_r1 > 2:
        r1 = (2 + upper_r1) / 2
        p1 = 1 / (HALF - 1 / r1)
    else:
        info["r1_unavailable"] = "|x|^{-b-s} not in any L^{r1}(B) with r1 >= 2"

    spatial = (1 + 1 / a) / (1 / (a * chosen) + s / 3)
    denom = 1 + 1 / a - 6 / (a * chosen) - 2 * s
    inv_q = denom / (2 * (1 + 1 / a))
    pair = AdmissiblePair(inv_q, 3 / spatial)
    info["pair"] = classify_pair(pair)
    if inv_q < 0:
        info["anomaly"] = f"Ḣ^s pair has negative time exponent q = {format_exponent(inv_q)}"
    gamma = None
    if b < Fraction(3, 2):
        gamma = default_gamma(b)
    split = HoelderSplit(gamma_lebesgue=gamma, r1=r1, r2=r2, p1=p1, p2=chosen, n=p.n)
    return split, info


def default_pair_set(p: Params, gamma_lebesgue: Optional[RationalLike] = None) -> List[AdmissiblePair]:
    """The finite pair set standing in for the supremum over optimal pairs.

    {(∞, 2), (4, 4)} plus each Hölder-step pair from lemma31_pairs that classifies as optimal.
    """
    pairs = [AdmissiblePair.of(INF, 2, p.n), AdmissiblePair.of(4, 4, p.n)]
    if p.n != 3 or not (0 < p.alpha < _alpha_bound_t11(p.b)) or p.b >= Fraction(3, 2):
        return pairs
    g = to_rational(gamma_lebesgue) if gamma_lebesgue is not None else default_gamma(p.b)
    built = lemma31_pairs(p.alpha, g, p.b)
    for cls in (built.first, built.second):
        if cls.is_optimal and cls.pair not in pairs:
            pairs.append(cls.pair)
    return pairs


@dataclass
class ExponentSweep:
    """Sweep rows plus the (α, b) and (α, b, γ) points where θ₁ or θ₂ fail to be positive."""

    rows: List[Dict[str, Fraction]]
    theta1_counterexamples: List[Tuple[Fraction, Fraction]] = field(default_factory=list)
    theta2_counterexamples: List[Tuple[Fraction, Fraction, Fraction]] = field(default_factory=list)
    sign_anomalies: int = 0

    @property
    def points(self) -> List[Tuple[Fraction, Fraction]]:
        return sorted({(r["alpha"], r["b"]) for r in self.rows})

    def add_point(self, a: Fraction, b: Fraction, count: int) -> None:
        low, high = gamma_interval(b)
        gammas = [low + (high - low) * Fraction(j, count + 1) for j in range(1, count + 1)]
        t1 = theta1(a, b)
        if t1 <= 0:
            self.theta1_counterexamples.append((a, b))
        if _lemma31_inverses(a, gammas[0])[0] < 0:
            self.sign_anomalies += 1
        for g in gammas:
            t2 = theta2(a, g, b)
            if a * g + 4 * g > 6 and t2 <= 0:
                self.theta2_counterexamples.append((a, b, g))
            self.rows.append({"alpha": a, "b": b, "gamma": g, "theta1": t1, "theta2": t2})


def exponent_sweep(b: RationalLike, count: int = 100) -> ExponentSweep:
    """Evaluate θ₁, θ₂ on a count × count interior rational grid of (α, γ) at fixed b."""
    bb = to_rational(b)
    alpha_max = _alpha_bound_t11(bb)
    sweep = ExponentSweep(rows=[])
    for i in range(1, count + 1):
        sweep.add_point(alpha_max * Fraction(i, count + 1), bb, count)
    return sweep


def region_sweep(count: int = 10, gamma_count: int = 10) -> ExponentSweep:
    """θ₁, θ₂ over a count × count interior lattice of the eligible (α, b) region.

    b runs over (0, 3/2) where the Lebesgue interval (2, 3/b) is nonempty; at each b,
    α runs over (0, (4 − 2b)/3) and γ over gamma_count interior points of (2, 3/b).
    """
    sweep = ExponentSweep(rows=[])
    for j in range(1, count + 1):
        b = Fraction(3, 2) * Fraction(j, count + 1)
        alpha_max = _alpha_bound_t11(b)
        for i in range(1, count + 1):
            sweep.add_point(alpha_max * Fraction(i, count + 1), b, gamma_count)
    return sweep
