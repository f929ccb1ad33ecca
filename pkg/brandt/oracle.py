import logging
from dataclasses import dataclass, field

from django.db import models
from sympy import divisors, eye, isprime

from .arith import valuation
from .exceptions import ConsistencyError, CoverageError, ParameterError
from .fixtures import LocalKind
from .hecke import CharPoly, CheckResult, HeckeModule, admissible_characters
from .lattice import rref_mod, to_fraction
from .orders import EType, OrderKind, build_order

logger = logging.getLogger(__name__)


class Multiplicity(models.TextChoices):
    ZERO = 'zero', 'Zero'
    ONE = 'one', 'One'
    TWO = 'two', 'Two'
    CONJECTURAL_ONE = 'conjectural-one', 'One (conjectural)'
    UNKNOWN = 'unknown', 'Unknown'


class Confidence(models.TextChoices):
    PROVEN = 'proven', 'Proven'
    CONJECTURAL = 'conjectural', 'Conjectural'
    UNKNOWN = 'unknown', 'Unknown'


class Outcome(models.TextChoices):
    VERIFIED = 'verified', 'Verified'
    CONFIRMED = 'confirmed-conjectural', 'Verified, conjectural terms confirmed'
    FALSIFIED = 'falsified', 'Falsified'
    UNKNOWN = 'unknown', 'Cannot conclude'


class Comparison(models.TextChoices):
    MATCH = 'match', 'Char polys equal'
    TRACE_MATCH = 'trace-match', 'Degree and trace equal'
    MISMATCH = 'mismatch', 'Mismatch'
    UNDETERMINED = 'undetermined', 'No prediction'


MULTIPLICITY_VALUES = {
    Multiplicity.ZERO: 0,
    Multiplicity.ONE: 1,
    Multiplicity.TWO: 2,
    Multiplicity.CONJECTURAL_ONE: 1,
    Multiplicity.UNKNOWN: None,
}

CONFIDENCE_ORDER = [Confidence.PROVEN, Confidence.CONJECTURAL, Confidence.UNKNOWN]


def confidence_of(multiplicity):
    if multiplicity == Multiplicity.UNKNOWN:
        return Confidence.UNKNOWN
    if multiplicity == Multiplicity.CONJECTURAL_ONE:
        return Confidence.CONJECTURAL
    return Confidence.PROVEN


def weakest(confidences):
    return max(confidences, key=CONFIDENCE_ORDER.index, default=Confidence.PROVEN)


# Local multiplicities

def _ramified_rule(rep, p, r, dyadic_t, twist_conductor):
    if rep.one_dimensional:
        if rep.kind == LocalKind.STEINBERG:
            return Multiplicity.ONE
        # norms of units of a ramified E are squares mod p, so the twist survives on O^x
        return Multiplicity.ONE if p != 2 else Multiplicity.UNKNOWN
    if rep.minimal:
        if rep.c % 2 == 0:
            return Multiplicity.TWO
        if p != 2:
            return Multiplicity.CONJECTURAL_ONE
        return Multiplicity.ONE if rep.c == 3 else Multiplicity.UNKNOWN
    if p != 2:
        return Multiplicity.ZERO
    if dyadic_t is not None and twist_conductor is not None:
        if rep.c >= 2 * dyadic_t + 4 and rep.c - twist_conductor > dyadic_t:
            return Multiplicity.ZERO
    return Multiplicity.UNKNOWN


def _unramified_rule(rep):
    if rep.kind == LocalKind.STEINBERG:
        return Multiplicity.ONE
    if rep.kind == LocalKind.SPECIAL_TWIST:
        # norms of units of an unramified E cover Z_p^x
        return Multiplicity.ZERO
    if rep.minimal and rep.c % 2:
        return Multiplicity.ONE
    return Multiplicity.ZERO


def local_multiplicity(rep, local, twist_conductor=None):
    """
    dim of the invariants of the quaternionic partner of rep under the
    local order, for a trivial central character.

    Args:
        rep: LocalRepDescriptor of the newform at p | D
        local: LocalOrderType of the order at p
        twist_conductor: conductor exponent of a minimal twist, used only
            for non-minimal dyadic representations

    Returns:
        Multiplicity; never more than e(E/F)
    """
    if local.kind == OrderKind.SPLIT_EICHLER:
        raise ParameterError(f"local_multiplicity applies at primes of the discriminant, not {local.prime}")
    if rep.kind == LocalKind.UNKNOWN:
        result = Multiplicity.UNKNOWN
    elif not rep.discrete_series or rep.c > local.exponent:
        result = Multiplicity.ZERO
    elif local.etype == EType.UNRAMIFIED:
        result = _unramified_rule(rep)
    else:
        result = _ramified_rule(rep, local.prime, local.exponent, local.dyadic_t, twist_conductor)
    value = MULTIPLICITY_VALUES[result]
    if value is not None and value > local.ramification_index:
        raise ConsistencyError(f"Local multiplicity {value} exceeds e(E/F) = {local.ramification_index}")
    return result


def record_multiplicity(record, order):
    """
    Multiplicity of a newform in the Brandt module of order.

    Returns:
        (multiplicity or None when unknown, Confidence)
    """
    value = 1
    confidences = []
    unknown = False
    for local in order.local_types:
        if local.kind == OrderKind.SPLIT_EICHLER:
            value *= local.exponent - valuation(record.level, local.prime) + 1
            continue
        result = local_multiplicity(record.local(local.prime), local)
        if result == Multiplicity.ZERO:
            return 0, Confidence.PROVEN
        confidences.append(confidence_of(result))
        if result == Multiplicity.UNKNOWN:
            unknown = True
        else:
            value *= MULTIPLICITY_VALUES[result]
    if unknown:
        return None, Confidence.UNKNOWN
    return value, weakest(confidences)


# Global decomposition

@dataclass
class PredictionTerm:
    level: int
    selector: str
    labels: list
    dimension: int
    multiplicity: int
    confidence: str
    records: list = field(default_factory=list, repr=False)


@dataclass
class DecompositionPrediction:
    discriminant: int
    level: int
    terms: list
    predicted_eisenstein_dimension: int

    @property
    def confidence(self):
        return weakest(term.confidence for term in self.terms)

    @property
    def predicted_cusp_dimension(self):
        if any(term.multiplicity is None for term in self.terms):
            return None
        return sum(term.multiplicity * term.dimension for term in self.terms)

    @property
    def predicted_h(self):
        cusp = self.predicted_cusp_dimension
        return None if cusp is None else cusp + self.predicted_eisenstein_dimension

    def to_text(self):
        lines = [f"level {self.level} discriminant {self.discriminant}"]
        lines.append(f"eisenstein dimension {self.predicted_eisenstein_dimension}")
        for term in self.terms:
            multiplicity = '?' if term.multiplicity is None else term.multiplicity
            lines.append(
                f"{term.level} {term.selector} x{multiplicity} dim {term.dimension} "
                f"[{term.confidence}] {' '.join(term.labels)}"
            )
        lines.append(f"cusp dimension {self.predicted_cusp_dimension}")
        lines.append(f"confidence {self.confidence}")
        return '\n'.join(lines)


def _selector(record, order):
    parts = []
    for local in order.local_types:
        if local.kind == OrderKind.SPLIT_EICHLER:
            continue
        rep = record.local(local.prime)
        suffix = '-nonminimal' if rep.minimal is False and not rep.one_dimensional else ''
        parts.append(f"{rep.kind}{suffix}@{local.prime}")
    return ','.join(parts)


def predict_decomposition(D, N, db, etypes=None, variants=None, order=None):
    """
    Newform content of the Brandt module of level N predicted from fixture local types.

    Raises:
        CoverageError: when a level N' with D | N' | N is not fully covered by db
    """
    order = order or build_order(D, N, etypes=etypes, variants=variants)
    D, N = order.discriminant, order.level
    levels = [int(d) for d in divisors(N) if d % D == 0]
    missing = db.missing_levels(levels)
    if missing:
        raise CoverageError(missing)

    groups = {}
    for level in levels:
        for record in db.records_at(level):
            multiplicity, confidence = record_multiplicity(record, order)
            if multiplicity == 0:
                continue
            key = (level, _selector(record, order), multiplicity, confidence)
            groups.setdefault(key, []).append(record)
    terms = [
        PredictionTerm(
            level=level,
            selector=selector,
            labels=[record.label for record in records],
            dimension=sum(record.dim for record in records),
            multiplicity=multiplicity,
            confidence=confidence,
            records=records,
        )
        for (level, selector, multiplicity, confidence), records in groups.items()
    ]
    terms.sort(key=lambda term: (term.level, term.selector, term.labels))
    prediction = DecompositionPrediction(
        discriminant=D,
        level=N,
        terms=terms,
        predicted_eisenstein_dimension=len(admissible_characters(order)),
    )
    if prediction.confidence != Confidence.PROVEN:
        logger.warning(f"Prediction at level {N} has {prediction.confidence} terms")
    return prediction


# Verification against Brandt matrices

@dataclass
class PrimeComparison:
    ell: int
    predicted: CharPoly
    computed: CharPoly
    status: str


@dataclass
class VerificationReport:
    level: int
    outcome: str
    comparisons: list = field(default_factory=list)
    checks: list = field(default_factory=list)


def fixture_factor(record, ell):
    """Char poly of a_ell on the record's orbit; None unless dim = 1 and a_ell is known."""
    trace = record.trace(ell)
    if trace is None or record.dim != 1:
        return None
    return CharPoly((1, -trace))


def _compare(prediction, computed, ell):
    if any(term.multiplicity is None for term in prediction.terms):
        return PrimeComparison(ell, None, computed, Comparison.UNDETERMINED)
    records = [(record, term.multiplicity) for term in prediction.terms for record in term.records]
    if any(record.trace(ell) is None for record, _ in records):
        return PrimeComparison(ell, None, computed, Comparison.UNDETERMINED)
    factors = [fixture_factor(record, ell) for record, _ in records]
    if all(factor is not None for factor in factors):
        predicted = CharPoly((1,))
        for factor, (_, multiplicity) in zip(factors, records):
            predicted = predicted * factor ** multiplicity
        status = Comparison.MATCH if predicted == computed else Comparison.MISMATCH
        return PrimeComparison(ell, predicted, computed, status)
    # orbits of degree > 1 only carry traces
    trace = sum(multiplicity * record.trace(ell) for record, multiplicity in records)
    degree = sum(multiplicity * record.dim for record, multiplicity in records)
    computed_trace = -computed.coefficients[1] if computed.degree else 0
    matches = degree == computed.degree and trace == computed_trace
    return PrimeComparison(ell, None, computed, Comparison.TRACE_MATCH if matches else Comparison.MISMATCH)


def verify_decomposition(prediction, module, primes):
    """
    Compare predicted char polys with the cusp char polys of module.

    Args:
        prediction: DecompositionPrediction for module's order
        module: HeckeModule of the same level
        primes: test primes; those dividing the level are skipped
    """
    primes = sorted({ell for ell in primes if module.level % ell})
    report = VerificationReport(level=module.level, outcome=Outcome.VERIFIED)
    if primes:
        module.prepare(max(primes))
    for ell in primes:
        comparison = _compare(prediction, module.cusp_charpoly(ell), ell)
        if comparison.status == Comparison.MISMATCH:
            logger.error(f"A_{ell} at level {module.level}: prediction does not match the Brandt module")
        report.comparisons.append(comparison)
        passed = module.eisenstein_row_check(ell)
        report.checks.append(CheckResult(
            f"eisenstein-rows ell={ell}",
            CheckResult.Status.PASSED if passed else CheckResult.Status.FAILED,
        ))

    eisenstein = len(module.eisenstein_basis())
    report.checks.append(CheckResult(
        'eisenstein-dimension',
        CheckResult.Status.PASSED if eisenstein == prediction.predicted_eisenstein_dimension
        else CheckResult.Status.FAILED,
        f"computed {eisenstein}, predicted {prediction.predicted_eisenstein_dimension}",
    ))
    if prediction.predicted_h is None:
        report.checks.append(CheckResult('dimension-bookkeeping', CheckResult.Status.SKIPPED, 'unknown terms'))
    else:
        report.checks.append(CheckResult(
            'dimension-bookkeeping',
            CheckResult.Status.PASSED if prediction.predicted_h == module.h else CheckResult.Status.FAILED,
            f"h = {module.h}, predicted {prediction.predicted_h}",
        ))

    statuses = {comparison.status for comparison in report.comparisons}
    if Comparison.MISMATCH in statuses or any(check.failed for check in report.checks):
        report.outcome = Outcome.FALSIFIED
    elif Comparison.UNDETERMINED in statuses or prediction.confidence == Confidence.UNKNOWN:
        report.outcome = Outcome.UNKNOWN
    elif prediction.confidence == Confidence.CONJECTURAL:
        report.outcome = Outcome.CONFIRMED
    return report


# Eisenstein congruences at level p^3

@dataclass
class CongruenceResult:
    p: int
    primes: list
    new_dimension: int
    kernel_dimension: int

    @property
    def holds(self):
        return self.kernel_dimension > 0


def _reduce(value, p):
    value = to_fraction(value)
    if value.denominator != 1:
        raise ConsistencyError(f"Restricted Hecke matrix has non-integral entry {value}")
    return value.numerator % p


def congruence_check(p, primes, jobs=None, use_cache=True, module=None):
    """
    Common kernel mod p of A_ell - (1 + ell) on the p^3-new Brandt module of discriminant p.

    Returns:
        CongruenceResult, or None when the new space cannot be isolated
    """
    if p == 2:
        raise ParameterError("congruence_check does not support p = 2")
    if not isprime(p):
        raise ParameterError(f"congruence_check needs an odd prime, got {p}")
    if any(not isprime(ell) for ell in primes):
        raise ParameterError(f"Test primes must be prime, got {sorted(primes)}")
    if p in primes:
        logger.warning(f"Dropping ell = {p} from the test primes: it divides the level")
    primes = sorted(set(primes) - {p})
    if not primes:
        raise ParameterError(f"No test prime different from {p}")
    module = module or HeckeModule.build(p, p ** 3, etypes={p: EType.UNRAMIFIED}, jobs=jobs, use_cache=use_cache)
    space = module.new_subspace()
    if space is None:
        return None
    d = space.dimension
    if not d:
        return CongruenceResult(p=p, primes=primes, new_dimension=0, kernel_dimension=0)
    module.prepare(max(primes))
    rows = []
    for ell in primes:
        shifted = module.new_restriction(ell) - (1 + ell) * eye(d)
        rows.extend([_reduce(shifted[i, j], p) for j in range(d)] for i in range(d))
    _, pivots = rref_mod(rows, p)
    result = CongruenceResult(p=p, primes=primes, new_dimension=d, kernel_dimension=d - len(pivots))
    logger.info(f"Eisenstein congruence mod {p}: common kernel of dimension {result.kernel_dimension}")
    return result


def congruent_fixture_forms(db, p, primes):
    """Labels of rational p^3-newforms with a_ell = 1 + ell mod p at every given ell that they record."""
    labels = []
    for record in db.records_at(p ** 3):
        traces = [(ell, record.trace(ell)) for ell in primes if ell != p]
        if record.dim != 1 or any(trace is None for _, trace in traces):
            continue
        if all((trace - 1 - ell) % p == 0 for ell, trace in traces):
            labels.append(record.label)
    return labels
