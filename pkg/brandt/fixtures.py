import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, prod

from django.conf import settings
from django.db import models
from sympy import divisors, totient

from .arith import factor, gamma0_index, kronecker, prime_divisors
from .exceptions import FixtureError, ParameterError

logger = logging.getLogger(__name__)


class LocalKind(models.TextChoices):
    UNRAMIFIED = 'unramified', 'Unramified'
    STEINBERG = 'steinberg', 'Steinberg'
    SPECIAL_TWIST = 'special-twist', 'Steinberg twisted by a ramified character'
    PRINCIPAL_SERIES = 'principal-series', 'Ramified principal series'
    SUPERCUSPIDAL = 'supercuspidal', 'Supercuspidal'
    UNKNOWN = 'unknown', 'Unknown'


@dataclass(frozen=True)
class LocalRepDescriptor:
    kind: str
    c: int = None
    minimal: bool = None

    @property
    def one_dimensional(self):
        """The Jacquet-Langlands image on the quaternion side is a character of the norm."""
        return self.kind in (LocalKind.STEINBERG, LocalKind.SPECIAL_TWIST)

    @property
    def discrete_series(self):
        return self.kind in (LocalKind.STEINBERG, LocalKind.SPECIAL_TWIST, LocalKind.SUPERCUSPIDAL)


UNRAMIFIED = LocalRepDescriptor(kind=LocalKind.UNRAMIFIED, c=0, minimal=True)


@dataclass(frozen=True)
class NewformRecord:
    level: int
    label: str
    dim: int
    ap: dict = field(default_factory=dict)
    bad: dict = field(default_factory=dict)
    line: int = 0

    def trace(self, ell):
        return self.ap.get(ell)

    def local(self, p):
        """Local type at p; unramified away from the level."""
        if self.level % p:
            return UNRAMIFIED
        return self.bad.get(p, LocalRepDescriptor(kind=LocalKind.UNKNOWN))


class FixtureDB:
    """Validated newform records, immutable after load."""

    def __init__(self, records, path=''):
        self.records = tuple(records)
        self.path = str(path)
        self._by_level = {}
        for record in self.records:
            self._by_level.setdefault(record.level, []).append(record)

    def __len__(self):
        return len(self.records)

    @property
    def levels(self):
        return sorted(self._by_level)

    def records_at(self, level):
        return list(self._by_level.get(level, []))

    def get(self, label):
        for record in self.records:
            if record.label == label:
                return record
        return None

    def covers(self, level):
        """The records at level account for the whole new cusp space there."""
        return sum(record.dim for record in self.records_at(level)) == dim_new_cusp(level)

    def missing_levels(self, levels):
        return sorted(level for level in set(levels) if not self.covers(level))


# Classical dimension formulas

def dim_cusp(N):
    """dim S_2(Gamma_0(N)), the genus of X_0(N)."""
    if N < 1:
        raise ParameterError(f"Level must be positive, got {N}")
    primes = prime_divisors(N)
    nu2 = 0 if N % 4 == 0 else prod(1 + kronecker(-4, p) for p in primes)
    nu3 = 0 if N % 9 == 0 else prod(1 + kronecker(-3, p) for p in primes)
    cusps = sum(int(totient(gcd(d, N // d))) for d in divisors(N))
    genus = 1 + Fraction(gamma0_index(N), 12) - Fraction(nu2, 4) - Fraction(nu3, 3) - Fraction(cusps, 2)
    return int(genus)


def _beta(n):
    # multiplicative: beta(p) = -2, beta(p^2) = 1, beta(p^k) = 0 for k >= 3
    result = 1
    for _, e in factor(n):
        result *= {1: -2, 2: 1}.get(e, 0)
    return result


def dim_new_cusp(N):
    """Dimension of the N-new subspace of S_2(Gamma_0(N))."""
    return sum(_beta(N // d) * dim_cusp(d) for d in divisors(N))


# Twist detection

def find_twist_partner(record, db, chi, level=None):
    """
    Label of a record at level (default: the record's own) whose traces are
    chi(ell) a_ell(record) at every shared prime ell not dividing either level.
    """
    level = level or record.level
    for candidate in db.records_at(level):
        if candidate.label == record.label or candidate.dim != record.dim:
            continue
        shared = [
            ell for ell in record.ap
            if ell in candidate.ap and record.level % ell and candidate.level % ell
        ]
        if shared and all(candidate.ap[ell] == chi(ell) * record.ap[ell] for ell in shared):
            return candidate.label
    return None


def _prime_character(p):
    # kronecker(p*, .) with p* = +-p congruent to 1 mod 4
    p_star = p if p % 4 == 1 else -p
    return lambda n: kronecker(p_star, n)


def _twist_problems(db):
    problems = []
    for record in db.records:
        for p, local in sorted(record.bad.items()):
            if local.kind != LocalKind.SPECIAL_TWIST or p == 2 or local.c != 2:
                continue
            lower = record.level // p
            if not db.covers(lower):
                continue
            partner = find_twist_partner(record, db, _prime_character(p), level=lower)
            steinberg = partner and db.get(partner).local(p).kind == LocalKind.STEINBERG
            if not steinberg:
                problems.append((record.line, f"{record.label}: special-twist at {p} has no Steinberg twist partner at level {lower}"))
    return problems


# Loading

def _flatten(errors, prefix=''):
    if isinstance(errors, dict):
        messages = []
        for key, value in errors.items():
            name = prefix.rstrip('.') if key == 'non_field_errors' else f"{prefix}{key}"
            messages.extend(_flatten(value, f"{name}." if name else ''))
        return messages
    if isinstance(errors, list):
        messages = []
        for item in errors:
            messages.extend(_flatten(item, prefix))
        return messages
    return [f"{prefix.rstrip('.')}: {errors}" if prefix else str(errors)]


def _record(data, line):
    return NewformRecord(
        level=data['level'],
        label=data['label'],
        dim=data['dim'],
        ap={int(p): trace for p, trace in sorted(data['ap'].items(), key=lambda item: int(item[0]))},
        bad={
            int(p): LocalRepDescriptor(kind=local['kind'], c=local.get('c'), minimal=local.get('minimal'))
            for p, local in data['bad'].items()
        },
        line=line,
    )


def parse_fixtures(text, trace_bound=None, path=''):
    """
    Validate fixture text, one JSON record per line.

    Raises:
        FixtureError: listing every problem with its 1-based line number
    """
    from .serializers import NewformRecordSerializer

    trace_bound = settings.BRANDT_TRACE_BOUND if trace_bound is None else trace_bound
    problems = []
    records = []
    labels = {}
    lines = text.split('\n')
    if lines and lines[-1] == '':
        lines.pop()
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            problems.append((number, 'empty line'))
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as e:
            problems.append((number, f"invalid JSON: {e.msg}"))
            continue
        if not isinstance(data, dict):
            problems.append((number, 'record must be a JSON object'))
            continue
        serializer = NewformRecordSerializer(data=data, context={'trace_bound': trace_bound})
        if not serializer.is_valid():
            problems.extend((number, message) for message in _flatten(serializer.errors))
            continue
        record = _record(serializer.validated_data, number)
        if record.label in labels:
            problems.append((number, f"duplicate label {record.label} (first on line {labels[record.label]})"))
            continue
        labels[record.label] = number
        records.append(record)

    db = FixtureDB(records, path=path)
    for level in db.levels:
        total = sum(record.dim for record in db.records_at(level))
        expected = dim_new_cusp(level)
        if total > expected:
            line = db.records_at(level)[-1].line
            problems.append((line, f"level {level} records have total dimension {total} > dim S_2^new = {expected}"))
    if not problems:
        problems.extend(_twist_problems(db))
    if problems:
        logger.error(f"Fixture file {path or '<text>'} has {len(problems)} problem(s)")
        raise FixtureError(sorted(problems))
    logger.info(f"Loaded {len(db)} newform records at levels {db.levels}")
    return db


def load_fixtures(path=None, trace_bound=None):
    path = path or settings.BRANDT_FIXTURES
    try:
        with open(path, encoding='utf-8') as handle:
            text = handle.read()
    except OSError as e:
        raise FixtureError([(0, f"cannot read {path}: {e.strerror}")])
    except UnicodeDecodeError:
        raise FixtureError([(0, f"{path} is not UTF-8 text")])
    return parse_fixtures(text, trace_bound=trace_bound, path=path)
