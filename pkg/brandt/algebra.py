import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import isqrt

from sympy import nextprime

from .arith import INFINITY, factor, kronecker, prime_divisors, ramified_places, valuation
from .exceptions import InvalidDiscriminantError, OrderConstructionError
from .lattice import GramForm, Lattice, integer_kernel, rational_determinant

logger = logging.getLogger(__name__)

PRESENTATION_SEARCH_BOUND = 200


@dataclass(frozen=True)
class QuatAlgebra:
    """The algebra (a, b | Q): i^2 = a, j^2 = b, k = ij = -ji."""
    a: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, 'a', Fraction(self.a))
        object.__setattr__(self, 'b', Fraction(self.b))
        if self.a == 0 or self.b == 0:
            raise InvalidDiscriminantError("Quaternion algebra parameters must be nonzero")

    @cached_property
    def ramified_primes(self):
        return tuple(p for p in ramified_places(self.a, self.b) if p != INFINITY)

    @cached_property
    def discriminant(self):
        d = 1
        for p in self.ramified_primes:
            d *= p
        return d

    @property
    def is_definite(self):
        return self.a < 0 and self.b < 0

    def multiply(self, x, y):
        a, b = self.a, self.b
        x1, y1, z1, w1 = x
        x2, y2, z2, w2 = y
        return (
            x1 * x2 + a * y1 * y2 + b * z1 * z2 - a * b * w1 * w2,
            x1 * y2 + y1 * x2 - b * z1 * w2 + b * w1 * z2,
            x1 * z2 + z1 * x2 + a * y1 * w2 - a * w1 * y2,
            x1 * w2 + w1 * x2 + y1 * z2 - z1 * y2,
        )

    def norm(self, x):
        a, b = self.a, self.b
        return x[0] ** 2 - a * x[1] ** 2 - b * x[2] ** 2 + a * b * x[3] ** 2

    @staticmethod
    def trace(x):
        return 2 * x[0]

    @staticmethod
    def conj(x):
        return (x[0], -x[1], -x[2], -x[3])

    def bilinear(self, x, y):
        """<x, y> = tr(x conj(y)) / 2, so that <x, x> = N(x)."""
        a, b = self.a, self.b
        return x[0] * y[0] - a * x[1] * y[1] - b * x[2] * y[2] + a * b * x[3] * y[3]

    def element(self, *coefficients):
        return QuatElement(self, tuple(Fraction(c) for c in coefficients))

    def gram(self, rows):
        """Norm form restricted to the lattice with these basis rows."""
        return GramForm([[self.bilinear(x, y) for y in rows] for x in rows])

    def to_text(self):
        return f"algebra {self.a} {self.b}"


@dataclass(frozen=True)
class QuatElement:
    algebra: QuatAlgebra
    coefficients: tuple

    def _wrap(self, coefficients):
        return QuatElement(self.algebra, tuple(coefficients))

    def __add__(self, other):
        return self._wrap(s + t for s, t in zip(self.coefficients, other.coefficients))

    def __sub__(self, other):
        return self._wrap(s - t for s, t in zip(self.coefficients, other.coefficients))

    def __neg__(self):
        return self._wrap(-s for s in self.coefficients)

    def __mul__(self, other):
        if isinstance(other, QuatElement):
            return self._wrap(self.algebra.multiply(self.coefficients, other.coefficients))
        return self._wrap(Fraction(other) * s for s in self.coefficients)

    def __rmul__(self, other):
        return self._wrap(Fraction(other) * s for s in self.coefficients)

    def norm(self):
        return self.algebra.norm(self.coefficients)

    def trace(self):
        return self.algebra.trace(self.coefficients)

    def conj(self):
        return self._wrap(self.algebra.conj(self.coefficients))


def _presentation_for_prime(p):
    if p == 2:
        return -1, -1
    if p % 4 == 3:
        return -1, -p
    if p % 8 == 5:
        return -2, -p
    q = 3
    while not (q % 4 == 3 and kronecker(p, q) == -1):
        q = nextprime(q)
    return -p, -q


def _has_ramification(a, b, primes):
    algebra = QuatAlgebra(a, b)
    return algebra.is_definite and algebra.ramified_primes == tuple(primes)


def construct_definite(D):
    """
    Definite quaternion algebra over Q ramified exactly at the primes of D.

    Args:
        D: squarefree positive integer with an odd number of prime factors

    Returns:
        QuatAlgebra whose ramification set is verified by Hilbert symbols
    """
    D = int(D)
    if D < 2:
        raise InvalidDiscriminantError(f"Discriminant must be at least 2, got {D}")
    factorization = factor(D)
    if any(e > 1 for _, e in factorization):
        raise InvalidDiscriminantError(f"Discriminant {D} is not squarefree")
    if len(factorization) % 2 == 0:
        raise InvalidDiscriminantError(
            f"Discriminant {D} has an even number of prime factors; a definite algebra needs an odd number"
        )
    primes = tuple(p for p, _ in factorization)

    if len(primes) == 1:
        a, b = _presentation_for_prime(primes[0])
        if not _has_ramification(a, b, primes):
            raise InvalidDiscriminantError(f"Closed-form presentation failed verification for D = {D}")
        return QuatAlgebra(a, b)

    for size in range(2, 2 * PRESENTATION_SEARCH_BOUND + 1):
        for a in range(1, size):
            b = size - a
            if a > b:
                break
            if _has_ramification(-a, -b, primes):
                logger.info(f"Presentation (-{a}, -{b}) found for D = {D}")
                return QuatAlgebra(-a, -b)
    raise InvalidDiscriminantError(f"No presentation found for D = {D} within the search bound")


# ---------------------------------------------------------------------------
# Orders as lattices: helpers shared with orders.py and ideals.py


def lattice_products(algebra, left, right):
    """Lattice spanned by all products x*y with x in left, y in right."""
    return Lattice.from_rows([algebra.multiply(x, y) for x in left.rows for y in right.rows])


def is_closed(algebra, lattice):
    return all(
        algebra.multiply(x, y) in lattice for x in lattice.rows for y in lattice.rows
    )


def is_integral_element(algebra, x):
    return Fraction(algebra.trace(x)).denominator == 1 and Fraction(algebra.norm(x)).denominator == 1


def trace_form(algebra, rows):
    return [[algebra.trace(algebra.multiply(x, algebra.conj(y))) for y in rows] for x in rows]


def reduced_discriminant_of(algebra, lattice):
    """Positive d with d^2 = |det(tr(b_i conj(b_j)))|."""
    det = abs(rational_determinant(trace_form(algebra, lattice.rows)))
    if det.denominator != 1:
        raise OrderConstructionError("Trace form of a non-integral lattice")
    d = isqrt(int(det))
    if d * d != det:
        raise OrderConstructionError("Trace form determinant is not a square")
    return d


def structure_constants(algebra, lattice):
    """table[i][j] = integer coordinates of b_i * b_j in the lattice basis."""
    rows = lattice.rows
    table = []
    for x in rows:
        line = []
        for y in rows:
            coords = lattice.coordinates(algebra.multiply(x, y))
            if coords is None:
                raise OrderConstructionError("Lattice is not closed under multiplication")
            line.append(coords)
        table.append(line)
    return table


def congruence_sublattice(lattice, conditions, modulus):
    """
    Sublattice {sum y_i b_i : conditions . y = 0 mod modulus}.

    Args:
        lattice: full-rank Lattice with basis b_i
        conditions: list of integer functionals on coordinates
        modulus: positive integer
    """
    n = lattice.rank
    m = len(conditions)
    system = [list(row) + [-modulus if r == c else 0 for c in range(m)] for r, row in enumerate(conditions)]
    kernel = integer_kernel(system)
    return Lattice.from_rows([lattice.combine(vector[:n]) for vector in kernel])


def nilpotent_mod(traces, norms, coords, p):
    """Is the element with these coordinates nilpotent modulo p?"""
    n = len(coords)
    trace = sum(coords[i] * traces[i] for i in range(n))
    norm = sum(coords[i] * coords[j] * norms[i][j] for i in range(n) for j in range(n))
    return trace % p == 0 and norm % p == 0


def radical_mod(algebra, lattice, p):
    """
    Lattice pO + rad(O/pO) for the order O with this lattice.

    Odd p uses the radical of the trace form; p = 2 tests nilpotency of every
    product directly on O/2O.
    """
    rows = lattice.rows
    n = len(rows)
    if p != 2:
        form = trace_form(algebra, rows)
        conditions = [[int(form[i][j]) for i in range(n)] for j in range(n)]
        return congruence_sublattice(lattice, conditions, p)

    table = structure_constants(algebra, lattice)
    traces = [int(algebra.trace(x)) for x in rows]
    # norm of sum y_i b_i as a quadratic form in y, integer coefficients
    norms = [[int(algebra.bilinear(rows[i], rows[j])) if i == j else 0 for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            norms[i][j] = int(2 * algebra.bilinear(rows[i], rows[j]))

    def product(y, z):
        out = [0] * n
        for i in range(n):
            if y[i]:
                for j in range(n):
                    if z[j]:
                        for k in range(n):
                            out[k] += y[i] * z[j] * table[i][j][k]
        return out

    elements = list(itertools.product(range(p), repeat=n))
    radical = [
        y for y in elements
        if all(nilpotent_mod(traces, norms, product(y, z), p) for z in elements)
    ]
    generators = [[sum(y[i] * rows[i][k] for i in range(n)) for k in range(4)] for y in radical if any(y)]
    generators.extend([p * x for x in row] for row in rows)
    return Lattice.from_rows(generators)


def _idealizer_step(algebra, lattice, radical, p):
    # {x in (1/p)O : x I in I}, then {x : I x in I}; None when neither grows O.
    rows = lattice.rows
    n = len(rows)
    for side in ('left', 'right'):
        conditions = []
        for m in radical.rows:
            images = []
            for b in rows:
                product = algebra.multiply(b, m) if side == 'left' else algebra.multiply(m, b)
                coords = radical.coordinates(product)
                if coords is None:
                    raise OrderConstructionError("Radical is not an ideal of the order")
                images.append(coords)
            for k in range(n):
                conditions.append([images[i][k] for i in range(n)])
        sub = congruence_sublattice(lattice, conditions, p)
        bigger = lattice + sub.scale(Fraction(1, p))
        if bigger != lattice:
            return bigger
    return None


def _integral_extension(algebra, lattice, p):
    # Search x = y/p, y in O mod pO, whose adjunction keeps an order.
    rows = lattice.rows
    for coords in itertools.product(range(p), repeat=len(rows)):
        if not any(coords):
            continue
        x = tuple(sum(Fraction(c, p) * rows[i][k] for i, c in enumerate(coords)) for k in range(4))
        if not is_integral_element(algebra, x):
            continue
        generators = list(rows) + [x]
        generators += [algebra.multiply(x, b) for b in rows] + [algebra.multiply(b, x) for b in rows]
        candidate = Lattice.from_rows(generators)
        if is_closed(algebra, candidate) and all(is_integral_element(algebra, r) for r in candidate.rows):
            return candidate
    return None


def saturate_at(algebra, lattice, p, target):
    """Enlarge the order lattice at p until v_p(reduced discriminant) == target."""
    while valuation(reduced_discriminant_of(algebra, lattice), p) > target:
        radical = radical_mod(algebra, lattice, p)
        bigger = _idealizer_step(algebra, lattice, radical, p)
        if bigger is None:
            bigger = _integral_extension(algebra, lattice, p)
        if bigger is None:
            raise OrderConstructionError(f"Could not enlarge the order at p = {p}")
        logger.debug(f"Order enlarged at {p}: discriminant {reduced_discriminant_of(algebra, bigger)}")
        lattice = bigger
    return lattice


def maximal_order_lattice(algebra):
    if not algebra.is_definite:
        raise OrderConstructionError("Only definite algebras are supported")
    scale_a = algebra.a.denominator
    scale_b = algebra.b.denominator
    # i, j are scaled to integral elements when a or b is not an integer
    start = Lattice.from_rows([
        (1, 0, 0, 0),
        (0, scale_a, 0, 0),
        (0, 0, scale_b, 0),
        (0, 0, 0, scale_a * scale_b),
    ])
    lattice = start
    disc = reduced_discriminant_of(algebra, lattice)
    for p in prime_divisors(disc):
        target = 1 if p in algebra.ramified_primes else 0
        lattice = saturate_at(algebra, lattice, p, target)
    if reduced_discriminant_of(algebra, lattice) != algebra.discriminant:
        raise OrderConstructionError("Saturation did not reach a maximal order")
    return lattice

