import logging
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd, lcm

from django.conf import settings

from . import cache
from .algebra import lattice_products
from .arith import factor, next_prime_coprime_to, prime_divisors
from .exceptions import BudgetExceededError, IdealError, MassMismatchError
from .lattice import GramForm, Lattice, represents, rref_mod, short_vectors
from .orders import EType, Order, OrderKind, split_idempotent

logger = logging.getLogger(__name__)

# Norm values counted per class before any equivalence test
FINGERPRINT_BOUND = 3


def _rational_gcd(values):
    values = [Fraction(v) for v in values if v]
    if not values:
        raise IdealError("Norm form of a zero lattice")
    den = lcm(*(v.denominator for v in values))
    return Fraction(gcd(*(int(v * den) for v in values)), den)


def norm_gram(algebra, lattice, scale=1):
    """Gram matrix of N(x) / scale on the lattice."""
    scale = Fraction(scale)
    return GramForm([[algebra.bilinear(x, y) / scale for y in lattice.rows] for x in lattice.rows])


def lattice_norm(algebra, lattice):
    """Positive generator of the fractional ideal spanned by the norms of the lattice."""
    rows = lattice.rows
    values = [algebra.norm(x) for x in rows]
    values += [
        2 * algebra.bilinear(rows[i], rows[j]) for i in range(len(rows)) for j in range(i + 1, len(rows))
    ]
    return _rational_gcd(values)


@dataclass(frozen=True)
class RightIdeal:
    """A lattice I with I O = I for its right order O."""
    order: Order
    lattice: Lattice

    @property
    def algebra(self):
        return self.order.algebra

    @property
    def rows(self):
        return self.lattice.rows

    @cached_property
    def norm(self):
        return lattice_norm(self.algebra, self.lattice)

    def is_right_module(self):
        return self.lattice.contains_lattice(lattice_products(self.algebra, self.lattice, self.order.lattice))

    @cached_property
    def left_order(self):
        return left_order(self)

    def normalized_gram(self):
        return norm_gram(self.algebra, self.lattice, self.norm)

    @cached_property
    def fingerprint(self):
        """Pair counts of the normalized norm form at 1..FINGERPRINT_BOUND; a class invariant."""
        vectors = short_vectors(self.normalized_gram(), FINGERPRINT_BOUND)
        return tuple(vectors.count(n) for n in range(1, FINGERPRINT_BOUND + 1))

    def sort_key(self):
        return (self.norm, self.lattice.sort_key())

    def to_text(self):
        return f"norm {self.norm}\n{self.lattice.to_text()}"


def unit_ideal(order):
    return RightIdeal(order=order, lattice=order.lattice)


def ideal_norm(ideal):
    return ideal.norm


def conj(ideal):
    """Lattice of conjugates; a left ideal of the right order of ideal."""
    algebra = ideal.algebra
    return Lattice.from_rows([algebra.conj(x) for x in ideal.rows])


def left_order(ideal):
    """O_l(I) = {x : x I in I}, the intersection of the lattices I b^-1 over a basis b."""
    algebra = ideal.algebra
    result = None
    for b in ideal.rows:
        b_inverse = tuple(c / algebra.norm(b) for c in algebra.conj(b))
        translate = Lattice.from_rows([algebra.multiply(y, b_inverse) for y in ideal.rows])
        result = translate if result is None else result.intersection(translate)
    return Order(algebra=algebra, lattice=result)


def inverse(ideal):
    """I^-1 = conj(I) / N(I), a right ideal of the left order of I."""
    lattice = conj(ideal).scale(1 / ideal.norm)
    return RightIdeal(order=ideal.left_order, lattice=lattice)


def product(first, second):
    """
    The product I J of right ideals, defined when O_r(I) = O_l(J).

    Returns:
        RightIdeal with right order O_r(J)
    """
    if second.left_order.lattice != first.order.lattice:
        raise IdealError("Right order of the first ideal differs from the left order of the second")
    lattice = lattice_products(first.algebra, first.lattice, second.lattice)
    return RightIdeal(order=second.order, lattice=lattice)


def connecting_lattice(first, second):
    """
    The lattice I conj(J) and the norm scale N(I) N(J).

    gamma in I J^-1 with N(gamma) = n N(I) / N(J) corresponds to
    delta = N(J) gamma in I conj(J) with N(delta) = n N(I) N(J).
    """
    lattice = lattice_products(first.algebra, first.lattice, conj(second))
    return lattice, first.norm * second.norm


def connecting_gram(first, second):
    lattice, scale = connecting_lattice(first, second)
    return norm_gram(first.algebra, lattice, scale)


def _same_right_order(first, second):
    if first.order.lattice != second.order.lattice:
        raise IdealError("Equivalence is only defined for ideals with the same right order")


def is_equivalent(first, second):
    """True iff I = gamma J for some gamma in B^x."""
    _same_right_order(first, second)
    if first.lattice == second.lattice:
        return True
    return represents(connecting_gram(first, second), 1)


def _split_lines(ideal, q):
    # The q + 1 lines in (I e + qI) / qI, e an idempotent of O/qO.
    algebra = ideal.algebra
    e = split_idempotent(ideal.order, q)
    images = [ideal.lattice.coordinates(algebra.multiply(b, e)) for b in ideal.rows]
    echelon, _ = rref_mod(images, q)
    if len(echelon) != 2:
        raise IdealError(f"Expected a two-dimensional image modulo {q}, got dimension {len(echelon)}")
    first, second = echelon
    lines = [[(a + t * b) % q for a, b in zip(first, second)] for t in range(q)]
    lines.append(second)
    return lines


def q_neighbors(ideal, q):
    """
    The q + 1 right ideals J with qI in J in I and I/J of order q^2.

    Args:
        ideal: RightIdeal whose right order is split at q
        q: prime not dividing the level

    Returns:
        list of RightIdeal of norm q N(I), ordered by line representative
    """
    if ideal.order.level % q == 0:
        raise IdealError(f"Neighbor prime {q} divides the level {ideal.order.level}")
    algebra = ideal.algebra
    base = ideal.lattice.scale(q)
    neighbors = []
    for line in _split_lines(ideal, q):
        m = ideal.lattice.combine(line)
        generated = Lattice.from_rows([algebra.multiply(m, b) for b in ideal.order.rows])
        neighbors.append(RightIdeal(order=ideal.order, lattice=generated + base))
    return neighbors


def unit_order(order):
    """Half the number of units: #{x in O : N(x) = 1} / 2."""
    algebra = order.algebra
    return short_vectors(norm_gram(algebra, order.lattice), 1).count(1)


def mass_eichler(D, M):
    """(1/12) prod_{p | D} (p - 1) prod_{p^r || M} p^(r - 1) (p + 1)."""
    mass = Fraction(1, 12)
    for p in prime_divisors(D):
        mass *= p - 1
    for p, r in factor(M):
        mass *= p ** (r - 1) * (p + 1)
    return mass


def local_unit_index(p, r, etype):
    """[O_max,p^x : O_p^x] for the special order O_r(E)."""
    if r == 1:
        return 1
    if etype == EType.UNRAMIFIED:
        return p ** (r - 1)
    return (p + 1) * p ** (r - 2)


def mass_special(D, N, etypes=None):
    """
    Mass of the special order of level N: the Eichler mass of D and M
    times the local unit indices at p | D.
    """
    etypes = etypes or {}
    M = N
    indices = 1
    for p in prime_divisors(D):
        r = 0
        while M % p == 0:
            M //= p
            r += 1
        etype = etypes.get(p, EType.UNRAMIFIED if r % 2 else EType.RAMIFIED)
        indices *= local_unit_index(p, r, etype)
    return mass_eichler(D, M) * indices


def order_mass(order):
    etypes = {
        local.prime: local.etype for local in order.local_types if local.kind != OrderKind.SPLIT_EICHLER
    }
    return mass_special(order.discriminant, order.level, etypes)


@dataclass
class ClassSet:
    """Right ideal class representatives I_1 = O, ..., I_h with unit orders e_i."""
    order: Order
    ideals: list
    unit_orders: list
    q: int
    mass: Fraction

    @property
    def h(self):
        return len(self.ideals)

    def to_text(self):
        lines = [self.order.to_text(), f"classes {self.h}", f"neighbor-prime {self.q}", f"mass {self.mass}"]
        for index, (ideal, e) in enumerate(zip(self.ideals, self.unit_orders), start=1):
            lines.append(f"class {index} e {e}")
            lines.append(ideal.to_text())
        return '\n'.join(lines)

    def to_record(self):
        return {
            'q': self.q,
            'ideals': [[ideal.lattice.denominator, [list(row) for row in ideal.lattice.basis]] for ideal in self.ideals],
            'unit_orders': list(self.unit_orders),
        }


def _find_class(ideal, reps):
    for index, rep in enumerate(reps):
        if rep.fingerprint == ideal.fingerprint and is_equivalent(rep, ideal):
            return index
    return None


def _explore(order, q, budget, mass):
    reps = [unit_ideal(order)]
    units = [unit_order(order)]
    total = Fraction(1, units[0])
    frontier = deque(reps)
    visited = 0
    while frontier and total != mass:
        current = frontier.popleft()
        for neighbor in q_neighbors(current, q):
            visited += 1
            if visited > budget:
                raise BudgetExceededError(
                    f"Class set search visited more than {budget} ideals at level {order.level}"
                )
            if _find_class(neighbor, reps) is not None:
                continue
            e = unit_order(neighbor.left_order)
            reps.append(neighbor)
            units.append(e)
            frontier.append(neighbor)
            total += Fraction(1, e)
            logger.debug(f"New class {len(reps)} of norm {neighbor.norm}, e = {e}")
            if total > mass:
                logger.error(f"Mass exceeded at level {order.level}: {total} > {mass}")
                raise MassMismatchError(f"Sum of 1/e_i reached {total}, above the mass {mass}")
            if total == mass:
                break
    logger.info(f"Class set at level {order.level}: h = {len(reps)} after {visited} neighbors (q = {q})")
    return reps, units, total


def _safety_sweep(order, reps, q):
    for rep in reps:
        for neighbor in q_neighbors(rep, q):
            if _find_class(neighbor, reps) is None:
                logger.error(f"Closure sweep at q = {q} found a class outside the set")
                raise MassMismatchError(f"Closure sweep at q = {q} found a new ideal class")
    logger.info(f"Closure sweep at q = {q} found no new classes")


def _canonical(order, reps, units, q, mass):
    pairs = sorted(zip(reps, units), key=lambda pair: pair[0].sort_key())
    return ClassSet(
        order=order,
        ideals=[ideal for ideal, _ in pairs],
        unit_orders=[e for _, e in pairs],
        q=q,
        mass=mass,
    )


def _from_cache(order, record, mass):
    reps = [
        RightIdeal(order=order, lattice=Lattice(basis=tuple(tuple(row) for row in basis), denominator=den))
        for den, basis in record['ideals']
    ]
    units = [unit_order(rep.left_order) for rep in reps]
    if any(not rep.is_right_module() for rep in reps) or sum(Fraction(1, e) for e in units) != mass:
        logger.warning("Cached class set failed validation; recomputing")
        return None
    return reps, units


def class_set(order, q=None, budget=None, use_cache=True, safety_sweep=None):
    """
    Right ideal classes of the order by a neighbor search at one prime.

    Args:
        order: Order from build_order
        q: neighbor prime, default the smallest prime not dividing the level
        budget: maximum number of neighbors visited (BRANDT_NODE_BUDGET)
        use_cache: read and write the class-set cache
        safety_sweep: check closure at the next admissible prime for
            non-Eichler orders (BRANDT_SAFETY_SWEEP)

    Returns:
        ClassSet in canonical order, I_1 = O
    """
    budget = settings.BRANDT_NODE_BUDGET if budget is None else budget
    safety_sweep = settings.BRANDT_SAFETY_SWEEP if safety_sweep is None else safety_sweep
    q = q or next_prime_coprime_to(order.level)
    if order.level % q == 0:
        raise IdealError(f"Neighbor prime {q} divides the level {order.level}")
    mass = order_mass(order)

    key = cache.classset_key(order, q)
    cached = cache.load_classset(key) if use_cache else None
    restored = _from_cache(order, cached, mass) if cached else None
    if restored:
        logger.info(f"Class set for level {order.level} restored from cache")
        return _canonical(order, restored[0], restored[1], q, mass)

    reps, units, total = _explore(order, q, budget, mass)
    if total != mass:
        logger.error(f"Mass mismatch at level {order.level}: {total} != {mass}")
        raise MassMismatchError(f"Sum of 1/e_i is {total}, the mass formula gives {mass}")
    if safety_sweep and not order.is_eichler:
        _safety_sweep(order, reps, next_prime_coprime_to(order.level, q + 1))

    result = _canonical(order, reps, units, q, mass)
    if use_cache:
        cache.store_classset(key, result.to_record())
    return result
