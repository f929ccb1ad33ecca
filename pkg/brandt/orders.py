import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from django.db import models

from .algebra import (
    QuatAlgebra,
    congruence_sublattice,
    construct_definite,
    is_closed,
    lattice_products,
    maximal_order_lattice,
    radical_mod,
    reduced_discriminant_of,
)
from .arith import factor, kronecker, valuation
from .exceptions import OrderConstructionError
from .lattice import Lattice

logger = logging.getLogger(__name__)


class OrderKind(models.TextChoices):
    SPLIT_EICHLER = 'split-eichler', 'Eichler order at a split prime'
    RAMIFIED_UNRAMIFIED = 'ramified-unramified-quadratic', 'Special order, unramified quadratic E'
    RAMIFIED_RAMIFIED = 'ramified-ramified-quadratic', 'Special order, ramified quadratic E'


class EType(models.TextChoices):
    UNRAMIFIED = 'unramified', 'Unramified quadratic'
    RAMIFIED = 'ramified', 'Ramified quadratic'


@dataclass(frozen=True)
class LocalOrderType:
    """
    Local shape of an order at one prime of its level.

    omega is the embedded quadratic element generating o_E for ramified
    primes; variant tells apart the two ramified E at odd p; dyadic_t is
    t(E/F) for ramified E over Q_2.
    """
    prime: int
    kind: str
    exponent: int
    omega: tuple = None
    variant: int = 0
    dyadic_t: int = None

    def __post_init__(self):
        if self.exponent < 1:
            raise OrderConstructionError(f"Level exponent at {self.prime} must be positive")
        if self.kind == OrderKind.RAMIFIED_UNRAMIFIED and self.exponent % 2 == 0:
            raise OrderConstructionError(
                f"Unramified quadratic type at {self.prime} needs an odd level exponent, got {self.exponent}"
            )

    @property
    def etype(self):
        if self.kind == OrderKind.RAMIFIED_RAMIFIED:
            return EType.RAMIFIED
        if self.kind == OrderKind.RAMIFIED_UNRAMIFIED:
            return EType.UNRAMIFIED
        return None

    @property
    def ramification_index(self):
        """e(E/F): 2 for ramified E, 1 otherwise."""
        return 2 if self.kind == OrderKind.RAMIFIED_RAMIFIED else 1


@dataclass(frozen=True)
class Order:
    algebra: QuatAlgebra
    lattice: Lattice
    local_types: tuple = ()

    @property
    def rows(self):
        return self.lattice.rows

    @cached_property
    def reduced_discriminant(self):
        return reduced_discriminant_of(self.algebra, self.lattice)

    @property
    def level(self):
        return self.reduced_discriminant

    @property
    def discriminant(self):
        return self.algebra.discriminant

    def local_type(self, p):
        for local in self.local_types:
            if local.prime == p:
                return local
        return None

    @cached_property
    def level_partition(self):
        """(N1, N2, M): unramified-type part, ramified-type part, Eichler part."""
        n1 = n2 = m = 1
        for local in self.local_types:
            factor_ = local.prime ** local.exponent
            if local.kind == OrderKind.RAMIFIED_UNRAMIFIED:
                n1 *= factor_
            elif local.kind == OrderKind.RAMIFIED_RAMIFIED:
                n2 *= factor_
            else:
                m *= factor_
        return n1, n2, m

    @property
    def is_eichler(self):
        """Maximal at every p | D, so the classical Eichler mass formula applies."""
        return all(
            local.exponent == 1 for local in self.local_types if local.kind != OrderKind.SPLIT_EICHLER
        )

    def __contains__(self, x):
        return x in self.lattice

    def to_text(self):
        lines = [self.algebra.to_text(), f"level {self.level}"]
        for local in self.local_types:
            lines.append(f"local {local.prime} {local.kind} {local.exponent}")
        lines.append(self.lattice.to_text())
        return '\n'.join(lines)


@dataclass(frozen=True)
class TwoSidedIdeal:
    """The prime P of the maximal order above a ramified prime p."""
    order: Order
    prime: int
    lattice: Lattice

    @property
    def index(self):
        return self.lattice.index_in(self.order.lattice)

    def power(self, k):
        """P^k = p^(k // 2) * (P if k is odd else O)."""
        if k < 0:
            raise OrderConstructionError("Only nonnegative powers of P are supported")
        base = self.lattice if k % 2 else self.order.lattice
        return base.scale(self.prime ** (k // 2))

    def square(self):
        return lattice_products(self.order.algebra, self.lattice, self.lattice)


def reduced_discriminant(order):
    return order.reduced_discriminant


def maximal_order(algebra):
    """Maximal order of a definite algebra, typed as level D with r_p = 1."""
    lattice = maximal_order_lattice(algebra)
    local_types = tuple(
        LocalOrderType(prime=p, kind=OrderKind.RAMIFIED_UNRAMIFIED, exponent=1)
        for p in algebra.ramified_primes
    )
    return Order(algebra=algebra, lattice=lattice, local_types=local_types)


def two_sided_prime(omax, p):
    """
    Two-sided prime P = pO + rad(O/pO) of the maximal order above p | D.

    Args:
        omax: maximal Order
        p: prime dividing the discriminant

    Returns:
        TwoSidedIdeal with [O : P] = p^2 and P^2 = pO
    """
    if p not in omax.algebra.ramified_primes:
        raise OrderConstructionError(f"{p} does not divide the discriminant {omax.discriminant}")
    return TwoSidedIdeal(order=omax, prime=p, lattice=radical_mod(omax.algebra, omax.lattice, p))


def _scan(lattice, p):
    # Elements sum c_i b_i with 0 <= c_i < p in HNF coordinate order.
    for coords in itertools.product(range(p), repeat=lattice.rank):
        if any(coords):
            yield lattice.combine(coords)


def _trace_norm(algebra, x):
    return int(algebra.trace(x)), int(algebra.norm(x))


def _irreducible_mod(t, n, p):
    if p == 2:
        return t % 2 == 1 and n % 2 == 1
    return kronecker(t * t - 4 * n, p) == -1


def unramified_omega(omax, p):
    """First element of the maximal order generating the unramified quadratic o_E at p."""
    algebra = omax.algebra
    for x in _scan(omax.lattice, p):
        t, n = _trace_norm(algebra, x)
        if _irreducible_mod(t, n, p):
            return x
    raise OrderConstructionError(f"No unramified quadratic element found at p = {p}")


def ramified_variant(algebra, omega, p):
    """0 or 1 telling the two ramified quadratic E over Q_p apart (odd p only)."""
    n = int(algebra.norm(omega))
    return 0 if kronecker(-(n // p), p) == 1 else 1


def ramified_omega(omax, prime_ideal, variant=0):
    """
    First uniformizer omega in P \\ pO whose E = Q_p(omega) has the given variant.
    """
    algebra = omax.algebra
    p = prime_ideal.prime
    if p == 2 and variant != 0:
        raise OrderConstructionError("Only one ramified quadratic embedding is scanned at p = 2")
    p_order = omax.lattice.scale(p)
    for x in _scan(prime_ideal.lattice, p):
        if x in p_order:
            continue
        n = int(algebra.norm(x))
        if valuation(n, p) != 1:
            continue
        if p == 2 or ramified_variant(algebra, x, p) == variant:
            return x
    raise OrderConstructionError(f"No ramified quadratic element of variant {variant} at p = {p}")


def dyadic_t(algebra, omega):
    """t(E/F) = v_E(conj(omega) - omega) - 1 for a uniformizer omega over Q_2."""
    t, n = _trace_norm(algebra, omega)
    return valuation(t * t - 4 * n, 2) - 1


def special_lattice(omax, p, r, omega):
    """Lattice Z + Z omega + P^(r-1); no parity condition is imposed."""
    if r < 1:
        raise OrderConstructionError(f"Special order exponent must be positive, got {r}")
    prime_ideal = two_sided_prime(omax, p)
    one = (Fraction(1), Fraction(0), Fraction(0), Fraction(0))
    return Lattice.from_rows([one, omega]) + prime_ideal.power(r - 1)


def _local_special_type(omax, p, r, etype, variant):
    if etype == EType.UNRAMIFIED:
        omega = unramified_omega(omax, p)
        return LocalOrderType(prime=p, kind=OrderKind.RAMIFIED_UNRAMIFIED, exponent=r, omega=omega)
    omega = ramified_omega(omax, two_sided_prime(omax, p), variant)
    return LocalOrderType(
        prime=p,
        kind=OrderKind.RAMIFIED_RAMIFIED,
        exponent=r,
        omega=omega,
        variant=variant,
        dyadic_t=dyadic_t(omax.algebra, omega) if p == 2 else None,
    )


def _replace_local(local_types, new):
    kept = [local for local in local_types if local.prime != new.prime]
    return tuple(sorted(kept + [new], key=lambda local: local.prime))


def special_order(omax, p, r, etype, variant=0):
    """
    Special order O_r(E) = o_E + P^(r-1) at p | D, maximal elsewhere.

    Args:
        omax: maximal Order
        p: prime dividing the discriminant
        r: level exponent, r >= 1
        etype: EType of the embedded quadratic field
        variant: which ramified E to embed (0 or 1, odd p only)

    Returns:
        Order whose reduced discriminant has p-valuation r
    """
    if etype == EType.UNRAMIFIED and r % 2 == 0:
        raise OrderConstructionError(
            f"Unramified quadratic type needs an odd exponent at {p}, got {r}"
        )
    local = _local_special_type(omax, p, r, etype, variant)
    logger.info(f"omega_E at p = {p} ({etype}, variant {variant}): {local.omega}")
    lattice = special_lattice(omax, p, r, local.omega)
    return Order(
        algebra=omax.algebra,
        lattice=lattice,
        local_types=_replace_local(omax.local_types, local),
    )


def split_idempotent(order, q, precision=1):
    """
    Idempotent e of O/q^precision O with tr(e) = 1 and N(e) = 0, as an element of O.

    Found by a deterministic scan of O/qO and Hensel-lifted with e <- 3e^2 - 2e^3.
    """
    algebra = order.algebra
    lattice = order.lattice
    seed = None
    for coords in itertools.product(range(q), repeat=4):
        x = lattice.combine(coords)
        t, n = _trace_norm(algebra, x)
        if t % q == 1 % q and n % q == 0:
            seed = coords
            break
    if seed is None:
        raise OrderConstructionError(f"No idempotent modulo {q}; is {q} split in the order?")

    modulus = q ** precision
    coords = list(seed)
    while True:
        e = lattice.combine(coords)
        square = algebra.multiply(e, e)
        if all(c % modulus == 0 for c in lattice.coordinates(tuple(s - x for s, x in zip(square, e)))):
            return e
        cube = algebra.multiply(square, e)
        lifted = tuple(3 * s - 2 * c for s, c in zip(square, cube))
        coords = [c % modulus for c in lattice.coordinates(lifted)]


def _upper_right_unit(order, e, q):
    # u = e b (1 - e) not divisible by q, so tr(u x) picks out a lower-left entry.
    algebra = order.algebra
    one_minus_e = tuple(Fraction(int(k == 0)) - c for k, c in enumerate(e))
    for b in order.rows:
        u = algebra.multiply(algebra.multiply(e, b), one_minus_e)
        coords = order.lattice.coordinates(u)
        if any(c % q for c in coords):
            return u
    raise OrderConstructionError(f"Idempotent modulo {q} does not split the order")


def eichler_lattice(order, q, k):
    """Sublattice of the order with lower-left entry divisible by q^k at q."""
    e = split_idempotent(order, q, precision=k + 1)
    u = _upper_right_unit(order, e, q)
    algebra = order.algebra
    conditions = [[int(algebra.trace(algebra.multiply(u, b))) for b in order.rows]]
    return congruence_sublattice(order.lattice, conditions, q ** k)


def _apply_eichler(order, M):
    lattice = order.lattice
    local_types = order.local_types
    for q, k in factor(M):
        current = Order(algebra=order.algebra, lattice=lattice)
        lattice = eichler_lattice(current, q, k)
        local_types = _replace_local(
            local_types, LocalOrderType(prime=q, kind=OrderKind.SPLIT_EICHLER, exponent=k)
        )
    return Order(algebra=order.algebra, lattice=lattice, local_types=local_types)


def eichler_order(omax, M):
    """
    Eichler order of level D*M inside the maximal order.

    Args:
        omax: maximal Order
        M: positive integer coprime to D

    Returns:
        Order with reduced discriminant D*M
    """
    M = int(M)
    if M < 1:
        raise OrderConstructionError(f"Eichler level must be positive, got {M}")
    D = omax.discriminant
    if any(M % p == 0 for p in omax.algebra.ramified_primes):
        raise OrderConstructionError(f"Eichler level {M} is not coprime to the discriminant {D}")
    order = _apply_eichler(omax, M)
    if order.reduced_discriminant != D * M:
        raise OrderConstructionError(f"Eichler order has level {order.reduced_discriminant}, expected {D * M}")
    return order


def default_etype(r):
    return EType.UNRAMIFIED if r % 2 else EType.RAMIFIED


def build_order(D, N, etypes=None, variants=None, algebra=None):
    """
    Global special order of level N in the definite algebra of discriminant D.

    Args:
        D: discriminant of the algebra
        N: level; every p | D must divide N
        etypes: optional {p: EType}; default is unramified for odd v_p(N)
        variants: optional {p: 0 or 1} choosing the ramified E at odd p
        algebra: optional QuatAlgebra to reuse

    Returns:
        Order with reduced discriminant N
    """
    D, N = int(D), int(N)
    etypes = dict(etypes or {})
    variants = dict(variants or {})
    algebra = algebra or construct_definite(D)
    if N < 1 or N % D:
        raise OrderConstructionError(f"Level {N} is not divisible by the discriminant {D}")
    unknown = set(etypes) - set(algebra.ramified_primes)
    if unknown:
        raise OrderConstructionError(f"Quadratic types given at primes not dividing D: {sorted(unknown)}")

    omax = maximal_order(algebra)
    lattice = omax.lattice
    local_types = omax.local_types
    M = N
    for p in algebra.ramified_primes:
        r = valuation(N, p)
        M //= p ** r
        etype = etypes.get(p, default_etype(r))
        if etype == EType.UNRAMIFIED and r % 2 == 0:
            raise OrderConstructionError(
                f"Unramified quadratic type at {p} needs odd v_p(N), got {r}"
            )
        if r == 1 and etype == EType.UNRAMIFIED:
            continue
        special = special_order(omax, p, r, etype, variants.get(p, 0))
        lattice = lattice.intersection(special.lattice)
        local_types = _replace_local(local_types, special.local_type(p))

    order = _apply_eichler(Order(algebra=algebra, lattice=lattice, local_types=local_types), M)
    if not is_closed(algebra, order.lattice):
        raise OrderConstructionError("Constructed lattice is not closed under multiplication")
    if order.reduced_discriminant != N:
        raise OrderConstructionError(f"Constructed order has level {order.reduced_discriminant}, expected {N}")
    logger.info(f"Built order of level {N} in {algebra.to_text()}")
    return order


def superorder_levels(order):
    """
    Levels N' of the superorders entering the new/old decomposition.

    Returns:
        list of (N', multiplicity) sorted by decreasing N', with (N, 1) first;
        multiplicity is prod over q^k || M of (k - k' + 1)
    """
    ranges = []
    for local in order.local_types:
        if local.kind == OrderKind.SPLIT_EICHLER:
            exponents = range(0, local.exponent + 1)
        else:
            exponents = [
                r for r in range(1, local.exponent + 1)
                if local.kind == OrderKind.RAMIFIED_RAMIFIED or r % 2 == 1
            ]
        ranges.append([(local, r) for r in exponents])

    levels = []
    for combination in itertools.product(*ranges):
        level = order.discriminant
        multiplicity = 1
        for local, r in combination:
            if local.kind == OrderKind.SPLIT_EICHLER:
                level *= local.prime ** r
                multiplicity *= local.exponent - r + 1
            else:
                level *= local.prime ** (r - 1)
        levels.append((level, multiplicity))
    return sorted(levels, reverse=True)


def superorder(order, level):
    """Order of the given divisor level keeping the embedded quadratic types of order."""
    etypes = {}
    variants = {}
    for local in order.local_types:
        if local.kind == OrderKind.SPLIT_EICHLER:
            continue
        r = valuation(level, local.prime)
        etypes[local.prime] = EType.UNRAMIFIED if r == 1 else local.etype
        variants[local.prime] = local.variant
    return build_order(order.discriminant, level, etypes=etypes, variants=variants, algebra=order.algebra)
