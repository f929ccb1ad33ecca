import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm

from django.db import models
from sympy import Matrix, Poly, Rational, Symbol, ZZ, div, eye, factor, zeros

from .arith import divisor_sum_constrained, kronecker, next_prime_coprime_to, valuation
from .exceptions import ConsistencyError, ParameterError
from .ideals import class_set, connecting_gram
from .lattice import GramForm, integer_kernel, short_vectors, to_fraction
from .orders import OrderKind, build_order, superorder, superorder_levels
from .workers import parallel_map

logger = logging.getLogger(__name__)

X = Symbol('x')

# Primes tried, in order, when looking for a Hecke operator that isolates a new part
SEPARATION_ATTEMPTS = 8


@dataclass(frozen=True)
class CharPoly:
    """Monic integer polynomial, coefficients leading first; (1,) is the empty product."""
    coefficients: tuple

    @classmethod
    def from_poly(cls, poly):
        coefficients = [to_fraction(c) for c in Poly(poly, X).all_coeffs()]
        if coefficients[0] != 1 or any(c.denominator != 1 for c in coefficients):
            raise ConsistencyError(f"Characteristic polynomial {poly} is not monic over Z")
        return cls(tuple(int(c) for c in coefficients))

    @classmethod
    def of_matrix(cls, matrix):
        if matrix.rows == 0:
            return cls((1,))
        return cls.from_poly(Poly(matrix.charpoly(X).all_coeffs(), X))

    @property
    def poly(self):
        return Poly(list(self.coefficients), X, domain=ZZ)

    @property
    def degree(self):
        return len(self.coefficients) - 1

    def __mul__(self, other):
        return CharPoly.from_poly(self.poly * other.poly)

    def __pow__(self, k):
        return CharPoly.from_poly(self.poly ** k)

    def exact_quotient(self, other):
        quotient, remainder = div(self.poly, other.poly)
        if not remainder.is_zero:
            logger.error(f"Inexact division of {self.to_text()} by {other.to_text()}")
            raise ConsistencyError(f"{other.to_text()} does not divide {self.to_text()}")
        return CharPoly.from_poly(quotient)

    def radical(self):
        return CharPoly.from_poly(self.poly.sqf_part())

    def gcd(self, other):
        return CharPoly.from_poly(self.poly.gcd(other.poly))

    def roots(self):
        """Integer roots, or None unless the polynomial splits into distinct linear factors over Q."""
        _, factors = self.poly.factor_list()
        roots = []
        for factor_, multiplicity in factors:
            if factor_.degree() != 1 or multiplicity != 1:
                return None
            a, b = factor_.all_coeffs()
            roots.append(Fraction(-int(b), int(a)))
        return sorted(roots)

    def to_text(self):
        return str(self.poly.as_expr())

    def factored_text(self):
        return str(factor(self.poly.as_expr()))


ONE = CharPoly((1,))


def to_sympy(rows):
    return Matrix([[Rational(x.numerator, x.denominator) if isinstance(x, Fraction) else x for x in row]
                   for row in rows])


def evaluate(poly, matrix):
    """poly(matrix) by Horner's rule; poly is a sympy Poly."""
    result = zeros(matrix.rows, matrix.cols)
    identity = eye(matrix.rows)
    for c in poly.all_coeffs():
        result = result * matrix + c * identity
    return result


@dataclass(frozen=True)
class BrandtMatrix:
    n: int
    entries: tuple

    @property
    def size(self):
        return len(self.entries)

    @property
    def matrix(self):
        return to_sympy(self.entries)

    def row_sums(self):
        return [sum(row) for row in self.entries]

    def to_text(self):
        return '\n'.join(' '.join(str(x) for x in row) for row in self.entries)


def _count_values(task):
    matrix, bound = task
    return short_vectors(GramForm(matrix), bound).counts


@dataclass(frozen=True)
class QuadraticCharacter:
    """kronecker(d, .) for d the product of local discriminants d_p; () is the trivial character."""
    components: tuple = ()

    @property
    def discriminant(self):
        d = 1
        for _, d_p in self.components:
            d *= d_p
        return d

    def __call__(self, n):
        n = Fraction(n)
        return kronecker(self.discriminant, n.numerator) * kronecker(self.discriminant, n.denominator)

    def label(self):
        if not self.components:
            return 'trivial'
        return f"kronecker({self.discriminant}, .)"


def _local_discriminants(p):
    # (d_p, conductor exponent) of the quadratic characters ramified only at p
    if p == 2:
        return [(-4, 2), (8, 3), (-8, 3)]
    return [(p if p % 4 == 1 else -p, 1)]


def _norms_in_kernel(d_p, p, c, t, n):
    modulus = p ** c
    for a in range(modulus):
        if a % p == 0:
            continue
        for b in range(modulus):
            if kronecker(d_p, (a * a + a * b * t + b * b * n) % modulus) != 1:
                return False
    return True


def admissible_components(local, algebra):
    """Local quadratic characters mu_p allowed at a p | D of the order."""
    if local.kind != OrderKind.RAMIFIED_RAMIFIED:
        return []
    p = local.prime
    t = int(algebra.trace(local.omega))
    n = int(algebra.norm(local.omega))
    return [
        (p, d_p) for d_p, c in _local_discriminants(p)
        if 2 * c <= local.exponent and _norms_in_kernel(d_p, p, c, t, n)
    ]


def admissible_characters(order):
    choices = [
        [None] + admissible_components(local, order.algebra)
        for local in order.local_types if local.kind != OrderKind.SPLIT_EICHLER
    ]
    characters = []
    for combination in itertools.product(*choices):
        characters.append(QuadraticCharacter(tuple(c for c in combination if c is not None)))
    return sorted(characters, key=lambda chi: (len(chi.components), chi.components))


def eisenstein_eigenvalue(mu, n, a=1, b=1):
    """Eigenvalue mu(n) C(n, E_{2,a,b}) of A_n on the Eisenstein vector of mu, gcd(n, N) = 1."""
    return mu(n) * divisor_sum_constrained(n, a, b)


@dataclass
class CheckResult:
    class Status(models.TextChoices):
        PASSED = 'passed'
        FAILED = 'failed'
        SKIPPED = 'skipped'

    name: str
    status: str
    detail: str = ''

    @property
    def failed(self):
        return self.status == self.Status.FAILED


@dataclass
class NewSubspace:
    """Saturated integer basis of the N-new cusp space, isolated through A_ell."""
    ell: int
    new_part: CharPoly
    rest: CharPoly
    basis: list

    @property
    def dimension(self):
        return len(self.basis)


class HeckeModule:
    """
    Brandt module of one order: its class set, Brandt matrices and the
    Eisenstein, cusp and new subspaces.

    Brandt entries come from one short-vector enumeration per pair of
    classes, extended whenever a larger n is requested.
    """

    def __init__(self, order, jobs=None, use_cache=True, registry=None):
        self.order = order
        self.jobs = jobs
        self.use_cache = use_cache
        self.classes = class_set(order, use_cache=use_cache)
        self.registry = registry if registry is not None else {}
        self.registry[order.level] = self
        self._bound = 0
        self._counts = {}
        self._matrices = {}
        self._new_charpolys = {}
        self._new_subspace = None

    @classmethod
    def build(cls, D, N, etypes=None, variants=None, jobs=None, use_cache=True):
        return cls(build_order(D, N, etypes=etypes, variants=variants), jobs=jobs, use_cache=use_cache)

    @property
    def level(self):
        return self.order.level

    @property
    def h(self):
        return self.classes.h

    @property
    def unit_orders(self):
        return self.classes.unit_orders

    @property
    def weights(self):
        return [Fraction(1, e) for e in self.unit_orders]

    def prepare(self, bound):
        """Enumerate every pair of classes up to norm bound, in parallel over pairs."""
        if bound <= self._bound:
            return
        ideals = self.classes.ideals
        pairs = [(i, j) for i in range(self.h) for j in range(i, self.h)]
        tasks = [(connecting_gram(ideals[i], ideals[j]).matrix, bound) for i, j in pairs]
        results = parallel_map(_count_values, tasks, self.jobs)
        self._counts = dict(zip(pairs, results))
        self._bound = bound
        logger.info(f"Enumerated {len(pairs)} class pairs up to {bound} at level {self.level}")

    def brandt(self, n):
        if n in self._matrices:
            return self._matrices[n]
        if n < 0:
            raise ParameterError(f"Brandt matrices need n >= 0, got {n}")
        if n == 0:
            entries = tuple(
                tuple(Fraction(1, e) if i == j else Fraction(0) for j in range(self.h))
                for i, e in enumerate(self.unit_orders)
            )
        else:
            self.prepare(n)
            rows = []
            for i in range(self.h):
                row = []
                for j in range(self.h):
                    count = self._counts[(min(i, j), max(i, j))].get(Fraction(n), 0)
                    entry = Fraction(count, self.unit_orders[j])
                    if entry.denominator != 1:
                        raise ConsistencyError(f"A_{n}[{i},{j}] = {entry} is not an integer")
                    row.append(int(entry))
                rows.append(tuple(row))
            entries = tuple(rows)
        matrix = BrandtMatrix(n=n, entries=entries)
        self._matrices[n] = matrix
        return matrix

    def matrix(self, n):
        return self.brandt(n).matrix

    # Eisenstein and cusp spaces

    def eisenstein_basis(self):
        vectors = []
        for mu in admissible_characters(self.order):
            vectors.append((mu, [mu(ideal.norm) for ideal in self.classes.ideals]))
        return vectors

    def cusp_basis(self):
        """Integer basis of the weighted orthogonal complement of the Eisenstein vectors."""
        scale = lcm(*self.unit_orders)
        conditions = [
            [v * scale // e for v, e in zip(vector, self.unit_orders)] for _, vector in self.eisenstein_basis()
        ]
        return integer_kernel(conditions)

    def restrict(self, matrix, basis):
        """Matrix of the operator on span(basis); the span must be invariant."""
        if not basis:
            return Matrix(0, 0, [])
        columns = Matrix(basis).T
        weights = Matrix.diag(*[Rational(1, e) for e in self.unit_orders])
        gram = columns.T * weights * columns
        restricted = gram.inv() * columns.T * weights * matrix * columns
        if columns * restricted != matrix * columns:
            raise ConsistencyError("Subspace is not invariant under the Hecke operator")
        return restricted

    def full_charpoly(self, n):
        return CharPoly.of_matrix(self.matrix(n))

    def cusp_charpoly(self, n):
        if gcd(n, self.level) != 1:
            logger.warning(f"cusp_charpoly: n = {n} shares a factor with the level {self.level}")
        return CharPoly.of_matrix(self.restrict(self.matrix(n), self.cusp_basis()))

    # New/old theory

    def superorder_module(self, level):
        if level not in self.registry:
            HeckeModule(superorder(self.order, level), jobs=self.jobs, use_cache=self.use_cache,
                        registry=self.registry)
        return self.registry[level]

    def new_charpoly(self, n):
        """Cusp char poly divided by the new parts of every superorder level with multiplicity."""
        if gcd(n, self.level) != 1:
            raise ParameterError(f"new_charpoly needs n coprime to {self.level}, got {n}")
        if n in self._new_charpolys:
            return self._new_charpolys[n]
        result = self.cusp_charpoly(n)
        for level, multiplicity in superorder_levels(self.order)[1:]:
            old = self.superorder_module(level).new_charpoly(n)
            result = result.exact_quotient(old ** multiplicity)
        self._new_charpolys[n] = result
        return result

    def separating_primes(self):
        ell = 1
        for _ in range(SEPARATION_ATTEMPTS):
            ell = next_prime_coprime_to(self.level, ell + 1)
            yield ell

    def new_subspace(self):
        """
        The N-new cusp space as the kernel of rad(new)(A_ell) for the first
        ell whose new part is coprime to the rest of the spectrum.

        Returns:
            NewSubspace, or None when no tried ell separates it
        """
        if self._new_subspace is not None:
            return self._new_subspace
        for ell in self.separating_primes():
            new = self.new_charpoly(ell)
            rest = self.full_charpoly(ell).exact_quotient(new)
            if new.degree and new.radical().gcd(rest.radical()).degree:
                logger.debug(f"A_{ell} does not separate the new part at level {self.level}")
                continue
            basis = integer_kernel(evaluate(new.radical().poly, self.matrix(ell)).tolist()) if new.degree else []
            if len(basis) != new.degree:
                raise ConsistencyError(
                    f"New subspace has dimension {len(basis)}, new char poly has degree {new.degree}"
                )
            self._new_subspace = NewSubspace(ell=ell, new_part=new, rest=rest, basis=basis)
            logger.info(f"New subspace of dimension {new.degree} isolated by A_{ell} at level {self.level}")
            return self._new_subspace
        logger.warning(f"No Hecke operator among {SEPARATION_ATTEMPTS} primes separates the new part")
        return None

    def new_projector(self):
        """(t g)(A_ell) with s f + t g = 1 for f = rad(new), g = rad(rest)."""
        space = self.new_subspace()
        if space is None:
            return None
        f = space.new_part.radical().poly.to_field()
        g = space.rest.radical().poly.to_field()
        _, t, h = f.gcdex(g)
        if h.as_expr() != 1:
            raise ConsistencyError("New part and rest share a factor")
        return evaluate(t * g, self.matrix(space.ell))

    def new_restriction(self, n):
        space = self.new_subspace()
        if space is None:
            return None
        return self.restrict(self.matrix(n), space.basis)

    # Checks

    def eisenstein_row_check(self, n):
        n1, n2, m = self.order.level_partition
        expected = divisor_sum_constrained(n, n1 * n2, m)
        return all(total == expected for total in self.brandt(n).row_sums())

    def eisenstein_eigen_check(self, n):
        """Each Eisenstein vector is an A_n eigenvector with eigenvalue mu(n) sigma(n)."""
        n1, n2, m = self.order.level_partition
        matrix = self.matrix(n)
        for mu, vector in self.eisenstein_basis():
            eigenvalue = eisenstein_eigenvalue(mu, n, n1 * n2, m)
            if matrix * Matrix(vector) != eigenvalue * Matrix(vector):
                return False
        return True

    def ramified_hecke_check(self, p, m):
        """
        A_{p^m} vanishes on the N-new cusp space, for p | D with v_p(N) >= 2.

        Returns:
            True/False, or None when the new space cannot be isolated
        """
        if p not in self.order.algebra.ramified_primes or valuation(self.level, p) < 2 or m < 1:
            raise ParameterError(f"ramified_hecke_check needs p | D, v_p(N) >= 2 and m >= 1 (p = {p}, m = {m})")
        space = self.new_subspace()
        if space is None:
            return None
        matrix = self.matrix(p ** m)
        return all(not any(matrix * Matrix(v)) for v in space.basis)

    def hecke_recurrence_check(self, p, r):
        """A_{p^(r+1)} = A_p A_{p^r} - p A_{p^(r-1)} for p not dividing N; r = 0 is A_p = A_p A_1."""
        if self.level % p == 0:
            raise ParameterError(f"Hecke recurrence needs p coprime to the level, got {p}")
        a_p = self.matrix(p)
        if r == 0:
            return a_p == a_p * self.matrix(1)
        lower = self.matrix(p ** (r - 1))
        return self.matrix(p ** (r + 1)) == a_p * self.matrix(p ** r) - p * lower

    def multiplicativity_check(self, m, n):
        if gcd(m, n) != 1:
            raise ParameterError(f"A_mn = A_m A_n needs coprime m, n, got {m}, {n}")
        return self.matrix(m * n) == self.matrix(m) * self.matrix(n)

    def ramified_old_vanishing_check(self, p, level, m):
        """
        A_{p^m} vanishes on the old space coming from level N' when
        c = v_p(N') >= 3 and m >= v_p(N) - c - 1.
        """
        name = f"old-vanishing p={p} N'={level} m={m}"
        r = valuation(self.level, p)
        c = valuation(level, p)
        if c < 3 or m < r - c - 1:
            return CheckResult(name, CheckResult.Status.SKIPPED, 'outside the range of the statement')
        multiplicities = dict(superorder_levels(self.order))
        if level not in multiplicities:
            raise ParameterError(f"{level} is not a superorder level of {self.level}")
        for ell in self.separating_primes():
            new = self.superorder_module(level).new_charpoly(ell)
            if not new.degree:
                return CheckResult(name, CheckResult.Status.SKIPPED, f'no {level}-new forms')
            rest = self.full_charpoly(ell).exact_quotient(new ** multiplicities[level])
            if new.radical().gcd(rest.radical()).degree:
                continue
            basis = integer_kernel(evaluate(new.radical().poly, self.matrix(ell)).tolist())
            matrix = self.matrix(p ** m)
            if all(not any(matrix * Matrix(v)) for v in basis):
                return CheckResult(name, CheckResult.Status.PASSED, f'isolated by A_{ell}')
            return CheckResult(name, CheckResult.Status.FAILED, f'A_{p ** m} is nonzero on the old space')
        logger.warning(f"{name}: repeated or shared factors for every tried prime")
        return CheckResult(name, CheckResult.Status.SKIPPED, 'old space not isolated by unramified operators')


@dataclass
class HeckeModuleReport:
    discriminant: int
    level: int
    h: int
    mass: Fraction
    unit_orders: list
    eisenstein_dimension: int
    cusp_dimension: int
    charpolys: dict = field(default_factory=dict)
    cusp_charpolys: dict = field(default_factory=dict)
    new_parts: list = field(default_factory=list)

    @property
    def full_dimension(self):
        return self.h


def hecke_report(D, N, primes, etypes=None, variants=None, jobs=None, use_cache=True, module=None):
    """
    Dimensions and char polys of the Brandt module of level N.

    new_parts lists (N', multiplicity, {ell: new char poly}) over the superorder levels.
    """
    module = module or HeckeModule.build(D, N, etypes=etypes, variants=variants, jobs=jobs, use_cache=use_cache)
    primes = [ell for ell in primes if module.level % ell]
    cusp_dimension = len(module.cusp_basis())
    report = HeckeModuleReport(
        discriminant=module.order.discriminant,
        level=module.level,
        h=module.h,
        mass=module.classes.mass,
        unit_orders=list(module.unit_orders),
        eisenstein_dimension=len(module.eisenstein_basis()),
        cusp_dimension=cusp_dimension,
    )
    if report.eisenstein_dimension + cusp_dimension != module.h:
        raise ConsistencyError("Eisenstein and cusp dimensions do not add up to h")
    if primes:
        module.prepare(max(primes))
    for ell in primes:
        report.charpolys[ell] = module.full_charpoly(ell)
        report.cusp_charpolys[ell] = module.cusp_charpoly(ell)
    for level, multiplicity in superorder_levels(module.order):
        sub = module if level == module.level else module.superorder_module(level)
        report.new_parts.append((level, multiplicity, {ell: sub.new_charpoly(ell) for ell in primes}))
    if primes:
        ell = primes[0]
        total = sum(multiplicity * parts[ell].degree for _, multiplicity, parts in report.new_parts)
        if total != cusp_dimension:
            raise ConsistencyError(f"New parts account for dimension {total}, cusp space has {cusp_dimension}")
    return report


def brandt_matrix(module, n):
    return module.brandt(n)


def new_charpoly(D, N, n, etypes=None, variants=None, jobs=None):
    return HeckeModule.build(D, N, etypes=etypes, variants=variants, jobs=jobs).new_charpoly(n)
