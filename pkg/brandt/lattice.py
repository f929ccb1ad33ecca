import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import gcd, lcm

from sympy import Matrix
from sympy.polys.domains import GF
from sympy.polys.matrices import DomainMatrix

from .exceptions import DefinitenessError

logger = logging.getLogger(__name__)


def xgcd(a, b):
    """Return (g, x, y) with g = gcd(a, b) >= 0 and x*a + y*b == g."""
    x, next_x = 1, 0
    y, next_y = 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x, next_x = next_x, x - q * next_x
        y, next_y = next_y, y - q * next_y
    if a < 0:
        return -a, -x, -y
    return a, x, y


def identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def hnf(m):
    """
    Hermite normal form of the row lattice of an integer matrix.

    Row convention: U acts on the left and the rows of H span the same
    lattice as the rows of m. The column form is hnf of the transpose,
    transposed back.

    Args:
        m: list of integer rows (any rank)

    Returns:
        (H, U): U is unimodular, U*m == H, H is upper triangular in echelon
        form with positive pivots, entries above each pivot reduced into
        [0, pivot), zero rows last.
    """
    rows = [[int(x) for x in row] for row in m]
    nrows = len(rows)
    ncols = len(rows[0]) if rows else 0
    transform = identity(nrows)
    pivot = 0
    for col in range(ncols):
        if pivot == nrows:
            break
        for r in range(pivot + 1, nrows):
            b = rows[r][col]
            if b == 0:
                continue
            a = rows[pivot][col]
            g, x, y = xgcd(a, b)
            ag, bg = a // g, b // g
            top, other = rows[pivot], rows[r]
            rows[pivot] = [x * s + y * t for s, t in zip(top, other)]
            rows[r] = [-bg * s + ag * t for s, t in zip(top, other)]
            top, other = transform[pivot], transform[r]
            transform[pivot] = [x * s + y * t for s, t in zip(top, other)]
            transform[r] = [-bg * s + ag * t for s, t in zip(top, other)]
        lead = rows[pivot][col]
        if lead == 0:
            continue
        if lead < 0:
            rows[pivot] = [-x for x in rows[pivot]]
            transform[pivot] = [-x for x in transform[pivot]]
            lead = -lead
        for r in range(pivot):
            q = rows[r][col] // lead
            if q:
                rows[r] = [s - q * t for s, t in zip(rows[r], rows[pivot])]
                transform[r] = [s - q * t for s, t in zip(transform[r], transform[pivot])]
        pivot += 1
    return rows, transform


def integer_kernel(m):
    """Z-basis of {v in Z^n : m v = 0}; always saturated."""
    if not m:
        raise ValueError("integer_kernel() needs at least one row")
    ncols = len(m[0])
    transposed = [[m[r][c] for r in range(len(m))] for c in range(ncols)]
    h, u = hnf(transposed)
    return [u[i] for i, row in enumerate(h) if not any(row)]


def to_fraction(value):
    """Convert an int, Fraction or sympy Rational to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(int(value.p), int(value.q))


def rational_inverse(m):
    inverse = Matrix(m).inv()
    return [[to_fraction(inverse[i, j]) for j in range(inverse.cols)] for i in range(inverse.rows)]


def rational_determinant(m):
    return to_fraction(Matrix(m).det())


def rref_mod(rows, p):
    """
    Reduced row echelon form over GF(p).

    Returns:
        (nonzero rows with entries in [0, p), pivot columns)
    """
    domain = GF(p)
    ncols = len(rows[0])
    matrix = DomainMatrix([[domain(int(x)) for x in row] for row in rows], (len(rows), ncols), domain)
    reduced, pivots = matrix.rref()
    dense = reduced.to_Matrix()
    echelon = [[int(dense[i, j]) % p for j in range(ncols)] for i in range(len(pivots))]
    return echelon, tuple(pivots)


@dataclass(frozen=True)
class Lattice:
    """
    A Z-lattice in Q^n in canonical form: rows of an integer HNF and a
    positive common denominator, with no common factor between them.
    """
    basis: tuple
    denominator: int

    @classmethod
    def from_rows(cls, rows):
        rows = [[Fraction(x) for x in row] for row in rows]
        if not rows:
            raise ValueError("A lattice needs at least one generator")
        den = lcm(*(x.denominator for row in rows for x in row))
        scaled = [[int(x * den) for x in row] for row in rows]
        h, _ = hnf(scaled)
        h = [row for row in h if any(row)]
        if not h:
            raise ValueError("Generators span the zero lattice")
        content = gcd(den, *(x for row in h for x in row))
        return cls(
            basis=tuple(tuple(x // content for x in row) for row in h),
            denominator=den // content,
        )

    @property
    def rank(self):
        return len(self.basis)

    @property
    def dimension(self):
        return len(self.basis[0])

    @cached_property
    def rows(self):
        return tuple(tuple(Fraction(x, self.denominator) for x in row) for row in self.basis)

    def _require_full_rank(self):
        if self.rank != self.dimension:
            raise ValueError("Operation needs a full-rank lattice")

    @cached_property
    def volume(self):
        """Absolute determinant of a basis."""
        self._require_full_rank()
        pivots = math.prod(self.basis[i][i] for i in range(self.rank))
        return Fraction(pivots, self.denominator ** self.rank)

    def coordinates(self, vector):
        """Integer coordinates of vector in the HNF basis, or None if outside."""
        self._require_full_rank()
        target = [Fraction(x) * self.denominator for x in vector]
        coords = []
        for i, row in enumerate(self.basis):
            c = target[i] / row[i]
            if c.denominator != 1:
                return None
            c = int(c)
            coords.append(c)
            if c:
                target = [t - c * r for t, r in zip(target, row)]
        if any(target):
            return None
        return tuple(coords)

    def combine(self, coords):
        """The vector sum c_i b_i for integer (or rational) coordinates c."""
        rows = self.rows
        return tuple(
            sum(c * row[k] for c, row in zip(coords, rows)) for k in range(self.dimension)
        )

    def __contains__(self, vector):
        return self.coordinates(vector) is not None

    def contains_lattice(self, other):
        return all(row in self for row in other.rows)

    def __add__(self, other):
        return Lattice.from_rows(self.rows + other.rows)

    def scale(self, factor):
        factor = Fraction(factor)
        return Lattice.from_rows([[factor * x for x in row] for row in self.rows])

    def dual(self):
        """Dual lattice under the standard dot product."""
        self._require_full_rank()
        inverse = rational_inverse([list(row) for row in self.rows])
        n = self.rank
        return Lattice.from_rows([[inverse[j][i] for j in range(n)] for i in range(n)])

    def intersection(self, other):
        return (self.dual() + other.dual()).dual()

    def index_in(self, other):
        """[other : self] for a full-rank sublattice self of other."""
        ratio = self.volume / other.volume
        if ratio.denominator != 1:
            raise ValueError("Not a sublattice")
        return int(ratio)

    def sort_key(self):
        return (self.denominator, self.basis)

    def to_text(self):
        lines = [f"denominator {self.denominator}"]
        lines.extend(' '.join(str(x) for x in row) for row in self.basis)
        return '\n'.join(lines)


class GramForm:
    """Symmetric rational matrix of a quadratic form x^T G x."""

    def __init__(self, matrix):
        self.matrix = tuple(tuple(Fraction(x) for x in row) for row in matrix)
        n = len(self.matrix)
        for i in range(n):
            for j in range(i):
                if self.matrix[i][j] != self.matrix[j][i]:
                    raise ValueError("Gram matrix must be symmetric")

    @property
    def rank(self):
        return len(self.matrix)

    def value(self, x):
        g = self.matrix
        return sum(g[i][j] * x[i] * x[j] for i in range(self.rank) for j in range(self.rank))

    @cached_property
    def is_positive_definite(self):
        n = self.rank
        return all(
            rational_determinant([list(row[:k]) for row in self.matrix[:k]]) > 0
            for k in range(1, n + 1)
        )

    def integral_scaling(self):
        """Smallest positive integer L with L*G integral."""
        return lcm(*(x.denominator for row in self.matrix for x in row))

    def transformed(self, t):
        """Gram matrix of the basis given by the integer rows of t."""
        g = self.matrix
        n = self.rank
        gt = [[sum(g[i][k] * t[j][k] for k in range(n)) for j in range(len(t))] for i in range(n)]
        return GramForm([[sum(t[a][i] * gt[i][b] for i in range(n)) for b in range(len(t))]
                         for a in range(len(t))])


def _gram_schmidt(g):
    n = len(g)
    mu = [[Fraction(0)] * n for _ in range(n)]
    bstar = [Fraction(0)] * n
    for i in range(n):
        for j in range(i):
            s = g[i][j] - sum(mu[j][k] * mu[i][k] * bstar[k] for k in range(j))
            mu[i][j] = s / bstar[j]
        bstar[i] = g[i][i] - sum(mu[i][j] ** 2 * bstar[j] for j in range(i))
    return mu, bstar


def _round_half_up(x):
    return math.floor(x + Fraction(1, 2))


def lll_gram(form, delta=Fraction(3, 4)):
    """
    Exact LLL reduction working on a Gram matrix.

    Args:
        form: positive definite GramForm
        delta: Lovasz constant

    Returns:
        (reduced GramForm, T) with T unimodular and reduced = T G T^T
    """
    n = form.rank
    t = identity(n)
    g = [list(row) for row in form.matrix]

    def regram():
        return [list(row) for row in form.transformed(t).matrix]

    k = 1
    while k < n:
        mu, bstar = _gram_schmidt(g)
        for j in range(k - 1, -1, -1):
            q = _round_half_up(mu[k][j])
            if q:
                t[k] = [a - q * b for a, b in zip(t[k], t[j])]
                g = regram()
                mu, bstar = _gram_schmidt(g)
        if bstar[k] >= (delta - mu[k][k - 1] ** 2) * bstar[k - 1]:
            k += 1
        else:
            t[k], t[k - 1] = t[k - 1], t[k]
            g = regram()
            k = max(k - 1, 1)
    return GramForm(g), t


@dataclass
class ShortVectors:
    """One representative per +-pair, sorted, with pair counts per exact value."""
    vectors: list
    counts: dict

    def count(self, value):
        return self.counts.get(Fraction(value), 0)


class _Enumerator:
    # Fincke-Pohst on an LLL-reduced integral form; candidates are checked exactly.
    # Float rounding only widens each interval by SLACK, so the walk visits a
    # superset of the vectors with Q(y) <= bound; exact_value decides membership.

    SLACK = 1e-6

    def __init__(self, form):
        if not form.is_positive_definite:
            raise DefinitenessError("short vector enumeration needs a positive definite form")
        self.scale = form.integral_scaling()
        integral = GramForm([[x * self.scale for x in row] for row in form.matrix])
        reduced, self.transform = lll_gram(integral)
        self.q = [[int(x) for x in row] for row in reduced.matrix]
        self.n = reduced.rank
        self._decompose()

    def _decompose(self):
        n = self.n
        q = [[Fraction(x) for x in row] for row in self.q]
        coeff = [[Fraction(0)] * n for _ in range(n)]
        diag = [Fraction(0)] * n
        for i in range(n):
            diag[i] = q[i][i] - sum(diag[k] * coeff[k][i] ** 2 for k in range(i))
            for j in range(i + 1, n):
                coeff[i][j] = (q[i][j] - sum(diag[k] * coeff[k][i] * coeff[k][j] for k in range(i))) / diag[i]
        self.diag = [float(x) for x in diag]
        self.coeff = [[float(x) for x in row] for row in coeff]

    def exact_value(self, y):
        q = self.q
        n = self.n
        return sum(q[i][j] * y[i] * y[j] for i in range(n) for j in range(n))

    def candidates(self, bound):
        """Yield (y, Q(y)) with 0 < Q(y) <= bound, first nonzero entry positive."""
        n = self.n
        y = [0] * n
        diag, coeff = self.diag, self.coeff

        def walk(i, remaining):
            center = -sum(coeff[i][j] * y[j] for j in range(i + 1, n))
            radius = math.sqrt(max(remaining, 0.0) / diag[i]) + self.SLACK
            lo = math.ceil(center - radius)
            hi = math.floor(center + radius)
            for x in range(lo, hi + 1):
                y[i] = x
                rest = remaining - diag[i] * (x - center) ** 2
                if i == 0:
                    if any(y):
                        lead = next(v for v in y if v)
                        if lead > 0:
                            value = self.exact_value(y)
                            if 0 < value <= bound:
                                yield tuple(y), value
                else:
                    yield from walk(i - 1, rest)
            y[i] = 0

        yield from walk(n - 1, float(bound) * (1 + 1e-12) + self.SLACK)

    def original(self, y):
        t = self.transform
        x = tuple(sum(y[i] * t[i][j] for i in range(self.n)) for j in range(self.n))
        return max(x, tuple(-v for v in x))


def short_vectors(form, bound):
    """
    All nonzero x with x^T G x <= bound, one per +-pair.

    Args:
        form: positive definite GramForm
        bound: nonnegative rational

    Returns:
        ShortVectors with representatives (lexicographically larger of x, -x)
        sorted lexicographically as (coordinates, value), and counts of
        pairs at each exact value.
    """
    bound = Fraction(bound)
    enumerator = _Enumerator(form)
    scaled_bound = math.floor(bound * enumerator.scale)
    vectors = []
    counts = {}
    if scaled_bound > 0:
        for y, value in enumerator.candidates(scaled_bound):
            value = Fraction(value, enumerator.scale)
            vectors.append((enumerator.original(y), value))
            counts[value] = counts.get(value, 0) + 1
    vectors.sort()
    logger.debug(f"Enumerated {len(vectors)} vector pairs up to {bound}")
    return ShortVectors(vectors=vectors, counts=counts)


def represents(form, value):
    """True iff the form takes exactly this value; stops at the first hit."""
    value = Fraction(value)
    enumerator = _Enumerator(form)
    target = value * enumerator.scale
    if target.denominator != 1 or target <= 0:
        return False
    target = int(target)
    return any(v == target for _, v in enumerator.candidates(target))


def minimum(form):
    """Smallest nonzero value of the form."""
    enumerator = _Enumerator(form)
    bound = min(enumerator.q[i][i] for i in range(enumerator.n))
    return Fraction(min(v for _, v in enumerator.candidates(bound)), enumerator.scale)
