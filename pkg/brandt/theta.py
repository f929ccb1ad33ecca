import logging
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from sympy import Matrix, Poly

from .arith import divisor_sum_constrained, eisenstein_constant_term, gamma0_index
from .exceptions import IdealError, ParameterError
from .hecke import X, HeckeModule, evaluate
from .lattice import to_fraction
from .oracle import record_multiplicity

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QExpansion:
    """Coefficients a_0 .. a_B of a q-series."""
    label: str
    precision: int
    coefficients: tuple

    def __post_init__(self):
        if len(self.coefficients) != self.precision + 1:
            raise ParameterError(f"{self.label}: expected {self.precision + 1} coefficients")

    def __getitem__(self, n):
        return self.coefficients[n]

    @property
    def is_cuspidal(self):
        return self.coefficients[0] == 0

    def to_text(self):
        return f"{self.label}: " + ' '.join(str(c) for c in self.coefficients)


def theta_entry(module, i, j, precision):
    """
    Theta series sum_n (A_n)_ij q^n with constant term (A_0)_ij = delta_ij / e_i.

    Args:
        module: HeckeModule
        i, j: class indices, 1-based
        precision: B >= 1
    """
    if not (1 <= i <= module.h and 1 <= j <= module.h):
        raise IdealError(f"Class indices ({i}, {j}) outside 1..{module.h}")
    if precision < 1:
        raise ParameterError(f"Precision must be at least 1, got {precision}")
    module.prepare(precision)
    coefficients = [module.brandt(n).entries[i - 1][j - 1] for n in range(precision + 1)]
    return QExpansion(
        label=f"theta[{i},{j}] level {module.level}",
        precision=precision,
        coefficients=tuple(Fraction(c) for c in coefficients),
    )


def _projected_series(module, projector, precision):
    # Coefficient vectors ((A_n P)_ij)_{n <= B} over all (i, j), constant term 0.
    module.prepare(precision)
    products = [module.matrix(n) * projector for n in range(1, precision + 1)]
    series = []
    for i in range(module.h):
        for j in range(module.h):
            series.append([0] + [product[i, j] for product in products])
    return series


def _span(vectors):
    """Nonzero rows of the reduced row echelon form, each scaled to a leading 1."""
    if not vectors:
        return []
    reduced, pivots = Matrix(vectors).rref()
    return [[to_fraction(x) for x in reduced.row(k)] for k in range(len(pivots))]


def _eigenforms(module, space, precision):
    # One normalized series per root of rad(new)(A_ell), when all roots are rational and simple.
    radical = space.new_part.radical()
    roots = radical.roots()
    if roots is None:
        return None
    forms = []
    matrix = module.matrix(space.ell)
    rest = space.rest.radical().poly
    for root in roots:
        others = radical.poly.quo(Poly(X - int(root), X))
        projector = evaluate(others * rest, matrix)
        span = _span(_projected_series(module, projector, precision))
        if len(span) != 1 or span[0][1] == 0:
            return None
        forms.append([c / span[0][1] for c in span[0]])
    return forms


def theta_new_span(D, N, precision, etypes=None, variants=None, jobs=None, module=None):
    """
    Theta series of the Brandt module projected to the N-new cusp space.

    Returns:
        list of cuspidal QExpansion; normalized eigenforms (a_1 = 1) when
        the new char poly at the separating prime has simple rational roots
        and each root contributes one series, otherwise an echelon basis
    """
    module = module or HeckeModule.build(D, N, etypes=etypes, variants=variants, jobs=jobs)
    space = module.new_subspace()
    if space is None:
        logger.warning(f"theta_new_span: new space at level {module.level} could not be isolated")
        return None
    if not space.dimension:
        return []
    projector = module.new_projector()
    basis = _span(_projected_series(module, projector, precision))
    eigenforms = _eigenforms(module, space, precision)
    if eigenforms is not None and len(eigenforms) == len(basis):
        basis = eigenforms
    return [
        QExpansion(label=f"theta-new {index} level {module.level}", precision=precision,
                   coefficients=tuple(coefficients))
        for index, coefficients in enumerate(basis, start=1)
    ]


@dataclass
class ThetaKernelReport:
    dim_new: int
    dim_theta_new: int
    kernel: int
    predicted_kernel: int = None

    @property
    def consistent(self):
        """True or False against the predicted kernel, None when no prediction exists."""
        if self.predicted_kernel is None:
            return None
        return self.kernel == self.predicted_kernel


def predicted_theta_kernel(order, db):
    """
    sum over N-new fixture forms of dim * (m - 1), m their multiplicity in
    the Brandt module; 2^s - 1 for s the primes of N2 where the form is
    higher-dimensional. None if a multiplicity is unknown.
    """
    total = 0
    for record in db.records_at(order.level):
        multiplicity, _ = record_multiplicity(record, order)
        if multiplicity is None:
            return None
        if multiplicity:
            total += record.dim * (multiplicity - 1)
    return total


def theta_kernel_dimension(D, N, db=None, etypes=None, variants=None, jobs=None, module=None):
    """
    (dim of the quaternionic N-new space, dim of its theta span, kernel),
    with the kernel predicted from fixture local types when db covers N.
    """
    module = module or HeckeModule.build(D, N, etypes=etypes, variants=variants, jobs=jobs)
    space = module.new_subspace()
    if space is None:
        return None
    span = theta_new_span(D, N, gamma0_index(module.level) // 6 + 1, module=module)
    report = ThetaKernelReport(
        dim_new=space.dimension,
        dim_theta_new=len(span),
        kernel=space.dimension - len(span),
    )
    if db is not None and db.covers(module.level):
        report.predicted_kernel = predicted_theta_kernel(module.order, db)
    return report


def eisenstein_q_expansion(a, b, precision):
    """
    E_{2,a,b}: constant term (-1/24) prod_{p | ab} (1 - 1/p), a_n the constrained divisor sums.
    """
    if gcd(a, b) != 1:
        raise ParameterError(f"E_2,a,b needs coprime a and b, got {a}, {b}")
    if a == 1 and b == 1:
        raise ParameterError("E_2,1,1 is not a modular form; take a or b > 1")
    if precision < 0:
        raise ParameterError(f"Precision must be nonnegative, got {precision}")
    coefficients = [eisenstein_constant_term(a, b)]
    coefficients += [Fraction(divisor_sum_constrained(n, a, b)) for n in range(1, precision + 1)]
    return QExpansion(label=f"E2[{a},{b}]", precision=precision, coefficients=tuple(coefficients))
