from fractions import Fraction
from math import gcd

from django.test import SimpleTestCase
from sympy import eye

from brandt.exceptions import ConsistencyError, ParameterError
from brandt.hecke import (
    CharPoly,
    CheckResult,
    HeckeModule,
    QuadraticCharacter,
    X,
    brandt_matrix,
    eisenstein_eigenvalue,
    hecke_report,
    new_charpoly,
)


class CharPolyTests(SimpleTestCase):

    def test_exact_quotient(self):
        """Test (x^2 - x - 6) / (x - 3) = x + 2."""
        self.assertEqual(CharPoly((1, -1, -6)).exact_quotient(CharPoly((1, -3))), CharPoly((1, 2)))

    def test_inexact_quotient(self):
        """Test a non-divisor raises ConsistencyError."""
        with self.assertRaises(ConsistencyError):
            CharPoly((1, -1, -6)).exact_quotient(CharPoly((1, 1)))

    def test_roots(self):
        """Test simple rational roots are listed and repeated roots are refused."""
        self.assertEqual(CharPoly((1, -1, -6)).roots(), [-2, 3])
        self.assertIsNone(CharPoly((1, -2, 1)).roots())
        self.assertIsNone(CharPoly((1, 0, -2)).roots())

    def test_radical_and_power(self):
        """Test rad((x - 1)^2) = x - 1."""
        square = CharPoly((1, -1)) ** 2
        self.assertEqual(square, CharPoly((1, -2, 1)))
        self.assertEqual(square.radical(), CharPoly((1, -1)))

    def test_not_monic(self):
        """Test a non-monic polynomial is rejected."""
        with self.assertRaises(ConsistencyError):
            CharPoly.from_poly(2 * X + 1)


class QuadraticCharacterTests(SimpleTestCase):

    def test_trivial(self):
        """Test the empty product is the trivial character."""
        chi = QuadraticCharacter()
        self.assertEqual(chi(7), 1)
        self.assertEqual(chi.label(), 'trivial')

    def test_character_of_eleven(self):
        """Test kronecker(-11, .) on a residue and a non-residue."""
        chi = QuadraticCharacter(((11, -11),))
        self.assertEqual(chi(3), 1)
        self.assertEqual(chi(2), -1)
        self.assertEqual(chi(Fraction(3, 2)), -1)

    def test_twisted_eigenvalue(self):
        """Test mu(n) sigma(n) for the character of -11."""
        chi = QuadraticCharacter(((11, -11),))
        self.assertEqual(eisenstein_eigenvalue(chi, 2), -3)
        self.assertEqual(eisenstein_eigenvalue(chi, 3), 4)


class LevelElevenTests(SimpleTestCase):
    """Brandt module of the maximal order of discriminant 11."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.module = HeckeModule.build(11, 11, use_cache=False)

    def test_a0_and_a1(self):
        """Test A_0 = diag(1/e_i) and A_1 = I."""
        self.assertEqual(self.module.brandt(0).entries, ((Fraction(1, 2), 0), (0, Fraction(1, 3))))
        self.assertEqual(self.module.brandt(1).entries, ((1, 0), (0, 1)))

    def test_a2(self):
        """Test A_2 has row sums 3 and char poly x^2 - x - 6."""
        a2 = self.module.brandt(2)
        self.assertEqual(a2.entries, ((1, 2), (3, 0)))
        self.assertEqual(a2.row_sums(), [3, 3])
        self.assertEqual(self.module.full_charpoly(2), CharPoly((1, -1, -6)))

    def test_symmetry(self):
        """Test a_ij e_j = a_ji e_i for n up to 10."""
        e = self.module.unit_orders
        for n in range(1, 11):
            a = self.module.brandt(n).entries
            for i in range(2):
                for j in range(2):
                    self.assertEqual(a[i][j] * e[j], a[j][i] * e[i])

    def test_eisenstein_basis(self):
        """Test only the trivial character is admissible for the maximal order."""
        ((mu, vector),) = self.module.eisenstein_basis()
        self.assertEqual(mu, QuadraticCharacter())
        self.assertEqual(vector, [1, 1])

    def test_eisenstein_rows(self):
        """Test row sums equal the Eisenstein coefficient for n coprime to 11."""
        for n in (2, 3, 4, 5, 6, 7, 8, 9, 10, 12):
            self.assertTrue(self.module.eisenstein_row_check(n), n)
        self.assertTrue(self.module.eisenstein_eigen_check(3))

    def test_cusp_charpoly(self):
        """Test the cusp part matches the elliptic curve 11a."""
        self.assertEqual(self.module.cusp_charpoly(2), CharPoly((1, 2)))
        self.assertEqual(self.module.cusp_charpoly(3), CharPoly((1, 1)))
        self.assertEqual(self.module.cusp_charpoly(5), CharPoly((1, -1)))
        self.assertEqual(self.module.cusp_charpoly(7), CharPoly((1, 2)))

    def test_hecke_relations(self):
        """Test A_4 = A_2^2 - 2 I and A_6 = A_2 A_3."""
        self.assertTrue(self.module.hecke_recurrence_check(2, 1))
        self.assertTrue(self.module.hecke_recurrence_check(3, 0))
        self.assertTrue(self.module.multiplicativity_check(2, 3))

    def test_parameter_errors(self):
        """Test negative n and n sharing a factor with the level."""
        with self.assertRaises(ParameterError):
            self.module.brandt(-1)
        with self.assertRaises(ParameterError):
            self.module.new_charpoly(11)
        with self.assertRaises(ParameterError):
            self.module.multiplicativity_check(2, 4)

    def test_new_subspace(self):
        """Test the whole cusp space is new at the maximal level."""
        space = self.module.new_subspace()
        self.assertEqual(space.dimension, 1)
        self.assertEqual(space.new_part, CharPoly((1, 2)))

    def test_a11_on_cusp_line(self):
        """Test A_11 acts on the cusp line by the Steinberg sign a_11 = 1."""
        with self.assertLogs('brandt.hecke', level='WARNING'):
            self.assertEqual(self.module.cusp_charpoly(11), CharPoly((1, -1)))

    def test_module_helpers(self):
        """Test the function forms of A_n and the new char poly."""
        self.assertEqual(brandt_matrix(self.module, 3).row_sums(), [4, 4])
        self.assertEqual(new_charpoly(11, 11, 3), CharPoly((1, 1)))


class LevelOneTwentyOneTests(SimpleTestCase):
    """Special order of level 121 with ramified E."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.module = HeckeModule.build(11, 121, use_cache=False)

    def test_eisenstein_basis(self):
        """Test the ramified order admits the trivial character and kronecker(-11, .)."""
        basis = self.module.eisenstein_basis()
        self.assertEqual([mu.discriminant for mu, _ in basis], [1, -11])
        self.assertEqual(set(basis[0][1]), {1})
        self.assertTrue(all(abs(value) == 1 for value in basis[1][1]))

    def test_dimensions(self):
        """Test h = 10 split as 2 Eisenstein and 8 cusp dimensions."""
        report = hecke_report(11, 121, [2, 3], module=self.module)
        self.assertEqual(report.h, 10)
        self.assertEqual(report.mass, 10)
        self.assertEqual(report.eisenstein_dimension, 2)
        self.assertEqual(report.cusp_dimension, 8)
        self.assertEqual([(level, m) for level, m, _ in report.new_parts], [(121, 1), (11, 1)])

    def test_cusp_charpoly(self):
        """Test A_2 on the cusp space is (x + 2)(x - 2) x^2 (x - 1)^2 (x + 1)^2."""
        self.assertEqual(self.module.cusp_charpoly(2), CharPoly((1, 0, -6, 0, 9, 0, -4, 0, 0)))

    def test_new_part(self):
        """Test removing the old form 11a leaves a 7-dimensional new part."""
        new = self.module.new_charpoly(2)
        self.assertEqual(new.degree, 7)
        self.assertEqual(new, CharPoly((1, 0, -6, 0, 9, 0, -4, 0, 0)).exact_quotient(CharPoly((1, 2))))

    def test_ramified_operator_kills_new_space(self):
        """Test A_11 vanishes on the 121-new space."""
        self.assertTrue(self.module.ramified_hecke_check(11, 1))

    def test_old_vanishing_outside_range(self):
        """Test the oldform vanishing check is skipped when v_p(N') < 3."""
        result = self.module.ramified_old_vanishing_check(11, 11, 1)
        self.assertEqual(result.status, CheckResult.Status.SKIPPED)

    def test_ramified_check_outside_d(self):
        """Test the ramified check refuses p outside D."""
        with self.assertRaises(ParameterError):
            self.module.ramified_hecke_check(3, 1)



class StructuralChecks:
    """Exact identities of A_n for n <= 30 on an Eichler order of level D * M."""
    D = None
    M = None
    bound = 30

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.module = HeckeModule.build(cls.D, cls.D * cls.M, use_cache=False)
        cls.module.prepare(cls.bound)

    def coprime(self):
        return [n for n in range(1, self.bound + 1) if gcd(n, self.module.level) == 1]

    def test_identity_and_integrality(self):
        """Test A_1 = I and every entry is a nonnegative integer."""
        h = self.module.h
        self.assertEqual(self.module.matrix(1), eye(h))
        for n in range(1, self.bound + 1):
            for row in self.module.brandt(n).entries:
                self.assertTrue(all(isinstance(x, int) and x >= 0 for x in row), n)

    def test_symmetry(self):
        """Test e_j a_ij = e_i a_ji for n coprime to the level."""
        e = self.module.unit_orders
        for n in self.coprime():
            a = self.module.brandt(n).entries
            for i in range(self.module.h):
                for j in range(self.module.h):
                    self.assertEqual(e[j] * a[i][j], e[i] * a[j][i], n)

    def test_commutativity(self):
        """Test A_m A_n = A_n A_m."""
        for m in range(2, self.bound + 1):
            for n in range(m + 1, self.bound + 1):
                a_m, a_n = self.module.matrix(m), self.module.matrix(n)
                self.assertEqual(a_m * a_n, a_n * a_m, (m, n))

    def test_recurrence(self):
        """Test A_(p^(r+1)) = A_p A_(p^r) - p A_(p^(r-1)) for p not dividing the level."""
        for p in (2, 3, 5):
            if self.module.level % p == 0:
                continue
            r = 1
            while p ** (r + 1) <= self.bound:
                self.assertTrue(self.module.hecke_recurrence_check(p, r), (p, r))
                r += 1

    def test_row_sums(self):
        """Test A_n applied to the all-ones vector gives C(n, E_2,D,M)."""
        for n in self.coprime():
            self.assertTrue(self.module.eisenstein_row_check(n), n)


class LevelSixTests(StructuralChecks, SimpleTestCase):
    D = 2
    M = 3


class LevelFifteenTests(StructuralChecks, SimpleTestCase):
    D = 3
    M = 5


class LevelTwentyTwoTests(StructuralChecks, SimpleTestCase):
    """Eichler order of level 22: two copies of the level-11 form and no new forms."""
    D = 11
    M = 2

    def test_oldforms(self):
        """Test cusp dimension 2, char poly (x + 1)^2 of A_3 and a trivial new part."""
        self.assertEqual(len(self.module.cusp_basis()), 2)
        self.assertEqual(self.module.cusp_charpoly(3), CharPoly((1, 2, 1)))
        self.assertEqual(self.module.new_charpoly(3), CharPoly((1,)))


class LevelThirtyThreeTests(SimpleTestCase):
    """Eichler order of level 33: 11a twice and 33a once."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.module = HeckeModule.build(11, 33, use_cache=False)

    def test_oldforms(self):
        """Test cusp dimension 3 and the char poly (x - 1)(x + 2)^2 of A_2."""
        self.assertEqual(len(self.module.cusp_basis()), 3)
        self.assertEqual(self.module.cusp_charpoly(2), CharPoly((1, 3, 0, -4)))
        self.assertEqual(self.module.new_charpoly(2), CharPoly((1, -1)))
