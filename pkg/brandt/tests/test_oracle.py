from unittest import skipUnless
from unittest.mock import MagicMock

from django.conf import settings
from django.test import SimpleTestCase
from sympy import Matrix

from brandt.exceptions import CoverageError, ParameterError
from brandt.fixtures import LocalKind, LocalRepDescriptor, load_fixtures, parse_fixtures
from brandt.hecke import CharPoly, HeckeModule, NewSubspace
from brandt.oracle import (
    Comparison,
    Confidence,
    Multiplicity,
    Outcome,
    congruence_check,
    congruent_fixture_forms,
    fixture_factor,
    local_multiplicity,
    predict_decomposition,
    record_multiplicity,
    verify_decomposition,
)
from brandt.orders import LocalOrderType, OrderKind, build_order


def rep(kind, c=None, minimal=True):
    return LocalRepDescriptor(kind=kind, c=c, minimal=minimal)


def unramified(p, r):
    return LocalOrderType(prime=p, kind=OrderKind.RAMIFIED_UNRAMIFIED, exponent=r)


def ramified(p, r, dyadic_t=None):
    return LocalOrderType(prime=p, kind=OrderKind.RAMIFIED_RAMIFIED, exponent=r, dyadic_t=dyadic_t)


class LocalMultiplicityTests(SimpleTestCase):
    """Invariant dimensions of local quaternionic representations."""

    def test_unknown_local_type(self):
        """Test an unknown type stays unknown."""
        self.assertEqual(local_multiplicity(rep(LocalKind.UNKNOWN), unramified(11, 1)), Multiplicity.UNKNOWN)

    def test_not_discrete_series(self):
        """Test principal series do not transfer to the quaternion side."""
        result = local_multiplicity(rep(LocalKind.PRINCIPAL_SERIES, c=1), unramified(11, 1))
        self.assertEqual(result, Multiplicity.ZERO)

    def test_conductor_above_level(self):
        """Test c > r gives zero."""
        result = local_multiplicity(rep(LocalKind.SUPERCUSPIDAL, c=3), unramified(11, 1))
        self.assertEqual(result, Multiplicity.ZERO)

    def test_unramified_embedding(self):
        """Test unramified E: Steinberg and odd minimal c give one, the rest zero."""
        self.assertEqual(local_multiplicity(rep(LocalKind.STEINBERG, c=1), unramified(11, 1)), Multiplicity.ONE)
        self.assertEqual(local_multiplicity(rep(LocalKind.SUPERCUSPIDAL, c=3), unramified(5, 3)), Multiplicity.ONE)
        self.assertEqual(local_multiplicity(rep(LocalKind.SUPERCUSPIDAL, c=2), unramified(5, 3)), Multiplicity.ZERO)
        self.assertEqual(
            local_multiplicity(rep(LocalKind.SUPERCUSPIDAL, c=3, minimal=False), unramified(5, 3)),
            Multiplicity.ZERO,
        )
        self.assertEqual(
            local_multiplicity(rep(LocalKind.SPECIAL_TWIST, c=2, minimal=False), unramified(5, 3)),
            Multiplicity.ZERO,
        )

    def test_ramified_embedding_odd_prime(self):
        """Test ramified E at odd p."""
        self.assertEqual(local_multiplicity(rep(LocalKind.STEINBERG, c=1), ramified(11, 2)), Multiplicity.ONE)
        self.assertEqual(
            local_multiplicity(rep(LocalKind.SPECIAL_TWIST, c=2, minimal=False), ramified(11, 2)),
            Multiplicity.ONE,
        )
        self.assertEqual(local_multiplicity(rep(LocalKind.SUPERCUSPIDAL, c=2), ramified(11, 2)), Multiplicity.TWO)
        self.assertEqual(
            local_multiplicity(rep(LocalKind.SUPERCUSPIDAL, c=3), ramified(11, 3)),
            Multiplicity.CONJECTURAL_ONE,
        )
        self.assertEqual(
            local_multiplicity(rep(LocalKind.SUPERCUSPIDAL, c=3, minimal=False), ramified(11, 3)),
            Multiplicity.ZERO,
        )

    def test_ramified_embedding_dyadic(self):
        """Test ramified E over Q_2."""
        self.assertEqual(local_multiplicity(rep(LocalKind.SUPERCUSPIDAL, c=3), ramified(2, 3, 1)), Multiplicity.ONE)
        self.assertEqual(
            local_multiplicity(rep(LocalKind.SUPERCUSPIDAL, c=5), ramified(2, 5, 1)),
            Multiplicity.UNKNOWN,
        )
        self.assertEqual(
            local_multiplicity(rep(LocalKind.SPECIAL_TWIST, c=2, minimal=False), ramified(2, 2, 1)),
            Multiplicity.UNKNOWN,
        )

    def test_dyadic_non_minimal(self):
        """Test a non-minimal dyadic type is zero only with a known minimal twist far enough down."""
        nonminimal = rep(LocalKind.SUPERCUSPIDAL, c=6, minimal=False)
        self.assertEqual(local_multiplicity(nonminimal, ramified(2, 6, 1), twist_conductor=3), Multiplicity.ZERO)
        self.assertEqual(local_multiplicity(nonminimal, ramified(2, 6, 1)), Multiplicity.UNKNOWN)
        self.assertEqual(local_multiplicity(nonminimal, ramified(2, 6, 1), twist_conductor=5), Multiplicity.UNKNOWN)

    def test_split_prime(self):
        """Test local_multiplicity refuses Eichler primes."""
        with self.assertRaises(ParameterError):
            local_multiplicity(rep(LocalKind.STEINBERG, c=1),
                               LocalOrderType(prime=2, kind=OrderKind.SPLIT_EICHLER, exponent=1))


class PredictionTests(SimpleTestCase):
    """Global decomposition predicted from the bundled fixtures."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.db = load_fixtures()

    def test_record_multiplicity_with_eichler_factor(self):
        """Test a level-11 form appears k + 1 times at level 11 * 2^k."""
        multiplicity, confidence = record_multiplicity(self.db.get('11a'), build_order(11, 44))
        self.assertEqual(multiplicity, 3)
        self.assertEqual(confidence, Confidence.PROVEN)

    def test_level_eleven(self):
        """Test the maximal order holds 11a once."""
        prediction = predict_decomposition(11, 11, self.db)
        self.assertEqual(
            [(t.level, t.selector, t.labels, t.multiplicity) for t in prediction.terms],
            [(11, 'steinberg@11', ['11a'], 1)],
        )
        self.assertEqual(prediction.predicted_h, 2)
        self.assertEqual(prediction.confidence, Confidence.PROVEN)

    def test_level_twenty_two(self):
        """Test 11a is counted twice at level 22 and 22 has no new forms."""
        prediction = predict_decomposition(11, 22, self.db)
        self.assertEqual([(t.level, t.multiplicity) for t in prediction.terms], [(11, 2)])
        self.assertEqual(prediction.predicted_cusp_dimension, 2)

    def test_level_one_twenty_one(self):
        """Test the ramified special order of level 121."""
        prediction = predict_decomposition(11, 121, self.db)
        self.assertEqual(
            [(t.level, t.selector, t.labels, t.multiplicity) for t in prediction.terms],
            [
                (11, 'steinberg@11', ['11a'], 1),
                (121, 'special-twist@11', ['121d'], 1),
                (121, 'supercuspidal@11', ['121a', '121b', '121c'], 2),
            ],
        )
        self.assertEqual(prediction.predicted_cusp_dimension, 8)
        self.assertEqual(prediction.predicted_eisenstein_dimension, 2)
        self.assertEqual(prediction.predicted_h, 10)
        self.assertIn('supercuspidal@11 x2 dim 3', prediction.to_text())

    def test_missing_level(self):
        """Test uncovered levels raise CoverageError."""
        with self.assertRaises(CoverageError) as raised:
            predict_decomposition(5, 125, self.db)
        self.assertEqual(raised.exception.missing_levels, [125])


class VerificationTests(SimpleTestCase):
    """Predictions checked against computed Brandt matrices."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.db = load_fixtures()

    def test_level_eleven_verified(self):
        """Test 11a matches A_ell on the cusp space at 2, 3, 5, 7."""
        module = HeckeModule.build(11, 11, use_cache=False)
        prediction = predict_decomposition(11, 11, self.db, order=module.order)
        report = verify_decomposition(prediction, module, [2, 3, 5, 7, 11])
        self.assertEqual(report.outcome, Outcome.VERIFIED)
        self.assertEqual([c.ell for c in report.comparisons], [2, 3, 5, 7])
        self.assertTrue(all(c.status == Comparison.MATCH for c in report.comparisons))

    def test_level_one_twenty_one_verified(self):
        """Test multiplicities 1, 1 and 2 reproduce the cusp char poly of A_2."""
        module = HeckeModule.build(11, 121, use_cache=False)
        prediction = predict_decomposition(11, 121, self.db, order=module.order)
        report = verify_decomposition(prediction, module, [2])
        self.assertEqual(report.outcome, Outcome.VERIFIED)
        self.assertEqual(report.comparisons[0].predicted, CharPoly((1, 0, -6, 0, 9, 0, -4, 0, 0)))

    def test_eichler_levels_verified(self):
        """Test oldform multiplicities at levels 14, 15, 22 and 33."""
        cases = [(7, 14, [3, 5, 11, 13]), (3, 15, [2, 7, 11, 13]), (11, 22, [3, 5, 7]), (11, 33, [2, 5, 7])]
        for D, N, primes in cases:
            with self.subTest(D=D, N=N):
                module = HeckeModule.build(D, N, use_cache=False)
                prediction = predict_decomposition(D, N, self.db, order=module.order)
                report = verify_decomposition(prediction, module, primes)
                self.assertEqual(report.outcome, Outcome.VERIFIED)

    def test_level_twenty_two_predicted_charpoly(self):
        """Test the predicted A_3 char poly at level 22 is (x + 1)^2."""
        module = HeckeModule.build(11, 22, use_cache=False)
        prediction = predict_decomposition(11, 22, self.db, order=module.order)
        report = verify_decomposition(prediction, module, [3])
        self.assertEqual(report.comparisons[0].predicted, CharPoly((1, 2, 1)))

    def test_wrong_fixture_falsified(self):
        """Test a wrong trace is reported as a mismatch."""
        text = (
            '{"level": 11, "label": "11z", "dim": 1, "ap": {"2": 1}, '
            '"bad": {"11": {"c": 1, "kind": "steinberg", "minimal": true}}}\n'
        )
        db = parse_fixtures(text)
        module = HeckeModule.build(11, 11, use_cache=False)
        prediction = predict_decomposition(11, 11, db, order=module.order)
        report = verify_decomposition(prediction, module, [2])
        self.assertEqual(report.comparisons[0].status, Comparison.MISMATCH)
        self.assertEqual(report.outcome, Outcome.FALSIFIED)

    def test_missing_trace_undetermined(self):
        """Test a prime without a recorded trace cannot be compared."""
        module = HeckeModule.build(11, 11, use_cache=False)
        prediction = predict_decomposition(11, 11, self.db, order=module.order)
        report = verify_decomposition(prediction, module, [37])
        self.assertEqual(report.comparisons[0].status, Comparison.UNDETERMINED)
        self.assertEqual(report.outcome, Outcome.UNKNOWN)

    def test_fixture_factor(self):
        """Test x - a_ell for a rational form."""
        self.assertEqual(fixture_factor(self.db.get('11a'), 2), CharPoly((1, 2)))
        self.assertIsNone(fixture_factor(self.db.get('11a'), 37))


class CongruenceTests(SimpleTestCase):
    """Eisenstein congruences on the p^3-new space."""

    def _module(self, restrictions):
        module = MagicMock()
        module.new_subspace.return_value = NewSubspace(ell=2, new_part=None, rest=None, basis=[[1, 0], [0, 1]])
        module.new_restriction.side_effect = lambda ell: restrictions[ell]
        return module

    def test_common_kernel(self):
        """Test a shared eigenvector with a_ell = 1 + ell mod p."""
        module = self._module({
            2: Matrix([[3, 0], [0, 1]]),
            3: Matrix([[9, 0], [0, 2]]),
        })
        result = congruence_check(5, [2, 3, 5], module=module)
        self.assertEqual(result.primes, [2, 3])
        self.assertEqual(result.new_dimension, 2)
        self.assertEqual(result.kernel_dimension, 1)
        self.assertTrue(result.holds)

    def test_no_congruence(self):
        """Test an empty common kernel."""
        module = self._module({2: Matrix([[0, 0], [0, 1]])})
        result = congruence_check(5, [2], module=module)
        self.assertEqual(result.kernel_dimension, 0)
        self.assertFalse(result.holds)

    def test_unsupported_primes(self):
        """Test p = 2, composite p and an empty prime list are rejected."""
        with self.assertRaises(ParameterError):
            congruence_check(2, [3])
        with self.assertRaises(ParameterError):
            congruence_check(9, [2])
        with self.assertRaises(ParameterError):
            congruence_check(5, [5])
        with self.assertRaises(ParameterError):
            congruence_check(5, [4])

    def test_congruent_fixture_forms(self):
        """Test fixture forms with a_ell = 1 + ell mod p are listed."""
        bad = '"bad": {"5": {"c": 3, "kind": "supercuspidal", "minimal": true}}'
        text = (
            '{"level": 125, "label": "125x", "dim": 1, "ap": {"2": -2, "3": -1}, ' + bad + '}\n'
            '{"level": 125, "label": "125y", "dim": 1, "ap": {"2": 0, "3": -1}, ' + bad + '}\n'
        )
        db = parse_fixtures(text)
        self.assertEqual(congruent_fixture_forms(db, 5, [2, 3, 5]), ['125x'])


class LevelCubeCongruenceTests(SimpleTestCase):
    """Eisenstein congruences computed on the Brandt module of level p^3."""

    def test_level_125(self):
        """Test a 125-new eigensystem with a_ell = 1 + ell mod 5."""
        result = congruence_check(5, {2, 3, 7, 11, 13}, use_cache=False)
        self.assertEqual(result.primes, [2, 3, 7, 11, 13])
        self.assertEqual(result.new_dimension, 8)
        self.assertGreaterEqual(result.kernel_dimension, 1)
        self.assertTrue(result.holds)

    @skipUnless(settings.BRANDT_SLOW_TESTS, 'set BRANDT_SLOW_TESTS=True to run the level 343 computation')
    def test_level_343(self):
        """Test a 343-new eigensystem with a_ell = 1 + ell mod 7."""
        result = congruence_check(7, {2, 3, 5, 11, 13}, use_cache=False)
        self.assertEqual(result.new_dimension, 24)
        self.assertGreaterEqual(result.kernel_dimension, 1)
