from fractions import Fraction
from unittest.mock import patch

from django.test import SimpleTestCase

from brandt.exceptions import BudgetExceededError, IdealError
from brandt.ideals import (
    class_set,
    ideal_norm,
    inverse,
    is_equivalent,
    left_order,
    mass_eichler,
    q_neighbors,
    unit_ideal,
    unit_order,
)
from brandt.orders import build_order


class RightIdealTests(SimpleTestCase):
    """Right ideals of the maximal order of discriminant 11."""

    def setUp(self):
        self.order = build_order(11, 11)
        self.unit = unit_ideal(self.order)

    def test_unit_ideal(self):
        """Test O has norm 1 and is its own left order."""
        self.assertEqual(ideal_norm(self.unit), 1)
        self.assertTrue(self.unit.is_right_module())
        self.assertEqual(left_order(self.unit).lattice, self.order.lattice)

    def test_unit_order(self):
        """Test the maximal order of (-1, -11) has units +-1, +-i."""
        self.assertEqual(unit_order(self.order), 2)

    def test_neighbors(self):
        """Test O has q + 1 = 3 neighbors at 2, each of norm 2."""
        neighbors = q_neighbors(self.unit, 2)
        self.assertEqual(len(neighbors), 3)
        for neighbor in neighbors:
            self.assertEqual(neighbor.norm, 2)
            self.assertTrue(neighbor.is_right_module())
            self.assertEqual(neighbor.lattice.index_in(self.order.lattice), 4)

    def test_neighbor_at_ramified_prime(self):
        """Test neighbors are refused at a prime dividing the level."""
        with self.assertRaises(IdealError):
            q_neighbors(self.unit, 11)

    def test_equivalence_is_reflexive(self):
        """Test an ideal is equivalent to itself and to O exactly when principal."""
        neighbors = q_neighbors(self.unit, 2)
        self.assertTrue(is_equivalent(neighbors[0], neighbors[0]))
        principal = [n for n in neighbors if is_equivalent(n, self.unit)]
        self.assertEqual(len(principal), 1)

    def test_inverse_norm(self):
        """Test N(I^-1) = 1 / N(I)."""
        neighbor = q_neighbors(self.unit, 2)[0]
        self.assertEqual(inverse(neighbor).norm, Fraction(1, 2))


class ClassSetTests(SimpleTestCase):
    """Neighbor search for right ideal classes."""

    def test_discriminant_eleven(self):
        """Test h = 2 with unit orders 2, 3 and mass 5/6."""
        classes = class_set(build_order(11, 11), use_cache=False)
        self.assertEqual(classes.h, 2)
        self.assertEqual(classes.unit_orders, [2, 3])
        self.assertEqual(classes.mass, Fraction(5, 6))
        self.assertEqual(classes.q, 2)
        self.assertEqual(classes.ideals[0].lattice, classes.order.lattice)

    def test_mass_identity(self):
        """Test sum of 1/e_i equals the mass at a special level."""
        classes = class_set(build_order(11, 121), use_cache=False)
        self.assertEqual(classes.h, 10)
        self.assertEqual(sum(Fraction(1, e) for e in classes.unit_orders), classes.mass)
        self.assertEqual(classes.mass, 10)

    def test_eichler_masses(self):
        """Test sum of 1/e_i equals the Eichler mass for small D and M."""
        expected = {
            (2, 1): Fraction(1, 12),
            (3, 1): Fraction(1, 6),
            (5, 1): Fraction(1, 3),
            (7, 1): Fraction(1, 2),
            (13, 1): Fraction(1),
            (2, 3): Fraction(1, 3),
            (3, 5): Fraction(1),
            (11, 2): Fraction(5, 2),
        }
        for (D, M), mass in expected.items():
            with self.subTest(D=D, M=M):
                classes = class_set(build_order(D, D * M), use_cache=False)
                self.assertEqual(mass_eichler(D, M), mass)
                self.assertEqual(classes.mass, mass)
                self.assertEqual(sum(Fraction(1, e) for e in classes.unit_orders), mass)

    def test_eichler_class_numbers(self):
        """Test h = 2 at level 15 and h = 3 at level 22."""
        self.assertEqual(class_set(build_order(3, 15), use_cache=False).h, 2)
        self.assertEqual(class_set(build_order(11, 22), use_cache=False).h, 3)

    def test_budget_exceeded(self):
        """Test a zero node budget stops the search."""
        with self.assertRaises(BudgetExceededError):
            class_set(build_order(11, 11), budget=0, use_cache=False)

    def test_neighbor_prime_dividing_level(self):
        """Test q must be coprime to the level."""
        with self.assertRaises(IdealError):
            class_set(build_order(11, 11), q=11, use_cache=False)

    def test_other_neighbor_prime(self):
        """Test the class number does not depend on q."""
        classes = class_set(build_order(11, 11), q=3, use_cache=False)
        self.assertEqual(classes.h, 2)
        self.assertEqual(sorted(classes.unit_orders), [2, 3])

    @patch('brandt.ideals.cache.store_classset')
    @patch('brandt.ideals.cache.load_classset')
    def test_cache_round_trip(self, mock_load, mock_store):
        """Test a stored record is reused and validated on the next call."""
        mock_load.return_value = None
        order = build_order(11, 11)
        first = class_set(order)
        mock_store.assert_called_once()
        key, record = mock_store.call_args[0]

        mock_load.return_value = record
        with patch('brandt.ideals._explore') as mock_explore:
            second = class_set(order)
            mock_explore.assert_not_called()
        mock_load.assert_called_with(key)
        self.assertEqual(second.unit_orders, first.unit_orders)
        self.assertEqual([i.lattice for i in second.ideals], [i.lattice for i in first.ideals])

    @patch('brandt.ideals.cache.store_classset')
    @patch('brandt.ideals.cache.load_classset')
    def test_bad_cache_record_recomputed(self, mock_load, mock_store):
        """Test a cached record failing the mass check is ignored."""
        order = build_order(11, 11)
        unit = [order.lattice.denominator, [list(row) for row in order.lattice.basis]]
        mock_load.return_value = {'q': 2, 'ideals': [unit], 'unit_orders': [2]}
        classes = class_set(order)
        self.assertEqual(classes.h, 2)
