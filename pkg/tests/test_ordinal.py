import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from SFW import Exception as ex
from SFW.Ordinal import (COF_GE_OMEGA1, COF_OMEGA, EQUAL, GREATER, LESS, SUCCESSOR, ZERO, AtomTable, Bounded,
                         CofinalFailure, CountableSetDescriptor, ENUMERATED, Ord, Tail, cofinality_class,
                         ord_compare, parse_ord, stage_bound)
from tests.strategies import countable_ordinals, descriptors, omega_limits, ordinals

W = Ord.omega()
W1 = parse_ord("w1")


class TestCompare:
    def test_reflexive_at_omega(self):
        assert ord_compare(W, W) == EQUAL

    def test_lexicographic(self):
        assert ord_compare(parse_ord("w*2 + 1"), parse_ord("w*3")) == LESS

    def test_w1_above_every_finite_multiple_of_w(self):
        for k in range(0, 50):
            assert ord_compare(W1, W.mul_natural(k)) == GREATER
            assert ord_compare(W1, W.mul_natural(k) + k) == GREATER

    def test_w1_above_small_cnf_corpus(self):
        for a, b, c, n in itertools.product(range(4), repeat=4):
            x = Ord.finite(n)
            for e, coef in ((3, a), (2, b), (1, c)):
                if coef:
                    x = x + Ord.omega_power(Ord.finite(e)).mul_natural(coef)
            assert x < W1

    def test_mismatched_tables(self):
        other = AtomTable.declare([("k", "ge_omega1")])
        with pytest.raises(ex.MismatchedAtomTable):
            ord_compare(W1, parse_ord("k", other))

    @given(ordinals(), ordinals())
    def test_trichotomy(self, a, b):
        outcomes = [ord_compare(a, b) == v for v in (LESS, EQUAL, GREATER)]
        assert sum(outcomes) == 1
        assert (ord_compare(a, b) == LESS) == (ord_compare(b, a) == GREATER)

    @given(ordinals(), ordinals(), ordinals())
    def test_transitive(self, a, b, c):
        if a <= b and b <= c:
            assert a <= c


class TestCofinality:
    @pytest.mark.parametrize("text, expected", [
        ("0", ZERO),
        ("5", SUCCESSOR),
        ("w + 1", SUCCESSOR),
        ("w", COF_OMEGA),
        ("w*2", COF_OMEGA),
        ("w^2", COF_OMEGA),
        ("w^(w)", COF_OMEGA),
        ("w1", COF_GE_OMEGA1),
        ("w1 + w", COF_OMEGA),
        ("w1*2", COF_GE_OMEGA1),
        ("aleph_w", COF_OMEGA),
    ])
    def test_classes(self, text, expected):
        assert cofinality_class(parse_ord(text)) == expected

    def test_fundamental_sequence_is_increasing_and_below(self):
        lam = parse_ord("w^2")
        seq = [lam.fundamental(n) for n in range(6)]
        assert all(x < y for x, y in zip(seq, seq[1:]))
        assert all(x < lam for x in seq)

    def test_no_fundamental_sequence_at_w1(self):
        with pytest.raises(ex.WrongCofinality):
            W1.fundamental(0)


class TestText:
    def test_canonical_form(self):
        assert str(parse_ord("w1 + w*2 + 3")) == "w1*1 + w*2 + 3"
        assert str(Ord.zero()) == "0"
        assert str(W + 1) == "w*1 + 1"

    def test_shorthands(self):
        assert parse_ord("w+1") == W + 1
        assert parse_ord("w*2+3") == W.mul_natural(2) + 3
        assert parse_ord("w^(w+1)") == Ord.omega_power(W + 1)

    def test_bad_input(self):
        with pytest.raises(ex.SFWInputException):
            parse_ord("w + ")
        with pytest.raises(ex.SFWInputException):
            parse_ord("w1^2")
        with pytest.raises(ex.SFWInputException):
            parse_ord("k")

    @given(ordinals())
    def test_round_trip(self, a):
        assert parse_ord(str(a)) == a
        assert str(parse_ord(str(a))) == str(a)


class TestArithmetic:
    def test_left_absorption(self):
        assert Ord.finite(1) + W == W
        assert W + W1 == W1

    @given(countable_ordinals(), countable_ordinals())
    def test_minus_left(self, a, b):
        assert (a + b).minus_left(a) == b

    @given(ordinals(), ordinals())
    def test_addition_is_monotone_on_the_right(self, a, b):
        assert a + b >= b
        assert a + b >= a


class TestStageBound:
    def test_naturals_are_cofinal_in_w(self):
        result = stage_bound(CountableSetDescriptor.naturals(), W)
        assert result == CofinalFailure(W)

    def test_sequence_tail_below_w1(self):
        s = CountableSetDescriptor.of((), [Tail.sequence(parse_ord("w^2"))])
        assert stage_bound(s, W1) == Bounded(parse_ord("w^2"))

    def test_finite_set_below_w1(self):
        s = CountableSetDescriptor.points(3, W + 1, W.mul_natural(2))
        assert stage_bound(s, W1) == Bounded(W.mul_natural(2))

    def test_empty_is_bounded_by_zero(self):
        assert stage_bound(CountableSetDescriptor.empty(), W1) == Bounded(Ord.zero())

    def test_point_above_lambda(self):
        with pytest.raises(ex.PointNotBelowLambda):
            stage_bound(CountableSetDescriptor.points(W1), W1)

    def test_cofinal_below_uncountable_cofinality_is_a_check_failure(self):
        s = CountableSetDescriptor((), (Tail(ENUMERATED, W1),))
        with pytest.raises(ex.StageBoundingViolated) as info:
            stage_bound(s, W1)
        assert info.value.invariant == "stage-bounding"
        assert info.value.code == 1

    @given(descriptors())
    def test_never_cofinal_in_w1(self, s):
        assert isinstance(stage_bound(s, W1), Bounded)


class TestDescriptors:
    def test_atom_bounded_sequence(self):
        aleph = parse_ord("aleph_w")
        s = CountableSetDescriptor.of([0, W], [Tail.sequence(aleph)])
        assert s.explicit_points == (Ord.zero(), W)
        assert s.contains(W)
        assert not s.contains(W + 1)
        assert s.supremum() == aleph
        assert not s.attained()

    def test_interval_merging(self):
        a = CountableSetDescriptor.of((), [Tail.interval(Ord.zero(), W)])
        b = CountableSetDescriptor.points(W)
        assert a.union(b) == CountableSetDescriptor.initial_segment(W + 1)

    def test_restrict_below_cuts_tails(self):
        s = CountableSetDescriptor.naturals().restrict_below(Ord.finite(3))
        assert s == CountableSetDescriptor.points(0, 1, 2)

    def test_json_round_trip(self):
        s = CountableSetDescriptor.of([W + 3], [Tail.sequence(parse_ord("w^2")), Tail.naturals_copy(W)])
        assert CountableSetDescriptor.from_json(s.to_json()) == s

    @given(omega_limits())
    def test_single_tail_enumeration_is_increasing(self, bound):
        s = CountableSetDescriptor.of((), [Tail.naturals_copy(bound)])
        head = list(itertools.islice(s.enumerate(), 12))
        assert all(x < y for x, y in zip(head, head[1:]))
        assert all(s.contains(x) for x in head)

    @given(st.lists(countable_ordinals(), max_size=6))
    def test_finite_enumeration_is_exhaustive(self, points):
        s = CountableSetDescriptor.of(points)
        assert list(s.enumerate()) == sorted(set(points))

    @settings(max_examples=50)
    @given(st.lists(descriptors(), max_size=4))
    def test_union_supremum(self, family):
        union = CountableSetDescriptor.union_of_family(family)
        expected = max((d.supremum() for d in family), default=Ord.zero())
        assert union.supremum() == expected

    @given(descriptors(), descriptors())
    def test_difference_is_disjoint_from_subtrahend(self, a, b):
        assert a.difference(b).is_disjoint(b)
        assert a.difference(b).is_subset(a)
