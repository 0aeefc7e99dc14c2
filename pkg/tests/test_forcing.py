import gc
import random
import weakref

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from SFW import Exception as ex
from SFW.Forcing import (EMPTY, Equal, ForallIn, Member, PName, Poset, PosetAutomorphism, PosetFilter, PosetName,
                         ProductPoset, apply_automorphism, automorphisms, check_name, evaluate, evaluate_name,
                         factor_filter, forces, formula_corpus, formula_shape, make_name, name_corpus, poset_corpus,
                         support_of, symmetry_sweep, two_step_compose, validate_poset, valuation_equivariant,
                         von_neumann)
from SFW.Ordinal import Ord


@pytest.fixture
def ab():
    return Poset.antichain(["a", "b"])


def zero_check(P):
    return check_name(von_neumann(0), P.top)


class TestPosets:
    def test_one_point_poset_is_valid(self):
        assert validate_poset(Poset.trivial()).valid

    def test_two_atoms_under_top_is_valid(self, ab):
        assert validate_poset(ab).valid
        assert ab.size == 3

    def test_missing_reflexive_pair(self):
        P = Poset(["1", "a"], [("a", "1"), ("1", "1")], "1")
        report = validate_poset(P)
        assert not report.valid
        assert any(v.startswith("reflexivity") for v in report.violations)

    def test_missing_top(self):
        P = Poset(["1", "a"], [("a", "a"), ("1", "1")], "1")
        assert any(v.startswith("unique top") for v in validate_poset(P).violations)

    def test_corpus_sizes(self):
        assert len(poset_corpus(4)) == 9
        assert all(validate_poset(P).valid for P in poset_corpus(4))

    def test_maximal_filters_of_antichain(self, ab):
        assert [F.least for F in ab.maximal_filters()] == ["a", "b"]
        assert all(F.is_maximal() for F in ab.maximal_filters())

    def test_filter_must_be_upward_closed(self, ab):
        with pytest.raises(ex.InvalidFilter):
            PosetFilter.from_members(ab, ["a"])
        with pytest.raises(ex.InvalidFilter):
            PosetFilter.from_members(ab, ["a", "b", "1"])


class TestNames:
    def test_hash_consing(self, ab):
        x = PName([(EMPTY, "a")])
        y = PName([(PName(), "a")])
        assert x is y
        assert x.rank == 1

    def test_intern_table_holds_names_weakly(self):
        x = PName([(EMPTY, "held")])
        ref = weakref.ref(x)
        assert PName([(EMPTY, "held")]) is x
        del x
        gc.collect()
        assert ref() is None
        assert PName([(EMPTY, "held")]).rank == 1

    def test_rank(self):
        assert check_name(von_neumann(3), "1").rank == 3
        assert EMPTY.rank == 0

    def test_check_names_are_filter_independent(self, ab):
        x = check_name(von_neumann(2), ab.top)
        assert {evaluate_name(x, F) for F in ab.maximal_filters()} == {von_neumann(2)}

    def test_empty_name(self, ab):
        assert evaluate_name(EMPTY, PosetFilter(ab, "a")) == frozenset()

    def test_valuation_picks_filter_members(self, ab):
        one = check_name(von_neumann(1), ab.top)
        y = PName([(zero_check(ab), "a"), (one, "b")])
        assert evaluate_name(y, PosetFilter(ab, "a")) == frozenset({frozenset()})

    def test_evaluate_rejects_non_filters(self, ab):
        with pytest.raises(ex.InvalidFilter):
            evaluate(EMPTY, ["a", "b"], ab)


class TestAutomorphisms:
    def test_identity_and_empty(self, ab):
        ident = PosetAutomorphism.identity(ab)
        x = PName([(EMPTY, "a")])
        assert apply_automorphism(ident, x) is x
        swap = PosetAutomorphism.from_mapping(ab, {"a": "b", "b": "a"})
        assert apply_automorphism(swap, EMPTY) is EMPTY

    def test_swap_and_back(self, ab):
        swap = PosetAutomorphism.from_mapping(ab, {"a": "b", "b": "a"})
        x = PName([(PName([(EMPTY, "a")]), "b")])
        moved = apply_automorphism(swap, x)
        assert moved == PName([(PName([(EMPTY, "b")]), "a")])
        assert apply_automorphism(swap.inverse(), moved) is x
        assert moved.rank == x.rank

    def test_coordinate_swap_on_product(self, ab):
        P = ProductPoset([ab, ab])
        inner = PName([(EMPTY, ("a", "1"))])
        x = PName([(inner, ("b", "1")), (EMPTY, ("1", "1"))])
        flipped = apply_automorphism(lambda c: (c[1], c[0]), x)
        assert flipped == PName([(PName([(EMPTY, ("1", "a"))]), ("1", "b")), (EMPTY, ("1", "1"))])
        assert all(c[0] == "1" for c in flipped.conditions())

    def test_foreign_condition(self, ab):
        swap = PosetAutomorphism.from_mapping(ab, {"a": "b", "b": "a"})
        with pytest.raises(ex.ForeignCondition):
            apply_automorphism(swap, PName([(EMPTY, "z")]))

    def test_not_an_automorphism(self):
        chain = Poset.from_covers(["p", "q", "1"], [("p", "q"), ("q", "1")], "1")
        with pytest.raises(ex.NotAnAutomorphism):
            PosetAutomorphism.from_mapping(chain, {"p": "q", "q": "p"})

    def test_action_is_a_group_action(self):
        for P in poset_corpus(4):
            autos = automorphisms(P)
            names = name_corpus(P, P.conditions[:2], 2, cap=40)
            for pi in autos:
                for sigma in autos:
                    for x in names:
                        assert apply_automorphism(pi.compose(sigma), x) == \
                            apply_automorphism(pi, apply_automorphism(sigma, x))

    def test_valuation_equivariance(self):
        for P in poset_corpus(4):
            names = name_corpus(P, P.conditions[:2], 2, cap=40)
            for pi in automorphisms(P):
                assert all(valuation_equivariant(P, pi, x) for x in names)


class TestForces:
    def test_equality_is_forced(self):
        P = Poset.trivial()
        x = PName([(EMPTY, "1")])
        assert forces(P, "1", Equal(i=0, j=0), [x])

    def test_membership_forced_by_top(self):
        P = Poset.trivial()
        x = check_name(von_neumann(1), "1")
        y = PName([(x, "1")])
        assert forces(P, "1", Member(i=0, j=1), [x, y])

    def test_other_atom_does_not_force(self, ab):
        y = PName([(zero_check(ab), "a")])
        assert not forces(ab, "b", Member(i=0, j=1), [zero_check(ab), y])
        assert forces(ab, "a", Member(i=0, j=1), [zero_check(ab), y])

    def test_unbound_variable(self, ab):
        with pytest.raises(ex.UnboundVariable):
            forces(ab, "1", Member(i=0, j=2), [EMPTY, EMPTY])

    def test_symmetry_lemma_small_corpus(self):
        report = symmetry_sweep(max_conditions=3, env_cap=8, formula_cap=40, rng=random.Random(0))
        assert report.ok
        assert report.posets == 4
        assert report.cases > 0
        assert report.formulas == 40
        assert ("ForallIn", ("And",)) in report.shapes
        assert ("ForallIn", ("ForallIn",)) in report.shapes

    def test_formula_cap_keeps_every_shape(self):
        full = formula_corpus(2, 2)
        capped = formula_corpus(2, 2, cap=40)
        assert len(capped) == 40
        assert {formula_shape(phi) for phi in capped} == {formula_shape(phi) for phi in full}
        assert any(isinstance(phi, ForallIn) and not isinstance(phi.body, (Member, Equal)) for phi in capped)
        assert formula_corpus(2, 2, cap=40) == capped

    @pytest.mark.slow
    def test_symmetry_lemma_four_conditions(self):
        report = symmetry_sweep(max_conditions=4, env_cap=6, formula_cap=60, rng=random.Random(1))
        assert report.ok, report.violations[:3]

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 8), st.integers(0, 40), st.sampled_from(["1", "a", "b"]))
    def test_forcing_is_monotone(self, k, f, p):
        P = Poset.antichain(["a", "b"])
        names = name_corpus(P, ["a", "b"], 2, cap=60)
        x = names[k % len(names)]
        phi = formula_corpus(2, 1)[f % len(formula_corpus(2, 1))]
        env = [x, names[(k * 7) % len(names)]]
        if forces(P, p, phi, env):
            assert all(forces(P, r, phi, env) for r in P.below(p))


class TestComposition:
    def test_trivial_first_factor(self, ab):
        out = two_step_compose(Poset.trivial(), PosetName.check(ab, "1"), product_shortcut=False)
        assert out.size == ab.size
        assert validate_poset(out).valid

    def test_trivial_second_factor(self, ab):
        out = two_step_compose(ab, PosetName.check(Poset.trivial(), ab.top), product_shortcut=False)
        assert out.size == ab.size

    def test_two_atoms_twice(self, ab):
        Q = PosetName.check(ab, ab.top)
        assert two_step_compose(ab, Q).size == 9
        explicit = two_step_compose(ab, Q, product_shortcut=False)
        assert explicit.size == 9
        assert validate_poset(explicit).valid

    def test_factorization(self, ab):
        Q = PosetName.check(ab, ab.top)
        explicit = two_step_compose(ab, Q, product_shortcut=False)
        maximal = explicit.maximal_filters()
        assert len(maximal) == 4
        pairs = set()
        for G in maximal:
            G_P, H = factor_filter(explicit, G, ab, Q)
            assert G_P.is_maximal()
            assert H.is_maximal()
            pairs.add((G_P.least, H.least))
        assert len(pairs) == 4

    def test_product_factorization(self, ab):
        P = ProductPoset([ab, ab])
        for G in P.maximal_filters():
            G_P, H = factor_filter(P, G)
            assert (G_P.least, H.least) == G.least

    def test_not_a_poset_name(self, ab):
        bad = PosetName(check_name(von_neumann(2), ab.top), check_name(frozenset({von_neumann(3)}), ab.top),
                        zero_check(ab))
        with pytest.raises(ex.NotAPosetName):
            two_step_compose(ab, bad)


class TestSupports:
    @pytest.fixture
    def stages(self, ab):
        return ProductPoset([ab, ab, ab], [Ord.finite(0), Ord.finite(1), Ord.finite(2)])

    def test_condition_support(self, stages):
        assert support_of(("a", "1", "b"), stages).explicit_points == (Ord.finite(0), Ord.finite(2))

    def test_check_name_has_empty_support(self, stages):
        assert support_of(check_name(von_neumann(2), stages.top), stages).is_empty()

    def test_name_support(self, stages):
        x = PName([(PName([(EMPTY, ("1", "a", "1"))]), ("1", "1", "1"))])
        assert support_of(x, stages).explicit_points == (Ord.finite(1),)

    def test_no_stages(self, ab):
        with pytest.raises(ex.NotAnIterationObject):
            support_of(("a", "b"), ProductPoset([ab, ab]))

    def test_union_support_shrinks(self, stages):
        names = name_corpus(stages, [("a", "1", "1"), ("1", "1", "b")], 2, cap=30)
        for A in names:
            union = make_name("union", stages, A)
            assert support_of(union, stages).is_subset(support_of(A, stages))


class TestConstructors:
    def test_check_empty(self, ab):
        x = make_name("check", ab, frozenset())
        assert x is EMPTY

    def test_union_of_check(self, ab):
        A = make_name("check", ab, frozenset({von_neumann(1), frozenset({von_neumann(1)})}))
        U = make_name("union", ab, A)
        assert {evaluate_name(U, F) for F in ab.maximal_filters()} == {von_neumann(2)}

    def test_separation(self):
        P = Poset.trivial()
        A = make_name("check", P, von_neumann(2))
        S = make_name("separation", P, A, Equal(i=0, j=1), [make_name("check", P, frozenset())])
        assert evaluate_name(S, PosetFilter(P, "1")) == von_neumann(1)

    def test_range(self, ab):
        x = check_name(von_neumann(1), ab.top)
        y = check_name(von_neumann(2), ab.top)
        A = PName([(x, ab.top)])
        f = make_name("tuple", ab, [y])
        # the one-term sequence relates 0 to y
        A0 = PName([(check_name(von_neumann(0), ab.top), ab.top)])
        R = make_name("range", ab, A0, f)
        assert {evaluate_name(R, F) for F in ab.maximal_filters()} == {frozenset({von_neumann(2)})}
        assert make_name("range", ab, A, f) is EMPTY

    def test_arity(self, ab):
        with pytest.raises(ex.ArityMismatch):
            make_name("pair", ab, EMPTY)
        with pytest.raises(ex.ArityMismatch):
            make_name("choose", ab, EMPTY)

    def test_power_budget(self, ab):
        deep = check_name(von_neumann(3), ab.top)
        with pytest.raises(ex.OutOfBudget):
            make_name("power", ab, deep)

    def test_power_of_check_one(self):
        P = Poset.trivial()
        a = check_name(von_neumann(1), "1")
        power = make_name("power", P, a)
        assert evaluate_name(power, PosetFilter(P, "1")) == frozenset({frozenset(), von_neumann(1)})
