import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from SFW import Exception as ex
from SFW.Filters import (COUNTABLE_INTERSECTIONS, COUNTABLE_UNIONS, FINITE_INTERSECTIONS, FINITE_UNIONS,
                         CompletionWitness, ExplicitFilter, HeadKernelFamily, PointKernelFamily, SupportIdeal,
                         audit_filter, audit_oracle, check_completion_witness, concatenate_witnesses,
                         enumerate_filters, filter_contains, generate_normal_filter, is_stage_bounded,
                         minimality_oracle, omega1_completion, pullback_filter, pullback_normality_identity,
                         restrict_filter)
from SFW.Groups import (ExplicitHom, Restriction, SupportKernel, SymbolicGroup, inclusion_of, named_group,
                        small_groups)
from SFW.Ordinal import CountableSetDescriptor, Ord, parse_ord
from tests.strategies import descriptors

W = Ord.omega()


def of_order(G, n):
    return [K for K in G.subgroup_lattice() if K.order == n]


@pytest.fixture
def omega_group(z2):
    return SymbolicGroup(W, z2)


@pytest.fixture
def finite_supports(omega_group):
    return generate_normal_filter(omega_group, [PointKernelFamily(CountableSetDescriptor.naturals())])


class TestMembership:
    def test_full_group_is_always_a_member(self, s3, omega_group, finite_supports):
        for K in s3.subgroup_lattice():
            assert filter_contains(generate_normal_filter(s3, [K]), s3.full())
        assert filter_contains(finite_supports, omega_group.full())

    def test_finite_supports_miss_the_naturals(self, omega_group, finite_supports):
        assert filter_contains(finite_supports, omega_group.kernel(CountableSetDescriptor.points(0, 5, 9)))
        assert not filter_contains(finite_supports, omega_group.kernel(CountableSetDescriptor.naturals()))

    def test_principal_z2(self, z2):
        F = generate_normal_filter(z2, [z2.full()])
        assert not filter_contains(F, z2.trivial_subgroup())
        assert filter_contains(F, z2.full())

    def test_ambient_mismatch(self, s3, z2, omega_group):
        with pytest.raises(ex.AmbientMismatch):
            filter_contains(generate_normal_filter(z2), s3.full())
        with pytest.raises(ex.AmbientMismatch):
            filter_contains(generate_normal_filter(s3), omega_group.full())


class TestAudit:
    def test_principal_on_s3(self, s3):
        report = audit_filter(generate_normal_filter(s3, [s3.full()]))
        assert report.ok

    def test_non_normal_family(self, s3):
        F = ExplicitFilter(s3, [s3.full(), of_order(s3, 2)[0]], generated=False)
        report = audit_filter(F)
        assert report.is_filter
        assert not report.is_normal
        assert report.failing_invariant() == "normality"
        w = report.normal_witness
        assert w["subgroup"] == str(of_order(s3, 2)[0])
        assert w["conjugate"] != w["subgroup"]

    def test_not_closed_under_meets(self, s3):
        a, b = of_order(s3, 2)[:2]
        report = audit_filter(ExplicitFilter(s3, [a, b], generated=False))
        assert not report.is_filter
        assert report.omega1_witness is not None

    def test_finite_supports_are_not_complete(self, finite_supports):
        report = audit_filter(finite_supports)
        assert report.is_filter and report.is_normal
        assert not report.is_omega1_complete
        w = finite_supports.union_witness()
        assert [str(d) for d in w.first_members] == ["{0}", "{1}", "{2}"]
        assert w.union == CountableSetDescriptor.naturals()

    def test_group_too_large(self):
        G = named_group("symmetric", 4)
        with pytest.raises(ex.GroupTooLarge):
            enumerate_filters(G)


class TestCompletion:
    def test_explicit_filters_are_unchanged(self):
        for G in small_groups():
            for K in G.subgroup_lattice():
                F = generate_normal_filter(G, [K])
                assert set(omega1_completion(F).members()) == set(F.members())

    def test_finite_supports_become_countable(self, omega_group, finite_supports):
        done = omega1_completion(finite_supports)
        assert done.mode == COUNTABLE_UNIONS
        assert filter_contains(done, omega_group.kernel(CountableSetDescriptor.naturals()))
        assert audit_filter(done).ok

    def test_idempotent(self, finite_supports):
        once = omega1_completion(finite_supports)
        assert omega1_completion(once) == once

    def test_not_a_filter(self, s3):
        with pytest.raises(ex.NotAFilter):
            omega1_completion(ExplicitFilter(s3, [s3.full(), of_order(s3, 2)[0]], generated=False))

    @settings(max_examples=100)
    @given(descriptors(), descriptors())
    def test_extensive_and_monotone(self, E, D):
        G = SymbolicGroup(parse_ord("w1"), named_group("cyclic", 2))
        F = generate_normal_filter(G, [SupportKernel(G, D), PointKernelFamily(CountableSetDescriptor.naturals())])
        K = SupportKernel(G, E)
        if filter_contains(F, K):
            assert filter_contains(omega1_completion(F), K)


class TestGenerated:
    def test_whole_group_gives_principal(self, s3, omega_group):
        for mode in (FINITE_INTERSECTIONS, COUNTABLE_INTERSECTIONS):
            F = generate_normal_filter(s3, [s3.full()], mode)
            assert F.members() == [s3.full()]
        assert generate_normal_filter(omega_group, [omega_group.full()]).is_principal()

    def test_empty_generators(self, s3):
        assert generate_normal_filter(s3).members() == [s3.full()]

    def test_head_kernels_at_omega(self, omega_group):
        heads = HeadKernelFamily(W)
        naturals = omega_group.kernel(CountableSetDescriptor.naturals())
        assert filter_contains(generate_normal_filter(omega_group, [heads], COUNTABLE_INTERSECTIONS), naturals)
        assert not filter_contains(generate_normal_filter(omega_group, [heads], FINITE_INTERSECTIONS), naturals)
        assert filter_contains(generate_normal_filter(omega_group, [heads]), omega_group.kernel(
            CountableSetDescriptor.points(0, 1, 2)))

    def test_minimality_oracle_on_small_groups(self):
        for G in small_groups():
            lattice = G.subgroup_lattice()
            for r in (1, 2):
                for gens in itertools.combinations(lattice, r):
                    report = minimality_oracle(G, list(gens))
                    assert report.agrees, report.to_json()

    def test_audit_oracle_on_small_groups(self):
        for G in (named_group("symmetric", 3), named_group("dihedral", 4), named_group("klein")):
            for gens in itertools.combinations(G.subgroup_lattice(), 2):
                report = audit_oracle(G, list(gens))
                assert report.agrees, report.to_json()

    def test_bad_mode(self, s3):
        with pytest.raises(ex.SFWInputException):
            generate_normal_filter(s3, [], "sometimes")

    def test_wrong_ambient(self, s3, z2):
        with pytest.raises(ex.AmbientMismatch):
            generate_normal_filter(s3, [z2.full()])


class TestPullbacks:
    def test_identity(self):
        for G in small_groups():
            ident = ExplicitHom.identity(G)
            for K in G.subgroup_lattice():
                F = generate_normal_filter(G, [K])
                assert set(pullback_filter(ident, F).members()) == set(F.members())
                assert set(restrict_filter(ident, F).members()) == set(F.members())

    def test_sign_pullback(self, s3, z2):
        h = ExplicitHom.from_function(s3, z2, lambda g: 0 if g.perm.is_even else 1)
        F = pullback_filter(h, generate_normal_filter(z2, [z2.full()]))
        assert F.members() == [s3.full()]
        assert audit_filter(F).ok
        assert all(pullback_normality_identity(h, H, g) for H in z2.subgroup_lattice() for g in range(s3.order))

    def test_restrict_to_rotations(self, s3):
        iota = inclusion_of(of_order(s3, 3)[0])
        F = restrict_filter(iota, generate_normal_filter(s3, [s3.full()]))
        assert F.members() == [iota.domain.full()]

    def test_restrict_to_trivial_group(self, s3):
        iota = inclusion_of(s3.trivial_subgroup())
        for K in s3.subgroup_lattice():
            F = restrict_filter(iota, generate_normal_filter(s3, [K]))
            assert F.members() == [iota.domain.full()]

    def test_outputs_pass_audit(self):
        for G in small_groups():
            lattice = G.subgroup_lattice()
            for H in lattice:
                iota = inclusion_of(H)
                for K in lattice:
                    assert audit_filter(restrict_filter(iota, generate_normal_filter(G, [K]))).ok

    def test_not_an_inclusion(self, s3, z2):
        h = ExplicitHom.from_function(s3, z2, lambda g: 0 if g.perm.is_even else 1)
        with pytest.raises(ex.NotAnInclusion):
            restrict_filter(h, generate_normal_filter(z2))

    def test_restriction_pullback(self, z2):
        G = SymbolicGroup(parse_ord("w1"), z2)
        rho = Restriction(G, W.mul_natural(2))
        head = rho.codomain
        F = generate_normal_filter(head, [head.kernel(CountableSetDescriptor.points(3, W))])
        pulled = pullback_filter(rho, F)
        assert pulled.group == G
        assert filter_contains(pulled, G.kernel(CountableSetDescriptor.points(3, W)))
        assert not filter_contains(pulled, G.kernel(CountableSetDescriptor.points(parse_ord("w*3"))))

    def test_codomain_mismatch(self, s3, z2):
        h = ExplicitHom.from_function(s3, z2, lambda g: 0 if g.perm.is_even else 1)
        with pytest.raises(ex.CodomainMismatch):
            pullback_filter(h, generate_normal_filter(s3))


class TestWitnesses:
    def test_concatenation_keeps_every_member(self):
        seqs = [[1, 2, 3], ["a", "b"], [], ["c"]]
        merged = concatenate_witnesses(seqs)
        assert sorted(map(str, merged)) == sorted(map(str, itertools.chain.from_iterable(seqs)))
        assert merged.index(2) < merged.index(3)

    def test_concatenated_witness_meets(self, omega_group):
        F = generate_normal_filter(omega_group, [HeadKernelFamily(W)], COUNTABLE_INTERSECTIONS)
        firsts = [omega_group.kernel(CountableSetDescriptor.points(n)) for n in range(3)]
        seconds = [omega_group.kernel(CountableSetDescriptor.points(n, n + 3)) for n in range(3)]
        merged = concatenate_witnesses([firsts, seconds])
        target = omega_group.kernel(CountableSetDescriptor.points(0, 1, 2, 3, 4, 5))
        assert check_completion_witness(F, CompletionWitness(tuple(merged), target))

    def test_stage_bounded_below_w1(self):
        lam = parse_ord("w1")
        family = [CountableSetDescriptor.points(W, W + 4), CountableSetDescriptor.naturals()]
        assert is_stage_bounded(family, lam) == W + 5
        assert is_stage_bounded(family, parse_ord("w*2")) is None

    @settings(max_examples=100)
    @given(st.lists(descriptors(), min_size=1, max_size=4), descriptors())
    def test_modes_agree_at_w1(self, family, E):
        G = SymbolicGroup(parse_ord("w1"), named_group("cyclic", 2))
        gens = [HeadKernelFamily(parse_ord("w1"))] + [SupportKernel(G, D) for D in family]
        finite = generate_normal_filter(G, gens, FINITE_INTERSECTIONS)
        countable = generate_normal_filter(G, gens, COUNTABLE_INTERSECTIONS)
        K = SupportKernel(G, E)
        assert filter_contains(finite, K) == filter_contains(countable, K)
        assert isinstance(finite, SupportIdeal) and finite.mode == FINITE_UNIONS
