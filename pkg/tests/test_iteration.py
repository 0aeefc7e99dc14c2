import itertools

import pytest

from SFW import Exception as ex
from SFW.Filters import (COUNTABLE_UNIONS, FINITE_UNIONS, HeadKernelFamily, audit_filter, filter_contains)
from SFW.Forcing import support_of
from SFW.Iteration import (IterationState, audit_length, build_iteration, check_action_automorphism,
                           coordinatewise_act, direct_limit_identify, limit_stage, stage_zero, step_template,
                           successor_stage, summary_table)
from SFW.Ordinal import CountableSetDescriptor, Ord, Tail, parse_ord

W = Ord.omega()
W1 = parse_ord("w1")


def built(length, n, step="cohen_pair", **params):
    template = step_template(step, **params)
    state = IterationState(length, template)
    state.add(stage_zero())
    for k in range(n):
        state.add(successor_stage(state, Ord.finite(k), template))
    return state


class TestStageZero:
    def test_trivial_system(self):
        r = stage_zero()
        assert r.poset.size == 1
        assert r.group.order == 1
        assert r.filter.members() == [r.group.full()]
        assert audit_filter(r.filter).ok

    def test_empty_supports(self):
        r = stage_zero()
        assert all(support_of(p, r.poset).is_empty() for p in r.poset)


class TestSuccessor:
    def test_first_step(self):
        state = built(W1, 1, depth=1)
        r = state.record(Ord.finite(1))
        assert r.poset.size == 9
        assert r.group.order == 2
        assert r.filter.members() == [r.group.full()]
        assert audit_filter(r.filter).ok

    def test_two_steps(self):
        r = built(W1, 2, depth=1).record(Ord.finite(2))
        assert r.group.order == 4
        assert r.group.is_abelian()
        assert r.filter.members() == [r.group.full()]

    def test_trivial_step(self):
        state = built(W1, 2, depth=1)
        head = state.record(Ord.finite(2))
        r = successor_stage(state, Ord.finite(2), step_template("trivial"))
        assert r.poset.size == head.poset.size
        assert r.group.order == head.group.order
        assert audit_filter(r.filter).ok

    def test_missing_stage(self):
        state = built(W1, 1, depth=1)
        with pytest.raises(ex.StageMissing):
            successor_stage(state, Ord.finite(4), step_template("cohen_pair", depth=1))

    def test_unknown_step(self):
        with pytest.raises(ex.StageSchemaMissing):
            step_template("sacks")


class TestLimits:
    def test_countable_cofinality_is_complete(self):
        state = built(W, 2, depth=1)
        r = state.add(limit_stage(state, W))
        assert r.filter.mode == COUNTABLE_UNIONS
        for E in (CountableSetDescriptor.naturals(), CountableSetDescriptor.points(0, 4, 17),
                  CountableSetDescriptor.naturals().difference(CountableSetDescriptor.points(3))):
            assert filter_contains(r.filter, r.group.kernel(E))
        assert audit_filter(r.filter).ok

    def test_w1_bounded_members(self):
        state = built(W1, 2, depth=1)
        r = state.add(limit_stage(state, W1))
        assert r.filter.mode == FINITE_UNIONS
        assert r.filter.families == (HeadKernelFamily(W1),)
        E = CountableSetDescriptor.of([W + 3], [Tail.sequence(parse_ord("w^2"))])
        assert filter_contains(r.filter, r.group.kernel(E))
        assert audit_filter(r.filter).ok

    def test_degenerate_schema(self):
        state = built(W, 0, step="trivial")
        r = limit_stage(state, W)
        assert r.filter.is_principal()
        assert audit_filter(r.filter).ok

    def test_not_a_limit(self):
        state = built(W1, 0, depth=1)
        with pytest.raises(ex.NotALimit):
            limit_stage(state, W + 1)

    def test_schema_missing(self):
        state = IterationState(W)
        state.add(stage_zero())
        with pytest.raises(ex.StageSchemaMissing):
            limit_stage(state, W)


class TestAction:
    def test_identity(self, pairs_state):
        P = pairs_state.truncation
        ident = pairs_state.group.identity()
        assert all(coordinatewise_act(ident, p, P) == p for p in itertools.islice(P, 30))

    def test_disjoint_support(self, pairs_state):
        P = pairs_state.truncation
        g = pairs_state.group.at_stage(Ord.finite(1))
        assert coordinatewise_act(g, ("0:1", "-:-"), P) == ("0:1", "-:-")

    def test_swap_at_stage_zero(self, pairs_state):
        P = pairs_state.truncation
        g = pairs_state.group.at_stage(Ord.finite(0))
        assert coordinatewise_act(g, ("0:1", "-:-"), P) == ("1:0", "-:-")
        assert coordinatewise_act(g, P.top, P) == P.top

    def test_foreign_condition(self, pairs_state):
        with pytest.raises(ex.StageMismatch):
            coordinatewise_act(pairs_state.group.identity(), ("0:1",), pairs_state.truncation)

    def test_automorphism_on_two_stages(self, pairs_state):
        G = pairs_state.group
        P = pairs_state.truncation
        for values in itertools.product((0, 1), repeat=2):
            g = G.element({Ord.finite(i): v for i, v in enumerate(values)})
            assert check_action_automorphism(g, P)

    @pytest.mark.slow
    def test_automorphism_on_three_stages(self):
        state = built(W1, 3, depth=1)
        state.add(limit_stage(state, W1))
        G = state.top.group
        g = G.element({Ord.finite(0): 1, Ord.finite(2): 1})
        assert check_action_automorphism(g, state.truncation())

    def test_restrict_condition(self, pairs_state):
        p = ("0:1", "1:-")
        assert pairs_state.iteration.restrict_condition(p, Ord.finite(1)) == ("0:1",)


class TestDirectLimit:
    def test_finite_support(self, pairs_state):
        report = direct_limit_identify(pairs_state.iteration, W1,
                                       [CountableSetDescriptor.points(0, W, W.mul_natural(2))])
        assert report.entries[0]["beta"] == "w*2 + 1"
        assert len(report.claims) == 2

    def test_symbolic_tail(self, pairs_state):
        E = CountableSetDescriptor.of((), [Tail.sequence(parse_ord("w^2"))])
        report = direct_limit_identify(pairs_state.iteration, W1, [E])
        assert report.entries[0]["beta"] == "w^2*1"

    def test_elements(self, pairs_state):
        g = pairs_state.group.element({Ord.finite(7): 1})
        report = direct_limit_identify(pairs_state.iteration, W1, [g])
        assert report.entries[0]["beta"] == "8"

    def test_countable_cofinality(self, pairs_state):
        with pytest.raises(ex.WrongCofinality):
            direct_limit_identify(pairs_state.iteration, W, [])

    def test_truncation_conditions(self, pairs_state):
        report = direct_limit_identify(pairs_state.iteration, W1)
        assert len(report.entries) == 64
        betas = {e["beta"] for e in report.entries}
        assert {"1", "2"} <= betas <= {"0", "1", "2"}
        both = str(CountableSetDescriptor.points(0, 1))
        assert {"support": both, "sup": "1", "beta": "2"} in report.entries

    def test_past_the_length(self, pairs_state):
        with pytest.raises(ex.StageOutOfRange):
            direct_limit_identify(pairs_state.iteration, parse_ord("w1*2"), [])


class TestBuild:
    def test_from_scenario_dict(self):
        state = build_iteration({"length": "w1", "schema": {"step": "cohen_pair", "depth": 1},
                                 "truncate_stages": 2})
        rows = summary_table(state)
        assert [row["stage"] for row in rows] == ["0", "1", "2", "w1*1"]
        assert state.top.symbolic
        assert state.record(Ord.finite(2)).group.order == 4
        report = audit_length(state)
        assert report.ok
        assert report.coherence_checks > 0

    def test_finite_length(self):
        state = build_iteration({"length": "2", "schema": {"step": "cohen_pair", "depth": 1}})
        assert not state.top.symbolic
        assert state.top.stage == Ord.finite(2)

    def test_no_schema(self):
        with pytest.raises(ex.StageSchemaMissing):
            build_iteration({"length": "3"})

    def test_successor_of_limit(self):
        with pytest.raises(ex.SFWInputException):
            build_iteration({"length": "w + 1", "schema": {"step": "trivial"}})

    def test_countable_limit_audit(self):
        state = build_iteration({"length": "w", "schema": {"step": "cohen_pair", "depth": 1},
                                 "truncate_stages": 2})
        report = audit_length(state)
        assert report.ok
        assert report.stages["w*1"]["omega1_complete"]
