"""
    Iteration.py

    The stage recursion: stage zero, successor stages (two-step
    composition, product group, completed filter), limit stages in both
    cofinality classes, the coordinatewise action and direct-limit
    identification at limits of uncountable cofinality.

    Finite stages are materialized as product posets acted on by explicit
    product groups. A limit stage is symbolic: its group is a SymbolicGroup
    over the uniform step, its filter a SupportIdeal generated by the head
    kernels K_[0,beta), beta below the limit, and its poset is represented
    by the materialized truncation.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field

from . import Config
from . import Exception as ex
from .Filters import (COUNTABLE_INTERSECTIONS, FINITE_INTERSECTIONS, ExplicitFilter, HeadKernelFamily,
                      SupportIdeal, audit_filter, generate_normal_filter, omega1_completion, pullback_filter)
from .Forcing import CoordinatewiseAutomorphism, Poset, PosetFilter, PosetName, ProductPoset, two_step_compose
from .Groups import (ExplicitGroup, ExplicitSubgroup, Restriction, SymbolicElement, SymbolicGroup,
                     direct_product, projection_hom)
from .Ordinal import (COF_GE_OMEGA1, COF_OMEGA, DEFAULT_ATOMS, AtomTable, CountableSetDescriptor, Ord, parse_ord,
                      stage_bound)

log = logging.getLogger(__name__)


@dataclass
class StepTemplate:
    """One step of the iteration: a ground poset, its symmetry group and a normal filter on that group."""
    tag: str
    step_poset: Poset
    step_group: ExplicitGroup
    step_filter: ExplicitFilter
    params: Dict[str, Any] = field(default_factory=dict)

    def poset_name(self, head) -> PosetName:
        return PosetName.check(self.step_poset, head.top)

    @property
    def is_trivial(self) -> bool:
        return self.step_group.order == 1

    def validate(self, head) -> None:
        """The step must be a symmetric system in every extension by head."""
        self.poset_name(head).decode(_top_filter(head))
        if self.step_group.poset is not self.step_poset:
            raise ex.AmbientMismatch(f"step group of {self.tag} does not act on its poset")
        if self.step_filter.group is not self.step_group:
            raise ex.AmbientMismatch(f"step filter of {self.tag} is not on its group")
        report = audit_filter(self.step_filter)
        if not (report.is_filter and report.is_normal):
            raise ex.InvalidFilter(f"step filter of {self.tag} fails {report.failing_invariant()}")

    def describe(self) -> str:
        return f"{self.tag}({', '.join(f'{k}={v}' for k, v in sorted(self.params.items()))})"


def _top_filter(P) -> PosetFilter:
    return PosetFilter(P, P.top)


_steps: Dict[str, Callable[..., StepTemplate]] = {}


def register_step(name: str):
    def wrap(factory):
        _steps[name] = factory
        return factory
    return wrap


def step_template(name: str, **params) -> StepTemplate:
    if name not in _steps:
        raise ex.StageSchemaMissing(f"no step named {name!r}; known steps: {sorted(_steps)}")
    return _steps[name](**params)


@register_step("trivial")
def trivial_step(**_) -> StepTemplate:
    P = Poset.trivial()
    G = ExplicitGroup.trivial(P)
    return StepTemplate("trivial", P, G, generate_normal_filter(G))


@dataclass(frozen=True)
class StageRecord:
    stage: Ord
    poset: Optional[ProductPoset]
    group: Union[ExplicitGroup, SymbolicGroup]
    filter: Union[ExplicitFilter, SupportIdeal]
    tag: str
    mode: Optional[str] = None

    @property
    def symbolic(self) -> bool:
        return isinstance(self.group, SymbolicGroup)

    def summary(self) -> Dict[str, str]:
        if self.poset is None:
            poset = "symbolic"
        elif self.symbolic:
            poset = f"symbolic; truncation {self.poset.size}"
        else:
            poset = f"size {self.poset.size}"
        group = str(self.group) if self.symbolic else f"{self.group.name or 'G'} (order {self.group.order})"
        return {"stage": str(self.stage), "tag": self.tag, "poset": poset, "group": group,
                "filter": str(self.filter)}


class IterationState:
    """Stage records of one iteration, in increasing stage order."""

    def __init__(self, length: Ord, schema: Optional[StepTemplate] = None, support_policy: str = None):
        self.length = length
        self.schema = schema
        self.support_policy = support_policy or Config.SUPPORT_POLICY
        self.records: Dict[Ord, StageRecord] = {}

    def add(self, record: StageRecord) -> StageRecord:
        self.records[record.stage] = record
        log.debug("stage %s built: %s", record.stage, record.summary())
        return record

    def record(self, stage: Ord) -> StageRecord:
        found = self.records.get(stage)
        if found is None:
            raise ex.StageMissing(f"stage {stage} has not been built")
        return found

    @property
    def top(self) -> StageRecord:
        return self.records[max(self.records)]

    def explicit_records(self) -> List[StageRecord]:
        return [r for r in self.records.values() if not r.symbolic]

    def truncation(self) -> Optional[ProductPoset]:
        explicit = self.explicit_records()
        return explicit[-1].poset if explicit else None

    def restriction(self, beta: Ord) -> Restriction:
        top = self.top
        if not top.symbolic:
            raise ex.NotAnIterationObject("restriction maps are taken from the symbolic top stage")
        return Restriction(top.group, beta)

    def restrict_condition(self, p: tuple, beta: Ord) -> tuple:
        """pi_beta: the part of a truncation condition below stage beta."""
        P = self.truncation()
        if P is None or p not in P:
            raise ex.StageMismatch("condition is not in the materialized truncation")
        return tuple(c for s, c in zip(P.stages, p) if s < beta)

    def condition_supports(self, cap: int = 64) -> List[CountableSetDescriptor]:
        """supp(p): the stages where p is not trivial, for the first cap truncation conditions."""
        P = self.truncation()
        if P is None:
            return []
        return [CountableSetDescriptor.of(s for s, c, f in zip(P.stages, p, P.factors) if c != f.top)
                for p in itertools.islice(P, cap)]


def stage_zero() -> StageRecord:
    P = ProductPoset((), ())
    G = ExplicitGroup.trivial(P, "1")
    return StageRecord(Ord.zero(), P, G, generate_normal_filter(G), "zero")


def tail_lift(G: ExplicitGroup, step_group: ExplicitGroup, K: ExplicitSubgroup) -> ExplicitSubgroup:
    """Elements of a product group whose last coordinate lies in K."""
    keep = set()
    for i, g in enumerate(G.elements):
        last = g.components[-1]
        j = 0 if last is None else step_group.index(last)
        if j in K:
            keep.add(i)
    return G.subgroup(keep)


def successor_stage(state: IterationState, alpha: Ord, step: StepTemplate) -> StageRecord:
    """
    Stage alpha+1: poset P_alpha * Q, group G_alpha x H acting
    coordinatewise, filter the completion of the normal filter generated
    by the head pullback and the tail lift of the step filter.
    """
    head = state.record(alpha)
    if head.symbolic:
        raise ex.StageMismatch(f"stage {alpha} is symbolic; successors of it are not materialized")
    step.validate(head.poset)
    P = two_step_compose(head.poset, step.poset_name(head.poset), stage=alpha)
    G = direct_product(head.group, step.step_group, P)
    pulled = pullback_filter(projection_hom(G, head.group), head.filter)
    lifted = tail_lift(G, step.step_group, step.step_filter.least())
    kar = generate_normal_filter(G, [pulled.least(), lifted])
    F = omega1_completion(kar)
    return StageRecord(alpha.successor(), P, G, F, "successor")


def limit_stage(state: IterationState, lam: Ord, mode: Optional[str] = None) -> StageRecord:
    """
    Limit stage over the uniform schema. Countable cofinality closes the
    head kernels under countable intersections; uncountable cofinality
    under finite ones. `mode` overrides the choice.
    """
    if not lam.is_limit:
        raise ex.NotALimit(f"{lam} is not a limit")
    if state.schema is None:
        raise ex.StageSchemaMissing(f"no stage schema below {lam}")
    if mode is None:
        mode = COUNTABLE_INTERSECTIONS if lam.cofinality_class() == COF_OMEGA else FINITE_INTERSECTIONS
    G = SymbolicGroup(lam, state.schema.step_group, state.support_policy)
    gens = [] if state.schema.is_trivial else [HeadKernelFamily(lam)]
    F = generate_normal_filter(G, gens, mode)
    log.info("limit stage %s (%s): filter %s", lam, lam.cofinality_class(), F)
    return StageRecord(lam, state.truncation(), G, F, "limit", mode)


def coordinatewise_act(g, p: tuple, poset: ProductPoset) -> tuple:
    """(g.p)(beta) = g_beta . p(beta)."""
    if p not in poset:
        raise ex.StageMismatch("condition is not in this truncation")
    if isinstance(g, SymbolicElement):
        g = g.to_coordinatewise(poset)
    if not isinstance(g, CoordinatewiseAutomorphism) or g.poset is not poset:
        raise ex.StageMismatch("group element acts on a different truncation")
    return g(p)


def check_action_automorphism(g, poset: ProductPoset) -> bool:
    """Exhaustive: p -> g.p preserves and reflects the order and fixes the top."""
    if coordinatewise_act(g, poset.top, poset) != poset.top:
        return False
    conds = list(poset)
    image = {p: coordinatewise_act(g, p, poset) for p in conds}
    return all(poset.leq(p, q) == poset.leq(image[p], image[q]) for p in conds for q in conds)


@dataclass
class IdentificationReport:
    lam: Ord
    entries: List[Dict[str, str]]
    claims: List[str]

    def to_json(self):
        return {"lambda": str(self.lam), "entries": self.entries, "claims": self.claims}


def direct_limit_identify(state: IterationState, lam: Ord, supports: Optional[Sequence] = None) -> IdentificationReport:
    """
    Every countable support below a limit of uncountable cofinality is
    bounded by some beta < lam. Without explicit supports, the supports of
    the conditions of the state's materialized truncation are bounded.
    """
    if lam.cofinality_class() != COF_GE_OMEGA1:
        raise ex.WrongCofinality(f"{lam} has cofinality class {lam.cofinality_class()}; stage bounding fails")
    if lam > state.length:
        raise ex.StageOutOfRange(f"{lam} is past the iteration length {state.length}")
    if supports is None:
        supports = state.condition_supports()
    entries = []
    for s in supports:
        E = s.support() if isinstance(s, SymbolicElement) else s
        bound = stage_bound(E, lam)
        beta = bound.beta.successor() if E.contains(bound.beta) else bound.beta
        entries.append({"support": str(E), "sup": str(bound.beta), "beta": str(beta)})
    claims = [f"P_{lam} is the union of P_beta for beta < {lam}",
              f"G_{lam} is the union of G_beta for beta < {lam}"]
    return IdentificationReport(lam, entries, claims)


# scenario-driven construction

class SchemaSpec(BaseModel):
    step: str
    depth: int = Field(default=Config.PAIRS_DEPTH, ge=0)


class IterationSpec(BaseModel):
    length: str
    schema_: Optional[SchemaSpec] = Field(default=None, alias="schema")
    truncate_stages: int = Field(default=0, ge=0)
    limit_mode: Optional[str] = None
    support_policy: Optional[str] = None
    atoms: Optional[List[Dict[str, str]]] = None

    model_config = ConfigDict(populate_by_name=True)


def build_iteration(spec: Union[IterationSpec, Dict[str, Any]]) -> IterationState:
    if not isinstance(spec, IterationSpec):
        spec = IterationSpec.model_validate(spec)
    table = AtomTable.from_json(spec.atoms) if spec.atoms else DEFAULT_ATOMS
    length = parse_ord(spec.length, table)
    schema = step_template(spec.schema_.step, depth=spec.schema_.depth) if spec.schema_ else None
    state = IterationState(length, schema, spec.support_policy)
    state.add(stage_zero())
    if length.is_finite:
        n = length.finite_part
    elif length.is_limit:
        n = spec.truncate_stages
    else:
        raise ex.SFWInputException(f"length {length} is past a limit and not a limit itself")
    for k in range(n):
        if schema is None:
            raise ex.StageSchemaMissing(f"no step for stage {k}")
        state.add(successor_stage(state, Ord.finite(k, table), schema))
    if length.is_limit:
        state.add(limit_stage(state, length, spec.limit_mode))
    return state


def summary_table(state: IterationState) -> List[Dict[str, str]]:
    return [r.summary() for r in state.records.values()]


@dataclass
class LengthAudit:
    stages: Dict[str, Dict[str, Any]]
    coherence_checks: int
    coherence_failures: List[str]

    @property
    def ok(self) -> bool:
        return not self.coherence_failures and all(v["normal"] and v["omega1_complete"] for v in self.stages.values())

    def to_json(self):
        return {"stages": self.stages, "coherence_checks": self.coherence_checks,
                "coherence_failures": self.coherence_failures, "ok": self.ok}


def audit_length(state: IterationState, sample_stages: int = 4) -> LengthAudit:
    """Every stage filter normal and omega_1-complete; restrictions coherent on sampled elements."""
    stages = {}
    for r in state.records.values():
        rep = audit_filter(r.filter)
        stages[str(r.stage)] = {"normal": rep.is_filter and rep.is_normal, "omega1_complete": rep.is_omega1_complete}
    checks, failures = 0, []
    top = state.top
    if top.symbolic and not state.schema.is_trivial:
        G = top.group
        points = _sample_stages(top.stage, sample_stages)
        elements = [G.element({p: 1 for p in points[:k + 1]}) for k in range(len(points))]
        for g in elements:
            for b in points:
                for c in points:
                    if c > b:
                        continue
                    checks += 1
                    if g.restrict(b).restrict(c) != g.restrict(c):
                        failures.append(f"rho_{c},{b} o rho_{b} != rho_{c} on {g}")
    return LengthAudit(stages, checks, failures)


def _sample_stages(lam: Ord, n: int) -> List[Ord]:
    if lam.cofinality_class() == COF_OMEGA:
        try:
            return [lam.fundamental(k + 1) for k in range(n)]
        except ex.SFWInputException:
            pass
    out = [Ord.finite(k, lam.table) for k in range(n)]
    w = Ord.omega(lam.table)
    if w < lam:
        out += [w, w + w]
    return [p for p in out if p < lam]
