"""
    PairsApp.py

    Iterated Cohen pairs with the coordinate swap at every stage: the
    truncated step forcing, the names of the two reals and their unordered
    pair, the family of all pairs, the group lemma, the certificate that no
    choice function for the family is hereditarily symmetric, and the
    finite-support counterexample for dependent choice.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field

from . import Config
from . import Exception as ex
from .Filters import (COUNTABLE_INTERSECTIONS, COUNTABLE_UNIONS, FINITE_INTERSECTIONS, HeadKernelFamily,
                      SupportIdeal, filter_contains, generate_normal_filter)
from .Forcing import (PName, Poset, PosetAutomorphism, PosetFilter, ProductPoset, apply_automorphism, check_name,
                      cond_label, evaluate_name, hs_text, pair_name, sequence_name, upair_name, von_neumann)
from .Groups import ExplicitGroup, SupportKernel, SymbolicElement, SymbolicGroup, stabilizer
from .HS import SymmetricSystem, symbolic_tuple_check
from .Iteration import IterationState, StepTemplate, limit_stage, register_step, stage_zero, successor_stage
from .Ordinal import (COF_GE_OMEGA1, DEFAULT_ATOMS, AtomTable, CountableSetDescriptor, Ord, Tail, check_below,
                      parse_ord)

log = logging.getLogger(__name__)

NO_CHOICE_FUNCTION = "no_choice_function"
FS_DC_FAILURE = "fs_dc_failure"


def _strings(depth: int) -> List[str]:
    return [""] + ["".join(bits) for n in range(1, depth + 1) for bits in itertools.product("01", repeat=n)]


def _label(s: str) -> str:
    return s or "-"


def _unlabel(s: str) -> str:
    return "" if s == "-" else s


class CohenPairStage:
    """
    Pairs (s, t) of binary strings of length <= depth, ordered by
    extension in both coordinates; the swap (s, t) -> (t, s) generates
    the step group, and the step filter is principal at the whole group.
    """

    def __init__(self, depth: int):
        if depth < 0:
            raise ex.SFWInputException("depth is a natural number")
        self.depth = depth
        strings = _strings(depth)
        conds = [(s, t) for s in strings for t in strings]
        le = [(self.label(s2, t2), self.label(s, t))
              for s, t in conds for s2, t2 in conds if s2.startswith(s) and t2.startswith(t)]
        self.poset = Poset([self.label(s, t) for s, t in conds], le, self.label("", ""))
        self.swap = PosetAutomorphism.from_mapping(
            self.poset, {self.label(s, t): self.label(t, s) for s, t in conds})
        self.group = ExplicitGroup.generated(self.poset, [self.swap], "Z/2" if depth else "1")
        self.filter = generate_normal_filter(self.group, [self.group.full()])
        top = self.poset.top
        self.a_name = self._real(0)
        self.b_name = self._real(1)
        self.pair_name = upair_name(self.a_name, self.b_name, top)

    @staticmethod
    def label(s: str, t: str) -> str:
        return f"{_label(s)}:{_label(t)}"

    @staticmethod
    def split(c: str) -> Tuple[str, str]:
        s, t = c.split(":")
        return _unlabel(s), _unlabel(t)

    def _real(self, coord: int) -> PName:
        """The truncated real of one coordinate: {((i, b), p) : p decides bit i as b}."""
        top = self.poset.top
        entries = []
        for s in _strings(self.depth)[1:]:
            point = pair_name(check_name(von_neumann(len(s) - 1), top), check_name(von_neumann(int(s[-1])), top), top)
            entries.append((point, self.label(s, "") if coord == 0 else self.label("", s)))
        return PName(entries)

    def template(self) -> StepTemplate:
        return StepTemplate("cohen_pair", self.poset, self.group, self.filter, {"depth": self.depth})

    def separating_filter(self):
        """The lexicographically least maximal filter under which the two reals differ."""
        for F in self.poset.maximal_filters():
            if evaluate_name(self.a_name, F) != evaluate_name(self.b_name, F):
                return F
        raise ex.SFWInputException(f"depth {self.depth} cannot separate the two reals")


@lru_cache(maxsize=None)
def cohen_pair_stage(depth: int) -> CohenPairStage:
    return CohenPairStage(depth)


@register_step("cohen_pair")
def cohen_pair_step(depth: int = Config.PAIRS_DEPTH, **_) -> StepTemplate:
    return cohen_pair_stage(depth).template()


def lift_name(x: PName, product: ProductPoset, index: int, _memo: Optional[dict] = None) -> PName:
    """A step-level name read at one coordinate of a product."""
    memo = {} if _memo is None else _memo
    found = memo.get(x)
    if found is not None:
        return found
    out = PName((lift_name(y, product, index, memo), product.lift(index, c)) for y, c in x.entries)
    memo[x] = out
    return out


@dataclass
class PairsState:
    kappa: Ord
    depth: int
    prefix: int
    stage: CohenPairStage
    iteration: IterationState

    @property
    def record(self):
        return self.iteration.top

    @property
    def group(self) -> SymbolicGroup:
        return self.record.group

    @property
    def filter(self) -> SupportIdeal:
        return self.record.filter

    @property
    def truncation(self) -> ProductPoset:
        return self.iteration.truncation()

    @property
    def prefix_group(self) -> ExplicitGroup:
        return self.iteration.record(Ord.finite(self.prefix)).group

    def system(self) -> SymmetricSystem:
        return SymmetricSystem(self.truncation, self.group, self.filter)

    def prefix_system(self) -> SymmetricSystem:
        r = self.iteration.record(Ord.finite(self.prefix))
        return SymmetricSystem(r.poset, r.group, r.filter)

    def _coordinate(self, alpha: int) -> int:
        if not 0 <= alpha < self.prefix:
            raise ex.StageOutOfRange(f"stage {alpha} is not materialized (prefix {self.prefix})")
        return alpha

    def a_name(self, alpha: int) -> PName:
        return lift_name(self.stage.a_name, self.truncation, self._coordinate(alpha))

    def b_name(self, alpha: int) -> PName:
        return lift_name(self.stage.b_name, self.truncation, self._coordinate(alpha))

    def pair_name(self, alpha: int) -> PName:
        return lift_name(self.stage.pair_name, self.truncation, self._coordinate(alpha))

    def family_name(self) -> PName:
        """The materialized prefix of the family of pairs."""
        return sequence_name([self.pair_name(k) for k in range(self.prefix)], self.truncation.top)

    def family_tail(self) -> str:
        return f"[{self.prefix}, {self.kappa})"

    def summary(self) -> Dict[str, Any]:
        return {"kappa": str(self.kappa), "depth": self.depth, "prefix": self.prefix,
                "step_conditions": self.stage.poset.size, "family_tail": self.family_tail(),
                "filter": str(self.filter)}


def _build(kappa: Ord, depth: int, prefix: int, mode: Optional[str]) -> PairsState:
    stage = cohen_pair_stage(depth)
    template = stage.template()
    state = IterationState(kappa, template)
    state.add(stage_zero())
    for k in range(prefix):
        state.add(successor_stage(state, Ord.finite(k, kappa.table), template))
    state.add(limit_stage(state, kappa, mode))
    return PairsState(kappa, depth, prefix, stage, state)


def build_pairs_model(kappa: Ord, depth: int = None, prefix: int = None) -> PairsState:
    depth = Config.PAIRS_DEPTH if depth is None else depth
    prefix = Config.PAIRS_PREFIX if prefix is None else prefix
    if kappa.cofinality_class() != COF_GE_OMEGA1:
        raise ex.WrongCofinality(f"the pairs model needs cofinality >= w1; {kappa} has {kappa.cofinality_class()}")
    state = _build(kappa, depth, prefix, None)
    log.info("pairs model at %s: depth %d, prefix %d", kappa, depth, prefix)
    return state


def build_fs_model(depth: int = None, prefix: int = None, mode: str = FINITE_INTERSECTIONS) -> PairsState:
    """The same pairs iteration stopped at w, with the limit filter closed under `mode`."""
    depth = Config.PAIRS_DEPTH if depth is None else depth
    prefix = Config.PAIRS_PREFIX if prefix is None else prefix
    return _build(Ord.omega(), depth, prefix, mode)


# the swap automorphisms

@dataclass(frozen=True)
class SwapAutomorphism:
    stage: Ord
    element: SymbolicElement
    explicit: Any = None

    def to_json(self):
        return {"stage": str(self.stage), "support": self.element.support().to_json()}


def _ord(x, table: AtomTable = DEFAULT_ATOMS) -> Ord:
    if isinstance(x, Ord):
        return x
    if isinstance(x, int):
        return Ord.finite(x, table)
    return parse_ord(x, table)


def swap_automorphism(state: PairsState, alpha) -> SwapAutomorphism:
    """g_alpha: the swap at stage alpha, the identity elsewhere."""
    alpha = _ord(alpha, state.kappa.table)
    if not alpha < state.kappa:
        raise ex.StageOutOfRange(f"stage {alpha} is not below {state.kappa}")
    if state.depth == 0:
        g = state.group.identity()
    else:
        g = state.group.at_stage(alpha, 1)
    explicit = None
    if alpha.is_finite and alpha.finite_part < state.prefix:
        explicit = g.to_coordinatewise(state.truncation)
    return SwapAutomorphism(alpha, g, explicit)


def _sample_stages(state: PairsState) -> List[Ord]:
    t = state.kappa.table
    w = Ord.omega(t)
    pts = [Ord.finite(k, t) for k in range(max(state.prefix, 3))] + [w, w + Ord.finite(1, t), w + w]
    return [p for p in pts if p < state.kappa]


@dataclass
class GroupLemmaReport:
    abelian_prefix: bool
    prefix_products: int
    abelian_symbolic: bool
    swap_supports: Dict[str, bool]
    kernel_checks: Dict[str, bool]

    @property
    def ok(self) -> bool:
        return (self.abelian_prefix and self.abelian_symbolic and all(self.swap_supports.values())
                and all(self.kernel_checks.values()))

    def to_json(self):
        return {"abelian_prefix": self.abelian_prefix, "prefix_products": self.prefix_products,
                "abelian_symbolic": self.abelian_symbolic, "swap_supports": self.swap_supports,
                "kernel_checks": self.kernel_checks, "ok": self.ok}


def verify_group_lemma(state: PairsState) -> GroupLemmaReport:
    """The iteration group is abelian, g_alpha lives at alpha, and g_alpha is in ker rho_beta for beta <= alpha."""
    G = state.prefix_group
    n = G.order
    abelian_prefix = all(G.mul(i, j) == G.mul(j, i) for i in range(n) for j in range(n))
    stages = _sample_stages(state)
    swaps = [swap_automorphism(state, a) for a in stages]
    abelian_symbolic = all(g.element.compose(h.element) == h.element.compose(g.element) for g in swaps for h in swaps)
    supports = {}
    kernels = {}
    for s in swaps:
        expected = CountableSetDescriptor.of([s.stage]) if state.depth else CountableSetDescriptor.empty()
        supports[str(s.stage)] = s.element.support() == expected
        for beta in stages:
            if beta <= s.stage:
                kernels[f"{beta}<={s.stage}"] = s.element.restrict(beta).is_identity
    return GroupLemmaReport(abelian_prefix, n * n, abelian_symbolic, supports, kernels)


# the no-choice-function certificate

@dataclass
class Certificate:
    kind: str
    body: Dict[str, Any]
    atoms: List[Dict[str, str]] = field(default_factory=list)

    def to_json(self) -> Dict[str, Any]:
        out = {"schema_version": Config.SCHEMA_VERSION, "kind": self.kind, "atoms": self.atoms}
        out.update(self.body)
        return out


def _evaluations(stage: CohenPairStage, F) -> Dict[str, Dict[str, str]]:
    swap = stage.swap
    before = {"a": hs_text(evaluate_name(stage.a_name, F)), "b": hs_text(evaluate_name(stage.b_name, F)),
              "pair": hs_text(evaluate_name(stage.pair_name, F))}
    after = {"a": hs_text(evaluate_name(apply_automorphism(swap, stage.a_name), F)),
             "b": hs_text(evaluate_name(apply_automorphism(swap, stage.b_name), F)),
             "pair": hs_text(evaluate_name(apply_automorphism(swap, stage.pair_name), F))}
    return {"before": before, "after": after}


def _exchanges(stage: CohenPairStage) -> bool:
    """The swap carries a to b and b to a under every maximal filter."""
    for F in stage.poset.maximal_filters():
        ev = _evaluations(stage, F)
        if ev["after"]["a"] != ev["before"]["b"] or ev["after"]["b"] != ev["before"]["a"]:
            return False
    return True


def truncated_family(state: PairsState, kappa_prime) -> Dict[str, Any]:
    """The family of pairs indexed below kappa_prime <= kappa."""
    kp = _ord(kappa_prime, state.kappa.table)
    if kp.is_zero or kp > state.kappa:
        raise ex.StageOutOfRange(f"{kp} is not an admissible truncation of {state.kappa}")
    shown = min(state.prefix, kp.finite_part if kp.is_finite else state.prefix)
    names = [state.pair_name(k).digest for k in range(shown)]
    return {"kappa": str(kp), "materialized": names, "tail": f"[{shown}, {kp})"}


def refute_choice_function(state: PairsState, witness: Sequence, kappa_prime=None) -> Certificate:
    """
    From finitely many (beta_i, H_i), H_i a support kernel below stage
    beta_i, take alpha = max beta_i: g_alpha lies in every ker rho_beta_i,
    hence fixes any name whose stabilizer contains the witnessed meet,
    yet it exchanges the two reals of the pair at alpha.
    """
    if not isinstance(witness, (list, tuple)):
        raise ex.WitnessNotFinite("the stabilizer witness must be a finite list")
    kappa = state.kappa if kappa_prime is None else _ord(kappa_prime, state.kappa.table)
    if kappa.is_zero or kappa > state.kappa:
        raise ex.StageOutOfRange(f"{kappa} is not an admissible truncation of {state.kappa}")
    entries = []
    for beta, H in witness:
        beta = _ord(beta, state.kappa.table)
        if not beta < kappa:
            raise ex.StageOutOfRange(f"witness stage {beta} is not below {kappa}")
        support = CountableSetDescriptor.empty() if H is None else H.support
        check_below(support, beta)
        entries.append((beta, support))
    beta_star = max((b for b, _ in entries), default=Ord.zero(state.kappa.table))
    alpha = beta_star
    g = swap_automorphism(state, alpha)
    memberships = []
    for beta, support in entries:
        restricted = g.element.restrict(beta)
        H = SupportKernel(state.group.restrict_group(beta), support)
        memberships.append({"beta": str(beta), "H": support.to_json(),
                            "restricted_support": restricted.support().to_json(),
                            "in_kernel": restricted.is_identity, "in_preimage": H.contains(restricted)})
    F = state.stage.separating_filter()
    pair_fixed = apply_automorphism(state.stage.swap, state.stage.pair_name) == state.stage.pair_name
    body = {
        "kappa": str(state.kappa),
        "family_bound": str(kappa),
        "depth": state.depth,
        "witness": [{"beta": str(b), "H": s.to_json()} for b, s in entries],
        "beta_star": str(beta_star),
        "chosen_alpha": str(alpha),
        "swap": g.to_json(),
        "memberships": memberships,
        "contradiction": {"filter": F.least, "pair_fixed": pair_fixed, **_evaluations(state.stage, F)},
    }
    log.info("choice-function refutation at alpha=%s over %d witness stages", alpha, len(entries))
    return Certificate(NO_CHOICE_FUNCTION, body, state.kappa.table.to_json())


# finite support and dependent choice

def countable_mode_counterpart(state: PairsState) -> Dict[str, Any]:
    """With countable intersections at w, the stabilizer of <a_n : n < w> is a filter member."""
    G = SymbolicGroup(Ord.omega(state.kappa.table), state.stage.group, state.iteration.support_policy)
    F = generate_normal_filter(G, [HeadKernelFamily(G.stage_bound)], COUNTABLE_INTERSECTIONS)
    check = symbolic_tuple_check([], SymmetricSystem(state.truncation, G, F), Tail.naturals_copy(G.stage_bound))
    return {"mode": COUNTABLE_UNIONS, **check.to_json()}


def enumeration_contrast(state: PairsState) -> Dict[str, Any]:
    """The w-enumeration of the reals is symmetric in countable mode only."""
    out = {}
    G = SymbolicGroup(Ord.omega(state.kappa.table), state.stage.group, state.iteration.support_policy)
    for mode in (FINITE_INTERSECTIONS, COUNTABLE_INTERSECTIONS):
        F = generate_normal_filter(G, [HeadKernelFamily(G.stage_bound)], mode)
        check = symbolic_tuple_check([], SymmetricSystem(state.truncation, G, F), Tail.naturals_copy(G.stage_bound))
        out[mode] = check.to_json()
    return out


def separating_product_filter(state: PairsState) -> PosetFilter:
    """The maximal filter of the truncation separating the two reals at every materialized stage."""
    least = state.stage.separating_filter().least if state.depth else state.stage.poset.top
    return PosetFilter(state.truncation, tuple(least for _ in range(state.prefix)))


def relation_edges(state: PairsState, F: PosetFilter) -> List[Dict[str, Any]]:
    """R between consecutive materialized stages under F: x R y iff x in P_n and y in P_(n+1)."""
    out = []
    for n in range(state.prefix - 1):
        here = evaluate_name(state.pair_name(n), F)
        there = evaluate_name(state.pair_name(n + 1), F)
        out.append({"n": n, "P_n": hs_text(here), "P_n_plus_1": hs_text(there),
                    "edges": sorted([hs_text(x), hs_text(y)] for x in here for y in there)})
    return out


def _exchange_at(state: PairsState, n: int) -> Dict[str, Any]:
    """
    Whether g_n exchanges a_n and b_n under every maximal filter: on the
    truncation when stage n is materialized, on the step forcing otherwise.
    """
    if n >= state.prefix:
        filters = state.stage.poset.maximal_filters()
        return {"exchanged_under_every_filter": _exchanges(state.stage), "checked_on": "step",
                "filters": len(filters)}
    g = swap_automorphism(state, n).explicit
    a, b = state.a_name(n), state.b_name(n)
    ga, gb = apply_automorphism(g, a), apply_automorphism(g, b)
    filters = state.truncation.maximal_filters()
    exchanged = all(evaluate_name(ga, F) == evaluate_name(b, F) and evaluate_name(gb, F) == evaluate_name(a, F)
                    for F in filters)
    return {"exchanged_under_every_filter": exchanged, "checked_on": "truncation", "filters": len(filters)}


def fs_dc_counterexample(state: PairsState, witness_stages: Sequence, samples: int = 3) -> Certificate:
    """
    In the finite-mode model at w: finitely many head pullbacks mention
    coordinates below some n0, so every g_n with n >= n0 fixes the
    putative sequence name, while g_n exchanges the reals of P_n under
    every maximal filter.
    """
    record = state.record
    if state.kappa != Ord.omega(state.kappa.table):
        raise ex.WrongCofinality(f"the finite-support contrast is stated at w, not {state.kappa}")
    if record.mode == COUNTABLE_INTERSECTIONS:
        raise ex.WrongMode("the limit filter is closed under countable intersections",
                           counterpart=countable_mode_counterpart(state))
    if not isinstance(witness_stages, (list, tuple)):
        raise ex.WitnessNotFinite("the witness must list finitely many stages")
    stages = [_ord(b, state.kappa.table) for b in witness_stages]
    for b in stages:
        if not b < state.kappa:
            raise ex.StageOutOfRange(f"witness stage {b} is not below {state.kappa}")
    n0 = max(stages).successor() if stages else Ord.zero(state.kappa.table)
    start = n0.finite_part
    per_n = []
    for n in range(start, start + samples):
        g = swap_automorphism(state, n)
        per_n.append({"n": n, "in_kernel": g.element.restrict(n0).is_identity, **_exchange_at(state, n)})
    F = separating_product_filter(state)
    G = state.group
    tuple_check = symbolic_tuple_check([], state.system(), Tail.naturals_copy(G.stage_bound))
    body = {
        "lambda": str(state.kappa),
        "depth": state.depth,
        "prefix": state.prefix,
        "relation": "x R y iff x in P_n and y in P_(n+1) for some n < w",
        "relation_sample": {"filter": cond_label(F.least), "steps": relation_edges(state, F)},
        "witness_stages": [str(b) for b in stages],
        "cofinite_from": start,
        "per_n": per_n,
        "sequence_stabilizer": tuple_check.to_json(),
    }
    return Certificate(FS_DC_FAILURE, body, state.kappa.table.to_json())


def stage_symmetry(depth: int) -> Dict[str, bool]:
    """sym(a) trivial, sym(b) trivial, sym(pair) full at one truncation depth."""
    s = cohen_pair_stage(depth)
    return {"a_trivial": stabilizer(s.group, s.a_name).is_trivial() if depth else True,
            "b_trivial": stabilizer(s.group, s.b_name).is_trivial() if depth else True,
            "pair_full": stabilizer(s.group, s.pair_name).is_full()}


# verification

class WitnessModel(BaseModel):
    beta: str
    H: Dict[str, Any]


class CertificateModel(BaseModel):
    schema_version: int
    kind: Literal["no_choice_function", "fs_dc_failure"]
    atoms: List[Dict[str, str]]
    depth: int = Field(ge=0)
    kappa: Optional[str] = None
    family_bound: Optional[str] = None
    witness: List[WitnessModel] = []
    beta_star: Optional[str] = None
    chosen_alpha: Optional[str] = None
    memberships: List[Dict[str, Any]] = []
    contradiction: Optional[Dict[str, Any]] = None
    lambda_: Optional[str] = Field(default=None, alias="lambda")
    prefix: Optional[int] = Field(default=None, ge=0, le=4)
    relation_sample: Optional[Dict[str, Any]] = None
    witness_stages: List[str] = []
    cofinite_from: Optional[int] = None
    per_n: List[Dict[str, Any]] = []
    sequence_stabilizer: Optional[Dict[str, Any]] = None

    model_config = ConfigDict(populate_by_name=True, extra="allow")


@dataclass
class VerificationResult:
    accepted: bool
    failures: List[str]

    def to_json(self):
        return {"accepted": self.accepted, "failures": self.failures}


def verify_certificate(document: Dict[str, Any]) -> VerificationResult:
    """Replay every claim of a certificate from its JSON alone."""
    cert = CertificateModel.model_validate(document)
    failures: List[str] = []
    if cert.schema_version != Config.SCHEMA_VERSION:
        failures.append(f"schema version {cert.schema_version} is not {Config.SCHEMA_VERSION}")
    table = AtomTable.from_json(cert.atoms)
    try:
        if cert.kind == NO_CHOICE_FUNCTION:
            _verify_no_choice(cert, table, failures)
        else:
            _verify_fs(cert, table, failures)
    except ex.SFWException as exc:
        failures.append(f"{type(exc).__name__}: {exc.message}")
    return VerificationResult(not failures, failures)


def _replay_contradiction(stage: CohenPairStage, recorded: Dict[str, Any], failures: List[str]) -> None:
    F = stage.separating_filter()
    if recorded.get("filter") != F.least:
        failures.append(f"filter {recorded.get('filter')} is not the least separating filter {F.least}")
    ev = _evaluations(stage, F)
    if recorded.get("before") != ev["before"] or recorded.get("after") != ev["after"]:
        failures.append("recorded evaluations do not replay")
    if ev["after"]["a"] != ev["before"]["b"] or ev["before"]["a"] == ev["before"]["b"]:
        failures.append("the swap does not exchange two distinct reals")
    if ev["after"]["pair"] != ev["before"]["pair"]:
        failures.append("the swap moves the pair")


def _verify_no_choice(cert: CertificateModel, table: AtomTable, failures: List[str]) -> None:
    ambient = parse_ord(cert.kappa, table)
    if ambient.cofinality_class() != COF_GE_OMEGA1:
        failures.append(f"kappa {ambient} does not have uncountable cofinality")
        return
    kappa = ambient if cert.family_bound is None else parse_ord(cert.family_bound, table)
    if kappa.is_zero or kappa > ambient:
        failures.append(f"family bound {kappa} is not an admissible truncation of {ambient}")
        return
    stage = cohen_pair_stage(cert.depth)
    G = SymbolicGroup(ambient, stage.group)
    betas = []
    for w in cert.witness:
        beta = parse_ord(w.beta, table)
        if not beta < kappa:
            failures.append(f"witness stage {beta} is not below {kappa}")
        E = CountableSetDescriptor.from_json(w.H, table)
        check_below(E, beta)
        betas.append(beta)
    beta_star = max(betas, default=Ord.zero(table))
    if parse_ord(cert.beta_star, table) != beta_star:
        failures.append(f"beta_star {cert.beta_star} is not the maximum {beta_star}")
    alpha = parse_ord(cert.chosen_alpha, table)
    if not alpha < kappa:
        failures.append(f"alpha {alpha} is not below {kappa}")
        return
    g = G.at_stage(alpha, 1)
    for beta in betas:
        if not g.restrict(beta).is_identity:
            failures.append(f"g_{alpha} is not in ker rho_{beta}: kernel membership fails for {beta} > {alpha}")
    if len(cert.memberships) != len(betas) or not all(m.get("in_kernel") for m in cert.memberships):
        failures.append("recorded kernel memberships do not replay")
    _replay_contradiction(stage, cert.contradiction or {}, failures)
    if not (cert.contradiction or {}).get("pair_fixed"):
        failures.append("pair_fixed is not asserted")


def _verify_fs(cert: CertificateModel, table: AtomTable, failures: List[str]) -> None:
    lam = parse_ord(cert.lambda_, table)
    if lam != Ord.omega(table):
        failures.append(f"the finite-support certificate is stated at w, not {lam}")
        return
    if cert.prefix is None:
        failures.append("the certificate does not record its materialized prefix")
        return
    state = build_fs_model(cert.depth, cert.prefix)
    stages = [parse_ord(b, table) for b in cert.witness_stages]
    for b in stages:
        if not b < lam:
            failures.append(f"witness stage {b} is not below {lam}")
            return
    n0 = max(stages).successor() if stages else Ord.zero(table)
    if cert.cofinite_from != n0.finite_part:
        failures.append(f"cofinite_from {cert.cofinite_from} is not {n0}")
    G = SymbolicGroup(lam, state.stage.group)
    for entry in cert.per_n:
        n = entry["n"]
        if n < n0.finite_part:
            failures.append(f"g_{n} is below the cofinite bound {n0}")
        if not G.at_stage(Ord.finite(n, table), 1).restrict(n0).is_identity:
            failures.append(f"g_{n} is not in ker rho_{n0}")
        replayed = _exchange_at(state, n)
        if not replayed["exchanged_under_every_filter"] or not entry.get("exchanged_under_every_filter"):
            failures.append(f"g_{n} does not exchange the reals of P_{n} under every filter")
        if entry.get("checked_on") != replayed["checked_on"]:
            failures.append(f"g_{n} was checked on {entry.get('checked_on')}, not {replayed['checked_on']}")
    separating = separating_product_filter(state)
    sample = cert.relation_sample or {}
    if sample.get("filter") != cond_label(separating.least):
        failures.append(f"relation filter {sample.get('filter')} is not {cond_label(separating.least)}")
    if sample.get("steps") != relation_edges(state, separating):
        failures.append("recorded R edges do not replay")
    F = generate_normal_filter(G, [HeadKernelFamily(lam)], FINITE_INTERSECTIONS)
    K = SupportKernel(G, CountableSetDescriptor.naturals(table))
    if filter_contains(F, K):
        failures.append("the sequence stabilizer is a finite-mode filter member")
    if (cert.sequence_stabilizer or {}).get("member"):
        failures.append("the certificate claims membership of the sequence stabilizer")
