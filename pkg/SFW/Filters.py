"""
    Filters.py

    Filters of subgroups: membership, auditing of the filter, normality
    and countable-intersection axioms, omega_1-completion, pullback and
    restriction along homomorphisms, and generated normal filters.

    Over a finite group a normal filter generated by B is principal at the
    intersection of all conjugates of B, so explicit filters carry their
    generators and decide membership against that core. Over a symbolic
    group the filter is described by an ideal of supports: K_E is a member
    iff E is covered by the ideal.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from . import Config
from . import Exception as ex
from .Groups import (ExplicitGroup, ExplicitHom, ExplicitSubgroup, Restriction, Subgroup, SupportKernel,
                     SymbolicGroup, conjugate_subgroup, preimage_subgroup, subgroup_intersect)
from .Ordinal import (COF_GE_OMEGA1, COF_OMEGA, CountableSetDescriptor, Ord, Tail, cantor_unpair,
                      check_below)

log = logging.getLogger(__name__)

FINITE_INTERSECTIONS = "finite_intersections"
COUNTABLE_INTERSECTIONS = "countable_intersections"
FINITE_UNIONS = "finite_unions"
COUNTABLE_UNIONS = "countable_unions"

_modes = {FINITE_INTERSECTIONS: FINITE_UNIONS, COUNTABLE_INTERSECTIONS: COUNTABLE_UNIONS}


class ExplicitFilter:
    """
    A filter of subgroups of a finite group given by an antichain of
    generators. When `generated` is set the filter is the normal filter
    they generate; otherwise it is just their upward closure.
    """

    def __init__(self, group: ExplicitGroup, generators: Iterable[ExplicitSubgroup], generated: bool = True):
        gens = set(generators) or {group.full()}
        for g in gens:
            if g.group is not group:
                raise ex.AmbientMismatch("generator of another group")
        self.group = group
        self.generators = tuple(sorted((g for g in gens if not any(h < g for h in gens)),
                                       key=lambda k: (k.order, sorted(k.indices))))
        self.generated = generated
        self._core: Optional[ExplicitSubgroup] = None

    def core(self) -> ExplicitSubgroup:
        """Intersection of all conjugates of all generators."""
        if self._core is None:
            G = self.group
            out = G.full()
            for B in self.generators:
                for g in range(G.order):
                    out = subgroup_intersect(out, conjugate_subgroup(g, B))
            self._core = out
        return self._core

    def contains(self, K: ExplicitSubgroup) -> bool:
        if self.generated:
            return self.core() <= K
        return any(B <= K for B in self.generators)

    def members(self) -> List[ExplicitSubgroup]:
        return [K for K in self.group.subgroup_lattice() if self.contains(K)]

    def least(self) -> Optional[ExplicitSubgroup]:
        """The least member, when there is one."""
        if self.generated:
            return self.core()
        ms = self.members()
        meet = ms[0]
        for K in ms[1:]:
            meet = subgroup_intersect(meet, K)
        return meet if self.contains(meet) else None

    def key(self):
        return tuple(sorted(K.indices) for K in self.members())

    def to_json(self):
        return {"repr": "antichain", "generated": self.generated,
                "generators": [sorted(B.indices) for B in self.generators]}

    def __str__(self):
        gens = ", ".join(str(B) for B in self.generators)
        return f"<{gens}>" if self.generated else f"up({gens})"


@dataclass(frozen=True)
class HeadKernelFamily:
    """The supports [0, beta) for beta < lam: the kernels of the head restrictions."""
    lam: Ord

    def to_json(self):
        return {"family": "head_kernels", "below": str(self.lam)}

    def __str__(self):
        return f"heads<{self.lam}"


@dataclass(frozen=True)
class PointKernelFamily:
    """The singleton supports {x} for x in points."""
    points: CountableSetDescriptor

    def to_json(self):
        return {"family": "point_kernels", "points": self.points.to_json()}

    def __str__(self):
        return f"points({self.points})"


Family = Union[HeadKernelFamily, PointKernelFamily]


@dataclass(frozen=True)
class SupportIdeal:
    """
    The filter {K : K >= K_E for some E in I}, I the closure of the
    descriptors and family members under finite or countable unions.
    """
    group: SymbolicGroup = field(repr=False)
    descriptors: Tuple[CountableSetDescriptor, ...]
    families: Tuple[Family, ...]
    mode: str

    @classmethod
    def make(cls, group: SymbolicGroup, descriptors: Iterable[CountableSetDescriptor] = (),
             families: Iterable[Family] = (), mode: str = FINITE_UNIONS) -> "SupportIdeal":
        if mode not in (FINITE_UNIONS, COUNTABLE_UNIONS):
            raise ex.SFWInputException(f"unknown closure mode {mode!r}")
        descs = [d for d in descriptors if not d.is_empty()]
        for d in descs:
            check_below(d, group.stage_bound)
        # finitely many descriptors always collapse to their union
        merged = CountableSetDescriptor.empty().union(*descs)
        fams = tuple(sorted(set(families), key=lambda f: str(f.to_json())))
        return cls(group, (merged,) if not merged.is_empty() else (), fams, mode)

    def covered(self, E: CountableSetDescriptor) -> bool:
        """Whether E lies in the ideal."""
        rest = E
        for d in self.descriptors:
            rest = rest.difference(d)
        if rest.is_empty():
            return True
        heads = [f.lam for f in self.families if isinstance(f, HeadKernelFamily)]
        points = [f.points for f in self.families if isinstance(f, PointKernelFamily)]
        if self.mode == COUNTABLE_UNIONS:
            for X in points:
                rest = rest.difference(X)
            if rest.is_empty():
                return True
            return any(rest.strict_bound() <= lam for lam in heads)
        for X in points:
            rest = CountableSetDescriptor.of([p for p in rest.explicit_points if not X.contains(p)],
                                             rest.symbolic_tails)
        if rest.is_empty():
            return True
        return any(rest.strict_bound() < lam for lam in heads)

    def contains(self, K: SupportKernel) -> bool:
        return self.covered(K.support)

    def is_principal(self) -> bool:
        return not self.families

    def union_witness(self) -> Optional["UnionWitness"]:
        """A countable family of ideal members whose union is not covered, if the ideal has one."""
        if self.mode == COUNTABLE_UNIONS:
            return None
        for f in self.families:
            if isinstance(f, HeadKernelFamily):
                lam = f.lam
                if lam.cofinality_class() != COF_OMEGA:
                    continue
                try:
                    members = [CountableSetDescriptor.initial_segment(lam.fundamental(n)) for n in range(3)]
                except ex.SFWInputException:
                    # atoms declare their cofinality, not a fundamental sequence
                    members = []
                if lam.is_countable():
                    union = CountableSetDescriptor.initial_segment(lam)
                else:
                    union = CountableSetDescriptor.of((), (Tail.sequence(lam),))
            else:
                if f.points.is_finite():
                    continue
                pts = list(itertools.islice(f.points.enumerate(), 3))
                members = [CountableSetDescriptor.of([p]) for p in pts]
                union = f.points
            if not self.covered(union):
                return UnionWitness(tuple(members), union, str(f))
        return None

    def to_json(self):
        return {"repr": "support_ideal", "mode": self.mode,
                "descriptors": [d.to_json() for d in self.descriptors],
                "families": [f.to_json() for f in self.families]}

    def __str__(self):
        parts = [str(d) for d in self.descriptors] + [str(f) for f in self.families]
        return f"ideal[{self.mode}]({'; '.join(parts) or '{}'})"


@dataclass(frozen=True)
class UnionWitness:
    """E_n for the first few n of a countable family and their union, which the ideal misses."""
    first_members: Tuple[CountableSetDescriptor, ...]
    union: CountableSetDescriptor
    family: str

    def to_json(self):
        return {"first_members": [str(d) for d in self.first_members], "union": str(self.union),
                "family": self.family}


FilterOfSubgroups = Union[ExplicitFilter, SupportIdeal]


def filter_contains(F: FilterOfSubgroups, K: Subgroup) -> bool:
    if isinstance(F, ExplicitFilter):
        if not isinstance(K, ExplicitSubgroup) or K.group is not F.group:
            raise ex.AmbientMismatch("subgroup is not in the filter's group")
        return F.contains(K)
    if not isinstance(K, SupportKernel) or K.group != F.group:
        raise ex.AmbientMismatch("subgroup is not in the filter's group")
    return F.contains(K)


# auditing

@dataclass
class FilterAuditReport:
    is_filter: bool
    is_normal: bool
    is_omega1_complete: bool
    filter_violation: Optional[str] = None
    normal_witness: Optional[Dict[str, Any]] = None
    omega1_witness: Optional[Dict[str, Any]] = None

    @property
    def ok(self) -> bool:
        return self.is_filter and self.is_normal and self.is_omega1_complete

    def failing_invariant(self) -> Optional[str]:
        if not self.is_filter:
            return "filter axioms"
        if not self.is_normal:
            return "normality"
        if not self.is_omega1_complete:
            return "omega1-completeness"
        return None

    def to_json(self):
        return {"is_filter": self.is_filter, "is_normal": self.is_normal,
                "is_omega1_complete": self.is_omega1_complete, "filter_violation": self.filter_violation,
                "normal_witness": self.normal_witness, "omega1_witness": self.omega1_witness}


def audit_filter(F: FilterOfSubgroups) -> FilterAuditReport:
    if isinstance(F, SupportIdeal):
        w = F.union_witness()
        # conjugation is trivial in an abelian ambient group
        return FilterAuditReport(True, True, w is None, omega1_witness=None if w is None else w.to_json())
    G = F.group
    if G.order > Config.MAX_GROUP_ORDER:
        raise ex.GroupTooLarge(f"order {G.order} exceeds {Config.MAX_GROUP_ORDER}")
    lattice = G.subgroup_lattice()
    members = [K for K in lattice if F.contains(K)]
    report = FilterAuditReport(True, True, True)
    if not F.contains(G.full()):
        report.is_filter = False
        report.filter_violation = "the full group is not a member"
    for K in members:
        for L in lattice:
            if K <= L and not F.contains(L):
                report.is_filter = False
                report.filter_violation = f"{K} is a member but {L} above it is not"
                break
    for K1, K2 in itertools.combinations(members, 2):
        meet = subgroup_intersect(K1, K2)
        if not F.contains(meet):
            report.is_filter = False
            report.filter_violation = report.filter_violation or f"{K1} and {K2} are members, their meet {meet} is not"
            # a descending chain whose meet escapes the filter
            report.is_omega1_complete = False
            report.omega1_witness = {"chain": [str(K1), str(meet)], "meet": str(meet)}
            break
    for K in members:
        for g in range(G.order):
            conj = conjugate_subgroup(g, K)
            if not F.contains(conj):
                report.is_normal = False
                report.normal_witness = {"subgroup": str(K), "conjugator": g, "conjugate": str(conj)}
                break
        if not report.is_normal:
            break
    log.debug("audit of %s: %s", F, report.to_json())
    return report


# constructions

def omega1_completion(F: FilterOfSubgroups) -> FilterOfSubgroups:
    """Smallest normal omega_1-complete filter extending a normal filter."""
    if isinstance(F, SupportIdeal):
        return SupportIdeal(F.group, F.descriptors, F.families, COUNTABLE_UNIONS)
    report = audit_filter(F)
    if not (report.is_filter and report.is_normal):
        raise ex.NotAFilter(f"{F} is not a normal filter: {report.failing_invariant()}")
    # a finite lattice has no new countable meets
    return ExplicitFilter(F.group, [F.least()], generated=True)


def generate_normal_filter(G, gens: Iterable = (), mode: str = FINITE_INTERSECTIONS) -> FilterOfSubgroups:
    """Least normal filter (or least normal omega_1-complete filter) containing the generators."""
    if mode not in _modes:
        raise ex.SFWInputException(f"unknown generation mode {mode!r}")
    gens = list(gens)
    if isinstance(G, ExplicitGroup):
        for B in gens:
            if not isinstance(B, ExplicitSubgroup) or B.group is not G:
                raise ex.AmbientMismatch("generator of another group")
        return ExplicitFilter(G, gens, generated=True)
    descs, fams = [], []
    for B in gens:
        if isinstance(B, SupportKernel):
            if B.group != G:
                raise ex.AmbientMismatch("generator of another group")
            descs.append(B.support)
        elif isinstance(B, (HeadKernelFamily, PointKernelFamily)):
            fams.append(B)
        else:
            raise ex.AmbientMismatch(f"cannot generate a symbolic filter from {B!r}")
    return SupportIdeal.make(G, descs, fams, _modes[mode])


def pullback_filter(h, F: FilterOfSubgroups) -> FilterOfSubgroups:
    """h*F = {K : K >= h^-1(H) for some H in F}."""
    if isinstance(h, Restriction):
        if not isinstance(F, SupportIdeal) or F.group != h.codomain:
            raise ex.CodomainMismatch("filter is not on the codomain of the restriction")
        return SupportIdeal(h.domain, F.descriptors, F.families, F.mode)
    if not isinstance(F, ExplicitFilter) or F.group is not h.codomain:
        raise ex.CodomainMismatch("filter is not on the codomain")
    least = F.least()
    if least is None:
        raise ex.NotAFilter(f"{F} has no least member")
    return ExplicitFilter(h.domain, [preimage_subgroup(h, least)], generated=True)


def restrict_filter(iota: ExplicitHom, F: ExplicitFilter) -> ExplicitFilter:
    """The filter on a subgroup: members are the K above iota^-1 of the least member of F."""
    if not isinstance(iota, ExplicitHom) or not iota.inclusion:
        raise ex.NotAnInclusion("restriction needs an inclusion")
    if F.group is not iota.codomain:
        raise ex.CodomainMismatch("filter is not on the larger group")
    least = F.least()
    if least is None:
        raise ex.NotAFilter(f"{F} has no least member")
    return ExplicitFilter(iota.domain, [preimage_subgroup(iota, least)], generated=True)


def pullback_normality_identity(h: ExplicitHom, H: ExplicitSubgroup, g: int) -> bool:
    """h^-1(h(g) H h(g)^-1) == g h^-1(H) g^-1."""
    left = preimage_subgroup(h, conjugate_subgroup(h(g), H))
    right = conjugate_subgroup(g, preimage_subgroup(h, H))
    return left == right


# completion witnesses

@dataclass(frozen=True)
class CompletionWitness:
    """A sequence of filter members whose intersection lies below a target subgroup."""
    members: Tuple[Subgroup, ...]
    target: Subgroup


def check_completion_witness(F: FilterOfSubgroups, w: CompletionWitness) -> bool:
    if not all(filter_contains(F, H) for H in w.members):
        return False
    meet = w.members[0]
    for H in w.members[1:]:
        meet = subgroup_intersect(meet, H)
    if isinstance(meet, ExplicitSubgroup):
        return meet <= w.target
    return w.target.support.is_subset(meet.support)


def concatenate_witnesses(sequences: Sequence[Sequence]) -> List:
    """Merge witness sequences along the Cantor pairing; the merged meet is the meet of all members."""
    out = []
    remaining = sum(len(s) for s in sequences)
    n = 0
    while remaining:
        i, j = cantor_unpair(n)
        n += 1
        if i < len(sequences) and j < len(sequences[i]):
            out.append(sequences[i][j])
            remaining -= 1
    return out


def is_stage_bounded(family: Sequence[CountableSetDescriptor], lam: Ord) -> Optional[Ord]:
    """For supports below a limit of cofinality >= omega_1, the single stage bounding all of them."""
    if lam.cofinality_class() != COF_GE_OMEGA1:
        return None
    union = CountableSetDescriptor.empty().union(*family)
    check_below(union, lam)
    return union.strict_bound()


# brute-force oracles over the subgroup lattice

_filter_cache: Dict[Tuple[int, bool], List[FrozenSet[ExplicitSubgroup]]] = {}


def _is_filter_family(G: ExplicitGroup, S: FrozenSet[ExplicitSubgroup], lattice: List[ExplicitSubgroup]) -> bool:
    if G.full() not in S:
        return False
    for K in S:
        if any(K <= L and L not in S for L in lattice):
            return False
    return all(subgroup_intersect(K1, K2) in S for K1, K2 in itertools.combinations(S, 2))


def _is_normal_family(G: ExplicitGroup, S: FrozenSet[ExplicitSubgroup]) -> bool:
    return all(conjugate_subgroup(g, K) in S for K in S for g in range(G.order))


def enumerate_filters(G: ExplicitGroup, normal: bool = False) -> List[FrozenSet[ExplicitSubgroup]]:
    """Every filter (or normal filter) on the subgroup lattice, found by trying every family of subgroups."""
    if G.order > Config.ORACLE_MAX_ORDER:
        raise ex.GroupTooLarge(f"oracle enumeration stops at order {Config.ORACLE_MAX_ORDER}, got {G.order}")
    key = (id(G), normal)
    if key not in _filter_cache:
        lattice = G.subgroup_lattice()
        out = []
        for mask in range(1, 1 << len(lattice)):
            S = frozenset(K for i, K in enumerate(lattice) if mask >> i & 1)
            if _is_filter_family(G, S, lattice) and (not normal or _is_normal_family(G, S)):
                out.append(S)
        _filter_cache[key] = out
        log.debug("%s: %d %sfilters on %d subgroups", G, len(out), "normal " if normal else "", len(lattice))
    return _filter_cache[key]


@dataclass
class OracleReport:
    group: str
    generators: List[str]
    agrees: bool
    expected: List[str]
    computed: List[str]

    def to_json(self):
        return {"group": self.group, "generators": self.generators, "agrees": self.agrees,
                "expected": self.expected, "computed": self.computed}


def _names(family: Iterable[ExplicitSubgroup]) -> List[str]:
    return sorted(str(K) for K in family)


def minimality_oracle(G: ExplicitGroup, gens: Sequence[ExplicitSubgroup]) -> OracleReport:
    """The intersection of all normal filters containing gens, against generate_normal_filter."""
    lattice = G.subgroup_lattice()
    expected = set(lattice)
    for S in enumerate_filters(G, normal=True):
        if all(B in S for B in gens):
            expected &= S
    computed = set(generate_normal_filter(G, gens).members())
    return OracleReport(str(G), _names(gens), expected == computed, _names(expected), _names(computed))


def audit_oracle(G: ExplicitGroup, family: Sequence[ExplicitSubgroup]) -> OracleReport:
    """audit_filter on the upward closure of a family, against membership in the enumerated filters."""
    F = ExplicitFilter(G, family, generated=False)
    members = frozenset(F.members())
    expected = [f"filter={members in enumerate_filters(G)}",
                f"normal={members in enumerate_filters(G, normal=True)}"]
    report = audit_filter(F)
    computed = [f"filter={report.is_filter}", f"normal={report.is_filter and report.is_normal}"]
    return OracleReport(str(G), _names(family), expected == computed, expected, computed)
