"""
    HS.py

    Symmetric and hereditarily symmetric names: recursive reports with a
    witness path, the tuple-stabilizer identity, and closure of HS names
    under the standard constructors.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Union

from . import Exception as ex
from .Filters import ExplicitFilter, SupportIdeal, filter_contains
from .Forcing import (EMPTY, Member, PName, apply_automorphism, check_name, make_name,
                      sequence_name, support_of, upair_name, von_neumann)
from .Groups import (ExplicitGroup, SupportKernel, SymbolicGroup, conjugate_subgroup, stabilizer,
                     subgroup_intersect)
from .Ordinal import CountableSetDescriptor, Tail

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SymmetricSystem:
    """A poset, a group of its automorphisms and a normal filter of subgroups."""
    poset: Any
    group: Union[ExplicitGroup, SymbolicGroup]
    filter: Union[ExplicitFilter, SupportIdeal]

    @classmethod
    def of_record(cls, record) -> "SymmetricSystem":
        if record.poset is None:
            raise ex.NotAnIterationObject(f"stage {record.stage} has no materialized truncation")
        return cls(record.poset, record.group, record.filter)

    @property
    def symbolic(self) -> bool:
        return isinstance(self.group, SymbolicGroup)


def symbolic_stabilizer(x: PName, system: SymmetricSystem) -> SupportKernel:
    """
    K_E for E the stages of supp(x) where some single-stage element moves x.
    Exact when the action on x splits stage by stage, as it does for
    coordinatewise actions of abelian step groups.
    """
    P = system.poset
    G = system.group
    moved = []
    for s in support_of(x, P).explicit_points:
        for j in range(1, G.step_group.order):
            g = G.at_stage(s, j).to_coordinatewise(P)
            if apply_automorphism(g, x) != x:
                moved.append(s)
                break
    return SupportKernel(G, CountableSetDescriptor.of(moved))


def name_stabilizer(x: PName, system: SymmetricSystem):
    for c in x.conditions():
        system.poset.check(c)
    if system.symbolic:
        return symbolic_stabilizer(x, system)
    return stabilizer(system.group, x)


@dataclass
class HSReport:
    name: PName
    stabilizer: Any
    in_filter: bool
    children: List["HSReport"] = field(default_factory=list)
    _why: Optional[List["HSReport"]] = field(default=None, repr=False)

    @property
    def verdict(self) -> bool:
        return self.in_filter and all(c.verdict for c in self.children)

    @property
    def digest(self) -> str:
        return self.name.digest

    def why(self) -> List["HSReport"]:
        """Shortest path from this name down to a name whose stabilizer misses the filter."""
        if self._why is None:
            if self.verdict:
                self._why = []
            elif not self.in_filter:
                self._why = [self]
            else:
                paths = [c.why() for c in self.children if not c.verdict]
                self._why = [self] + min(paths, key=len)
        return self._why

    def why_text(self) -> List[str]:
        return [f"{r.digest} (rank {r.name.rank}): sym = {r.stabilizer}, in filter: {r.in_filter}" for r in self.why()]

    def to_json(self) -> Dict[str, Any]:
        return {"name": self.digest, "rank": self.name.rank, "stabilizer": str(self.stabilizer),
                "in_filter": self.in_filter, "verdict": self.verdict,
                "children": [c.to_json() for c in self.children]}


def is_hs(x: PName, system: SymmetricSystem, _memo: Optional[Dict[PName, HSReport]] = None) -> HSReport:
    memo = {} if _memo is None else _memo
    found = memo.get(x)
    if found is not None:
        return found
    K = name_stabilizer(x, system)
    report = HSReport(x, K, filter_contains(system.filter, K))
    memo[x] = report
    report.children = [is_hs(y, system, memo) for y in x.domain()]
    return report


def tuple_sym_check(names: Sequence[PName], system: SymmetricSystem):
    """Stabilizer of the tuple name, and whether it equals the meet of the component stabilizers."""
    t = sequence_name(list(names), system.poset.top)
    K = name_stabilizer(t, system)
    meet = system.group.full() if not names else None
    for x in names:
        S = name_stabilizer(x, system)
        meet = S if meet is None else subgroup_intersect(meet, S)
    return K, K == meet


@dataclass(frozen=True)
class TupleCheck:
    stabilizer: SupportKernel
    member: bool

    def to_json(self):
        return {"stabilizer": str(self.stabilizer), "member": self.member}


def symbolic_tuple_check(prefix: Sequence[SupportKernel], system: SymmetricSystem,
                         tail: Optional[Tail] = None) -> TupleCheck:
    """
    An w-family given by the stabilizers of a finite prefix and, along
    `tail`, members whose stabilizer is K_{n} at their own stage n. The
    tuple stabilizer is the kernel of the union of the supports.
    """
    for K in prefix:
        if K.group != system.group:
            raise ex.AmbientMismatch("prefix stabilizer of another group")
    E = CountableSetDescriptor.union_of_family([K.support for K in prefix], tail)
    K = SupportKernel(system.group, E)
    return TupleCheck(K, filter_contains(system.filter, K))


# closure under constructors

@dataclass
class ClosureEntry:
    constructor: str
    inputs: List[str]
    verdict: Optional[bool]
    stabilizer: str = ""
    precondition_ok: bool = True
    note: str = ""

    def to_json(self):
        return {"constructor": self.constructor, "inputs": self.inputs, "verdict": self.verdict,
                "stabilizer": self.stabilizer, "precondition_ok": self.precondition_ok, "note": self.note}


@dataclass
class ClosureReport:
    entries: List[ClosureEntry]

    @property
    def failures(self) -> List[ClosureEntry]:
        return [e for e in self.entries if e.precondition_ok and e.verdict is False]

    @property
    def precondition_flags(self) -> List[ClosureEntry]:
        return [e for e in self.entries if not e.precondition_ok]

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self):
        return {"ok": self.ok, "entries": [e.to_json() for e in self.entries],
                "failures": len(self.failures), "precondition_flags": len(self.precondition_flags)}


def hs_closure_suite(system: SymmetricSystem, corpus: Sequence[PName], params: Sequence[PName] = (),
                     max_pairs: int = 16) -> ClosureReport:
    """
    Apply check, pair, upair, tuple, union, separation, range and power
    to HS names and audit the results. Separation parameters outside HS
    are reported as precondition flags, not failures.
    """
    memo: Dict[PName, HSReport] = {}
    for x in corpus:
        if not is_hs(x, system, memo).verdict:
            raise ex.CorpusNotHS(f"corpus name {x.digest} is not hereditarily symmetric",
                                 invariant="corpus is hereditarily symmetric")
    P = system.poset
    top = P.top
    entries: List[ClosureEntry] = []

    def audit(kind, inputs, build, precondition=True, note=""):
        try:
            out = build()
        except ex.OutOfBudget as exc:
            entries.append(ClosureEntry(kind, [x.digest for x in inputs], None, note=str(exc)))
            return
        r = is_hs(out, system, memo)
        entries.append(ClosureEntry(kind, [x.digest for x in inputs], r.verdict, str(r.stabilizer), precondition, note))

    audit("check", [], lambda: check_name(von_neumann(2), top))
    for x, y in itertools.islice(itertools.product(corpus, repeat=2), max_pairs):
        audit("pair", [x, y], lambda: make_name("pair", P, x, y))
        audit("upair", [x, y], lambda: make_name("upair", P, x, y))
    if corpus:
        audit("tuple", list(corpus), lambda: make_name("tuple", P, list(corpus)))
    for x in corpus:
        audit("union", [x], lambda: make_name("union", P, x))
    for x, y in itertools.islice(itertools.combinations(corpus, 2), max_pairs):
        audit("union", [x, y], lambda: make_name("union", P, upair_name(x, y, top)))
    member = Member(i=0, j=1)
    for x in corpus:
        for q in list(corpus) + list(params):
            ok = is_hs(q, system, memo).verdict
            audit("separation", [x, q], lambda: make_name("separation", P, x, member, [q]), precondition=ok,
                  note="" if ok else "parameter is not hereditarily symmetric")
    for x, y in itertools.islice(itertools.product(corpus, repeat=2), max_pairs):
        f = PName([(make_name("pair", P, z, y), top) for z, _ in x.entries] or [(make_name("pair", P, EMPTY, y), top)])
        audit("range", [x, y], lambda: make_name("range", P, x, f))
    for x in corpus:
        audit("power", [x], lambda: make_name("power", P, x, lambda z: is_hs(z, system, memo).verdict))
    report = ClosureReport(entries)
    log.info("closure suite: %d entries, %d failures, %d precondition flags",
             len(entries), len(report.failures), len(report.precondition_flags))
    return report


def conjugation_identity(G: ExplicitGroup, x: PName) -> bool:
    """sym(g x) = g sym(x) g^-1 for every g."""
    base = stabilizer(G, x)
    return all(stabilizer(G, apply_automorphism(g, x)) == conjugate_subgroup(i, base)
               for i, g in enumerate(G.elements))
