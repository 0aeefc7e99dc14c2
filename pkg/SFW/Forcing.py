"""
    Forcing.py

    Finite posets, forcing names and their valuations, the automorphism
    action on names, a semantic forcing relation for bounded formulas,
    two-step composition, supports and the standard name constructors.

    On a finite poset every filter is principal, so a filter is stored
    by its least element and the maximal filters are the up-sets of the
    minimal conditions. Those play the role of generic filters.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import logging
import random
import weakref
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, FrozenSet, Hashable, Iterable, Iterator, List, Optional, Sequence, Tuple

import networkx as nx
from networkx.algorithms.isomorphism import DiGraphMatcher
from pydantic import BaseModel, ConfigDict
from sympy.combinatorics import Permutation

from . import Config
from . import Exception as ex
from .Ordinal import CountableSetDescriptor, Ord

log = logging.getLogger(__name__)

Condition = Hashable
HereditarySet = FrozenSet


def cond_label(c: Condition) -> str:
    if isinstance(c, tuple):
        return "|".join(cond_label(x) for x in c)
    return str(c)


# hereditarily finite sets

@lru_cache(maxsize=None)
def von_neumann(n: int) -> HereditarySet:
    if n == 0:
        return frozenset()
    prev = von_neumann(n - 1)
    return prev | {prev}


def kpair(a: HereditarySet, b: HereditarySet) -> HereditarySet:
    return frozenset({frozenset({a}), frozenset({a, b})})


@lru_cache(maxsize=None)
def ackermann(n: int) -> HereditarySet:
    """The set coded by the binary digits of n; rank grows like log*."""
    return frozenset(ackermann(k) for k in range(n.bit_length()) if n >> k & 1)


@lru_cache(maxsize=4096)
def _natural_of(x: HereditarySet) -> Optional[int]:
    n = len(x)
    return n if x == von_neumann(n) else None


def hs_text(x: HereditarySet) -> str:
    """Canonical text for a hereditarily finite set; von Neumann naturals print as digits."""
    n = _natural_of(x)
    if n is not None:
        return str(n)
    return "{" + ",".join(sorted(hs_text(y) for y in x)) + "}"


# posets

class ValidationReport:
    def __init__(self, violations: List[str]):
        self.violations = violations

    @property
    def valid(self) -> bool:
        return not self.violations

    def __repr__(self):
        return f"ValidationReport(valid={self.valid}, violations={self.violations})"


class PosetFilter:
    """A filter on a finite poset, stored by its least element."""

    def __init__(self, poset: "_PosetBase", least: Condition):
        if least not in poset:
            raise ex.ForeignCondition(f"{cond_label(least)} is not a condition")
        self.poset = poset
        self.least = least
        self._values: Dict[PName, HereditarySet] = {}

    @classmethod
    def from_members(cls, poset: "_PosetBase", members: Iterable[Condition]) -> "PosetFilter":
        members = set(members)
        if not members:
            raise ex.InvalidFilter("a filter is nonempty")
        for p in members:
            if p not in poset:
                raise ex.ForeignCondition(f"{cond_label(p)} is not a condition")
        least = [r for r in members if all(poset.leq(r, q) for q in members)]
        if not least:
            raise ex.InvalidFilter("filter is not directed")
        f = cls(poset, least[0])
        if set(poset.above(f.least)) != members:
            raise ex.InvalidFilter("filter is not upward closed")
        return f

    def __contains__(self, p: Condition) -> bool:
        return self.poset.leq(self.least, p)

    def members(self) -> Iterator[Condition]:
        return self.poset.above(self.least)

    def is_maximal(self) -> bool:
        return self.least in set(self.poset.minimal())

    def __eq__(self, other):
        return isinstance(other, PosetFilter) and self.poset is other.poset and self.least == other.least

    def __hash__(self):
        return hash(self.least)

    def __repr__(self):
        return f"PosetFilter(least={cond_label(self.least)})"


class _PosetBase:
    """Operations shared by explicit and product posets."""

    top: Condition

    def leq(self, p: Condition, q: Condition) -> bool:
        raise NotImplementedError

    def __contains__(self, c: Condition) -> bool:
        raise NotImplementedError

    def __iter__(self) -> Iterator[Condition]:
        raise NotImplementedError

    def minimal_below(self, p: Condition) -> Iterator[Condition]:
        raise NotImplementedError

    def below(self, p: Condition) -> Iterator[Condition]:
        raise NotImplementedError

    def above(self, p: Condition) -> Iterator[Condition]:
        raise NotImplementedError

    @property
    def size(self) -> int:
        raise NotImplementedError

    def minimal(self) -> Iterator[Condition]:
        return self.minimal_below(self.top)

    def compatible(self, p: Condition, q: Condition) -> bool:
        return any(self.leq(r, q) for r in self.below(p))

    def common_extensions(self, p: Condition, q: Condition) -> Iterator[Condition]:
        return (r for r in self.below(p) if self.leq(r, q))

    def maximal_common_extensions(self, p: Condition, q: Condition) -> List[Condition]:
        common = list(self.common_extensions(p, q))
        return [r for r in common if not any(s != r and self.leq(r, s) for s in common)]

    def maximal_filters(self, containing: Optional[Condition] = None) -> List[PosetFilter]:
        """Maximal filters in lexicographic order of their least conditions."""
        base = self.top if containing is None else containing
        if base not in self:
            raise ex.ForeignCondition(f"{cond_label(base)} is not a condition")
        return [PosetFilter(self, r) for r in sorted(self.minimal_below(base), key=cond_label)]

    def check(self, c: Condition) -> None:
        if c not in self:
            raise ex.ForeignCondition(f"{cond_label(c)} is not a condition")


class Poset(_PosetBase):
    """A finite poset given by its full order relation; (p, q) in le means p <= q, p the stronger."""

    def __init__(self, conditions: Iterable[Condition], le: Iterable[Tuple[Condition, Condition]], top: Condition):
        self.conditions = tuple(sorted(set(conditions), key=cond_label))
        self.le = frozenset(le)
        self.top = top
        cset = set(self.conditions)
        for p, q in self.le:
            if p not in cset or q not in cset:
                raise ex.ForeignCondition(f"order mentions unknown condition {cond_label(p)} or {cond_label(q)}")
        self._index = {c: i for i, c in enumerate(self.conditions)}
        below: Dict[Condition, set] = {c: set() for c in self.conditions}
        above: Dict[Condition, set] = {c: set() for c in self.conditions}
        for p, q in self.le:
            below[q].add(p)
            above[p].add(q)
        self._below = {c: frozenset(s) for c, s in below.items()}
        self._above = {c: frozenset(s) for c, s in above.items()}

    @classmethod
    def from_covers(cls, conditions: Iterable[Condition], covers: Iterable[Tuple[Condition, Condition]], top: Condition) -> "Poset":
        """Order generated by the cover pairs (p, q), p below q."""
        g = nx.DiGraph()
        g.add_nodes_from(conditions)
        g.add_edges_from(covers)
        closure = nx.transitive_closure(g, reflexive=True)
        return cls(g.nodes, closure.edges, top)

    @classmethod
    def trivial(cls) -> "Poset":
        return cls(["1"], [("1", "1")], "1")

    @classmethod
    def antichain(cls, atoms: Sequence[str]) -> "Poset":
        """The given atoms, pairwise incomparable, under a top condition 1."""
        return cls.from_covers(list(atoms) + ["1"], [(a, "1") for a in atoms], "1")

    def leq(self, p, q) -> bool:
        return (p, q) in self.le

    def __contains__(self, c) -> bool:
        return c in self._index

    def __iter__(self):
        return iter(self.conditions)

    def index(self, c) -> int:
        return self._index[c]

    @property
    def size(self) -> int:
        return len(self.conditions)

    def below(self, p):
        return iter(sorted(self._below[p], key=cond_label))

    def above(self, p):
        return iter(sorted(self._above[p], key=cond_label))

    def minimal_below(self, p):
        for r in sorted(self._below[p], key=cond_label):
            if self._below[r] <= {r}:
                yield r

    def to_json(self) -> Dict[str, Any]:
        return {"conditions": [cond_label(c) for c in self.conditions],
                "le": sorted([cond_label(p), cond_label(q)] for p, q in self.le),
                "top": cond_label(self.top)}

    def strict_graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.conditions)
        g.add_edges_from((p, q) for p, q in self.le if p != q)
        return g

    def __repr__(self):
        return f"Poset({self.size} conditions)"


class ProductPoset(_PosetBase):
    """
    Coordinatewise product of finite factors, evaluated lazily. Conditions
    are tuples; when `stages` is given, coordinate i is iteration stage
    stages[i] and the product is an iteration truncation.
    """

    def __init__(self, factors: Sequence[Poset], stages: Optional[Sequence[Ord]] = None):
        self.factors = tuple(factors)
        self.stages = tuple(stages) if stages is not None else None
        if self.stages is not None and len(self.stages) != len(self.factors):
            raise ex.SFWInputException("one stage per factor")
        self.top = tuple(f.top for f in self.factors)

    @classmethod
    def extend(cls, head: _PosetBase, step: Poset, stage: Optional[Ord] = None) -> "ProductPoset":
        if isinstance(head, ProductPoset):
            stages = None if head.stages is None or stage is None else head.stages + (stage,)
            return cls(head.factors + (step,), stages)
        return cls((head, step), None)

    def leq(self, p, q) -> bool:
        return all(f.leq(a, b) for f, a, b in zip(self.factors, p, q))

    def __contains__(self, c) -> bool:
        return isinstance(c, tuple) and len(c) == len(self.factors) and all(a in f for f, a in zip(self.factors, c))

    def __iter__(self):
        return itertools.product(*self.factors)

    @property
    def size(self) -> int:
        n = 1
        for f in self.factors:
            n *= f.size
        return n

    def below(self, p):
        return itertools.product(*(f.below(a) for f, a in zip(self.factors, p)))

    def above(self, p):
        return itertools.product(*(f.above(a) for f, a in zip(self.factors, p)))

    def minimal_below(self, p):
        return itertools.product(*(f.minimal_below(a) for f, a in zip(self.factors, p)))

    def maximal_common_extensions(self, p, q):
        return list(itertools.product(*(f.maximal_common_extensions(a, b) for f, a, b in zip(self.factors, p, q))))

    def coordinate(self, stage: Ord) -> int:
        if self.stages is None or stage not in self.stages:
            raise ex.StageMismatch(f"stage {stage} is not a coordinate of this truncation")
        return self.stages.index(stage)

    def lift(self, index: int, c: Condition) -> tuple:
        """The condition that is c at coordinate index and trivial elsewhere."""
        return tuple(c if i == index else f.top for i, f in enumerate(self.factors))

    def __repr__(self):
        return f"ProductPoset({len(self.factors)} factors, {self.size} conditions)"


def validate_poset(P: Poset) -> ValidationReport:
    violations = []
    conds = set(P.conditions)
    for c in P.conditions:
        if (c, c) not in P.le:
            violations.append(f"reflexivity: {cond_label(c)} <= {cond_label(c)} missing")
    for p, q in sorted(P.le, key=lambda e: (cond_label(e[0]), cond_label(e[1]))):
        for r in P._above[q]:
            if (p, r) not in P.le:
                violations.append(f"transitivity: {cond_label(p)} <= {cond_label(q)} <= {cond_label(r)} but not {cond_label(p)} <= {cond_label(r)}")
        if p != q and (q, p) in P.le and cond_label(p) < cond_label(q):
            violations.append(f"antisymmetry: {cond_label(p)} and {cond_label(q)} are equivalent")
    if P.top not in conds:
        violations.append(f"unique top: {cond_label(P.top)} is not a condition")
    else:
        for c in P.conditions:
            if (c, P.top) not in P.le:
                violations.append(f"unique top: {cond_label(c)} is not below {cond_label(P.top)}")
    return ValidationReport(violations)


# names

class PName:
    """
    A forcing name: a finite set of (name, condition) pairs. Names are
    hash-consed, so structurally equal names are the same object. The
    intern table holds names weakly; a name nothing refers to is dropped.
    """
    __slots__ = ("entries", "rank", "_hash", "_key", "__weakref__")
    _table: "weakref.WeakValueDictionary[FrozenSet, PName]" = weakref.WeakValueDictionary()

    def __new__(cls, entries: Iterable[Tuple["PName", Condition]] = ()):
        entries = frozenset(entries)
        found = cls._table.get(entries)
        if found is not None:
            return found
        obj = super().__new__(cls)
        obj.entries = entries
        obj.rank = 1 + max(child.rank for child, _ in entries) if entries else 0
        obj._hash = hash(entries)
        obj._key = None
        return cls._table.setdefault(entries, obj)

    def __eq__(self, other):
        return self is other or (isinstance(other, PName) and self.entries == other.entries)

    def __hash__(self):
        return self._hash

    def __reduce__(self):
        return (PName, (tuple(self.entries),))

    @property
    def key(self) -> tuple:
        """Canonical sort key."""
        if self._key is None:
            self._key = tuple(sorted((child.key, cond_label(c)) for child, c in self.entries))
        return self._key

    def __lt__(self, other: "PName") -> bool:
        return self.key < other.key

    def domain(self) -> List["PName"]:
        return sorted({child for child, _ in self.entries}, key=lambda n: n.key)

    def sorted_entries(self) -> List[Tuple["PName", Condition]]:
        return sorted(self.entries, key=lambda e: (e[0].key, cond_label(e[1])))

    def conditions(self) -> FrozenSet[Condition]:
        out = set()
        seen = set()
        stack = [self]
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            for child, c in n.entries:
                out.add(c)
                stack.append(child)
        return frozenset(out)

    def is_check(self, top: Condition) -> bool:
        return all(c == top for c in self.conditions())

    def to_json(self) -> list:
        return [[child.to_json(), cond_label(c)] for child, c in self.sorted_entries()]

    @property
    def digest(self) -> str:
        text = json.dumps(self.to_json(), separators=(",", ":"))
        return hashlib.sha1(text.encode("utf-8")).hexdigest()[:10]

    def __repr__(self):
        return f"PName(rank={self.rank}, digest={self.digest})"

    @classmethod
    def table_size(cls) -> int:
        return len(cls._table)


EMPTY = PName()


def check_name(x: HereditarySet, top: Condition) -> PName:
    """The canonical name x-check."""
    return _check_name(x, top)


@lru_cache(maxsize=None)
def _check_name(x: HereditarySet, top: Condition) -> PName:
    return PName((_check_name(y, top), top) for y in x)


def upair_name(x: PName, y: PName, top: Condition) -> PName:
    return PName([(x, top), (y, top)])


def pair_name(x: PName, y: PName, top: Condition) -> PName:
    """Kuratowski ordered pair of names."""
    return PName([(upair_name(x, x, top), top), (upair_name(x, y, top), top)])


def unpair_name(rho: PName, top: Condition) -> Optional[Tuple[PName, PName]]:
    """Inverse of pair_name on names of that exact shape."""
    if any(c != top for _, c in rho.entries):
        return None
    kids = [child for child, _ in rho.entries]
    singles = [k for k in kids if len(k.entries) == 1 and all(c == top for _, c in k.entries)]
    if len(kids) == 1 and singles:
        (x, _), = singles[0].entries
        return x, x
    if len(kids) == 2 and len(singles) >= 1:
        for s in singles:
            (x, _), = s.entries
            other = kids[1] if kids[0] is s else kids[0]
            members = {child for child, c in other.entries if c == top}
            if len(other.entries) == 2 and x in members and len(members) == 2:
                y = next(m for m in members if m != x)
                return x, y
    return None


def sequence_name(names: Sequence[PName], top: Condition) -> PName:
    """The canonical sequence name <x_j : j < n>."""
    return PName((pair_name(check_name(von_neumann(j), top), x, top), top) for j, x in enumerate(names))


# valuations

def _as_filter(P: _PosetBase, F) -> PosetFilter:
    if isinstance(F, PosetFilter):
        return F
    return PosetFilter.from_members(P, F)


def evaluate_name(x: PName, F: PosetFilter) -> HereditarySet:
    """x^F = {y^F : (y, p) in x, p in F}."""
    cache = F._values
    found = cache.get(x)
    if found is not None:
        return found
    out = frozenset(evaluate_name(child, F) for child, p in x.entries if p in F)
    cache[x] = out
    return out


def evaluate(x: PName, F, P: Optional[_PosetBase] = None) -> HereditarySet:
    """evaluate_name accepting a member set; the set is checked to be a filter."""
    if not isinstance(F, PosetFilter):
        if P is None:
            raise ex.InvalidFilter("a member set needs its poset")
        F = PosetFilter.from_members(P, F)
    return evaluate_name(x, F)


# automorphisms

class PosetAutomorphism:
    """An order automorphism of an explicit poset, stored as a permutation of its condition order."""

    def __init__(self, poset: Poset, perm: Permutation):
        if perm.size != poset.size:
            perm = Permutation(perm.array_form + list(range(perm.size, poset.size)))
        self.poset = poset
        self.perm = perm

    @classmethod
    def from_mapping(cls, poset: Poset, mapping: Dict[Condition, Condition]) -> "PosetAutomorphism":
        full = {c: mapping.get(c, c) for c in poset.conditions}
        if sorted(full.values(), key=cond_label) != list(poset.conditions):
            raise ex.NotAnAutomorphism("mapping is not a bijection on conditions")
        g = cls(poset, Permutation([poset.index(full[c]) for c in poset.conditions]))
        g.validate()
        return g

    @classmethod
    def identity(cls, poset: Poset) -> "PosetAutomorphism":
        return cls(poset, Permutation(list(range(poset.size))))

    def validate(self) -> None:
        P = self.poset
        if self(P.top) != P.top:
            raise ex.NotAnAutomorphism("automorphism moves the top condition")
        for p in P.conditions:
            for q in P.conditions:
                if P.leq(p, q) != P.leq(self(p), self(q)):
                    raise ex.NotAnAutomorphism(f"order not preserved at {cond_label(p)}, {cond_label(q)}")

    def __call__(self, c: Condition) -> Condition:
        if c not in self.poset:
            raise ex.ForeignCondition(f"{cond_label(c)} is not a condition")
        return self.poset.conditions[self.perm.array_form[self.poset.index(c)]]

    @property
    def forward(self) -> Dict[Condition, Condition]:
        return {c: self(c) for c in self.poset.conditions}

    @property
    def inverse_map(self) -> Dict[Condition, Condition]:
        return {v: k for k, v in self.forward.items()}

    def compose(self, other: "PosetAutomorphism") -> "PosetAutomorphism":
        """self after other."""
        return PosetAutomorphism(self.poset, other.perm * self.perm)

    def inverse(self) -> "PosetAutomorphism":
        return PosetAutomorphism(self.poset, ~self.perm)

    @property
    def key(self) -> tuple:
        return tuple(self.perm.array_form)

    @property
    def is_identity(self) -> bool:
        return self.perm.is_Identity

    def __eq__(self, other):
        return isinstance(other, PosetAutomorphism) and self.poset is other.poset and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def to_json(self) -> Dict[str, str]:
        return {cond_label(c): cond_label(self(c)) for c in self.poset.conditions}

    def __repr__(self):
        return f"PosetAutomorphism({self.perm.cyclic_form})"


class CoordinatewiseAutomorphism:
    """Acts on a product poset by one automorphism per coordinate; None is the identity."""

    def __init__(self, poset: ProductPoset, components: Sequence[Optional[PosetAutomorphism]]):
        if len(components) != len(poset.factors):
            raise ex.StageMismatch("one component per coordinate")
        self.poset = poset
        self.components = tuple(None if (g is None or g.is_identity) else g for g in components)

    @classmethod
    def identity(cls, poset: ProductPoset) -> "CoordinatewiseAutomorphism":
        return cls(poset, [None] * len(poset.factors))

    def __call__(self, c: Condition) -> Condition:
        if c not in self.poset:
            raise ex.ForeignCondition(f"{cond_label(c)} is not a condition")
        return tuple(a if g is None else g(a) for g, a in zip(self.components, c))

    def compose(self, other: "CoordinatewiseAutomorphism") -> "CoordinatewiseAutomorphism":
        comps = []
        for g, h in zip(self.components, other.components):
            comps.append(h if g is None else g if h is None else g.compose(h))
        return CoordinatewiseAutomorphism(self.poset, comps)

    def inverse(self) -> "CoordinatewiseAutomorphism":
        return CoordinatewiseAutomorphism(self.poset, [None if g is None else g.inverse() for g in self.components])

    @property
    def key(self) -> tuple:
        return tuple(None if g is None else g.key for g in self.components)

    @property
    def is_identity(self) -> bool:
        return all(g is None for g in self.components)

    def support(self) -> CountableSetDescriptor:
        if self.poset.stages is None:
            raise ex.NotAnIterationObject("product has no stage coordinates")
        return CountableSetDescriptor.of(s for s, g in zip(self.poset.stages, self.components) if g is not None)

    def __eq__(self, other):
        return isinstance(other, CoordinatewiseAutomorphism) and self.poset is other.poset and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def to_json(self):
        return [None if g is None else g.to_json() for g in self.components]

    def __repr__(self):
        return f"CoordinatewiseAutomorphism({self.key})"


def apply_automorphism(pi: Callable[[Condition], Condition], x: PName, _memo: Optional[dict] = None) -> PName:
    """pi x = {(pi y, pi p) : (y, p) in x}."""
    memo = {} if _memo is None else _memo
    found = memo.get(x)
    if found is not None:
        return found
    out = PName((apply_automorphism(pi, child, memo), pi(c)) for child, c in x.entries)
    memo[x] = out
    return out


def automorphisms(P: Poset) -> List[PosetAutomorphism]:
    """All order automorphisms of P, the identity first."""
    g = P.strict_graph()
    found = []
    for m in DiGraphMatcher(g, g).isomorphisms_iter():
        found.append(PosetAutomorphism(P, Permutation([P.index(m[c]) for c in P.conditions])))
    found.sort(key=lambda a: (not a.is_identity, a.key))
    return found


# bounded formulas

class BoundedFormula(BaseModel):
    """Variables are indices into the environment; a bounded quantifier binds the next index."""
    model_config = ConfigDict(frozen=True)

    def holds(self, values: List[HereditarySet]) -> bool:
        raise NotImplementedError

    def check_vars(self, n: int) -> None:
        raise NotImplementedError

    def depth(self) -> int:
        raise NotImplementedError


def _need(i: int, n: int) -> None:
    if not 0 <= i < n:
        raise ex.UnboundVariable(f"variable {i} is not bound (environment has {n})")


class Member(BoundedFormula):
    i: int
    j: int

    def holds(self, values):
        return values[self.i] in values[self.j]

    def check_vars(self, n):
        _need(self.i, n)
        _need(self.j, n)

    def depth(self):
        return 0

    def __str__(self):
        return f"v{self.i} in v{self.j}"


class Equal(BoundedFormula):
    i: int
    j: int

    def holds(self, values):
        return values[self.i] == values[self.j]

    def check_vars(self, n):
        _need(self.i, n)
        _need(self.j, n)

    def depth(self):
        return 0

    def __str__(self):
        return f"v{self.i} = v{self.j}"


class And(BoundedFormula):
    left: BoundedFormula
    right: BoundedFormula

    def holds(self, values):
        return self.left.holds(values) and self.right.holds(values)

    def check_vars(self, n):
        self.left.check_vars(n)
        self.right.check_vars(n)

    def depth(self):
        return 1 + max(self.left.depth(), self.right.depth())

    def __str__(self):
        return f"({self.left} and {self.right})"


class Not(BoundedFormula):
    body: BoundedFormula

    def holds(self, values):
        return not self.body.holds(values)

    def check_vars(self, n):
        self.body.check_vars(n)

    def depth(self):
        return 1 + self.body.depth()

    def __str__(self):
        return f"not {self.body}"


class ForallIn(BoundedFormula):
    j: int
    body: BoundedFormula

    def holds(self, values):
        return all(self.body.holds(values + [y]) for y in values[self.j])

    def check_vars(self, n):
        _need(self.j, n)
        self.body.check_vars(n + 1)

    def depth(self):
        return 1 + self.body.depth()

    def __str__(self):
        return f"(forall x in v{self.j}) {self.body}"


def Or(a: BoundedFormula, b: BoundedFormula) -> BoundedFormula:
    return Not(body=And(left=Not(body=a), right=Not(body=b)))


def ExistsIn(j: int, body: BoundedFormula) -> BoundedFormula:
    return Not(body=ForallIn(j=j, body=Not(body=body)))


def subset_formula(i: int, j: int, n: int) -> BoundedFormula:
    """v_i is a subset of v_j, in an environment of n variables."""
    return ForallIn(j=i, body=Member(i=n, j=j))


def forces(P: _PosetBase, p: Condition, phi: BoundedFormula, env: Sequence[PName]) -> bool:
    """p forces phi iff phi holds of the valuations under every maximal filter containing p."""
    phi.check_vars(len(env))
    P.check(p)
    for r in P.minimal_below(p):
        F = PosetFilter(P, r)
        if not phi.holds([evaluate_name(x, F) for x in env]):
            return False
    return True


# two-step composition

class PosetName:
    """Names for the field, the order (as Kuratowski pairs) and the top of a second factor."""

    def __init__(self, field: PName, order: PName, top: PName, ground: Optional[Poset] = None):
        self.field = field
        self.order = order
        self.top = top
        self.ground = ground

    @classmethod
    def check(cls, Q: Poset, top: Condition) -> "PosetName":
        code = {c: ackermann(i) for i, c in enumerate(Q.conditions)}
        field = check_name(frozenset(code.values()), top)
        order = check_name(frozenset(kpair(code[p], code[q]) for p, q in Q.le), top)
        return cls(field, order, check_name(code[Q.top], top), ground=Q)

    def is_check(self, top: Condition) -> bool:
        return self.field.is_check(top) and self.order.is_check(top) and self.top.is_check(top)

    def decode(self, F: PosetFilter) -> Poset:
        """The poset this name denotes under F."""
        field = evaluate_name(self.field, F)
        order = evaluate_name(self.order, F)
        top = evaluate_name(self.top, F)
        le = []
        for pair in order:
            parts = sorted(pair, key=len)
            if len(parts) == 1:
                (single,) = parts
                if len(single) != 1:
                    raise ex.NotAPosetName("order contains a non-pair")
                (a,) = single
                le.append((hs_text(a), hs_text(a)))
                continue
            if len(parts) != 2 or len(parts[0]) != 1:
                raise ex.NotAPosetName("order contains a non-pair")
            (a,) = parts[0]
            rest = set(parts[1]) - {a}
            if len(rest) != 1:
                raise ex.NotAPosetName("order contains a non-pair")
            le.append((hs_text(a), hs_text(rest.pop())))
        labels = [hs_text(c) for c in field]
        try:
            Q = Poset(labels, le, hs_text(top))
        except ex.ForeignCondition as exc:
            raise ex.NotAPosetName(str(exc))
        report = validate_poset(Q)
        if not report.valid:
            raise ex.NotAPosetName("; ".join(report.violations))
        return Q


def two_step_compose(P: _PosetBase, Q: PosetName, stage: Optional[Ord] = None, product_shortcut: bool = True) -> _PosetBase:
    """
    P * Q. A check-coded second factor gives the product P x Q; otherwise
    the conditions (p, q) with p forcing q into the field are materialized,
    ordered by the two-step order and identified up to equivalence.
    """
    if Q.is_check(P.top):
        # check names take the same value under every filter
        Q.decode(PosetFilter(P, P.top))
    else:
        for F in P.maximal_filters():
            Q.decode(F)
    if product_shortcut and Q.ground is not None and Q.is_check(P.top):
        return ProductPoset.extend(P, Q.ground, stage)

    field_member = Member(i=0, j=1)
    candidates = sorted(set(Q.field.domain()) | {Q.top}, key=lambda n: n.key)
    pairs = [(p, q) for p in P for q in candidates if forces(P, p, field_member, [q, Q.field])]
    if (P.top, Q.top) not in pairs:
        raise ex.NotAPosetName("the top name is not forced into the field")

    def leq(a, b):
        (p1, q1), (p0, q0) = a, b
        return P.leq(p1, p0) and forces(P, p1, field_member, [pair_name(q1, q0, P.top), Q.order])

    le = {(a, b) for a in pairs for b in pairs if leq(a, b)}
    classes: Dict[tuple, tuple] = {}
    for a in sorted(pairs, key=lambda t: (cond_label(t[0]), t[1].key)):
        if a in classes:
            continue
        for b in pairs:
            if (a, b) in le and (b, a) in le:
                classes.setdefault(b, a)
    top_rep = classes[(P.top, Q.top)]

    def label(rep):
        if rep == top_rep:
            return f"{cond_label(P.top)}*1"
        return f"{cond_label(rep[0])}*{rep[1].digest}"

    reps = sorted(set(classes.values()), key=label)
    out = Poset([label(r) for r in reps],
                [(label(classes[a]), label(classes[b])) for a, b in le],
                label(top_rep))
    out.components = {label(r): r for r in reps}
    log.debug("two-step composition materialized %d conditions", out.size)
    return out


def factor_filter(composite: _PosetBase, G: PosetFilter, P: Optional[_PosetBase] = None,
                  Q: Optional[PosetName] = None) -> Tuple[PosetFilter, PosetFilter]:
    """
    Split a filter on P * Q into G_P on P and H on the second factor as
    evaluated by G_P. A product composite splits coordinatewise; an
    explicit one needs P and Q back to decode the second factor.
    """
    if isinstance(composite, ProductPoset):
        head_factors = composite.factors[:-1]
        if len(head_factors) == 1:
            head, least_head = head_factors[0], G.least[0]
        else:
            stages = composite.stages[:-1] if composite.stages else None
            head, least_head = ProductPoset(head_factors, stages), G.least[:-1]
        return PosetFilter(head, least_head), PosetFilter(composite.factors[-1], G.least[-1])
    if P is None or Q is None:
        raise ex.SFWInputException("an explicit composition needs its factors to split a filter")
    p0, q0 = composite.components[G.least]
    G_P = PosetFilter(P, p0)
    second = Q.decode(G_P)
    return G_P, PosetFilter(second, hs_text(evaluate_name(q0, G_P)))


# supports

def support_of(x, ctx: _PosetBase) -> CountableSetDescriptor:
    """Nontrivial coordinates of a condition; for a name, the union over its conditions."""
    if not isinstance(ctx, ProductPoset) or ctx.stages is None:
        raise ex.NotAnIterationObject("supports are defined over iteration posets")
    if isinstance(x, PName):
        conds = x.conditions()
    else:
        conds = [x]
    stages = set()
    for c in conds:
        ctx.check(c)
        for s, f, a in zip(ctx.stages, ctx.factors, c):
            if a != f.top:
                stages.add(s)
    return CountableSetDescriptor.of(stages)


# constructors

def _union(P: _PosetBase, A: PName) -> PName:
    out = set()
    for sigma, p in A.entries:
        for tau, q in sigma.entries:
            for r in P.maximal_common_extensions(p, q):
                out.add((tau, r))
    return PName(out)


def _separation(P: _PosetBase, A: PName, phi: BoundedFormula, params: Sequence[PName] = ()) -> PName:
    phi.check_vars(1 + len(params))
    return PName((sigma, p) for sigma, p in A.entries if forces(P, p, phi, [sigma] + list(params)))


def _range(P: _PosetBase, A: PName, f: PName) -> PName:
    out = set()
    for rho, r in f.entries:
        decoded = unpair_name(rho, P.top)
        if decoded is None:
            continue
        sigma, tau = decoded
        for s, q in A.entries:
            if s == sigma and P.leq(r, q):
                out.update((tau, p) for p in P.above(r))
    return PName(out)


def _power(P: _PosetBase, a: PName, hs: Optional[Callable[[PName], bool]] = None) -> PName:
    if a.rank + 1 > Config.POWER_MAX_RANK or P.size > Config.POWER_MAX_CONDITIONS:
        raise ex.OutOfBudget(f"power collection of a rank-{a.rank} name over {P.size} conditions is out of budget")
    cells = [(y, p) for y in a.domain() for p in P]
    if len(cells) > 12:
        raise ex.OutOfBudget(f"power collection needs 2^{len(cells)} candidates")
    inside = subset_formula(0, 1, 2)
    out = []
    for k in range(len(cells) + 1):
        for chosen in itertools.combinations(cells, k):
            x = PName(chosen)
            if forces(P, P.top, inside, [x, a]) and (hs is None or hs(x)):
                out.append((x, P.top))
    return PName(out)


def _check(P: _PosetBase, x: HereditarySet) -> PName:
    if not isinstance(x, frozenset):
        raise ex.ArityMismatch("check takes a hereditarily finite set")
    return check_name(x, P.top)


_constructors = {
    "check": (_check, 1, 1),
    "pair": (lambda P, x, y: pair_name(x, y, P.top), 2, 2),
    "upair": (lambda P, x, y: upair_name(x, y, P.top), 2, 2),
    "tuple": (lambda P, names: sequence_name(list(names), P.top), 1, 1),
    "union": (_union, 1, 1),
    "separation": (_separation, 2, 3),
    "range": (_range, 2, 2),
    "power": (_power, 1, 2),
}


def make_name(kind: str, P: _PosetBase, *args) -> PName:
    """Build a name with one of the standard constructors over P."""
    if kind not in _constructors:
        raise ex.ArityMismatch(f"unknown constructor {kind!r}")
    fn, lo, hi = _constructors[kind]
    if not lo <= len(args) <= hi:
        raise ex.ArityMismatch(f"{kind} takes {lo}..{hi} arguments, got {len(args)}")
    for a in args:
        if isinstance(a, PName):
            for c in a.conditions():
                P.check(c)
    return fn(P, *args)


# corpora

def poset_corpus(max_conditions: int = None) -> List[Poset]:
    """Pairwise non-isomorphic posets with a top condition, smallest first."""
    max_conditions = Config.CORPUS_MAX_CONDITIONS if max_conditions is None else max_conditions
    found: List[Poset] = []
    for n in range(1, max_conditions + 1):
        atoms = [f"p{i}" for i in range(n - 1)]
        slots = [(a, b) for a in atoms for b in atoms if a != b]
        graphs = []
        for mask in range(1 << len(slots)):
            strict = {slots[i] for i in range(len(slots)) if mask >> i & 1}
            if any((b, a) in strict for a, b in strict):
                continue
            if any((a, d) not in strict for a, b in strict for c, d in strict if b == c and a != d):
                continue
            g = nx.DiGraph()
            g.add_nodes_from(atoms)
            g.add_edges_from(strict)
            if any(nx.is_isomorphic(g, h) for h in graphs):
                continue
            graphs.append(g)
            le = {(c, c) for c in atoms + ["1"]} | strict | {(a, "1") for a in atoms}
            found.append(Poset(atoms + ["1"], le, "1"))
    return found


def name_corpus(P: _PosetBase, conditions: Sequence[Condition], max_rank: int = 2, cap: Optional[int] = None) -> List[PName]:
    """All names of rank <= max_rank whose conditions come from `conditions`, smallest first."""
    if max_rank > Config.MAX_NAME_RANK:
        raise ex.OutOfBudget(f"name rank {max_rank} exceeds the configured cap {Config.MAX_NAME_RANK}")
    for c in conditions:
        P.check(c)
    level = [EMPTY]
    for _ in range(max_rank):
        cells = [(y, c) for y in level for c in conditions]
        nxt = []
        for k in range(len(cells) + 1):
            for chosen in itertools.combinations(cells, k):
                nxt.append(PName(chosen))
                if cap is not None and len(nxt) >= cap:
                    break
            if cap is not None and len(nxt) >= cap:
                break
        level = nxt
    return sorted(set(level), key=lambda n: (n.rank, len(n.entries), n.key))


def formula_corpus(n_vars: int, max_depth: int, cap: Optional[int] = None) -> List[BoundedFormula]:
    """Bounded formulas over n_vars free variables up to the given depth, in a fixed order."""

    def build(n, depth):
        atoms = [Member(i=i, j=j) for i in range(n) for j in range(n)] + \
                [Equal(i=i, j=j) for i in range(n) for j in range(n) if i < j]
        if depth == 0:
            return atoms
        smaller = build(n, depth - 1)
        out = list(smaller)
        out += [Not(body=b) for b in smaller]
        out += [And(left=a, right=b) for a in smaller for b in smaller]
        out += [ForallIn(j=j, body=b) for j in range(n) for b in build(n + 1, depth - 1)]
        return list(dict.fromkeys(out))

    out = build(n_vars, max_depth)
    return stratified(out, cap) if cap is not None else out


def formula_shape(phi: BoundedFormula) -> Tuple[str, Tuple[str, ...]]:
    """The connective of phi and the connectives directly below it."""
    children = [getattr(phi, k) for k in ("left", "right", "body") if hasattr(phi, k)]
    return type(phi).__name__, tuple(type(c).__name__ for c in children)


def stratified(formulas: Sequence[BoundedFormula], cap: int) -> List[BoundedFormula]:
    """
    At most cap formulas, taken round-robin over formula shapes in corpus
    order, so a small cap still reaches every shape of the corpus.
    """
    groups: Dict[Tuple[str, Tuple[str, ...]], List[BoundedFormula]] = {}
    for phi in formulas:
        groups.setdefault(formula_shape(phi), []).append(phi)
    picked: List[BoundedFormula] = []
    for layer in itertools.zip_longest(*groups.values()):
        for phi in layer:
            if phi is None:
                continue
            if len(picked) >= cap:
                return picked
            picked.append(phi)
    return picked


# the symmetry lemma, by enumeration

def symmetry_holds(P: Poset, pi: PosetAutomorphism, p: Condition, phi: BoundedFormula, env: Sequence[PName]) -> bool:
    """p forces phi(env) iff pi p forces phi(pi env)."""
    return forces(P, p, phi, env) == forces(P, pi(p), phi, [apply_automorphism(pi, x) for x in env])


def valuation_equivariant(P: Poset, pi: PosetAutomorphism, x: PName) -> bool:
    """(pi x)^F = x^(pi^-1 F) for every maximal filter F."""
    inv = pi.inverse()
    return all(evaluate_name(apply_automorphism(pi, x), F) == evaluate_name(x, PosetFilter(P, inv(F.least)))
               for F in P.maximal_filters())


@dataclass
class SymmetryReport:
    posets: int = 0
    automorphisms: int = 0
    cases: int = 0
    formulas: int = 0
    shapes: List[Tuple[str, Tuple[str, ...]]] = field(default_factory=list)
    violations: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self):
        return {"posets": self.posets, "automorphisms": self.automorphisms, "cases": self.cases,
                "formulas": self.formulas, "violations": self.violations[:20],
                "violation_count": len(self.violations), "ok": self.ok}


def symmetry_sweep(max_conditions: int = 4, max_rank: int = 2, n_conditions: int = 2, formula_depth: int = 2,
                   env_size: int = 2, env_cap: Optional[int] = 24, formula_cap: Optional[int] = 120,
                   rng: Optional[random.Random] = None) -> SymmetryReport:
    """
    Every corpus poset, every automorphism, every condition, environments
    drawn from the names over the first n_conditions conditions, and the
    formula corpus. Environments beyond env_cap are sampled with rng; a
    formula_cap keeps every formula shape of the corpus (see `stratified`).
    """
    rng = rng or random.Random(Config.seed())
    formulas = formula_corpus(env_size, formula_depth, formula_cap)
    report = SymmetryReport()
    report.formulas = len(formulas)
    report.shapes = sorted({formula_shape(phi) for phi in formulas})
    for P in poset_corpus(max_conditions):
        report.posets += 1
        autos = automorphisms(P)
        report.automorphisms += len(autos)
        names = name_corpus(P, P.conditions[:n_conditions], max_rank)
        envs = list(itertools.product(names, repeat=env_size))
        if env_cap is not None and len(envs) > env_cap:
            envs = rng.sample(envs, env_cap)
        for pi in autos:
            for p in P.conditions:
                for env in envs:
                    for phi in formulas:
                        report.cases += 1
                        if not symmetry_holds(P, pi, p, phi, env):
                            report.violations.append({"poset": P.to_json(), "automorphism": pi.to_json(),
                                                      "condition": cond_label(p), "formula": phi.model_dump(),
                                                      "env": [x.digest for x in env]})
    log.info("symmetry sweep: %d cases over %d posets, %d violations", report.cases, report.posets,
             len(report.violations))
    return report
