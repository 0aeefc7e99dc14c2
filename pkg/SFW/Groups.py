"""
    Groups.py

    Finite permutation groups acting on posets, abelian iteration groups
    whose elements have countable support, subgroups in both forms,
    stabilizers, conjugation, homomorphisms and kernels.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from sympy.combinatorics import Permutation
from sympy.combinatorics.named_groups import AbelianGroup, CyclicGroup, DihedralGroup, SymmetricGroup

from . import Config
from . import Exception as ex
from .Forcing import (CoordinatewiseAutomorphism, PName, Poset, PosetAutomorphism, ProductPoset,
                      apply_automorphism)
from .Ordinal import CountableSetDescriptor, Ord, Tail, check_below

log = logging.getLogger(__name__)

COUNTABLE = "countable"
FULL = "full"


class ExplicitGroup:
    """
    A finite group of automorphisms of one poset. Elements are indexed;
    index 0 is the identity.
    """

    def __init__(self, poset, elements: Sequence, name: str = ""):
        if len(elements) > Config.MAX_GROUP_ORDER:
            raise ex.GroupTooLarge(f"group of order {len(elements)} exceeds {Config.MAX_GROUP_ORDER}")
        ordered = sorted(elements, key=lambda g: (not g.is_identity, _sort_key(g.key)))
        if not ordered or not ordered[0].is_identity:
            raise ex.NotAGroup("the identity is missing")
        self.poset = poset
        self.name = name
        self.elements = tuple(ordered)
        self._index = {g.key: i for i, g in enumerate(self.elements)}
        if len(self._index) != len(self.elements):
            raise ex.NotAGroup("repeated elements")
        n = len(self.elements)
        try:
            self._mul = tuple(tuple(self._index[self.elements[i].compose(self.elements[j]).key] for j in range(n))
                              for i in range(n))
            self._inv = tuple(self._index[g.inverse().key] for g in self.elements)
        except KeyError:
            raise ex.NotAGroup("elements are not closed under composition and inverse")

    @classmethod
    def generated(cls, poset, generators: Iterable, name: str = "") -> "ExplicitGroup":
        """Closure of the generators under composition."""
        ident = PosetAutomorphism.identity(poset) if isinstance(poset, Poset) else CoordinatewiseAutomorphism.identity(poset)
        gens = [g for g in generators if not g.is_identity]
        found = {ident.key: ident}
        queue = deque([ident])
        while queue:
            g = queue.popleft()
            for s in gens:
                h = s.compose(g)
                if h.key not in found:
                    found[h.key] = h
                    if len(found) > Config.MAX_GROUP_ORDER:
                        raise ex.GroupTooLarge(f"generated group exceeds order {Config.MAX_GROUP_ORDER}")
                    queue.append(h)
        return cls(poset, list(found.values()), name)

    @classmethod
    def trivial(cls, poset, name: str = "1") -> "ExplicitGroup":
        return cls.generated(poset, [], name)

    @property
    def order(self) -> int:
        return len(self.elements)

    def index(self, g) -> int:
        try:
            return self._index[g.key]
        except KeyError:
            raise ex.AmbientMismatch(f"{g} is not an element of {self}")

    def element(self, i: int):
        return self.elements[i]

    def mul(self, i: int, j: int) -> int:
        return self._mul[i][j]

    def inv(self, i: int) -> int:
        return self._inv[i]

    def conj(self, g: int, k: int) -> int:
        return self._mul[self._mul[g][k]][self._inv[g]]

    def is_abelian(self) -> bool:
        n = self.order
        return all(self._mul[i][j] == self._mul[j][i] for i in range(n) for j in range(n))

    def full(self) -> "ExplicitSubgroup":
        return ExplicitSubgroup(self, frozenset(range(self.order)))

    def trivial_subgroup(self) -> "ExplicitSubgroup":
        return ExplicitSubgroup(self, frozenset({0}))

    def generated_subgroup(self, indices: Iterable[int]) -> "ExplicitSubgroup":
        found = {0}
        frontier = list(found)
        gens = set(indices)
        while frontier:
            nxt = []
            for a in frontier:
                for b in gens:
                    c = self._mul[a][b]
                    if c not in found:
                        found.add(c)
                        nxt.append(c)
            frontier = nxt
        return ExplicitSubgroup(self, frozenset(found))

    def subgroup(self, indices: Iterable[int]) -> "ExplicitSubgroup":
        """The given index set, checked to be a subgroup."""
        s = frozenset(indices)
        if 0 not in s or any(self._mul[a][b] not in s for a in s for b in s):
            raise ex.NotAGroup(f"{sorted(s)} is not closed under the group operation")
        return ExplicitSubgroup(self, s)

    def subgroup_lattice(self) -> List["ExplicitSubgroup"]:
        """Every subgroup, found as joins of cyclic subgroups."""
        cyclic = {self.generated_subgroup([i]).indices for i in range(self.order)}
        found = set(cyclic)
        frontier = set(cyclic)
        while frontier:
            nxt = set()
            for a in frontier:
                for c in cyclic:
                    j = self.generated_subgroup(a | c).indices
                    if j not in found:
                        found.add(j)
                        nxt.add(j)
            frontier = nxt
        return sorted((ExplicitSubgroup(self, s) for s in found), key=lambda k: (k.order, sorted(k.indices)))

    def to_json(self):
        return {"name": self.name, "order": self.order, "elements": [g.to_json() for g in self.elements]}

    def __str__(self):
        return self.name or f"group of order {self.order}"

    def __repr__(self):
        return f"ExplicitGroup({self.name!r}, order={self.order})"


def _sort_key(key):
    return repr(key)


@dataclass(frozen=True)
class ExplicitSubgroup:
    group: ExplicitGroup = field(repr=False)
    indices: FrozenSet[int]

    @property
    def order(self) -> int:
        return len(self.indices)

    def __contains__(self, i: int) -> bool:
        return i in self.indices

    def __le__(self, other: "ExplicitSubgroup") -> bool:
        return self.indices <= other.indices

    def __lt__(self, other: "ExplicitSubgroup") -> bool:
        return self.indices < other.indices

    def is_full(self) -> bool:
        return self.order == self.group.order

    def is_trivial(self) -> bool:
        return self.indices == frozenset({0})

    def to_json(self):
        return {"repr": "explicit", "elements": sorted(self.indices)}

    def __str__(self):
        return "{" + ",".join(str(i) for i in sorted(self.indices)) + "}"


# named groups, acting on the atoms of an antichain poset

def _from_sympy(perms: Iterable[Permutation], degree: int, name: str) -> ExplicitGroup:
    poset = Poset.antichain([f"a{i}" for i in range(degree)])
    # conditions sort as 1, a0, a1, ...; the top stays at index 0
    autos = [PosetAutomorphism(poset, Permutation([0] + [1 + x for x in p.array_form])) for p in perms]
    return ExplicitGroup(poset, autos, name)


def _quaternion_perms() -> List[Permutation]:
    units = ["1", "i", "j", "k"]
    table = {("1", u): (1, u) for u in units}
    table.update({(u, "1"): (1, u) for u in units})
    table.update({("i", "i"): (-1, "1"), ("j", "j"): (-1, "1"), ("k", "k"): (-1, "1"),
                  ("i", "j"): (1, "k"), ("j", "k"): (1, "i"), ("k", "i"): (1, "j"),
                  ("j", "i"): (-1, "k"), ("k", "j"): (-1, "i"), ("i", "k"): (-1, "j")})
    elems = [(s, u) for s in (1, -1) for u in units]

    def times(x, y):
        s, u = table[(x[1], y[1])]
        return (x[0] * y[0] * s, u)

    return [Permutation([elems.index(times(x, y)) for y in elems]) for x in elems]


def named_group(kind: str, n: int = 0) -> ExplicitGroup:
    """cyclic n, klein, symmetric n, dihedral n (order 2n) or quaternion, as permutations of antichain atoms."""
    if kind == "cyclic":
        g = CyclicGroup(n)
        return _from_sympy(g.generate(), g.degree, f"Z/{n}")
    if kind == "klein":
        g = AbelianGroup(2, 2)
        return _from_sympy(g.generate(), g.degree, "V4")
    if kind == "symmetric":
        g = SymmetricGroup(n)
        return _from_sympy(g.generate(), g.degree, f"S{n}")
    if kind == "dihedral":
        g = DihedralGroup(n)
        return _from_sympy(g.generate(), g.degree, f"D{n}")
    if kind == "quaternion":
        return _from_sympy(_quaternion_perms(), 8, "Q8")
    raise ex.SFWInputException(f"unknown group {kind!r}")


def small_groups() -> List[ExplicitGroup]:
    """The test groups of order at most 8."""
    return [named_group("cyclic", n) for n in range(1, 9)] + \
           [named_group("klein"), named_group("symmetric", 3), named_group("dihedral", 4), named_group("quaternion")]


def direct_product(G: ExplicitGroup, H: ExplicitGroup, poset: Optional[ProductPoset] = None) -> ExplicitGroup:
    """G x H acting coordinatewise on the product of their posets."""
    if poset is None:
        poset = ProductPoset.extend(G.poset, H.poset)

    def parts(g, p):
        return list(g.components) if isinstance(g, CoordinatewiseAutomorphism) else [g]

    elements = [CoordinatewiseAutomorphism(poset, parts(g, G.poset) + parts(h, H.poset))
                for g in G.elements for h in H.elements]
    return ExplicitGroup(poset, elements, " x ".join(n for n in (G.name, H.name) if n))


# symbolic groups

@dataclass(frozen=True)
class SymbolicGroup:
    """
    Functions from stages below stage_bound into a finite abelian step
    group, with countable support.
    """
    stage_bound: Ord
    step_group: ExplicitGroup = field(compare=True)
    support_policy: str = COUNTABLE

    def __post_init__(self):
        if not self.step_group.is_abelian():
            raise ex.NotAGroup(f"step group {self.step_group} is not abelian")
        if self.support_policy not in (COUNTABLE, FULL):
            raise ex.SFWInputException(f"unknown support policy {self.support_policy!r}")

    def identity(self) -> "SymbolicElement":
        return SymbolicElement(self, (), ())

    def element(self, values: Dict[Ord, int], tails: Iterable[Tuple[Tail, int]] = ()) -> "SymbolicElement":
        """Stagewise values; each tail carries one constant step value."""
        for s in values:
            if not s < self.stage_bound:
                raise ex.StageOutOfRange(f"stage {s} is not below {self.stage_bound}")
        tails = tuple((t, v) for t, v in tails if v != 0)
        for t, _ in tails:
            check_below(CountableSetDescriptor.of((), (t,)), self.stage_bound)
        explicit = tuple(sorted((s, v) for s, v in values.items() if v != 0))
        return SymbolicElement(self, explicit, tuple(sorted(tails, key=lambda e: e[0]._key())))

    def at_stage(self, stage: Ord, value: int = 1) -> "SymbolicElement":
        return self.element({stage: value})

    def restrict_group(self, beta: Ord) -> "SymbolicGroup":
        if beta > self.stage_bound:
            raise ex.StageOutOfRange(f"{beta} exceeds {self.stage_bound}")
        return SymbolicGroup(beta, self.step_group, self.support_policy)

    def full(self) -> "SupportKernel":
        return SupportKernel(self, CountableSetDescriptor.empty())

    def trivial_subgroup(self) -> "SupportKernel":
        if not self.stage_bound.is_countable():
            raise ex.SFWStructureException(f"the trivial subgroup of stages below {self.stage_bound} has uncountable support")
        return SupportKernel(self, CountableSetDescriptor.initial_segment(self.stage_bound))

    def kernel(self, E: CountableSetDescriptor) -> "SupportKernel":
        check_below(E, self.stage_bound)
        return SupportKernel(self, E)

    def __str__(self):
        return f"{self.step_group.name}^({self.stage_bound})"


@dataclass(frozen=True)
class SymbolicElement:
    group: SymbolicGroup = field(repr=False)
    values: Tuple[Tuple[Ord, int], ...]
    tails: Tuple[Tuple[Tail, int], ...]

    def support(self) -> CountableSetDescriptor:
        return CountableSetDescriptor.of([s for s, _ in self.values], [t for t, _ in self.tails])

    @property
    def is_identity(self) -> bool:
        return not self.values and not self.tails

    @property
    def key(self):
        return (self.values, tuple((t._key(), v) for t, v in self.tails))

    def at(self, stage: Ord) -> int:
        """Step-group index at a stage."""
        step = self.group.step_group
        out = dict(self.values).get(stage, 0)
        for t, v in self.tails:
            if t.contains(stage):
                out = step.mul(out, v)
        return out

    def compose(self, other: "SymbolicElement") -> "SymbolicElement":
        if self.group != other.group:
            raise ex.AmbientMismatch("elements of different groups")
        step = self.group.step_group
        vals = dict(self.values)
        for s, v in other.values:
            vals[s] = step.mul(vals.get(s, 0), v)
        tails = dict((t, v) for t, v in self.tails)
        for t, v in other.tails:
            if t in tails:
                tails[t] = step.mul(tails[t], v)
                continue
            for u in tails:
                if not CountableSetDescriptor.of((), (u,)).is_disjoint(CountableSetDescriptor.of((), (t,))):
                    raise ex.SFWStructureException(f"tails {u} and {t} overlap; the product has no tail form")
            tails[t] = v
        return self.group.element(vals, tails.items())

    def inverse(self) -> "SymbolicElement":
        step = self.group.step_group
        return self.group.element({s: step.inv(v) for s, v in self.values},
                                  [(t, step.inv(v)) for t, v in self.tails])

    def restrict(self, beta: Ord) -> "SymbolicElement":
        """The restriction to stages below beta, an element of the stage-beta group."""
        target = self.group.restrict_group(beta)
        vals = {s: v for s, v in self.values if s < beta}
        tails = []
        for t, v in self.tails:
            if t.bound <= beta:
                tails.append((t, v))
                continue
            part = CountableSetDescriptor.of((), (t,)).restrict_below(beta)
            for p in part.explicit_points:
                vals[p] = target.step_group.mul(vals.get(p, 0), v)
            tails.extend((u, v) for u in part.symbolic_tails)
        return target.element(vals, tails)

    def to_coordinatewise(self, poset: ProductPoset) -> CoordinatewiseAutomorphism:
        """The action on a materialized truncation."""
        if poset.stages is None:
            raise ex.NotAnIterationObject("truncation has no stage coordinates")
        step = self.group.step_group
        comps = []
        for s, f in zip(poset.stages, poset.factors):
            g = step.element(self.at(s))
            if not g.is_identity and g.poset is not f:
                raise ex.StageMismatch(f"step group does not act on the factor at stage {s}")
            comps.append(g)
        return CoordinatewiseAutomorphism(poset, comps)

    def to_json(self):
        return {"values": {str(s): v for s, v in self.values},
                "tails": [{"tail": t.to_json(), "value": v} for t, v in self.tails],
                "support": self.support().to_json()}

    def __str__(self):
        return f"g[{self.support()}]"


@dataclass(frozen=True)
class SupportKernel:
    """K_E: the elements acting trivially at every stage of E."""
    group: SymbolicGroup = field(repr=False)
    support: CountableSetDescriptor

    def contains(self, g: SymbolicElement) -> bool:
        if g.group != self.group:
            raise ex.AmbientMismatch("element of another group")
        return g.support().is_disjoint(self.support)

    def __contains__(self, g: SymbolicElement) -> bool:
        return self.contains(g)

    def __le__(self, other: "SupportKernel") -> bool:
        return other.support.is_subset(self.support)

    def is_full(self) -> bool:
        return self.support.is_empty()

    def to_json(self):
        return {"repr": "support_kernel", "support": self.support.to_json()}

    def __str__(self):
        return f"K[{self.support}]"


Subgroup = Union[ExplicitSubgroup, SupportKernel]


# homomorphisms

class ExplicitHom:
    """A homomorphism between explicit groups given by its table of element indices."""

    def __init__(self, domain: ExplicitGroup, codomain: ExplicitGroup, table: Sequence[int], inclusion: bool = False):
        self.domain = domain
        self.codomain = codomain
        self.table = tuple(table)
        self.inclusion = inclusion
        if len(self.table) != domain.order:
            raise ex.NotAGroup("homomorphism table has the wrong length")
        for i in range(domain.order):
            for j in range(domain.order):
                if self.table[domain.mul(i, j)] != codomain.mul(self.table[i], self.table[j]):
                    raise ex.NotAGroup(f"homomorphism law fails at ({i}, {j})")
        if inclusion and len(set(self.table)) != len(self.table):
            raise ex.NotAnInclusion("an inclusion must be injective")

    @classmethod
    def from_function(cls, domain: ExplicitGroup, codomain: ExplicitGroup, fn: Callable) -> "ExplicitHom":
        return cls(domain, codomain, [fn(g) for g in domain.elements])

    @classmethod
    def identity(cls, G: ExplicitGroup) -> "ExplicitHom":
        return cls(G, G, range(G.order), inclusion=True)

    def __call__(self, i: int) -> int:
        return self.table[i]

    def image(self, K: ExplicitSubgroup) -> ExplicitSubgroup:
        return ExplicitSubgroup(self.codomain, frozenset(self.table[i] for i in K.indices))


class Restriction:
    """rho_{beta, lambda}: truncation of symbolic elements to the stages below beta."""

    inclusion = False

    def __init__(self, domain: SymbolicGroup, beta: Ord):
        self.domain = domain
        self.beta = beta
        self.codomain = domain.restrict_group(beta)

    def __call__(self, g: SymbolicElement) -> SymbolicElement:
        return g.restrict(self.beta)

    def then(self, gamma: Ord) -> "Restriction":
        """rho_{gamma, beta} after this map."""
        if gamma > self.beta:
            raise ex.StageOutOfRange(f"{gamma} exceeds {self.beta}")
        return Restriction(self.domain, gamma)


def inclusion_of(K: ExplicitSubgroup) -> ExplicitHom:
    """The inclusion of a subgroup, as a group in its own right."""
    G = K.group
    sub = ExplicitGroup(G.poset, [G.element(i) for i in sorted(K.indices)], f"{G.name}|{len(K.indices)}")
    return ExplicitHom(sub, G, [G.index(g) for g in sub.elements], inclusion=True)


def projection_hom(G: ExplicitGroup, head: ExplicitGroup) -> ExplicitHom:
    """Drop the last coordinate of a coordinatewise product group."""
    table = []
    for g in G.elements:
        comps = g.components[:-1]
        h = next((i for i, e in enumerate(head.elements) if _components(e) == comps), None)
        if h is None:
            raise ex.CodomainMismatch("head group does not contain the truncated element")
        table.append(h)
    return ExplicitHom(G, head, table)


def _components(g) -> tuple:
    if isinstance(g, CoordinatewiseAutomorphism):
        return g.components
    return (None if g.is_identity else g,)


# operations

def stabilizer(G: ExplicitGroup, x: PName) -> ExplicitSubgroup:
    """sym(x) = {g : g x = x}, by enumeration."""
    for c in x.conditions():
        G.poset.check(c)
    return ExplicitSubgroup(G, frozenset(i for i, g in enumerate(G.elements) if apply_automorphism(g, x) == x))


def _same_ambient(K1, K2) -> None:
    if type(K1) is not type(K2):
        raise ex.MixedRepresentation("explicit and symbolic subgroups do not intersect")
    if K1.group is not K2.group and K1.group != K2.group:
        raise ex.AmbientMismatch("subgroups of different groups")


def subgroup_intersect(K1: Subgroup, K2: Subgroup) -> Subgroup:
    _same_ambient(K1, K2)
    if isinstance(K1, ExplicitSubgroup):
        return ExplicitSubgroup(K1.group, K1.indices & K2.indices)
    return SupportKernel(K1.group, K1.support.union(K2.support))


def conjugate_subgroup(g, K: Subgroup) -> Subgroup:
    """g K g^-1; the identity on subgroups of abelian symbolic groups."""
    if isinstance(K, SupportKernel):
        return K
    G = K.group
    i = g if isinstance(g, int) else G.index(g)
    return ExplicitSubgroup(G, frozenset(G.conj(i, k) for k in K.indices))


def is_normal_subgroup(K: ExplicitSubgroup) -> bool:
    return all(conjugate_subgroup(g, K) == K for g in range(K.group.order))


def preimage_subgroup(h, H: Subgroup) -> Subgroup:
    if isinstance(h, Restriction):
        if not isinstance(H, SupportKernel) or H.group != h.codomain:
            raise ex.CodomainMismatch("subgroup is not in the codomain of the restriction")
        return SupportKernel(h.domain, H.support)
    if not isinstance(H, ExplicitSubgroup) or H.group is not h.codomain:
        raise ex.CodomainMismatch("subgroup is not in the codomain")
    return ExplicitSubgroup(h.domain, frozenset(i for i in range(h.domain.order) if h.table[i] in H.indices))


def kernel_of(h) -> Subgroup:
    return preimage_subgroup(h, h.codomain.trivial_subgroup())
