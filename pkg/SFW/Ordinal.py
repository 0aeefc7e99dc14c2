"""
    Ordinal.py

    Symbolic ordinals in Cantor normal form over a table of declared
    cardinal atoms, countable sets of stages, and the stage-bounding
    decision procedure.

    Atoms other than `w` stand for uncountable cardinals and are fixed
    points of x -> w^x, so `w1` is stored as a single term whose
    exponent is the atom itself. `w` is w^1.
"""
from __future__ import annotations

import functools
import itertools
import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Tuple, Union

from . import Exception as ex

log = logging.getLogger(__name__)

OMEGA = "omega"
GE_OMEGA1 = "ge_omega1"

ZERO = "zero"
SUCCESSOR = "successor"
COF_OMEGA = "cof_omega"
COF_GE_OMEGA1 = "cof_ge_omega1"

LESS = "less"
EQUAL = "equal"
GREATER = "greater"


@dataclass(frozen=True)
class CardinalAtom:
    name: str
    cofinality_class: str
    declared_order: int


@dataclass(frozen=True)
class AtomTable:
    """Declared atoms in increasing order. `w` is always position 0."""
    atoms: Tuple[CardinalAtom, ...]

    def __post_init__(self):
        names = [a.name for a in self.atoms]
        if len(set(names)) != len(names):
            raise ex.SFWInputException(f"duplicate atom names in {names}")
        if not self.atoms or self.atoms[0].name != "w" or self.atoms[0].cofinality_class != OMEGA:
            raise ex.SFWInputException("atom table must start with w of cofinality omega")
        for a in self.atoms:
            if a.cofinality_class not in (OMEGA, GE_OMEGA1):
                raise ex.SFWInputException(f"unknown cofinality class {a.cofinality_class!r}")

    @classmethod
    def declare(cls, declarations: Iterable[Tuple[str, str]] = ()) -> "AtomTable":
        """Build a table from (name, cofinality_class) pairs listed in increasing order."""
        atoms = [CardinalAtom("w", OMEGA, 0)]
        for name, cof in declarations:
            if name == "w":
                continue
            atoms.append(CardinalAtom(name, cof, len(atoms)))
        return cls(tuple(atoms))

    def get(self, name: str) -> CardinalAtom:
        for a in self.atoms:
            if a.name == name:
                return a
        raise ex.SFWInputException(f"undeclared atom {name!r}")

    def to_json(self):
        return [{"name": a.name, "cofinality": a.cofinality_class} for a in self.atoms]

    @classmethod
    def from_json(cls, data) -> "AtomTable":
        return cls.declare((d["name"], d["cofinality"]) for d in data)


DEFAULT_ATOMS = AtomTable.declare([("w1", GE_OMEGA1), ("aleph_w", OMEGA)])

Exponent = Union["Ord", CardinalAtom]


def _sign(n: int) -> int:
    return (n > 0) - (n < 0)


def _exp_cmp(x: Exponent, y: Exponent) -> int:
    # compares w^x with w^y; an atom a is its own power w^a
    if isinstance(x, CardinalAtom) and isinstance(y, CardinalAtom):
        return _sign(x.declared_order - y.declared_order)
    if isinstance(x, CardinalAtom):
        return -_exp_cmp(y, x)
    if isinstance(y, CardinalAtom):
        return x._cmp(Ord._of_atom(y, x.table))
    return x._cmp(y)


def _exp_as_ord(x: Exponent, table: AtomTable) -> "Ord":
    return Ord._of_atom(x, table) if isinstance(x, CardinalAtom) else x


def _normalize_exp(e: "Ord") -> Exponent:
    if e.finite_part == 0 and len(e.terms) == 1 and e.terms[0][1] == 1 and isinstance(e.terms[0][0], CardinalAtom):
        return e.terms[0][0]
    return e


@functools.total_ordering
@dataclass(frozen=True, eq=False)
class Ord:
    """
    An ordinal w^e1*c1 + ... + w^ek*ck + n with e1 > ... > ek > 0.
    Exponents are ordinals or uncountable atoms.
    """
    terms: Tuple[Tuple[Exponent, int], ...] = ()
    finite_part: int = 0
    table: AtomTable = field(default=DEFAULT_ATOMS, repr=False)

    def __post_init__(self):
        if self.finite_part < 0:
            raise ex.SFWInputException("negative finite part")
        for i, (e, c) in enumerate(self.terms):
            if c <= 0:
                raise ex.SFWInputException("coefficients must be positive")
            if isinstance(e, Ord) and e.is_zero:
                raise ex.SFWInputException("exponent 0 belongs in the finite part")
            if i and _exp_cmp(self.terms[i - 1][0], e) <= 0:
                raise ex.SFWInputException("terms must strictly decrease")

    # constructors

    @classmethod
    def finite(cls, n: int, table: AtomTable = DEFAULT_ATOMS) -> "Ord":
        return cls((), n, table)

    @classmethod
    def zero(cls, table: AtomTable = DEFAULT_ATOMS) -> "Ord":
        return cls((), 0, table)

    @classmethod
    def omega(cls, table: AtomTable = DEFAULT_ATOMS) -> "Ord":
        return cls(((cls.finite(1, table), 1),), 0, table)

    @classmethod
    def _of_atom(cls, atom: CardinalAtom, table: AtomTable) -> "Ord":
        return cls(((atom, 1),), 0, table)

    @classmethod
    def atom(cls, name: str, table: AtomTable = DEFAULT_ATOMS) -> "Ord":
        if name == "w":
            return cls.omega(table)
        return cls._of_atom(table.get(name), table)

    @classmethod
    def omega_power(cls, e: "Ord") -> "Ord":
        if e.is_zero:
            return cls.finite(1, e.table)
        return cls(((_normalize_exp(e), 1),), 0, e.table)

    def _coerce(self, other) -> "Ord":
        if isinstance(other, int):
            return Ord.finite(other, self.table)
        if not isinstance(other, Ord):
            raise TypeError(f"cannot combine Ord with {type(other).__name__}")
        if other.table is not self.table and other.table != self.table:
            raise ex.MismatchedAtomTable(f"{self} and {other} use different atom tables")
        return other

    # order

    def _cmp(self, other: "Ord") -> int:
        other = self._coerce(other)
        for (x, c), (y, d) in zip(self.terms, other.terms):
            s = _exp_cmp(x, y)
            if s:
                return s
            if c != d:
                return _sign(c - d)
        if len(self.terms) != len(other.terms):
            return 1 if len(self.terms) > len(other.terms) else -1
        return _sign(self.finite_part - other.finite_part)

    def __eq__(self, other):
        if isinstance(other, int):
            return not self.terms and self.finite_part == other
        if not isinstance(other, Ord):
            return NotImplemented
        return self._cmp(other) == 0

    def __lt__(self, other):
        if not isinstance(other, (Ord, int)):
            return NotImplemented
        return self._cmp(other) < 0

    def __hash__(self):
        return hash((self.terms, self.finite_part))

    # classification

    @property
    def is_zero(self) -> bool:
        return not self.terms and self.finite_part == 0

    @property
    def is_finite(self) -> bool:
        return not self.terms

    @property
    def is_successor(self) -> bool:
        return self.finite_part > 0

    @property
    def is_limit(self) -> bool:
        return bool(self.terms) and self.finite_part == 0

    def cofinality_class(self) -> str:
        if self.is_zero:
            return ZERO
        if self.is_successor:
            return SUCCESSOR
        least, _ = self.terms[-1]
        if isinstance(least, CardinalAtom):
            return COF_GE_OMEGA1 if least.cofinality_class == GE_OMEGA1 else COF_OMEGA
        if least.is_successor:
            return COF_OMEGA
        return least.cofinality_class()

    def is_countable(self) -> bool:
        """True when no uncountable atom occurs anywhere in the normal form."""
        for e, _ in self.terms:
            if isinstance(e, CardinalAtom) or not e.is_countable():
                return False
        return True

    # arithmetic

    def __add__(self, other) -> "Ord":
        other = self._coerce(other)
        if not other.terms:
            return Ord(self.terms, self.finite_part + other.finite_part, self.table)
        lead, coef = other.terms[0]
        kept = []
        for e, c in self.terms:
            s = _exp_cmp(e, lead)
            if s > 0:
                kept.append((e, c))
            elif s == 0:
                coef += c
                break
            else:
                break
        kept.append((lead, coef))
        kept.extend(other.terms[1:])
        return Ord(tuple(kept), other.finite_part, self.table)

    def mul_natural(self, n: int) -> "Ord":
        if n < 0:
            raise ex.SFWInputException("negative multiplier")
        if n == 0 or self.is_zero:
            return Ord.zero(self.table)
        if not self.terms:
            return Ord.finite(self.finite_part * n, self.table)
        (lead, c), rest = self.terms[0], self.terms[1:]
        return Ord(((lead, c * n),) + rest, self.finite_part, self.table)

    def __mul__(self, other) -> "Ord":
        other = self._coerce(other)
        if self.is_zero or other.is_zero:
            return Ord.zero(self.table)
        if not self.terms:
            return Ord(other.terms, self.finite_part * other.finite_part, self.table)
        lead = _exp_as_ord(self.terms[0][0], self.table)
        out = Ord.zero(self.table)
        for e, d in other.terms:
            exp = _normalize_exp(lead + _exp_as_ord(e, self.table))
            out = out + Ord(((exp, d),), 0, self.table)
        if other.finite_part:
            out = out + self.mul_natural(other.finite_part)
        return out

    def successor(self) -> "Ord":
        return Ord(self.terms, self.finite_part + 1, self.table)

    def predecessor(self) -> "Ord":
        if not self.is_successor:
            raise ex.SFWInputException(f"{self} has no predecessor")
        return Ord(self.terms, self.finite_part - 1, self.table)

    def minus_left(self, start: "Ord") -> "Ord":
        """The t with start + t == self, for start <= self."""
        start = self._coerce(start)
        if start > self:
            raise ex.SFWInputException(f"{start} exceeds {self}")
        for i, ((x, c), (y, d)) in enumerate(zip(start.terms, self.terms)):
            if _exp_cmp(x, y) != 0:
                return Ord(self.terms[i:], self.finite_part, self.table)
            if c != d:
                return Ord(((y, d - c),) + self.terms[i + 1:], self.finite_part, self.table)
        n = len(start.terms)
        if len(self.terms) > n:
            return Ord(self.terms[n:], self.finite_part, self.table)
        return Ord.finite(self.finite_part - start.finite_part, self.table)

    def fundamental(self, n: int) -> "Ord":
        """n-th member of the canonical increasing sequence cofinal in a cof_omega limit."""
        if self.cofinality_class() != COF_OMEGA:
            raise ex.WrongCofinality(f"{self} has no countable fundamental sequence")
        least, c = self.terms[-1]
        prefix = Ord(self.terms[:-1] + (((least, c - 1),) if c > 1 else ()), 0, self.table)
        if isinstance(least, CardinalAtom):
            raise ex.SFWInputException(f"no fundamental sequence declared for atom {least.name}")
        if least.is_successor:
            return prefix + Ord.omega_power(least.predecessor()).mul_natural(n)
        return prefix + Ord.omega_power(least.fundamental(n))

    # text

    def __str__(self) -> str:
        parts = []
        for e, c in self.terms:
            if isinstance(e, CardinalAtom):
                parts.append(f"{e.name}*{c}")
            elif e == 1:
                parts.append(f"w*{c}")
            elif e.is_finite:
                parts.append(f"w^{e.finite_part}*{c}")
            else:
                parts.append(f"w^({e})*{c}")
        if self.finite_part or not parts:
            parts.append(str(self.finite_part))
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"Ord({self})"


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\S))")


class _Parser:
    def __init__(self, text: str, table: AtomTable):
        self.table = table
        self.tokens = []
        pos = 0
        text = text.strip()
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m:
                break
            num, ident, sym = m.groups()
            self.tokens.append(("num", int(num)) if num else ("id", ident) if ident else ("sym", sym))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value is not None and tok[1] != value):
            raise ex.SFWInputException(f"unexpected token {tok[1]!r} in ordinal")
        self.i += 1
        return tok

    def sum(self) -> Ord:
        out = self.term()
        while self.peek() == ("sym", "+"):
            self.take()
            out = out + self.term()
        return out

    def term(self) -> Ord:
        kind, value = self.peek()
        if kind == "num":
            self.take()
            return Ord.finite(value, self.table)
        name = self.take("id")[1]
        if self.peek() == ("sym", "^"):
            if name != "w":
                raise ex.SFWInputException("only w takes an exponent")
            self.take()
            if self.peek()[0] == "num":
                base = Ord.omega_power(Ord.finite(self.take()[1], self.table))
            else:
                self.take("sym", "(")
                base = Ord.omega_power(self.sum())
                self.take("sym", ")")
        else:
            base = Ord.atom(name, self.table)
        if self.peek() == ("sym", "*"):
            self.take()
            base = base.mul_natural(self.take("num")[1])
        return base


def parse_ord(text: str, table: AtomTable = DEFAULT_ATOMS) -> Ord:
    """Parse the canonical text form; `*1` may be omitted."""
    if isinstance(text, int):
        return Ord.finite(text, table)
    p = _Parser(str(text), table)
    out = p.sum()
    if p.peek()[0] is not None:
        raise ex.SFWInputException(f"trailing input in ordinal {text!r}")
    return out


def ord_compare(a: Ord, b: Ord) -> str:
    s = a._cmp(b)
    return LESS if s < 0 else GREATER if s > 0 else EQUAL


def cofinality_class(a: Ord) -> str:
    return a.cofinality_class()


# countable sets of stages

ALL_NATURALS = "all_naturals_below_omega_copy"
ENUMERATED = "enumerated_sequence"
INTERVAL = "interval"

_END = object()


def cantor_unpair(n: int) -> Tuple[int, int]:
    w = int(((8 * n + 1) ** 0.5 - 1) // 2)
    while w * (w + 1) // 2 > n:
        w -= 1
    while (w + 1) * (w + 2) // 2 <= n:
        w += 1
    j = n - w * (w + 1) // 2
    return w - j, j


def dovetail(streams: Iterable[Iterable]) -> Iterator:
    """Fair merge of a possibly infinite sequence of possibly infinite streams."""
    outer = iter(streams)
    active = []
    outer_done = False
    while active or not outer_done:
        if not outer_done:
            nxt = next(outer, _END)
            if nxt is _END:
                outer_done = True
            else:
                active.append(iter(nxt))
        alive = []
        for it in active:
            item = next(it, _END)
            if item is not _END:
                yield item
                alive.append(it)
        active = alive


def _interval_points(start: Ord, bound: Ord) -> Iterator[Ord]:
    if start >= bound:
        return
    if bound.is_successor:
        yield bound.predecessor()
        yield from _interval_points(start, bound.predecessor())
        return
    if start + Ord.omega(start.table) == bound:
        yield from (start + n for n in itertools.count())
        return

    def pieces():
        lo = start
        for n in itertools.count():
            b = bound.fundamental(n)
            if b <= lo:
                continue
            yield _interval_points(lo, b)
            lo = b

    yield from dovetail(pieces())


@dataclass(frozen=True)
class Tail:
    """
    An infinite countable block of stages: an interval [start, bound), or
    the canonical fundamental sequence of `bound`.
    """
    shape: str
    bound: Ord
    start: Optional[Ord] = None

    @classmethod
    def interval(cls, start: Ord, bound: Ord) -> "Tail":
        if start >= bound:
            raise ex.SFWInputException(f"empty interval [{start}, {bound})")
        length = bound.minus_left(start)
        if length.is_finite:
            raise ex.SFWInputException(f"interval [{start}, {bound}) is finite")
        if not length.is_countable():
            raise ex.SFWInputException(f"interval [{start}, {bound}) is uncountable")
        shape = ALL_NATURALS if start + Ord.omega(start.table) == bound else INTERVAL
        return cls(shape, bound, start)

    @classmethod
    def naturals_copy(cls, bound: Ord) -> "Tail":
        """The block {d + n : n < w} where bound = d + w."""
        if not bound.terms or bound.finite_part or bound.terms[-1][0] != 1:
            raise ex.SFWInputException(f"{bound} is not of the form d + w")
        least, c = bound.terms[-1]
        start = Ord(bound.terms[:-1] + (((least, c - 1),) if c > 1 else ()), 0, bound.table)
        return cls(ALL_NATURALS, bound, start)

    @classmethod
    def sequence(cls, bound: Ord) -> "Tail":
        if bound.cofinality_class() != COF_OMEGA:
            raise ex.SFWInputException(f"{bound} is not a limit of countable cofinality")
        if bound.terms[-1][0] == 1:
            return cls.naturals_copy(bound)
        return cls(ENUMERATED, bound, None)

    @property
    def is_interval(self) -> bool:
        return self.shape != ENUMERATED

    def first(self) -> Ord:
        return self.start if self.is_interval else self.bound.fundamental(0)

    def supremum(self) -> Ord:
        if self.is_interval and self.bound.is_successor:
            return self.bound.predecessor()
        return self.bound

    def attained(self) -> bool:
        return self.is_interval and self.bound.is_successor

    def contains(self, x: Ord) -> bool:
        if self.is_interval:
            return self.start <= x < self.bound
        if not x < self.bound:
            return False
        least, c = self.bound.terms[-1]
        if isinstance(least, CardinalAtom):
            # the sequence of an atom has no point expressible over the table
            return False
        prefix = Ord(self.bound.terms[:-1] + (((least, c - 1),) if c > 1 else ()), 0, self.bound.table)
        if x == prefix and least.is_successor:
            return True
        if x.finite_part or not x.terms or x <= prefix:
            return False
        d, m = x.terms[-1]
        if prefix + Ord(((d, m),), 0, x.table) != x:
            return False
        if least.is_successor:
            step = _normalize_exp(least.predecessor())
            return isinstance(d, Ord) and isinstance(step, Ord) and d == step
        if m != 1 or isinstance(d, CardinalAtom):
            return False
        return Tail.sequence(least).contains(d)

    def points(self) -> Iterator[Ord]:
        """Canonical enumeration; increasing whenever the block has order type w."""
        if self.is_interval:
            return _interval_points(self.start, self.bound)
        return (self.bound.fundamental(n) for n in itertools.count())

    def points_below(self, beta: Ord) -> Iterator[Ord]:
        """Points < beta of a block cofinal in a bound > beta; finitely many when ordered by type w."""
        for p in self.points():
            if p >= beta:
                return
            yield p

    def to_json(self):
        out = {"shape": self.shape, "bound": str(self.bound)}
        if self.shape == INTERVAL:
            out["start"] = str(self.start)
        return out

    def __str__(self) -> str:
        if self.is_interval:
            return f"[{self.start}, {self.bound})"
        return f"seq({self.bound})"

    def _key(self):
        return (self.bound, self.shape, self.start if self.start is not None else self.bound)


def _sort_ords(points: Iterable[Ord]) -> Tuple[Ord, ...]:
    return tuple(sorted(set(points)))


@dataclass(frozen=True)
class CountableSetDescriptor:
    """
    A countable set of stages: finitely many explicit points plus
    finitely many infinite tails. Kept in normal form so that equal sets
    of the shapes produced here have equal representations.
    """
    explicit_points: Tuple[Ord, ...] = ()
    symbolic_tails: Tuple[Tail, ...] = ()

    @classmethod
    def of(cls, points: Iterable = (), tails: Iterable[Tail] = (), table: AtomTable = DEFAULT_ATOMS):
        pts = {Ord.finite(p, table) if isinstance(p, int) else p for p in points}
        intervals = [t for t in tails if t.is_interval]
        sequences = [t for t in tails if not t.is_interval]

        changed = True
        while changed:
            changed = False
            intervals.sort(key=lambda t: (t.start, t.bound))
            merged = []
            for t in intervals:
                if merged and t.start <= merged[-1].bound:
                    last = merged.pop()
                    t = Tail.interval(last.start, max(last.bound, t.bound))
                    changed = True
                merged.append(t)
            intervals = merged
            for p in sorted(pts):
                for i, t in enumerate(intervals):
                    if t.start <= p < t.bound:
                        pts.discard(p)
                        changed = True
                    elif p == t.bound:
                        intervals[i] = Tail.interval(t.start, p.successor())
                        pts.discard(p)
                        changed = True
                    elif p.successor() == t.start:
                        intervals[i] = Tail.interval(p, t.bound)
                        pts.discard(p)
                        changed = True
                    else:
                        continue
                    break

        seqs = {}
        for s in sequences:
            if any(s.bound <= t.bound and t.start <= s.first() for t in intervals):
                continue
            seqs[s.bound] = s
        pts = {p for p in pts if not any(s.contains(p) for s in seqs.values())}
        tails_out = sorted(list(intervals) + list(seqs.values()), key=Tail._key)
        return cls(_sort_ords(pts), tuple(tails_out))

    @classmethod
    def empty(cls) -> "CountableSetDescriptor":
        return cls()

    @classmethod
    def points(cls, *pts, table: AtomTable = DEFAULT_ATOMS) -> "CountableSetDescriptor":
        return cls.of(pts, (), table)

    @classmethod
    def initial_segment(cls, beta: Ord) -> "CountableSetDescriptor":
        """The stages [0, beta)."""
        if beta.is_finite:
            return cls.of(range(beta.finite_part), (), beta.table)
        return cls.of((), (Tail.interval(Ord.zero(beta.table), beta),))

    @classmethod
    def naturals(cls, table: AtomTable = DEFAULT_ATOMS) -> "CountableSetDescriptor":
        return cls.of((), (Tail.naturals_copy(Ord.omega(table)),))

    # queries

    def is_empty(self) -> bool:
        return not self.explicit_points and not self.symbolic_tails

    def is_finite(self) -> bool:
        return not self.symbolic_tails

    def contains(self, x: Ord) -> bool:
        return x in self.explicit_points or any(t.contains(x) for t in self.symbolic_tails)

    def supremum(self) -> Ord:
        """Supremum of the described set; 0 for the empty set."""
        cands = list(self.explicit_points) + [t.supremum() for t in self.symbolic_tails]
        return max(cands) if cands else Ord.zero()

    def attained(self) -> bool:
        if self.is_empty():
            return False
        return self.contains(self.supremum())

    def strict_bound(self) -> Ord:
        """Least beta with the set contained in [0, beta)."""
        if self.is_empty():
            return Ord.zero()
        sup = self.supremum()
        return sup.successor() if self.attained() else sup

    def union(self, *others: "CountableSetDescriptor") -> "CountableSetDescriptor":
        pts = list(self.explicit_points)
        tails = list(self.symbolic_tails)
        for o in others:
            pts.extend(o.explicit_points)
            tails.extend(o.symbolic_tails)
        return CountableSetDescriptor.of(pts, tails)

    @classmethod
    def union_of_family(cls, prefix: Iterable["CountableSetDescriptor"], tail: Optional[Tail] = None):
        """
        Union of the w-family E_0, ..., E_{k-1} followed by the singletons
        of `tail`'s enumeration. Countable, with supremum the supremum of
        the member suprema.
        """
        out = cls.empty().union(*prefix)
        if tail is not None:
            out = out.union(cls.of((), (tail,)))
        return out

    def restrict_below(self, beta: Ord) -> "CountableSetDescriptor":
        """Intersection with [0, beta)."""
        pts = [p for p in self.explicit_points if p < beta]
        tails = []
        for t in self.symbolic_tails:
            if t.bound <= beta:
                tails.append(t)
            elif t.is_interval:
                if t.start < beta:
                    length = beta.minus_left(t.start)
                    if length.is_finite:
                        pts.extend(t.start + k for k in range(length.finite_part))
                    else:
                        tails.append(Tail.interval(t.start, beta))
            else:
                pts.extend(t.points_below(beta))
        return CountableSetDescriptor.of(pts, tails)

    def difference(self, other: "CountableSetDescriptor") -> "CountableSetDescriptor":
        """
        self minus other. Exact on points and intervals; an enumerated tail
        of self only partly covered by other is kept whole.
        """
        pts = [p for p in self.explicit_points if not other.contains(p)]
        intervals = [t for t in self.symbolic_tails if t.is_interval]
        sequences = [t for t in self.symbolic_tails if not t.is_interval]

        for o in other.symbolic_tails:
            if not o.is_interval:
                continue
            nxt = []
            for t in intervals:
                for lo, hi in ((t.start, min(t.bound, o.start)), (max(t.start, o.bound), t.bound)):
                    if lo < hi:
                        length = hi.minus_left(lo)
                        if length.is_finite:
                            pts.extend(lo + k for k in range(length.finite_part))
                        else:
                            nxt.append(Tail.interval(lo, hi))
            intervals = nxt
        for p in other.explicit_points:
            nxt = []
            for t in intervals:
                if not t.contains(p):
                    nxt.append(t)
                    continue
                for lo, hi in ((t.start, p), (p.successor(), t.bound)):
                    if lo < hi:
                        length = hi.minus_left(lo)
                        if length.is_finite:
                            pts.extend(lo + k for k in range(length.finite_part))
                        else:
                            nxt.append(Tail.interval(lo, hi))
            intervals = nxt

        kept_seqs = []
        for s in sequences:
            if any(o == s for o in other.symbolic_tails):
                continue
            cover = next((o for o in other.symbolic_tails
                          if o.is_interval and o.start < s.bound <= o.bound), None)
            if cover is not None:
                pts.extend(p for p in s.points_below(cover.start) if not other.contains(p))
                continue
            kept_seqs.append(s)
        pts = [p for p in pts if not other.contains(p)]
        return CountableSetDescriptor.of(pts, intervals + kept_seqs)

    def is_subset(self, other: "CountableSetDescriptor") -> bool:
        return self.difference(other).is_empty()

    def is_disjoint(self, other: "CountableSetDescriptor") -> bool:
        if any(other.contains(p) for p in self.explicit_points):
            return False
        if any(self.contains(p) for p in other.explicit_points):
            return False
        for s in self.symbolic_tails:
            for t in other.symbolic_tails:
                if not _tails_disjoint(s, t):
                    return False
        return True

    def enumerate(self) -> Iterator[Ord]:
        """
        Canonical enumeration: the explicit part in increasing order and
        every tail's own enumeration, merged along the Cantor pairing.
        Every described point appears exactly once.
        """
        streams = [iter(self.explicit_points)] + [t.points() for t in self.symbolic_tails]
        seen = set()
        for n in itertools.count():
            if not streams:
                return
            i, _ = cantor_unpair(n)
            if i >= len(streams):
                if all(s is None for s in streams):
                    return
                continue
            s = streams[i]
            if s is None:
                if all(x is None for x in streams):
                    return
                continue
            item = next(s, _END)
            if item is _END:
                streams[i] = None
                continue
            if item not in seen:
                seen.add(item)
                yield item

    def to_json(self):
        return {"points": [str(p) for p in self.explicit_points],
                "tails": [t.to_json() for t in self.symbolic_tails]}

    @classmethod
    def from_json(cls, data, table: AtomTable = DEFAULT_ATOMS) -> "CountableSetDescriptor":
        tails = []
        for t in data.get("tails", []):
            bound = parse_ord(t["bound"], table)
            if t["shape"] == ALL_NATURALS:
                tails.append(Tail.naturals_copy(bound))
            elif t["shape"] == ENUMERATED:
                tails.append(Tail.sequence(bound))
            elif t["shape"] == INTERVAL:
                tails.append(Tail.interval(parse_ord(t["start"], table), bound))
            else:
                raise ex.SFWInputException(f"unknown tail shape {t['shape']!r}")
        return cls.of([parse_ord(p, table) for p in data.get("points", [])], tails, table)

    def __str__(self) -> str:
        parts = []
        if self.explicit_points:
            parts.append("{" + ", ".join(str(p) for p in self.explicit_points) + "}")
        parts.extend(str(t) for t in self.symbolic_tails)
        return " u ".join(parts) if parts else "{}"


def _tails_disjoint(s: Tail, t: Tail) -> bool:
    if s.is_interval and t.is_interval:
        return not (s.start < t.bound and t.start < s.bound)
    if s.is_interval:
        s, t = t, s
    if t.is_interval:
        if t.bound <= s.first() or s.bound <= t.start:
            return True
        if t.bound >= s.bound:
            return False
        return not any(p >= t.start for p in s.points_below(t.bound))
    if s.bound == t.bound:
        return False
    lo, hi = (s, t) if s.bound < t.bound else (t, s)
    return not any(lo.contains(p) for p in hi.points_below(lo.bound))


# stage bounding

@dataclass(frozen=True)
class Bounded:
    beta: Ord


@dataclass(frozen=True)
class CofinalFailure:
    sup: Ord


StageBoundResult = Union[Bounded, CofinalFailure]


def check_below(s: CountableSetDescriptor, lam: Ord) -> None:
    for p in s.explicit_points:
        if not p < lam:
            raise ex.PointNotBelowLambda(f"stage {p} is not below {lam}")
    for t in s.symbolic_tails:
        if t.bound > lam:
            raise ex.PointNotBelowLambda(f"tail {t} reaches past {lam}")


def stage_bound(s: CountableSetDescriptor, lam: Ord) -> StageBoundResult:
    """Bounded(sup) when the supremum stays below lam, CofinalFailure(lam) otherwise."""
    check_below(s, lam)
    sup = s.supremum()
    if sup < lam:
        return Bounded(sup)
    if lam.cofinality_class() != COF_OMEGA:
        raise ex.StageBoundingViolated(f"countable set {s} is cofinal in {lam}")
    log.debug("stage bounding fails below %s", lam)
    return CofinalFailure(sup)
