from hypothesis import strategies as st

from SFW.Ordinal import DEFAULT_ATOMS, CountableSetDescriptor, Ord, Tail


def _cnf(pairs, n, lead_atom):
    terms = []
    if lead_atom:
        terms.append((DEFAULT_ATOMS.get("w1"), lead_atom))
    seen = set()
    for e, c in sorted(pairs, reverse=True):
        if e in seen:
            continue
        seen.add(e)
        terms.append((Ord.finite(e), c))
    return Ord(tuple(terms), n)


def ordinals(max_exp=3, max_coef=3, atoms=True):
    """CNF ordinals with finite exponents <= max_exp and coefficients <= max_coef."""
    pairs = st.lists(st.tuples(st.integers(1, max_exp), st.integers(1, max_coef)), max_size=3)
    lead = st.integers(0, 2) if atoms else st.just(0)
    return st.builds(_cnf, pairs, st.integers(0, max_coef), lead)


def countable_ordinals(max_exp=3, max_coef=3):
    return ordinals(max_exp, max_coef, atoms=False)


def omega_limits(max_exp=3, max_coef=3):
    """Countable limits of the form d + w."""
    return countable_ordinals(max_exp, max_coef).map(lambda d: Ord(d.terms) + Ord.omega())


@st.composite
def descriptors(draw, max_points=4, tails=True):
    points = draw(st.lists(countable_ordinals(), max_size=max_points))
    tail_list = []
    if tails:
        for bound in draw(st.lists(omega_limits(), max_size=2)):
            tail_list.append(Tail.naturals_copy(bound))
    return CountableSetDescriptor.of(points, tail_list)
