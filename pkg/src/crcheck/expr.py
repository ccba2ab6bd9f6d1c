"""Abstract-index tensor expressions with exact coefficients.

An Expression is a sum of Monomials; a Monomial is a Coeff times a
multiset of Atoms; an Atom is a head symbol with primary indices, a
tail of successive covariant-derivative indices, and an integer power.

Index conventions follow the summation rules of the two supported
geometries.  In mode "cr" an index is holomorphic ("h"), antiholomorphic
("a"), or the distinguished transverse direction ("0"); a name that
appears once in a term is free, and a name that appears twice, once
holomorphic and once antiholomorphic, is an implicit contraction.  In
mode "riem" all indices are real ("r") and a repeated name is an
implicit sum.  The transverse index never sums.

Canonical form is computed per monomial: derivative tails may be
reordered only along licensed transpositions (granted by the active
rule set), atom order and dummy names are chosen to minimize a fixed
encoding, and Kronecker deltas are contracted away.  Two monomials are
equal up to the licensed symmetries exactly when their canonical forms
are structurally equal, which is what lets like terms merge.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple

from .coeff import COEFF_DIM, Coeff
from .errors import (
    DifferentiatedCurvature,
    FreeIndexMismatch,
    FreeIndexPresent,
    MalformedIndex,
    ModeError,
    RankMismatch,
)

HOL = "h"
ANTIHOL = "a"
REAL = "r"
REEB_CLS = "0"

_CLASS_RANK = {HOL: 0, ANTIHOL: 1, REAL: 0, REEB_CLS: 2}


class Index(NamedTuple):
    name: str
    cls: str


REEB = Index("0", REEB_CLS)


def hol(name: str) -> Index:
    return Index(name, HOL)


def antihol(name: str) -> Index:
    return Index(name, ANTIHOL)


def real(name: str) -> Index:
    return Index(name, REAL)


def conj_index(ix: Index) -> Index:
    if ix.cls == HOL:
        return Index(ix.name, ANTIHOL)
    if ix.cls == ANTIHOL:
        return Index(ix.name, HOL)
    return ix


@dataclass(frozen=True, slots=True)
class HeadInfo:
    """Static facts about one tensor head in one geometry."""

    rank: int
    primary: tuple[str, ...] | None  # fixed class signature; None = one chiral slot
    jet: bool = False  # may carry a covariant derivative tail
    scalar: bool = False  # may carry integer powers other than 1
    real_head: bool = False
    conj_head: str = ""  # conjugation partner; "" means self
    conj_swaps: bool = False  # conjugation reverses the two primary slots
    invertible: bool = False  # negative powers allowed
    parallel: bool = False  # covariant derivative vanishes
    curvature: bool = False


CR_HEADS: dict[str, HeadInfo] = {
    "delta": HeadInfo(0, (HOL, ANTIHOL), parallel=True, conj_swaps=True),
    "R": HeadInfo(1, (HOL, ANTIHOL), curvature=True, conj_swaps=True),
    "phi": HeadInfo(3, (), jet=True, scalar=True, real_head=True, invertible=True),
    "g": HeadInfo(5, (), scalar=True, conj_head="gb"),
    "gb": HeadInfo(6, (), scalar=True, conj_head="g"),
    "A": HeadInfo(7, None),
    "B": HeadInfo(8, None),
    "B2": HeadInfo(9, (HOL, ANTIHOL), conj_swaps=True),
    "C": HeadInfo(10, None),
    "S": HeadInfo(11, (), scalar=True, real_head=True),
}

RIEM_HEADS: dict[str, HeadInfo] = {
    "delta": HeadInfo(0, (REAL, REAL), parallel=True, real_head=True),
    "Ric": HeadInfo(2, (REAL, REAL), curvature=True, real_head=True),
    "phi": HeadInfo(3, (), jet=True, scalar=True, real_head=True),
    "v": HeadInfo(4, (), jet=True, scalar=True, real_head=True, invertible=True),
}

# Symmetric primary slots are a structural property of the head, not a
# licensed rewrite: delta and the Ricci tensor in the real geometry.
_SYMMETRIC_PRIMARY = {("riem", "delta"), ("riem", "Ric")}

MODES = ("cr", "riem")


def heads_for(mode: str) -> dict[str, HeadInfo]:
    if mode == "cr":
        return CR_HEADS
    if mode == "riem":
        return RIEM_HEADS
    raise ModeError(f"unknown mode {mode!r}")


@dataclass(frozen=True, slots=True)
class Atom:
    head: str
    primary: tuple[Index, ...] = ()
    deriv: tuple[Index, ...] = ()
    power: int = 1

    def indices(self) -> tuple[Index, ...]:
        return self.primary + self.deriv


def _index_key(ix: Index) -> tuple[int, str]:
    return (_CLASS_RANK[ix.cls], ix.name)


def atom_sort_key(mode: str, atom: Atom) -> tuple:
    info = heads_for(mode)[atom.head]
    return (
        info.rank,
        atom.head,
        tuple(_index_key(ix) for ix in atom.primary),
        len(atom.deriv),
        tuple(_index_key(ix) for ix in atom.deriv),
        atom.power,
    )


def validate_atom(mode: str, atom: Atom) -> None:
    heads = heads_for(mode)
    info = heads.get(atom.head)
    if info is None:
        raise ModeError(f"head {atom.head!r} is not defined in mode {mode!r}")
    if atom.power == 0:
        raise RankMismatch(f"atom {atom.head!r} with zero power")
    if atom.power != 1:
        if not info.scalar or atom.deriv:
            raise RankMismatch(
                f"powers are only allowed on bare scalar heads, got {atom.head!r}"
            )
        if atom.power < 0 and not info.invertible:
            raise RankMismatch(f"head {atom.head!r} is not invertible")
    for ix in atom.primary:
        if ix.cls == REEB_CLS:
            raise MalformedIndex(f"head {atom.head!r} cannot take the transverse index")
    if info.primary is None:
        if len(atom.primary) != 1 or atom.primary[0].cls not in (HOL, ANTIHOL):
            raise RankMismatch(f"head {atom.head!r} takes one chiral index")
    else:
        if len(atom.primary) != len(info.primary):
            raise RankMismatch(
                f"head {atom.head!r} takes {len(info.primary)} primary indices,"
                f" got {len(atom.primary)}"
            )
        for ix, cls in zip(atom.primary, info.primary):
            if ix.cls != cls:
                raise RankMismatch(
                    f"head {atom.head!r} primary index {ix.name!r} has class"
                    f" {ix.cls!r}, expected {cls!r}"
                )
    if atom.deriv and not info.jet:
        raise RankMismatch(f"head {atom.head!r} cannot carry derivative indices")
    allowed = (HOL, ANTIHOL, REEB_CLS) if mode == "cr" else (REAL,)
    for ix in atom.deriv:
        if ix.cls not in allowed:
            raise MalformedIndex(
                f"derivative index {ix.name!r} of class {ix.cls!r} not valid in"
                f" mode {mode!r}"
            )
        if ix.cls == REEB_CLS and ix.name != "0":
            raise MalformedIndex("the transverse index is always written 0")


def validate_monomial(mode: str, atoms: tuple[Atom, ...]) -> None:
    occ: dict[str, list[str]] = {}
    for a in atoms:
        validate_atom(mode, a)
        for ix in a.indices():
            if ix.cls == REEB_CLS:
                continue
            occ.setdefault(ix.name, []).append(ix.cls)
    for nm, classes in occ.items():
        if len(classes) == 1:
            continue
        if mode == "cr":
            if len(classes) == 2 and sorted(classes) == [ANTIHOL, HOL]:
                continue
            raise RankMismatch(
                f"index {nm!r} occurs {len(classes)} times with classes {classes};"
                " a contraction pairs one holomorphic with one antiholomorphic slot"
            )
        if len(classes) == 2:
            continue
        raise RankMismatch(f"index {nm!r} occurs {len(classes)} times")


def free_index_set(atoms: tuple[Atom, ...]) -> frozenset[Index]:
    occ: dict[str, list[Index]] = {}
    for a in atoms:
        for ix in a.indices():
            if ix.cls == REEB_CLS:
                continue
            occ.setdefault(ix.name, []).append(ix)
    return frozenset(v[0] for v in occ.values() if len(v) == 1)


def names_in(atoms: Iterable[Atom]) -> set[str]:
    out: set[str] = set()
    for a in atoms:
        for ix in a.indices():
            if ix.cls != REEB_CLS:
                out.add(ix.name)
    return out


# Letters i, m and n are reserved: i is the imaginary unit and m, n are
# the dimension symbols of the two modes.
_POOL = "abcdefghjklopqrstuvwxyz"


def name_pool(avoid: Iterable[str]) -> Iterator[str]:
    avoid = set(avoid)

    def gen() -> Iterator[str]:
        for c in _POOL:
            if c not in avoid:
                yield c
        k = 1
        while True:
            for c in _POOL:
                nm = f"{c}{k}"
                if nm not in avoid:
                    yield nm
            k += 1

    return gen()


def rename_names(atoms: Iterable[Atom], mapping: dict[str, str]) -> tuple[Atom, ...]:
    """Apply a name substitution to every non-transverse index."""

    def ren(ix: Index) -> Index:
        if ix.cls == REEB_CLS:
            return ix
        return Index(mapping.get(ix.name, ix.name), ix.cls)

    return tuple(
        Atom(a.head, tuple(ren(ix) for ix in a.primary), tuple(ren(ix) for ix in a.deriv), a.power)
        for a in atoms
    )


def freshen_dummies(
    mode: str, coeff: Coeff, atoms: tuple[Atom, ...], avoid: set[str]
) -> tuple[Coeff, tuple[Atom, ...]]:
    """Rename dummy pairs whose names collide with the avoid set."""
    occ: dict[str, int] = {}
    for a in atoms:
        for ix in a.indices():
            if ix.cls != REEB_CLS:
                occ[ix.name] = occ.get(ix.name, 0) + 1
    clashes = [nm for nm, c in occ.items() if c == 2 and nm in avoid]
    if not clashes:
        return coeff, atoms
    pool = name_pool(avoid | set(occ))
    mapping = {nm: next(pool) for nm in sorted(clashes)}
    return coeff, rename_names(atoms, mapping)


# ---------------------------------------------------------------------------
# canonical form


_CANON_CACHE: dict[tuple, tuple[Atom, ...]] = {}


# A license (head, pos, cls) permits swapping derivative slots pos and
# pos+1 of that head when both slots carry indices of class cls.
License = tuple[str, int, str]


def canonicalize(
    mode: str, atoms: tuple[Atom, ...], licenses: frozenset[License] = frozenset()
) -> tuple[Atom, ...]:
    """Canonical representative of a monomial's atom multiset.

    Licensed transpositions of derivative slots, atom ordering, and
    dummy renaming are all searched; the representative is the one with
    the smallest encoding.  Free names are fixed points.
    """
    if not atoms:
        return atoms
    key = (mode, licenses, atoms)
    hit = _CANON_CACHE.get(key)
    if hit is not None:
        return hit

    occ: dict[str, int] = {}
    for a in atoms:
        for ix in a.indices():
            if ix.cls != REEB_CLS:
                occ[ix.name] = occ.get(ix.name, 0) + 1
    frees = {nm for nm, c in occ.items() if c == 1}

    variant_lists = [_atom_variants(mode, a, licenses) for a in atoms]
    best: tuple[tuple, tuple[Atom, ...]] | None = None
    for combo in itertools.product(*variant_lists):
        best = _best_arrangement(mode, combo, frees, best)
    assert best is not None
    _CANON_CACHE[key] = best[1]
    return best[1]


def _atom_variants(
    mode: str, atom: Atom, licenses: frozenset[License]
) -> list[Atom]:
    tails = {atom.deriv}
    entries = [(p, c) for (h, p, c) in licenses if h == atom.head]
    if entries and len(atom.deriv) > 1:
        frontier = [atom.deriv]
        while frontier:
            t = frontier.pop()
            for p, c in entries:
                if p + 1 >= len(t):
                    continue
                x, y = t[p], t[p + 1]
                if x.cls != c or y.cls != c or c == REEB_CLS:
                    continue
                s = t[:p] + (y, x) + t[p + 2 :]
                if s not in tails:
                    tails.add(s)
                    frontier.append(s)
    prims = {atom.primary}
    if (mode, atom.head) in _SYMMETRIC_PRIMARY and atom.primary[0] != atom.primary[1]:
        prims.add((atom.primary[1], atom.primary[0]))
    if len(tails) == 1 and len(prims) == 1:
        return [atom]
    return [Atom(atom.head, pr, tl, atom.power) for pr in prims for tl in tails]


def _best_arrangement(
    mode: str,
    combo: tuple[Atom, ...],
    frees: set[str],
    best: tuple[tuple, tuple[Atom, ...]] | None,
) -> tuple[tuple, tuple[Atom, ...]]:
    heads = heads_for(mode)
    n = len(combo)
    base: list[tuple] = []
    slot_names: list[list[str | None]] = []
    for a in combo:
        descr: list[tuple[int, int, int, str]] = []
        names: list[str | None] = []
        first_pos: dict[str, int] = {}
        slots = a.indices()
        for s, ix in enumerate(slots):
            if ix.cls == REEB_CLS:
                descr.append((0, 0, 0, ""))
                names.append(None)
            elif ix.name in frees:
                descr.append((1, _CLASS_RANK[ix.cls], 0, ix.name))
                names.append(None)
            else:
                nm = ix.name
                if nm in first_pos:
                    link = first_pos[nm]
                else:
                    later = any(
                        slots[t].name == nm and slots[t].cls != REEB_CLS
                        for t in range(s + 1, len(slots))
                    )
                    link = -2 if later else -1
                    first_pos[nm] = s
                descr.append((2, _CLASS_RANK[ix.cls], link, ""))
                names.append(nm)
        base.append(
            (heads[a.head].rank, a.head, a.power, len(a.deriv), tuple(descr))
        )
        slot_names.append(names)

    # one refinement round: where do my dummy slots connect
    locs: dict[str, list[tuple[int, int]]] = {}
    for ai, names in enumerate(slot_names):
        for s, nm in enumerate(names):
            if nm is not None:
                locs.setdefault(nm, []).append((ai, s))
    refined: list[tuple] = []
    for ai in range(n):
        links = []
        for s, nm in enumerate(slot_names[ai]):
            if nm is None:
                continue
            pair = locs[nm]
            if len(pair) == 2 and pair[0][0] != pair[1][0]:
                (a1, s1), (a2, s2) = pair
                other, oslot = (a2, s2) if a1 == ai else (a1, s1)
                links.append((s, base[other], oslot))
        refined.append((base[ai], tuple(sorted(links))))

    order0 = sorted(range(n), key=lambda k: refined[k])
    groups: list[list[int]] = []
    k = 0
    while k < n:
        j = k
        while j < n and refined[order0[j]] == refined[order0[k]]:
            j += 1
        groups.append(order0[k:j])
        k = j

    for parts in itertools.product(*(itertools.permutations(g) for g in groups)):
        order = [idx for part in parts for idx in part]
        enc, ats = _encode(mode, combo, order, frees)
        if best is None or enc < best[0]:
            best = (enc, ats)
    return best


def _encode(
    mode: str, combo: tuple[Atom, ...], order: list[int], frees: set[str]
) -> tuple[tuple, tuple[Atom, ...]]:
    pool = name_pool(frees)
    mapping: dict[str, str] = {}
    out: list[Atom] = []
    for idx in order:
        a = combo[idx]

        def ren(ix: Index) -> Index:
            if ix.cls == REEB_CLS or ix.name in frees:
                return ix
            nm = mapping.get(ix.name)
            if nm is None:
                nm = next(pool)
                mapping[ix.name] = nm
            return Index(nm, ix.cls)

        out.append(
            Atom(
                a.head,
                tuple(ren(ix) for ix in a.primary),
                tuple(ren(ix) for ix in a.deriv),
                a.power,
            )
        )
    enc = tuple(atom_sort_key(mode, a) for a in out)
    return enc, tuple(out)


# ---------------------------------------------------------------------------
# delta contraction


def contract_delta(
    mode: str, coeff: Coeff, atoms: tuple[Atom, ...]
) -> tuple[Coeff, tuple[Atom, ...]]:
    """Remove every Kronecker delta that touches a contracted index.

    A delta whose two slots carry the same name is a full trace and
    contributes one factor of the dimension symbol.  A delta with both
    slots free stays."""
    work = list(atoms)
    changed = True
    while changed:
        changed = False
        for k, a in enumerate(work):
            if a.head != "delta":
                continue
            p, q = a.primary
            if p.name == q.name:
                coeff = coeff * COEFF_DIM
                del work[k]
                changed = True
                break
            loc = _find_occurrence(work, k, q.name)
            new_name = p.name
            if loc is None:
                loc = _find_occurrence(work, k, p.name)
                new_name = q.name
            if loc is None:
                continue
            ai, is_deriv, slot = loc
            work[ai] = _rename_slot(work[ai], is_deriv, slot, new_name)
            del work[k]
            changed = True
            break
    return coeff, tuple(work)


def _find_occurrence(
    atoms: list[Atom], exclude: int, name: str
) -> tuple[int, bool, int] | None:
    for ai, a in enumerate(atoms):
        if ai == exclude:
            continue
        for s, ix in enumerate(a.primary):
            if ix.cls != REEB_CLS and ix.name == name:
                return (ai, False, s)
        for s, ix in enumerate(a.deriv):
            if ix.cls != REEB_CLS and ix.name == name:
                return (ai, True, s)
    return None


def _rename_slot(atom: Atom, is_deriv: bool, slot: int, name: str) -> Atom:
    if is_deriv:
        ix = atom.deriv[slot]
        der = atom.deriv[:slot] + (Index(name, ix.cls),) + atom.deriv[slot + 1 :]
        return Atom(atom.head, atom.primary, der, atom.power)
    ix = atom.primary[slot]
    prim = atom.primary[:slot] + (Index(name, ix.cls),) + atom.primary[slot + 1 :]
    return Atom(atom.head, prim, atom.deriv, atom.power)


# ---------------------------------------------------------------------------
# monomials and expressions


@dataclass(frozen=True, slots=True)
class Monomial:
    coeff: Coeff
    atoms: tuple[Atom, ...]


@dataclass(frozen=True, slots=True)
class Expression:
    mode: str
    terms: tuple[Monomial, ...]

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def free_indices(self) -> frozenset[Index]:
        if not self.terms:
            return frozenset()
        return free_index_set(self.terms[0].atoms)

    def __add__(self, other: Expression) -> Expression:
        return add(self, other)

    def __sub__(self, other: Expression) -> Expression:
        return add(self, scale(other, Coeff.rational(-1)))

    def __neg__(self) -> Expression:
        return scale(self, Coeff.rational(-1))

    def __mul__(self, other: Expression) -> Expression:
        return multiply(self, other)


def _merge_powers(mode: str, atoms: Iterable[Atom]) -> list[Atom]:
    heads = heads_for(mode)
    out: list[Atom] = []
    powers: dict[str, int] = {}
    order: list[str] = []
    for a in atoms:
        info = heads.get(a.head)
        if info is not None and info.scalar and not a.deriv and not a.primary:
            if a.head not in powers:
                order.append(a.head)
            powers[a.head] = powers.get(a.head, 0) + a.power
        else:
            out.append(a)
    for head in order:
        p = powers[head]
        if p:
            out.append(Atom(head, (), (), p))
    return out


def build_monomial(
    mode: str,
    coeff: Coeff,
    atoms: Iterable[Atom],
    licenses: frozenset[License] = frozenset(),
) -> Monomial | None:
    if coeff.is_zero():
        return None
    merged = tuple(_merge_powers(mode, atoms))
    validate_monomial(mode, merged)
    coeff, contracted = contract_delta(mode, coeff, merged)
    return Monomial(coeff, canonicalize(mode, contracted, licenses))


def build_expression(
    mode: str,
    parts: Iterable[Monomial | tuple[Coeff, tuple[Atom, ...]]],
    licenses: frozenset[License] = frozenset(),
) -> Expression:
    acc: dict[tuple[Atom, ...], Coeff] = {}
    free_ref: frozenset[Index] | None = None
    for part in parts:
        if isinstance(part, Monomial):
            coeff, atoms = part.coeff, part.atoms
        else:
            coeff, atoms = part
        m = build_monomial(mode, coeff, atoms, licenses)
        if m is None:
            continue
        frees = free_index_set(m.atoms)
        if free_ref is None:
            free_ref = frees
        elif frees != free_ref:
            raise FreeIndexMismatch(
                f"terms disagree on free indices: {sorted(free_ref)} vs {sorted(frees)}"
            )
        prev = acc.get(m.atoms)
        acc[m.atoms] = m.coeff if prev is None else prev + m.coeff
    items = [(ats, c) for ats, c in acc.items() if not c.is_zero()]
    items.sort(key=lambda it: tuple(atom_sort_key(mode, a) for a in it[0]))
    return Expression(mode, tuple(Monomial(c, ats) for ats, c in items))


def add(a: Expression, b: Expression, licenses: frozenset = frozenset()) -> Expression:
    if a.mode != b.mode:
        raise ModeError(f"cannot add {a.mode!r} and {b.mode!r} expressions")
    return build_expression(a.mode, (*a.terms, *b.terms), licenses)


def scale(e: Expression, c: Coeff) -> Expression:
    if c.is_zero():
        return Expression(e.mode, ())
    return Expression(e.mode, tuple(Monomial(t.coeff * c, t.atoms) for t in e.terms))


def multiply(
    a: Expression, b: Expression, licenses: frozenset = frozenset()
) -> Expression:
    if a.mode != b.mode:
        raise ModeError(f"cannot multiply {a.mode!r} and {b.mode!r} expressions")
    parts: list[tuple[Coeff, tuple[Atom, ...]]] = []
    for ta in a.terms:
        a_names = names_in(ta.atoms)
        for tb in b.terms:
            keep = free_index_set(tb.atoms)
            avoid = a_names | {ix.name for ix in keep}
            coeff, atoms = freshen_dummies(b.mode, tb.coeff, tb.atoms, avoid)
            parts.append((ta.coeff * coeff, ta.atoms + atoms))
    return build_expression(a.mode, parts, licenses)


def conjugate(e: Expression, licenses: frozenset = frozenset()) -> Expression:
    heads = heads_for(e.mode)
    parts: list[tuple[Coeff, tuple[Atom, ...]]] = []
    for t in e.terms:
        atoms = []
        for a in t.atoms:
            info = heads[a.head]
            head = info.conj_head or a.head
            if info.conj_swaps:
                prim: tuple[Index, ...] = (
                    conj_index(a.primary[1]),
                    conj_index(a.primary[0]),
                )
            else:
                prim = tuple(conj_index(ix) for ix in a.primary)
            der = tuple(conj_index(ix) for ix in a.deriv)
            atoms.append(Atom(head, prim, der, a.power))
        parts.append((t.coeff.conjugate(), tuple(atoms)))
    return build_expression(e.mode, parts, licenses)


def real_part(e: Expression, licenses: frozenset = frozenset()) -> Expression:
    if e.free_indices:
        raise FreeIndexPresent("the real part is only defined for scalar expressions")
    return scale(add(e, conjugate(e, licenses), licenses), Coeff.rational(1, 2))


def antireal_part(e: Expression, licenses: frozenset = frozenset()) -> Expression:
    if e.free_indices:
        raise FreeIndexPresent("the antireal part is only defined for scalar expressions")
    return scale(
        add(e, scale(conjugate(e, licenses), Coeff.rational(-1)), licenses),
        Coeff.rational(1, 2),
    )


# ---------------------------------------------------------------------------
# covariant differentiation


def _diff_atom(mode: str, atom: Atom, ix: Index) -> list[tuple[Coeff, tuple[Atom, ...]]]:
    info = heads_for(mode)[atom.head]
    if info.jet:
        if atom.power == 1:
            return [
                (
                    Coeff.rational(1),
                    (Atom(atom.head, (), atom.deriv + (ix,), 1),),
                )
            ]
        k = atom.power
        rest: tuple[Atom, ...]
        if k - 1 == 0:
            rest = ()
        else:
            rest = (Atom(atom.head, (), (), k - 1),)
        return [(Coeff.rational(k), rest + (Atom(atom.head, (), (ix,), 1),))]
    if info.parallel:
        return []
    raise DifferentiatedCurvature(
        f"head {atom.head!r} has no covariant derivative rule; expand it first"
    )


def differentiate(
    e: Expression,
    ix: Index,
    licenses: frozenset = frozenset(),
    allow_contraction: bool = False,
) -> Expression:
    """Covariant derivative of every term in direction ix.

    The derivative index must not capture an existing free index; pass
    allow_contraction=True to let it close that contraction instead.
    A name clash with a contracted pair is harmless: the pair is
    renamed and the derivative index stays free.
    """
    parts: list[tuple[Coeff, tuple[Atom, ...]]] = []
    for t in e.terms:
        coeff, atoms = t.coeff, t.atoms
        if ix.cls != REEB_CLS and ix.name in names_in(atoms):
            free_clash = any(f.name == ix.name for f in free_index_set(atoms))
            if free_clash and not allow_contraction:
                raise MalformedIndex(
                    f"derivative index {ix.name!r} already appears in the term"
                )
            if not free_clash:
                coeff, atoms = freshen_dummies(e.mode, coeff, atoms, {ix.name})
        for k, a in enumerate(atoms):
            for cf, replacement in _diff_atom(e.mode, a, ix):
                parts.append((coeff * cf, atoms[:k] + replacement + atoms[k + 1 :]))
    return build_expression(e.mode, parts, licenses)
