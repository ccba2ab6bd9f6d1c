"""Term rewriting to normal form.

A rule's left side is a single monomial pattern.  Lowercase letters in
a pattern are variables: a letter appearing once is free and binds any
index of its class, a letter appearing twice marks a contraction that
must also be present in the matched term.  Rules whose replacement
only involves differentiable heads also apply under a longer
derivative tail; the unmatched tail is applied to the replacement by
the product rule.

A rule that merely swaps two adjacent same-class derivative slots is
not rewritten with; it is absorbed into the canonical form as a
license, so both orders of such a pair denote the same monomial.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .coeff import Coeff
from .errors import CatalogError, FuelExhausted
from .expr import (
    REEB_CLS,
    Atom,
    Expression,
    Index,
    License,
    Monomial,
    _atom_variants,
    build_expression,
    differentiate,
    free_index_set,
    freshen_dummies,
    heads_for,
    names_in,
    rename_names,
)
from .notation import parse_rule

RULE_KINDS = ("axiom", "definition", "equation")

DEFAULT_FUEL = 100_000


@dataclass(frozen=True, slots=True)
class RewriteRule:
    name: str
    kind: str
    citation: str
    mode: str
    source: str
    pattern: Monomial
    replacement: Expression
    tail_ok: bool


def make_rule(mode: str, name: str, kind: str, citation: str, text: str) -> RewriteRule:
    if kind not in RULE_KINDS:
        raise CatalogError(f"rule {name!r}: unknown kind {kind!r}")
    lhs, rhs = parse_rule(mode, text)
    if len(lhs.terms) != 1:
        raise CatalogError(f"rule {name!r}: left side must be a single monomial")
    pattern = lhs.terms[0]
    if rhs.terms and free_index_set(pattern.atoms) != rhs.free_indices:
        raise CatalogError(f"rule {name!r}: sides disagree on free indices")
    heads = heads_for(mode)
    tail_ok = all(
        heads[a.head].jet or heads[a.head].parallel
        for t in rhs.terms
        for a in t.atoms
    )
    return RewriteRule(name, kind, citation, mode, text, pattern, rhs, tail_ok)


def license_of(rule: RewriteRule) -> License | None:
    """The slot-swap license a rule encodes, if it encodes one."""
    if len(rule.pattern.atoms) != 1 or not rule.pattern.coeff.is_one():
        return None
    if len(rule.replacement.terms) != 1:
        return None
    (rt,) = rule.replacement.terms
    if not rt.coeff.is_one() or len(rt.atoms) != 1:
        return None
    a, b = rule.pattern.atoms[0], rt.atoms[0]
    if (a.head, a.primary, a.power) != (b.head, b.primary, b.power):
        return None
    if len(a.deriv) != len(b.deriv):
        return None
    diff = [k for k in range(len(a.deriv)) if a.deriv[k] != b.deriv[k]]
    if len(diff) != 2 or diff[1] != diff[0] + 1:
        return None
    p = diff[0]
    if a.deriv[p] != b.deriv[p + 1] or a.deriv[p + 1] != b.deriv[p]:
        return None
    cls = a.deriv[p].cls
    if cls != a.deriv[p + 1].cls or cls == REEB_CLS:
        return None
    return (a.head, p, cls)


@dataclass(frozen=True, slots=True)
class _Match:
    binding: dict
    consumed: tuple[tuple[int, int], ...]  # (atom position, leftover power)
    tail: tuple[Index, ...]


_VARIANT_CACHE: dict[tuple, tuple[Atom, ...]] = {}


def _variants(mode: str, atom: Atom, licenses: frozenset[License]) -> tuple[Atom, ...]:
    key = (mode, atom, licenses)
    hit = _VARIANT_CACHE.get(key)
    if hit is None:
        vs = _atom_variants(mode, atom, licenses)
        hit = tuple(sorted(vs, key=lambda a: (a.primary, a.deriv)))
        _VARIANT_CACHE[key] = hit
    return hit


def _bind(p: Index, t: Index, binding: dict) -> dict | None:
    if p.cls != t.cls:
        return None
    if p.cls == REEB_CLS:
        return binding
    have = binding.get(p.name)
    if have is None:
        out = dict(binding)
        out[p.name] = t.name
        return out
    return binding if have == t.name else None


def _bind_slots(
    pattern: Iterable[Index], target: Iterable[Index], binding: dict
) -> dict | None:
    for p, t in zip(pattern, target):
        binding = _bind(p, t, binding)
        if binding is None:
            return None
    return binding


def _power_fit(p: Atom, t: Atom) -> int | None:
    """Leftover target power after the pattern consumes its share."""
    if p.power == t.power:
        return 0
    if p.primary or p.deriv or t.primary or t.deriv:
        return None
    if (p.power > 0) != (t.power > 0) or abs(p.power) > abs(t.power):
        return None
    return t.power - p.power


def _find_match(
    mode: str, licenses: frozenset[License], rule: RewriteRule, term: Monomial
) -> _Match | None:
    patoms = rule.pattern.atoms
    if len(patoms) == 1:
        p = patoms[0]
        for pos, ta in enumerate(term.atoms):
            if ta.head != p.head:
                continue
            leftover = _power_fit(p, ta)
            if leftover is None:
                continue
            for var in _variants(mode, ta, licenses):
                if len(p.primary) != len(var.primary) or len(p.deriv) > len(var.deriv):
                    continue
                if len(p.deriv) < len(var.deriv) and not rule.tail_ok:
                    continue
                binding = _bind_slots(p.primary, var.primary, {})
                if binding is None:
                    continue
                binding = _bind_slots(p.deriv, var.deriv, binding)
                if binding is None:
                    continue
                tail = var.deriv[len(p.deriv) :]
                return _Match(binding, ((pos, leftover),), tail)
        return None

    def rec(k: int, binding: dict, used: tuple[tuple[int, int], ...]) -> _Match | None:
        if k == len(patoms):
            return _Match(binding, used, ())
        p = patoms[k]
        taken = {pos for pos, _ in used}
        for pos, ta in enumerate(term.atoms):
            if pos in taken or ta.head != p.head:
                continue
            leftover = _power_fit(p, ta)
            if leftover is None:
                continue
            for var in _variants(mode, ta, licenses):
                if len(p.primary) != len(var.primary) or len(p.deriv) != len(var.deriv):
                    continue
                b = _bind_slots(p.primary, var.primary, binding)
                if b is None:
                    continue
                b = _bind_slots(p.deriv, var.deriv, b)
                if b is None:
                    continue
                found = rec(k + 1, b, used + ((pos, leftover),))
                if found is not None:
                    return found
        return None

    return rec(0, {}, ())


def _instantiate(
    mode: str,
    licenses: frozenset[License],
    rule: RewriteRule,
    term: Monomial,
    match: _Match,
) -> list[tuple[Coeff, tuple[Atom, ...]]]:
    consumed = {pos for pos, _ in match.consumed}
    leftovers: list[Atom] = [a for k, a in enumerate(term.atoms) if k not in consumed]
    for pos, power in match.consumed:
        if power:
            src = term.atoms[pos]
            leftovers.append(Atom(src.head, (), (), power))

    scale_coeff = term.coeff / rule.pattern.coeff

    frees = {ix.name for ix in free_index_set(rule.pattern.atoms)}
    mapping = {nm: match.binding[nm] for nm in frees if nm in match.binding}
    avoid = (
        names_in(term.atoms)
        | set(match.binding.values())
        | {ix.name for ix in match.tail if ix.cls != REEB_CLS}
    )

    parts: list[tuple[Coeff, tuple[Atom, ...]]] = []
    for rt in rule.replacement.terms:
        _, atoms = freshen_dummies(mode, rt.coeff, rt.atoms, avoid | frees)
        atoms = rename_names(atoms, mapping)
        piece = Expression(mode, (Monomial(rt.coeff, atoms),))
        for ix in match.tail:
            piece = differentiate(piece, ix, licenses, allow_contraction=True)
        for pt in piece.terms:
            # differentiate() re-canonicalizes dummies, so they can collide
            # with leftover pairs again; freshen once more before rejoining.
            c2, a2 = freshen_dummies(mode, pt.coeff, pt.atoms, avoid)
            parts.append((scale_coeff * c2, tuple(leftovers) + a2))
    return parts


def apply_rule(
    mode: str,
    licenses: frozenset[License],
    rule: RewriteRule,
    e: Expression,
) -> tuple[Expression, bool]:
    """Rewrite every term the rule matches, all at once."""
    parts: list[tuple[Coeff, tuple[Atom, ...]] | Monomial] = []
    changed = False
    for term in e.terms:
        match = _find_match(mode, licenses, rule, term)
        if match is None:
            parts.append(term)
        else:
            changed = True
            parts.extend(_instantiate(mode, licenses, rule, term, match))
    if not changed:
        return e, False
    return build_expression(mode, parts, licenses), True


class RuleSet:
    """An ordered rule catalog for one mode.

    Earlier rules take precedence: normalization always applies the
    first listed rule that matches anywhere, then rescans.
    """

    def __init__(self, mode: str, rules: Sequence[RewriteRule], fuel: int = DEFAULT_FUEL):
        self.mode = mode
        self.fuel = fuel
        self.entries = tuple(rules)
        seen: set[str] = set()
        for r in self.entries:
            if r.mode != mode:
                raise CatalogError(f"rule {r.name!r} is for mode {r.mode!r}, not {mode!r}")
            if r.name in seen:
                raise CatalogError(f"duplicate rule name {r.name!r}")
            seen.add(r.name)
        licenses = set()
        active = []
        for r in self.entries:
            lic = license_of(r)
            if lic is None:
                active.append(r)
            else:
                licenses.add(lic)
        self.active = tuple(active)
        self.licenses = frozenset(licenses)

    def rule(self, name: str) -> RewriteRule:
        for r in self.entries:
            if r.name == name:
                return r
        raise CatalogError(f"no rule named {name!r}")

    def without(self, name: str) -> RuleSet:
        self.rule(name)
        return RuleSet(self.mode, [r for r in self.entries if r.name != name], self.fuel)

    def rebuild(self, e: Expression) -> Expression:
        return build_expression(self.mode, e.terms, self.licenses)

    def normalize(
        self, e: Expression, fuel: int | None = None
    ) -> tuple[Expression, list[tuple[str, int]]]:
        budget = self.fuel if fuel is None else fuel
        work = self.rebuild(e)
        trace: list[tuple[str, int]] = []
        progress = True
        while progress:
            progress = False
            for rule in self.active:
                out, changed = apply_rule(self.mode, self.licenses, rule, work)
                if changed:
                    if budget <= 0:
                        raise FuelExhausted(
                            f"rewriting did not terminate within fuel; last rule {rule.name!r}",
                            trace,
                        )
                    budget -= 1
                    work = out
                    trace.append((rule.name, len(work.terms)))
                    progress = True
                    break
        return work, trace


@dataclass(frozen=True, slots=True)
class ZeroCheck:
    name: str
    lhs: Expression
    rhs: Expression
    normal_form: Expression
    trace: tuple[tuple[str, int], ...]
    verdict: str  # "zero" | "nonzero"

    @property
    def zero(self) -> bool:
        return self.verdict == "zero"


def check_zero(ruleset: RuleSet, name: str, lhs: Expression, rhs: Expression) -> ZeroCheck:
    nf, trace = ruleset.normalize(lhs - rhs)
    verdict = "zero" if nf.is_zero() else "nonzero"
    return ZeroCheck(name, lhs, rhs, nf, tuple(trace), verdict)


def load_ruleset(path: str | Path, fuel: int = DEFAULT_FUEL) -> RuleSet:
    from .notation import read_data_file

    mode, entries = read_data_file(path)
    rules = []
    for lineno, fields in entries:
        if len(fields) != 4:
            raise CatalogError(
                f"{path}:{lineno}: expected 'name | kind | citation | rule', got {len(fields)} fields"
            )
        name, kind, citation, text = fields
        try:
            rules.append(make_rule(mode, name, kind, citation, text))
        except CatalogError:
            raise
        except Exception as err:
            raise CatalogError(f"{path}:{lineno}: {err}") from err
    return RuleSet(mode, rules, fuel)
