"""Scripted identity checks driven by the data files.

Each record in a ``*.identities`` or ``*.adjudications`` file is a
small program: parse both sides, expand named quantities into jets of
the potential, apply the listed operations to the left side, then ask
the catalog whether the difference normalizes to zero.  On top of the
plain run this module provides two robustness probes: a mutation run
that bumps each rational literal in a statement and demands the check
break, and a rule-removal audit that demands every axiom stay
load-bearing.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass
from pathlib import Path

from .coeff import Coeff
from .defs import expand_names
from .errors import CatalogError, EngineError
from .expr import (
    REEB,
    Expression,
    Index,
    License,
    antihol,
    antireal_part,
    differentiate,
    hol,
    multiply,
    real,
    real_part,
    scale,
)
from .notation import parse_coefficient, parse_expression, read_data_file, tokenize
from .rewrite import RuleSet, ZeroCheck, check_zero, load_ruleset

DATA_DIR = Path(__file__).parent / "data"

CATALOG_FILES = (
    "cr.adjudications",
    "cr.identities",
    "cr.rules",
    "riemannian.identities",
    "riemannian.rules",
)

_OPS = ("d", "wdiv", "re", "antire", "-")


def catalog_dir(override: str | Path | None = None) -> Path:
    """The directory holding the data files.

    Resolution order: explicit argument, the CRCHECK_CATALOG
    environment variable, the copy shipped inside the package.
    """
    if override is not None:
        return Path(override)
    env = os.environ.get("CRCHECK_CATALOG")
    if env:
        return Path(env)
    return DATA_DIR


@dataclass(frozen=True, slots=True)
class IdentityScript:
    """One scripted check, kept in its pre-expansion source form."""

    name: str
    mode: str
    citation: str
    mutable: bool
    expected: str  # "zero" | "nonzero"
    ops: tuple[str, ...]
    lhs_text: str
    rhs_text: str

    @property
    def rule_text(self) -> str:
        return f"{self.lhs_text} => {self.rhs_text}"


@dataclass(frozen=True, slots=True)
class ScriptResult:
    script: IdentityScript
    check: ZeroCheck
    seconds: float

    @property
    def ok(self) -> bool:
        return self.check.verdict == self.script.expected


def _split_rule_text(source: str, lineno: int, text: str) -> tuple[str, str]:
    parts = text.split("=>")
    if len(parts) != 2:
        raise CatalogError(f"{source}:{lineno}: a script needs exactly one '=>'")
    return parts[0].strip(), parts[1].strip()


def _validate_ops(source: str, lineno: int, mode: str, ops: tuple[str, ...]) -> None:
    for op in ops:
        head = op.split(":", 1)[0]
        if head not in _OPS:
            raise CatalogError(f"{source}:{lineno}: unknown op {op!r}")
        if head in ("re", "antire") and mode != "cr":
            raise CatalogError(f"{source}:{lineno}: op {op!r} only exists in cr mode")


def load_scripts(path: str | Path) -> list[IdentityScript]:
    """Read identity or adjudication records.

    Identity files carry a mutable flag in the third field and always
    expect zero; adjudication files carry the expected verdict there
    instead and are never mutated.
    """
    path = Path(path)
    mode, entries = read_data_file(path)
    out: list[IdentityScript] = []
    seen: set[str] = set()
    for lineno, fields in entries:
        if len(fields) != 5:
            raise CatalogError(
                f"{path}:{lineno}: expected 'name | citation | flag | ops | rule',"
                f" got {len(fields)} fields"
            )
        name, citation, flag, ops_field, text = fields
        if name in seen:
            raise CatalogError(f"{path}:{lineno}: duplicate script name {name!r}")
        seen.add(name)
        if flag in ("true", "false"):
            mutable, expected = flag == "true", "zero"
        elif flag in ("zero", "nonzero"):
            mutable, expected = False, flag
        else:
            raise CatalogError(f"{path}:{lineno}: bad flag {flag!r}")
        ops = tuple(p.strip() for p in ops_field.split(",")) if ops_field else ("-",)
        _validate_ops(path.name, lineno, mode, ops)
        lhs_text, rhs_text = _split_rule_text(path.name, lineno, text)
        out.append(
            IdentityScript(name, mode, citation, mutable, expected, ops, lhs_text, rhs_text)
        )
    return out


def _op_index(mode: str, token: str) -> Index:
    if token == "0":
        if mode != "cr":
            raise CatalogError("the Reeb direction only exists in cr mode")
        return REEB
    bar = token.endswith("~")
    letter = token[:-1] if bar else token
    if len(letter) != 1 or not letter.isalpha() or not letter.islower() or letter in "imn":
        raise CatalogError(f"bad derivative index {token!r}")
    if bar:
        if mode != "cr":
            raise CatalogError("'~' indices only exist in cr mode")
        return antihol(letter)
    return hol(letter) if mode == "cr" else real(letter)


def apply_ops(
    e: Expression, ops: tuple[str, ...], licenses: frozenset[License]
) -> Expression:
    """Run a script's operation list over an expression."""
    mode = e.mode
    for op in ops:
        if op == "-":
            continue
        if op == "re":
            e = real_part(e, licenses)
            continue
        if op == "antire":
            e = antireal_part(e, licenses)
            continue
        head, _, rest = op.partition(":")
        if head == "d":
            ix = _op_index(mode, rest)
            contract = any(f.name == ix.name for f in e.free_indices)
            e = differentiate(e, ix, licenses, allow_contraction=contract)
            continue
        if head == "wdiv":
            token, _, ctext = rest.partition(":")
            ix = _op_index(mode, token)
            weight = parse_coefficient(mode, ctext)
            grad = parse_expression(mode, f"phi^-1*phi[;{token}]", licenses)
            tangential = scale(multiply(e, grad, licenses), weight)
            e = differentiate(e, ix, licenses, allow_contraction=True) + tangential
            continue
        raise CatalogError(f"unknown op {op!r}")
    return e


def run_script(rules: RuleSet, script: IdentityScript) -> ScriptResult:
    if script.mode != rules.mode:
        raise CatalogError(
            f"script {script.name!r} is for mode {script.mode!r}, not {rules.mode!r}"
        )
    start = time.perf_counter()
    lhs = parse_expression(script.mode, script.lhs_text, rules.licenses)
    rhs = parse_expression(script.mode, script.rhs_text, rules.licenses)
    lhs = expand_names(script.mode, lhs)
    rhs = expand_names(script.mode, rhs)
    lhs = apply_ops(lhs, script.ops, rules.licenses)
    check = check_zero(rules, script.name, lhs, rhs)
    return ScriptResult(script, check, time.perf_counter() - start)


def load_suite(mode: str, directory: str | Path | None = None) -> tuple[RuleSet, list[IdentityScript]]:
    base = catalog_dir(directory)
    stem = "cr" if mode == "cr" else "riemannian"
    rules = load_ruleset(base / f"{stem}.rules")
    scripts = load_scripts(base / f"{stem}.identities")
    return rules, scripts


def run_suite(mode: str, directory: str | Path | None = None) -> list[ScriptResult]:
    rules, scripts = load_suite(mode, directory)
    return [run_script(rules, s) for s in scripts]


def load_adjudications(directory: str | Path | None = None) -> list[IdentityScript]:
    return load_scripts(catalog_dir(directory) / "cr.adjudications")


def run_adjudications(directory: str | Path | None = None) -> list[ScriptResult]:
    base = catalog_dir(directory)
    rules = load_ruleset(base / "cr.rules")
    return [run_script(rules, s) for s in load_adjudications(directory)]


# ---- mutation runs ----


@dataclass(frozen=True, slots=True)
class MutationSite:
    """A rational literal eligible for bumping, as a text slice."""

    col: int  # 0-based offset into rule_text
    text: str


@dataclass(frozen=True, slots=True)
class MutationOutcome:
    script_name: str
    site: MutationSite
    mutated_text: str
    verdict: str  # "zero" | "nonzero" | "error"
    detail: str

    @property
    def killed(self) -> bool:
        return self.verdict != "zero"


def mutation_sites(rule_text: str) -> list[MutationSite]:
    """Integer literals that are genuine coefficients.

    Indices inside brackets and exponents after '^' stay fixed; those
    are structure, not statement content.
    """
    sites: list[MutationSite] = []
    depth = 0
    exponent = False  # the next integer belongs to a '^', maybe via '-'
    for tok in tokenize(rule_text):
        if tok.kind == "sym":
            if tok.text == "[":
                depth += 1
            elif tok.text == "]":
                depth -= 1
            elif tok.text == "^":
                exponent = True
            elif not (tok.text == "-" and exponent):
                exponent = False
            continue
        if tok.kind == "int" and depth == 0 and not exponent:
            sites.append(MutationSite(tok.col - 1, tok.text))
        exponent = False
    return sites


def mutate_script(script: IdentityScript, site: MutationSite) -> IdentityScript:
    text = script.rule_text
    if text[site.col : site.col + len(site.text)] != site.text:
        raise CatalogError(f"stale mutation site in {script.name!r}")
    bumped = str(int(site.text) + 1)
    mutated = text[: site.col] + bumped + text[site.col + len(site.text) :]
    lhs_text, rhs_text = _split_rule_text("<mutant>", 0, mutated)
    return IdentityScript(
        f"{script.name}~{site.col}",
        script.mode,
        script.citation,
        False,
        script.expected,
        script.ops,
        lhs_text,
        rhs_text,
    )


def run_mutations(
    rules: RuleSet, scripts: list[IdentityScript]
) -> list[MutationOutcome]:
    """Bump every eligible literal in every mutable script.

    A mutant is killed when the check no longer verifies: it either
    normalizes to something nonzero or fails outright.
    """
    out: list[MutationOutcome] = []
    for script in scripts:
        if not script.mutable or script.expected != "zero":
            continue
        for site in mutation_sites(script.rule_text):
            mutant = mutate_script(script, site)
            try:
                result = run_script(rules, mutant)
            except EngineError as err:
                out.append(
                    MutationOutcome(script.name, site, mutant.rule_text, "error", str(err))
                )
                continue
            nf_terms = len(result.check.normal_form.terms)
            out.append(
                MutationOutcome(
                    script.name,
                    site,
                    mutant.rule_text,
                    result.check.verdict,
                    f"{nf_terms} terms in normal form",
                )
            )
    return out


# ---- rule-removal audit ----


@dataclass(frozen=True, slots=True)
class RemovalProbe:
    rule_name: str
    kind: str
    broken: tuple[str, ...]  # scripts that stop verifying without the rule

    @property
    def load_bearing(self) -> bool:
        return bool(self.broken)


def probe_rule_removal(
    rules: RuleSet,
    scripts: list[IdentityScript],
    rule_name: str,
    stop_at_first: bool = True,
) -> RemovalProbe:
    """Re-run the scripts without one rule and collect breakage.

    Licenses are structural (they teach the engine which slot swaps
    exist) so removing one can reorder unrelated normal forms; the
    audit therefore only targets non-license rules.
    """
    target = rules.rule(rule_name)
    reduced = rules.without(rule_name)
    broken: list[str] = []
    for script in scripts:
        if script.expected != "zero":
            continue
        try:
            result = run_script(reduced, script)
        except EngineError:
            broken.append(script.name)
        else:
            if not result.ok:
                broken.append(script.name)
        if broken and stop_at_first:
            break
    return RemovalProbe(rule_name, target.kind, tuple(broken))


def audit_rule_removals(
    rules: RuleSet,
    scripts: list[IdentityScript],
    kinds: tuple[str, ...] = ("axiom", "equation"),
    stop_at_first: bool = True,
) -> list[RemovalProbe]:
    probes = []
    for rule in rules.active:
        if rule.kind in kinds:
            probes.append(probe_rule_removal(rules, scripts, rule.name, stop_at_first))
    return probes
