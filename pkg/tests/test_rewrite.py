from __future__ import annotations

import pytest

from crcheck.errors import CatalogError, FuelExhausted
from crcheck.expr import differentiate, hol, multiply
from crcheck.notation import parse_expression
from crcheck.rewrite import (
    RuleSet,
    apply_rule,
    check_zero,
    license_of,
    load_ruleset,
    make_rule,
)

CR = "cr"

R1 = make_rule(CR, "R1", "axiom", "x", "phi[;b~,a] => phi[;a,b~] - i*delta[a,b~]*phi[;0]")
R2 = make_rule(CR, "R2", "axiom", "x", "phi[;a,b] => phi[;b,a]")
R2C = make_rule(CR, "R2c", "axiom", "x", "phi[;a~,b~] => phi[;b~,a~]")
R4 = make_rule(
    CR, "R4", "axiom", "x",
    "phi[;a,s,s~] => phi[;s,s~,a] + i*phi[;a,0] + R[a,s~]*phi[;s]",
)
GE = make_rule(
    CR, "GE", "equation", "x",
    "phi[;s,s~] => (m/2)*i*phi[;0] + (m/4)*(1 - phi) + ((m + 2)/2)*phi^-1*phi[;s]*phi[;s~]",
)
DEF_G = make_rule(
    CR, "def-g", "definition", "x",
    "phi[;s]*phi[;s~] => phi*(g - 1/2 - (1/2)*phi - i*phi[;0])",
)
TRACE_B2 = make_rule(CR, "trace-B2", "equation", "x", "B2[s,s~] => 0")


def test_license_extraction():
    assert license_of(R2) == ("phi", 0, "h")
    assert license_of(R2C) == ("phi", 0, "a")
    assert license_of(R1) is None
    assert license_of(R4) is None
    swap_later = make_rule(CR, "x", "axiom", "x", "phi[;a,b,c] => phi[;a,c,b]")
    assert license_of(swap_later) == ("phi", 1, "h")


def test_ruleset_splits_licenses_from_active_rules():
    rs = RuleSet(CR, [R2, R2C, R1])
    assert [r.name for r in rs.active] == ["R1"]
    assert ("phi", 0, "h") in rs.licenses
    assert ("phi", 0, "a") in rs.licenses


def test_r1_reorders_mixed_second_derivatives():
    rs = RuleSet(CR, [R1])
    nf, trace = rs.normalize(parse_expression(CR, "phi[;b~,a]"))
    assert nf == rs.rebuild(parse_expression(CR, "phi[;a,b~] - i*delta[a,b~]*phi[;0]"))
    assert trace == [("R1", 2)]


def test_rule_applies_under_a_longer_tail():
    rs = RuleSet(CR, [R1])
    nf, _ = rs.normalize(parse_expression(CR, "phi[;b~,a,c]"))
    want = rs.rebuild(parse_expression(CR, "phi[;a,b~,c] - i*delta[a,b~]*phi[;0,c]"))
    assert nf == want


def test_tail_blocked_when_replacement_not_differentiable():
    assert GE.tail_ok
    assert not R4.tail_ok  # R cannot be differentiated
    rs = RuleSet(CR, [R4])
    e = parse_expression(CR, "phi[;a,s,s~,b]*phi[;a~]*phi[;b~]")
    nf, trace = rs.normalize(e)
    assert trace == []
    assert nf == rs.rebuild(e)


def test_trace_pair_eliminated_with_tail():
    rs = RuleSet(CR, [GE])
    lhs = parse_expression(CR, "phi[;s,s~,x]")
    rhs = differentiate(GE.replacement, hol("x"))
    assert check_zero(rs, "tail", lhs, rhs).zero


def test_r4_binds_free_variable_to_a_contracted_index():
    rs = RuleSet(CR, [R4])
    e = parse_expression(CR, "phi[;b,s,s~]*phi[;b~]")
    want = rs.rebuild(
        parse_expression(
            CR,
            "phi[;s,s~,b]*phi[;b~] + i*phi[;b,0]*phi[;b~] + R[b,s~]*phi[;s]*phi[;b~]",
        )
    )
    nf, _ = rs.normalize(e)
    assert nf == want


def test_licensed_variant_enables_match():
    rs = RuleSet(CR, [R2, R4])
    with_license = parse_expression(CR, "phi[;s,b,s~]*phi[;b~]")
    nf, trace = rs.normalize(with_license)
    assert ("R4", 3) in trace
    bare = RuleSet(CR, [R4])
    nf_bare, trace_bare = bare.normalize(with_license)
    assert trace_bare == []
    assert not nf_bare.is_zero()
    assert nf != rs.rebuild(with_license)


def test_power_absorbing_multi_atom_rule():
    rs = RuleSet(CR, [DEF_G])
    e = parse_expression(CR, "phi^-2*phi[;s]*phi[;s~]*phi[;t]*phi[;t~]")
    block = parse_expression(CR, "g - 1/2 - (1/2)*phi - i*phi[;0]")
    want = rs.rebuild(multiply(block, block))
    nf, trace = rs.normalize(e)
    assert nf == want
    assert len(trace) == 2


def test_trace_rule_kills_term():
    rs = RuleSet(CR, [TRACE_B2])
    nf, _ = rs.normalize(parse_expression(CR, "B2[s,s~]*phi + phi"))
    assert nf == rs.rebuild(parse_expression(CR, "phi"))
    kept = parse_expression(CR, "B2[a,s~]*phi[;s]")
    nf, trace = rs.normalize(kept)
    assert trace == []
    assert nf == rs.rebuild(kept)


def test_without_removes_a_rule():
    rs = RuleSet(CR, [R2, R1])
    smaller = rs.without("R1")
    assert [r.name for r in smaller.active] == []
    assert smaller.licenses == rs.licenses
    e = parse_expression(CR, "phi[;b~,a]")
    nf, _ = smaller.normalize(e)
    assert nf == smaller.rebuild(e)
    with pytest.raises(CatalogError):
        rs.without("absent")


def test_without_a_license_coarsens_identification():
    rs = RuleSet(CR, [R2])
    a = parse_expression(CR, "phi[;a,b,c~]*phi[;a~]*C[b~]*phi[;c]")
    b = parse_expression(CR, "phi[;b,a,c~]*phi[;a~]*C[b~]*phi[;c]")
    assert rs.rebuild(a) == rs.rebuild(b)
    bare = rs.without("R2")
    assert bare.rebuild(a) != bare.rebuild(b)


def test_fuel_exhaustion():
    loop = make_rule(CR, "loop", "axiom", "x", "phi => 2*phi")
    rs = RuleSet(CR, [loop], fuel=5)
    with pytest.raises(FuelExhausted) as err:
        rs.normalize(parse_expression(CR, "phi"))
    assert len(err.value.trace) == 5


def test_check_zero_verdicts():
    rs = RuleSet(CR, [R1])
    good = check_zero(
        rs, "good",
        parse_expression(CR, "phi[;b~,a]"),
        parse_expression(CR, "phi[;a,b~] - i*delta[a,b~]*phi[;0]"),
    )
    assert good.verdict == "zero"
    assert good.zero
    assert good.normal_form.is_zero()
    bad = check_zero(
        rs, "bad",
        parse_expression(CR, "phi[;b~,a]"),
        parse_expression(CR, "phi[;a,b~]"),
    )
    assert bad.verdict == "nonzero"
    assert not bad.zero


def test_normalize_is_deterministic():
    rs = RuleSet(CR, [R2, R1, R4, GE, DEF_G])
    e = parse_expression(CR, "phi[;b,s,s~]*phi[;b~] + phi[;s~,s]")
    first = rs.normalize(e)
    second = rs.normalize(e)
    assert first == second


def test_apply_rule_hits_all_terms_at_once():
    e = parse_expression(CR, "phi[;b~,a]*phi + phi[;b~,a]*g")
    out, changed = apply_rule(CR, frozenset(), R1, e)
    assert changed
    assert len(out.terms) == 4


def test_make_rule_validation():
    with pytest.raises(CatalogError):
        make_rule(CR, "x", "axiom", "x", "phi + g => phi")
    with pytest.raises(CatalogError):
        make_rule(CR, "x", "bogus-kind", "x", "phi => phi")
    with pytest.raises(CatalogError):
        make_rule(CR, "x", "axiom", "x", "phi[;a] => phi[;b]")


def test_pattern_coefficient_divides():
    halve = make_rule(CR, "halve", "definition", "x", "2*phi => g")
    rs = RuleSet(CR, [halve])
    nf, _ = rs.normalize(parse_expression(CR, "phi"))
    assert nf == rs.rebuild(parse_expression(CR, "(1/2)*g"))


def test_load_ruleset(tmp_path):
    p = tmp_path / "mini.rules"
    p.write_text(
        "mode: cr\n"
        "R2 | axiom | Lemma 0 | phi[;a,b] => phi[;b,a]\n"
        "R1 | axiom | Lemma 0 | phi[;b~,a] => phi[;a,b~] - i*delta[a,b~]*phi[;0]\n"
    )
    rs = load_ruleset(p)
    assert rs.mode == CR
    assert [r.name for r in rs.active] == ["R1"]
    assert rs.licenses == frozenset({("phi", 0, "h")})

    bad = tmp_path / "bad.rules"
    bad.write_text("mode: cr\nonly | three | fields\n")
    with pytest.raises(CatalogError):
        load_ruleset(bad)
    dup = tmp_path / "dup.rules"
    dup.write_text(
        "mode: cr\n"
        "R | axiom | x | phi[;a,b] => phi[;b,a]\n"
        "R | axiom | x | phi[;a~,b~] => phi[;b~,a~]\n"
    )
    with pytest.raises(CatalogError):
        load_ruleset(dup)
