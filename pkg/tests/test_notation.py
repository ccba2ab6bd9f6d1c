from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from crcheck.coeff import COEFF_I, Coeff
from crcheck.errors import (
    CatalogError,
    FreeIndexMismatch,
    FreeIndexPresent,
    RankMismatch,
    SourceSyntaxError,
)
from crcheck.expr import REEB
from crcheck.notation import (
    as_coefficient,
    format_expression,
    parse_coefficient,
    parse_expression,
    parse_rule,
    read_data_file,
)

CR = "cr"
RIEM = "riem"


def test_parse_reeb_jet():
    e = parse_expression(CR, "phi[;0]")
    assert len(e.terms) == 1
    (term,) = e.terms
    assert term.coeff.is_one()
    (atom,) = term.atoms
    assert atom.head == "phi"
    assert atom.primary == ()
    assert atom.deriv == (REEB,)


def test_gradient_square_uses_canonical_dummy_names():
    e = parse_expression(CR, "phi[;s]*phi[;s~]")
    assert format_expression(e) == "phi[;a]*phi[;a~]"


def test_zero_prints_as_zero():
    assert format_expression(parse_expression(CR, "phi - phi")) == "0"
    assert parse_expression(CR, "0").is_zero()
    assert format_expression(parse_expression(CR, "0")) == "0"


def test_like_terms_merge():
    e = parse_expression(CR, "phi[;a]*phi[;a~] + phi[;s~]*phi[;s]")
    assert format_expression(e) == "2*phi[;a]*phi[;a~]"


ROUND_TRIP_TEXTS = [
    "phi[;b~,a] - phi[;a,b~] + i*delta[a,b~]*phi[;0]",
    "phi[;a,s,s~] - phi[;s,s~,a] - i*phi[;a,0] - R[a,s~]*phi[;s]",
    "(m/2)*i*phi[;0] + (m/4)*(1 - phi) + ((m + 2)/2)*phi^-1*phi[;s]*phi[;s~]",
    "B2[a,b~] + phi^-1*phi[;a]*phi[;b~] + (1/2)*(g - phi)*delta[a,b~]",
    "-i*C[a] + (1/2)*i*phi^-1*gb*phi[;a]",
    "B[s]*phi[;s~] - B[s~]*phi[;s]",
    "phi/2 + g/4",
    "m/(m + 2)*phi[;a]",
    "-phi + i*phi[;0]",
    "phi^2*S - phi^-2*A[s]*A[s~]",
    "conj(g) - gb",
    "Re(g)*phi[;0]",
]


@pytest.mark.parametrize("text", ROUND_TRIP_TEXTS)
def test_print_parse_round_trip(text):
    e = parse_expression(CR, text)
    assert parse_expression(CR, format_expression(e)) == e


def test_riemannian_round_trip():
    text = "v*phi[;j,j] - (n - 2)*v[;j]*phi[;j] - 2*Ric[j,k]*v[;j]*v[;k]"
    e = parse_expression(RIEM, text)
    assert parse_expression(RIEM, format_expression(e)) == e
    assert "n" in format_expression(parse_expression(RIEM, "n*v"))


def test_coefficient_wrapped_only_when_spaced_at_top_level():
    assert format_expression(parse_expression(CR, "(m + 1)*phi")) == "(m + 1)*phi"
    assert format_expression(parse_expression(CR, "(1/2)*phi")) == "1/2*phi"
    assert format_expression(parse_expression(CR, "(m + 2)/2*phi")) == "(m + 2)/2*phi"


def test_sign_joining():
    assert format_expression(parse_expression(CR, "phi - i*phi[;0]")) == "phi - i*phi[;0]"
    assert format_expression(parse_expression(CR, "-2*phi")) == "-2*phi"
    assert format_expression(parse_expression(CR, "-phi + phi[;0]")) == "-phi + phi[;0]"


def test_conjugation():
    assert parse_expression(CR, "conj(phi[;a])") == parse_expression(CR, "phi[;a~]")
    assert parse_expression(CR, "conj(i*phi)") == parse_expression(CR, "-i*phi")
    assert parse_expression(CR, "conj(gb)") == parse_expression(CR, "g")
    assert parse_expression(CR, "conj(A[a])") == parse_expression(CR, "A[a~]")


def test_real_part():
    assert parse_expression(CR, "Re(g)") == parse_expression(CR, "(1/2)*(g + gb)")
    with pytest.raises(FreeIndexPresent):
        parse_expression(CR, "Re(phi[;a])")


def test_reserved_index_letters_rejected():
    for text in ("phi[;i]", "phi[;m]", "delta[n,a~]"):
        with pytest.raises(SourceSyntaxError):
            parse_expression(CR, text)


def test_mode_separates_vocabularies():
    with pytest.raises(SourceSyntaxError):
        parse_expression(CR, "Ric[a,b]")
    with pytest.raises(SourceSyntaxError):
        parse_expression(RIEM, "B2[a,b~]")
    with pytest.raises(SourceSyntaxError):
        parse_expression(RIEM, "v[;a~]")


def test_rank_mismatch_rejected():
    with pytest.raises(RankMismatch):
        parse_expression(CR, "delta[a]")
    with pytest.raises(RankMismatch):
        parse_expression(CR, "S[a,b~]")
    with pytest.raises(RankMismatch):
        parse_expression(RIEM, "Ric[j]")


def test_free_index_mismatch_across_terms():
    with pytest.raises(FreeIndexMismatch):
        parse_expression(CR, "phi[;a] + phi[;0]")


def test_division_rules():
    with pytest.raises(SourceSyntaxError):
        parse_expression(CR, "phi/phi")
    with pytest.raises(SourceSyntaxError):
        parse_expression(CR, "phi/0")
    assert parse_expression(CR, "phi/2") == parse_expression(CR, "(1/2)*phi")
    assert parse_expression(CR, "8/2/2") == parse_expression(CR, "2")


def test_syntax_errors_carry_position():
    with pytest.raises(SourceSyntaxError) as err:
        parse_expression(CR, "phi phi")
    assert err.value.line == 1
    assert err.value.col == 5
    with pytest.raises(SourceSyntaxError):
        parse_expression(CR, "phi[;a")
    with pytest.raises(SourceSyntaxError):
        parse_expression(CR, "phi +")
    with pytest.raises(SourceSyntaxError):
        parse_expression(CR, "bogus[a]")


def test_parse_rule():
    lhs, rhs = parse_rule(CR, "phi[;b~,a] => phi[;a,b~] - i*delta[a,b~]*phi[;0]")
    assert len(lhs.terms) == 1
    assert len(rhs.terms) == 2
    with pytest.raises(SourceSyntaxError):
        parse_rule(CR, "phi => phi => phi")
    with pytest.raises(SourceSyntaxError):
        parse_rule(CR, "phi + phi")


def test_parse_coefficient():
    assert parse_coefficient(CR, "-(m + 1)") == -(Coeff.dim() + Coeff.rational(1))
    assert parse_coefficient(CR, "(m + 2)/2") == (Coeff.dim() + Coeff.rational(2)) / Coeff.rational(2)
    assert parse_coefficient(CR, "i") == COEFF_I
    with pytest.raises(SourceSyntaxError):
        parse_coefficient(CR, "phi")


def test_as_coefficient():
    assert as_coefficient(parse_expression(CR, "3 - 1")) == Coeff.rational(2)
    assert as_coefficient(parse_expression(CR, "phi")) is None
    assert as_coefficient(parse_expression(CR, "phi - phi")) == Coeff.rational(0)


def test_powers_round_trip():
    e = parse_expression(CR, "phi^-2*phi[;a]*phi[;s]*phi[;s~]")
    assert parse_expression(CR, format_expression(e)) == e
    assert "phi^-2" in format_expression(e)


SCALAR_PIECES = [
    "phi",
    "phi^2",
    "phi^-1*phi[;s]*phi[;s~]",
    "i*phi[;0]",
    "S",
    "g*gb",
    "B2[s,t~]*B2[t,s~]",
    "phi[;s,t]*phi[;s~,t~]",
    "R[s,t~]*phi[;t]*phi[;s~]",
    "C[s]*C[s~]",
]


@given(
    st.lists(
        st.tuples(st.integers(-9, 9), st.sampled_from(SCALAR_PIECES)),
        min_size=1,
        max_size=5,
    )
)
def test_scalar_round_trip_property(parts):
    text = " + ".join(f"({c})*{piece}" for c, piece in parts)
    e = parse_expression(CR, text)
    assert parse_expression(CR, format_expression(e)) == e


VECTOR_PIECES = [
    "phi[;a]",
    "C[a]",
    "phi^-1*A[a]",
    "B2[a,s~]*phi[;s]",
    "phi[;a,s,s~]",
    "g*phi[;a]",
]


@given(
    st.lists(
        st.tuples(st.integers(-9, 9), st.sampled_from(VECTOR_PIECES)),
        min_size=1,
        max_size=4,
    )
)
def test_vector_round_trip_property(parts):
    text = " + ".join(f"({c})*{piece}" for c, piece in parts)
    e = parse_expression(CR, text)
    assert parse_expression(CR, format_expression(e)) == e


def test_read_data_file(tmp_path):
    p = tmp_path / "sample.rules"
    p.write_text(
        "# leading comment\n"
        "mode: cr\n"
        "\n"
        "first | axiom | Lemma 0.1 | phi[;a,b] => phi[;b,a]\n"
        "second | equation | Lemma 0.2 | phi + \\\n"
        "    phi => 2*phi  # trailing note\n"
    )
    mode, entries = read_data_file(p)
    assert mode == "cr"
    assert len(entries) == 2
    lineno, fields = entries[0]
    assert lineno == 4
    assert fields == ["first", "axiom", "Lemma 0.1", "phi[;a,b] => phi[;b,a]"]
    lineno, fields = entries[1]
    assert lineno == 5
    assert fields[3] == "phi + phi => 2*phi"


def test_read_data_file_riemannian_header(tmp_path):
    p = tmp_path / "sample.rules"
    p.write_text("mode: riemannian\nr | axiom | X | v[;a,b] => v[;b,a]\n")
    mode, _ = read_data_file(p)
    assert mode == "riem"


def test_read_data_file_errors(tmp_path):
    missing_header = tmp_path / "a.rules"
    missing_header.write_text("first | axiom | X | phi => phi\n")
    with pytest.raises(CatalogError):
        read_data_file(missing_header)
    bad_mode = tmp_path / "b.rules"
    bad_mode.write_text("mode: euclidean\n")
    with pytest.raises(CatalogError):
        read_data_file(bad_mode)
    dangling = tmp_path / "c.rules"
    dangling.write_text("mode: cr\nx | y | z | phi \\\n")
    with pytest.raises(CatalogError):
        read_data_file(dangling)
    with pytest.raises(CatalogError):
        read_data_file(tmp_path / "absent.rules")
