from __future__ import annotations

import random

import pytest

from crcheck.coeff import COEFF_DIM, COEFF_I, COEFF_ONE, Coeff
from crcheck.errors import (
    DifferentiatedCurvature,
    FreeIndexMismatch,
    FreeIndexPresent,
    MalformedIndex,
    ModeError,
    RankMismatch,
)
from crcheck.expr import (
    REEB,
    Atom,
    Expression,
    Index,
    antihol,
    build_expression,
    build_monomial,
    canonicalize,
    conjugate,
    contract_delta,
    differentiate,
    free_index_set,
    hol,
    multiply,
    real,
    real_part,
    rename_names,
    validate_monomial,
)

PHI_LICENSES = frozenset(
    ("phi", p, c) for p in (0, 1) for c in ("h", "a")
)


def phi(*tail: Index, power: int = 1) -> Atom:
    if power != 1:
        return Atom("phi", (), (), power)
    return Atom("phi", (), tuple(tail), 1)


def delta(p: Index, q: Index) -> Atom:
    return Atom("delta", (p, q), ())


class TestValidation:
    def test_wrong_primary_arity(self):
        with pytest.raises(RankMismatch):
            validate_monomial("cr", (Atom("R", (hol("a"),), ()),))

    def test_wrong_primary_class(self):
        with pytest.raises(RankMismatch):
            validate_monomial("cr", (Atom("R", (antihol("a"), hol("b")), ()),))

    def test_head_mode_mismatch(self):
        with pytest.raises(ModeError):
            validate_monomial("riem", (Atom("B2", (hol("a"), antihol("b")), ()),))

    def test_triple_occurrence_rejected(self):
        atoms = (phi(hol("s")), phi(antihol("s")), phi(hol("s")))
        with pytest.raises(RankMismatch):
            validate_monomial("cr", atoms)

    def test_same_chirality_pair_rejected(self):
        with pytest.raises(RankMismatch):
            validate_monomial("cr", (phi(hol("s")), phi(hol("s"))))

    def test_riem_repeated_pair_allowed(self):
        validate_monomial("riem", (Atom("v", (), (real("s"),)), Atom("v", (), (real("s"),))))

    def test_power_on_derivative_atom_rejected(self):
        with pytest.raises(RankMismatch):
            validate_monomial("cr", (Atom("phi", (), (hol("a"),), 2),))

    def test_negative_power_needs_invertible_head(self):
        with pytest.raises(RankMismatch):
            validate_monomial("cr", (Atom("g", (), (), -1),))

    def test_transverse_index_only_in_tails(self):
        with pytest.raises(MalformedIndex):
            validate_monomial("cr", (Atom("A", (REEB,), ()),))


class TestFreeIndices:
    def test_contraction_pair_not_free(self):
        atoms = (phi(hol("s")), phi(antihol("s")), phi(hol("a")))
        assert free_index_set(atoms) == frozenset({hol("a")})

    def test_reeb_never_free(self):
        assert free_index_set((phi(REEB),)) == frozenset()


class TestContractDelta:
    def test_partner_renamed(self):
        atoms = (delta(hol("a"), antihol("b")), phi(hol("b")))
        c, out = contract_delta("cr", COEFF_ONE, atoms)
        assert out == (phi(hol("a")),)
        assert c == COEFF_ONE

    def test_full_trace_gives_dimension(self):
        c, out = contract_delta("cr", COEFF_ONE, (delta(hol("s"), antihol("s")),))
        assert out == ()
        assert c == COEFF_DIM

    def test_delta_chain(self):
        atoms = (
            delta(hol("a"), antihol("s")),
            delta(hol("s"), antihol("b")),
        )
        c, out = contract_delta("cr", COEFF_ONE, atoms)
        assert out == (delta(hol("a"), antihol("b")),)

    def test_free_delta_kept(self):
        atoms = (delta(hol("a"), antihol("b")), phi(hol("c")))
        _, out = contract_delta("cr", COEFF_ONE, atoms)
        assert len(out) == 2

    def test_riem_trace(self):
        c, out = contract_delta(
            "riem", COEFF_ONE, (Atom("delta", (real("s"), real("s")), ()),)
        )
        assert out == ()
        assert c == COEFF_DIM


class TestCanonicalize:
    def test_dummy_renaming(self):
        a = canonicalize("cr", (phi(hol("s")), phi(antihol("s"))))
        b = canonicalize("cr", (phi(hol("t")), phi(antihol("t"))))
        assert a == b

    def test_atom_order_irrelevant(self):
        a = canonicalize("cr", (phi(hol("s")), phi(antihol("s"), hol("a"))))
        b = canonicalize("cr", (phi(antihol("s"), hol("a")), phi(hol("s"))))
        assert a == b

    def test_license_required_for_slot_swap(self):
        x = (phi(hol("a"), hol("b")),)
        y = (phi(hol("b"), hol("a")),)
        assert canonicalize("cr", x) != canonicalize("cr", y)
        assert canonicalize("cr", x, PHI_LICENSES) == canonicalize("cr", y, PHI_LICENSES)

    def test_license_never_crosses_classes(self):
        x = (phi(hol("a"), antihol("b")),)
        y = (phi(antihol("b"), hol("a")),)
        assert canonicalize("cr", x, PHI_LICENSES) != canonicalize("cr", y, PHI_LICENSES)

    def test_license_never_moves_transverse(self):
        x = (phi(hol("a"), REEB),)
        y = (phi(REEB, hol("a")),)
        assert canonicalize("cr", x, PHI_LICENSES) != canonicalize("cr", y, PHI_LICENSES)

    def test_riem_symmetric_ricci(self):
        x = (Atom("Ric", (real("a"), real("s")), ()), Atom("v", (), (real("s"),)))
        y = (Atom("Ric", (real("s"), real("a")), ()), Atom("v", (), (real("s"),)))
        assert canonicalize("riem", x) == canonicalize("riem", y)

    @pytest.mark.parametrize("seed", range(25))
    def test_shuffle_and_rename_invariance(self, seed):
        rng = random.Random(seed)
        atoms = (
            phi(power=-1),
            phi(hol("s"), hol("t")),
            phi(antihol("s")),
            phi(antihol("t")),
            Atom("R", (hol("u"), antihol("u")), ()),
            phi(hol("a"), antihol("b"), REEB),
        )
        ref = canonicalize("cr", atoms, PHI_LICENSES)
        shuffled = list(atoms)
        rng.shuffle(shuffled)
        mapping = dict(zip("stu", rng.sample("cdefgjkl", 3)))
        renamed = rename_names(tuple(shuffled), mapping)
        assert canonicalize("cr", renamed, PHI_LICENSES) == ref

    def test_intra_atom_pair(self):
        a = canonicalize("cr", (phi(hol("s"), antihol("s")),))
        b = canonicalize("cr", (phi(hol("k"), antihol("k")),))
        assert a == b


class TestConjugate:
    def test_involution(self):
        e = build_expression(
            "cr",
            [
                (COEFF_I, (phi(hol("a"), REEB), phi(antihol("s")), phi(hol("s")))),
            ],
        )
        assert conjugate(conjugate(e)) == e

    def test_b2_slots_swap(self):
        e = build_expression(
            "cr", [(COEFF_ONE, (Atom("B2", (hol("a"), antihol("b")), ()),))]
        )
        out = conjugate(e)
        (term,) = out.terms
        (atom,) = term.atoms
        assert atom.primary == (hol("b"), antihol("a"))

    def test_g_pairs_with_gb(self):
        e = build_expression("cr", [(COEFF_ONE, (Atom("g", (), ()),))])
        assert conjugate(e).terms[0].atoms[0].head == "gb"

    def test_coefficient_conjugated(self):
        e = build_expression("cr", [(COEFF_I, (Atom("S", (), ()),))])
        assert conjugate(e).terms[0].coeff == -COEFF_I

    def test_real_part_requires_scalar(self):
        e = build_expression("cr", [(COEFF_ONE, (phi(hol("a")),))])
        with pytest.raises(FreeIndexPresent):
            real_part(e)


class TestDifferentiate:
    def test_product_rule(self):
        e = build_expression(
            "cr", [(COEFF_ONE, (phi(hol("s")), phi(antihol("s"))))]
        )
        out = differentiate(e, antihol("b"))
        assert len(out.terms) == 2

    def test_power_rule(self):
        e = build_expression("cr", [(COEFF_ONE, (phi(power=-1),))])
        out = differentiate(e, hol("a"))
        (term,) = out.terms
        assert term.coeff == Coeff.rational(-1)
        assert any(a.power == -2 for a in term.atoms)

    def test_first_power_drops_base(self):
        e = build_expression("cr", [(COEFF_ONE, (Atom("phi", (), ()),))])
        out = differentiate(e, hol("a"))
        (term,) = out.terms
        assert term.atoms == (phi(hol("a")),)

    def test_delta_is_parallel(self):
        e = build_expression(
            "cr", [(COEFF_ONE, (delta(hol("a"), antihol("b")),))]
        )
        assert differentiate(e, hol("c")).is_zero()

    def test_curvature_raises(self):
        e = build_expression(
            "cr", [(COEFF_ONE, (Atom("R", (hol("a"), antihol("b")), ()),))]
        )
        with pytest.raises(DifferentiatedCurvature):
            differentiate(e, hol("c"))

    def test_named_head_raises(self):
        e = build_expression("cr", [(COEFF_ONE, (Atom("g", (), ()),))])
        with pytest.raises(DifferentiatedCurvature):
            differentiate(e, hol("c"))

    def test_freshness_enforced(self):
        e = build_expression("cr", [(COEFF_ONE, (phi(hol("a")),))])
        with pytest.raises(MalformedIndex):
            differentiate(e, antihol("a"))
        out = differentiate(e, antihol("a"), allow_contraction=True)
        (term,) = out.terms
        assert free_index_set(term.atoms) == frozenset()

    def test_reeb_direction(self):
        e = build_expression("cr", [(COEFF_ONE, (phi(REEB),))])
        out = differentiate(e, REEB)
        assert out.terms[0].atoms == (phi(REEB, REEB),)


class TestExpressionBuild:
    def test_like_terms_merge(self):
        e = build_expression(
            "cr",
            [
                (COEFF_ONE, (phi(hol("s")), phi(antihol("s")))),
                (COEFF_ONE, (phi(hol("t")), phi(antihol("t")))),
            ],
        )
        assert len(e.terms) == 1
        assert e.terms[0].coeff == Coeff.rational(2)

    def test_cancellation(self):
        e = build_expression(
            "cr",
            [
                (COEFF_ONE, (phi(hol("s")), phi(antihol("s")))),
                (Coeff.rational(-1), (phi(hol("t")), phi(antihol("t")))),
            ],
        )
        assert e.is_zero()

    def test_free_mismatch_raises(self):
        with pytest.raises(FreeIndexMismatch):
            build_expression(
                "cr",
                [
                    (COEFF_ONE, (phi(hol("a")),)),
                    (COEFF_ONE, (phi(hol("b")),)),
                ],
            )

    def test_power_merging(self):
        m = build_monomial(
            "cr", COEFF_ONE, (phi(power=2), phi(power=-1), phi(power=-1))
        )
        assert m is not None
        assert m.atoms == ()

    def test_multiply_freshens_dummies(self):
        e = build_expression("cr", [(COEFF_ONE, (phi(hol("s")), phi(antihol("s"))))])
        sq = multiply(e, e)
        (term,) = sq.terms
        assert len(term.atoms) == 4
        validate_monomial("cr", term.atoms)

    def test_scalar_times_free_vector(self):
        e = build_expression("cr", [(COEFF_ONE, (Atom("g", (), ()),))])
        f = build_expression("cr", [(COEFF_ONE, (phi(hol("a")),))])
        out = multiply(e, f)
        assert out.free_indices == frozenset({hol("a")})
