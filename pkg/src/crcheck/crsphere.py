"""Exact-jet pseudohermitian numerics on the unit sphere S^{2m+1}.

The sphere sits in C^{m+1} with real coordinates stacked (x..., y...), so
z_j = q_j + i q_{j+m+1} and the complex structure acts by J(x, y) = (-y, x).
The contact form is theta = 2 sum(x_j dy_j - y_j dx_j) with Reeb field
T = (1/2) J z.  A unitary frame of the holomorphic tangent space is built
by Gram-Schmidt against z, giving frame fields whose jets carry enough
orders for the Webster connection, its curvature, and third covariant
derivatives of scalars.

Derivative slots are indexed 0 for the Reeb direction, 1..m for the
holomorphic frame, m+1..2m for the conjugates, matching the rewrite
engine's slot order: d2[A][B] is the derivative of slot A in direction B.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import FrameDegeneracy
from .jets import Jet3, direction
from .residual import (
    TOL_FIRST_ORDER,
    TOL_HIGHER_ORDER,
    AdjudicationMeasurement,
    ResidualReport,
    rng_for,
    worst,
)
from .sphere import PolySquareField, random_unit, unit_jets

__all__ = [
    "CRFrame",
    "CRDerivs",
    "CRHeads",
    "cr_frame",
    "cr_derivs",
    "cr_heads",
    "webster_ricci",
    "ModelPhi",
    "HolLinear",
    "check_cr_structure",
    "check_cr_curvature",
    "check_cr_axioms",
    "check_cr_conjugation",
    "check_cr_model",
    "check_cr_model_sums",
    "check_cr_lemma_weight",
    "check_cr_frame_covariance",
    "check_cr_fd",
]

_INV2S2 = 1.0 / (2.0 * math.sqrt(2.0))
_S2 = math.sqrt(2.0)


def _cdot(a: Sequence[Jet3], b: Sequence[Jet3]) -> Jet3:
    """Hermitian pairing sum a_j conj(b_j) of complex jet vectors."""
    out = a[0] * b[0].conj()
    for x, y in zip(a[1:], b[1:]):
        out = out + x * y.conj()
    return out


def _pair(form: Sequence[Jet3], vec: Sequence[Jet3]) -> Jet3:
    out = form[0] * vec[0]
    for f, v in zip(form[1:], vec[1:]):
        out = out + f * v
    return out


def _bracket(x: Sequence[Jet3], y: Sequence[Jet3]) -> list[Jet3]:
    return [direction(yk, list(x)) - direction(xk, list(y)) for xk, yk in zip(x, y)]


@dataclass
class CRFrame:
    """Frame, coframe, connection, and structure residuals at one point."""

    x: np.ndarray
    m: int
    ys: list[Jet3]
    zhat: list[Jet3]
    reeb: list[Jet3]
    hol: list[list[Jet3]]
    theta: list[Jet3]
    cotheta: list[list[Jet3]]
    omega: list[list[list[Jet3]]]
    quality: dict[str, float] = field(default_factory=dict)

    @property
    def nslots(self) -> int:
        return 2 * self.m + 1

    def vector(self, b: int) -> list[Jet3]:
        """Frame field for slot index b (0 Reeb, 1..m hol, m+1..2m conj)."""
        if b == 0:
            return self.reeb
        if b <= self.m:
            return self.hol[b - 1]
        return [c.conj() for c in self.hol[b - self.m - 1]]

    def conj_slot(self, b: int) -> int:
        if b == 0:
            return 0
        return b + self.m if b <= self.m else b - self.m

    def connection(self, alpha: int, gamma: int, b: int) -> Jet3:
        """omega_alpha^gamma evaluated on the frame field of slot b."""
        return self.omega[alpha][gamma][b]

    def connection_bar(self, alpha: int, gamma: int, b: int) -> Jet3:
        """omega_abar^gbar on slot b, by conjugating the unbarred form."""
        return self.omega[alpha][gamma][self.conj_slot(b)].conj()


def _default_candidates(zv: np.ndarray) -> list[np.ndarray]:
    n = zv.size
    drop = int(np.argmax(np.abs(zv)))
    eye = np.eye(n, dtype=complex)
    return [eye[j] for j in range(n) if j != drop]


def cr_frame(
    x: np.ndarray,
    m: int,
    candidates: Sequence[np.ndarray] | None = None,
    retries: int = 3,
) -> CRFrame:
    """Build the frame data at x, retrying with rotated completions.

    Gram-Schmidt against the direction of z can lose rank when a candidate
    is nearly parallel to the span already used; each retry rotates the
    candidate set by a fixed unitary before giving up with FrameDegeneracy.
    """
    d = x.size
    if d != 2 * m + 2:
        raise ValueError(f"point dimension {d} does not match m={m}")
    ys, _, u = unit_jets(x)
    zhat = [u[j] + u[j + m + 1] * 1j for j in range(m + 1)]
    zv = np.array([z.value for z in zhat])
    cands = (
        [np.asarray(c, dtype=complex) for c in candidates]
        if candidates is not None
        else _default_candidates(zv)
    )
    if len(cands) != m:
        raise ValueError(f"need {m} candidate completions, got {len(cands)}")

    last_error: FrameDegeneracy | None = None
    us: list[list[Jet3]] | None = None
    for attempt in range(retries + 1):
        if attempt == 0:
            trial = cands
        else:
            q, _ = np.linalg.qr(
                rng_for(attempt, 97).normal(size=(m + 1, m + 1))
                + 1j * rng_for(attempt, 98).normal(size=(m + 1, m + 1))
            )
            trial = [q @ c for c in cands]
        try:
            basis = [zhat]
            for cand in trial:
                w = [Jet3.const(complex(cj), d) for cj in cand]
                for prev in basis:
                    coef = _cdot(w, prev)
                    w = [wj - coef * pj for wj, pj in zip(w, prev)]
                n2 = _cdot(w, w).real_part()
                if n2.value < 1e-6:
                    raise FrameDegeneracy(
                        f"candidate completion lost rank at {x!r}"
                    )
                inv = n2.sqrt().recip()
                basis.append([wj * inv for wj in w])
            us = basis[1:]
            break
        except FrameDegeneracy as exc:
            last_error = exc
            us = None
    if us is None:
        assert last_error is not None
        raise last_error

    # Real embeddings: W = Re/Im stacking of u, JW the embedding of i u.
    hol: list[list[Jet3]] = []
    cotheta: list[list[Jet3]] = []
    for ua in us:
        wre = [ua[j].real_part() for j in range(m + 1)]
        wim = [ua[j].imag_part() for j in range(m + 1)]
        w = wre + wim
        jw = [wim[j] * (-1.0) for j in range(m + 1)] + wre
        hol.append([(wi + jwi * (-1j)) * _INV2S2 for wi, jwi in zip(w, jw)])
        cotheta.append([(wi + jwi * 1j) * _S2 for wi, jwi in zip(w, jw)])
    jy = [ys[m + 1 + j] * (-1.0) for j in range(m + 1)] + [ys[j] for j in range(m + 1)]
    reeb = [c * 0.5 for c in jy]
    theta = [c * 2.0 for c in jy]

    fr = CRFrame(
        x=x,
        m=m,
        ys=ys,
        zhat=zhat,
        reeb=reeb,
        hol=hol,
        theta=theta,
        cotheta=cotheta,
        omega=[],
    )

    vecs = [fr.vector(b) for b in range(2 * m + 1)]
    br: dict[tuple[int, int], list[Jet3]] = {}

    def cartan(form: Sequence[Jet3], i: int, j: int) -> Jet3:
        if (i, j) not in br:
            br[(i, j)] = _bracket(vecs[i], vecs[j])
        x_, y_ = vecs[i], vecs[j]
        return (
            direction(_pair(form, y_), x_)
            - direction(_pair(form, x_), y_)
            - _pair(form, br[(i, j)])
        )

    # dtheta^beta on mixed, Reeb, and holomorphic pairs.
    mixed = [
        [[cartan(cotheta[b], 1 + g, m + 1 + dd) for dd in range(m)] for g in range(m)]
        for b in range(m)
    ]
    reeb_hol = [[cartan(cotheta[b], 0, 1 + g) for g in range(m)] for b in range(m)]
    reeb_bar = [[cartan(cotheta[b], 0, m + 1 + g) for g in range(m)] for b in range(m)]
    holhol = [
        [[cartan(cotheta[b], 1 + g, 1 + dd) for dd in range(m)] for g in range(m)]
        for b in range(m)
    ]

    omega: list[list[list[Jet3]]] = []
    for a in range(m):
        rows = []
        for g in range(m):
            entries = [reeb_hol[g][a] * (-1.0)]
            entries += [mixed[a][g][dd].conj() * (-1.0) for dd in range(m)]
            entries += [mixed[g][a][dd] for dd in range(m)]
            rows.append(entries)
        omega.append(rows)
    fr.omega = omega

    # Structure residuals, all expected at round-off.
    q: dict[str, float] = {}
    lv = [
        [cartan(theta, 1 + g, m + 1 + dd).value - (1j if g == dd else 0.0)
         for dd in range(m)]
        for g in range(m)
    ]
    q["levi"] = float(np.abs(np.array(lv)).max())
    q["levi-holpair"] = max(
        abs(cartan(theta, 1 + g, 1 + dd).value)
        for g in range(m)
        for dd in range(m)
    )
    q["levi-reeb"] = max(abs(cartan(theta, 0, 1 + g).value) for g in range(m))
    duality = [abs(_pair(theta, reeb).value - 1.0)]
    for g in range(m):
        duality.append(abs(_pair(theta, vecs[1 + g]).value))
        for b in range(m):
            want = 1.0 if b == g else 0.0
            duality.append(abs(_pair(cotheta[b], vecs[1 + g]).value - want))
            duality.append(abs(_pair(cotheta[b], vecs[m + 1 + g]).value))
            duality.append(abs(_pair(cotheta[b], reeb).value))
    q["coframe"] = max(duality)
    q["torsion"] = max(
        abs(reeb_bar[b][g].value) for b in range(m) for g in range(m)
    )
    q["hol-pair"] = max(
        abs(
            holhol[b][g][dd].value
            - omega[g][b][1 + dd].value
            + omega[dd][b][1 + g].value
        )
        for b in range(m)
        for g in range(m)
        for dd in range(m)
    )
    q["metric-reeb"] = max(
        abs(omega[g][b][0].value + np.conj(omega[b][g][0].value))
        for b in range(m)
        for g in range(m)
    )
    unitary = []
    for a in range(m):
        unitary.append(abs(_cdot(us[a], zhat).value))
        for b in range(m):
            want = 1.0 if a == b else 0.0
            unitary.append(abs(_cdot(us[a], us[b]).value - want))
    q["unitary"] = max(unitary)
    fr.quality = q
    return fr


def webster_ricci(fr: CRFrame) -> np.ndarray:
    """Ricci tensor of the Webster connection on holomorphic pairs.

    Entry [g, d] is the trace over alpha of
    (d omega_a^a - omega_a^e wedge omega_e^a)(T_g, T_dbar).
    """
    m = fr.m
    vecs = [fr.vector(b) for b in range(2 * m + 1)]
    ric = np.zeros((m, m), dtype=complex)
    for g in range(m):
        for dd in range(m):
            xg, yd = vecs[1 + g], vecs[m + 1 + dd]
            brv = _bracket(xg, yd)
            coefs = [_pair(fr.theta, brv)]
            coefs += [_pair(fr.cotheta[e], brv) for e in range(m)]
            coefs += [
                _pair([c.conj() for c in fr.cotheta[e]], brv) for e in range(m)
            ]
            for a in range(m):
                om_field = fr.omega[a][a]
                dom = (
                    direction(om_field[m + 1 + dd], xg)
                    - direction(om_field[1 + g], yd)
                )
                along = coefs[0] * om_field[0]
                for e in range(m):
                    along = along + coefs[1 + e] * om_field[1 + e]
                    along = along + coefs[1 + m + e] * om_field[1 + m + e]
                wedge = 0.0 + 0.0j
                for e in range(m):
                    wedge += (
                        fr.omega[a][e][1 + g].value
                        * fr.omega[e][a][m + 1 + dd].value
                        - fr.omega[a][e][m + 1 + dd].value
                        * fr.omega[e][a][1 + g].value
                    )
                ric[g, dd] += dom.value - along.value - wedge
    return ric


@dataclass
class CRDerivs:
    """Covariant derivatives of one scalar through third order."""

    value: complex
    d1: list[Jet3]
    d2: list[list[Jet3]]
    d3: np.ndarray

    def v1(self) -> np.ndarray:
        return np.array([j.value for j in self.d1])

    def v2(self) -> np.ndarray:
        n = len(self.d1)
        return np.array(
            [[self.d2[a][b].value for b in range(n)] for a in range(n)]
        )


def cr_derivs(fr: CRFrame, u: Jet3) -> CRDerivs:
    """Covariant ladder: u_A, u_{A,B}, u_{A,B,C} in engine slot order.

    The Reeb field is parallel; holomorphic slots correct by the
    connection, conjugate slots by its conjugate.
    """
    m = fr.m
    nb = fr.nslots
    vecs = [fr.vector(b) for b in range(nb)]
    d1 = [direction(u, vecs[b]) for b in range(nb)]

    def correction(a: int, b: int, table: Sequence) -> Jet3 | None:
        """Gamma_{b,a}^c table[c] summed; None when slot a is Reeb."""
        if a == 0:
            return None
        if a <= m:
            out = fr.connection(a - 1, 0, b) * table[1]
            for g in range(1, m):
                out = out + fr.connection(a - 1, g, b) * table[1 + g]
            return out
        out = fr.connection_bar(a - m - 1, 0, b) * table[m + 1]
        for g in range(1, m):
            out = out + fr.connection_bar(a - m - 1, g, b) * table[m + 1 + g]
        return out

    d2: list[list[Jet3]] = []
    for a in range(nb):
        row = []
        for b in range(nb):
            term = direction(d1[a], vecs[b])
            corr = correction(a, b, d1)
            row.append(term if corr is None else term - corr)
        d2.append(row)

    # Third order only ever needs values, so drop to plain arrays: the
    # directional part is a dot with the frame components and the
    # Christoffel part contracts connection values into d2 values.
    vval = [np.array([c.value for c in v]) for v in vecs]
    v2 = np.array([[d2[a][b].value for b in range(nb)] for a in range(nb)])

    def gamma(a: int, b: int) -> list[tuple[int, complex]]:
        if a == 0:
            return []
        if a <= m:
            return [
                (1 + g, fr.omega[a - 1][g][b].value) for g in range(m)
            ]
        cb = fr.conj_slot(b)
        return [
            (m + 1 + g, np.conj(fr.omega[a - m - 1][g][cb].value))
            for g in range(m)
        ]

    gam = [[gamma(a, b) for b in range(nb)] for a in range(nb)]
    d3 = np.zeros((nb, nb, nb), dtype=complex)
    for a in range(nb):
        for b in range(nb):
            grad = d2[a][b].grad
            for c in range(nb):
                val = vval[c] @ grad
                for dd, cf in gam[a][c]:
                    val = val - cf * v2[dd, b]
                for dd, cf in gam[b][c]:
                    val = val - cf * v2[a, dd]
                d3[a, b, c] = val
    return CRDerivs(value=u.value, d1=d1, d2=d2, d3=d3)


@dataclass
class CRHeads:
    """Named quantities derived from the ladder of phi at one point."""

    m: int
    phi: complex
    phi0: complex
    pa: np.ndarray
    pab: np.ndarray
    p2: complex
    g: complex
    gb: complex
    b2: np.ndarray
    a_up: np.ndarray
    a_dn: np.ndarray
    b_up: np.ndarray
    b_dn: np.ndarray
    c_up: np.ndarray
    c_dn: np.ndarray
    s: complex


def cr_heads(dv: CRDerivs, m: int) -> CRHeads:
    phi = dv.value
    phi0 = dv.d1[0].value
    pa = np.array([dv.d1[1 + a].value for a in range(m)])
    pab = np.array([dv.d1[m + 1 + a].value for a in range(m)])
    p2 = complex(pa @ pab)
    g = 0.5 + 0.5 * phi + p2 / phi + 1j * phi0
    gb = g - 2j * phi0
    v2 = dv.v2()
    b2 = np.array(
        [
            [
                v2[1 + a, m + 1 + b]
                - pa[a] * pab[b] / phi
                - (0.5 * (g - phi) if a == b else 0.0)
                for b in range(m)
            ]
            for a in range(m)
        ]
    )
    a_up = np.array(
        [sum(v2[1 + a, 1 + s] * pab[s] for s in range(m)) for a in range(m)]
    )
    a_dn = np.array(
        [
            sum(v2[m + 1 + a, m + 1 + s] * pa[s] for s in range(m))
            for a in range(m)
        ]
    )
    b_up = b2 @ pa
    b_dn = b2.T @ pab
    c_up = np.array(
        [1j * v2[1 + a, 0] + 0.5 * gb * pa[a] / phi for a in range(m)]
    )
    c_dn = np.array(
        [-1j * v2[m + 1 + a, 0] + 0.5 * g * pab[a] / phi for a in range(m)]
    )
    s = -0.5 * m * (
        v2[0, 0]
        - 0.5
        / phi
        * ((1.0 - phi * phi) / 4.0 + p2 / phi + p2 * p2 / phi**2 + phi0 * phi0)
    )
    return CRHeads(
        m=m,
        phi=phi,
        phi0=phi0,
        pa=pa,
        pab=pab,
        p2=p2,
        g=g,
        gb=gb,
        b2=b2,
        a_up=a_up,
        a_dn=a_dn,
        b_up=b_up,
        b_dn=b_dn,
        c_up=c_up,
        c_dn=c_dn,
        s=s,
    )


class ModelPhi:
    """phi = |cosh t + sinh t z.conj(xi)|^2, the extremal profile."""

    def __init__(self, t: float, xi: np.ndarray):
        if t < 0:
            raise ValueError("profile parameter t must be nonnegative")
        self.t = float(t)
        self.xi = np.asarray(xi, dtype=complex)
        self.m = self.xi.size - 1

    def holomorphic(self, u: Sequence[Jet3]) -> Jet3:
        """The CR function f = z . conj(xi) as a jet."""
        m = self.m
        zc = [u[j] + u[j + m + 1] * 1j for j in range(m + 1)]
        out = zc[0] * np.conj(self.xi[0])
        for j in range(1, m + 1):
            out = out + zc[j] * np.conj(self.xi[j])
        return out

    def __call__(self, u: Sequence[Jet3]) -> Jet3:
        ch, sh = math.cosh(self.t), math.sinh(self.t)
        f = self.holomorphic(u)
        w = f * sh + ch
        return w * w.conj()


class HolLinear:
    """The CR-holomorphic linear function f = z . conj(xi)."""

    def __init__(self, xi: np.ndarray):
        self.model = ModelPhi(0.0, xi)

    def __call__(self, u: Sequence[Jet3]) -> Jet3:
        return self.model.holomorphic(u)


def _sample_frame(m: int, rng: np.random.Generator) -> CRFrame:
    return cr_frame(random_unit(rng, 2 * m + 2), m)


def check_cr_structure(
    m: int,
    samples: int = 25,
    seed: int = 0,
    tol: float = TOL_FIRST_ORDER,
) -> list[ResidualReport]:
    """Structure-equation residuals of the frame and connection."""
    keys = (
        "levi",
        "levi-holpair",
        "levi-reeb",
        "coframe",
        "torsion",
        "hol-pair",
        "metric-reeb",
        "unitary",
    )
    acc: dict[str, list[float]] = {k: [] for k in keys}
    for k in range(samples):
        fr = _sample_frame(m, rng_for(seed, 71, k))
        for key in keys:
            acc[key].append(fr.quality[key])
    return [worst(f"cr-structure-{k}", acc[k], tol, seed) for k in keys]


def check_cr_curvature(
    m: int,
    samples: int = 10,
    seed: int = 0,
    tol: float = TOL_HIGHER_ORDER,
) -> list[ResidualReport]:
    """Webster Ricci curvature against its constant round value."""
    pin: list[float] = []
    scal: list[float] = []
    want = 0.5 * (m + 1)
    for k in range(samples):
        fr = _sample_frame(m, rng_for(seed, 72, k))
        ric = webster_ricci(fr)
        pin.append(float(np.abs(ric - want * np.eye(m)).max()))
        scal.append(abs(complex(np.trace(ric)) - 0.5 * m * (m + 1)))
    return [
        worst("cr-ricci-pin", pin, tol, seed),
        worst("cr-scalar-curvature", scal, tol, seed),
    ]


def _axiom_residuals(
    dv: CRDerivs, m: int, acc: dict[str, list[float]]
) -> None:
    v2 = dv.v2()
    d3 = dv.d3
    phi0 = dv.d1[0].value
    want_r = 0.5 * (m + 1)
    h = list(range(1, m + 1))
    ab = list(range(m + 1, 2 * m + 1))

    acc["cr-axiom-R1"].append(
        max(
            abs(
                v2[a, m + b]
                - v2[m + b, a]
                - (1j * phi0 if a == b else 0.0)
            )
            for a in h
            for b in h
        )
    )
    acc["cr-axiom-R2"].append(max(abs(v2[a, b] - v2[b, a]) for a in h for b in h))
    acc["cr-axiom-R2c"].append(
        max(abs(v2[a, b] - v2[b, a]) for a in ab for b in ab)
    )
    acc["cr-axiom-R2b"].append(
        max(abs(d3[a, b, c] - d3[a, c, b]) for a in h + ab for b in h for c in h)
    )
    acc["cr-axiom-R2bc"].append(
        max(
            abs(d3[a, b, c] - d3[a, c, b])
            for a in h + ab
            for b in ab
            for c in ab
        )
    )
    acc["cr-axiom-R3a"].append(max(abs(v2[0, a] - v2[a, 0]) for a in h + ab))
    acc["cr-axiom-R3b"].append(
        max(
            abs(d3[a, 0, b] - d3[a, b, 0])
            for a in range(2 * m + 1)
            for b in h + ab
        )
    )
    r4 = []
    r4c = []
    r4b = []
    for a in h:
        lhs = sum(d3[a, s, m + s] for s in range(1, m + 1))
        rhs = (
            sum(d3[s, m + s, a] for s in range(1, m + 1))
            + 1j * v2[a, 0]
            + want_r * dv.d1[a].value
        )
        r4.append(abs(lhs - rhs))
        lhs_b = sum(d3[a, m + s, s] for s in range(1, m + 1))
        rhs_b = (
            sum(d3[s, m + s, a] for s in range(1, m + 1))
            - (m - 1) * 1j * v2[a, 0]
        )
        r4b.append(abs(lhs_b - rhs_b))
    for a in ab:
        lhs = sum(d3[a, m + s, s] for s in range(1, m + 1))
        rhs = (
            sum(d3[m + s, s, a] for s in range(1, m + 1))
            - 1j * v2[a, 0]
            + want_r * dv.d1[a].value
        )
        r4c.append(abs(lhs - rhs))
    acc["cr-axiom-R4"].append(max(r4))
    acc["cr-axiom-R4c"].append(max(r4c))
    acc["cr-axiom-R4b"].append(max(r4b))


_AXIOM_KEYS = (
    "cr-axiom-R1",
    "cr-axiom-R2",
    "cr-axiom-R2c",
    "cr-axiom-R2b",
    "cr-axiom-R2bc",
    "cr-axiom-R3a",
    "cr-axiom-R3b",
    "cr-axiom-R4",
    "cr-axiom-R4c",
    "cr-axiom-R4b",
)


def check_cr_axioms(
    m: int,
    fields: int = 20,
    samples: int = 50,
    seed: int = 0,
    tol: float = TOL_HIGHER_ORDER,
) -> list[ResidualReport]:
    """Commutation axioms on random positive fields.

    The Ricci terms use the pinned round value (m+1)/2, so these residuals
    also interlock the curvature normalization with the ladder.
    """
    d = 2 * m + 2
    acc: dict[str, list[float]] = {k: [] for k in _AXIOM_KEYS}
    frames = [_sample_frame(m, rng_for(seed, 74, k)) for k in range(samples)]
    units = [_unit_of(fr) for fr in frames]
    total = 0
    for f in range(fields):
        fld = PolySquareField(rng_for(seed, 73, f), d)
        for fr, uj in zip(frames, units):
            dv = cr_derivs(fr, fld(uj))
            _axiom_residuals(dv, m, acc)
            total += 1
    return [
        ResidualReport(k, total, float(np.abs(acc[k]).max()), tol, seed)
        for k in _AXIOM_KEYS
    ]


def _unit_of(fr: CRFrame) -> list[Jet3]:
    _, _, u = unit_jets(fr.x)
    return u


def check_cr_conjugation(
    m: int,
    samples: int = 10,
    seed: int = 0,
    tol: float = 1e-12,
) -> ResidualReport:
    """Conjugation symmetry of the ladder on real scalars.

    For real phi, barring every slot must conjugate the derivative; the
    conjugate slots run through the conjugated connection, so this is a
    genuine cross-check of the two code paths.
    """
    d = 2 * m + 2
    res: list[float] = []
    nb = 2 * m + 1
    for k in range(samples):
        rng = rng_for(seed, 75, k)
        fld = PolySquareField(rng, d)
        fr = _sample_frame(m, rng)
        dv = cr_derivs(fr, fld(_unit_of(fr)))
        cb = fr.conj_slot
        v1, v2, d3 = dv.v1(), dv.v2(), dv.d3
        worst_here = abs(np.imag(dv.value))
        for a in range(nb):
            worst_here = max(worst_here, abs(v1[cb(a)] - np.conj(v1[a])))
            for b in range(nb):
                worst_here = max(
                    worst_here, abs(v2[cb(a), cb(b)] - np.conj(v2[a, b]))
                )
                for c in range(nb):
                    worst_here = max(
                        worst_here,
                        abs(d3[cb(a), cb(b), cb(c)] - np.conj(d3[a, b, c])),
                    )
        res.append(worst_here)
    return worst("cr-conjugation", res, tol, seed)


def check_cr_model(
    m: int,
    t: float,
    samples: int = 100,
    seed: int = 0,
    tol_first: float = TOL_FIRST_ORDER,
    tol_high: float = TOL_HIGHER_ORDER,
) -> list[ResidualReport]:
    """Model facts for f = z.conj(xi) and phi = |cosh t + sinh t f|^2."""
    d = 2 * m + 2
    ch, sh = math.cosh(t), math.sinh(t)
    acc: dict[str, list[float]] = {
        "cr-model-f-antihol": [],
        "cr-model-f-reeb": [],
        "cr-model-f-holhess": [],
        "cr-model-f-mixed": [],
        "cr-model-u-reeb": [],
        "cr-model-u-gradient": [],
        "cr-model-phi-gradient": [],
        "cr-model-phi-reeb": [],
        "cr-model-hol-hessian": [],
        "cr-model-traceless-hessian": [],
        "cr-model-reeb-mixed": [],
        "cr-model-g-closed-form": [],
        "cr-model-S": [],
        "cr-model-eq-GE": [],
    }
    for k in range(samples):
        rng = rng_for(seed, 76, k)
        xi = random_unit(rng, 2 * m + 2)
        xi = xi[: m + 1] + 1j * xi[m + 1 :]
        xi = xi / np.linalg.norm(xi)
        model = ModelPhi(t, xi)
        fr = _sample_frame(m, rng)
        uj = _unit_of(fr)
        fj = model.holomorphic(uj)
        fd = cr_derivs(fr, fj)
        fv = fj.value
        f1, f2 = fd.v1(), fd.v2()
        acc["cr-model-f-antihol"].append(
            max(abs(f1[m + 1 + a]) for a in range(m))
        )
        acc["cr-model-f-reeb"].append(abs(f1[0] - 0.5j * fv))
        acc["cr-model-f-holhess"].append(
            max(abs(f2[1 + a, 1 + b]) for a in range(m) for b in range(m))
        )
        acc["cr-model-f-mixed"].append(
            max(
                abs(f2[1 + a, m + 1 + b] + (0.5 * fv if a == b else 0.0))
                for a in range(m)
                for b in range(m)
            )
        )
        ureal = (fj + fj.conj()) * 0.5
        ud = cr_derivs(fr, ureal)
        u1 = ud.v1()
        uv = ureal.value
        acc["cr-model-u-reeb"].append(abs(u1[0] + 0.5 * np.imag(fv)))
        grad_u = 2.0 * sum(
            u1[1 + s] * u1[m + 1 + s] for s in range(m)
        ) + u1[0] ** 2
        acc["cr-model-u-gradient"].append(abs(4.0 * grad_u - (1.0 - uv * uv)))

        pd = cr_derivs(fr, model(uj))
        hd = cr_heads(pd, m)
        acc["cr-model-phi-gradient"].append(
            max(
                abs(hd.pa[a] - sh * (ch + sh * np.conj(fv)) * f1[1 + a])
                for a in range(m)
            )
        )
        acc["cr-model-phi-reeb"].append(
            abs(hd.phi0 - 0.5j * sh * ch * (fv - np.conj(fv)))
        )
        v2 = pd.v2()
        acc["cr-model-hol-hessian"].append(
            max(abs(v2[1 + a, 1 + b]) for a in range(m) for b in range(m))
        )
        acc["cr-model-traceless-hessian"].append(float(np.abs(hd.b2).max()))
        acc["cr-model-reeb-mixed"].append(
            max(
                abs(v2[0, 1 + a] - 0.5j * hd.gb * hd.pa[a] / hd.phi)
                for a in range(m)
            )
        )
        acc["cr-model-g-closed-form"].append(
            abs(hd.g - ch * (ch + sh * np.conj(fv)))
        )
        acc["cr-model-S"].append(abs(hd.s))
        ge = sum(v2[1 + s, m + 1 + s] for s in range(m))
        acc["cr-model-eq-GE"].append(
            abs(
                ge
                - (
                    0.5 * m * 1j * hd.phi0
                    + 0.25 * m * (1.0 - hd.phi)
                    + 0.5 * (m + 2) * hd.p2 / hd.phi
                )
            )
        )
    first = {
        "cr-model-f-antihol",
        "cr-model-f-reeb",
        "cr-model-u-reeb",
        "cr-model-u-gradient",
        "cr-model-phi-gradient",
        "cr-model-phi-reeb",
    }
    return [
        worst(name, vals, tol_first if name in first else tol_high, seed)
        for name, vals in acc.items()
    ]


def check_cr_model_sums(
    m: int,
    t: float,
    samples: int = 100,
    seed: int = 0,
    tol: float = TOL_HIGHER_ORDER,
) -> list[ResidualReport]:
    """Every quadratic summand on the main identity's right side vanishes
    on the extremal profile."""
    acc: dict[str, list[float]] = {
        "cr-model-sum-P2": [],
        "cr-model-sum-BB": [],
        "cr-model-sum-Q": [],
        "cr-model-sum-AC": [],
        "cr-model-sum-BC": [],
        "cr-model-sum-CC": [],
        "cr-model-sum-mixed": [],
    }
    want_r = 0.5 * (m + 1)
    for k in range(samples):
        rng = rng_for(seed, 77, k)
        xi = random_unit(rng, 2 * m + 2)
        xi = xi[: m + 1] + 1j * xi[m + 1 :]
        xi = xi / np.linalg.norm(xi)
        fr = _sample_frame(m, rng)
        pd = cr_derivs(fr, ModelPhi(t, xi)(_unit_of(fr)))
        hd = cr_heads(pd, m)
        v2 = pd.v2()
        hh = np.array(
            [[v2[1 + s, 1 + tt] for tt in range(m)] for s in range(m)]
        )
        hhb = np.array(
            [[v2[m + 1 + s, m + 1 + tt] for tt in range(m)] for s in range(m)]
        )
        acc["cr-model-sum-P2"].append(abs(np.sum(hh * hhb)))
        acc["cr-model-sum-BB"].append(abs(np.sum(hd.b2 * hd.b2.T)))
        q_term = sum(
            (want_r if s == tt else 0.0) * hd.pa[tt] * hd.pab[s]
            for s in range(m)
            for tt in range(m)
        ) - want_r * hd.p2
        acc["cr-model-sum-Q"].append(abs(q_term))
        ac = (hd.a_up / hd.phi - hd.c_up) @ (hd.a_dn / hd.phi - hd.c_dn)
        bc = (hd.b_up / hd.phi + hd.c_up) @ (hd.b_dn / hd.phi + hd.c_dn)
        acc["cr-model-sum-AC"].append(abs(ac))
        acc["cr-model-sum-BC"].append(abs(bc))
        acc["cr-model-sum-CC"].append(abs(hd.c_up @ hd.c_dn))
        mixed = 0.0 + 0.0j
        for s in range(m):
            for tt in range(m):
                for uu in range(m):
                    left = hh[s, tt] * hd.pab[uu] + hd.b2[s, uu] * hd.pa[tt]
                    right = hhb[s, tt] * hd.pa[uu] + hd.b2[uu, s] * hd.pab[tt]
                    mixed += left * right
        acc["cr-model-sum-mixed"].append(abs(mixed) / (abs(hd.phi) ** 2))
    return [worst(name, vals, tol, seed) for name, vals in acc.items()]


def check_cr_lemma_weight(
    m: int,
    t: float,
    samples: int = 100,
    seed: int = 0,
    tol: float = TOL_HIGHER_ORDER,
) -> AdjudicationMeasurement:
    """Both readings of the gradient-square lemma weight.

    As displayed the right side carries sinh t; the proof's chain of
    equalities produces sinh^2 t.  Measured on the profile (t away from
    the crossing where sinh t = sinh^2 t).
    """
    corrected: list[float] = []
    displayed: list[float] = []
    for k in range(samples):
        rng = rng_for(seed, 78, k)
        xi = random_unit(rng, 2 * m + 2)
        xi = xi[: m + 1] + 1j * xi[m + 1 :]
        xi = xi / np.linalg.norm(xi)
        fr = _sample_frame(m, rng)
        model = ModelPhi(t, xi)
        uj = _unit_of(fr)
        pd = cr_derivs(fr, model(uj))
        hd = cr_heads(pd, m)
        fv = model.holomorphic(uj).value
        lhs = hd.p2 / hd.phi
        base = 0.5 * (1.0 - abs(fv) ** 2)
        sh = math.sinh(t)
        corrected.append(abs(lhs - sh * sh * base))
        displayed.append(abs(lhs - sh * base))
    return AdjudicationMeasurement(
        name="cr-lemma-weight",
        corrected_residual=max(corrected),
        displayed_residual=max(displayed),
        samples=samples,
        tolerance=tol,
        seed=seed,
    )


def check_cr_frame_covariance(
    m: int,
    samples: int = 10,
    seed: int = 0,
    tol: float = 1e-10,
) -> ResidualReport:
    """Scalar invariants agree across two independent frame completions."""
    d = 2 * m + 2
    res: list[float] = []
    for k in range(samples):
        rng = rng_for(seed, 79, k)
        fld = PolySquareField(rng, d)
        x = random_unit(rng, d)
        frames = [cr_frame(x, m)]
        q, _ = np.linalg.qr(
            rng.normal(size=(m + 1, m + 1)) + 1j * rng.normal(size=(m + 1, m + 1))
        )
        zv = np.array([x[j] + 1j * x[j + m + 1] for j in range(m + 1)])
        cands = [q @ c for c in _default_candidates(zv)]
        frames.append(cr_frame(x, m, candidates=cands))

        def invariants(fr: CRFrame) -> np.ndarray:
            dv = cr_derivs(fr, fld(_unit_of(fr)))
            hd = cr_heads(dv, m)
            v2 = dv.v2()
            trace = sum(v2[1 + s, m + 1 + s] for s in range(m))
            return np.array(
                [
                    hd.phi0,
                    hd.p2,
                    trace,
                    hd.s,
                    complex(hd.c_up @ hd.c_dn),
                    complex(hd.a_up @ hd.a_dn),
                    complex(np.sum(hd.b2 * hd.b2.T)),
                ]
            )

        a, b = invariants(frames[0]), invariants(frames[1])
        res.append(float(np.abs(a - b).max() / (1.0 + np.abs(a).max())))
    return worst("cr-frame-covariance", res, tol, seed)


def check_cr_fd(
    m: int,
    spots: int = 10,
    seed: int = 0,
    tol: float = 1e-5,
) -> list[ResidualReport]:
    """First-order ladder against finite differences.

    W_alpha = sqrt2 (T_a + T_abar) and JW_alpha = i sqrt2 (T_a - T_abar)
    turn geodesic difference quotients into checks of phi_alpha; the Reeb
    derivative integrates the circle action z -> e^{is/2} z.
    """
    d = 2 * m + 2
    h = 1e-4
    grad_res: list[float] = []
    reeb_res: list[float] = []
    for k in range(spots):
        rng = rng_for(seed, 80, k)
        fld = PolySquareField(rng, d, scale=0.7)
        x = random_unit(rng, d)
        fr = cr_frame(x, m)
        dv = cr_derivs(fr, fld(_unit_of(fr)))

        def val(y: np.ndarray) -> float:
            _, _, u = unit_jets(y)
            return float(fld(u).value)

        for a in range(m):
            w = np.array([c.value for c in fr.hol[a]])
            pa, pab = dv.d1[1 + a].value, dv.d1[m + 1 + a].value
            # W = 2 sqrt2 Re(T_a comps) and JW = -2 sqrt2 Im are unit
            # tangent vectors with D_W = sqrt2 (T_a + conj), D_JW = i sqrt2
            # (T_a - conj).
            for e, want in (
                (2.0 * _S2 * np.real(w), _S2 * (pa + pab)),
                (-2.0 * _S2 * np.imag(w), 1j * _S2 * (pa - pab)),
            ):
                plus = val(math.cos(h) * x + math.sin(h) * e)
                minus = val(math.cos(h) * x - math.sin(h) * e)
                fd = (plus - minus) / (2.0 * h)
                grad_res.append(abs(fd - want))
        half = 0.5 * h
        zp = _circle_rotate(x, m, half)
        zm = _circle_rotate(x, m, -half)
        fd0 = (val(zp) - val(zm)) / (2.0 * half)
        reeb_res.append(abs(fd0 - np.real(dv.d1[0].value)))
    return [
        worst("cr-fd-gradient", grad_res, tol, seed),
        worst("cr-fd-reeb", reeb_res, tol, seed),
    ]


def _circle_rotate(x: np.ndarray, m: int, s: float) -> np.ndarray:
    z = x[: m + 1] + 1j * x[m + 1 :]
    z = z * np.exp(0.5j * s)
    return np.concatenate([np.real(z), np.imag(z)])
