"""Suite orchestration and report assembly.

A run selects suites, fans their checks out to a small worker pool,
and folds the results into one JSON document.  Every check derives its
randomness from (config seed, fixed stream tag), so the report bytes
depend only on the configuration and the catalog, never on scheduling;
the timing fields are the one deliberate exception.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields as dc_fields
from functools import partial
from pathlib import Path
from typing import Callable

from .errors import CatalogError, ConfigError, EngineError
from .residual import TOL_FIRST_ORDER, TOL_HIGHER_ORDER, AdjudicationMeasurement, ResidualReport
from .rewrite import RuleSet
from .suites import (
    CATALOG_FILES,
    IdentityScript,
    catalog_dir,
    load_adjudications,
    load_scripts,
    load_suite,
    run_mutations,
    run_script,
)

SUITES = (
    "cr-symbolic",
    "riemannian-symbolic",
    "numeric-sn",
    "numeric-cr",
    "axioms",
    "mutation",
)

# t values for the extremal family; 0 is the constant solution.
T_GRID = (0.0, 0.3, 1.0)
# adjudication measurements need t > 0, both readings agree at t = 0
T_ADJ = (0.3, 1.0)

# numeric residual bound for rules evaluated directly at sample points
GATE_TOL = 1e-9


@dataclass(frozen=True, slots=True)
class RunConfig:
    """Everything a run depends on besides the catalog files."""

    suites: tuple[str, ...] = SUITES
    m_values: tuple[int, ...] = (1, 2)
    n_values: tuple[int, ...] = (3, 4, 5)
    samples: int = 100
    fields: int = 20
    seed: int = 0
    tolerance_first_order: float = TOL_FIRST_ORDER
    tolerance_higher_order: float = TOL_HIGHER_ORDER
    out: str = "report.json"
    fail_fast: bool = False
    jobs: int = 4
    catalog: str | None = None

    def validate(self) -> None:
        if not self.suites:
            raise ConfigError("no suites selected")
        unknown = [s for s in self.suites if s not in SUITES]
        if unknown:
            raise ConfigError(f"unknown suites: {', '.join(unknown)}")
        if self.samples < 1:
            raise ConfigError(f"samples must be positive, got {self.samples}")
        if self.fields < 1:
            raise ConfigError(f"fields must be positive, got {self.fields}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be positive, got {self.jobs}")
        if any(m < 1 for m in self.m_values) or not self.m_values:
            raise ConfigError(f"m values must be >= 1, got {self.m_values}")
        if any(n < 2 for n in self.n_values) or not self.n_values:
            raise ConfigError(f"n values must be >= 2, got {self.n_values}")
        for name in ("tolerance_first_order", "tolerance_higher_order"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")

    def echo(self) -> dict:
        out = {}
        for f in dc_fields(self):
            value = getattr(self, f.name)
            out[f.name] = list(value) if isinstance(value, tuple) else value
        return out


@dataclass(slots=True)
class CheckOutcome:
    """One row of the report's checks array."""

    id: str
    citation: str
    kind: str  # "symbolic" | "numeric" | "mutation"
    status: str  # "pass" | "fail" | "killed" | "survived"
    metric: float
    seconds: float

    @property
    def ok(self) -> bool:
        return self.status in ("pass", "killed")

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "citation": self.citation,
            "kind": self.kind,
            "status": self.status,
            "metric": self.metric,
            "seconds": round(self.seconds, 4),
        }


@dataclass(slots=True)
class AdjudicationOutcome:
    """Both readings of a disputed display, with their measured residuals.

    For numeric entries the two fields are residuals; for symbolic ones
    they are term counts of the normal forms.  Resolved means the
    corrected reading verifies while the one as printed does not.
    """

    id: str
    citation: str
    kind: str  # "symbolic" | "numeric"
    corrected: float
    displayed: float
    tolerance: float
    resolved: bool
    seconds: float

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "citation": self.citation,
            "kind": self.kind,
            "corrected": self.corrected,
            "displayed": self.displayed,
            "tolerance": self.tolerance,
            "resolved": self.resolved,
            "seconds": round(self.seconds, 4),
        }


JobResult = tuple[list[CheckOutcome], list[AdjudicationOutcome]]
Job = Callable[[], JobResult]


def catalog_sha256(directory: str | Path | None = None) -> str:
    """Digest of the catalog bytes, files in basename order."""
    base = catalog_dir(directory)
    h = hashlib.sha256()
    for name in CATALOG_FILES:
        path = base / name
        try:
            h.update(path.read_bytes())
        except OSError as err:
            raise CatalogError(f"cannot read {path}: {err}") from err
    return h.hexdigest()


# Citations for checks that measure geometry directly rather than a
# catalog record.  Checks born from a rule or script reuse its citation.
CITATIONS = {
    "sn-model-phi-const": "Section 2, phi = 2 cosh t on the extremal family",
    "sn-model-gradsq": "Section 2, |grad v|^2 = -1 - v^2 + 2 v cosh t",
    "sn-model-pde": "Section 2, quasilinear equation for v",
    "sn-model-eq-v": "Section 2, scalar equation for v",
    "sn-model-hessian": "Section 2, pure-trace Hessian of the extremal family",
    "sn-model-def-phi": "Section 2, definition of phi",
    "sn-axiom-third-sym": "Section 2, symmetry of third derivatives in the first two slots",
    "sn-axiom-bochner": "Section 2, Bochner formula on the unit sphere",
    "sn-remainder-random": "Section 2, remainder identity in Bochner form",
    "sn-remainder-model": "Section 2, remainder identity on the extremal family",
    "sn-boundary-c0": "Section 2, boundary identity on the equator",
    "sn-boundary-c0p5": "Section 2, boundary identity on a spherical cap",
    "sn-fd-gradient": "internal cross-check, finite differences",
    "sn-fd-hessian": "internal cross-check, finite differences",
    "sn-third-crosspath": "internal cross-check, two routes to third derivatives",
    "sn-frame-covariance": "internal cross-check, frame independence",
    "cr-structure-levi": "Section 3, Levi form of the standard pseudohermitian sphere",
    "cr-structure-levi-holpair": "Section 3, dtheta vanishes on same-type pairs",
    "cr-structure-levi-reeb": "Section 3, Reeb contraction of dtheta",
    "cr-structure-coframe": "Section 3, admissible coframe duality",
    "cr-structure-torsion": "Section 3, vanishing pseudohermitian torsion",
    "cr-structure-hol-pair": "Section 3, holomorphic frame pairing",
    "cr-structure-metric-reeb": "Section 3, theta(T) = 1",
    "cr-structure-unitary": "Section 3, unitarity of the holomorphic frame",
    "cr-ricci-pin": "Section 3, Webster Ricci curvature (m+1)/2 of the sphere",
    "cr-scalar-curvature": "Section 3, Webster scalar curvature m(m+1)/2",
    "cr-conjugation": "internal cross-check, conjugate slots",
    "cr-frame-covariance": "internal cross-check, frame independence",
    "cr-fd-gradient": "internal cross-check, finite differences",
    "cr-fd-reeb": "internal cross-check, circle action generates the Reeb flow",
    "cr-model-f-antihol": "Section 3, f is CR holomorphic",
    "cr-model-f-reeb": "Section 3, f_0 = (i/2) f",
    "cr-model-f-holhess": "Section 3, vanishing holomorphic Hessian of f",
    "cr-model-f-mixed": "Section 3, f_{alpha,bar beta} = -(1/2) f delta",
    "cr-model-u-reeb": "Section 3, u_0 = -(1/2) Im f",
    "cr-model-u-gradient": "Section 3, gradient identity for u = Re f",
    "cr-model-phi-gradient": "Section 3, phi_alpha in closed form",
    "cr-model-phi-reeb": "Section 3, phi_0 in closed form",
    "cr-model-hol-hessian": "Lemma 3.2, phi_{alpha,beta} = 0",
    "cr-model-traceless-hessian": "Lemma 3.2, mixed Hessian is pure trace",
    "cr-model-reeb-mixed": "Lemma 3.2, phi_{0,alpha} = (i/2) phi^{-1} gbar phi_alpha",
    "cr-model-g-closed-form": "Section 3, g = cosh t (cosh t + sinh t fbar)",
    "cr-model-S": "Section 3, Remark: S = 0 on the extremal family",
    "cr-model-eq-GE": "Section 3, the scalar equation holds on the extremal family",
    "cr-model-sum-P2": "Theorem 4.5, right-hand summand vanishes on the extremal family",
    "cr-model-sum-BB": "Theorem 4.5, right-hand summand vanishes on the extremal family",
    "cr-model-sum-Q": "Theorem 4.5, right-hand summand vanishes on the extremal family",
    "cr-model-sum-AC": "Theorem 4.5, right-hand summand vanishes on the extremal family",
    "cr-model-sum-BC": "Theorem 4.5, right-hand summand vanishes on the extremal family",
    "cr-model-sum-CC": "Theorem 4.5, right-hand summand vanishes on the extremal family",
    "cr-model-sum-mixed": "Theorem 4.5, right-hand summand vanishes on the extremal family",
    "cr-hermitian-B2-matrix": "Lemma 4.4, hermiticity of the traceless Hessian",
    # the ladder check runs the four Reeb-slot swaps as one sweep
    "cr-axiom-R3b": "Section 4, commutation relations (Reeb slot, torsion free)",
    "sn-power-reading": "Section 2, power of v in the definition of phi",
    "cr-lemma-weight": "Lemma 3.1, weight of (1 - |f|^2)",
}

_ADJ_SUFFIX = "-displayed"


def _citation(check_id: str) -> str:
    try:
        return CITATIONS[check_id]
    except KeyError:
        raise ConfigError(f"no citation recorded for check {check_id!r}") from None


def _from_reports(reports: list[ResidualReport], seconds: float) -> JobResult:
    share = seconds / max(len(reports), 1)
    checks = [
        CheckOutcome(
            id=r.name,
            citation=_citation(r.name),
            kind="numeric",
            status="pass" if r.passed else "fail",
            metric=float(r.max_abs_residual),
            seconds=share,
        )
        for r in reports
    ]
    return checks, []


def _from_measurements(ms: list[AdjudicationMeasurement], kind: str, seconds: float) -> JobResult:
    share = seconds / max(len(ms), 1)
    adjs = [
        AdjudicationOutcome(
            id=m.name,
            citation=_citation(m.name),
            kind=kind,
            corrected=float(m.corrected_residual),
            displayed=float(m.displayed_residual),
            tolerance=float(m.tolerance),
            resolved=bool(m.resolved),
            seconds=share,
        )
        for m in ms
    ]
    return [], adjs


# ---- symbolic suites ----


def _script_outcome(rules: RuleSet, script: IdentityScript) -> CheckOutcome:
    start = time.perf_counter()
    try:
        result = run_script(rules, script)
    except EngineError:
        # a broken catalog shows up as a check that cannot verify
        return CheckOutcome(
            id=script.name,
            citation=script.citation,
            kind="symbolic",
            status="fail",
            metric=-1.0,
            seconds=time.perf_counter() - start,
        )
    terms = len(result.check.normal_form.terms)
    return CheckOutcome(
        id=script.name,
        citation=script.citation,
        kind="symbolic",
        status="pass" if result.ok else "fail",
        metric=float(terms),
        seconds=result.seconds,
    )


def _script_job(rules: RuleSet, script: IdentityScript) -> JobResult:
    return [_script_outcome(rules, script)], []


def _symbolic_adjudication_job(
    rules: RuleSet, scripts: list[IdentityScript], adjudications: list[IdentityScript]
) -> JobResult:
    """Term counts for both readings of each adjudicated display.

    An adjudication record named X-displayed carries the statement as
    printed; the corrected reading is the identity X from the main
    suite.  Resolved means the corrected form closes and the printed
    one leaves terms behind.
    """
    by_name = {s.name: s for s in scripts}
    adjs: list[AdjudicationOutcome] = []
    for adj in adjudications:
        start = time.perf_counter()
        if not adj.name.endswith(_ADJ_SUFFIX):
            raise CatalogError(f"adjudication {adj.name!r} lacks the {_ADJ_SUFFIX} suffix")
        paired = by_name.get(adj.name[: -len(_ADJ_SUFFIX)])
        if paired is None:
            raise CatalogError(f"adjudication {adj.name!r} has no paired identity")
        displayed = run_script(rules, adj)
        corrected = run_script(rules, paired)
        n_displayed = len(displayed.check.normal_form.terms)
        n_corrected = len(corrected.check.normal_form.terms)
        adjs.append(
            AdjudicationOutcome(
                id=adj.name,
                citation=adj.citation,
                kind="symbolic",
                corrected=float(n_corrected),
                displayed=float(n_displayed),
                tolerance=0.0,
                resolved=n_corrected == 0 and n_displayed > 0,
                seconds=time.perf_counter() - start,
            )
        )
    return [], adjs


def _symbolic_jobs(mode: str, config: RunConfig) -> list[Job]:
    rules, scripts = load_suite(mode, config.catalog)
    jobs: list[Job] = [partial(_script_job, rules, s) for s in scripts]
    if mode == "cr":
        adjudications = load_adjudications(config.catalog)
        jobs.append(partial(_symbolic_adjudication_job, rules, scripts, adjudications))
    return jobs


# ---- mutation suite ----


def _mutation_job(mode: str, config: RunConfig) -> JobResult:
    rules, scripts = load_suite(mode, config.catalog)
    citations = {s.name: s.citation for s in scripts}
    start = time.perf_counter()
    outcomes = run_mutations(rules, scripts)
    share = (time.perf_counter() - start) / max(len(outcomes), 1)
    checks = []
    for out in outcomes:
        if out.verdict == "error":
            metric = -1.0
        else:
            metric = float(out.detail.split()[0])
        checks.append(
            CheckOutcome(
                id=f"{out.script_name}~{out.site.col}",
                citation=citations[out.script_name],
                kind="mutation",
                status="killed" if out.killed else "survived",
                metric=metric,
                seconds=share,
            )
        )
    return checks, []


# ---- numeric suites ----


def _sn_model_job(config: RunConfig, n: int) -> JobResult:
    from . import sphere

    start = time.perf_counter()
    reports: list[ResidualReport] = []
    for t in T_GRID:
        reports.extend(
            sphere.check_sn_model(
                n,
                t,
                samples=config.samples,
                seed=config.seed,
                tol_first=config.tolerance_first_order,
                tol_high=config.tolerance_higher_order,
            )
        )
    checks, _ = _from_reports(reports, time.perf_counter() - start)
    start = time.perf_counter()
    measurements = [
        sphere.check_sn_power_adjudication(
            n, t, samples=config.samples, seed=config.seed, tol=config.tolerance_first_order
        )
        for t in T_ADJ
    ]
    _, adjs = _from_measurements(measurements, "numeric", time.perf_counter() - start)
    return checks, adjs


def _sn_field_job(config: RunConfig, n: int) -> JobResult:
    from . import sphere

    start = time.perf_counter()
    reports = sphere.check_sn_remainder(
        n,
        fields=config.fields,
        samples=max(config.samples // 5, 4),
        seed=config.seed,
        tol=config.tolerance_higher_order,
    )
    for c in (0.0, 0.5):
        reports.append(
            sphere.check_sn_boundary(
                n,
                c,
                fields=config.fields,
                samples=max(config.samples // 4, 5),
                seed=config.seed,
                tol=config.tolerance_higher_order,
            )
        )
    return _from_reports(reports, time.perf_counter() - start)


def _sn_consistency_job(config: RunConfig, n: int) -> JobResult:
    from . import sphere

    start = time.perf_counter()
    reports = sphere.check_sn_fd(n, seed=config.seed)
    reports.append(sphere.check_sn_third_crosspath(n, seed=config.seed))
    reports.append(sphere.check_sn_frame_covariance(n, seed=config.seed))
    return _from_reports(reports, time.perf_counter() - start)


def _riem_record_job(config: RunConfig, n: int) -> JobResult:
    from . import evaluate

    base = catalog_dir(config.catalog)
    citations = {s.name: s.citation for s in load_scripts(base / "riemannian.identities")}
    start = time.perf_counter()
    reports = evaluate.check_record_values(
        "riem",
        n,
        seed=config.seed,
        tol=config.tolerance_higher_order,
        directory=config.catalog,
    )
    checks, _ = _from_reports_cited(reports, citations, "record-riem-", time.perf_counter() - start)
    return checks, []


def _cr_frame_job(config: RunConfig, m: int) -> JobResult:
    from . import crsphere

    start = time.perf_counter()
    reports = crsphere.check_cr_structure(
        m, samples=min(config.samples, 25), seed=config.seed, tol=config.tolerance_first_order
    )
    reports.extend(
        crsphere.check_cr_curvature(
            m, samples=10, seed=config.seed, tol=config.tolerance_higher_order
        )
    )
    return _from_reports(reports, time.perf_counter() - start)


def _cr_consistency_job(config: RunConfig, m: int) -> JobResult:
    from . import crsphere

    start = time.perf_counter()
    reports = [crsphere.check_cr_conjugation(m, seed=config.seed)]
    reports.append(crsphere.check_cr_frame_covariance(m, seed=config.seed))
    reports.extend(crsphere.check_cr_fd(m, seed=config.seed))
    return _from_reports(reports, time.perf_counter() - start)


def _cr_model_job(config: RunConfig, m: int) -> JobResult:
    from . import crsphere

    start = time.perf_counter()
    reports: list[ResidualReport] = []
    for t in T_GRID:
        reports.extend(
            crsphere.check_cr_model(
                m,
                t,
                samples=config.samples,
                seed=config.seed,
                tol_first=config.tolerance_first_order,
                tol_high=config.tolerance_higher_order,
            )
        )
        reports.extend(
            crsphere.check_cr_model_sums(
                m, t, samples=config.samples, seed=config.seed, tol=config.tolerance_higher_order
            )
        )
    checks, _ = _from_reports(reports, time.perf_counter() - start)
    start = time.perf_counter()
    measurements = [
        crsphere.check_cr_lemma_weight(
            m, t, samples=config.samples, seed=config.seed, tol=config.tolerance_higher_order
        )
        for t in T_ADJ
    ]
    _, adjs = _from_measurements(measurements, "numeric", time.perf_counter() - start)
    return checks, adjs


def _cr_record_job(config: RunConfig, m: int) -> JobResult:
    from . import evaluate

    base = catalog_dir(config.catalog)
    citations = {s.name: s.citation for s in load_scripts(base / "cr.identities")}
    start = time.perf_counter()
    reports = evaluate.check_record_values(
        "cr",
        m,
        seed=config.seed,
        tol=config.tolerance_higher_order,
        directory=config.catalog,
    )
    checks, _ = _from_reports_cited(reports, citations, "record-cr-", time.perf_counter() - start)
    start = time.perf_counter()
    hermit = evaluate.check_b2_hermitian(m, seed=config.seed)
    more, _ = _from_reports([hermit], time.perf_counter() - start)
    return checks + more, []


def _from_reports_cited(
    reports: list[ResidualReport], citations: dict[str, str], prefix: str, seconds: float
) -> JobResult:
    """Like _from_reports, but the citation comes from the named record."""
    share = seconds / max(len(reports), 1)
    checks = []
    for r in reports:
        name = r.name[len(prefix) :] if r.name.startswith(prefix) else r.name
        checks.append(
            CheckOutcome(
                id=r.name,
                citation=citations.get(name) or _citation(r.name),
                kind="numeric",
                status="pass" if r.passed else "fail",
                metric=float(r.max_abs_residual),
                seconds=share,
            )
        )
    return checks, []


def _cr_axiom_job(config: RunConfig, m: int, citations: dict[str, str]) -> JobResult:
    from . import crsphere

    start = time.perf_counter()
    reports = crsphere.check_cr_axioms(
        m,
        fields=config.fields,
        samples=config.samples,
        seed=config.seed,
        tol=config.tolerance_higher_order,
    )
    return _from_reports_cited(reports, citations, "cr-axiom-", time.perf_counter() - start)


def _sn_axiom_job(config: RunConfig, n: int, citations: dict[str, str]) -> JobResult:
    from . import sphere

    start = time.perf_counter()
    reports = sphere.check_sn_axioms(
        n,
        fields=config.fields,
        samples=config.samples,
        seed=config.seed,
        tol=config.tolerance_higher_order,
    )
    return _from_reports_cited(reports, citations, "sn-axiom-", time.perf_counter() - start)


def _cr_gate_job(config: RunConfig, m: int, rules: RuleSet) -> JobResult:
    from . import evaluate

    citations = {r.name: r.citation for r in rules.entries}
    start = time.perf_counter()
    reports = evaluate.check_cr_gate(m, fields=5, samples=10, seed=config.seed, tol=GATE_TOL, rules=rules)
    return _from_reports_cited(reports, citations, "gate-cr-", time.perf_counter() - start)


def _riem_gate_job(config: RunConfig, n: int, rules: RuleSet) -> JobResult:
    from . import evaluate

    citations = {r.name: r.citation for r in rules.entries}
    start = time.perf_counter()
    reports = evaluate.check_riem_gate(n, fields=5, samples=10, seed=config.seed, tol=GATE_TOL, rules=rules)
    return _from_reports_cited(reports, citations, "gate-riem-", time.perf_counter() - start)


def _axiom_jobs(config: RunConfig) -> list[Job]:
    cr_rules, _ = load_suite("cr", config.catalog)
    riem_rules, _ = load_suite("riemannian", config.catalog)
    cr_citations = {r.name: r.citation for r in cr_rules.entries}
    riem_citations = {r.name: r.citation for r in riem_rules.entries}
    jobs: list[Job] = []
    for m in config.m_values:
        jobs.append(partial(_cr_axiom_job, config, m, cr_citations))
        jobs.append(partial(_cr_gate_job, config, m, cr_rules))
    for n in config.n_values:
        jobs.append(partial(_sn_axiom_job, config, n, riem_citations))
        jobs.append(partial(_riem_gate_job, config, n, riem_rules))
    return jobs


def _jobs_for(config: RunConfig) -> list[Job]:
    jobs: list[Job] = []
    for suite in SUITES:
        if suite not in config.suites:
            continue
        if suite == "cr-symbolic":
            jobs.extend(_symbolic_jobs("cr", config))
        elif suite == "riemannian-symbolic":
            jobs.extend(_symbolic_jobs("riemannian", config))
        elif suite == "numeric-sn":
            for n in config.n_values:
                jobs.append(partial(_sn_model_job, config, n))
                jobs.append(partial(_sn_field_job, config, n))
                jobs.append(partial(_sn_consistency_job, config, n))
                jobs.append(partial(_riem_record_job, config, n))
        elif suite == "numeric-cr":
            for m in config.m_values:
                jobs.append(partial(_cr_frame_job, config, m))
                jobs.append(partial(_cr_consistency_job, config, m))
                jobs.append(partial(_cr_model_job, config, m))
                jobs.append(partial(_cr_record_job, config, m))
        elif suite == "axioms":
            jobs.extend(_axiom_jobs(config))
        elif suite == "mutation":
            jobs.append(partial(_mutation_job, "cr", config))
            jobs.append(partial(_mutation_job, "riemannian", config))
    return jobs


# ---- gathering and merging ----


_STATUS_RANK = {"pass": 0, "killed": 0, "fail": 1, "survived": 1}


def _merge_checks(raw: list[CheckOutcome]) -> list[CheckOutcome]:
    """One row per check id; the metric is the worst seen.

    The same check runs at several dimensions and model parameters, so
    rows with one id collapse to the largest metric and summed time.
    """
    merged: dict[str, CheckOutcome] = {}
    for oc in raw:
        prev = merged.get(oc.id)
        if prev is None:
            merged[oc.id] = oc
            continue
        prev.metric = max(prev.metric, oc.metric)
        prev.seconds += oc.seconds
        if _STATUS_RANK[oc.status] > _STATUS_RANK[prev.status]:
            prev.status = oc.status
    return list(merged.values())


def _merge_adjudications(raw: list[AdjudicationOutcome]) -> list[AdjudicationOutcome]:
    # worst corrected residual against the most favourable displayed one
    merged: dict[str, AdjudicationOutcome] = {}
    for adj in raw:
        prev = merged.get(adj.id)
        if prev is None:
            merged[adj.id] = adj
            continue
        prev.corrected = max(prev.corrected, adj.corrected)
        prev.displayed = min(prev.displayed, adj.displayed)
        prev.resolved = prev.resolved and adj.resolved
        prev.seconds += adj.seconds
    return list(merged.values())


def run_checks(config: RunConfig) -> tuple[list[CheckOutcome], list[AdjudicationOutcome]]:
    """Run every selected suite and return merged outcomes.

    Jobs land on a thread pool; results are gathered in submission
    order, so the report layout is independent of scheduling.  With
    fail_fast the jobs run one by one and stop at the first failure.
    """
    config.validate()
    jobs = _jobs_for(config)
    results: list[JobResult] = []
    if config.fail_fast or config.jobs == 1:
        for job in jobs:
            result = job()
            results.append(result)
            if config.fail_fast and any(not oc.ok for oc in result[0]):
                break
    else:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            futures = [pool.submit(job) for job in jobs]
            results = [f.result() for f in futures]
    checks = _merge_checks([oc for cs, _ in results for oc in cs])
    adjudications = _merge_adjudications([a for _, adjs in results for a in adjs])
    return checks, adjudications


# ---- report document ----


def assemble(
    config: RunConfig,
    checks: list[CheckOutcome],
    adjudications: list[AdjudicationOutcome],
    sha: str,
) -> dict:
    failing = [oc.id for oc in checks if not oc.ok]
    overall = not failing and all(a.resolved for a in adjudications)
    return {
        "config": config.echo(),
        "checks": [oc.to_json() for oc in checks],
        "adjudications": [a.to_json() for a in adjudications],
        "catalog_sha256": sha,
        "first_failure": failing[0] if failing else None,
        "pass": overall,
    }


def write_report(report: dict, path: str | Path) -> None:
    """Serialize and rename into place, so readers never see a torn file."""
    target = Path(path)
    text = json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"
    try:
        fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.")
    except OSError as err:
        raise ConfigError(f"cannot write report at {target}: {err}") from err
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def summary_lines(report: dict) -> list[str]:
    lines = []
    for oc in report["checks"]:
        label = "ok" if oc["status"] in ("pass", "killed") else "FAIL"
        lines.append(
            f"{label:4} {oc['kind']:9} {oc['id']:34} {oc['metric']:>10.3g}  {oc['citation']}"
        )
    for adj in report["adjudications"]:
        label = "ok" if adj["resolved"] else "FAIL"
        lines.append(
            f"{label:4} {'adjudic.':9} {adj['id']:34} "
            f"corrected={adj['corrected']:.3g} displayed={adj['displayed']:.3g}  {adj['citation']}"
        )
    total = len(report["checks"])
    bad = sum(1 for oc in report["checks"] if oc["status"] not in ("pass", "killed"))
    if report["pass"]:
        lines.append(f"PASS {total} checks, {len(report['adjudications'])} adjudications")
    else:
        first = report["first_failure"]
        where = next((oc for oc in report["checks"] if oc["id"] == first), None)
        lines.append(f"FAIL {bad} of {total} checks")
        if where is not None:
            lines.append(f"first failure: {where['id']} ({where['citation']})")
    lines.append(f"catalog sha256 {report['catalog_sha256']}")
    return lines


def run_to_report(config: RunConfig) -> dict:
    """The whole pipeline: checks, document, atomic write."""
    sha = catalog_sha256(config.catalog)
    checks, adjudications = run_checks(config)
    report = assemble(config, checks, adjudications, sha)
    write_report(report, config.out)
    return report
