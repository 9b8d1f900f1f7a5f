"""Command handlers: one function per toolkit command.

Each handler takes a request model and returns a JSON-ready report dict.
Reports always embed the tool version, the seed, the tolerances, a status
string, and the process exit code (0 ok, 2 parse, 3 input invariant,
4 verification, 5 inversion condition, 6 degenerate).  The CLI and the HTTP
service are both thin wrappers over these functions.
"""

from __future__ import annotations

import numpy as np

from . import __version__
from . import hermitian as hm
from . import ptdemo, serialization as ser
from .asd import (
    asd_measurement,
    asd_to_npovm,
    covariant_family,
    dual_basis,
    max_uniform_c,
)
from .bridge import (
    ImplementationDomain,
    PostSelectedPOVM,
    _states_in_subspace,
    acceptance_bound_check,
    construct_povm,
    implementation_domain,
    invert_postselection,
    verify_implementation,
)
from .errors import (
    AllOutcomesRejected,
    AllShotsRejected,
    AnchorOutsideSubspace,
    CompensatorInfeasible,
    DegenerateC0,
    DegenerateDecomposition,
    DimensionMismatch,
    InvalidDecomposition,
    InvalidDiagonalStructure,
    InvalidMeasurement,
    InvalidState,
    InvalidSuperMap,
    InversionConditionError,
    NearSingularFamily,
    NegativeProbability,
    NotHermitian,
    OperatorInequalityViolated,
    RejectionBudgetExceeded,
    SingularMultiplicityBlock,
)
from .measurement import classify, outcome_probabilities, simulate_postselected
from .models import (
    AsdRequest,
    DemoRequest,
    ImplementRequest,
    InvertRequest,
    SimulateRequest,
    Tolerances,
    VerifyRequest,
)
from .serialization import ParseError

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INVARIANT = 3
EXIT_VERIFICATION = 4
EXIT_CONDITION = 5
EXIT_DEGENERATE = 6

_STATUS = {
    EXIT_OK: "ok",
    EXIT_PARSE: "parse_error",
    EXIT_INVARIANT: "invariant_violation",
    EXIT_VERIFICATION: "verification_failed",
    EXIT_CONDITION: "inversion_condition_failed",
    EXIT_DEGENERATE: "degenerate",
}

_INVARIANT_ERRORS = (
    NotHermitian,
    InvalidState,
    InvalidMeasurement,
    InvalidDecomposition,
    InvalidSuperMap,
    InvalidDiagonalStructure,
    DimensionMismatch,
    NearSingularFamily,
    OperatorInequalityViolated,
    SingularMultiplicityBlock,
    NegativeProbability,
)

_VERIFICATION_ERRORS = (
    AnchorOutsideSubspace,
    RejectionBudgetExceeded,
    AllOutcomesRejected,
    CompensatorInfeasible,
)

_DEGENERATE_ERRORS = (DegenerateC0, DegenerateDecomposition, AllShotsRejected)


def _base_report(command: str, seed: int, tol: Tolerances) -> dict:
    return {
        "version": __version__,
        "command": command,
        "seed": seed,
        "tolerances": {"ratio": tol.ratio, "psd": tol.psd, "fixed": tol.fixed},
    }


def _finish(report: dict, code: int, error: str | None = None) -> dict:
    report["exit_code"] = code
    report["status"] = _STATUS[code]
    if error is not None:
        report["error"] = error
    return report


def _classify_exception(exc: Exception) -> int:
    if isinstance(exc, ParseError):
        return EXIT_PARSE
    if isinstance(exc, _INVARIANT_ERRORS):
        return EXIT_INVARIANT
    if isinstance(exc, InversionConditionError):
        return EXIT_CONDITION
    if isinstance(exc, _DEGENERATE_ERRORS):
        return EXIT_DEGENERATE
    if isinstance(exc, _VERIFICATION_ERRORS):
        return EXIT_VERIFICATION
    raise exc


def handle_implement(req: ImplementRequest) -> dict:
    report = _base_report("implement", req.seed, req.tolerances)
    try:
        dec = ser.decomposition_from_json(req.decomposition)
        family = dec.induced_measurement()
        ps = construct_povm(dec)
        dom = implementation_domain(dec, cutoff=req.tolerances.fixed)
        bound = acceptance_bound_check(dec, ps)
        ver = verify_implementation(
            family, ps, dom, n_samples=req.samples, seed=req.seed, tol=req.tolerances.ratio
        )
    except Exception as exc:  # noqa: BLE001 - mapped to exit codes
        return _finish(report, _classify_exception(exc), str(exc))
    report.update(
        {
            "c": ps.c,
            "acceptance": 1.0 / ps.c,
            "max_ratio_error": ver.max_ratio_error,
            "lemma1_spread": ver.lemma1_constancy_spread,
            "dim_domain": dom.size,
            "dim_prime_upper": None,
            "bounds": {"dim_ok": None, "acc_ok": bound.satisfied},
            "trace_preserving": bound.trace_preserving,
            "informativeness": ver.informativeness,
            "samples_used": ver.samples_used,
            "reject_label": ps.reject_label,
            "povm": ser.measurement_to_json(ps.povm),
            "domain": ser.subspace_to_json(dom.subspace),
            "domain_contains_max_mixed": dom.contains_max_mixed,
        }
    )
    ok = ver.max_ratio_error <= req.tolerances.ratio
    return _finish(report, EXIT_OK if ok else EXIT_VERIFICATION)


def handle_invert(req: InvertRequest) -> dict:
    report = _base_report("invert", req.seed, req.tolerances)
    try:
        povm = ser.measurement_from_json(req.povm)
        cls = classify(povm, tol=req.tolerances.psd)
        if not cls.is_povm:
            raise InvalidMeasurement(
                f"input is not a POVM (effect {cls.witness_index} min eig "
                f"{cls.witness_min_eig:.3e})"
            )
        k = ser.subspace_from_json(req.subspace)
        family, cond = invert_postselection(
            povm, req.reject, k, c0=req.c0, tol=req.tolerances.fixed, seed=req.seed
        )
        states = _states_in_subspace(k, req.samples, seed=req.seed)
        ratio_error = None
        if states:
            ver = verify_implementation(
                family,
                PostSelectedPOVM(povm=povm, reject_label=req.reject, c=None),
                ImplementationDomain(subspace=k, tol=req.tolerances.fixed),
                states=states,
                tol=req.tolerances.ratio,
            )
            ratio_error = ver.max_ratio_error
    except InversionConditionError as exc:
        report["projection_norm"] = getattr(exc, "projection_norm", None)
        return _finish(report, EXIT_CONDITION, str(exc))
    except Exception as exc:  # noqa: BLE001
        return _finish(report, _classify_exception(exc), str(exc))
    report.update(
        {
            "npovm": ser.measurement_to_json(family),
            "classification": classify(family).kind,
            "c0": 1.0 / cond.reject_mass_mean if cond.reject_mass_mean else req.c0,
            "projection_norm": cond.projection_norm,
            "reject_mass_spread": cond.reject_mass_spread,
            "max_ratio_error": ratio_error,
            "samples_used": cond.samples_used,
        }
    )
    ok = ratio_error is None or ratio_error <= req.tolerances.ratio
    return _finish(report, EXIT_OK if ok else EXIT_VERIFICATION)


def handle_verify(req: VerifyRequest) -> dict:
    report = _base_report("verify", req.seed, req.tolerances)
    try:
        family = ser.measurement_from_json(req.family)
        povm = ser.measurement_from_json(req.povm)
        k = ser.subspace_from_json(req.subspace)
        reject = req.reject
        if reject is None:
            extra = [lbl for lbl in povm.labels if lbl not in family.labels]
            if len(extra) != 1:
                raise ParseError(
                    "cannot infer the reject label; supply it explicitly"
                )
            reject = extra[0]
        states = _states_in_subspace(k, req.samples, seed=req.seed)
        if not states:
            raise AllOutcomesRejected("no density matrix found inside the subspace")
        ver = verify_implementation(
            family,
            PostSelectedPOVM(povm=povm, reject_label=reject, c=None),
            ImplementationDomain(subspace=k, tol=req.tolerances.fixed),
            states=states,
            tol=req.tolerances.ratio,
        )
    except Exception as exc:  # noqa: BLE001
        return _finish(report, _classify_exception(exc), str(exc))
    report.update(
        {
            "max_ratio_error": ver.max_ratio_error,
            "lemma1_spread": ver.lemma1_constancy_spread,
            "acceptance": ver.acceptance,
            "samples_used": ver.samples_used,
            "informativeness": ver.informativeness,
            "reject_label": reject,
        }
    )
    ok = ver.max_ratio_error <= req.tolerances.ratio
    return _finish(report, EXIT_OK if ok else EXIT_VERIFICATION)


def _asd_family_payload(req: AsdRequest, report: dict) -> dict:
    family = ser.family_from_json(req.input)
    dual = dual_basis(family)
    d = family.dim
    c_spec = req.input.get("c")
    if c_spec is None:
        c = [max_uniform_c(dual)] * d
    elif isinstance(c_spec, (int, float)):
        c = [float(c_spec)] * d
    else:
        c = [float(x) for x in c_spec]
    m = asd_measurement(dual, c)
    uniform = max(c) - min(c) <= 1e-12
    report.update(
        {
            "mode": "family",
            "c": c[0] if uniform else c,
            "max_uniform_c": max_uniform_c(dual),
            "povm": ser.measurement_to_json(m),
        }
    )
    return _asd_discrimination(report, req, family, dual.vectors, c, m)


def _asd_group_payload(req: AsdRequest, report: dict) -> dict:
    if "characters" in req.input:
        rep = ser.commutative_rep_from_json(req.input)
    else:
        rep = ser.block_rep_from_json(req.input)
    cov = covariant_family(rep)
    m = asd_measurement(cov.dual_vectors, [cov.c] * cov.dual_vectors.shape[1])
    report.update(
        {
            "mode": "group",
            "c": cov.c,
            "t": cov.t,
            "acceptance": cov.acceptance,
            "acceptance_spread": cov.acceptance_spread,
            "biorth_residual": cov.biorth_residual,
            "povm": ser.measurement_to_json(m),
        }
    )
    c = [cov.c] * cov.dual_vectors.shape[1]
    return _asd_discrimination(report, req, cov.family, cov.dual_vectors, c, m)


def _asd_discrimination(report, req, family, dual_vectors, c, m) -> dict:
    d = family.dim
    worst = 0.0
    for j in range(d):
        p = outcome_probabilities(family.projector(j), m)
        kept = p[:-1]
        conditional = kept / kept.sum()
        target = np.zeros(d)
        target[j] = 1.0
        worst = max(worst, float(np.max(np.abs(conditional - target))))
    report["conditional_discrimination_error"] = worst
    report["npovm"] = None
    try:
        npovm, _, cond = asd_to_npovm(family, dual_vectors, c, tol=req.tolerances.fixed)
        report["npovm"] = ser.measurement_to_json(npovm)
        report["npovm_classification"] = classify(npovm).kind
        report["projection_norm"] = cond.projection_norm
    except DegenerateC0 as exc:
        # no rejection mass (projective case): nothing to convert, not an error
        report["npovm_note"] = str(exc)
    ok = worst <= 1e-10
    return _finish(report, EXIT_OK if ok else EXIT_VERIFICATION)


def handle_asd(req: AsdRequest) -> dict:
    report = _base_report("asd", req.seed, req.tolerances)
    try:
        if "states" in req.input:
            return _asd_family_payload(req, report)
        if "characters" in req.input or "irreps" in req.input:
            return _asd_group_payload(req, report)
        raise ParseError("input must contain 'states', 'characters', or 'irreps'")
    except Exception as exc:  # noqa: BLE001
        return _finish(report, _classify_exception(exc), str(exc))


def handle_demo_pt(req: DemoRequest) -> dict:
    report = _base_report("demo-pt", req.seed, req.tolerances)
    checks: list[tuple[str, bool, float]] = []

    def check(name: str, err: float, tol: float) -> bool:
        ok = bool(err <= tol)
        checks.append((name, ok, float(err)))
        return ok

    try:
        inst = ptdemo.demo_instance()
        ps = construct_povm(inst.decomposition)
        dom = implementation_domain(inst.decomposition)
        check("c == 2", abs(ps.c - 2.0), 1e-12)
        for lbl, expected in (("0", ptdemo.M0), ("1", ptdemo.M1), ("2", ptdemo.M2_EXPECTED)):
            check(
                f"M{lbl} entrywise",
                float(np.max(np.abs(ps.povm.effect(lbl) - expected))),
                1e-12,
            )
        check("acceptance == 1/2", abs(1.0 / ps.c - inst.acceptance_expected), 1e-12)
        check("acceptance >= 1/d", max(0.0, inst.bound - 1.0 / ps.c), 1e-12)
        for i, rho in enumerate(inst.states):
            for j, lbl in enumerate(inst.family.labels):
                val = hm.hs_inner(rho, inst.family.effect(lbl))
                check(f"Tr rho_{i} N_{lbl} == {float(i == j)}", abs(val - float(i == j)), 1e-12)
        ver = verify_implementation(
            inst.family, ps, dom, n_samples=req.samples, seed=req.seed, tol=req.tolerances.ratio
        )
        check("accept mass == 1/2 on sampled domain", abs(ver.acceptance - 0.5), 1e-9)
        check("accept mass spread", ver.lemma1_constancy_spread, 1e-10)
        check("max ratio error", ver.max_ratio_error, req.tolerances.ratio)
        sim = None
        if req.shots > 0:
            sim = simulate_postselected(ps.povm, ps.reject_label, ptdemo.RHO0, req.shots, req.seed)
            sigma = np.sqrt(0.25 / req.shots)
            check("MC acceptance within 4 sigma of 1/2", abs(sim.acceptance_rate - 0.5), 4 * sigma)
            check("MC conditional outcome 0", abs(sim.conditional_freqs["0"] - 1.0), 4 * sigma)
    except Exception as exc:  # noqa: BLE001
        return _finish(report, _classify_exception(exc), str(exc))
    failed = [name for name, ok, _ in checks if not ok]
    report.update(
        {
            "c": ps.c,
            "acceptance": 1.0 / ps.c,
            "bound": inst.bound,
            "dim_domain": dom.size,
            "max_ratio_error": ver.max_ratio_error,
            "lemma1_spread": ver.lemma1_constancy_spread,
            "checks": [
                {"name": name, "ok": ok, "error": err} for name, ok, err in checks
            ],
            "simulation": None
            if sim is None
            else {
                "acceptance_rate": sim.acceptance_rate,
                "conditional_freqs": sim.conditional_freqs,
                "shots": sim.shots,
                "seed": sim.seed,
            },
        }
    )
    if failed:
        return _finish(report, EXIT_VERIFICATION, f"first failed assertion: {failed[0]}")
    return _finish(report, EXIT_OK)


def handle_simulate(req: SimulateRequest) -> dict:
    report = _base_report("simulate", req.seed, req.tolerances)
    try:
        povm = ser.measurement_from_json(req.povm)
        rho = hm.as_density(ser.matrix_from_json(req.state))
        sim = simulate_postselected(povm, req.reject, rho, req.shots, req.seed)
    except Exception as exc:  # noqa: BLE001
        return _finish(report, _classify_exception(exc), str(exc))
    report.update(
        {
            "acceptance_rate": sim.acceptance_rate,
            "conditional_freqs": sim.conditional_freqs,
            "shots": sim.shots,
            "accepted": sim.accepted,
        }
    )
    return _finish(report, EXIT_OK)
