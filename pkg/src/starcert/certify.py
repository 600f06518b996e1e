"""Three-part certification pipeline.

Part 1 checks that every Bell expression in the family reaches its quantum
bound with uniform outcome weights.  Part 2 checks the algebraic conditions
tying Eve's second measurement to a reference (projective or rank-one
extremal POVM), in both the plain and the conjugated branch.  Part 3
compares post-measurement states against a target state up to complex
conjugation.

Branch semantics: "Plain" means the actual object matches the reference as
given, "Conjugate" means it matches the entrywise conjugate.  When both
match (real references) the tie resolves to Plain.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .bell import (
    SQRT2,
    BellEvaluation,
    all_labels,
    classical_bound_formula,
    evaluate_bell,
    quantum_bound,
)
from .config import DEFAULT_TOL, Tolerances
from .errors import ConditioningError, DimensionError
from .measurements import (
    MixedStateSpec,
    _embed_block,
    pauli_coeffs,
    trine_preparation_outcomes,
)
from .network import CorrelationTable, Scenario, assemble_joint_state, born_table
from .tensor import kron, numerical_rank, partial_trace

PLAIN = "Plain"
CONJUGATE = "Conjugate"
NO_BRANCH = "None"

CERTIFIED = "Certified"
FAILED = "Failed"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class ConjugationBranch:
    branch: str                 # Plain | Conjugate | None
    distance: float             # distance of the matched branch, or min of both

    def matched(self) -> bool:
        return self.branch != NO_BRANCH


@dataclass(frozen=True)
class Part1Report:
    evaluations: tuple          # one BellEvaluation per label, value None on conditioning failure
    pbar: tuple                 # P(l | e=0) per label
    bell_passed: bool
    pbar_passed: bool

    @property
    def passed(self) -> bool:
        return self.bell_passed and self.pbar_passed


@dataclass(frozen=True)
class Part2Report:
    mode: str                   # projective | povm
    residuals_plain: tuple      # per e=1 outcome
    residuals_conjugate: tuple
    branch: str
    passed: bool

    def max_residual(self) -> float:
        if self.branch == CONJUGATE:
            return max(self.residuals_conjugate)
        return max(self.residuals_plain)


@dataclass(frozen=True)
class Part3Report:
    outcomes: tuple             # e=1 outcome indices used for preparation
    probabilities: tuple        # observed P(l | e=1) per outcome
    expected_probabilities: tuple
    total_probability: float    # sum over the preparation outcomes
    branch: ConjugationBranch
    prob_passed: bool
    state_passed: bool

    @property
    def passed(self) -> bool:
        return self.prob_passed and self.state_passed


@dataclass(frozen=True)
class CertificationReport:
    part1: Part1Report
    part2: Part2Report | None
    part3: Part3Report | None
    verdict: str
    tolerances: Tolerances


def check_part1(table: CorrelationTable, n: int, tol: Tolerances = DEFAULT_TOL) -> Part1Report:
    """Maximal violation of every Bell expression with uniform P(l | e=0)."""
    if table.n != n:
        raise DimensionError(f"table has N={table.n}, expected {n}")
    beta_q = quantum_bound(n)
    evaluations = []
    pbar = []
    bell_passed = True
    for label in all_labels(n):
        pbar.append(table.pbar(label.value, 0))
        try:
            ev = evaluate_bell(table, label, tol)
        except ConditioningError:
            # a vanishing outcome cannot certify anything; report as failure
            ev = BellEvaluation(
                label=label, value=float("nan"),
                classical_bound=classical_bound_formula(n),
                quantum_bound=beta_q, violated=False, maximal=False,
            )
            bell_passed = False
            evaluations.append(ev)
            continue
        if not ev.maximal:
            bell_passed = False
        evaluations.append(ev)
    pbar_passed = all(abs(p - 2.0**-n) <= tol.acceptance for p in pbar)
    return Part1Report(
        evaluations=tuple(evaluations),
        pbar=tuple(pbar),
        bell_passed=bell_passed,
        pbar_passed=pbar_passed,
    )


def _tilde_correlator(table: CorrelationTable, idx, l: int, e: int = 1) -> float:
    """<A~_{1,i_1} A_{2,i_2} ... A_{N,i_N} R_{l|e}> for one Pauli index tuple.

    Index 3 marginalizes a party; indices 0 and 1 on party 1 select the
    rotated combinations (A_0 -+ A_1)/sqrt2.
    """
    rest = [None if i == 3 else int(i) for i in idx[1:]]
    i1 = int(idx[0])
    if i1 == 3:
        return table.correlator([None] + rest, l, e)
    if i1 == 2:
        return table.correlator([2] + rest, l, e)
    c0 = table.correlator([0] + rest, l, e)
    c1 = table.correlator([1] + rest, l, e)
    sign = -1.0 if i1 == 0 else 1.0
    return (c0 + sign * c1) / SQRT2


def reference_coeff_tensors(effects, n: int, tol: Tolerances = DEFAULT_TOL):
    """Pauli coefficient tensor of each reference effect on n qubits."""
    return [pauli_coeffs(m, n, tol) for m in effects]


def reference_ranks(effects, tol: Tolerances = DEFAULT_TOL):
    return [numerical_rank(m, tol.rank, tol) for m in effects]


def _branch_from_residuals(plain, conjugate, tol: Tolerances) -> tuple:
    """Resolve a single branch for all outcomes; ties go to Plain."""
    if max(plain) <= tol.acceptance:
        return PLAIN, True
    if max(conjugate) <= tol.acceptance:
        return CONJUGATE, True
    return NO_BRANCH, False


def check_projective_conditions(table: CorrelationTable, f_tensors, ranks,
                                tol: Tolerances = DEFAULT_TOL) -> Part2Report:
    """Coefficient-weighted expectation sums against r_l / 2^N, per outcome."""
    n = table.n
    k_out = table.outcome_count(1)
    if len(f_tensors) != k_out or len(ranks) != k_out:
        raise DimensionError(
            f"need one coefficient tensor and rank per e=1 outcome ({k_out}), "
            f"got {len(f_tensors)} and {len(ranks)}"
        )
    res_plain = []
    res_conj = []
    for l, (f, r) in enumerate(zip(f_tensors, ranks)):
        target = r / 2.0**n
        lhs_plain = 0.0
        lhs_conj = 0.0
        g = f.conjugated()
        for idx in np.argwhere(np.abs(f.coeffs) > 1e-14):
            idx = tuple(int(i) for i in idx)
            e_val = _tilde_correlator(table, idx, l)
            lhs_plain += f.coeffs[idx] * e_val
            lhs_conj += g.coeffs[idx] * e_val
        res_plain.append(abs(lhs_plain - target))
        res_conj.append(abs(lhs_conj - target))
    branch, passed = _branch_from_residuals(res_plain, res_conj, tol)
    return Part2Report(
        mode="projective",
        residuals_plain=tuple(res_plain),
        residuals_conjugate=tuple(res_conj),
        branch=branch,
        passed=passed,
    )


def check_povm_conditions(table: CorrelationTable, f_tensors,
                          tol: Tolerances = DEFAULT_TOL) -> Part2Report:
    """Per-tuple expectation match against every Pauli coefficient."""
    n = table.n
    k_out = table.outcome_count(1)
    if len(f_tensors) != k_out:
        raise DimensionError(
            f"need one coefficient tensor per e=1 outcome ({k_out}), got {len(f_tensors)}"
        )
    res_plain = []
    res_conj = []
    for l, f in enumerate(f_tensors):
        g = f.conjugated()
        worst_plain = 0.0
        worst_conj = 0.0
        for idx in product(range(4), repeat=n):
            e_val = _tilde_correlator(table, idx, l)
            worst_plain = max(worst_plain, abs(e_val - f.coeffs[idx]))
            worst_conj = max(worst_conj, abs(e_val - g.coeffs[idx]))
        res_plain.append(worst_plain)
        res_conj.append(worst_conj)
    branch, passed = _branch_from_residuals(res_plain, res_conj, tol)
    return Part2Report(
        mode="povm",
        residuals_plain=tuple(res_plain),
        residuals_conjugate=tuple(res_conj),
        branch=branch,
        passed=passed,
    )


def post_measurement_state(scenario: Scenario, l: int, e: int,
                           tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Normalized Alice state conditioned on Eve's outcome l under input e."""
    effects = scenario.eve[e].effects
    if not 0 <= l < len(effects):
        raise DimensionError(f"outcome l={l} out of range for e={e}")
    joint = assemble_joint_state(scenario)
    d_a = int(np.prod(scenario.alice_dims))
    projected = joint @ kron(np.eye(d_a, dtype=complex), effects[l])
    dims = list(scenario.alice_dims) + list(scenario.eve_dims)
    n = scenario.n_parties
    rho = partial_trace(projected, dims, keep=range(n))
    p = float(np.trace(rho).real)
    if p <= tol.probability:
        raise ConditioningError(f"outcome l={l}, e={e} has probability {p:.3e}")
    rho = rho / p
    return (rho + rho.conj().T) / 2


def match_up_to_conjugation(actual: np.ndarray, reference: np.ndarray,
                            tol: Tolerances = DEFAULT_TOL) -> ConjugationBranch:
    """Compare a state to a reference (x) junk factor, in both branches."""
    actual = np.asarray(actual, dtype=complex)
    reference = np.asarray(reference, dtype=complex)
    d_act = actual.shape[0]
    d_ref = reference.shape[0]
    if d_act % d_ref != 0:
        raise DimensionError(
            f"actual dim {d_act} is not a multiple of reference dim {d_ref}"
        )
    d_junk = d_act // d_ref
    ref_n = reference / np.trace(reference)
    if d_junk == 1:
        candidates = [ref_n, ref_n.conj()]
    else:
        junk = partial_trace(actual, [d_ref, d_junk], keep=[1])
        candidates = [kron(ref_n, junk), kron(ref_n.conj(), junk)]
    d_plain = float(np.linalg.norm(actual - candidates[0]))
    d_conj = float(np.linalg.norm(actual - candidates[1]))
    if d_plain <= tol.acceptance:
        return ConjugationBranch(PLAIN, d_plain)
    if d_conj <= tol.acceptance:
        return ConjugationBranch(CONJUGATE, d_conj)
    return ConjugationBranch(NO_BRANCH, min(d_plain, d_conj))


def _part3_from_outcomes(scenario: Scenario, table: CorrelationTable, outcomes,
                         expected_probs, reference: np.ndarray,
                         tol: Tolerances) -> Part3Report:
    """Shared part-3 core: outcome probabilities plus weighted state average."""
    n = scenario.n_parties
    probs = [table.pbar(l, 1) for l in outcomes]
    prob_passed = all(
        abs(p - q) <= tol.acceptance for p, q in zip(probs, expected_probs)
    )
    total = float(sum(probs))
    if abs(total - 2.0**-n) > tol.acceptance:
        prob_passed = False
    d_a = int(np.prod(scenario.alice_dims))
    avg = np.zeros((d_a, d_a), dtype=complex)
    for l, p in zip(outcomes, probs):
        avg += p * post_measurement_state(scenario, l, 1, tol)
    avg /= total
    target = _embed_block(reference, d_a)
    branch = match_up_to_conjugation(avg, target, tol)
    return Part3Report(
        outcomes=tuple(outcomes),
        probabilities=tuple(probs),
        expected_probabilities=tuple(expected_probs),
        total_probability=total,
        branch=branch,
        prob_passed=prob_passed,
        state_passed=branch.matched(),
    )


def certify_state_preparation(scenario: Scenario, spec: MixedStateSpec,
                              table: CorrelationTable = None,
                              tol: Tolerances = DEFAULT_TOL) -> Part3Report:
    """Mixed-state preparation via the trine construction.

    Expects Eve's second measurement to be the embedded trine POVM of
    ``spec``; outcome (k, 1) sits at effect index 3k and must occur with
    probability p_k / 2^N.
    """
    if table is None:
        table = born_table(scenario, tol)
    n = scenario.n_parties
    outcomes = trine_preparation_outcomes(spec)
    if max(outcomes) >= table.outcome_count(1):
        raise DimensionError(
            "Eve's second measurement has too few outcomes for this state spec"
        )
    expected = [w / 2.0**n for w in spec.weights]
    return _part3_from_outcomes(
        scenario, table, outcomes, expected, spec.density_matrix(), tol
    )


def certify_pure_preparation(scenario: Scenario, psi: np.ndarray,
                             table: CorrelationTable = None,
                             tol: Tolerances = DEFAULT_TOL) -> Part3Report:
    """Pure-state preparation: outcome 0 of an embedded rank-one projection."""
    if table is None:
        table = born_table(scenario, tol)
    n = scenario.n_parties
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    reference = np.outer(psi, psi.conj())
    return _part3_from_outcomes(scenario, table, [0], [2.0**-n], reference, tol)


def _resolve_verdict(part1: Part1Report, part2: Part2Report | None,
                     part3: Part3Report | None) -> str:
    if not part1.bell_passed:
        return FAILED
    if part2 is not None and not part2.passed:
        return FAILED
    if part3 is not None and not part3.passed:
        return FAILED
    if not part1.pbar_passed:
        # Bell values maximal but the outcome weights deviate: the two
        # hypotheses are reported separately rather than conflated.
        return INCONCLUSIVE
    return CERTIFIED


def certify(scenario: Scenario, reference_effects, mode: str,
            tol: Tolerances = DEFAULT_TOL,
            state_spec: MixedStateSpec = None) -> CertificationReport:
    """Full pipeline: part 1, part 2 in the requested mode, optional part 3."""
    if mode not in ("projective", "povm"):
        raise DimensionError(f"unknown certification mode {mode!r}")
    n = scenario.n_parties
    table = born_table(scenario, tol)
    part1 = check_part1(table, n, tol)
    f_tensors = reference_coeff_tensors(reference_effects, n, tol)
    if mode == "projective":
        ranks = reference_ranks(reference_effects, tol)
        part2 = check_projective_conditions(table, f_tensors, ranks, tol)
    else:
        part2 = check_povm_conditions(table, f_tensors, tol)
    part3 = None
    if state_spec is not None:
        part3 = certify_state_preparation(scenario, state_spec, table, tol)
        if part3.branch.matched() and part2.passed and part3.branch.branch != part2.branch:
            # inconsistent branches across pipeline stages cannot certify
            part3 = Part3Report(
                outcomes=part3.outcomes,
                probabilities=part3.probabilities,
                expected_probabilities=part3.expected_probabilities,
                total_probability=part3.total_probability,
                branch=ConjugationBranch(NO_BRANCH, part3.branch.distance),
                prob_passed=part3.prob_passed,
                state_passed=False,
            )
    verdict = _resolve_verdict(part1, part2, part3)
    return CertificationReport(
        part1=part1, part2=part2, part3=part3, verdict=verdict, tolerances=tol
    )


# ---------------------------------------------------------------------------
# Noise scans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanRow:
    level: float
    bell_values: tuple          # per label, NaN when conditioning fails
    min_bell: float
    pbar_deviation: float       # max |P(l|0) - 2^-N|
    part2_max_residual: float | None


@dataclass(frozen=True)
class ScanReport:
    model: str
    rows: tuple
    bell_monotone: bool         # min Bell value non-decreasing in the level


def _depolarize_sources(scenario: Scenario, v: float) -> Scenario:
    sources = tuple(
        v * rho + (1 - v) * np.eye(rho.shape[0]) / rho.shape[0]
        for rho in scenario.sources
    )
    return Scenario(
        n_parties=scenario.n_parties,
        sources=sources,
        alice_observables=scenario.alice_observables,
        eve=scenario.eve,
    )


def _depolarize_effects(scenario: Scenario, v: float) -> Scenario:
    from .network import EveMeasurement

    eve = []
    for meas in scenario.eve:
        dim = meas.dim
        effects = tuple(
            v * m + (1 - v) * (np.trace(m).real / dim) * np.eye(dim)
            for m in meas.effects
        )
        eve.append(EveMeasurement(effects))
    return Scenario(
        n_parties=scenario.n_parties,
        sources=scenario.sources,
        alice_observables=scenario.alice_observables,
        eve=tuple(eve),
    )


NOISE_MODELS = {
    "isotropic": _depolarize_sources,
    "effects": _depolarize_effects,
}


def noise_scan(scenario: Scenario, model: str, grid,
               reference_effects=None, mode: str = "projective",
               tol: Tolerances = DEFAULT_TOL) -> ScanReport:
    """Part-1 (and optionally part-2) metrics along a noise grid."""
    if model not in NOISE_MODELS:
        raise DimensionError(f"unknown noise model {model!r}")
    grid = [float(v) for v in grid]
    if not grid:
        raise DimensionError("noise grid must not be empty")
    if any(not 0 <= v <= 1 for v in grid):
        raise DimensionError("noise levels must lie in [0, 1]")
    apply_noise = NOISE_MODELS[model]
    n = scenario.n_parties
    f_tensors = None
    ranks = None
    if reference_effects is not None:
        f_tensors = reference_coeff_tensors(reference_effects, n, tol)
        if mode == "projective":
            ranks = reference_ranks(reference_effects, tol)
    rows = []
    for v in sorted(grid):
        noisy = apply_noise(scenario, v)
        table = born_table(noisy, tol)
        values = []
        for label in all_labels(n):
            try:
                values.append(evaluate_bell(table, label, tol).value)
            except ConditioningError:
                values.append(float("nan"))
        pbar_dev = max(
            abs(table.pbar(l, 0) - 2.0**-n) for l in range(2**n)
        )
        part2_res = None
        if f_tensors is not None:
            if mode == "projective":
                part2 = check_projective_conditions(table, f_tensors, ranks, tol)
            else:
                part2 = check_povm_conditions(table, f_tensors, tol)
            part2_res = min(max(part2.residuals_plain), max(part2.residuals_conjugate))
        rows.append(ScanRow(
            level=v,
            bell_values=tuple(values),
            min_bell=float(np.nanmin(values)),
            pbar_deviation=pbar_dev,
            part2_max_residual=part2_res,
        ))
    mins = [r.min_bell for r in rows]
    monotone = all(b >= a - tol.acceptance for a, b in zip(mins, mins[1:]))
    return ScanReport(model=model, rows=tuple(rows), bell_monotone=monotone)
