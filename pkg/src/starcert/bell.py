"""The 2^N-member Bell expression family, its bounds, and SOS diagnostics.

Each expression is labelled by an N-bit string l = l_1...l_N (party 1 owns
the leading bit).  The classical bound is (sqrt(2)+1)(N-1), the quantum
bound 3(N-1); both are label-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import DimensionError
from .network import BinaryObservableTriple, CorrelationTable
from .tensor import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    hermitian_eig,
    kron_all,
    require_hermitian,
)

SQRT2 = math.sqrt(2.0)


def classical_bound_formula(n: int) -> float:
    return (SQRT2 + 1.0) * (n - 1)


def quantum_bound(n: int) -> float:
    return 3.0 * (n - 1)


@dataclass(frozen=True)
class BellOutcomeLabel:
    """N-bit outcome label; ``value`` packs the bits with l_1 most significant."""

    bits: tuple

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits) or len(bits) < 2:
            raise DimensionError(f"label bits must be >= 2 binary digits, got {self.bits}")
        object.__setattr__(self, "bits", bits)

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def value(self) -> int:
        out = 0
        for b in self.bits:
            out = 2 * out + b
        return out

    @classmethod
    def from_value(cls, value: int, n: int) -> "BellOutcomeLabel":
        if not 0 <= value < 2**n:
            raise DimensionError(f"label value {value} out of range for N={n}")
        return cls(tuple((value >> (n - 1 - i)) & 1 for i in range(n)))


def all_labels(n: int):
    return [BellOutcomeLabel.from_value(v, n) for v in range(2**n)]


@dataclass(frozen=True)
class BellEvaluation:
    label: BellOutcomeLabel
    value: float
    classical_bound: float
    quantum_bound: float
    violated: bool
    maximal: bool


@dataclass(frozen=True)
class SosResiduals:
    """Norms of the SOS terms applied to a state.

    The weighted square sum (N-1)*p^2 + sum(r^2) + sum(q^2) equals
    2*[3(N-1) - <Bell operator>] for unitary dichotomic observables.
    """

    p_norm: float
    r_norms: tuple
    q_norms: tuple

    @property
    def n(self) -> int:
        return len(self.r_norms) + 1

    def weighted_square_sum(self) -> float:
        return (
            (self.n - 1) * self.p_norm**2
            + sum(r**2 for r in self.r_norms)
            + sum(q**2 for q in self.q_norms)
        )

    def max_residual(self) -> float:
        return max((self.p_norm,) + self.r_norms + self.q_norms)


def tilde_observables(a0: np.ndarray, a1: np.ndarray):
    """Rotated pair ((a0 - a1)/sqrt2, (a0 + a1)/sqrt2) for party 1."""
    a0 = require_hermitian(np.asarray(a0, dtype=complex), what="a0")
    a1 = require_hermitian(np.asarray(a1, dtype=complex), what="a1")
    if a0.shape != a1.shape:
        raise DimensionError(f"shape mismatch {a0.shape} vs {a1.shape}")
    return (a0 - a1) / SQRT2, (a0 + a1) / SQRT2


def ideal_observables(n: int):
    """The qubit observables achieving the quantum bound.

    Party 1 measures ((X+Z)/sqrt2, (X-Z)/sqrt2, Y); every other party
    measures (Z, X, Y).
    """
    if n < 2:
        raise DimensionError("need at least two external parties")
    first = BinaryObservableTriple(
        (PAULI_X + PAULI_Z) / SQRT2, (PAULI_X - PAULI_Z) / SQRT2, PAULI_Y
    )
    rest = BinaryObservableTriple(PAULI_Z, PAULI_X, PAULI_Y)
    return [first] + [rest] * (n - 1)


def ghz_vector(label: BellOutcomeLabel) -> np.ndarray:
    """GHZ-like vector (|l_1...l_N> + (-1)^{l_1} |complement>)/sqrt2."""
    n = label.n
    v = np.zeros(2**n, dtype=complex)
    idx = label.value
    v[idx] = 1 / SQRT2
    v[2**n - 1 - idx] += (-1) ** label.bits[0] / SQRT2
    return v


def bell_value(table: CorrelationTable, label: BellOutcomeLabel, e: int = 0) -> float:
    """Bell expression value on correlators conditioned on Eve's outcome.

    The rotated party-1 terms are expanded into raw-input correlators before
    the table lookup; parties absent from a term are marginalized.
    """
    n = table.n
    if label.n != n:
        raise DimensionError(f"label has {label.n} bits, table has N={n}")
    bits = label.bits
    cond = table.conditional_correlator

    all_one = [1] * n
    term1 = (n - 1) * (
        cond([0] + all_one[1:], label.value, e) + cond([1] + all_one[1:], label.value, e)
    ) / SQRT2

    term2 = 0.0
    for i in range(1, n):
        s0 = [None] * n
        s1 = [None] * n
        s0[0], s0[i] = 0, 0
        s1[0], s1[i] = 1, 0
        term2 += (-1) ** bits[i] * (
            cond(s0, label.value, e) - cond(s1, label.value, e)
        ) / SQRT2

    term3 = 0.0
    for i in range(1, n):
        s = [1] * n
        s[0], s[i] = 2, 2
        term3 += (-1) ** bits[i] * cond(s, label.value, e)

    sign1 = (-1) ** bits[0]
    return sign1 * (term1 + term2 - sign1 * term3)


@dataclass(frozen=True)
class ClassicalBoundResult:
    bound: float
    strategy: np.ndarray          # (N, 3) array of +-1 signs, argmax for l = 0
    per_label_maxima: np.ndarray  # one maximum per label value


def _deterministic_values(n: int) -> np.ndarray:
    """Signs s[t, i, j] for all 8^N deterministic strategies.

    Strategy index t packs one bit per (party, input); party 1 sits in the
    lowest bits so that it varies innermost in the enumeration.
    """
    t = np.arange(8**n)
    signs = np.empty((len(t), n, 3))
    for i in range(n):
        for j in range(3):
            signs[:, i, j] = 1 - 2 * ((t >> (3 * i + j)) & 1)
    return signs


def classical_bound_bruteforce(n: int) -> ClassicalBoundResult:
    """Exact maximum over all local deterministic strategies, for every label."""
    if not 2 <= n <= 5:
        raise DimensionError("exhaustive classical bound supports 2 <= N <= 5")
    s = _deterministic_values(n)
    prod_rest_1 = np.prod(s[:, 1:, 1], axis=1)
    values = np.empty((8**n, 2**n))
    for label in all_labels(n):
        bits = label.bits
        term1 = (n - 1) * (s[:, 0, 0] + s[:, 0, 1]) / SQRT2 * prod_rest_1
        term2 = np.zeros(8**n)
        term3 = np.zeros(8**n)
        for i in range(1, n):
            term2 += (-1) ** bits[i] * (s[:, 0, 0] - s[:, 0, 1]) / SQRT2 * s[:, i, 0]
            others = prod_rest_1 / s[:, i, 1]
            term3 += (-1) ** bits[i] * s[:, 0, 2] * s[:, i, 2] * others
        sign1 = (-1) ** bits[0]
        values[:, label.value] = sign1 * (term1 + term2 - sign1 * term3)
    per_label = values.max(axis=0)
    best = int(np.argmax(values[:, 0]))
    return ClassicalBoundResult(
        bound=float(per_label[0]),
        strategy=_deterministic_values(n)[best],
        per_label_maxima=per_label,
    )


def _embed(ops_by_party: dict, dims) -> np.ndarray:
    """Operator acting as ops_by_party[i] on slot i and identity elsewhere."""
    factors = [
        ops_by_party.get(i, np.eye(d, dtype=complex)) for i, d in enumerate(dims)
    ]
    return kron_all(factors)


def bell_operator(label: BellOutcomeLabel, observables) -> np.ndarray:
    """The Bell expression as a Hermitian operator on the joint Alice space."""
    observables = list(observables)
    n = len(observables)
    if label.n != n:
        raise DimensionError(f"label has {label.n} bits, got {n} observable triples")
    dims = [t.dim for t in observables]
    bits = label.bits
    a1_tilde_minus, a1_tilde_plus = tilde_observables(observables[0].a0, observables[0].a1)

    op = (n - 1) * (-1) ** bits[0] * _embed(
        {0: a1_tilde_plus, **{i: observables[i].a1 for i in range(1, n)}}, dims
    )
    for i in range(1, n):
        op = op + (-1) ** (bits[0] + bits[i]) * _embed(
            {0: a1_tilde_minus, i: observables[i].a0}, dims
        )
    for i in range(1, n):
        slots = {0: observables[0].a2, i: observables[i].a2}
        for j in range(1, n):
            if j != i:
                slots[j] = observables[j].a1
        op = op - (-1) ** bits[i] * _embed(slots, dims)
    return op


def sos_residuals(label: BellOutcomeLabel, observables, state: np.ndarray) -> SosResiduals:
    """Norms of the SOS operators applied to a joint Alice state."""
    observables = list(observables)
    n = len(observables)
    dims = [t.dim for t in observables]
    state = np.asarray(state, dtype=complex).reshape(-1)
    if state.size != int(np.prod(dims)):
        raise DimensionError(
            f"state dim {state.size} does not match joint observable dim {int(np.prod(dims))}"
        )
    bits = label.bits
    a1_tilde_minus, a1_tilde_plus = tilde_observables(observables[0].a0, observables[0].a1)

    p_op = (-1) ** bits[0] * _embed({0: a1_tilde_plus}, dims) - _embed(
        {i: observables[i].a1 for i in range(1, n)}, dims
    )
    r_norms = []
    q_norms = []
    for i in range(1, n):
        r_op = (-1) ** (bits[0] + bits[i]) * _embed({0: a1_tilde_minus}, dims) - _embed(
            {i: observables[i].a0}, dims
        )
        slots = {i: observables[i].a2}
        for j in range(1, n):
            if j != i:
                slots[j] = observables[j].a1
        q_op = (-1) ** bits[i] * _embed({0: observables[0].a2}, dims) + _embed(slots, dims)
        r_norms.append(float(np.linalg.norm(r_op @ state)))
        q_norms.append(float(np.linalg.norm(q_op @ state)))
    return SosResiduals(
        p_norm=float(np.linalg.norm(p_op @ state)),
        r_norms=tuple(r_norms),
        q_norms=tuple(q_norms),
    )


def operator_diagnostics(observables):
    """Per-party algebraic diagnostics: anticommutator and unitarity defects.

    At the quantum bound both must vanish: {A_0, A_1} = 0 and A_j^2 = 1.
    """
    report = []
    for triple in observables:
        a0, a1, a2 = triple.observables()
        eye = np.eye(triple.dim)
        report.append(
            {
                "anticommutator_norm": float(np.linalg.norm(a0 @ a1 + a1 @ a0)),
                "unitarity_defects": tuple(
                    float(np.linalg.norm(a @ a - eye)) for a in (a0, a1, a2)
                ),
            }
        )
    return report


def evaluate_bell(table: CorrelationTable, label: BellOutcomeLabel,
                  tol: Tolerances = DEFAULT_TOL) -> BellEvaluation:
    """Bell value of one label packaged with its bounds and verdict flags."""
    n = table.n
    value = bell_value(table, label)
    beta_c = classical_bound_formula(n)
    beta_q = quantum_bound(n)
    return BellEvaluation(
        label=label,
        value=value,
        classical_bound=beta_c,
        quantum_bound=beta_q,
        violated=value > beta_c + tol.acceptance,
        maximal=abs(value - beta_q) <= tol.acceptance,
    )


def max_bell_eigenvalue(label: BellOutcomeLabel, observables,
                        tol: Tolerances = DEFAULT_TOL) -> float:
    op = bell_operator(label, observables)
    vals, _ = hermitian_eig(op, tol)
    return float(vals[0])
