"""Construction and validation of the measurements the certifier targets.

Covers the Pauli coefficient tensors used by the certification conditions,
the GHZ-basis measurement, embedding/completion of projective measurements
and rank-one extremal POVMs into N-qubit space, and the trine POVM that
remotely prepares an arbitrary full-rank mixed state.

Pauli index convention (deliberately nonstandard, keep it in mind when
reading coefficient tensors): sigma_0 = Z, sigma_1 = X, sigma_2 = Y,
sigma_3 = identity.  Index j in {0, 1, 2} pairs with a party's observable
A_j; index 3 marginalizes the party.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import ContractViolation, DimensionError, ValidationError
from .tensor import (
    ID2,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    as_operator,
    hermitian_eig,
    kron_all,
    require_hermitian,
)

PAULI_BASIS = (PAULI_Z, PAULI_X, PAULI_Y, ID2)


@lru_cache(maxsize=None)
def _pauli_strings(n: int):
    """All 4^n tensor products of the basis, keyed by index tuple."""
    return {
        idx: kron_all([PAULI_BASIS[i] for i in idx])
        for idx in product(range(4), repeat=n)
    }


@dataclass(frozen=True)
class PauliCoeffTensor:
    """Real coefficients of a Hermitian 2^n x 2^n matrix in the Pauli basis."""

    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.shape != (4,) * self.n:
            raise DimensionError(f"coefficient tensor must have shape {(4,) * self.n}")
        object.__setattr__(self, "coeffs", c)

    def __getitem__(self, idx):
        return float(self.coeffs[idx])

    def conjugated(self) -> "PauliCoeffTensor":
        """Coefficients of the entrywise conjugate: Y slots flip sign."""
        signs = np.ones((4,) * self.n)
        for axis in range(self.n):
            sl = [slice(None)] * self.n
            sl[axis] = 2
            signs[tuple(sl)] *= -1
        return PauliCoeffTensor(self.n, self.coeffs * signs)


def pauli_coeffs(m: np.ndarray, n: int, tol: Tolerances = DEFAULT_TOL) -> PauliCoeffTensor:
    """Expand a Hermitian matrix on n qubits in the Pauli basis."""
    m = require_hermitian(as_operator(m), tol.structural)
    if m.shape[0] != 2**n:
        raise DimensionError(f"matrix dim {m.shape[0]} is not 2^{n}")
    coeffs = np.empty((4,) * n)
    for idx, sigma in _pauli_strings(n).items():
        c = np.trace(sigma @ m) / 2**n
        coeffs[idx] = c.real
    return PauliCoeffTensor(n, coeffs)


def reconstruct_from_coeffs(f: PauliCoeffTensor) -> np.ndarray:
    """Inverse of ``pauli_coeffs``."""
    out = np.zeros((2**f.n, 2**f.n), dtype=complex)
    for idx, sigma in _pauli_strings(f.n).items():
        c = f.coeffs[idx]
        if c != 0.0:
            out += c * sigma
    return out


@dataclass(frozen=True)
class Povm:
    """A generalized measurement: PSD effects summing to the identity."""

    effects: tuple
    tol: Tolerances = DEFAULT_TOL

    def __post_init__(self):
        effects = tuple(as_operator(m) for m in self.effects)
        if not effects:
            raise ValidationError("POVM needs at least one effect")
        dim = effects[0].shape[0]
        diag = validate_povm(effects, self.tol)
        if not diag.passed:
            raise ValidationError(
                f"invalid POVM: min eigenvalue {min(diag.min_eigenvalues):.3e}, "
                f"completeness residual {diag.completeness_residual:.3e}"
            )
        object.__setattr__(self, "effects", effects)

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    @property
    def outcome_count(self) -> int:
        return len(self.effects)

    def conjugated(self) -> "Povm":
        return Povm(tuple(np.conj(m) for m in self.effects), self.tol)


@dataclass(frozen=True)
class PovmDiagnostics:
    min_eigenvalues: tuple
    completeness_residual: float
    passed: bool


def validate_povm(effects, tol: Tolerances = DEFAULT_TOL) -> PovmDiagnostics:
    """Diagnostic check: per-effect minimal eigenvalue and completeness residual."""
    effects = [as_operator(m) for m in effects]
    dim = effects[0].shape[0]
    for i, m in enumerate(effects):
        if m.shape[0] != dim:
            raise DimensionError(f"effect {i} has dim {m.shape[0]}, expected {dim}")
    min_eigs = []
    total = np.zeros((dim, dim), dtype=complex)
    for m in effects:
        vals, _ = hermitian_eig(m, tol)
        min_eigs.append(float(vals[-1]))
        total += m
    residual = float(np.linalg.norm(total - np.eye(dim)))
    passed = min(min_eigs) >= -tol.structural and residual <= tol.structural
    return PovmDiagnostics(tuple(min_eigs), residual, passed)


def ghz_basis_measurement(n: int) -> Povm:
    """The 2^n rank-one projectors onto the GHZ-like basis."""
    from .bell import all_labels, ghz_vector  # local import avoids a cycle

    if n < 2:
        raise DimensionError("GHZ basis needs at least two parties")
    effects = []
    for label in all_labels(n):
        v = ghz_vector(label)
        effects.append(np.outer(v, v.conj()))
    return Povm(tuple(effects))


def _embed_block(m: np.ndarray, dim: int) -> np.ndarray:
    """Zero-pad a D x D operator into the top-left block of dim x dim.

    The standard-basis embedding |i> -> |binary(i)> is exactly this padding.
    """
    out = np.zeros((dim, dim), dtype=complex)
    d = m.shape[0]
    out[:d, :d] = m
    return out


def embed_projective(effects, n: int, tol: Tolerances = DEFAULT_TOL) -> Povm:
    """Embed mutually orthogonal projections on C^D into n qubits.

    Appends the complement projector M_perp = 1 - sum(embedded) unless the
    input already resolves the full space.
    """
    effects = [require_hermitian(as_operator(m), tol.structural) for m in effects]
    d = effects[0].shape[0]
    dim = 2**n
    if d > dim:
        raise DimensionError(f"cannot embed dim {d} into 2^{n} = {dim}")
    for i, p in enumerate(effects):
        if p.shape[0] != d:
            raise DimensionError(f"effect {i} has dim {p.shape[0]}, expected {d}")
        if np.linalg.norm(p @ p - p) > 100 * tol.structural:
            raise ContractViolation(f"effect {i} is not a projection")
        for j in range(i):
            if np.linalg.norm(effects[j] @ p) > 100 * tol.structural:
                raise ContractViolation(f"effects {j} and {i} are not orthogonal")
    embedded = [_embed_block(p, dim) for p in effects]
    perp = np.eye(dim) - sum(embedded)
    if np.linalg.norm(perp) > tol.structural:
        embedded.append(perp)
    return Povm(tuple(embedded), tol)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate a global phase so the largest-magnitude component is real positive."""
    k = int(np.argmax(np.abs(v)))
    phase = v[k] / abs(v[k])
    return v / phase


def _complement_projectors(embedded_sum: np.ndarray, count: int,
                           tol: Tolerances = DEFAULT_TOL):
    """Rank-one projectors spanning the kernel-of-coverage of an embedded POVM."""
    dim = embedded_sum.shape[0]
    gap = np.eye(dim) - embedded_sum
    vals, vecs = hermitian_eig(gap, tol)
    ones = [i for i, v in enumerate(vals) if abs(v - 1) <= 100 * tol.structural]
    if len(ones) != count:
        raise ContractViolation(
            f"expected {count} unit eigenvalues in the embedding complement, got {len(ones)}"
        )
    projectors = []
    for i in ones:
        v = _fix_phase(vecs[:, i])
        projectors.append(np.outer(v, v.conj()))
    return projectors


def embed_rank1_povm(povm: Povm, n: int, tol: Tolerances = DEFAULT_TOL) -> Povm:
    """Embed a complete rank-one POVM on C^D into n qubits.

    Appends 2^n - D mutually orthogonal rank-one projectors on the unused
    subspace; the completed measurement stays extremal whenever the input is.
    """
    d = povm.dim
    dim = 2**n
    if d > dim:
        raise DimensionError(f"cannot embed dim {d} into 2^{n} = {dim}")
    # rank-one and completeness preconditions
    is_extremal_rank1(povm, tol)  # raises on a non-rank-one effect
    embedded = [_embed_block(m, dim) for m in povm.effects]
    if d == dim:
        return Povm(tuple(embedded), tol)
    extra = _complement_projectors(sum(embedded), dim - d, tol)
    return Povm(tuple(embedded) + tuple(extra), tol)


@dataclass(frozen=True)
class ExtremalityCertificate:
    extremal: bool
    gram_min_eigenvalue: float

    def __bool__(self) -> bool:
        return self.extremal


def is_extremal_rank1(povm: Povm, tol: Tolerances = DEFAULT_TOL) -> ExtremalityCertificate:
    """Extremality test for a rank-one POVM.

    A rank-one POVM is extremal iff its effects are linearly independent as
    operators; the certificate is the minimal eigenvalue of the Gram matrix
    of the Frobenius-normalized, vectorized effects.
    """
    vectors = []
    for i, m in enumerate(povm.effects):
        vals, _ = hermitian_eig(m, tol)
        if len(vals) > 1 and abs(vals[1]) >= tol.rank:
            raise ContractViolation(
                f"effect {i} is not rank-one (second eigenvalue {vals[1]:.3e})"
            )
        vec = m.reshape(-1)
        norm = np.linalg.norm(vec)
        if norm <= tol.rank:
            raise ContractViolation(f"effect {i} is numerically zero")
        vectors.append(vec / norm)
    gram = np.array([[np.vdot(u, v) for v in vectors] for u in vectors])
    vals, _ = hermitian_eig(gram, tol)
    min_eig = float(vals[-1])
    return ExtremalityCertificate(extremal=min_eig > tol.rank, gram_min_eigenvalue=min_eig)


@dataclass(frozen=True)
class MixedStateSpec:
    """Spectral description of a full-rank target state on C^d."""

    d: int
    weights: tuple
    vectors: tuple

    def __post_init__(self):
        weights = tuple(float(w) for w in self.weights)
        vectors = tuple(np.asarray(v, dtype=complex).reshape(-1) for v in self.vectors)
        if len(weights) != len(vectors):
            raise ValidationError("need one weight per eigenvector")
        if any(w <= 0 for w in weights):
            raise ValidationError("weights must be strictly positive")
        if abs(sum(weights) - 1) > 1e-12:
            raise ValidationError(f"weights sum to {sum(weights)}, expected 1")
        for k, v in enumerate(vectors):
            if v.size != self.d:
                raise DimensionError(f"vector {k} has dim {v.size}, expected {self.d}")
        gram = np.array([[np.vdot(u, v) for v in vectors] for u in vectors])
        if np.linalg.norm(gram - np.eye(len(vectors))) > DEFAULT_TOL.structural:
            raise ValidationError("eigenvectors are not orthonormal within tolerance")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "vectors", vectors)

    @property
    def rank(self) -> int:
        return len(self.weights)

    def density_matrix(self) -> np.ndarray:
        rho = np.zeros((self.d, self.d), dtype=complex)
        for w, v in zip(self.weights, self.vectors):
            rho += w * np.outer(v, v.conj())
        return rho


def trine_povm(spec: MixedStateSpec, tol: Tolerances = DEFAULT_TOL) -> Povm:
    """The 3d-outcome rank-one POVM on C^{2d} that prepares ``spec`` remotely.

    Component k contributes three effects; the first one is p_k |psi_k><psi_k|,
    so the (k, 1) outcomes reconstruct the target state.  Companion vectors
    live in a second d-dimensional block, which makes them orthogonal to every
    eigenvector by construction.
    """
    if spec.rank != spec.d:
        raise ValidationError(
            f"trine construction needs a full-rank state: got rank {spec.rank} on C^{spec.d}"
        )
    d = spec.d
    dim = 2 * d
    effects = []
    for k, (p, v) in enumerate(zip(spec.weights, spec.vectors)):
        if p <= tol.probability:
            raise ValidationError(f"weight p_{k} = {p} too small for the trine construction")
        psi = np.concatenate([v, np.zeros(d, dtype=complex)])
        phi = np.concatenate([np.zeros(d, dtype=complex), v])
        tau2 = np.sqrt((1 - p) / (2 - p)) * psi + np.sqrt(1 / (2 - p)) * phi
        tau3 = -np.sqrt((1 - p) / (2 - p)) * psi + np.sqrt(1 / (2 - p)) * phi
        effects.append(p * np.outer(psi, psi.conj()))
        effects.append((2 - p) / 2 * np.outer(tau2, tau2.conj()))
        effects.append((2 - p) / 2 * np.outer(tau3, tau3.conj()))
    return Povm(tuple(effects), tol)


def trine_preparation_outcomes(spec: MixedStateSpec):
    """Indices of the (k, 1) effects inside ``trine_povm``'s effect list."""
    return [3 * k for k in range(spec.rank)]


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------

def povm_to_json(povm: Povm) -> dict:
    from .network import matrix_to_json

    return {"dim": povm.dim, "effects": [matrix_to_json(m) for m in povm.effects]}


def povm_from_json(doc) -> Povm:
    from .network import matrix_from_json

    if not isinstance(doc, dict) or "effects" not in doc:
        raise ValidationError("povm: expected an object with an 'effects' list")
    effects = [
        matrix_from_json(m, f"povm.effects[{i}]") for i, m in enumerate(doc["effects"])
    ]
    if "dim" in doc and effects and effects[0].shape[0] != int(doc["dim"]):
        raise ValidationError("povm.dim: does not match the effect matrices")
    try:
        return Povm(tuple(effects))
    except (ValidationError, DimensionError, ValueError) as exc:
        raise ValidationError(f"povm: {exc}") from None


def load_povm(path) -> Povm:
    with open(path) as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON ({exc})") from None
    return povm_from_json(doc)


def mixed_state_spec_to_json(spec: MixedStateSpec) -> dict:
    return {
        "d": spec.d,
        "weights": list(spec.weights),
        "vectors": [
            [[float(z.real), float(z.imag)] for z in v] for v in spec.vectors
        ],
    }


def mixed_state_spec_from_json(doc) -> MixedStateSpec:
    if not isinstance(doc, dict):
        raise ValidationError("state spec: top-level document must be an object")
    for key in ("d", "weights", "vectors"):
        if key not in doc:
            raise ValidationError(f"state spec: missing field '{key}'")
    try:
        d = int(doc["d"])
        weights = [float(w) for w in doc["weights"]]
        vectors = [
            np.array([complex(float(re), float(im)) for re, im in v], dtype=complex)
            for v in doc["vectors"]
        ]
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"state spec: malformed field ({exc})") from None
    try:
        return MixedStateSpec(d=d, weights=tuple(weights), vectors=tuple(vectors))
    except (ValidationError, DimensionError, ValueError) as exc:
        raise ValidationError(f"state spec: {exc}") from None


def load_mixed_state_spec(path) -> MixedStateSpec:
    with open(path) as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON ({exc})") from None
    return mixed_state_spec_from_json(doc)
