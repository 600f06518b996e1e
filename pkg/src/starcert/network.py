"""Star-network scenario description and Born-rule behavior computation.

A scenario has N external parties ("Alices"), each holding three dichotomic
observables, a central party ("Eve") with two measurements, and N independent
bipartite sources, one per Alice-Eve pair.  ``born_table`` evaluates the full
behavior p(a, l | x, e) exactly.

Conventions:
  * tensor factor 0 is the most significant index block (big-endian),
  * party 1 owns the leading bit of outcome strings,
  * Eve's first measurement (e = 0) has exactly 2^N outcomes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from string import ascii_letters

import numpy as np

from .config import DEFAULT_TOL, Tolerances
from .errors import ConditioningError, DimensionError, ValidationError
from .tensor import as_operator, is_psd, kron_all, reorder_factors, require_hermitian


@dataclass(frozen=True)
class BinaryObservableTriple:
    """One party's three dichotomic observables A_0, A_1, A_2."""

    a0: np.ndarray
    a1: np.ndarray
    a2: np.ndarray

    def __post_init__(self):
        dims = set()
        for name in ("a0", "a1", "a2"):
            m = require_hermitian(as_operator(getattr(self, name)), what=f"observable {name}")
            object.__setattr__(self, name, m)
            dims.add(m.shape[0])
            # dichotomic contract: A = M_0 - M_1 forces spectrum within [-1, 1]
            top = np.linalg.norm(m, ord=2)
            if top > 1 + DEFAULT_TOL.spectral:
                raise ValidationError(
                    f"observable {name} has spectral radius {top:.6g} > 1"
                )
        if len(dims) != 1:
            raise DimensionError(f"observables of one party must share a dimension, got {dims}")

    @property
    def dim(self) -> int:
        return self.a0.shape[0]

    def observables(self):
        return (self.a0, self.a1, self.a2)


@dataclass(frozen=True)
class EveMeasurement:
    """A POVM held by the central party: PSD effects summing to the identity."""

    effects: tuple

    def __post_init__(self):
        effects = tuple(as_operator(m) for m in self.effects)
        if not effects:
            raise ValidationError("a measurement needs at least one effect")
        dim = effects[0].shape[0]
        total = np.zeros((dim, dim), dtype=complex)
        for i, m in enumerate(effects):
            if m.shape[0] != dim:
                raise DimensionError(f"effect {i} has dim {m.shape[0]}, expected {dim}")
            if not is_psd(m, DEFAULT_TOL.structural):
                raise ValidationError(f"effect {i} is not positive semi-definite within tolerance")
            total += m
        if np.linalg.norm(total - np.eye(dim)) > DEFAULT_TOL.structural:
            raise ValidationError("effects do not sum to the identity within tolerance")
        object.__setattr__(self, "effects", effects)

    @property
    def dim(self) -> int:
        return self.effects[0].shape[0]

    @property
    def outcome_count(self) -> int:
        return len(self.effects)


def _as_density_operator(state, path: str) -> np.ndarray:
    """Accept a pure-state vector or a density matrix; return a density matrix."""
    arr = np.asarray(state, dtype=complex)
    if arr.ndim == 1:
        norm = np.linalg.norm(arr)
        if abs(norm - 1) > 1e-10:
            raise ValidationError(f"{path}: state vector norm {norm} deviates from 1")
        return np.outer(arr, arr.conj())
    rho = require_hermitian(as_operator(arr), what=path)
    if abs(np.trace(rho).real - 1) > DEFAULT_TOL.structural:
        raise ValidationError(f"{path}: density operator trace {np.trace(rho).real} is not 1")
    if not is_psd(rho, DEFAULT_TOL.structural):
        raise ValidationError(f"{path}: density operator is not positive semi-definite")
    return rho


@dataclass(frozen=True)
class Scenario:
    """Full description of the star network.

    ``sources[i]`` is a density operator on the i-th Alice-Eve pair with the
    Alice factor first; its Alice dimension is fixed by ``alice_observables[i]``.
    ``eve`` holds the two central measurements (e = 0 with exactly 2^N
    outcomes, e = 1 with K <= 4^N outcomes).
    """

    n_parties: int
    sources: tuple
    alice_observables: tuple
    eve: tuple

    def __post_init__(self):
        n = int(self.n_parties)
        if n < 2:
            raise ValidationError("n_parties must be at least 2")
        object.__setattr__(self, "n_parties", n)
        if len(self.sources) != n or len(self.alice_observables) != n:
            raise DimensionError("need one source and one observable triple per party")
        if len(self.eve) != 2:
            raise ValidationError("eve must hold exactly two measurements (e = 0, 1)")
        sources = tuple(
            _as_density_operator(s, f"sources[{i}]") for i, s in enumerate(self.sources)
        )
        object.__setattr__(self, "sources", sources)
        object.__setattr__(self, "alice_observables", tuple(self.alice_observables))
        object.__setattr__(self, "eve", tuple(self.eve))
        for i, (rho, triple) in enumerate(zip(sources, self.alice_observables)):
            d_a = triple.dim
            if rho.shape[0] % d_a != 0:
                raise DimensionError(
                    f"sources[{i}] dim {rho.shape[0]} is not a multiple of the "
                    f"party dimension {d_a}"
                )
        d_e_total = int(np.prod(self.eve_dims))
        for e, meas in enumerate(self.eve):
            if meas.dim != d_e_total:
                raise DimensionError(
                    f"eve measurement e={e} acts on dim {meas.dim}, "
                    f"sources imply {d_e_total}"
                )
        if self.eve[0].outcome_count != 2**n:
            raise ValidationError(
                f"Eve's first measurement must have exactly 2^N = {2**n} outcomes, "
                f"got {self.eve[0].outcome_count}; scenarios with 2^N - 1 outcomes are "
                "rejected deliberately (the outcome label l runs over all N-bit strings)"
            )
        # 4^N is the outcome cap of any extremal measurement on Eve's space;
        # embedded references can exceed 2^N through their completion outcomes
        if self.eve[1].outcome_count > 4**n:
            raise ValidationError(
                f"Eve's second measurement may have at most 4^N = {4**n} outcomes"
            )

    @property
    def alice_dims(self) -> tuple:
        return tuple(t.dim for t in self.alice_observables)

    @property
    def eve_dims(self) -> tuple:
        return tuple(
            rho.shape[0] // t.dim for rho, t in zip(self.sources, self.alice_observables)
        )


def effects_from_observable(a: np.ndarray):
    """Dichotomic effects (M_0, M_1) = ((1 + A)/2, (1 - A)/2)."""
    eye = np.eye(a.shape[0])
    return (eye + a) / 2, (eye - a) / 2


def assemble_joint_state(scenario: Scenario) -> np.ndarray:
    """Joint density operator reordered to A_1...A_N (x) E_1...E_N."""
    rho = kron_all(scenario.sources)
    dims = []
    for d_a, d_e in zip(scenario.alice_dims, scenario.eve_dims):
        dims.extend([d_a, d_e])
    n = scenario.n_parties
    # factors currently alternate A_i, E_i; bring all A's to the front
    perm = [2 * i for i in range(n)] + [2 * i + 1 for i in range(n)]
    return reorder_factors(rho, dims, perm)


@dataclass(frozen=True)
class CorrelationTable:
    """The behavior p(a, l | x, e) for all inputs and outcomes.

    ``p0`` has shape (2^N, 2^N, 3^N) indexed by (a, l, x) for e = 0, ``p1``
    has shape (2^N, K, 3^N) for e = 1.  The ``a`` index packs the Alice
    outcome bits with party 1 most significant; ``x`` packs the inputs in
    base 3 the same way.
    """

    n: int
    p0: np.ndarray
    p1: np.ndarray
    tol: Tolerances = field(default=DEFAULT_TOL, compare=False)

    def __post_init__(self):
        n = self.n
        for e, p in enumerate((self.p0, self.p1)):
            if p.shape[0] != 2**n or p.shape[2] != 3**n:
                raise DimensionError(f"table for e={e} has wrong shape {p.shape}")
            if p.min() < -self.tol.probability:
                raise ValidationError(f"negative probability {p.min():.3e} in table e={e}")
            totals = p.sum(axis=(0, 1))
            if np.max(np.abs(totals - 1)) > self.tol.structural:
                raise ValidationError(f"probabilities for e={e} do not sum to 1 per input")
            # Eve's marginal must not depend on the Alice inputs
            pbar = p.sum(axis=0)
            if np.max(np.abs(pbar - pbar[:, :1])) > self.tol.structural:
                raise ValidationError(f"signaling to Eve detected in table e={e}")
        # Alice marginals must not depend on Eve's input
        m0 = self.p0.sum(axis=1)
        m1 = self.p1.sum(axis=1)
        if np.max(np.abs(m0 - m1)) > self.tol.structural:
            raise ValidationError("Alice marginals depend on Eve's input (signaling)")

    def _table(self, e: int) -> np.ndarray:
        if e == 0:
            return self.p0
        if e == 1:
            return self.p1
        raise DimensionError(f"Eve input e={e} out of range")

    def outcome_count(self, e: int) -> int:
        return self._table(e).shape[1]

    def prob(self, a_bits, l: int, x_inputs, e: int) -> float:
        a = _pack(a_bits, 2, self.n)
        x = _pack(x_inputs, 3, self.n)
        t = self._table(e)
        if not 0 <= l < t.shape[1]:
            raise DimensionError(f"outcome l={l} out of range for e={e}")
        return float(t[a, l, x])

    def pbar(self, l: int, e: int) -> float:
        """Probability that Eve observes outcome l under input e."""
        t = self._table(e)
        if not 0 <= l < t.shape[1]:
            raise DimensionError(f"outcome l={l} out of range for e={e}")
        return float(t[:, l, 0].sum())

    def correlator(self, settings, l: int, e: int) -> float:
        """<prod_i A_{i, settings[i]} R_{l|e}>; ``None`` entries mean identity.

        Parties with setting ``None`` are marginalized (their input is
        irrelevant by no-signaling and fixed to 0 here).
        """
        if len(settings) != self.n:
            raise DimensionError(f"need {self.n} settings, got {len(settings)}")
        t = self._table(e)
        if not 0 <= l < t.shape[1]:
            raise DimensionError(f"outcome l={l} out of range for e={e}")
        x = _pack([0 if s is None else s for s in settings], 3, self.n)
        block = t[:, l, x]
        signs = np.ones(2**self.n)
        for i, s in enumerate(settings):
            if s is None:
                continue
            bit = (np.arange(2**self.n) >> (self.n - 1 - i)) & 1
            signs *= 1 - 2 * bit
        return float(np.dot(signs, block))

    def conditional_correlator(self, settings, l: int, e: int) -> float:
        """Correlator conditioned on Eve's outcome l (division by P(l|e))."""
        p = self.pbar(l, e)
        if p <= self.tol.probability:
            raise ConditioningError(
                f"cannot condition on outcome l={l}, e={e}: probability {p:.3e}"
            )
        return self.correlator(settings, l, e) / p


def _pack(digits, base: int, n: int) -> int:
    digits = list(digits)
    if len(digits) != n:
        raise DimensionError(f"expected {n} digits, got {len(digits)}")
    out = 0
    for d in digits:
        d = int(d)
        if not 0 <= d < base:
            raise DimensionError(f"digit {d} out of range for base {base}")
        out = out * base + d
    return out


def _steering_operators(scenario: Scenario):
    """Per party: W[x, a] = Tr_A[rho_i (M_{a|x} (x) 1_E)], an operator on E_i."""
    out = []
    for rho, triple, d_a, d_e in zip(
        scenario.sources, scenario.alice_observables, scenario.alice_dims, scenario.eve_dims
    ):
        r4 = rho.reshape(d_a, d_e, d_a, d_e)
        w = np.empty((3, 2, d_e, d_e), dtype=complex)
        for x, a_obs in enumerate(triple.observables()):
            for a, m in enumerate(effects_from_observable(a_obs)):
                w[x, a] = np.einsum("aebf,ba->ef", r4, m)
        out.append(w)
    return out


def born_table(scenario: Scenario, tol: Tolerances = DEFAULT_TOL) -> CorrelationTable:
    """Exact behavior of the scenario via Born's rule.

    Exploits source independence: p = Tr[(prod_i W^{(i)}_{a_i|x_i}) R_{l|e}]
    with the steering operators W living on Eve's factors only.
    """
    n = scenario.n_parties
    steering = _steering_operators(scenario)
    d_es = scenario.eve_dims
    tables = []
    for e in (0, 1):
        effects = scenario.eve[e].effects
        n_out = len(effects)
        r = np.stack(effects).reshape((n_out,) + tuple(d_es) + tuple(d_es))
        # einsum: R[l, f_1..f_N, e_1..e_N] with W_i[c_i, e_i, f_i] -> out[l, c_1..c_N]
        letters = iter(ascii_letters)
        l_ax = next(letters)
        f_ax = [next(letters) for _ in range(n)]
        e_ax = [next(letters) for _ in range(n)]
        c_ax = [next(letters) for _ in range(n)]
        operands = [l_ax + "".join(f_ax) + "".join(e_ax)]
        arrays = [r]
        for i in range(n):
            operands.append(c_ax[i] + e_ax[i] + f_ax[i])
            arrays.append(steering[i].reshape(6, d_es[i], d_es[i]))
        spec = ",".join(operands) + "->" + l_ax + "".join(c_ax)
        raw = np.einsum(spec, *arrays, optimize=True)
        # combo axis c_i = 3*... is (x_i, a_i) flattened; split and reorder
        raw = raw.reshape((n_out,) + (3, 2) * n)
        a_axes = [2 + 2 * i for i in range(n)]
        x_axes = [1 + 2 * i for i in range(n)]
        raw = raw.transpose(a_axes + [0] + x_axes)
        table = raw.reshape(2**n, n_out, 3**n).real.copy()
        table[np.abs(table) < 1e-16] = 0.0
        tables.append(table)
    return CorrelationTable(n=n, p0=tables[0], p1=tables[1], tol=tol)


def expectation(table: CorrelationTable, x_inputs, l: int, e: int) -> float:
    """<A_{1,x_1}...A_{N,x_N} R_{l|e}> as a signed sum over Alice outcomes."""
    return table.correlator(list(x_inputs), l, e)


def conditional_correlator(table: CorrelationTable, x_inputs, l: int, e: int) -> float:
    return table.conditional_correlator(list(x_inputs), l, e)


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------

def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    return {
        "dim": int(m.shape[0]),
        "entries": [[float(z.real), float(z.imag)] for z in m.reshape(-1)],
    }


def matrix_from_json(doc, path: str) -> np.ndarray:
    if not isinstance(doc, dict) or "dim" not in doc or "entries" not in doc:
        raise ValidationError(f"{path}: expected an object with 'dim' and 'entries'")
    try:
        dim = int(doc["dim"])
        entries = [complex(float(re), float(im)) for re, im in doc["entries"]]
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{path}: malformed matrix entry ({exc})") from None
    if dim < 1 or len(entries) != dim * dim:
        raise ValidationError(
            f"{path}: expected {dim * dim} entries for dim {dim}, got {len(entries)}"
        )
    return np.array(entries, dtype=complex).reshape(dim, dim)


def scenario_to_json(scenario: Scenario) -> dict:
    return {
        "n_parties": scenario.n_parties,
        "sources": [matrix_to_json(s) for s in scenario.sources],
        "alice_observables": [
            [matrix_to_json(o) for o in triple.observables()]
            for triple in scenario.alice_observables
        ],
        "eve_measurements": [
            [matrix_to_json(m) for m in meas.effects] for meas in scenario.eve
        ],
    }


def scenario_from_json(doc) -> Scenario:
    if not isinstance(doc, dict):
        raise ValidationError("scenario: top-level document must be an object")
    for key in ("n_parties", "sources", "alice_observables", "eve_measurements"):
        if key not in doc:
            raise ValidationError(f"scenario: missing field '{key}'")
    try:
        n = int(doc["n_parties"])
    except (TypeError, ValueError):
        raise ValidationError("scenario.n_parties: must be an integer") from None
    sources = [
        matrix_from_json(s, f"scenario.sources[{i}]") for i, s in enumerate(doc["sources"])
    ]
    triples = []
    for i, triple in enumerate(doc["alice_observables"]):
        if len(triple) != 3:
            raise ValidationError(
                f"scenario.alice_observables[{i}]: expected 3 observables, got {len(triple)}"
            )
        mats = [
            matrix_from_json(o, f"scenario.alice_observables[{i}][{j}]")
            for j, o in enumerate(triple)
        ]
        try:
            triples.append(BinaryObservableTriple(*mats))
        except (ValidationError, DimensionError, ValueError) as exc:
            raise ValidationError(f"scenario.alice_observables[{i}]: {exc}") from None
    if len(doc["eve_measurements"]) != 2:
        raise ValidationError("scenario.eve_measurements: expected exactly two measurements")
    eve = []
    for e, meas in enumerate(doc["eve_measurements"]):
        mats = [
            matrix_from_json(m, f"scenario.eve_measurements[{e}][{l}]")
            for l, m in enumerate(meas)
        ]
        try:
            eve.append(EveMeasurement(tuple(mats)))
        except (ValidationError, DimensionError, ValueError) as exc:
            raise ValidationError(f"scenario.eve_measurements[{e}]: {exc}") from None
    try:
        return Scenario(
            n_parties=n,
            sources=tuple(sources),
            alice_observables=tuple(triples),
            eve=tuple(eve),
        )
    except (ValidationError, DimensionError, ValueError) as exc:
        raise ValidationError(f"scenario: {exc}") from None


def load_scenario(path) -> Scenario:
    with open(path) as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON ({exc})") from None
    return scenario_from_json(doc)


def save_scenario(scenario: Scenario, path) -> None:
    with open(path, "w") as f:
        json.dump(scenario_to_json(scenario), f)
