"""Dense complex linear algebra for small multi-qubit systems.

Provides the four protocol states (eigenstates of the x and z Pauli
operators), equator-state parametrization, unambiguous-discrimination
filters, projective Pauli measurements, Gram matrices and the
unambiguous-state-discrimination (USD) POVM construction.

Basis convention: amplitudes are ordered with the +z component first,
|+x> = (1, 1)/sqrt(2), |-x> = (1, -1)/sqrt(2), all four protocol states
real.  All operators are plain complex numpy arrays of shape
(2**n, 2**n).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

# numerical tolerances for dense double-precision work up to dim 64
NORM_TOL = 1e-9
PSD_TOL = 1e-10
HERMITIAN_TOL = 1e-10
COMPLETENESS_TOL = 1e-10
GRAM_SINGULAR_TOL = 1e-8

MAX_QUBITS = 6

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

INCONCLUSIVE = "inconclusive"


class LinearDependenceError(ValueError):
    """Raised when a USD POVM is requested for linearly dependent states."""


class DegenerateStatesError(ValueError):
    """Raised when a discrimination filter is requested for identical states."""


class StateLabel(enum.Enum):
    """The four protocol states; ±x code bit 0 and ±z code bit 1."""

    PLUS_X = "+x"
    MINUS_X = "-x"
    PLUS_Z = "+z"
    MINUS_Z = "-z"

    @property
    def axis(self) -> str:
        return "x" if self in (StateLabel.PLUS_X, StateLabel.MINUS_X) else "z"

    @property
    def sign(self) -> int:
        return +1 if self in (StateLabel.PLUS_X, StateLabel.PLUS_Z) else -1

    @property
    def pair_bit(self) -> int:
        """Bit under the non-orthogonal-pair encoding: x states 0, z states 1."""
        return 0 if self.axis == "x" else 1

    @property
    def basis_bit(self) -> int:
        """Bit under the basis encoding: + states 0, - states 1."""
        return 0 if self.sign > 0 else 1


# cyclic order in which consecutive states are non-orthogonal; the Gram
# matrix of the n-photon products is then a signed 4-cycle
FOUR_STATE_CYCLE = (
    StateLabel.PLUS_Z,
    StateLabel.PLUS_X,
    StateLabel.MINUS_Z,
    StateLabel.MINUS_X,
)


class StateVector:
    """Pure state of ``n_qubits`` qubits as a dense complex amplitude vector.

    The constructor enforces unit Euclidean norm (within 1e-9) and a
    power-of-two length.  Instances are treated as immutable.
    """

    __slots__ = ("amps", "n_qubits")

    def __init__(self, amplitudes) -> None:
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        dim = amps.shape[0]
        if dim < 2 or dim & (dim - 1):
            raise ValueError(f"amplitude vector length {dim} is not a power of two >= 2")
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state vector is not normalized (norm {norm!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "n_qubits", dim.bit_length() - 1)

    def __setattr__(self, name, value):
        raise AttributeError("StateVector is immutable")

    @property
    def dim(self) -> int:
        return self.amps.shape[0]

    def __repr__(self) -> str:
        return f"StateVector({np.array2string(self.amps, precision=6)})"


_SQRT_HALF = 1.0 / np.sqrt(2.0)

_QUBIT_AMPLITUDES = {
    StateLabel.PLUS_X: np.array([_SQRT_HALF, _SQRT_HALF], dtype=complex),
    StateLabel.MINUS_X: np.array([_SQRT_HALF, -_SQRT_HALF], dtype=complex),
    StateLabel.PLUS_Z: np.array([1.0, 0.0], dtype=complex),
    StateLabel.MINUS_Z: np.array([0.0, 1.0], dtype=complex),
}


def qubit_state(label: StateLabel) -> StateVector:
    """Single-qubit eigenstate of sigma_x or sigma_z for the given label."""
    return StateVector(_QUBIT_AMPLITUDES[label])


def equator_state(phi: float) -> StateVector:
    """State (1, e^{i phi})/sqrt(2) on the equator of the Bloch sphere.

    equator_state(0) is |+x>, equator_state(pi) is |-x>.
    """
    return StateVector(np.array([_SQRT_HALF, _SQRT_HALF * np.exp(1j * phi)]))


def equator_pair(chi: float) -> tuple[StateVector, StateVector]:
    """Pair of equator states at ±beta about the x axis with |overlap| = chi.

    chi must lie in [0, 1); beta = arccos(chi).
    """
    if not 0.0 <= chi < 1.0:
        raise ValueError(f"overlap chi must be in [0, 1), got {chi}")
    beta = float(np.arccos(chi))
    return equator_state(beta), equator_state(-beta)


def overlap(a: StateVector, b: StateVector) -> complex:
    """Inner product <a|b>, conjugate-linear in the first argument."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return complex(np.vdot(a.amps, b.amps))


def tensor_power(s: StateVector, m: int) -> StateVector:
    """m-fold tensor product s ⊗ ... ⊗ s (m >= 1)."""
    if m < 1:
        raise ValueError("tensor power requires m >= 1")
    amps = s.amps
    for _ in range(m - 1):
        amps = np.kron(amps, s.amps)
    return StateVector(amps)


def build_filter(s0: StateVector, s1: StateVector) -> np.ndarray:
    """Selective filter that maps s0 toward |+x> and s1 toward |-x>.

    F = (|+x><s1_perp| + |-x><s0_perp|) / sqrt(1 + chi) with
    chi = |<s0|s1>|.  F†F <= I; either input passes the filter with
    probability 1 - chi, and a subsequent sigma_x measurement then
    discriminates the two inputs without error.

    Raises DegenerateStatesError when the pair is (numerically) identical,
    chi = 1, where no discriminating filter exists.
    """
    if s0.dim != 2 or s1.dim != 2:
        raise ValueError("filter construction is defined for single-qubit states")
    chi = abs(overlap(s0, s1))
    if chi >= 1.0 - 1e-12:
        raise DegenerateStatesError(f"states with overlap {chi} cannot be discriminated")

    def perp(s: StateVector) -> np.ndarray:
        c0, c1 = s.amps
        return np.array([-np.conj(c1), np.conj(c0)])

    plus_x = _QUBIT_AMPLITUDES[StateLabel.PLUS_X]
    minus_x = _QUBIT_AMPLITUDES[StateLabel.MINUS_X]
    f = np.outer(plus_x, np.conj(perp(s1))) + np.outer(minus_x, np.conj(perp(s0)))
    return f / np.sqrt(1.0 + chi)


def filter_pass_probability(filter_op: np.ndarray, s: StateVector) -> float:
    """Probability that state s passes the (non-trace-preserving) filter."""
    return float(np.linalg.norm(filter_op @ s.amps) ** 2)


def apply_filter(filter_op: np.ndarray, s: StateVector) -> tuple[float, StateVector | None]:
    """Apply a filter; returns (pass probability, renormalized post-state)."""
    out = filter_op @ s.amps
    p = float(np.linalg.norm(out) ** 2)
    if p < 1e-300:
        return 0.0, None
    return p, StateVector(out / np.sqrt(p))


def born_probability_plus(s: StateVector, axis: str) -> float:
    """Born probability of outcome +1 for a sigma_x or sigma_z measurement."""
    if axis not in ("x", "z"):
        raise ValueError(f"axis must be 'x' or 'z', got {axis!r}")
    plus = StateLabel.PLUS_X if axis == "x" else StateLabel.PLUS_Z
    return abs(overlap(qubit_state(plus), s)) ** 2


def measure_pauli(s: StateVector, axis: str, rand: float) -> tuple[int, StateVector]:
    """Projective sigma_x or sigma_z measurement of a single-qubit state.

    rand is a uniform sample in [0, 1); the outcome is +1 iff
    rand < P(+1), so the function is a pure, reproducible map of its
    arguments.  Returns (outcome, post-measurement eigenstate).
    """
    if s.dim != 2:
        raise ValueError("measure_pauli acts on single-qubit states")
    p_plus = born_probability_plus(s, axis)
    if rand < p_plus:
        outcome = +1
        label = StateLabel.PLUS_X if axis == "x" else StateLabel.PLUS_Z
    else:
        outcome = -1
        label = StateLabel.MINUS_X if axis == "x" else StateLabel.MINUS_Z
    return outcome, qubit_state(label)


def gram_matrix(states: list[StateVector]) -> np.ndarray:
    """Matrix of pairwise inner products G_ij = <s_i|s_j>."""
    dims = {s.dim for s in states}
    if len(dims) > 1:
        raise ValueError(f"states have mismatched dimensions: {sorted(dims)}")
    mat = np.column_stack([s.amps for s in states])
    return np.conj(mat.T) @ mat


@dataclass(frozen=True)
class Povm:
    """A POVM: labelled positive operators summing to the identity.

    Labels are conclusive state indices (ints) or the string
    "inconclusive".
    """

    elements: tuple[tuple[object, np.ndarray], ...]

    def operators(self) -> list[np.ndarray]:
        return [op for _, op in self.elements]

    def labels(self) -> list[object]:
        return [label for label, _ in self.elements]

    def min_eigenvalue(self) -> float:
        return min(float(np.linalg.eigvalsh(op)[0]) for _, op in self.elements)

    def hermiticity_residual(self) -> float:
        return max(
            float(np.max(np.abs(op - np.conj(op.T)))) for _, op in self.elements
        )

    def completeness_residual(self) -> float:
        total = sum(op for _, op in self.elements)
        eye = np.eye(total.shape[0])
        return float(np.max(np.abs(total - eye)))

    def validate(self) -> None:
        if self.hermiticity_residual() > HERMITIAN_TOL:
            raise ValueError("POVM element is not Hermitian within tolerance")
        if self.min_eigenvalue() < -PSD_TOL:
            raise ValueError("POVM element has a negative eigenvalue beyond tolerance")
        if self.completeness_residual() > COMPLETENESS_TOL:
            raise ValueError("POVM elements do not sum to the identity")


def build_usd_povm(states: list[StateVector]) -> tuple[Povm, float]:
    """Equal-success-probability USD POVM for linearly independent states.

    The conclusive element for state i is E_i = q |d_i><d_i| where d_i is
    the reciprocal (dual) vector of the inputs (<d_i|psi_j> = delta_ij)
    and q is the smallest Gram eigenvalue; then <psi_j|E_i|psi_j> =
    q * delta_ij, so the measurement never misidentifies a state and
    succeeds on each input with the same probability p_ok = q.  The
    inconclusive element I - sum(E_i) is positive semidefinite by the
    choice of q.

    Raises LinearDependenceError if the Gram matrix is numerically
    singular (smallest eigenvalue below 1e-8).
    """
    gram = gram_matrix(states)
    eigenvalues = np.linalg.eigvalsh(gram)
    q = float(eigenvalues[0])
    if q < GRAM_SINGULAR_TOL:
        raise LinearDependenceError(
            f"states are linearly dependent (smallest Gram eigenvalue {q:.3e})"
        )
    mat = np.column_stack([s.amps for s in states])
    duals = mat @ np.linalg.inv(gram)  # columns satisfy <d_i|psi_j> = delta_ij
    elements: list[tuple[object, np.ndarray]] = []
    for i in range(len(states)):
        d = duals[:, i]
        elements.append((i, q * np.outer(d, np.conj(d))))
    inconclusive = np.eye(mat.shape[0], dtype=complex) - sum(op for _, op in elements)
    elements.append((INCONCLUSIVE, inconclusive))
    povm = Povm(tuple(elements))
    povm.validate()
    return povm, q


def protocol_product_states(n_photons: int) -> list[StateVector]:
    """The four n-photon product states, one per protocol state, in cycle order."""
    if n_photons > MAX_QUBITS:
        raise ValueError(
            f"dense product states are limited to {MAX_QUBITS} photons, got {n_photons}"
        )
    return [tensor_power(qubit_state(label), n_photons) for label in FOUR_STATE_CYCLE]
