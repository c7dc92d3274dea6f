"""Two-qubit gates and circuits over the native set {RZ(theta), SX, CNOT}.

Convention: qubit 0 is the most-significant bit of basis-state labels, so
the basis order is |00>, |01>, |10>, |11> with labels "q0 q1". This holds
everywhere in the toolkit (circuit unitaries, density matrices, counts).

RZ is the traceless exp(-i*theta*Z/2), so compiled circuits match their
targets only up to a global phase; all equivalence checks here minimize
over that free phase.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import I2, PAULI_X, as_matrix, dagger, frobenius, is_unitary, kron

SINGLE_QUBIT_KINDS = ("rz", "sx", "x")
GATE_KINDS = SINGLE_QUBIT_KINDS + ("cnot",)

_SX = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])

# Magic-basis change used for the local invariants of two-qubit unitaries.
_MAGIC = (1 / math.sqrt(2)) * np.array(
    [
        [1, 0, 0, 1j],
        [0, 1j, 1, 0],
        [0, 1j, -1, 0],
        [1, 0, 0, -1j],
    ],
    dtype=complex,
)


@dataclass(frozen=True)
class Gate:
    """One native gate. Use the ``rz``/``sx``/``x``/``cnot`` constructors."""

    kind: str
    qubit: int | None = None
    angle: float | None = None
    control: int | None = None
    target: int | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if self.kind == "cnot":
            if self.control not in (0, 1) or self.target not in (0, 1):
                raise ValueError("cnot qubit indices must be 0 or 1")
            if self.control == self.target:
                raise ValueError("cnot control and target must differ")
        else:
            if self.qubit not in (0, 1):
                raise ValueError(f"{self.kind} qubit index must be 0 or 1")
            if self.kind == "rz":
                if self.angle is None or not math.isfinite(self.angle):
                    raise ValueError("rz angle must be finite")

    @staticmethod
    def rz(qubit: int, angle: float) -> "Gate":
        return Gate("rz", qubit=qubit, angle=float(angle))

    @staticmethod
    def sx(qubit: int) -> "Gate":
        return Gate("sx", qubit=qubit)

    @staticmethod
    def x(qubit: int) -> "Gate":
        return Gate("x", qubit=qubit)

    @staticmethod
    def cnot(control: int, target: int) -> "Gate":
        return Gate("cnot", control=control, target=target)

    def qubits(self) -> tuple[int, ...]:
        if self.kind == "cnot":
            return (self.control, self.target)
        return (self.qubit,)

    def matrix(self) -> np.ndarray:
        """4x4 unitary of this gate lifted to the full two-qubit register."""
        if self.kind == "cnot":
            return cnot_matrix(self.control, self.target)
        u = _single_qubit_matrix(self.kind, self.angle)
        return kron(u, I2) if self.qubit == 0 else kron(I2, u)

    def to_dict(self) -> dict:
        if self.kind == "cnot":
            return {"kind": "cnot", "control": self.control, "target": self.target}
        d = {"kind": self.kind, "qubit": self.qubit}
        if self.kind == "rz":
            d["angle"] = self.angle
        return d

    @staticmethod
    def from_dict(d: dict) -> "Gate":
        kind = d.get("kind")
        if kind == "cnot":
            return Gate.cnot(d["control"], d["target"])
        if kind == "rz":
            return Gate.rz(d["qubit"], d["angle"])
        if kind in ("sx", "x"):
            return Gate(kind, qubit=d["qubit"])
        raise ValueError(f"unknown gate kind {kind!r}")


def _single_qubit_matrix(kind: str, angle: float | None) -> np.ndarray:
    if kind == "rz":
        return np.array([[np.exp(-1j * angle / 2), 0], [0, np.exp(1j * angle / 2)]])
    if kind == "sx":
        return _SX
    if kind == "x":
        return PAULI_X
    raise ValueError(f"unknown single-qubit kind {kind!r}")


def cnot_matrix(control: int = 0, target: int = 1) -> np.ndarray:
    m = np.zeros((4, 4), dtype=complex)
    for i in range(4):
        bits = [(i >> 1) & 1, i & 1]  # [q0, q1], q0 most significant
        if bits[control] == 1:
            bits[target] ^= 1
        m[(bits[0] << 1) | bits[1], i] = 1
    return m


@dataclass(frozen=True)
class Circuit:
    """Ordered gate list on two qubits; gates[0] is applied first."""

    gates: tuple[Gate, ...] = field(default_factory=tuple)
    num_qubits: int = 2

    def __post_init__(self):
        if self.num_qubits != 2:
            raise ValueError("only 2-qubit circuits are supported")
        object.__setattr__(self, "gates", tuple(self.gates))
        for g in self.gates:
            if any(q >= self.num_qubits for q in g.qubits()):
                raise ValueError(f"gate {g} acts outside a {self.num_qubits}-qubit register")

    def __len__(self) -> int:
        return len(self.gates)

    def cnot_count(self) -> int:
        return sum(1 for g in self.gates if g.kind == "cnot")

    def concat(self, other: "Circuit") -> "Circuit":
        return Circuit(self.gates + other.gates)

    def to_json(self) -> str:
        return json.dumps([g.to_dict() for g in self.gates])

    @staticmethod
    def from_json(text: str) -> "Circuit":
        return Circuit(tuple(Gate.from_dict(d) for d in json.loads(text)))


@dataclass(frozen=True)
class TargetUnitary:
    label: str  # "ms" | "cx" | "custom"
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.shape != (4, 4) or not is_unitary(m, atol=1e-10):
            raise ValueError("target must be a 4x4 unitary within 1e-10")
        object.__setattr__(self, "matrix", m)


def ms_unitary() -> TargetUnitary:
    """The maximally entangling target: 1/sqrt(2) on the diagonal, i/sqrt(2)
    on the anti-diagonal. Equals exp(i*pi/4 * X(x)X)."""
    m = (np.eye(4) + 1j * kron(PAULI_X, PAULI_X)) / math.sqrt(2)
    return TargetUnitary("ms", m)


def cx_unitary() -> TargetUnitary:
    return TargetUnitary("cx", cnot_matrix(0, 1))


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    u = np.eye(4, dtype=complex)
    for g in circuit.gates:
        u = g.matrix() @ u
    return u


def phase_aligned_distance(u, v) -> float:
    """min over phi of ||u - e^{i phi} v||_F (global-phase-blind distance)."""
    u, v = as_matrix(u), as_matrix(v)
    overlap = abs(np.trace(dagger(v) @ u))
    gap = frobenius(u) ** 2 + frobenius(v) ** 2 - 2 * overlap
    return math.sqrt(max(0.0, gap))


def makhlin_invariants(u) -> tuple[complex, float]:
    """Local-equivalence invariants (g1 complex, g2 real) of a 4x4 unitary.

    Computed in the magic basis; invariant under single-qubit dressings on
    either side and under global phase. Identity gives (1, 3), CNOT (0, 1).
    """
    u = as_matrix(u)
    if u.shape != (4, 4) or not is_unitary(u, atol=1e-8):
        raise ValueError("expected a 4x4 unitary within 1e-8")
    mb = dagger(_MAGIC) @ u @ _MAGIC
    m = mb.T @ mb
    det = np.linalg.det(u)
    tr = np.trace(m)
    g1 = complex(tr**2 / (16 * det))
    g2 = complex((tr**2 - np.trace(m @ m)) / (4 * det))
    return g1, float(g2.real)


# Single-CNOT realization of the entangling target, with the CNOT dressed by
# fixed single-qubit rotations. The angles are exact multiples of pi/2,
# verified against the target to machine precision by the test suite.
_MS_GATES = (
    Gate.rz(0, math.pi / 2),
    Gate.sx(0),
    Gate.rz(0, math.pi / 2),
    Gate.cnot(0, 1),
    Gate.sx(0),
    Gate.rz(0, math.pi / 2),
    Gate.rz(1, math.pi),
    Gate.sx(1),
    Gate.rz(1, math.pi),
)


def synthesize_ms_circuit() -> Circuit:
    """Native-basis circuit for the entangling target, using exactly one CNOT."""
    return Circuit(_MS_GATES)


def cx_circuit() -> Circuit:
    return Circuit((Gate.cnot(0, 1),))


BUILTIN_TARGETS = {"ms": ms_unitary, "cx": cx_unitary}
BUILTIN_CIRCUITS = {"ms": synthesize_ms_circuit, "cx": cx_circuit}
