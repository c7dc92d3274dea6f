"""Full two-qubit process tomography.

Experiment design: the 16 product inputs over {|0>, |1>, |+>, |+i>} per
qubit, each measured in the 9 settings {X, Y, Z}^2. Identity-containing
Pauli expectations are obtained from marginals of the measured settings
(averaged over the compatible ones), so the full 16-observable set per
input is available from 9 physical settings.

Reconstruction: linear least-squares inversion of the expectation data to a
Choi matrix over the fixed preparation/observable frame, followed by
projection onto the CPTP set.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .channels import QuantumChannel, channel_from_unitary, pauli_basis, project_cptp
from .circuits import Circuit, Gate, circuit_unitary
from .linalg import dagger, kron
from .simulator import (
    RNG_ALGORITHM,
    CountsRecord,
    basis_state,
    evolve,
    expectation,
    outcome_distribution,
    sample_counts,
)

DEFAULT_SEED = 42

PREP_TOKENS = ("0", "1", "+", "+i")
SETTINGS = tuple(a + b for a, b in itertools.product("XYZ", "XYZ"))
PAULI_LABELS = tuple(a + b for a, b in itertools.product("IXYZ", "IXYZ"))

_PREP_KETS = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "+i": np.array([1, 1j], dtype=complex) / np.sqrt(2),
}

# Gate sequences over the native set realizing each preparation from |0>.
_PREP_GATES = {
    "0": (),
    "1": ("x",),
    "+": ("sx", ("rz", np.pi / 2)),
    "+i": ("sx", ("rz", np.pi)),
}

PREP_LABELS = tuple(f"{a}:{b}" for a, b in itertools.product(PREP_TOKENS, PREP_TOKENS))


def prep_state(label: str) -> np.ndarray:
    """Ideal two-qubit density matrix for a preparation label like ``"0:+i"``."""
    t0, t1 = label.split(":")
    ket = kron(_PREP_KETS[t0].reshape(2, 1), _PREP_KETS[t1].reshape(2, 1))
    return ket @ dagger(ket)


def prep_circuit(label: str) -> Circuit:
    t0, t1 = label.split(":")
    gates = []
    for qubit, token in ((0, t0), (1, t1)):
        for step in _PREP_GATES[token]:
            if step == "x":
                gates.append(Gate.x(qubit))
            elif step == "sx":
                gates.append(Gate.sx(qubit))
            else:
                gates.append(Gate.rz(qubit, step[1]))
    return Circuit(tuple(gates))


def design_experiments(circuit: Circuit) -> list[tuple[str, str, Circuit]]:
    """The 144 experiment descriptors: (preparation, setting, prep + circuit)."""
    out = []
    for label in PREP_LABELS:
        prefixed = prep_circuit(label).concat(circuit)
        for setting in SETTINGS:
            out.append((label, setting, prefixed))
    return out


def _experiment_seed(master: int, prep_index: int, setting_index: int) -> int:
    """Documented splitting rule: one child seed per (prep, setting) cell."""
    ss = np.random.SeedSequence(master, spawn_key=(prep_index, setting_index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class TomographyDataset:
    """Complete 16 x 9 grid of measurement records for one process."""

    records: dict  # (prep label, setting) -> CountsRecord
    shots: int | None
    seed: int | None
    noise_fingerprint: str
    circuit_json: str | None
    rng: str = RNG_ALGORITHM

    def __post_init__(self):
        missing = [
            (p, s) for p in PREP_LABELS for s in SETTINGS if (p, s) not in self.records
        ]
        if missing:
            raise ValueError(f"dataset incomplete: {len(missing)} grid cells missing")
        shot_values = {rec.shots for rec in self.records.values()}
        if shot_values != {self.shots}:
            raise ValueError("records disagree with the dataset shot count")

    def to_json(self) -> str:
        payload = {
            "circuit": json.loads(self.circuit_json) if self.circuit_json else None,
            "shots": self.shots,
            "seed": self.seed,
            "rng": self.rng,
            "noise_fingerprint": self.noise_fingerprint,
            "records": {
                f"{p}|{s}": rec.to_dict() for (p, s), rec in sorted(self.records.items())
            },
        }
        return json.dumps(payload, indent=2)

    @staticmethod
    def from_json(text: str) -> "TomographyDataset":
        d = json.loads(text)
        records = {}
        for key, rec in d["records"].items():
            p, s = key.split("|")
            records[(p, s)] = CountsRecord.from_dict(rec)
        circuit_json = json.dumps(d["circuit"]) if d.get("circuit") is not None else None
        return TomographyDataset(
            records, d.get("shots"), d.get("seed"), d["noise_fingerprint"], circuit_json,
            d.get("rng", RNG_ALGORITHM),
        )


def run_qpt(process, noise=None, shots: int | None = None, seed: int = DEFAULT_SEED
            ) -> TomographyDataset:
    """Run the full tomography grid against the simulator.

    ``process`` is a Circuit (evolved under the optional noise model) or a
    QuantumChannel applied directly to the ideal input states. ``shots=None``
    records exact outcome probabilities instead of sampled counts.
    """
    circuit_mode = isinstance(process, Circuit)
    if not circuit_mode and noise is not None:
        raise ValueError("noise models apply to circuits, not to raw channels")
    confusion = noise.confusion if noise is not None else None

    records = {}
    for p_idx, label in enumerate(PREP_LABELS):
        if circuit_mode:
            full = prep_circuit(label).concat(process)
            rho = evolve(full, basis_state("00"), noise)
        else:
            rho = process.apply(prep_state(label))
        for s_idx, setting in enumerate(SETTINGS):
            dist = outcome_distribution(rho, setting, confusion)
            if shots is None:
                rec = CountsRecord(setting, None, None, tuple(dist))
            else:
                rec = sample_counts(dist, shots, _experiment_seed(seed, p_idx, s_idx), setting)
            records[(label, setting)] = rec

    return TomographyDataset(
        records=records,
        shots=shots,
        seed=seed if shots is not None else None,
        noise_fingerprint=noise.fingerprint if noise is not None else "noiseless",
        circuit_json=process.to_json() if circuit_mode else None,
    )


def _pauli_expectations(ds: TomographyDataset, label: str) -> np.ndarray:
    """All 16 Pauli expectations for one input, identity terms from marginals."""
    values = np.zeros(16)
    for k, obs in enumerate(PAULI_LABELS):
        a, b = obs[0], obs[1]
        if a == "I" and b == "I":
            values[k] = 1.0
        elif a == "I":
            compat = [c + b for c in "XYZ"]
            values[k] = np.mean([expectation(ds.records[(label, s)], obs) for s in compat])
        elif b == "I":
            compat = [a + c for c in "XYZ"]
            values[k] = np.mean([expectation(ds.records[(label, s)], obs) for s in compat])
        else:
            values[k] = expectation(ds.records[(label, obs)], obs)
    return values


_DESIGN_MATRIX: np.ndarray | None = None


def _design_matrix() -> np.ndarray:
    """Rows map vec(J) to d * Tr(J (P_k (x) rho_j^T)), the model expectations."""
    global _DESIGN_MATRIX
    if _DESIGN_MATRIX is None:
        paulis = pauli_basis(2)
        rows = []
        for label in PREP_LABELS:
            rho_t = prep_state(label).T
            for pk in paulis:
                s = kron(pk, rho_t)
                rows.append(4.0 * s.T.reshape(-1))
        _DESIGN_MATRIX = np.array(rows)
    return _DESIGN_MATRIX


def reconstruct_channel(ds: TomographyDataset) -> QuantumChannel:
    """Least-squares Choi estimate from the dataset, projected onto CPTP."""
    measured = np.concatenate([_pauli_expectations(ds, label) for label in PREP_LABELS])
    a = _design_matrix()
    x, *_ = np.linalg.lstsq(a, measured.astype(complex), rcond=None)
    j = x.reshape(16, 16)
    j = 0.5 * (j + dagger(j))
    return project_cptp(j)


def process_fidelity(a: QuantumChannel, b: QuantumChannel) -> float:
    """Uhlmann fidelity between the normalized Choi states of two channels.

    When either Choi state is rank one (any unitary channel) this reduces to
    the plain overlap <phi|J|phi>, which is evaluated directly for accuracy.
    """
    ja, jb = a.choi_matrix(), b.choi_matrix()
    if ja.shape != jb.shape:
        raise ValueError("channels act on different dimensions")
    for first, second in ((ja, jb), (jb, ja)):
        vals, vecs = np.linalg.eigh(first)
        if vals[:-1].max(initial=0.0) <= 1e-12:
            v = vecs[:, -1]
            f = float(vals[-1] * np.real(np.vdot(v, second @ v)))
            return min(max(f, 0.0), 1.0)
    sq = _sqrtm_psd(ja)
    ev = np.linalg.eigvalsh(sq @ jb @ sq)
    ev = ev[ev > max(ev.max(initial=0.0), 0.0) * 1e-13]  # drop numerical junk
    f = float(np.sum(np.sqrt(ev)) ** 2)
    return min(max(f, 0.0), 1.0)


def _sqrtm_psd(m: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(0.5 * (m + dagger(m)))
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ dagger(vecs)


def average_gate_fidelity(f_proc: float) -> float:
    """Companion metric (d * F_proc + 1) / (d + 1) for d = 4."""
    if not 0.0 <= f_proc <= 1.0:
        raise ValueError(f"process fidelity {f_proc} outside [0, 1]")
    return (4.0 * f_proc + 1.0) / 5.0


def exact_process_fidelity(circuit: Circuit, noise=None) -> float:
    """Exact-probability tomographic fidelity of a circuit against its own
    ideal unitary; the deterministic evaluator behind noise fitting."""
    ds = run_qpt(circuit, noise=noise, shots=None)
    reconstructed = reconstruct_channel(ds)
    target = channel_from_unitary(circuit_unitary(circuit))
    return process_fidelity(reconstructed, target)
