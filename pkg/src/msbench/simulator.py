"""Density-matrix evolution of two-qubit circuits and seeded shot sampling.

The simulator is exact: gates act as unitaries, noise acts through Kraus
sets, and measurement probabilities are computed in closed form. Shot noise
is the only stochastic element, drawn multinomially from a seeded generator.

RNG: numpy PCG64 (algorithm id ``numpy-PCG64-multinomial``), one owned
generator per sampling call; identical seeds reproduce identical counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuits import Circuit
from .linalg import I2, check_density_matrix, dagger, kron

RNG_ALGORITHM = "numpy-PCG64-multinomial"

BITSTRINGS = ("00", "01", "10", "11")
MEASUREMENT_BASES = ("X", "Y", "Z")

# Rotations taking the measurement basis to the computational basis:
# X by the Hadamard-equivalent, Y by S^dag then Hadamard.
_HAD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_BASIS_ROTATION = {
    "X": _HAD,
    "Y": _HAD @ np.diag([1, -1j]).astype(complex),
    "Z": I2,
}


def validate_setting(setting: str) -> str:
    if len(setting) != 2 or any(b not in MEASUREMENT_BASES for b in setting):
        raise ValueError(f"measurement setting must be two of X/Y/Z, got {setting!r}")
    return setting


@dataclass(frozen=True)
class CountsRecord:
    """Outcome record for one measurement setting.

    Either integer ``counts`` with ``shots``, or an exact probability vector
    (``shots`` is None) when the run bypassed sampling.
    """

    setting: str
    shots: int | None
    counts: dict | None
    probs: tuple | None = None

    def __post_init__(self):
        validate_setting(self.setting)
        if self.counts is not None:
            if self.shots is None or self.shots <= 0:
                raise ValueError("counted records need a positive shot number")
            if any(v < 0 for v in self.counts.values()):
                raise ValueError("negative counts")
            if sum(self.counts.values()) != self.shots:
                raise ValueError("counts do not sum to shots")
            object.__setattr__(
                self, "counts", {b: int(self.counts.get(b, 0)) for b in BITSTRINGS}
            )
        elif self.probs is None:
            raise ValueError("record needs counts or exact probabilities")
        else:
            object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))

    @property
    def exact(self) -> bool:
        return self.counts is None

    def frequencies(self) -> np.ndarray:
        if self.exact:
            return np.array(self.probs)
        return np.array([self.counts[b] for b in BITSTRINGS]) / self.shots

    def to_dict(self) -> dict:
        if self.exact:
            return {"setting": self.setting, "exact": True, "probabilities": list(self.probs)}
        return {"setting": self.setting, "shots": self.shots, "counts": dict(self.counts)}

    @staticmethod
    def from_dict(d: dict) -> "CountsRecord":
        if d.get("exact"):
            return CountsRecord(d["setting"], None, None, tuple(d["probabilities"]))
        return CountsRecord(d["setting"], d["shots"], dict(d["counts"]))


def basis_state(bitstring: str) -> np.ndarray:
    """|b0 b1><b0 b1| with qubit 0 the most significant bit."""
    if bitstring not in BITSTRINGS:
        raise ValueError(f"bitstring must be one of {BITSTRINGS}, got {bitstring!r}")
    rho = np.zeros((4, 4), dtype=complex)
    idx = int(bitstring, 2)
    rho[idx, idx] = 1.0
    return rho


def evolve(circuit: Circuit, rho, noise=None) -> np.ndarray:
    """Run the circuit on a density matrix: each gate's unitary, then its
    noise channel (if a model is given)."""
    rho = check_density_matrix(np.asarray(rho, dtype=complex))
    for gate in circuit.gates:
        u = gate.matrix()
        rho = u @ rho @ dagger(u)
        if noise is not None:
            channel = noise.channel_for(gate)
            if channel is not None:
                out = np.zeros_like(rho)
                for k in channel.kraus_operators():
                    out += k @ rho @ dagger(k)
                rho = out
    return 0.5 * (rho + dagger(rho))


def outcome_distribution(rho, setting: str, confusion=None) -> np.ndarray:
    """Outcome probabilities for measuring both qubits in the given bases,
    optionally pushed through a row-stochastic [true, read] confusion matrix."""
    validate_setting(setting)
    rho = check_density_matrix(np.asarray(rho, dtype=complex))
    r = kron(_BASIS_ROTATION[setting[0]], _BASIS_ROTATION[setting[1]])
    probs = np.real(np.diag(r @ rho @ dagger(r))).copy()
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    if confusion is not None:
        probs = probs @ np.asarray(confusion)
    return probs


def sample_counts(dist, shots: int, seed: int, setting: str = "ZZ") -> CountsRecord:
    """Deterministic multinomial draw from a probability 4-vector."""
    dist = np.asarray(dist, dtype=float)
    if dist.shape != (4,):
        raise ValueError("distribution must be a 4-vector")
    if dist.min() < -1e-9:
        raise ValueError(f"negative probability {dist.min():.3e}")
    if abs(dist.sum() - 1.0) > 1e-9:
        raise ValueError(f"distribution sums to {dist.sum():.12f}, not 1")
    if shots <= 0:
        raise ValueError("shots must be positive")
    dist = np.clip(dist, 0.0, None)
    dist /= dist.sum()
    rng = np.random.Generator(np.random.PCG64(seed))
    draw = rng.multinomial(shots, dist)
    return CountsRecord(setting, shots, {b: int(n) for b, n in zip(BITSTRINGS, draw)})


def expectation(record: CountsRecord, observable: str) -> float:
    """Empirical Pauli expectation from a counts record.

    The observable is two of I/X/Y/Z; every non-identity factor must match
    the record's measurement setting at that position. Identity factors
    marginalize the corresponding bit.
    """
    if len(observable) != 2 or any(c not in "IXYZ" for c in observable):
        raise ValueError(f"observable must be two of I/X/Y/Z, got {observable!r}")
    for pos, factor in enumerate(observable):
        if factor != "I" and factor != record.setting[pos]:
            raise ValueError(
                f"observable {observable} incompatible with setting {record.setting}"
            )
    freqs = record.frequencies()
    value = 0.0
    for idx, bits in enumerate(BITSTRINGS):
        sign = 1.0
        for pos, factor in enumerate(observable):
            if factor != "I" and bits[pos] == "1":
                sign = -sign
        value += sign * freqs[idx]
    return float(value)
