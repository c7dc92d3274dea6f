"""Benchmark-facing metrics: subspace success probability, infidelity
scaling, gate comparison tables, and calibration stability analytics."""

from __future__ import annotations

import datetime
from dataclasses import dataclass, field

import numpy as np

from .noise import DeviceCalibration
from .simulator import CountsRecord

STABILITY_METRICS = ("t1_us", "t2_us", "readout_error")


def success_probability(record: CountsRecord) -> float:
    """Probability mass on the {00, 11} subspace of a ZZ-setting record."""
    if record.setting != "ZZ":
        raise ValueError(f"success probability needs ZZ counts, got {record.setting}")
    freqs = record.frequencies()
    return float(freqs[0] + freqs[3])


def scaling_table(epsilon: float, n_max: int) -> list[tuple[int, float]]:
    """Cumulative success (1 - epsilon)^n for circuit depths 1..n_max."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon = {epsilon} outside [0, 1]")
    return [(n, (1.0 - epsilon) ** n) for n in range(1, n_max + 1)]


@dataclass
class BenchmarkReport:
    gate: str
    backend: str  # e.g. "exact" or "shots=4000,seed=42"
    noise_fingerprint: str
    process_fidelity: float
    success_probability: float | None = None
    scaling_depth: int = 12
    timestamp: str = field(
        default_factory=lambda: datetime.datetime.now(datetime.timezone.utc).isoformat()
    )

    @property
    def epsilon(self) -> float | None:
        if self.success_probability is None:
            return None
        return 1.0 - self.success_probability

    def scaling(self) -> list[tuple[int, float]] | None:
        if self.epsilon is None:
            return None
        return scaling_table(self.epsilon, self.scaling_depth)

    def to_dict(self) -> dict:
        return {
            "gate": self.gate,
            "backend": self.backend,
            "noise_fingerprint": self.noise_fingerprint,
            "process_fidelity": self.process_fidelity,
            "success_probability": self.success_probability,
            "epsilon": self.epsilon,
            "scaling": self.scaling(),
            "timestamp": self.timestamp,
        }


def compare_gates(reports: list[BenchmarkReport]) -> dict:
    """Side-by-side fidelities with pairwise deltas."""
    if len(reports) < 2:
        raise ValueError("need at least two reports to compare")
    rows = [
        {
            "gate": r.gate,
            "backend": r.backend,
            "process_fidelity": r.process_fidelity,
        }
        for r in reports
    ]
    deltas = []
    for i, a in enumerate(reports):
        for b in reports[i + 1:]:
            deltas.append(
                {
                    "a": f"{a.gate}/{a.backend}",
                    "b": f"{b.gate}/{b.backend}",
                    "delta": a.process_fidelity - b.process_fidelity,
                }
            )
    return {"gates": rows, "deltas": deltas}


@dataclass
class StabilityReport:
    """Calibration drift between two snapshots.

    The per-qubit quality score (mean of z-scored T1, T2 and negated readout
    error within a snapshot) is a toolkit-defined composite, not a published
    metric; it is flagged as such in the serialized output.
    """

    variation_percent: dict  # metric -> {qubit id -> percent}
    average_variation_percent: dict  # metric -> percent
    quality_scores_a: dict  # qubit id -> score
    quality_scores_b: dict
    quality_correlation: float

    def to_dict(self) -> dict:
        return {
            "variation_percent": self.variation_percent,
            "average_variation_percent": self.average_variation_percent,
            "quality_scores_a": self.quality_scores_a,
            "quality_scores_b": self.quality_scores_b,
            "quality_correlation": self.quality_correlation,
            "quality_score_definition": (
                "toolkit-defined: mean of z-scored T1, T2 and negated readout "
                "error within each snapshot"
            ),
        }

    def to_csv_rows(self) -> list[list]:
        rows = [["metric", "qubit", "variation_percent"]]
        for metric, per_qubit in self.variation_percent.items():
            for qubit, value in per_qubit.items():
                rows.append([metric, qubit, value])
        rows.append(["quality_correlation", "", self.quality_correlation])
        return rows


def _percent_variation(a: float, b: float) -> float:
    mean = 0.5 * (a + b)
    if mean == 0.0:
        return 0.0
    return abs(a - b) / mean * 100.0


def _quality_scores(cal: DeviceCalibration) -> dict:
    cols = {}
    for metric in STABILITY_METRICS:
        vals = np.array([getattr(q, metric) for q in cal.qubits], dtype=float)
        if metric == "readout_error":
            vals = -vals
        std = vals.std()
        cols[metric] = (vals - vals.mean()) / std if std > 0 else np.zeros_like(vals)
    scores = np.mean([cols[m] for m in STABILITY_METRICS], axis=0)
    return {q.qubit: float(s) for q, s in zip(cal.qubits, scores)}


def stability_analysis(a: DeviceCalibration, b: DeviceCalibration) -> StabilityReport:
    ids_a = [q.qubit for q in a.qubits]
    ids_b = [q.qubit for q in b.qubits]
    if sorted(ids_a) != sorted(ids_b):
        raise ValueError(f"calibration qubit sets differ: {ids_a} vs {ids_b}")

    variation: dict = {m: {} for m in STABILITY_METRICS}
    for qa in a.qubits:
        qb = b.qubit(qa.qubit)
        for metric in STABILITY_METRICS:
            variation[metric][qa.qubit] = _percent_variation(
                getattr(qa, metric), getattr(qb, metric)
            )
    averages = {m: float(np.mean(list(v.values()))) for m, v in variation.items()}

    scores_a = _quality_scores(a)
    scores_b = _quality_scores(b)
    va = np.array([scores_a[q] for q in sorted(scores_a)])
    vb = np.array([scores_b[q] for q in sorted(scores_b)])
    if np.allclose(va, vb, atol=1e-15):
        r = 1.0
    elif va.std() == 0 or vb.std() == 0:
        r = 0.0
    else:
        r = float(np.corrcoef(va, vb)[0, 1])
    return StabilityReport(variation, averages, scores_a, scores_b, r)
