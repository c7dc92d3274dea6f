"""Command-line front end.

Commands map onto the two benchmark experiments plus utilities:

* ``decompose``  -- emit the native-basis circuit for a target and verify it
* ``state``      -- direct state measurement with success-probability report
* ``qpt``        -- full process tomography with fidelity against a target
* ``fit-noise``  -- calibrate the depolarizing knob to a target fidelity
* ``stability``  -- drift analytics between two calibration snapshots

Every command writes machine-readable JSON to ``--out``, a run manifest to
``<out>.manifest.json``, and a human summary to stdout. Seeds default to a
fixed constant (42) so runs are reproducible by default. If MSBENCH_OUTPUT_DIR
is set, relative output paths are resolved under it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .channels import channel_from_unitary
from .circuits import (
    BUILTIN_CIRCUITS,
    BUILTIN_TARGETS,
    Circuit,
    circuit_unitary,
    phase_aligned_distance,
)
from .metrics import BenchmarkReport, stability_analysis, success_probability
from .noise import DeviceCalibration, UnachievableTargetError, build_noise_model, fit_depolarizing
from .simulator import BITSTRINGS, RNG_ALGORITHM, basis_state, evolve, outcome_distribution, sample_counts
from .tomography import (
    DEFAULT_SEED,
    exact_process_fidelity,
    process_fidelity,
    reconstruct_channel,
    run_qpt,
)

DECOMPOSITION_TOLERANCE = 1e-9


def _resolve_out(path: str) -> Path:
    p = Path(path)
    base = os.environ.get("MSBENCH_OUTPUT_DIR")
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _sibling(out: Path, suffix: str) -> Path:
    stem = out.name[: -len(".json")] if out.name.endswith(".json") else out.name
    return out.with_name(stem + suffix)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n")


def _write_manifest(out: Path, command: str, flags: dict, seed, cal_fingerprint: str,
                    outputs: list[Path]) -> None:
    manifest = {
        "command": command,
        "flags": flags,
        "seed": seed,
        "rng": RNG_ALGORITHM,
        "calibration_fingerprint": cal_fingerprint,
        "version": __version__,
        "outputs": [str(p) for p in outputs],
    }
    _write_json(out.with_name(out.name + ".manifest.json"), manifest)


def _load_circuit(name_or_path: str) -> tuple[Circuit, str]:
    if name_or_path in BUILTIN_CIRCUITS:
        return BUILTIN_CIRCUITS[name_or_path](), name_or_path
    return Circuit.from_json(Path(name_or_path).read_text()), "custom"


def _load_noise(path: str | None):
    if path is None:
        return None, None
    cal = DeviceCalibration.load(path)
    return build_noise_model(cal), cal


def cmd_decompose(args) -> int:
    out = _resolve_out(args.out)
    circuit = BUILTIN_CIRCUITS[args.target]()
    target = BUILTIN_TARGETS[args.target]()
    distance = phase_aligned_distance(circuit_unitary(circuit), target.matrix)
    payload = {
        "target": args.target,
        "circuit": json.loads(circuit.to_json()),
        "gate_count": len(circuit),
        "cnot_count": circuit.cnot_count(),
        "phase_aligned_distance": distance,
    }
    _write_json(out, payload)
    _write_manifest(out, "decompose", {"target": args.target}, None, "none", [out])
    ok = distance <= DECOMPOSITION_TOLERANCE
    print(f"target {args.target}: {len(circuit)} gates, {circuit.cnot_count()} CNOT, "
          f"phase-aligned distance {distance:.3e} "
          f"({'OK' if ok else 'FAIL'} at {DECOMPOSITION_TOLERANCE:.0e})")
    return 0 if ok else 1


def cmd_state(args) -> int:
    out = _resolve_out(args.out)
    circuit, label = _load_circuit(args.circuit)
    noise, cal = _load_noise(args.noise)
    rho = evolve(circuit, basis_state(args.input), noise)
    dist = outcome_distribution(rho, "ZZ", noise.confusion if noise else None)
    record = sample_counts(dist, args.shots, args.seed)
    p_succ = success_probability(record)
    report = BenchmarkReport(
        gate=label,
        backend=f"shots={args.shots},seed={args.seed}",
        noise_fingerprint=cal.fingerprint() if cal else "noiseless",
        process_fidelity=float("nan"),
        success_probability=p_succ,
    )
    payload = {
        "setting": "ZZ",
        "input": args.input,
        "shots": args.shots,
        "seed": args.seed,
        "rng": RNG_ALGORITHM,
        "counts": record.counts,
        "success_probability": p_succ,
        "epsilon": report.epsilon,
        "scaling": report.scaling(),
    }
    _write_json(out, payload)
    csv_path = _sibling(out, ".csv")
    csv_path.write_text(
        "n,success\n" + "\n".join(f"{n},{v:.12f}" for n, v in report.scaling()) + "\n"
    )
    _write_manifest(out, "state", {k: v for k, v in vars(args).items() if k != "func"},
                    args.seed, cal.fingerprint() if cal else "none", [out, csv_path])
    print(f"{label} on |{args.input}>: counts {record.counts}")
    print(f"P_succ = {p_succ:.4f}, epsilon = {report.epsilon:.4f}")
    return 0


def cmd_qpt(args) -> int:
    out = _resolve_out(args.out)
    circuit, label = _load_circuit(args.circuit)
    noise, cal = _load_noise(args.noise)
    shots = None if args.exact else args.shots
    ds = run_qpt(circuit, noise=noise, shots=shots, seed=args.seed)
    channel = reconstruct_channel(ds)

    target_label = args.target or (label if label in BUILTIN_TARGETS else "self")
    if target_label in BUILTIN_TARGETS:
        target_u = BUILTIN_TARGETS[target_label]().matrix
    else:
        target_u = circuit_unitary(circuit)
    fidelity = process_fidelity(channel, channel_from_unitary(target_u))

    out.write_text(ds.to_json() + "\n")
    channel_path = _sibling(out, ".channel.json")
    _write_json(channel_path, channel.convert("choi").to_dict())
    report = BenchmarkReport(
        gate=label,
        backend="exact" if shots is None else f"shots={shots},seed={args.seed}",
        noise_fingerprint=ds.noise_fingerprint,
        process_fidelity=fidelity,
    )
    report_path = _sibling(out, ".report.json")
    _write_json(report_path, report.to_dict())
    _write_manifest(out, "qpt", {k: v for k, v in vars(args).items() if k != "func"},
                    args.seed, cal.fingerprint() if cal else "none",
                    [out, channel_path, report_path])
    backend = "exact probabilities" if shots is None else f"{shots} shots/setting"
    print(f"{label} QPT ({backend}): process fidelity {fidelity:.6f} vs {target_label}")
    return 0


def cmd_fit_noise(args) -> int:
    out = _resolve_out(args.out)
    circuit, label = _load_circuit(args.circuit)
    cal = DeviceCalibration.load(args.calib)
    try:
        p_dep = fit_depolarizing(args.target_fidelity, circuit, cal)
    except UnachievableTargetError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    fitted = cal.with_p_dep(p_dep)
    achieved = exact_process_fidelity(circuit, build_noise_model(fitted))
    out.write_text(fitted.to_json() + "\n")
    _write_manifest(out, "fit-noise", {k: v for k, v in vars(args).items() if k != "func"},
                    None, fitted.fingerprint(), [out])
    print(f"fitted p_dep = {p_dep:.6f} for {label} "
          f"(target F = {args.target_fidelity}, achieved F = {achieved:.6f})")
    return 0


def cmd_stability(args) -> int:
    out = _resolve_out(args.out)
    cal_a = DeviceCalibration.load(args.calib_a)
    cal_b = DeviceCalibration.load(args.calib_b)
    try:
        report = stability_analysis(cal_a, cal_b)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    _write_json(out, report.to_dict())
    csv_path = _sibling(out, ".csv")
    csv_path.write_text(
        "\n".join(",".join(str(c) for c in row) for row in report.to_csv_rows()) + "\n"
    )
    _write_manifest(out, "stability", {k: v for k, v in vars(args).items() if k != "func"},
                    None, f"{cal_a.fingerprint()},{cal_b.fingerprint()}", [out, csv_path])
    print(f"quality correlation r = {report.quality_correlation:.4f}")
    for metric, avg in report.average_variation_percent.items():
        print(f"average {metric} variation: {avg:.2f}%")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="msbench",
        description="Two-qubit gate benchmarking: compilation, noisy simulation, tomography.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="emit and verify a native-basis circuit")
    p.add_argument("--target", choices=("ms", "cx"), required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("state", help="direct state measurement in the ZZ basis")
    p.add_argument("--circuit", default="ms", help="builtin name (ms, cx) or circuit JSON path")
    p.add_argument("--input", default="00", help="initial basis state, e.g. 00")
    p.add_argument("--shots", type=int, default=13_000)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--noise", help="calibration JSON path")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_state)

    p = sub.add_parser("qpt", help="full process tomography")
    p.add_argument("--circuit", default="ms")
    group = p.add_mutually_exclusive_group()
    group.add_argument("--shots", type=int, default=4_000)
    group.add_argument("--exact", action="store_true", help="exact probabilities, no sampling")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--noise", help="calibration JSON path")
    p.add_argument("--target", choices=("ms", "cx"), help="fidelity target (default: the circuit)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_qpt)

    p = sub.add_parser("fit-noise", help="fit p_dep so the circuit hits a target fidelity")
    p.add_argument("--target-fidelity", type=float, required=True)
    p.add_argument("--circuit", default="ms")
    p.add_argument("--calib", required=True, help="baseline calibration JSON path")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit_noise)

    p = sub.add_parser("stability", help="compare two calibration snapshots")
    p.add_argument("--calib-a", required=True)
    p.add_argument("--calib-b", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stability)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "input", None) is not None and args.input not in BITSTRINGS:
        parser.error(f"--input must be one of {', '.join(BITSTRINGS)}")
    if getattr(args, "shots", None) is not None and args.shots <= 0:
        parser.error("--shots must be positive")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
