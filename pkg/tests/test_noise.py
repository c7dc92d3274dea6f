import math

import numpy as np
import pytest

from msbench.channels import channel_from_unitary
from msbench.circuits import synthesize_ms_circuit
from msbench.noise import (
    DEFAULT_DURATIONS_NS,
    DeviceCalibration,
    QubitCalibration,
    UnachievableTargetError,
    build_noise_model,
    confusion_matrix,
    damping_channel,
    depolarizing_channel,
    fit_depolarizing,
)
from msbench.tomography import exact_process_fidelity, process_fidelity

from conftest import random_density_matrix

EXCITED = np.diag([0.0, 1.0]).astype(complex)
GROUND = np.diag([1.0, 0.0]).astype(complex)


def make_cal(t1=(100.0, 100.0), t2=(80.0, 80.0), readout=(0.0, 0.0),
             durations=None, p_dep=0.0):
    qubits = tuple(
        QubitCalibration(i, t1[i], t2[i], readout[i]) for i in range(2)
    )
    return DeviceCalibration(qubits, durations or {}, p_dep)


def test_damping_zero_duration_is_identity(rng):
    ch = damping_channel(100.0, 80.0, 0.0)
    rho = random_density_matrix(rng, 2)
    assert np.allclose(ch.apply(rho), rho, atol=1e-12)


def test_damping_gamma_closed_form():
    # one T1 of damping with T2 = 2*T1: gamma = 1 - 1/e, no pure dephasing
    t1 = 50.0
    ch = damping_channel(t1, 2 * t1, t1 * 1e3)
    gamma = 1 - math.exp(-1)
    out = ch.apply(EXCITED)
    assert out[1, 1].real == pytest.approx(1 - gamma, abs=1e-12)
    assert out[0, 0].real == pytest.approx(gamma, abs=1e-12)
    # coherence decays by exactly sqrt(1-gamma) when dephasing is absent
    plus = np.full((2, 2), 0.5, dtype=complex)
    assert abs(ch.apply(plus)[0, 1]) == pytest.approx(0.5 * math.sqrt(1 - gamma), abs=1e-12)


def test_damping_long_time_limit(rng):
    ch = damping_channel(10.0, 15.0, 1e9)
    rho = random_density_matrix(rng, 2)
    assert np.allclose(ch.apply(rho), GROUND, atol=1e-8)


def test_damping_rejects_unphysical():
    with pytest.raises(ValueError):
        damping_channel(50.0, 120.0, 10.0)  # T2 > 2*T1
    with pytest.raises(ValueError):
        damping_channel(-1.0, 1.0, 10.0)


@pytest.mark.parametrize("t2_factor", [2.0, 0.7])
def test_damping_semigroup(rng, t2_factor):
    t1 = 80.0
    t2 = t2_factor * t1
    s, t = 120.0, 450.0  # ns
    first = damping_channel(t1, t2, s)
    second = damping_channel(t1, t2, t)
    combined = damping_channel(t1, t2, s + t)
    for _ in range(5):
        rho = random_density_matrix(rng, 2)
        assert np.allclose(second.apply(first.apply(rho)), combined.apply(rho), atol=1e-9)


def test_depolarizing_limits(rng):
    rho = random_density_matrix(rng, 4)
    assert np.allclose(depolarizing_channel(0.0, 2).apply(rho), rho, atol=1e-12)
    assert np.allclose(depolarizing_channel(1.0, 2).apply(rho), np.eye(4) / 4, atol=1e-12)
    rho1 = random_density_matrix(rng, 2)
    assert np.allclose(depolarizing_channel(1.0, 1).apply(rho1), np.eye(2) / 2, atol=1e-12)


def test_depolarizing_fidelity_closed_form():
    p = 0.1
    ch = depolarizing_channel(p, 2)
    ident = channel_from_unitary(np.eye(4))
    # brute-force chi route: fidelity to identity is the chi_II diagonal
    chi = ch.chi_matrix()
    assert chi[0, 0].real == pytest.approx(1 - 15 * p / 16, abs=1e-12)
    assert process_fidelity(ch, ident) == pytest.approx(1 - 15 * p / 16, abs=1e-9)
    assert process_fidelity(ch, ident) == pytest.approx(0.90625, abs=1e-9)


def test_depolarizing_rejects_bad_probability():
    with pytest.raises(ValueError):
        depolarizing_channel(-0.1, 2)
    with pytest.raises(ValueError):
        depolarizing_channel(1.1, 1)


def test_confusion_matrix_identity():
    cal = make_cal(readout=(0.0, 0.0))
    assert np.allclose(confusion_matrix(cal), np.eye(4))


def test_confusion_matrix_fully_random():
    cal = make_cal(readout=(0.5, 0.5))
    assert np.allclose(confusion_matrix(cal), np.full((4, 4), 0.25))


def test_confusion_matrix_product_entries():
    cal = make_cal(readout=(0.018, 0.019))
    c = confusion_matrix(cal)
    assert c[0, 0] == pytest.approx((1 - 0.018) * (1 - 0.019), abs=1e-12)
    assert c[0, 0] == pytest.approx(0.963342, abs=1e-6)
    assert np.allclose(c.sum(axis=1), 1.0, atol=1e-12)
    assert c.min() >= 0


def test_confusion_matrix_asymmetric_override():
    q0 = QubitCalibration(0, 100, 80, 0.02, readout_error_01=0.01, readout_error_10=0.05)
    q1 = QubitCalibration(1, 100, 80, 0.0)
    cal = DeviceCalibration((q0, q1))
    c = confusion_matrix(cal)
    assert c[0, 0] == pytest.approx(0.99)   # true 00 read correctly
    assert c[2, 0] == pytest.approx(0.05)   # true 10 read as 00
    assert np.allclose(c.sum(axis=1), 1.0, atol=1e-12)


def test_calibration_validation():
    with pytest.raises(ValueError):
        QubitCalibration(0, 100.0, 250.0, 0.01)  # T2 > 2*T1
    with pytest.raises(ValueError):
        QubitCalibration(0, -5.0, 10.0, 0.01)
    with pytest.raises(ValueError):
        QubitCalibration(0, 100.0, 80.0, 1.5)
    with pytest.raises(ValueError):
        make_cal(p_dep=1.5)


def test_calibration_json_roundtrip():
    cal = make_cal(t1=(120.0, 90.0), t2=(100.0, 70.0), readout=(0.018, 0.019), p_dep=0.01)
    again = DeviceCalibration.from_json(cal.to_json())
    assert again == cal
    assert again.fingerprint() == cal.fingerprint()
    assert again.durations_ns["x"] == DEFAULT_DURATIONS_NS["sx"]


def test_noise_model_zero_errors_is_identity(rng):
    cal = make_cal(durations={"rz": 0, "sx": 0, "cnot": 0, "x": 0})
    model = build_noise_model(cal)
    for gate_key, ch in model.single_qubit.items():
        assert ch is None
    assert model.cnot_channel is None
    assert model.confusion is None


def test_noise_model_channels_are_cptp():
    cal = make_cal(t1=(120.0, 90.0), t2=(100.0, 70.0), readout=(0.02, 0.03), p_dep=0.05)
    model = build_noise_model(cal)
    for ch in list(model.single_qubit.values()) + [model.cnot_channel]:
        if ch is None:
            continue
        ops = ch.kraus_operators()
        comp = sum(k.conj().T @ k for k in ops)
        assert np.linalg.norm(comp - np.eye(4)) <= 1e-8
    assert np.allclose(model.confusion.sum(axis=1), 1.0, atol=1e-12)


def test_fit_depolarizing_trivial_target():
    cal = make_cal(durations={"rz": 0, "sx": 0, "cnot": 0, "x": 0})
    circuit = synthesize_ms_circuit()
    assert fit_depolarizing(1.0, circuit, cal) == 0.0


def test_fit_depolarizing_closed_form_inverse():
    cal = make_cal(durations={"rz": 0, "sx": 0, "cnot": 0, "x": 0})
    circuit = synthesize_ms_circuit()
    p = fit_depolarizing(0.9247, circuit, cal)
    # |F(p) - target| <= 1e-3 translates to |p - p*| <= 16/15 * 1e-3
    assert p == pytest.approx((1 - 0.9247) * 16 / 15, abs=1.2e-3)


def test_fit_depolarizing_with_damping_lands_below_closed_form():
    cal = make_cal(t1=(120.0, 90.0), t2=(100.0, 70.0))
    p = fit_depolarizing(0.9247, synthesize_ms_circuit(), cal)
    assert 0.0 < p < 0.0804


def test_fit_depolarizing_unachievable_target():
    cal = make_cal(t1=(50.0, 50.0), t2=(40.0, 40.0), readout=(0.05, 0.05))
    with pytest.raises(UnachievableTargetError):
        fit_depolarizing(0.999, synthesize_ms_circuit(), cal)


def test_fidelity_monotone_in_depolarizing_strength():
    cal = make_cal(durations={"rz": 0, "sx": 0, "cnot": 0, "x": 0})
    circuit = synthesize_ms_circuit()
    fids = [
        exact_process_fidelity(circuit, build_noise_model(cal.with_p_dep(p)))
        for p in (0.0, 0.02, 0.08, 0.2, 0.5)
    ]
    assert all(a >= b - 1e-9 for a, b in zip(fids, fids[1:]))
