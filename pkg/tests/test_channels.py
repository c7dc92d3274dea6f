import numpy as np
import pytest

from msbench.channels import (
    ProjectionError,
    QuantumChannel,
    channel_from_unitary,
    identity_channel,
    pauli_basis,
    project_cptp,
)
from msbench.circuits import ms_unitary
from msbench.linalg import I2, PAULI_X, kron, partial_trace

from conftest import random_cptp_kraus, random_density_matrix


def maximally_entangled_choi():
    omega = np.zeros(16, dtype=complex)
    for i in range(4):
        omega[i * 4 + i] = 0.5
    return np.outer(omega, omega.conj())


def tp_residual(j):
    return np.linalg.norm(4 * partial_trace(j, [1], [4, 4]) - np.eye(4))


def test_identity_channel_choi_is_bell_projector():
    j = identity_channel(4).choi_matrix()
    assert np.allclose(j, maximally_entangled_choi(), atol=1e-12)
    assert np.trace(j) == pytest.approx(1.0, abs=1e-12)


def test_unitary_channel_choi_is_rank_one():
    j = channel_from_unitary(ms_unitary().matrix).choi_matrix()
    vals = np.linalg.eigvalsh(j)
    assert vals[-1] == pytest.approx(1.0, abs=1e-10)
    assert np.all(np.abs(vals[:-1]) <= 1e-10)


def test_channel_from_unitary_rejects_nonunitary():
    with pytest.raises(ValueError):
        channel_from_unitary(np.diag([1.0, 2.0, 1.0, 1.0]))


def test_x_tensor_i_chi_single_diagonal():
    chi = channel_from_unitary(kron(PAULI_X, I2)).chi_matrix()
    expected = np.zeros((16, 16), dtype=complex)
    expected[4, 4] = 1.0  # index 4 = (X, I) in the (I, X, Y, Z)^2 ordering
    assert np.allclose(chi, expected, atol=1e-12)


def test_fully_depolarizing_choi_and_chi():
    # rho -> I/4 has Kraus set {P_m / 4} over all 16 Paulis
    ops = [p / 4 for p in pauli_basis(2)]
    ch = QuantumChannel.from_kraus(ops)
    assert np.allclose(ch.choi_matrix(), np.eye(16) / 16, atol=1e-12)
    assert np.allclose(ch.chi_matrix(), np.eye(16) / 16, atol=1e-12)


def test_identity_roundtrip():
    ch = identity_channel(4)
    j = ch.choi_matrix()
    back = ch.convert("choi").convert("kraus").convert("choi")
    assert np.linalg.norm(back.data - j) <= 1e-12


def test_random_roundtrips(rng):
    for _ in range(20):
        ch = random_cptp_kraus(rng, n_kraus=int(rng.integers(1, 6)))
        j = ch.choi_matrix()
        j_back = (
            QuantumChannel.from_choi(j).convert("chi").convert("kraus").convert("choi").data
        )
        assert np.linalg.norm(j_back - j) <= 1e-9


def test_apply_agrees_across_representations(rng):
    for _ in range(10):
        ch = random_cptp_kraus(rng, n_kraus=4)
        rho = random_density_matrix(rng)
        via_kraus = ch.apply(rho)
        via_choi = ch.convert("choi").apply(rho)
        via_chi = ch.convert("chi").apply(rho)
        assert np.linalg.norm(via_kraus - via_choi) <= 1e-9
        assert np.linalg.norm(via_kraus - via_chi) <= 1e-9
        assert np.trace(via_kraus) == pytest.approx(1.0, abs=1e-8)


def test_apply_identity_and_depolarizing(rng):
    rho = random_density_matrix(rng)
    assert np.allclose(identity_channel(4).apply(rho), rho, atol=1e-12)
    full_dep = QuantumChannel.from_kraus([p / 4 for p in pauli_basis(2)])
    assert np.allclose(full_dep.apply(rho), np.eye(4) / 4, atol=1e-12)


def test_apply_ms_channel_prepares_bell():
    ch = channel_from_unitary(ms_unitary().matrix)
    rho00 = np.zeros((4, 4), dtype=complex)
    rho00[0, 0] = 1
    bell = np.array([1, 0, 0, 1j]) / np.sqrt(2)
    assert np.allclose(ch.apply(rho00), np.outer(bell, bell.conj()), atol=1e-12)


def test_apply_rejects_invalid_density():
    ch = identity_channel(4)
    with pytest.raises(ValueError):
        ch.apply(np.eye(4))  # trace 4
    with pytest.raises(ValueError):
        ch.apply(np.diag([1.5, -0.5, 0, 0]).astype(complex))  # negative eigenvalue


def test_kraus_completeness_enforced():
    with pytest.raises(ValueError):
        QuantumChannel.from_kraus([0.5 * np.eye(4)])


def test_choi_validation():
    with pytest.raises(ValueError):
        QuantumChannel.from_choi(np.eye(16))  # trace-16, not TP under the convention
    j = maximally_entangled_choi()
    j[0, 1] += 1.0  # break Hermiticity
    with pytest.raises(ValueError):
        QuantumChannel.from_choi(j)


def test_project_cptp_fixed_point(rng):
    ch = random_cptp_kraus(rng, n_kraus=3)
    j = ch.choi_matrix()
    out = project_cptp(j).choi_matrix()
    assert np.linalg.norm(out - j) <= 1e-9


def test_project_cptp_perturbation(rng):
    j_ideal = channel_from_unitary(ms_unitary().matrix).choi_matrix()
    eps = 1e-3
    g = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    h = 0.5 * (g + g.conj().T)
    # remove the trace-non-preserving component so the perturbation is TP-tangent
    h -= kron(np.eye(4), partial_trace(h, [1], [4, 4])) / 4
    h /= np.linalg.norm(h)
    out = project_cptp(j_ideal + eps * h).choi_matrix()
    # projections onto a convex set at most double the distance to a member
    assert np.linalg.norm(out - j_ideal) <= 2.5 * eps + 1e-7
    assert np.linalg.eigvalsh(out).min() >= -1e-9
    assert tp_residual(out) <= 1e-6


def test_project_cptp_clips_negative_eigenvalue(rng):
    ch = random_cptp_kraus(rng, n_kraus=4)
    j = ch.choi_matrix()
    vals, vecs = np.linalg.eigh(j)
    vals[0] = -0.01
    vals /= vals.sum()
    raw = (vecs * vals) @ vecs.conj().T
    out = project_cptp(raw).choi_matrix()
    assert np.linalg.eigvalsh(out).min() >= -1e-9
    assert tp_residual(out) <= 1e-6


def test_project_cptp_idempotent(rng):
    g = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    raw = maximally_entangled_choi() + 0.05 * (g + g.conj().T) / np.linalg.norm(g)
    once = project_cptp(raw).choi_matrix()
    twice = project_cptp(once).choi_matrix()
    assert np.linalg.norm(twice - once) <= 1e-8


def test_project_cptp_never_moves_away_from_cptp_points(rng):
    j_ideal = channel_from_unitary(ms_unitary().matrix).choi_matrix()
    for _ in range(5):
        g = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
        h = 0.5 * (g + g.conj().T) / np.linalg.norm(g)
        raw = j_ideal + 0.02 * h
        out = project_cptp(raw).choi_matrix()
        assert np.linalg.norm(out - j_ideal) <= np.linalg.norm(raw - j_ideal) + 1e-7


def test_project_cptp_rejects_nonhermitian():
    raw = np.zeros((16, 16), dtype=complex)
    raw[0, 1] = 1.0
    with pytest.raises(ValueError):
        project_cptp(raw)


def test_channel_json_roundtrip(rng):
    for rep in ("kraus", "choi", "chi"):
        ch = random_cptp_kraus(rng, n_kraus=2).convert(rep)
        again = QuantumChannel.from_dict(ch.to_dict())
        assert again.representation == rep
        assert np.linalg.norm(again.choi_matrix() - ch.choi_matrix()) <= 1e-9


def test_compose_and_tensor(rng):
    a = random_cptp_kraus(rng, dim=2, n_kraus=2)
    b = random_cptp_kraus(rng, dim=2, n_kraus=2)
    joint = a.tensor(b)
    rho = random_density_matrix(rng, 4)
    assert joint.dim == 4
    # tensor acts factor-wise on product states
    ra = random_density_matrix(rng, 2)
    rb = random_density_matrix(rng, 2)
    assert np.allclose(joint.apply(kron(ra, rb)), kron(a.apply(ra), b.apply(rb)), atol=1e-10)
    c = random_cptp_kraus(rng, dim=4, n_kraus=3)
    seq = joint.compose(c)
    assert np.allclose(seq.apply(rho), c.apply(joint.apply(rho)), atol=1e-9)
