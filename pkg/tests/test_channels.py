"""Displacement-channel and noise-map behaviour."""

import math

import numpy as np

from dqs.channels import (
    ChannelParams,
    NoiseSpec,
    apply_dephasing,
    apply_heating_first_order,
    apply_loss_first_order,
    apply_noise,
    default_phase_nodes,
    exactness_threshold,
    phase_averaged_displacement,
    phase_jitter_averaged_displacement,
)
from dqs.fock_core import (
    ModeSpace,
    PureState,
    StateSpec,
    coherence_summary,
    make_single_mode_state,
    product_state,
)


def vacuum_density(cutoffs):
    spec = StateSpec.fock(0)
    return product_state([make_single_mode_state(spec, c) for c in cutoffs]).to_density()


def test_zero_amplitude_is_identity():
    rho = make_single_mode_state(StateSpec.fock(2), 8).to_density()
    out = phase_averaged_displacement(rho, ChannelParams(alpha=0.0))
    np.testing.assert_allclose(out.matrix, rho.matrix, atol=1e-13)


def test_displaced_vacuum_occupation():
    # phase-averaged displacement of vacuum has <n> = alpha^2 exactly
    rho = vacuum_density((28,))
    for alpha in (0.1, 0.4, 0.8):
        out = phase_averaged_displacement(rho, ChannelParams(alpha=alpha))
        assert abs(coherence_summary(out).total - alpha**2) < 1e-9


def test_phase_average_node_doubling_converged():
    rho = make_single_mode_state(StateSpec.fock(2), 14).to_density()
    n0 = default_phase_nodes(rho.space)
    a = phase_averaged_displacement(rho, ChannelParams(alpha=0.3, phase_nodes=n0))
    b = phase_averaged_displacement(rho, ChannelParams(alpha=0.3, phase_nodes=2 * n0))
    assert np.linalg.norm(a.matrix - b.matrix) < 1e-12


def test_phase_average_output_is_state():
    rho = make_single_mode_state(StateSpec.cat(1.0), 16).to_density()
    out = phase_averaged_displacement(rho, ChannelParams(alpha=0.2))
    assert abs(np.trace(out.matrix).real - 1.0) < 1e-10
    evals = np.linalg.eigvalsh(out.matrix)
    assert evals.min() > -1e-10


def test_exactness_threshold_scaling():
    assert exactness_threshold(ModeSpace((5,))) == 2 * 4 + 1
    assert exactness_threshold(ModeSpace((4, 6))) == 2 * (3 + 5) + 1


def test_dephasing_element_decay():
    # off-diagonal 0-2 element decays by exp(-gamma_t * 4 / 2)
    psi = np.zeros(6, dtype=complex)
    psi[0] = psi[2] = 1.0 / math.sqrt(2.0)
    rho = PureState(ModeSpace((6,)), psi).to_density()
    gt = 2.0 * math.log(2.0)
    out = apply_dephasing(rho, gt)
    expected = 0.5 * math.exp(-gt * 4.0 / 2.0)  # = 1/32
    assert abs(out.matrix[0, 2].real - expected) < 1e-13
    np.testing.assert_allclose(np.diag(out.matrix), np.diag(rho.matrix), atol=1e-13)


def test_dephasing_composes_additively():
    rho = make_single_mode_state(StateSpec.cat(0.9), 14).to_density()
    once = apply_dephasing(rho, 0.7)
    twice = apply_dephasing(apply_dephasing(rho, 0.3), 0.4)
    np.testing.assert_allclose(once.matrix, twice.matrix, atol=1e-13)


def test_loss_first_order_occupation():
    # d<n>/dt = -kappa <n> to first order
    rho = make_single_mode_state(StateSpec.fock(3), 8).to_density()
    kt = 1e-3
    out = apply_loss_first_order(rho, kt)
    assert abs(coherence_summary(out).total - 3.0 * (1.0 - kt)) < 1e-5


def test_heating_first_order_occupation():
    rho = vacuum_density((8,))
    kbt = 1e-3
    out = apply_heating_first_order(rho, kbt)
    assert abs(coherence_summary(out).total - kbt) < 1e-5


def test_first_order_threshold_enforced():
    import pytest

    from dqs.errors import ValidityError

    rho = make_single_mode_state(StateSpec.fock(3), 8).to_density()
    with pytest.raises(ValidityError):
        apply_loss_first_order(rho, 0.2)


def test_jitter_sigma_zero_matches_plain_average():
    rho = make_single_mode_state(StateSpec.fock(1), 12).to_density()
    a = phase_averaged_displacement(rho, ChannelParams(alpha=0.2))
    b = phase_jitter_averaged_displacement(rho, ChannelParams(alpha=0.2, jitter_sigma=0.0))
    np.testing.assert_allclose(a.matrix, b.matrix, atol=1e-12)


def test_jitter_single_mode_is_noop():
    # with one mode the relative phase is global, so jitter cannot matter
    rho = make_single_mode_state(StateSpec.fock(1), 12).to_density()
    a = phase_averaged_displacement(rho, ChannelParams(alpha=0.2))
    b = phase_jitter_averaged_displacement(rho, ChannelParams(alpha=0.2, jitter_sigma=0.4))
    np.testing.assert_allclose(a.matrix, b.matrix, atol=1e-10)


def test_jitter_reduces_two_mode_coherence_term():
    # two delocalized modes: jitter suppresses the cross-mode information
    spec = StateSpec.fock(1)
    rho = product_state([make_single_mode_state(spec, 10)] * 2).to_density()
    plain = phase_averaged_displacement(rho, ChannelParams(alpha=0.2))
    jit = phase_jitter_averaged_displacement(rho, ChannelParams(alpha=0.2, jitter_sigma=0.5))
    assert abs(np.trace(jit.matrix).real - 1.0) < 1e-10
    assert np.linalg.norm(plain.matrix - jit.matrix) > 1e-6


def test_apply_noise_dispatch():
    rho = make_single_mode_state(StateSpec.fock(1), 8).to_density()
    out = apply_noise(rho, NoiseSpec(kind="dephasing", gamma_t=0.5))
    np.testing.assert_allclose(out.matrix, apply_dephasing(rho, 0.5).matrix, atol=1e-13)
    out = apply_noise(rho, NoiseSpec(kind="loss", kappa_t=1e-3))
    np.testing.assert_allclose(out.matrix, apply_loss_first_order(rho, 1e-3).matrix, atol=1e-13)
