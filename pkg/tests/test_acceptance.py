"""Acceptance gate: one test (and one printed pass/fail line) per criterion."""

import math

import numpy as np

from dqs.channels import (
    ChannelParams,
    NoiseSpec,
    apply_dephasing,
    apply_heating_first_order,
    apply_loss_first_order,
    phase_averaged_displacement,
    phase_jitter_averaged_displacement,
)
from dqs.cli import main as cli_main
from dqs.fock_core import (
    ModeSpace,
    PureState,
    StateSpec,
    coherence_summary,
    joint_parity_povm,
    make_single_mode_state,
    per_mode_parity_povm,
    product_state,
)
from dqs.metrology import (
    NumericsConfig,
    analytic_two_mode_parity_fi,
    cfi_povm,
    homodyne_fi_gaussian,
    homodyne_mixed_asymptote,
    qfi_mixed,
    qfi_phase_averaged_pure_bound,
    qfim_direction_qfi,
)
from dqs.scenarios import (
    Strategy,
    build_strategy_state,
    evaluate_probe,
    parity_fi_bruteforce,
)

CFG = NumericsConfig()


def _criterion(num, ok, detail=""):
    print(f"criterion {num:02d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, f"criterion {num:02d} failed: {detail}"


def _channel(rho):
    def chan(alpha):
        return phase_averaged_displacement(rho, ChannelParams(alpha=alpha))

    return chan


def _parity_cfi(rho, alpha, povm=None):
    povm = povm or joint_parity_povm(rho.space)
    val, _ = cfi_povm(_channel(rho), povm, alpha, CFG)
    return val


def test_criterion_01_sql_baseline():
    """Vacuum parity CFI and coherent-family QFI both sit at 4M."""
    worst = 0.0
    for M in (1, 2):
        vac = product_state([make_single_mode_state(StateSpec.fock(0), 12)] * M).to_density()
        cfi = _parity_cfi(vac, 1e-3)
        worst = max(worst, abs(cfi - 4.0 * M) / (4.0 * M))
        coh = product_state(
            [make_single_mode_state(StateSpec.coherent(0.3), 14)] * M
        ).to_density()
        qfi, _ = qfi_mixed(_channel(coh), 0.05, CFG)
        worst = max(worst, abs(qfi - 4.0 * M) / (4.0 * M))
    _criterion(1, worst < 0.01, f"max rel dev {worst:.2e}")


def test_criterion_02_single_mode_fock():
    worst = 0.0
    for n in (1, 2, 3):
        rho = make_single_mode_state(StateSpec.fock(n), n + 14).to_density()
        cfi = _parity_cfi(rho, 1e-3)
        target = 4.0 * (2 * n + 1)
        worst = max(worst, abs(cfi - target) / target)
    _criterion(2, worst < 0.005, f"max rel dev {worst:.2e}")


def test_criterion_03_two_mode_saturation():
    probe = build_strategy_state(Strategy("delocalized", StateSpec.fock(2), M=2, cutoff=12))
    rho = probe.to_density()
    cfi = _parity_cfi(rho, 1e-3)
    qfi, _ = qfi_mixed(_channel(rho), 1e-3, CFG)
    ok = abs(cfi - 40.0) / 40.0 < 0.005 and cfi - 1e-6 <= qfi <= 40.0 * 1.005
    _criterion(3, ok, f"cfi={cfi:.4f} qfi={qfi:.4f}")


def test_criterion_04_equal_budget():
    sep = evaluate_probe(
        build_strategy_state(Strategy("separable", StateSpec.fock(1), M=2, cutoff=12)), 1e-3
    )
    deloc = evaluate_probe(
        build_strategy_state(Strategy("delocalized", StateSpec.fock(1), M=2, cutoff=12)), 1e-3
    )
    ok = (
        abs(sep.cfi - 24.0) / 24.0 < 0.005
        and abs(deloc.cfi - 24.0) / 24.0 < 0.005
        and abs(sep.f_self - 24.0) < 1e-9
        and abs(sep.f_cross) < 1e-9
        and abs(deloc.f_self - 16.0) < 1e-9
        and abs(deloc.f_cross - 8.0) < 1e-9
    )
    _criterion(4, ok, f"cfi sep={sep.cfi:.4f} deloc={deloc.cfi:.4f}")


def test_criterion_05_quadratic_coefficient():
    cases = [
        (StateSpec.fock(0), 0.0, 0.0, 30),
        (StateSpec.fock(1), 1.0, 1.0, 30),
        (StateSpec.fock(2), 2.0, 4.0, 30),
        (StateSpec.squeezed_vacuum_nbar(0.5625), 0.5625, 3 * 0.5625**2 + 2 * 0.5625, 40),
    ]
    alphas = np.linspace(1e-3, 5e-2, 12)
    design = np.vstack([np.ones_like(alphas), alphas**2, alphas**4]).T
    worst = 0.0
    for spec, nb, nb2, cutoff in cases:
        rho = make_single_mode_state(spec, cutoff).to_density()
        vals = [_parity_cfi(rho, a) for a in alphas]
        _, c2, _ = np.linalg.lstsq(design, np.asarray(vals), rcond=None)[0]
        target = -8.0 * (1.0 - 2.0 * nb * nb + nb + 3.0 * nb2)
        worst = max(worst, abs(c2 - target) / abs(target))
    _criterion(5, worst < 0.05, f"max rel dev of alpha^2 coefficient {worst:.2e}")


def test_criterion_06_dephasing_law():
    probe = build_strategy_state(Strategy("delocalized", StateSpec.fock(2), M=2, cutoff=12))
    fs, fc = 24.0, 16.0
    rho = probe.to_density()
    worst = 0.0
    for gt in (0.2, 0.5, 1.0, 2.0):
        noisy = apply_dephasing(rho, gt)
        cfi = _parity_cfi(noisy, 1e-3)
        target = fs + math.exp(-gt) * fc
        worst = max(worst, abs(cfi - target) / target)
    _criterion(6, worst < 0.01, f"max rel dev {worst:.2e}")


def test_criterion_07_phase_jitter():
    probe = build_strategy_state(Strategy("delocalized", StateSpec.fock(2), M=2, cutoff=12))
    rho = probe.to_density()
    fs, fc = 24.0, 16.0
    povm = joint_parity_povm(rho.space)
    worst = 0.0
    for sigma in (0.1, 0.3, 0.5):
        def chan(alpha, s=sigma):
            return phase_jitter_averaged_displacement(
                rho, ChannelParams(alpha=alpha, jitter_sigma=s, jitter_nodes=9)
            )

        cfi, _ = cfi_povm(chan, povm, 1e-3, CFG)
        target = fs + math.exp(-(sigma**2)) * fc
        worst = max(worst, abs(cfi - target) / target)
    _criterion(7, worst < 0.01, f"max rel dev {worst:.2e}")


def test_criterion_08_loss_heating_first_order():
    """Effective rate kappa_t (loss) / kappa_t*nbar_th (heating) = 2.5e-4, ratio 0.1."""
    alpha = 0.05
    probe = build_strategy_state(Strategy("delocalized", StateSpec.fock(2), M=2, cutoff=12))
    rho = probe.to_density()
    fs, fc = 24.0, 16.0
    kt = 2.5e-4
    occ = coherence_summary(probe).occupations
    worst = 0.0
    # nbar_th = 0: pure loss on the probe before displacement
    lossy = apply_loss_first_order(rho, kt)
    cfi = _parity_cfi(lossy, alpha)
    target = 4.0 * np.sum(occ + 1.0) + 4.0 * (1.0 - kt / alpha**2) * np.sum(occ) + fc
    worst = max(worst, abs(cfi - target) / target)
    # nbar_th = 5: heating with effective rate kappa_t * nbar_th = 2.5e-4
    heated = apply_heating_first_order(rho, kt)
    cfi = _parity_cfi(heated, alpha)
    target = (1.0 - kt / alpha**2) * fs + fc
    worst = max(worst, abs(cfi - target) / target)
    _criterion(8, worst < 0.05, f"max rel dev {worst:.2e}")


def test_criterion_09_two_mode_analytic_vs_bruteforce():
    cutoffs = {"fock": 40, "squeezed_vacuum": 160, "cat": 80}
    alphas = (0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5)
    worst = 0.0
    for family in ("fock", "squeezed_vacuum", "cat"):
        for strat in ("delocalized", "single_mode", "separable"):
            for alpha in alphas:
                ana = analytic_two_mode_parity_fi(family, 5.0, alpha, strat)
                num = parity_fi_bruteforce(family, 5.0, alpha, strat, cutoff=cutoffs[family])
                worst = max(worst, abs(ana - num) / max(abs(ana), abs(num)))
    # dynamical range: largest alpha keeping the delocalized FI above twice the SQL
    def dyn_range(family):
        grid = np.linspace(0.005, 1.2, 480)
        above = [a for a in grid if analytic_two_mode_parity_fi(family, 5.0, a, "delocalized") > 16.0]
        return max(above)

    order_ok = dyn_range("squeezed_vacuum") < dyn_range("cat") < dyn_range("fock")
    _criterion(9, worst < 1e-3 and order_ok, f"max rel dev {worst:.2e}, ordering {order_ok}")


def test_criterion_10_homodyne():
    r = math.log(2.0)
    ok = abs(homodyne_fi_gaussian("two_copies", r) - 32.0) < 1e-9
    nbar, alpha = 20.0, 0.01
    rr = math.asinh(math.sqrt(nbar))
    exact = homodyne_fi_gaussian("interferometric_mixed", rr, alpha)
    asym = homodyne_mixed_asymptote(nbar, alpha)
    ok = ok and abs(exact - asym) / exact < 0.05
    ok = ok and homodyne_fi_gaussian("interferometric_mixed", rr, 1e-9) < 1e-10
    _criterion(10, ok, f"exact={exact:.4f} asymptote={asym:.4f}")


def test_criterion_11_phase_fixed_vs_averaged():
    ratios = []
    exceeds = True
    for n in (1, 5, 20, 100):
        rep = evaluate_probe(
            build_strategy_state(
                Strategy("all_in_common_analytic", StateSpec.fock(n), M=2, cutoff=n + 2)
            ),
            1e-3,
        )
        exceeds = exceeds and rep.bound_phase_fixed > rep.bound_eq10
        ratios.append(rep.bound_phase_fixed / rep.bound_eq10)
    ok = exceeds and abs(ratios[-1] - 2.0) < 0.1
    _criterion(11, ok, f"ratio at N=100: {ratios[-1]:.5f}")


def test_criterion_12_quadratic_form():
    rng = np.random.default_rng(42)
    sp = ModeSpace((10, 10))
    occ = sp.occupations()
    worst = 0.0
    for trial in range(20):
        mask = (occ.sum(axis=1) % 2 == trial % 2) & (occ.max(axis=1) <= 6)
        amps = np.zeros(sp.dim, dtype=complex)
        amps[mask] = rng.normal(size=int(mask.sum())) + 1j * rng.normal(size=int(mask.sum()))
        amps /= np.linalg.norm(amps)
        st = PureState(sp, amps)
        q = qfim_direction_qfi(st, np.ones(2), phase_average=True)
        worst = max(worst, abs(q - qfi_phase_averaged_pure_bound(st)))
    _criterion(12, worst < 1e-10, f"max abs dev {worst:.2e}")


def test_criterion_13_povm_refinement():
    strategies = [
        Strategy("delocalized", StateSpec.fock(1), M=2, cutoff=12),
        Strategy("delocalized", StateSpec.fock(2), M=2, cutoff=12),
        Strategy("separable", StateSpec.fock(1), M=2, cutoff=12),
        Strategy("separable", StateSpec.cat(0.8), M=2, cutoff=14),
        Strategy("delocalized", StateSpec.squeezed_vacuum(0.4), M=2, cutoff=22),
    ]
    refinement_ok = True
    equality_worst = 0.0
    for strategy in strategies:
        rho = build_strategy_state(strategy).to_density()
        joint = _parity_cfi(rho, 1e-3)
        per = _parity_cfi(rho, 1e-3, povm=per_mode_parity_povm(rho.space))
        refinement_ok = refinement_ok and per >= joint * (1.0 - 1e-9)
        if strategy.kind == "delocalized":
            equality_worst = max(equality_worst, abs(per - joint) / joint)
    ok = refinement_ok and equality_worst < 0.005
    _criterion(13, ok, f"refinement {refinement_ok}, delocalized gap {equality_worst:.2e}")


def test_criterion_14_validate_determinism(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    ra = cli_main(["validate", "--out", str(a)])
    rb = cli_main(["validate", "--out", str(b)])
    ok = ra == 0 and rb == 0 and a.read_bytes() == b.read_bytes()
    _criterion(14, ok, f"exit codes {ra},{rb}")
