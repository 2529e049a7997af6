"""Quantum and classical Fisher information: numerics, bounds, and closed forms.

Conventions: the estimated parameter is the displacement amplitude alpha of the
phase-randomized channel; the generator at fixed phase phi is
G(phi) = sum_i (e^{i phi} a_i^dag - e^{-i phi} a_i) / i, so phi = 0 displaces
the position quadrature by sqrt(2) alpha.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ValidityError
from .fock_core import (
    CoherenceSummary,
    DensityOp,
    Povm,
    PureState,
    coherence_summary,
    embed_operator,
    ladder,
    parity_of_state,
)
from .channels import NoiseSpec
from .special_fn import bessel_i0, bessel_j0, laguerre

#: Validity threshold on kappa_t/alpha^2 (loss) and kappa_t*nbar/alpha^2 (heating)
#: for the first-order decoherence predictions.
FIRST_ORDER_RATIO_THRESHOLD = 0.25


@dataclass(frozen=True)
class NumericsConfig:
    fd_step: float = 1e-4
    eigen_cutoff: float = 1e-12
    richardson: bool = False

    def __post_init__(self):
        if self.fd_step <= 0 or self.eigen_cutoff <= 0:
            raise ValueError("fd_step and eigen_cutoff must be > 0")


@dataclass
class FisherReport:
    qfi: float | None
    cfi: float | None
    f_self: float
    f_cross: float
    bound_eq6: float
    bound_eq7: float
    bound_eq10: float
    bound_eq17: float
    bound_phase_fixed: float
    sql: float
    metadata: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# moments and bounds


def _sum_annihilator(state: PureState, weights: np.ndarray | None = None) -> np.ndarray:
    space = state.space
    M = space.mode_count
    if weights is None:
        weights = np.ones(M)
    S = np.zeros((space.dim, space.dim), dtype=complex)
    for i in range(M):
        S += weights[i] * embed_operator(ladder(space.cutoffs[i])[0], i, space)
    return S


def qfi_pure_fixed_phase(state: PureState, phi: float) -> float:
    """4 Var_psi(G(phi)) with G(phi) = sum_i (e^{i phi} a_i^dag - e^{-i phi} a_i)/i."""
    psi = state.amplitudes
    S = _sum_annihilator(state)
    Spsi = S @ psi
    Sdpsi = S.conj().T @ psi
    eip = complex(math.cos(phi), math.sin(phi))
    # <G> = (e^{i phi} <S^dag> - e^{-i phi} <S>) / i
    mean = (eip * np.vdot(psi, Sdpsi) - eip.conjugate() * np.vdot(psi, Spsi)) / 1j
    # <G^2> = -e^{2i phi} <S^dag^2> - e^{-2i phi} <S^2> + <S^dag S + S S^dag>
    sdagsq = np.vdot(Spsi, Sdpsi)
    ssq = np.vdot(Sdpsi, Spsi)
    symm = np.vdot(Spsi, Spsi) + np.vdot(Sdpsi, Sdpsi)
    g2 = -(eip**2) * sdagsq - (eip.conjugate() ** 2) * ssq + symm
    return float(4.0 * (g2.real - (mean.real) ** 2))


def self_cross_split(summary: CoherenceSummary) -> tuple[float, float]:
    """F_s = 4 sum_i (2<n_i>+1); F_c = 4 sum_{i!=j} <a_i^dag a_j + a_j^dag a_i>."""
    f_self = float(4.0 * np.sum(2.0 * summary.occupations + 1.0))
    C = summary.coherence
    off = C - np.diag(np.diag(C))
    f_cross = float(4.0 * (off + off.conj().T).sum().real)
    return f_self, f_cross


def qfi_phase_averaged_pure_bound(state: PureState) -> float:
    """Upper bound on the phase-averaged QFI: 4 sum_i(2<n_i>+1) + 4 sum_{i!=j} <a_i^dag a_j + h.c.>."""
    summary = coherence_summary(state)
    f_self, f_cross = self_cross_split(summary)
    return f_self + f_cross


@dataclass(frozen=True)
class PhaseFixedBound:
    value: float
    delta_term: float


def phase_fixed_bound(state: PureState) -> PhaseFixedBound:
    """Fixed-phase bound 4M(2<N>+1+2 sqrt(<N>(<N>+1))); Delta term 4M<b^dag^2 + b^2>."""
    space = state.space
    M = space.mode_count
    summary = coherence_summary(state)
    N = summary.total
    value = 4.0 * M * (2.0 * N + 1.0 + 2.0 * math.sqrt(N * (N + 1.0)))
    B = _sum_annihilator(state) / math.sqrt(M)
    psi = state.amplitudes
    b2 = np.vdot(B.conj().T @ psi, B @ psi)  # <b^2>
    delta = float(4.0 * M * 2.0 * b2.real)
    return PhaseFixedBound(value=value, delta_term=delta)


def qfim_direction_qfi(state: PureState, direction: np.ndarray, phase_average: bool) -> float:
    """Scalar QFI of the amplitude along a fixed mode-weight direction u.

    Fixed phase: 4 Var(sum_i u_i A_i(phi)) at phi = 0.  Phase averaged: the
    uniform phi integral in closed form (the e^{+-2 i phi} terms drop).
    """
    u = np.asarray(direction, dtype=float)
    if u.shape != (state.space.mode_count,):
        raise ValueError("direction length must equal mode count")
    if np.linalg.norm(u) == 0:
        raise ValueError("direction must be nonzero")
    psi = state.amplitudes
    S = _sum_annihilator(state, weights=u)
    Spsi = S @ psi
    Sdpsi = S.conj().T @ psi
    symm = float((np.vdot(Spsi, Spsi) + np.vdot(Sdpsi, Sdpsi)).real)
    mean_s = np.vdot(psi, Spsi)
    if phase_average:
        # Var averaged over phi: <S^dag S + S S^dag> - 2|<S>|^2
        return 4.0 * (symm - 2.0 * abs(mean_s) ** 2)
    sdagsq = np.vdot(Spsi, Sdpsi).real
    ssq = np.vdot(Sdpsi, Spsi).real
    mean = (np.vdot(psi, Sdpsi) - np.vdot(psi, Spsi)) / 1j
    g2 = -sdagsq - ssq + symm
    return float(4.0 * (g2 - mean.real**2))


# ---------------------------------------------------------------------------
# numeric QFI / CFI


def qfi_mixed(
    rho_at: Callable[[float], DensityOp], alpha: float, config: NumericsConfig = NumericsConfig()
) -> tuple[float, dict]:
    """Mixed-state QFI via the SLD eigen-formula with central-difference d rho/d alpha.

    Returns (value, diagnostics); diagnostics include the cutoff-sensitivity
    value recomputed at 10x the eigen-cutoff.
    """
    h = config.fd_step
    if h >= alpha / 2:
        h = alpha / 4
    if h <= 0:
        raise ValueError("FD step incompatible with alpha")
    rho = rho_at(alpha).matrix
    drho = (rho_at(alpha + h).matrix - rho_at(alpha - h).matrix) / (2.0 * h)
    lam, vec = np.linalg.eigh(rho)
    B = vec.conj().T @ drho @ vec
    denom = lam[:, None] + lam[None, :]
    w2 = np.abs(B) ** 2

    def total(eps: float) -> float:
        mask = denom > eps
        return float(2.0 * (w2[mask] / denom[mask]).sum())

    value = total(config.eigen_cutoff)
    sens = total(10.0 * config.eigen_cutoff)
    return value, {
        "fd_step": h,
        "eigen_cutoff": config.eigen_cutoff,
        "cutoff_sensitivity": sens,
    }


def cfi_povm(
    channel: Callable[[float], DensityOp],
    povm: Povm,
    alpha: float,
    config: NumericsConfig = NumericsConfig(),
) -> tuple[float, dict]:
    """Classical FI of the POVM at alpha via central differences on p_k(alpha)."""
    if alpha <= 0:
        raise ValueError("alpha must be > 0")
    h = max(config.fd_step, alpha / 20.0)
    if h >= alpha / 2:
        h = alpha / 4

    def fi_at(step: float) -> float:
        p = povm.probabilities(channel(alpha))
        if float(p.min()) < -1e-12:
            raise ValueError(f"negative probability {p.min():g}")
        dp = (povm.probabilities(channel(alpha + step)) - povm.probabilities(channel(alpha - step))) / (
            2.0 * step
        )
        keep = (p > 1e-14) | (np.abs(dp) > 1e-14)
        p = np.clip(p[keep], 1e-14, None)
        return float((dp[keep] ** 2 / p).sum())

    value = fi_at(h)
    meta = {"fd_step": h}
    if config.richardson:
        finer = fi_at(h / 2.0)
        extrap = (4.0 * finer - value) / 3.0
        meta["richardson_disagreement"] = abs(finer - value) / max(abs(extrap), 1e-300)
        meta["noise_dominated"] = meta["richardson_disagreement"] > 0.01
        value = extrap
    return value, meta


# ---------------------------------------------------------------------------
# analytic small-alpha predictions


def parity_cfi_prediction_from_moments(M: int, nb: float, nb2: float, alpha: float) -> float:
    """Joint-parity FI of the phase-averaged channel for definite-parity probes:

    4M [ 1 + 2<n_B> - 2 M alpha^2 (1 - 2<n_B>^2 + <n_B> + 3<n_B^2>) ].
    """
    return 4.0 * M * (
        1.0 + 2.0 * nb - 2.0 * M * alpha**2 * (1.0 - 2.0 * nb**2 + nb + 3.0 * nb2)
    )


def parity_cfi_prediction(state: PureState, alpha: float) -> float:
    if parity_of_state(state) is None:
        raise ValueError("parity prediction requires a definite-parity probe")
    summary = coherence_summary(state)
    return parity_cfi_prediction_from_moments(
        state.space.mode_count,
        summary.common_mode_occupation,
        summary.common_mode_n2,
        alpha,
    )


def decoherence_cfi_prediction(
    state: PureState,
    noise: NoiseSpec,
    alpha: float,
    ratio_threshold: float = FIRST_ORDER_RATIO_THRESHOLD,
) -> float:
    """Small-alpha parity-FI predictions under decoherence (moments of the noiseless probe)."""
    summary = coherence_summary(state)
    f_self, f_cross = self_cross_split(summary)
    if noise.kind == "dephasing":
        return f_self + math.exp(-noise.gamma_t) * f_cross
    if noise.kind == "jitter":
        return f_self + math.exp(-noise.sigma**2) * f_cross
    if noise.kind == "loss":
        ratio = noise.kappa_t / alpha**2
        if ratio > ratio_threshold:
            raise ValidityError(f"loss ratio kappa_t/alpha^2 = {ratio:g} beyond threshold")
        occ_sum = float(summary.occupations.sum())
        return 4.0 * float(np.sum(summary.occupations + 1.0)) + 4.0 * (1.0 - ratio) * occ_sum + f_cross
    if noise.kind == "heating":
        ratio = noise.kappa_t * noise.nbar / alpha**2
        if ratio > ratio_threshold:
            raise ValidityError(f"heating ratio kappa_t*nbar/alpha^2 = {ratio:g} beyond threshold")
        return (1.0 - ratio) * f_self + f_cross
    raise ValueError(f"unknown noise kind {noise.kind!r}")


# ---------------------------------------------------------------------------
# Gaussian homodyne closed forms


def homodyne_fi_gaussian(scheme: str, r: float, alpha: float = 0.0) -> float:
    """Homodyne FI for the two-mode Gaussian schemes.

    two_copies / interferometric: 8 e^{2r} (independent of alpha).
    interferometric_mixed: the phase-mixed interferometric scheme, where only
    the quadrature variance carries the signal: F = 2 alpha^2 / (e^{-2r}/2 + alpha^2)^2.
    """
    if r < 0:
        raise ValueError("r must be >= 0")
    if scheme in ("two_copies", "interferometric"):
        return 8.0 * math.exp(2.0 * r)
    if scheme == "interferometric_mixed":
        sigma = 0.5 * math.exp(-2.0 * r) + alpha**2
        return 2.0 * alpha**2 / sigma**2
    raise ValueError(f"unknown homodyne scheme {scheme!r}")


def homodyne_mixed_asymptote(nbar: float, alpha: float) -> float:
    """Large-nbar small-alpha asymptote of the phase-mixed scheme: 128 alpha^2 nbar^2."""
    return 128.0 * alpha**2 * nbar**2


# ---------------------------------------------------------------------------
# analytic two-mode parity FI from averaged characteristic functions

_TWO_MODE_FAMILIES = ("fock", "squeezed_vacuum", "cat")


def _cat_gamma2(nbar: float) -> float:
    from scipy.optimize import brentq

    if nbar == 0:
        return 0.0
    return brentq(lambda g2: g2 * math.tanh(g2) - nbar, 1e-12, nbar + 2.0)


def averaged_char_1(family: str, nbar: float, beta: float) -> float:
    """Phase-averaged characteristic function chi1_bar(beta) of one probe copy."""
    if family == "fock":
        n = int(round(nbar))
        return math.exp(-0.5 * beta**2) * laguerre(n, 0, beta**2)
    if family == "squeezed_vacuum":
        return math.exp(-0.5 * beta**2 * (2.0 * nbar + 1.0)) * bessel_i0(
            beta**2 * math.sqrt(nbar * (nbar + 1.0))
        )
    if family == "cat":
        g2 = _cat_gamma2(nbar)
        g = math.sqrt(g2)
        e = math.exp(-2.0 * g2)
        return (
            math.exp(-0.5 * beta**2)
            / (1.0 + e)
            * (bessel_j0(2.0 * g * beta) + e * bessel_i0(2.0 * g * beta))
        )
    raise ValueError(f"unsupported family {family!r}")


def averaged_char_2(family: str, nbar: float, beta: float) -> float:
    """Phase average of the squared characteristic function, chi2_bar(beta)."""
    if family == "fock":
        n = int(round(nbar))
        return math.exp(-(beta**2)) * laguerre(n, 0, beta**2) ** 2
    if family == "squeezed_vacuum":
        return math.exp(-(beta**2) * (2.0 * nbar + 1.0)) * bessel_i0(
            2.0 * beta**2 * math.sqrt(nbar * (nbar + 1.0))
        )
    if family == "cat":
        # Direct phi-average of chi^2; the cross term cos(x sin phi) cosh(x cos phi)
        # averages to exactly 1.
        g2 = _cat_gamma2(nbar)
        g = math.sqrt(g2)
        e = math.exp(-2.0 * g2)
        x = 4.0 * g * beta
        return (
            math.exp(-(beta**2))
            / (1.0 + e) ** 2
            * (
                0.5 * (1.0 + bessel_j0(x))
                + 2.0 * e
                + 0.5 * e**2 * (1.0 + bessel_i0(x))
            )
        )
    raise ValueError(f"unsupported family {family!r}")


def fixed_phase_char(family: str, nbar: float, beta: float, phi: float = math.pi / 2) -> float:
    """chi(beta, phi) at fixed phase (phi = pi/2 is optimal for squeezed vacuum)."""
    if family == "fock":
        n = int(round(nbar))
        return math.exp(-0.5 * beta**2) * laguerre(n, 0, beta**2)
    if family == "squeezed_vacuum":
        r = math.asinh(math.sqrt(nbar))
        v = math.exp(-2.0 * r) * math.cos(phi) ** 2 + math.exp(2.0 * r) * math.sin(phi) ** 2
        return math.exp(-0.5 * beta**2 * v)
    if family == "cat":
        g2 = _cat_gamma2(nbar)
        g = math.sqrt(g2)
        e = math.exp(-2.0 * g2)
        return (
            math.exp(-0.5 * beta**2)
            / (1.0 + e)
            * (math.cos(2.0 * g * beta * math.sin(phi)) + e * math.cosh(2.0 * g * beta * math.cos(phi)))
        )
    raise ValueError(f"unsupported family {family!r}")


def _fd6(f: Callable[[float], float], x: float, h: float = 2e-3) -> float:
    """6th-order central difference."""
    return (
        45.0 * (f(x + h) - f(x - h))
        - 9.0 * (f(x + 2 * h) - f(x - 2 * h))
        + (f(x + 3 * h) - f(x - 3 * h))
    ) / (60.0 * h)


def _char1_dbeta(family: str, nbar: float, beta: float) -> float:
    """d chi1_bar / d beta; analytic for Fock, 6th-order FD otherwise."""
    if family == "fock":
        n = int(round(nbar))
        # d/dx L_n(x) = -L_{n-1}^1(x)
        ln = laguerre(n, 0, beta**2)
        dln = -laguerre(n - 1, 1, beta**2) if n >= 1 else 0.0
        return math.exp(-0.5 * beta**2) * (-beta * ln + 2.0 * beta * dln)
    return _fd6(lambda b: averaged_char_1(family, nbar, b), beta)


def _binary_fi(mean: float, dmean_dalpha: float) -> float:
    denom = 1.0 - mean**2
    if denom <= 0:
        return float("inf") if dmean_dalpha != 0 else 0.0
    return dmean_dalpha**2 / denom


def analytic_two_mode_parity_fi(
    family: str,
    nbar: float,
    alpha: float,
    strategy: str,
    phase_mixed: bool = True,
) -> float:
    """Closed-form joint-parity FI for the M = 2 schemes.

    delocalized: probe split on a balanced beam splitter, <Pi> = s chi1_bar(2 sqrt(2) alpha);
    single_mode: two independent local parity readouts, F = 2 F_1 with
    <pi>_1 = s chi1_bar(2 alpha); separable: joint parity on two copies,
    <Pi> = chi2_bar(2 alpha) (the shared random phase correlates the copies).
    With phase_mixed=False the fixed-phase characteristic function at the
    optimal phase (pi/2) replaces the phase average.
    """
    if family not in _TWO_MODE_FAMILIES:
        raise ValueError(f"unsupported family {family!r}")
    if nbar < 0 or alpha < 0:
        raise ValueError("nbar and alpha must be >= 0")

    if phase_mixed:
        char1 = lambda b: averaged_char_1(family, nbar, b)
        dchar1 = lambda b: _char1_dbeta(family, nbar, b)
        char2 = lambda b: averaged_char_2(family, nbar, b)
    else:
        char1 = lambda b: fixed_phase_char(family, nbar, b)
        dchar1 = lambda b: _fd6(char1, b)
        char2 = lambda b: char1(b) ** 2

    if strategy == "delocalized":
        beta = 2.0 * math.sqrt(2.0) * alpha
        mean = char1(beta)
        dmean = dchar1(beta) * 2.0 * math.sqrt(2.0)
        return _binary_fi(mean, dmean)
    if strategy == "single_mode":
        beta = 2.0 * alpha
        mean = char1(beta)
        dmean = dchar1(beta) * 2.0
        return 2.0 * _binary_fi(mean, dmean)
    if strategy == "separable":
        beta = 2.0 * alpha
        mean = char2(beta)
        dmean = _fd6(char2, beta) * 2.0
        return _binary_fi(mean, dmean)
    raise ValueError(f"unknown strategy {strategy!r}")
