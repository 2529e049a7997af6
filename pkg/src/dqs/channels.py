"""Phase-randomized displacement channel and the decoherence channels.

The displacement channel averages D(alpha, phi) rho D(alpha, phi)^dag over a
uniform phase phi.  On the truncated space the integrand is a trigonometric
polynomial in phi, so the equidistant trapezoid rule is exact once the node
count exceeds the maximal Fock-index harmonic; the default node count includes
margin for that.  Loss and heating are implemented at first order in time only
(matching the regime of the analytic predictions); dephasing is exact.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidityError
from .fock_core import (
    DEFAULT_LEAK_TOL,
    DensityOp,
    ModeSpace,
    displacement_matrix,
    embed_operator,
    ladder,
)

#: Default threshold on kappa_t (loss) / kbar_t (heating) for the first-order channels.
FIRST_ORDER_THRESHOLD = 0.05


@dataclass(frozen=True)
class ChannelParams:
    """Parameters of the (jitter-)phase-averaged displacement channel."""

    alpha: float
    phase_nodes: int | None = None  # default: exactness threshold with margin
    jitter_sigma: float = 0.0
    jitter_nodes: int = 9
    leak_tol: float = DEFAULT_LEAK_TOL

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.phase_nodes is not None and self.phase_nodes < 4:
            raise ValueError("phase_nodes must be >= 4")
        if self.jitter_sigma < 0:
            raise ValueError("jitter_sigma must be >= 0")
        if self.jitter_sigma >= math.pi / 2:
            raise ValueError("jitter_sigma outside documented validity range (< pi/2)")


@dataclass(frozen=True)
class NoiseSpec:
    """Decoherence channel descriptor."""

    kind: str  # loss | heating | dephasing | jitter
    kappa_t: float = 0.0
    nbar: float = 0.0
    gamma_t: float = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("loss", "heating", "dephasing", "jitter"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        for name in ("kappa_t", "nbar", "gamma_t", "sigma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


def default_phase_nodes(space: ModeSpace) -> int:
    """2 * sum(d_i) + 1: trapezoid-exact for the truncated trig polynomial."""
    return 2 * sum(space.cutoffs) + 1


def exactness_threshold(space: ModeSpace) -> int:
    """Minimal node count for exactness: harmonics reach 2 * sum(d_i - 1)."""
    return 2 * sum(d - 1 for d in space.cutoffs) + 1


def _joint_displacement(space: ModeSpace, alpha: float, leak_tol: float) -> np.ndarray:
    """Tensor product of per-mode D(alpha) at phase 0."""
    U = np.array([[1.0 + 0j]])
    for d in space.cutoffs:
        U = np.kron(U, displacement_matrix(alpha, d, leak_tol=leak_tol))
    return U


def _phase_average(rho: np.ndarray, U0: np.ndarray, total_occ: np.ndarray, n_phi: int) -> np.ndarray:
    """(1/N) sum_k R(phi_k) U0 R(-phi_k) rho (...)^dag with R = diag(e^{i phi N})."""
    acc = np.zeros_like(rho)
    for k in range(n_phi):
        phi = 2.0 * math.pi * k / n_phi
        rot = np.exp(1j * phi * total_occ)
        U = (rot[:, None] * U0) * rot.conj()[None, :]
        acc += U @ rho @ U.conj().T
    return acc / n_phi


def phase_averaged_displacement(rho: DensityOp, params: ChannelParams) -> DensityOp:
    """rho_alpha = (1/N_phi) sum_k D(alpha, phi_k) rho D(alpha, phi_k)^dag."""
    space = rho.space
    n_phi = params.phase_nodes or default_phase_nodes(space)
    U0 = _joint_displacement(space, params.alpha, params.leak_tol)
    total_occ = space.occupations().sum(axis=1).astype(float)
    out = _phase_average(rho.matrix, U0, total_occ, n_phi)
    meta = dict(rho.meta)
    meta["n_phi"] = n_phi
    if n_phi < exactness_threshold(space):
        meta["phase_average_inexact"] = True
    return DensityOp(space, out, trace_deficit=rho.trace_deficit, meta=meta)


def phase_jitter_averaged_displacement(rho: DensityOp, params: ChannelParams) -> DensityOp:
    """Displacement channel with independent Gaussian phase jitter per mode.

    Gauss-Hermite quadrature over the per-mode offsets delta_phi_i, nested with
    the uniform global phase average.
    """
    space = rho.space
    M = space.mode_count
    if M > 3:
        raise ValueError("dense jitter path supports M <= 3")
    if params.jitter_nodes < 5:
        raise ValueError("jitter_nodes must be >= 5")
    if params.jitter_sigma == 0.0:
        return phase_averaged_displacement(rho, params)
    n_phi = params.phase_nodes or default_phase_nodes(space)
    total_occ = space.occupations().sum(axis=1).astype(float)

    nodes, weights = np.polynomial.hermite.hermgauss(params.jitter_nodes)
    offsets = math.sqrt(2.0) * params.jitter_sigma * nodes
    weights = weights / math.sqrt(math.pi)

    base = [displacement_matrix(params.alpha, d, leak_tol=params.leak_tol) for d in space.cutoffs]
    number = [np.arange(d, dtype=float) for d in space.cutoffs]

    acc = np.zeros_like(rho.matrix)
    for combo in np.ndindex(*([params.jitter_nodes] * M)):
        w = math.prod(weights[c] for c in combo)
        U0 = np.array([[1.0 + 0j]])
        for i, c in enumerate(combo):
            rot = np.exp(1j * offsets[c] * number[i])
            U0 = np.kron(U0, (rot[:, None] * base[i]) * rot.conj()[None, :])
        acc += w * _phase_average(rho.matrix, U0, total_occ, n_phi)
    # Gauss-Hermite weights sum to 1 after the 1/sqrt(pi) normalization.
    meta = dict(rho.meta)
    meta["n_phi"] = n_phi
    meta["jitter_nodes"] = params.jitter_nodes
    return DensityOp(space, acc, trace_deficit=rho.trace_deficit, meta=meta)


def apply_dephasing(rho: DensityOp, gamma_t: float) -> DensityOp:
    """Exact dephasing: each element scaled by prod_i e^{-gamma_t (n_i - m_i)^2 / 2}."""
    if gamma_t < 0:
        raise ValueError("gamma_t must be >= 0")
    occ = rho.space.occupations().astype(float)
    delta2 = ((occ[:, None, :] - occ[None, :, :]) ** 2).sum(axis=2)
    out = rho.matrix * np.exp(-0.5 * gamma_t * delta2)
    meta = dict(rho.meta)
    meta["gamma_t"] = gamma_t + rho.meta.get("gamma_t", 0.0)
    return DensityOp(rho.space, out, trace_deficit=rho.trace_deficit, meta=meta)


def _renormalized(space: ModeSpace, mat: np.ndarray, template: DensityOp, extra_meta: dict) -> DensityOp:
    target = 1.0 - template.trace_deficit
    tr = float(np.trace(mat).real)
    correction = tr - target
    mat = mat * (target / tr)
    meta = dict(template.meta)
    meta.update(extra_meta)
    meta["trace_correction"] = correction
    return DensityOp(space, mat, trace_deficit=template.trace_deficit, meta=meta)


def apply_loss_first_order(
    rho: DensityOp, kappa_t: float, threshold: float = FIRST_ORDER_THRESHOLD
) -> DensityOp:
    """First-order loss: rho - kappa_t sum_i [ (rho n_i + n_i rho)/2 - a_i rho a_i^dag ]."""
    if kappa_t < 0:
        raise ValueError("kappa_t must be >= 0")
    if kappa_t > threshold:
        raise ValidityError(
            f"kappa_t={kappa_t:g} beyond first-order validity threshold {threshold:g}"
        )
    space = rho.space
    out = np.array(rho.matrix)
    for i in range(space.mode_count):
        a = embed_operator(ladder(space.cutoffs[i])[0], i, space)
        n = a.conj().T @ a
        out -= kappa_t * (0.5 * (rho.matrix @ n + n @ rho.matrix) - a @ rho.matrix @ a.conj().T)
    return _renormalized(space, out, rho, {"loss_kappa_t": kappa_t})


def apply_heating_first_order(
    rho: DensityOp, kbar_t: float, threshold: float = FIRST_ORDER_THRESHOLD
) -> DensityOp:
    """First-order heating (large thermal occupation limit, rate kbar_t = kappa_t * nbar_th):

    rho (1 - M kbar_t) - kbar_t sum_i [ (rho n_i + n_i rho) - (a_i^dag rho a_i + a_i rho a_i^dag) ].
    """
    if kbar_t < 0:
        raise ValueError("kbar_t must be >= 0")
    if kbar_t > threshold:
        raise ValidityError(
            f"kbar_t={kbar_t:g} beyond first-order validity threshold {threshold:g}"
        )
    space = rho.space
    M = space.mode_count
    out = (1.0 - M * kbar_t) * rho.matrix
    for i in range(space.mode_count):
        a = embed_operator(ladder(space.cutoffs[i])[0], i, space)
        adag = a.conj().T
        n = adag @ a
        out -= kbar_t * (
            rho.matrix @ n + n @ rho.matrix - adag @ rho.matrix @ a - a @ rho.matrix @ adag
        )
    return _renormalized(space, out, rho, {"heating_kbar_t": kbar_t})


def apply_noise(rho: DensityOp, noise: NoiseSpec) -> DensityOp:
    """Dispatch the Lindblad-type probe channels (jitter is handled in the displacement)."""
    if noise.kind == "loss":
        return apply_loss_first_order(rho, noise.kappa_t)
    if noise.kind == "heating":
        return apply_heating_first_order(rho, noise.kappa_t * noise.nbar)
    if noise.kind == "dephasing":
        return apply_dephasing(rho, noise.gamma_t)
    raise ValueError("jitter noise is applied inside the displacement channel")
