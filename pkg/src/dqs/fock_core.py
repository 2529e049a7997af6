"""Truncated Fock-space states, operators, constructors, and passive optics.

Mode ordering is fixed row-major: mode 0 is the slowest index, so the basis
state |n_0, n_1, ...> sits at flat index n_0*d_1*...*d_{M-1} + ... .  All
operator embeddings and POVMs use this convention.
"""

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .errors import TruncationError
from .special_fn import log_factorial

#: Default tolerance on state-construction truncation leakage.  Fisher
#: quantities are second-derivative-like and amplify truncation error.
DEFAULT_LEAK_TOL = 1e-8


@dataclass(frozen=True)
class ModeSpace:
    """M bosonic modes with per-mode Fock cutoffs d_i (basis |0 .. d_i - 1>)."""

    cutoffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.cutoffs) < 1:
            raise ValueError("ModeSpace needs at least one mode")
        if any(d < 2 for d in self.cutoffs):
            raise ValueError(f"every cutoff must be >= 2, got {self.cutoffs}")

    @property
    def mode_count(self) -> int:
        return len(self.cutoffs)

    @property
    def dim(self) -> int:
        return math.prod(self.cutoffs)

    def occupations(self) -> np.ndarray:
        """(dim, M) array of occupation numbers per flat basis index."""
        return _occupation_table(self.cutoffs)


@lru_cache(maxsize=None)
def _occupation_table(cutoffs: tuple[int, ...]) -> np.ndarray:
    dim = math.prod(cutoffs)
    occ = np.array(np.unravel_index(np.arange(dim), cutoffs)).T
    occ.setflags(write=False)
    return occ


@dataclass(frozen=True)
class PureState:
    """Normalized amplitude vector on the truncated product Fock basis."""

    space: ModeSpace
    amplitudes: np.ndarray
    leakage: float = 0.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        if amps.shape != (self.space.dim,):
            raise ValueError(
                f"amplitude vector length {amps.shape} does not match space dim "
                f"{self.space.dim}"
            )
        if self.leakage < 0:
            raise ValueError("leakage must be >= 0")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > 1e-12:
            raise ValueError(f"state not normalized: ||psi||^2 = {norm2!r}")

    def to_density(self) -> "DensityOp":
        rho = np.outer(self.amplitudes, self.amplitudes.conj())
        return DensityOp(self.space, rho, trace_deficit=0.0)


@dataclass(frozen=True)
class DensityOp:
    """Hermitian PSD matrix on the truncated product Fock basis."""

    space: ModeSpace
    matrix: np.ndarray
    trace_deficit: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        dim = self.space.dim
        if mat.shape != (dim, dim):
            raise ValueError(f"matrix shape {mat.shape} does not match dim {dim}")

    def validate(self, psd_tol: float = 1e-10) -> None:
        mat = self.matrix
        herm = np.max(np.abs(mat - mat.conj().T))
        if herm > 1e-12 * max(1.0, float(np.max(np.abs(mat)))):
            raise ValueError(f"density matrix not Hermitian: defect {herm:g}")
        tr = float(np.trace(mat).real)
        if abs(tr + self.trace_deficit - 1.0) > 1e-10:
            raise ValueError(
                f"trace accounting violated: tr={tr!r}, deficit={self.trace_deficit!r}"
            )
        lo = float(np.linalg.eigvalsh(mat)[0])
        if lo < -psd_tol:
            raise ValueError(f"density matrix not PSD: min eigenvalue {lo:g}")


@dataclass(frozen=True)
class StateSpec:
    """Single-mode state family descriptor."""

    family: str  # fock | squeezed_vacuum | coherent | cat
    n: int = 0
    r: float = 0.0
    amplitude: complex = 0.0
    gamma: float = 0.0
    sign: int = +1

    _FAMILIES = ("fock", "squeezed_vacuum", "coherent", "cat")

    def __post_init__(self):
        if self.family not in self._FAMILIES:
            raise ValueError(f"unknown state family {self.family!r}")
        if self.family == "fock" and self.n < 0:
            raise ValueError("fock occupation must be >= 0")
        if self.family == "squeezed_vacuum" and self.r < 0:
            raise ValueError("squeezing parameter r must be >= 0")
        if self.family == "cat" and self.sign not in (+1, -1):
            raise ValueError("cat sign must be +1 or -1")

    @classmethod
    def fock(cls, n: int) -> "StateSpec":
        return cls("fock", n=n)

    @classmethod
    def squeezed_vacuum(cls, r: float) -> "StateSpec":
        return cls("squeezed_vacuum", r=r)

    @classmethod
    def squeezed_vacuum_nbar(cls, nbar: float) -> "StateSpec":
        return cls("squeezed_vacuum", r=math.asinh(math.sqrt(nbar)))

    @classmethod
    def coherent(cls, amplitude: complex) -> "StateSpec":
        return cls("coherent", amplitude=amplitude)

    @classmethod
    def cat(cls, gamma: float, sign: int = +1) -> "StateSpec":
        return cls("cat", gamma=gamma, sign=sign)

    @classmethod
    def cat_nbar(cls, nbar: float, sign: int = +1) -> "StateSpec":
        """Even/odd cat with mean occupation nbar (solves g^2 tanh(g^2) = nbar)."""
        if nbar < 0:
            raise ValueError("nbar must be >= 0")
        if nbar == 0:
            return cls("cat", gamma=0.0, sign=sign)
        from scipy.optimize import brentq

        if sign == +1:
            f = lambda g2: g2 * math.tanh(g2) - nbar
        else:
            f = lambda g2: g2 / math.tanh(g2) - nbar if g2 > 0 else -nbar
        g2 = brentq(f, 1e-12, nbar + 2.0)
        return cls("cat", gamma=math.sqrt(g2), sign=sign)

    @property
    def mean_occupation(self) -> float:
        """Analytic mean excitation number of the (untruncated) state."""
        if self.family == "fock":
            return float(self.n)
        if self.family == "squeezed_vacuum":
            return math.sinh(self.r) ** 2
        if self.family == "coherent":
            return abs(self.amplitude) ** 2
        g2 = self.gamma**2
        if g2 == 0.0:
            return 0.0
        if self.sign == +1:
            return g2 * math.tanh(g2)
        return g2 / math.tanh(g2)


@dataclass(frozen=True)
class CoherenceSummary:
    """Coherence matrix C_ij = <a_i^dag a_j> and the derived bright-mode moments."""

    occupations: np.ndarray  # <n_i> per mode
    coherence: np.ndarray  # C_ij
    common_mode_occupation: float  # <n_B>, b = sum_j a_j / sqrt(M)
    common_mode_n2: float  # <n_B^2>
    total: float  # <N> = tr C


def ladder(cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    """Annihilation/creation pair on the truncated basis: a|n> = sqrt(n)|n-1>."""
    if cutoff < 2:
        raise ValueError(f"cutoff must be >= 2, got {cutoff}")
    a = np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), k=1).astype(complex)
    return a, a.conj().T


def default_pad(amplitude: complex, cutoff: int) -> int:
    """Padding that empirically bounds displacement leakage below ~1e-10 for |a| <= 0.5."""
    return max(10, math.ceil(6 * abs(amplitude) * math.sqrt(cutoff)))


def displacement_matrix(
    amplitude: complex,
    cutoff: int,
    pad: int | None = None,
    leak_tol: float = DEFAULT_LEAK_TOL,
) -> np.ndarray:
    """D(a) = exp(a adag - a* a) on an enlarged space, cropped to `cutoff`.

    The topmost retained levels inevitably leak past the cutoff under any
    nonzero displacement, so the top half of the retained basis is treated as
    internal margin: the reported leakage is the worst per-column norm deficit
    over the lower half, and callers keep their state support there.  Raises
    TruncationError when that leakage exceeds `leak_tol`.
    """
    if cutoff < 2:
        raise ValueError(f"cutoff must be >= 2, got {cutoff}")
    if pad is None:
        pad = default_pad(amplitude, cutoff)
    big = cutoff + pad
    a, adag = ladder(big)
    full = expm(amplitude * adag - np.conj(amplitude) * a)
    crop = np.ascontiguousarray(full[:cutoff, :cutoff])
    guard = max(1, cutoff // 2)
    leakage = float(np.max(1.0 - np.sum(np.abs(full[:cutoff, :guard]) ** 2, axis=0)))
    if leakage > leak_tol:
        raise TruncationError(
            f"displacement leakage {leakage:g} above tolerance {leak_tol:g} "
            f"(|amplitude|={abs(amplitude):g}, cutoff={cutoff})",
            leakage=leakage,
        )
    return crop


def displacement_vacuum_overlap(amplitude: complex, m: int) -> complex:
    """Analytic <m|D(a)|0> = a^m e^{-|a|^2/2} / sqrt(m!) (test oracle)."""
    return (
        amplitude**m
        * math.exp(-0.5 * abs(amplitude) ** 2)
        * math.exp(-0.5 * log_factorial(m))
    )


def _single_mode_amplitudes(spec: StateSpec, cutoff: int) -> np.ndarray:
    c = np.zeros(cutoff, dtype=complex)
    if spec.family == "fock":
        if spec.n >= cutoff:
            raise TruncationError(
                f"fock({spec.n}) does not fit below cutoff {cutoff}", leakage=1.0
            )
        c[spec.n] = 1.0
    elif spec.family == "squeezed_vacuum":
        # |r> = (cosh r)^{-1/2} sum_k (-tanh r)^k sqrt((2k)!)/(2^k k!) |2k>
        # (x-quadrature squeezed: Var(x) = e^{-2r}/2).
        t = math.tanh(spec.r)
        pref = 1.0 / math.sqrt(math.cosh(spec.r))
        for k in range(0, (cutoff + 1) // 2):
            logmag = 0.5 * log_factorial(2 * k) - log_factorial(k) - k * math.log(2.0)
            c[2 * k] = pref * (-t) ** k * math.exp(logmag)
    elif spec.family == "coherent":
        a0 = spec.amplitude
        for n in range(cutoff):
            c[n] = a0**n * math.exp(-0.5 * abs(a0) ** 2 - 0.5 * log_factorial(n))
    else:  # cat: (|g> + sign|-g>) / sqrt(2(1 + sign e^{-2 g^2}))
        g = spec.gamma
        norm = math.sqrt(2.0 * (1.0 + spec.sign * math.exp(-2.0 * g**2)))
        for n in range(cutoff):
            coh = g**n * math.exp(-0.5 * g**2 - 0.5 * log_factorial(n))
            c[n] = (coh + spec.sign * (-1) ** n * coh) / norm
    return c


def make_single_mode_state(
    spec: StateSpec, cutoff: int, leak_tol: float = DEFAULT_LEAK_TOL
) -> PureState:
    """Truncate the analytic expansion at `cutoff`, renormalize, record leakage."""
    c = _single_mode_amplitudes(spec, cutoff)
    norm2 = float(np.vdot(c, c).real)
    leakage = max(0.0, 1.0 - norm2)
    if leakage > leak_tol:
        raise TruncationError(
            f"state leakage {leakage:g} above tolerance {leak_tol:g} for "
            f"{spec.family} at cutoff {cutoff}",
            leakage=leakage,
        )
    return PureState(ModeSpace((cutoff,)), c / math.sqrt(norm2), leakage=leakage)


def product_state(parts: list[PureState]) -> PureState:
    """Kronecker product of single-system states, mode 0 slowest."""
    if not parts:
        raise ValueError("product_state needs at least one factor")
    amps = parts[0].amplitudes
    cutoffs: tuple[int, ...] = parts[0].space.cutoffs
    leakage = parts[0].leakage
    for p in parts[1:]:
        amps = np.kron(amps, p.amplitudes)
        cutoffs = cutoffs + p.space.cutoffs
        leakage = 1.0 - (1.0 - leakage) * (1.0 - p.leakage)
    return PureState(ModeSpace(cutoffs), amps, leakage=leakage)


def embed_operator(op: np.ndarray, mode_index: int, space: ModeSpace) -> np.ndarray:
    """Embed a single-mode operator acting on `mode_index` (0-based) into `space`."""
    if not 0 <= mode_index < space.mode_count:
        raise ValueError(f"mode_index {mode_index} out of range")
    d = space.cutoffs[mode_index]
    if op.shape != (d, d):
        raise ValueError(f"operator shape {op.shape} does not match cutoff {d}")
    left = math.prod(space.cutoffs[:mode_index])
    right = math.prod(space.cutoffs[mode_index + 1 :])
    return np.kron(np.kron(np.eye(left), op), np.eye(right))


def beam_splitter_2mode(state: PureState, theta: float, phase: float = 0.0) -> PureState:
    """Apply exp(theta (e^{i phase} a1dag a2 - e^{-i phase} a1 a2dag)).

    The generator is block diagonal in total excitation number; each block is
    exponentiated exactly, so total number is conserved exactly.  Sign
    convention: |1,0> at theta maps to cos(theta)|1,0> - sin(theta)|0,1>
    (phase = 0); delocalizing a mode-0 state into the bright mode
    b = (a1 + a2)/sqrt(2) therefore uses theta = -pi/4.
    """
    if state.space.mode_count != 2:
        raise ValueError("beam_splitter_2mode requires exactly 2 modes")
    d1, d2 = state.space.cutoffs
    occ = state.space.occupations()
    total = occ[:, 0] + occ[:, 1]
    out = np.array(state.amplitudes, dtype=complex)
    eip = complex(math.cos(phase), math.sin(phase))
    for ntot in range(int(total.max()) + 1):
        idx = np.nonzero(total == ntot)[0]
        if len(idx) < 2:
            continue
        sub = occ[idx]
        gen = np.zeros((len(idx), len(idx)), dtype=complex)
        pos = {(int(n1), int(n2)): j for j, (n1, n2) in enumerate(sub)}
        for j, (n1, n2) in enumerate(sub):
            # a1dag a2 |n1, n2> = sqrt((n1+1) n2) |n1+1, n2-1>
            if n2 >= 1 and (n1 + 1, n2 - 1) in pos:
                gen[pos[(n1 + 1, n2 - 1)], j] += eip * math.sqrt((n1 + 1) * n2)
            # a1 a2dag |n1, n2> = sqrt(n1 (n2+1)) |n1-1, n2+1>
            if n1 >= 1 and (n1 - 1, n2 + 1) in pos:
                gen[pos[(n1 - 1, n2 + 1)], j] -= np.conj(eip) * math.sqrt(n1 * (n2 + 1))
        out[idx] = expm(theta * gen) @ out[idx]
    return PureState(state.space, out, leakage=state.leakage)


@dataclass(frozen=True)
class Povm:
    """Labeled POVM whose elements are all diagonal in the product Fock basis."""

    labels: tuple[str, ...]
    diagonals: np.ndarray  # (n_outcomes, dim), rows sum columnwise to 1

    def __post_init__(self):
        diags = np.asarray(self.diagonals, dtype=float)
        diags.setflags(write=False)
        object.__setattr__(self, "diagonals", diags)
        if diags.shape[0] != len(self.labels):
            raise ValueError("label/diagonal count mismatch")
        col = diags.sum(axis=0)
        if np.max(np.abs(col - 1.0)) > 1e-14:
            raise ValueError("POVM does not resolve identity")

    def probabilities(self, rho: DensityOp) -> np.ndarray:
        return self.diagonals @ np.diag(rho.matrix).real

    def matrices(self):
        for row in self.diagonals:
            yield np.diag(row.astype(complex))


def joint_parity_operator(space: ModeSpace) -> np.ndarray:
    """Pi = (-1)^{sum_i n_i} as a diagonal matrix."""
    total = space.occupations().sum(axis=1)
    return np.diag(((-1.0) ** total).astype(complex))


def joint_parity_povm(space: ModeSpace) -> Povm:
    total = space.occupations().sum(axis=1)
    even = (total % 2 == 0).astype(float)
    return Povm(("even", "odd"), np.vstack([even, 1.0 - even]))


def per_mode_parity_povm(space: ModeSpace) -> Povm:
    """2^M projectors onto per-mode parity patterns ('+' even, '-' odd)."""
    occ = space.occupations()
    M = space.mode_count
    labels = []
    rows = []
    for pattern in range(2**M):
        bits = [(pattern >> (M - 1 - i)) & 1 for i in range(M)]
        mask = np.ones(space.dim, dtype=float)
        for i, b in enumerate(bits):
            mask *= (occ[:, i] % 2 == b).astype(float)
        labels.append("".join("-" if b else "+" for b in bits))
        rows.append(mask)
    return Povm(tuple(labels), np.vstack(rows))


def excitation_povm(space: ModeSpace) -> Povm:
    """Rank-1 projectors onto every product Fock basis state."""
    occ = space.occupations()
    labels = tuple(",".join(str(int(n)) for n in row) for row in occ)
    return Povm(labels, np.eye(space.dim))


def parity_of_state(state: PureState, tol: float = 1e-12) -> int | None:
    """Return +1/-1 if the state has definite joint parity, else None."""
    total = state.space.occupations().sum(axis=1)
    w = np.abs(state.amplitudes) ** 2
    even = float(w[total % 2 == 0].sum())
    odd = float(w[total % 2 == 1].sum())
    if odd <= tol:
        return +1
    if even <= tol:
        return -1
    return None


def coherence_summary(state_or_rho: PureState | DensityOp) -> CoherenceSummary:
    """Coherence matrix C_ij = <a_i^dag a_j> plus bright-mode moments."""
    space = state_or_rho.space
    M = space.mode_count
    ops = [embed_operator(ladder(space.cutoffs[i])[0], i, space) for i in range(M)]
    C = np.zeros((M, M), dtype=complex)
    if isinstance(state_or_rho, PureState):
        psi = state_or_rho.amplitudes
        w = [op @ psi for op in ops]
        for i in range(M):
            for j in range(M):
                C[i, j] = np.vdot(w[i], w[j])
        B = sum(ops) / math.sqrt(M)
        nb_psi = B.conj().T @ (B @ psi)
        nb = float(np.vdot(psi, nb_psi).real)
        nb2 = float(np.vdot(nb_psi, nb_psi).real)
    else:
        rho = state_or_rho.matrix
        for i in range(M):
            for j in range(M):
                C[i, j] = np.trace(ops[i].conj().T @ ops[j] @ rho)
        B = sum(ops) / math.sqrt(M)
        NB = B.conj().T @ B
        nb = float(np.trace(NB @ rho).real)
        nb2 = float(np.trace(NB @ NB @ rho).real)
    occ = np.diag(C).real.copy()
    return CoherenceSummary(
        occupations=occ,
        coherence=C,
        common_mode_occupation=nb,
        common_mode_n2=nb2,
        total=float(occ.sum()),
    )
