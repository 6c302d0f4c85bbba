"""States and operators of a single optical mode in a truncated number basis.

Quadrature convention
---------------------
A mode amplitude is written ``alpha = a_plus + i*a_minus`` with real
quadratures ``a_plus`` (amplitude) and ``a_minus`` (phase).  The vacuum
Wigner function is ``(2/pi) exp(-2|alpha|^2)``, so each vacuum quadrature
has variance 1/4.  These are *Wigner units*; shot-noise-limit (SNL) units
rescale variances by exactly 4 (vacuum variance 1) and outcomes by 2.

The quadrature operators are ``x = (a + a^dag)/2`` and
``p = (a - a^dag)/(2i)``.  The squeezing operator is
``S(s) = exp[-(s/2)(a^2 - a^dag^2)]``; for ``s > 0`` it squeezes the phase
quadrature, ``V(a_minus) = exp(-2s)/4``, and anti-squeezes the amplitude
quadrature, ``V(a_plus) = exp(+2s)/4``.  The displacement operator is
``D(g) = exp[g a^dag - g* a]``.

All values here are immutable after construction and all operations are
pure functions, so everything is safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.sparse import coo_matrix, csr_matrix, identity as sparse_identity

from .errors import TruncationError

# Unit system: Wigner-unit vacuum quadrature variance is 1/4, SNL-unit
# vacuum variance is 1.  The conversion factor is exactly 4 for variances
# and 2 for quadrature values.
WIGNER_VACUUM_VAR = 0.25
SNL_VACUUM_VAR = 1.0
VAR_SNL_PER_WIGNER = 4.0
X_SNL_PER_WIGNER = 2.0

#: Largest tail mass a preparer may silently discard.
TAIL_TOLERANCE = 1e-8

#: Extra Fock levels used while exponentiating squeeze/displace generators.
OPERATOR_BUFFER = 20


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class FockVector:
    """Pure state of one mode: coefficients ``<n|psi>`` for n = 0..dim-1.

    The squared norm equals ``1 - tail_mass`` where ``tail_mass`` is the
    population the preparer discarded above the truncation.
    """

    amplitudes: np.ndarray
    dim: int

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.dim,):
            raise ValueError(f"expected {self.dim} amplitudes, got shape {amps.shape}")
        object.__setattr__(self, "amplitudes", _readonly(amps))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def tail_mass(self) -> float:
        """Population lost to truncation, 1 - ||psi||^2."""
        return max(0.0, 1.0 - self.norm**2)

    def density(self) -> "FockDensity":
        return FockDensity(np.outer(self.amplitudes, self.amplitudes.conj()), self.dim)


@dataclass(frozen=True)
class FockDensity:
    """Hermitian, positive-semidefinite density matrix of one mode.

    The trace is 1 - tail for normalized states but conditioning returns
    unnormalized instances, so the trace itself is not constrained here.
    """

    matrix: np.ndarray
    dim: int
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.shape != (self.dim, self.dim):
            raise ValueError(f"expected {self.dim}x{self.dim} matrix, got {mat.shape}")
        if self.validate:
            scale = max(float(np.abs(mat).max()), 1e-300)
            if np.abs(mat - mat.conj().T).max() > 1e-12 * max(scale, 1.0):
                raise ValueError("density matrix is not Hermitian within 1e-12")
            evals = np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))
            if evals.min() < -1e-10 * max(scale, 1.0):
                raise ValueError("density matrix has negative eigenvalues")
        object.__setattr__(self, "matrix", _readonly(mat))

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def normalized(self) -> "FockDensity":
        tr = self.trace
        if tr <= 0:
            raise ValueError("cannot normalize a density matrix with trace <= 0")
        return FockDensity(self.matrix / tr, self.dim, validate=False)

    def purity(self) -> float:
        return float(np.real(np.sum(self.matrix * self.matrix.conj().T)))


@dataclass(frozen=True)
class TwoModeDensity:
    """Joint density matrix over (transmitted, reflected) with row/column
    index ``i_t * dim + i_r``."""

    matrix: np.ndarray
    dim: int

    def __post_init__(self):
        d2 = self.dim * self.dim
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.shape != (d2, d2):
            raise ValueError(f"expected {d2}x{d2} matrix, got {mat.shape}")
        scale = max(float(np.abs(mat).max()), 1e-300)
        if np.abs(mat - mat.conj().T).max() > 1e-10 * max(scale, 1.0):
            raise ValueError("two-mode density matrix is not Hermitian")
        object.__setattr__(self, "matrix", _readonly(mat))

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def as_tensor(self) -> np.ndarray:
        """View as rho[i, m, j, n] with (i, j) transmitted, (m, n) reflected."""
        d = self.dim
        return self.matrix.reshape(d, d, d, d)

    def ptrace(self, keep: int) -> FockDensity:
        """Reduced state of one mode: keep=0 transmitted, keep=1 reflected."""
        rho4 = self.as_tensor()
        if keep == 0:
            red = np.einsum("imjm->ij", rho4)
        elif keep == 1:
            red = np.einsum("imin->mn", rho4)
        else:
            raise ValueError("keep must be 0 (transmitted) or 1 (reflected)")
        return FockDensity(red, self.dim, validate=False)


def annihilation(dim: int) -> np.ndarray:
    """Matrix of the annihilation operator, <n-1|a|n> = sqrt(n)."""
    return np.diag(np.sqrt(np.arange(1.0, dim)), k=1)


def quadrature_ops(dim: int):
    """Amplitude and phase quadrature matrices in Wigner units."""
    a = annihilation(dim)
    x = 0.5 * (a + a.T)
    p = (a - a.T) / 2j
    return x, p


def quadrature_moments(rho: FockDensity | np.ndarray):
    """Mean vector and 2x2 covariance of (x, p) in Wigner units."""
    mat = rho.matrix if isinstance(rho, FockDensity) else np.asarray(rho)
    dim = mat.shape[0]
    tr = np.real(np.trace(mat))
    x, p = quadrature_ops(dim)
    mean = np.array([np.real(np.trace(mat @ x)), np.real(np.trace(mat @ p))]) / tr
    xx = np.real(np.trace(mat @ x @ x)) / tr
    pp = np.real(np.trace(mat @ p @ p)) / tr
    xp = np.real(np.trace(mat @ (x @ p + p @ x))) / (2 * tr)
    cov = np.array(
        [
            [xx - mean[0] ** 2, xp - mean[0] * mean[1]],
            [xp - mean[0] * mean[1], pp - mean[1] ** 2],
        ]
    )
    return mean, cov


# ---------------------------------------------------------------------------
# State preparers
# ---------------------------------------------------------------------------


def fock_state(n: int, dim: int) -> FockVector:
    """Number state |n>.

    Parameters
    ----------
    n : int
        Photon number, 0 <= n < dim.
    dim : int
        Truncation dimension.
    """
    if not 0 <= n < dim:
        raise TruncationError(
            f"fock_state(n={n}) does not fit in dim={dim}", suggested_dim=n + 1
        )
    amps = np.zeros(dim, dtype=complex)
    amps[n] = 1.0
    return FockVector(amps, dim)


def _coherent_amplitudes(gamma: complex, dim: int) -> np.ndarray:
    amps = np.zeros(dim, dtype=complex)
    amps[0] = np.exp(-0.5 * abs(gamma) ** 2)
    for k in range(1, dim):
        amps[k] = amps[k - 1] * gamma / np.sqrt(k)
    return amps


def _min_dim_for_coherent(gamma: complex, tol: float) -> int:
    mean = abs(gamma) ** 2
    # Poisson tail: extend until the retained mass is within tol of 1.
    term = np.exp(-mean)
    cum = term
    k = 0
    while 1.0 - cum > tol and k < 100_000:
        k += 1
        term *= mean / k
        cum += term
    return k + 1


def coherent_state(gamma: complex, dim: int) -> FockVector:
    """Coherent state |gamma> with amplitudes e^{-|g|^2/2} g^n / sqrt(n!).

    Raises
    ------
    TruncationError
        If the discarded tail mass exceeds the tolerance; the error names
        the smallest adequate dimension.
    """
    amps = _coherent_amplitudes(gamma, dim)
    tail = 1.0 - float(np.vdot(amps, amps).real)
    if tail > TAIL_TOLERANCE:
        need = _min_dim_for_coherent(gamma, TAIL_TOLERANCE)
        raise TruncationError(
            f"coherent_state(|gamma|={abs(gamma):.4g}) tail mass {tail:.3e} exceeds "
            f"{TAIL_TOLERANCE:.0e} at dim={dim}; use dim >= {need}",
            suggested_dim=need,
        )
    return FockVector(amps, dim)


def squeezed_vacuum(s: float, dim: int) -> FockVector:
    """Squeezed vacuum S(s)|0> in the number basis.

    Only even number states are populated:
    ``c_{2k} = sech(s)^{1/2} tanh(s)^k sqrt((2k)!)/(2^k k!)``.
    For ``s > 0`` the phase quadrature is squeezed, ``V(a_minus) = e^{-2s}/4``,
    matching the Wigner form ``(2/pi) exp[-2 a_plus^2 e^{-2s} - 2 a_minus^2 e^{2s}]``.
    """
    amps = np.zeros(dim, dtype=complex)
    t = np.tanh(s)
    c = 1.0 / np.sqrt(np.cosh(s))
    retained = 0.0
    k = 0
    while 2 * k < dim:
        amps[2 * k] = c
        retained += c * c
        c *= t * np.sqrt((2 * k + 1) / (2 * k + 2))
        k += 1
    tail = max(0.0, 1.0 - retained)
    if tail > TAIL_TOLERANCE:
        raise TruncationError(
            f"squeezed_vacuum(s={s}) tail mass {tail:.3e} exceeds "
            f"{TAIL_TOLERANCE:.0e} at dim={dim}; increase dim",
        )
    return FockVector(amps, dim)


def scs_state(gamma: complex, parity: str, dim: int) -> FockVector:
    """Normalized superposition of coherent states |gamma> +/- |-gamma>.

    ``parity='even'`` takes the plus sign (even photon numbers only),
    ``parity='odd'`` the minus sign.  The exact squared norm of the
    unnormalized superposition is ``2 (1 +/- e^{-2|gamma|^2})``.
    """
    if parity not in ("even", "odd"):
        raise ValueError("parity must be 'even' or 'odd'")
    sign = 1.0 if parity == "even" else -1.0
    overlap = np.exp(-2.0 * abs(gamma) ** 2)
    norm_sq = 2.0 * (1.0 + sign * overlap)
    if norm_sq < 1e-12:
        raise ValueError(f"{parity} superposition is degenerate at gamma={gamma}")
    plus = _coherent_amplitudes(gamma, dim)
    minus = _coherent_amplitudes(-gamma, dim)
    amps = (plus + sign * minus) / np.sqrt(norm_sq)
    tail = max(0.0, 1.0 - float(np.vdot(amps, amps).real))
    if tail > TAIL_TOLERANCE:
        need = _min_dim_for_coherent(gamma, TAIL_TOLERANCE / 4.0)
        raise TruncationError(
            f"scs_state(|gamma|={abs(gamma):.4g}) tail mass {tail:.3e} exceeds "
            f"{TAIL_TOLERANCE:.0e} at dim={dim}; use dim >= {need}",
            suggested_dim=need,
        )
    return FockVector(amps, dim)


# ---------------------------------------------------------------------------
# Unitary operators on a single mode
# ---------------------------------------------------------------------------


def _apply_buffered(state: FockVector, generator, buffer: int) -> FockVector:
    """Exponentiate ``generator(big_dim)`` on a buffered space, apply, crop.

    Population pushed beyond the buffered space is a genuine loss; population
    cropped back out of the buffer is checked against the tail tolerance.
    """
    dim = state.dim
    big = dim + buffer
    u = expm(generator(big))
    padded = np.zeros(big, dtype=complex)
    padded[:dim] = state.amplitudes
    out_big = u @ padded
    out = out_big[:dim]
    norm_in = float(np.vdot(padded, padded).real)
    norm_out = float(np.vdot(out, out).real)
    lost = norm_in - norm_out
    if lost > TAIL_TOLERANCE:
        raise TruncationError(
            f"operator application lost {lost:.3e} population to truncation at "
            f"dim={dim} (buffer {buffer}); increase dim",
        )
    return FockVector(out, dim)


def apply_squeeze(state: FockVector, s: float, buffer: int = OPERATOR_BUFFER) -> FockVector:
    """Apply S(s) = exp[-(s/2)(a^2 - a^dag^2)] to a state."""

    def gen(d):
        a = annihilation(d)
        aa = a @ a
        return -(s / 2.0) * (aa - aa.T)

    return _apply_buffered(state, gen, buffer)


def apply_displace(state: FockVector, gamma: complex, buffer: int = OPERATOR_BUFFER) -> FockVector:
    """Apply D(gamma) = exp[gamma a^dag - gamma* a] to a state."""

    def gen(d):
        a = annihilation(d)
        return gamma * a.T - np.conj(gamma) * a

    return _apply_buffered(state, gen, buffer)


# ---------------------------------------------------------------------------
# Beam splitter
# ---------------------------------------------------------------------------


@lru_cache(maxsize=16)
def beam_splitter_unitary(dim: int, reflectivity: float) -> csr_matrix:
    """Two-mode beam-splitter unitary on the dim x dim product space.

    Reflectivity R = sin^2(theta/2).  The generator conserves total photon
    number, so the unitary is assembled block by block; blocks that fit
    entirely below the truncation are exact, and the operator is exactly
    unitary on the truncated space either way.

    Mode ordering is (input -> transmitted, ancilla -> reflected) with
    ``a_t = sqrt(T) a_in - sqrt(R) a_anc`` and
    ``a_r = sqrt(R) a_in + sqrt(T) a_anc``.
    """
    if not 0.0 <= reflectivity <= 1.0:
        raise ValueError(f"reflectivity must be in [0, 1], got {reflectivity}")
    theta = 2.0 * np.arcsin(np.sqrt(reflectivity))
    if theta == 0.0:
        return sparse_identity(dim * dim, format="csr")
    rows, cols, vals = [], [], []
    for total in range(2 * dim - 1):
        na_lo = max(0, total - dim + 1)
        na_hi = min(total, dim - 1)
        idx = np.array([na * dim + (total - na) for na in range(na_lo, na_hi + 1)])
        m = idx.size
        if m == 1:
            rows.append(idx[0])
            cols.append(idx[0])
            vals.append(1.0)
            continue
        gen = np.zeros((m, m))
        for p in range(1, m):
            na = na_lo + p
            nb = total - na
            c = (theta / 2.0) * np.sqrt(na * (nb + 1))
            gen[p - 1, p] = c
            gen[p, p - 1] = -c
        block = expm(gen)
        block[np.abs(block) < 1e-300] = 0.0
        r, c = np.nonzero(block)
        rows.extend(idx[r])
        cols.extend(idx[c])
        vals.extend(block[r, c])
    u = coo_matrix((vals, (rows, cols)), shape=(dim * dim, dim * dim))
    return u.tocsr()


def beam_splitter(rho_in: FockDensity, rho_anc: FockDensity, reflectivity: float) -> TwoModeDensity:
    """Interfere an input mode with an ancilla on a beam splitter.

    Returns the joint state over (transmitted, reflected).  The orientation
    reproduces the Wigner composition
    ``W_in(sqrt(T) a + sqrt(R) b) * W_anc(-sqrt(R) a + sqrt(T) b)``.
    """
    if rho_in.dim != rho_anc.dim:
        raise ValueError("input and ancilla must share the truncation dimension")
    dim = rho_in.dim
    u = beam_splitter_unitary(dim, reflectivity)
    joint = np.kron(rho_in.matrix, rho_anc.matrix)
    out = (u @ joint) @ u.T  # U is real, so U^dag = U^T
    return TwoModeDensity(out, dim)


def beam_splitter_pure(psi_in: FockVector, psi_anc: FockVector, reflectivity: float) -> TwoModeDensity:
    """Same interference for pure inputs, via the joint state vector.

    Bit-identical to :func:`beam_splitter` on the corresponding outer
    products, but avoids the dense two-mode matrix products.
    """
    if psi_in.dim != psi_anc.dim:
        raise ValueError("input and ancilla must share the truncation dimension")
    u = beam_splitter_unitary(psi_in.dim, reflectivity)
    vec = u @ np.kron(psi_in.amplitudes, psi_anc.amplitudes)
    return TwoModeDensity(np.outer(vec, vec.conj()), psi_in.dim)


# ---------------------------------------------------------------------------
# Quadrature eigenstates
# ---------------------------------------------------------------------------


def quadrature_wavefunctions(n_max: int, x) -> np.ndarray:
    """<n|x> for all n = 0..n_max at the given points (Wigner units).

    ``<n|x> = (2/pi)^{1/4} H_n(sqrt(2) x) e^{-x^2} / sqrt(2^n n!)`` with
    H_n the physicists' Hermite polynomials; |x> is delta-normalized so
    |<x|psi>|^2 is a true probability density.  Evaluated by the
    normalized upward recurrence, which stays bounded at large n.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    xi = np.sqrt(2.0) * xs
    out = np.empty((n_max + 1, xs.size))
    prev = np.zeros_like(xi)
    cur = np.exp(-0.5 * xi**2)
    out[0] = cur
    for n in range(n_max):
        nxt = xi * np.sqrt(2.0 / (n + 1)) * cur - np.sqrt(n / (n + 1)) * prev
        out[n + 1] = nxt
        prev, cur = cur, nxt
    return (2.0 / np.pi) ** 0.25 * out


def quadrature_wavefunction(n: int, x):
    """<n|x> for a single n; scalar in, scalar out."""
    if n < 0:
        raise ValueError("n must be >= 0")
    vals = quadrature_wavefunctions(n, x)[n]
    return float(vals[0]) if np.isscalar(x) else vals
