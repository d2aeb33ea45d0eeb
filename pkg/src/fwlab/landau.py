"""Particle with anomalous magnetic moment in a uniform magnetic field along +z.

Transverse motion only (p_z = 0).  The kinetic momenta are realised on a
truncated oscillator basis |0>, ..., |n_max>; the symmetric gauge is assumed
for the coordinate-space eigenfunctions.  Natural units, hbar = c = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .operators import (
    SplitHamiltonian,
    dirac_matrix,
    hermitian_eig,
    lift,
    max_norm,
)

# top two Landau levels carry truncation artefacts
INTERIOR_MARGIN = 2
RESIDUAL_REJECT = 1e-6


@dataclass(frozen=True)
class ModelParams:
    m: float = 1.0
    e: float = 1.0
    H: float = 0.1
    mu_prime: float = 0.001
    n_max: int = 64

    def __post_init__(self):
        for name in ("m", "e", "H", "mu_prime"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not self.m > 0:
            raise ValueError(f"m must be positive, got {self.m}")
        if not self.H > 0:
            raise ValueError(f"H must be positive, got {self.H}")
        if self.e == 0:
            raise ValueError("e must be nonzero")
        if int(self.n_max) != self.n_max or self.n_max < 4:
            raise ValueError(f"n_max must be an integer >= 4, got {self.n_max}")

    @property
    def n_levels(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return 4 * self.n_levels

    @property
    def sign(self) -> int:
        """Sign of eH (H > 0, so the sign of the charge)."""
        return 1 if self.e > 0 else -1

    @property
    def eH_abs(self) -> float:
        return abs(self.e) * self.H

    @property
    def magnetic_length(self) -> float:
        return 1.0 / math.sqrt(self.eH_abs)

    @property
    def n_interior(self) -> int:
        """Largest Landau index counted as interior."""
        return self.n_max - INTERIOR_MARGIN

    def as_dict(self) -> dict:
        return {"m": self.m, "e": self.e, "H": self.H, "mu_prime": self.mu_prime, "n_max": self.n_max}


def interior_index(params: ModelParams) -> np.ndarray:
    """Flat basis indices 4n+s with n in the interior."""
    return np.arange(4 * (params.n_interior + 1))


@dataclass(frozen=True)
class EigenRecord:
    n: int
    lam: int
    M: float
    eps0: float
    E0: float
    E_total: float


@dataclass(frozen=True, eq=False)
class BispinorState:
    """Coefficients over |n> (x) spinor component, flat index 4n+s."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 4:
            raise ValueError(f"coefficient vector must be 1-D with length divisible by 4, got {c.shape}")
        object.__setattr__(self, "coeffs", c)

    @property
    def dim(self) -> int:
        return self.coeffs.size

    @property
    def upper(self) -> np.ndarray:
        """Upper spinor, shape (n_levels, 2)."""
        return self.coeffs.reshape(-1, 4)[:, :2]

    @property
    def lower(self) -> np.ndarray:
        return self.coeffs.reshape(-1, 4)[:, 2:]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    @classmethod
    def from_spinors(cls, upper, lower=None) -> "BispinorState":
        upper = np.asarray(upper, dtype=complex).reshape(-1, 2)
        lower = np.zeros_like(upper) if lower is None else np.asarray(lower, dtype=complex).reshape(-1, 2)
        return cls(np.hstack([upper, lower]).ravel())


def ladder_ops(n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Truncated annihilation/creation operators on |0>..|n_max>."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    a = np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1).astype(complex)
    return a, a.conj().T


def pi_ops(params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Kinetic momenta (pi_x, pi_y) on the Landau index space.

    With ``a`` proportional to ``pi_x + i*sgn(eH)*pi_y`` one gets
    ``[pi_x, pi_y] = i e H`` and ``pi_x^2 + pi_y^2 = |eH| (2 a^+ a + 1)``
    away from the truncation edge.
    """
    a, ad = ladder_ops(params.n_max)
    s = math.sqrt(params.eH_abs / 2)
    pi_x = s * (a + ad)
    pi_y = -1j * params.sign * s * (a - ad)
    return pi_x, pi_y


def build_dirac_hamiltonian(params: ModelParams, spin_operator: str = "pi") -> SplitHamiltonian:
    """Split Dirac Hamiltonian with even = -mu' H Pi_z and odd = alpha . pi.

    ``spin_operator="sigma"`` substitutes Sigma_z for Pi_z in the AMM term.
    That model is not exactly transformable and serves as a negative control.
    """
    if spin_operator not in ("pi", "sigma"):
        raise ValueError(f"spin_operator must be 'pi' or 'sigma', got {spin_operator!r}")
    N = params.n_levels
    pi_x, pi_y = pi_ops(params)
    even = -params.mu_prime * params.H * lift(dirac_matrix(spin_operator + "_z"), N)
    odd = np.kron(pi_x, dirac_matrix("alpha_x")) + np.kron(pi_y, dirac_matrix("alpha_y"))
    return SplitHamiltonian(params.m, even, odd, lift(dirac_matrix("beta"), N))


def fw_hamiltonian_closed_form(params: ModelParams) -> np.ndarray:
    """``beta sqrt(pi_perp^2 + m^2 - e Sigma.H) - mu' Pi.H`` built directly in the Landau basis."""
    N = params.n_levels
    pi_x, pi_y = pi_ops(params)
    pi_perp2 = (pi_x @ pi_x + pi_y @ pi_y).real
    if max_norm(pi_perp2 - np.diag(np.diag(pi_perp2))) > 1e-12 * max_norm(pi_perp2):
        raise AssertionError("pi_perp^2 is not diagonal in the Landau basis")
    sigma_z = np.diag(dirac_matrix("sigma_z")).real
    arg = params.m**2 + np.kron(np.diag(pi_perp2), np.ones(4)) - params.e * params.H * np.tile(sigma_z, N)
    if np.any(arg < 0):
        raise ValueError("negative square-root argument in closed-form FW Hamiltonian")
    beta = lift(dirac_matrix("beta"), N)
    return beta * np.sqrt(arg) - params.mu_prime * params.H * lift(dirac_matrix("pi_z"), N)


def eps0_value(params: ModelParams, n: int, lam: int) -> float:
    """sqrt(m^2 + (2n+1)|e|H - lam e H), with the integer factor formed first."""
    k = 2 * n + 1 - lam * params.sign
    return math.sqrt(params.m**2 + params.eH_abs * k)


def _check_lam(lam):
    if lam not in (1, -1):
        raise ValueError(f"lambda must be +1 or -1, got {lam}")


def _check_half_integer(M):
    if not math.isfinite(M) or (2 * M) % 2 != 1:
        raise ValueError(f"M must be a half-integer, got {M}")


def make_record(params: ModelParams, n: int, lam: int, M: float | None = None) -> EigenRecord:
    _check_lam(lam)
    if n < 0:
        raise ValueError("n must be non-negative")
    if M is None:
        M = default_M(params, n, lam)
    eps0 = eps0_value(params, n, lam)
    E0 = -lam * params.mu_prime * params.H + 0.0  # no signed zeros in output
    return EigenRecord(n, lam, float(M), eps0, E0, eps0 + E0)


def radial_quantum_number(params: ModelParams, n: int, lam: int, M: float) -> int:
    """n_rho for the (n, lam, M) state; raises ValueError if inadmissible.

    In the symmetric gauge ``pi_perp^2`` has eigenvalue
    ``|eH| (2 n_rho + |m_l| - sgn(eH) m_l + 1)`` with orbital number
    ``m_l = M - lam/2``.
    """
    _check_lam(lam)
    _check_half_integer(M)
    m_l = int(round(M - lam / 2))
    twice = abs(m_l) - params.sign * m_l
    n_rho = n - twice // 2
    if n < 0 or n_rho < 0:
        raise ValueError(
            f"(n={n}, lambda={lam}, M={M}) is inadmissible: orbital number m_l={m_l} "
            f"needs n >= {twice // 2} for charge sign {params.sign:+d}"
        )
    return n_rho


def default_M(params: ModelParams, n: int, lam: int) -> float:
    """Representative M of level (n, lam), the one with no radial nodes."""
    return -params.sign * n + lam / 2


def analytic_spectrum(params: ModelParams, M_list=None) -> list[EigenRecord]:
    """Positive-energy levels for n = 0..n_max, lam = +-1, sorted by total energy.

    Without ``M_list`` one record per (n, lam) is produced.  With it, one
    record per admissible (n, lam, M).
    """
    records = []
    for n in range(params.n_max + 1):
        for lam in (1, -1):
            if M_list is None:
                records.append(make_record(params, n, lam))
                continue
            for M in M_list:
                try:
                    radial_quantum_number(params, n, lam, M)
                except ValueError:
                    continue
                records.append(make_record(params, n, lam, M))
    records.sort(key=lambda r: (r.E_total, r.n, -r.lam, r.M))
    return records


def conserved_level_operator(params: ModelParams) -> np.ndarray:
    """``a^+ a - sgn(eH) Sigma_z / 2``: commutes with the truncated Dirac Hamiltonian.

    A Dirac eigenstate coming from FW basis state (n, sigma) has eigenvalue
    ``n - sgn(eH) sigma / 2`` and energy set by ``|eH| (2 K + 1)``.
    """
    N = params.n_levels
    number = np.kron(np.diag(np.arange(N, dtype=float)), np.eye(4))
    return number - params.sign / 2 * lift(dirac_matrix("sigma_z"), N)


@dataclass(frozen=True, eq=False)
class LabelledEigensystem:
    """Full eigensystem with each vector assigned its (n, lam, energy sign) labels.

    ``lam`` is the Pi_z eigenvalue; for positive energies it equals the
    spin projection of the FW upper spinor.
    """

    values: np.ndarray
    vectors: np.ndarray
    n: np.ndarray
    lam: np.ndarray
    label_spread: np.ndarray

    def positive(self):
        return self.values > 0

    def interior(self, params: ModelParams):
        return self.n <= params.n_interior

    def find(self, n: int, lam: int, positive: bool = True) -> int:
        sel = np.flatnonzero((self.n == n) & (self.lam == lam) & ((self.values > 0) == positive))
        if sel.size != 1:
            raise LookupError(f"expected one eigenvector labelled (n={n}, lambda={lam}), found {sel.size}")
        return int(sel[0])


def _clusters(values, rtol):
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] > rtol * max(1.0, abs(values[i])):
            yield slice(start, i)
            start = i


def label_eigensystem(params: ModelParams, values, vectors, cluster_rtol: float = 1e-9) -> LabelledEigensystem:
    """Resolve degenerate eigenspaces by the commuting pair (K, Pi_z) and read off labels."""
    N = params.n_levels
    K = conserved_level_operator(params)
    P = lift(dirac_matrix("pi_z"), N)
    probe = K + P / math.pi  # (K, Pi_z) -> k + p/pi is injective on half-integers x {+-1}
    vectors = np.array(vectors, dtype=complex)
    for sl in _clusters(values, cluster_rtol):
        if sl.stop - sl.start > 1:
            Vc = vectors[:, sl]
            _, R = np.linalg.eigh(Vc.conj().T @ probe @ Vc)
            vectors[:, sl] = Vc @ R
    k = np.einsum("ij,ik,kj->j", vectors.conj(), K, vectors).real
    p = np.einsum("ij,ik,kj->j", vectors.conj(), P, vectors).real
    lam = np.where(p >= 0, 1, -1)
    sigma = np.where(values > 0, lam, -lam)
    n_float = k + params.sign * sigma / 2
    n = np.rint(n_float).astype(int)
    spread = np.maximum(np.abs(n_float - n), np.abs(np.abs(p) - 1))
    return LabelledEigensystem(np.asarray(values), vectors, n, lam, spread)


@lru_cache(maxsize=64)
def dirac_eigensystem(params: ModelParams, spin_operator: str = "pi") -> LabelledEigensystem:
    """Brute-force diagonalisation of the truncated Dirac Hamiltonian, labelled."""
    split = build_dirac_hamiltonian(params, spin_operator)
    values, vectors = hermitian_eig(split.matrix)
    out = label_eigensystem(params, values, vectors)
    for arr in (out.values, out.vectors, out.n, out.lam, out.label_spread):
        arr.setflags(write=False)
    return out


def _fix_phase(v):
    upper = v.reshape(-1, 4)[:, :2].ravel()
    ref = upper if np.max(np.abs(upper)) > 0 else v
    j = int(np.argmax(np.abs(ref)))
    return v * (abs(ref[j]) / ref[j])


def dirac_eigenstate(params: ModelParams, n: int, lam: int) -> tuple[BispinorState, EigenRecord]:
    """Positive-energy eigenstate (n, lam) of the truncated Dirac Hamiltonian."""
    _check_lam(lam)
    if not 0 <= n <= params.n_interior:
        raise ValueError(f"level n={n} is outside the interior 0..{params.n_interior} for n_max={params.n_max}")
    system = dirac_eigensystem(params)
    j = system.find(n, lam)
    return BispinorState(_fix_phase(system.vectors[:, j])), make_record(params, n, lam)


def eigen_residual(params: ModelParams, state: BispinorState, energy: float) -> float:
    H = build_dirac_hamiltonian(params).matrix
    return float(np.linalg.norm(H @ state.coeffs - energy * state.coeffs))


def connect_to_fw(state: BispinorState, rec: EigenRecord, params: ModelParams) -> BispinorState:
    """FW wave function from a positive-energy Dirac eigenstate.

    Applies ``[eps0 + beta (E - E0)] / sqrt(2 eps0 (eps0 + m))``, which for
    ``E = eps0 + E0`` keeps only the upper spinor scaled by
    ``sqrt(2 eps0 / (eps0 + m))``.
    """
    if state.dim != params.dim:
        raise ValueError(f"state dimension {state.dim} does not match model dimension {params.dim}")
    H = build_dirac_hamiltonian(params).matrix
    psi = state.coeffs
    energy = float(np.vdot(psi, H @ psi).real / np.vdot(psi, psi).real)
    if energy <= 0:
        raise ValueError(f"negative-energy state (<H> = {energy:.6g}); only positive-energy states are connected")
    res = float(np.linalg.norm(H @ psi - rec.E_total * psi))
    if res > RESIDUAL_REJECT:
        raise ValueError(f"state is not an eigenstate for E={rec.E_total:.12g} (residual {res:.3e})")
    beta = np.tile([1.0, 1.0, -1.0, -1.0], params.n_levels)
    eps0, E, m = rec.eps0, rec.E_total, params.m
    out = (eps0 + beta * (E - rec.E0)) * psi / math.sqrt(2 * eps0 * (eps0 + m))
    return BispinorState(out)


def renormalized_fw(phi) -> BispinorState:
    """``(phi, 0)`` normalised to unit length."""
    phi = np.asarray(phi, dtype=complex).reshape(-1, 2)
    nrm = float(np.linalg.norm(phi))
    if not nrm > 0:
        raise ValueError("upper spinor is zero")
    return BispinorState.from_spinors(phi / nrm)


def laguerre(n_rho: int, alpha: float, x):
    """Associated Laguerre polynomial L_n^alpha(x) by the three-term recurrence."""
    if n_rho < 0:
        raise ValueError("n_rho must be non-negative")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n_rho == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + alpha - x
    for k in range(1, n_rho):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur if np.ndim(cur) else float(cur)


@dataclass(frozen=True)
class RadialFunction:
    """Normalised Landau radial function, int_0^inf R^2 rho drho = 1."""

    n_rho: int
    ell_abs: int
    b: float

    def __post_init__(self):
        if self.n_rho < 0 or self.ell_abs < 0:
            raise ValueError("quantum numbers must be non-negative")
        if not self.b > 0:
            raise ValueError("magnetic length must be positive")

    @property
    def normalization(self) -> float:
        n, l, b = self.n_rho, self.ell_abs, self.b
        log_c2 = math.lgamma(n + 1) - math.lgamma(n + l + 1) - 2 * math.log(b) - l * math.log(2 * b * b)
        return math.exp(log_c2 / 2)

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        x = rho**2 / (2 * self.b**2)
        return self.normalization * rho**self.ell_abs * np.exp(-x / 2) * laguerre(self.n_rho, self.ell_abs, x)


@dataclass(frozen=True, eq=False)
class FWWavefunction:
    """Radial samples of an FW eigenfunction; the angular factor exp(i m_l phi)/sqrt(2 pi) is implied."""

    n: int
    lam: int
    M: float
    m_l: int
    radial: RadialFunction
    rho: np.ndarray
    values: np.ndarray
    spinor: np.ndarray

    @property
    def n_rho(self) -> int:
        return self.radial.n_rho


def fw_wavefunction(params: ModelParams, n: int, lam: int, M: float, grid) -> FWWavefunction:
    n_rho = radial_quantum_number(params, n, lam, M)
    rho = np.asarray(grid, dtype=float)
    if rho.ndim != 1 or rho.size < 2 or np.any(rho <= 0) or np.any(np.diff(rho) <= 0):
        raise ValueError("grid must be a strictly increasing 1-D array of positive radii")
    m_l = int(round(M - lam / 2))
    radial = RadialFunction(n_rho, abs(m_l), params.magnetic_length)
    spinor = np.zeros(4, dtype=complex)
    spinor[0 if lam == 1 else 1] = 1.0
    return FWWavefunction(n, lam, float(M), m_l, radial, rho, radial(rho), spinor)


def lowest_admissible_states(params: ModelParams, count: int = 5, max_abs_ml: int = 2, n_levels: int = 3):
    """The ``count`` lowest (n, lam, M) states, ordered by energy then n_rho and |m_l|."""
    states = []
    for n in range(n_levels):
        for lam in (1, -1):
            for m_l in range(-max_abs_ml, max_abs_ml + 1):
                M = m_l + lam / 2
                try:
                    n_rho = radial_quantum_number(params, n, lam, M)
                except ValueError:
                    continue
                rec = make_record(params, n, lam, M)
                states.append((rec.E_total, n_rho, abs(m_l), M, rec))
    states.sort(key=lambda t: t[:4])
    return [t[-1] for t in states[:count]]
