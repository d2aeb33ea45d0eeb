"""Dirac matrices, even/odd splitting and the exact Foldy-Wouthuysen transform.

Every operator is a dense complex ``numpy`` array.  Composite spaces use the
ordering ``kron(landau_op, spin_op)``, i.e. flat index ``k = 4*n + s`` with
the 4x4 spin block of Landau level ``n`` kept contiguous.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

HERMITIAN_RTOL = 1e-12
PSD_CLAMP_RTOL = 1e-10
EXACTNESS_WARN_RTOL = 1e-12

_I2 = np.eye(2, dtype=complex)
_Z2 = np.zeros((2, 2), dtype=complex)
PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _block(a, b, c, d):
    return np.block([[a, b], [c, d]])


_BETA = _block(_I2, _Z2, _Z2, -_I2)
DIRAC_MATRICES = {"beta": _BETA}
for _ax, _s in PAULI.items():
    DIRAC_MATRICES["alpha_" + _ax] = _block(_Z2, _s, _s, _Z2)
    DIRAC_MATRICES["sigma_" + _ax] = _block(_s, _Z2, _Z2, _s)
    # polarization operator, Pi = beta Sigma
    DIRAC_MATRICES["pi_" + _ax] = _BETA @ DIRAC_MATRICES["sigma_" + _ax]
for _m in DIRAC_MATRICES.values():
    _m.setflags(write=False)


class NotHermitianError(ValueError):
    """Raised when a matrix expected to be Hermitian is not, within tolerance."""

    def __init__(self, residual: float, tolerance: float):
        super().__init__(f"matrix is not Hermitian: max|A - A^H| = {residual:.3e} > {tolerance:.3e}")
        self.residual = residual
        self.tolerance = tolerance


class NotPSDError(ValueError):
    pass


class EigenDecomposition(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


def dirac_matrix(kind: str) -> np.ndarray:
    """Return a copy of a 4x4 matrix in the Dirac representation.

    ``kind`` is one of ``beta``, ``alpha_{x,y,z}``, ``sigma_{x,y,z}`` or
    ``pi_{x,y,z}`` (the polarization operator, defined as beta @ Sigma).
    """
    try:
        return DIRAC_MATRICES[kind].copy()
    except KeyError:
        raise ValueError(f"unknown Dirac matrix {kind!r}; expected one of {sorted(DIRAC_MATRICES)}") from None


def _as_square(A, name="matrix"):
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} has non-finite entries")
    return A


def max_norm(A, index: Sequence[int] | np.ndarray | None = None) -> float:
    """Largest absolute entry of ``A``, optionally restricted to rows/columns in ``index``."""
    A = np.asarray(A)
    if index is not None:
        index = np.asarray(index)
        A = A[np.ix_(index, index)] if A.ndim == 2 else A[index]
    return float(np.max(np.abs(A))) if A.size else 0.0


def hermiticity_residual(A) -> float:
    A = np.asarray(A)
    return max_norm(A - A.conj().T)


def is_hermitian(A, rtol: float = HERMITIAN_RTOL) -> bool:
    return hermiticity_residual(A) <= rtol * max_norm(A)


def lift(op4, n_levels: int) -> np.ndarray:
    """Tensor a 4x4 spin operator with the identity on ``n_levels`` Landau levels."""
    op4 = _as_square(op4, "op4")
    if op4.shape != (4, 4):
        raise ValueError(f"lift expects a 4x4 operator, got {op4.shape}")
    if int(n_levels) < 1:
        raise ValueError("n_levels must be positive")
    return np.kron(np.eye(int(n_levels)), op4)


def commutator(A, B) -> np.ndarray:
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape or A.ndim != 2:
        raise ValueError(f"commutator needs equal square shapes, got {A.shape} and {B.shape}")
    return A @ B - B @ A


def anticommutator(A, B) -> np.ndarray:
    A = np.asarray(A)
    B = np.asarray(B)
    if A.shape != B.shape or A.ndim != 2:
        raise ValueError(f"anticommutator needs equal square shapes, got {A.shape} and {B.shape}")
    return A @ B + B @ A


def even_odd_split(X, beta) -> tuple[np.ndarray, np.ndarray]:
    """Split ``X`` into the parts commuting (even) and anticommuting (odd) with ``beta``."""
    X = _as_square(X, "X")
    beta = _as_square(beta, "beta")
    if X.shape != beta.shape:
        raise ValueError(f"dimension mismatch: X {X.shape} vs beta {beta.shape}")
    conj = beta @ X @ beta
    return (X + conj) / 2, (X - conj) / 2


@dataclass(frozen=True, eq=False)
class SplitHamiltonian:
    """``H = beta*mass + even + odd`` with ``even`` commuting and ``odd`` anticommuting with beta."""

    mass: float
    even: np.ndarray
    odd: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        shapes = {np.shape(self.even), np.shape(self.odd), np.shape(self.beta)}
        if len(shapes) != 1:
            raise ValueError(f"inconsistent operator shapes: {shapes}")

    @classmethod
    def from_matrix(cls, H, beta, mass: float) -> "SplitHamiltonian":
        """Split a full Hamiltonian ``H`` after removing the mass term."""
        H = _as_square(H, "H")
        beta = _as_square(beta, "beta")
        even, odd = even_odd_split(H - mass * beta, beta)
        return cls(mass, even, odd, beta)

    @property
    def dim(self) -> int:
        return self.beta.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return self.mass * self.beta + self.even + self.odd

    def structure_residuals(self) -> dict[str, float]:
        """Max-norm violations of the beta (anti)commutation laws and Hermiticity."""
        b = self.beta
        return {
            "beta_even": max_norm(commutator(b, self.even)),
            "beta_odd": max_norm(anticommutator(b, self.odd)),
            "even_hermitian": hermiticity_residual(self.even),
            "odd_hermitian": hermiticity_residual(self.odd),
        }


def hermitian_eig(A, rtol: float = HERMITIAN_RTOL) -> EigenDecomposition:
    """Eigen-decomposition of a Hermitian matrix; eigenvalues ascending."""
    A = _as_square(A, "A")
    res, tol = hermiticity_residual(A), rtol * max_norm(A)
    if res > tol:
        raise NotHermitianError(res, tol)
    values, vectors = np.linalg.eigh((A + A.conj().T) / 2)
    return EigenDecomposition(values, vectors)


def _recompose(vectors, values) -> np.ndarray:
    out = (vectors * values) @ vectors.conj().T
    return (out + out.conj().T) / 2


def hermitian_function(A, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Apply a scalar function to a Hermitian matrix through its eigenbasis."""
    w, V = hermitian_eig(A)
    return _recompose(V, f(w))


def _psd_eigenvalues(w):
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    if w.size and w[0] < -PSD_CLAMP_RTOL * scale:
        raise NotPSDError(f"matrix is not positive semidefinite: smallest eigenvalue {w[0]:.3e}")
    return np.clip(w, 0.0, None)


def matrix_sqrt_psd(A) -> np.ndarray:
    """Principal square root of a Hermitian positive semidefinite matrix.

    Eigenvalues down to ``-1e-10 * max|eigenvalue|`` are clamped to zero,
    anything more negative raises :class:`NotPSDError`.
    """
    w, V = hermitian_eig(A)
    return _recompose(V, np.sqrt(_psd_eigenvalues(w)))


def exactness_residual(split: SplitHamiltonian, index=None) -> float:
    """Max-norm of ``[even, odd]``; zero means the transformation below is exact."""
    return max_norm(commutator(split.even, split.odd), index)


def _epsilon_eig(split: SplitHamiltonian):
    m = split.mass
    odd2 = split.odd @ split.odd
    w, V = hermitian_eig(m * m * np.eye(split.dim) + (odd2 + odd2.conj().T) / 2)
    return np.sqrt(_psd_eigenvalues(w)), V


def epsilon_of(split: SplitHamiltonian) -> np.ndarray:
    """``sqrt(m^2 + odd^2)``."""
    eps, V = _epsilon_eig(split)
    return _recompose(V, eps)


def fw_unitary(split: SplitHamiltonian, sign: int = +1) -> np.ndarray:
    """Exact FW operator ``U`` (``sign=+1``) or its inverse (``sign=-1``).

    ``U^(+-) = (eps + m +- beta*odd) / sqrt(2 eps (eps + m))``, with both the
    numerator's ``eps`` and the normaliser taken in the eigenbasis of
    ``m^2 + odd^2``.  A nonzero ``[even, odd]`` only triggers a warning: the
    result is still unitary but no longer block-diagonalises ``H``.
    """
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    m = split.mass
    if not m > 0:
        raise ValueError("mass must be positive")
    scale = max(max_norm(split.even), max_norm(split.odd), m)
    res = exactness_residual(split)
    if res > EXACTNESS_WARN_RTOL * scale * scale:
        warnings.warn(f"[even, odd] != 0 (max-norm {res:.3e}); FW transformation is not exact", stacklevel=2)
    eps, V = _epsilon_eig(split)
    eps_mat = _recompose(V, eps)
    norm = _recompose(V, 1.0 / np.sqrt(2 * eps * (eps + m)))
    numerator = eps_mat + m * np.eye(split.dim) + sign * (split.beta @ split.odd)
    return numerator @ norm


def fw_hamiltonian(split: SplitHamiltonian) -> np.ndarray:
    """``beta*eps + even``."""
    out = split.beta @ epsilon_of(split) + split.even
    return (out + out.conj().T) / 2


def conjugate(U, A, U_inv=None) -> np.ndarray:
    """``U A U^-1``; uses ``U^H`` when no inverse is supplied."""
    U = np.asarray(U)
    if U_inv is None:
        U_inv = U.conj().T
    return U @ A @ U_inv


@dataclass(frozen=True)
class InvarianceResiduals:
    even: float
    epsilon: float


def invariance_check(split: SplitHamiltonian, index=None) -> InvarianceResiduals:
    """Residuals of ``U even U^-1 - even`` and ``U eps U^-1 - eps``."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        U = fw_unitary(split, +1)
        U_inv = fw_unitary(split, -1)
    eps = epsilon_of(split)
    return InvarianceResiduals(
        even=max_norm(conjugate(U, split.even, U_inv) - split.even, index),
        epsilon=max_norm(conjugate(U, eps, U_inv) - eps, index),
    )
