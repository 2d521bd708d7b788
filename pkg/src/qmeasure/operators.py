"""Dense complex linear algebra for small Hilbert spaces.

Operators are plain ``numpy`` complex arrays of shape ``(d, d)`` and states
are complex vectors of shape ``(d,)``.  The ``as_*`` helpers validate and
coerce inputs; everything else assumes validated input.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np

# construction / derived-identity / inequality tolerances
TOL_CONSTRUCT = 1e-12
TOL_IDENTITY = 1e-10
TOL_MARGIN = 1e-9
DEGENERACY_GAP = 1e-9

SeedLike = Union[int, Sequence[int], np.random.SeedSequence, np.random.Generator, None]

IDENTITY_2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

KET_PLUS_Z = np.array([1, 0], dtype=complex)
KET_MINUS_Z = np.array([0, 1], dtype=complex)
KET_PLUS_X = np.array([1, 1], dtype=complex) / np.sqrt(2)

for _arr in (IDENTITY_2, SIGMA_X, SIGMA_Y, SIGMA_Z, KET_PLUS_Z, KET_MINUS_Z, KET_PLUS_X):
    _arr.setflags(write=False)


def sigma_phi(phi: float) -> np.ndarray:
    """Spin component ``cos(phi) X + sin(phi) Y`` in the x-y plane."""
    return np.cos(phi) * SIGMA_X + np.sin(phi) * SIGMA_Y


def as_operator(x) -> np.ndarray:
    """Coerce ``x`` to a square finite complex matrix, or raise ``ValueError``."""
    a = np.asarray(x, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"operator must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("operator has non-finite entries")
    return a


def is_hermitian(a: np.ndarray, tol: float = TOL_CONSTRUCT) -> bool:
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def as_hermitian(x, tol: float = TOL_CONSTRUCT) -> np.ndarray:
    a = as_operator(x)
    if not is_hermitian(a, tol):
        raise ValueError("operator is not Hermitian")
    return a


def as_state(x, tol: float = TOL_CONSTRUCT) -> np.ndarray:
    v = np.asarray(x, dtype=complex)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"state must be a non-empty vector, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("state has non-finite amplitudes")
    if abs(np.linalg.norm(v) - 1.0) > tol:
        raise ValueError(f"state is not normalized (norm={np.linalg.norm(v)!r})")
    return v


def _check_dims(*dims: int) -> None:
    if len(set(dims)) != 1:
        raise ValueError(f"dimension mismatch: {dims}")


def tensor_product(x, y) -> np.ndarray:
    """Kronecker product; works for operators and state vectors alike."""
    return np.kron(np.asarray(x, dtype=complex), np.asarray(y, dtype=complex))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    _check_dims(a.shape[0], b.shape[0])
    return a @ b - b @ a


def expectation(a: np.ndarray, s: np.ndarray) -> complex:
    """``<s|a|s>``."""
    _check_dims(a.shape[0], s.shape[0])
    return complex(np.vdot(s, a @ s))


def operator_norm(a: np.ndarray) -> float:
    """Largest singular value."""
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Distinct eigenvalues (ascending) with their orthogonal projectors."""

    eigenvalues: np.ndarray
    projectors: Tuple[np.ndarray, ...]

    def reconstruct(self) -> np.ndarray:
        return sum(a * p for a, p in zip(self.eigenvalues, self.projectors))

    def __len__(self) -> int:
        return len(self.projectors)


def spectral_decompose(a, gap: float = DEGENERACY_GAP) -> SpectralDecomposition:
    """Spectral decomposition with eigenvalues closer than ``gap`` merged.

    Merging keeps projector ranks right for degenerate observables, which
    the projective pinching ``sum_k P_k B P_k`` depends on.
    """
    a = as_hermitian(a)
    w, v = np.linalg.eigh(a)
    groups: List[List[int]] = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[groups[-1][-1]] < gap:
            groups[-1].append(i)
        else:
            groups.append([i])
    values = np.array([w[g].mean() for g in groups])
    projectors = tuple(v[:, g] @ v[:, g].conj().T for g in groups)
    return SpectralDecomposition(values, projectors)


def make_rng(seed: SeedLike) -> np.random.Generator:
    """Counter-based (Philox) generator; a Generator passes through unchanged."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


def child_seed(master: int, index: int) -> np.random.SeedSequence:
    """Seed for trial ``index`` that does not depend on execution order."""
    return np.random.SeedSequence([int(master), int(index)])


def random_state(dim: int, seed: SeedLike = None) -> np.ndarray:
    """Uniform (Haar) random pure state: a normalized complex Gaussian vector."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = make_rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_hermitian(dim: int, seed: SeedLike = None) -> np.ndarray:
    """Draw from the Gaussian unitary ensemble, scaled to unit entry variance."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = make_rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (g + g.conj().T) / 2


def random_unitary(dim: int, seed: SeedLike = None) -> np.ndarray:
    """Haar random unitary via QR of a Ginibre matrix with the phase fix."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = make_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def polarization_states(psi, psi_prime) -> List[Tuple[complex, np.ndarray]]:
    """Four ``(coefficient, vector)`` pairs recovering an off-diagonal element.

    For every operator ``B``::

        sum(c * vdot(v, B @ v) for c, v in pairs) == vdot(psi, B @ psi_prime)

    The vectors are not normalized; ``psi_prime`` may have any norm.
    """
    psi = np.asarray(psi, dtype=complex)
    psi_prime = np.asarray(psi_prime, dtype=complex)
    _check_dims(psi.shape[0], psi_prime.shape[0])
    return [
        (0.25, psi + psi_prime),
        (-0.25, psi - psi_prime),
        (-0.25j, psi + 1j * psi_prime),
        (0.25j, psi - 1j * psi_prime),
    ]


def polarization_reconstruct(b: np.ndarray, pairs: Sequence[Tuple[complex, np.ndarray]]) -> complex:
    return complex(sum(c * np.vdot(v, b @ v) for c, v in pairs))
