"""Heisenberg-picture measurement models.

A model couples a system (dimension ``sys_dim``) to an apparatus
(dimension ``app_dim``) prepared in the pure state ``xi``.  The interaction
``U`` acts on ``system ⊗ apparatus`` (Kronecker order, system first), and
two commuting apparatus observables serve as pointers.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .operators import (
    TOL_CONSTRUCT,
    TOL_IDENTITY,
    as_hermitian,
    as_operator,
    as_state,
    operator_norm,
    sigma_phi,
    spectral_decompose,
)

KRAUS_DROP = 1e-12


class ModelError(ValueError):
    """A measurement model or Kraus set violates its invariants."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MeasurementModel:
    sys_dim: int
    app_dim: int
    xi: np.ndarray
    U: np.ndarray
    pointer_M: np.ndarray
    pointer_N: Optional[np.ndarray] = None

    def __post_init__(self):
        d = self.sys_dim * self.app_dim
        if self.sys_dim < 1 or self.app_dim < 1:
            raise ModelError("dimensions must be positive")
        try:
            xi = as_state(self.xi, TOL_IDENTITY)
            U = as_operator(self.U)
            pm = as_hermitian(self.pointer_M, TOL_IDENTITY)
            pn = (np.zeros((self.app_dim, self.app_dim)) if self.pointer_N is None
                  else as_hermitian(self.pointer_N, TOL_IDENTITY))
        except ValueError as exc:
            raise ModelError(str(exc)) from exc
        if xi.shape != (self.app_dim,) or U.shape != (d, d):
            raise ModelError("xi/U shapes inconsistent with dimensions")
        if pm.shape != (self.app_dim,) * 2 or pn.shape != (self.app_dim,) * 2:
            raise ModelError("pointer shapes inconsistent with app_dim")
        if np.max(np.abs(U.conj().T @ U - np.eye(d))) > TOL_IDENTITY:
            raise ModelError("U is not unitary")
        if np.max(np.abs(pm @ pn - pn @ pm)) > TOL_IDENTITY:
            raise ModelError("pointer observables do not commute")
        for name, val in (("xi", xi), ("U", U), ("pointer_M", pm), ("pointer_N", pn)):
            object.__setattr__(self, name, _frozen(val))

    @property
    def dim(self) -> int:
        return self.sys_dim * self.app_dim

    def composite_state(self, psi) -> np.ndarray:
        psi = as_state(psi, TOL_IDENTITY)
        if psi.shape[0] != self.sys_dim:
            raise ValueError(f"dimension mismatch: state {psi.shape[0]} vs system {self.sys_dim}")
        return np.kron(psi, self.xi)


def out_operator_pointer(model: MeasurementModel, which: str = "M") -> np.ndarray:
    """``U^† (1 ⊗ P) U`` for pointer ``P`` in ``{"M", "N"}``."""
    if which not in ("M", "N"):
        raise ValueError("which must be 'M' or 'N'")
    p = model.pointer_M if which == "M" else model.pointer_N
    U = model.U
    return U.conj().T @ np.kron(np.eye(model.sys_dim), p) @ U


def out_operator_system(model: MeasurementModel, b) -> np.ndarray:
    """``U^† (b ⊗ 1) U``, the system observable after the interaction."""
    b = as_operator(b)
    if b.shape[0] != model.sys_dim:
        raise ValueError(f"dimension mismatch: {b.shape[0]} vs system {model.sys_dim}")
    U = model.U
    return U.conj().T @ np.kron(b, np.eye(model.app_dim)) @ U


@dataclass(frozen=True, eq=False)
class KrausSet:
    """Measurement operators with their pointer readings ``(m, n)``."""

    ops: Tuple[np.ndarray, ...]
    m_values: np.ndarray
    n_values: np.ndarray

    def __post_init__(self):
        if not self.ops:
            raise ModelError("empty Kraus set")
        ops = tuple(_frozen(as_operator(k)) for k in self.ops)
        m = np.asarray(self.m_values, dtype=float)
        n = np.asarray(self.n_values, dtype=float)
        if m.shape != (len(ops),) or n.shape != (len(ops),):
            raise ModelError("values must align with Kraus operators")
        total = sum(k.conj().T @ k for k in ops)
        if np.max(np.abs(total - np.eye(ops[0].shape[0]))) > TOL_IDENTITY:
            raise ModelError("Kraus operators are not complete")
        m.setflags(write=False)
        n.setflags(write=False)
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "m_values", m)
        object.__setattr__(self, "n_values", n)

    def __len__(self) -> int:
        return len(self.ops)

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]

    def povm(self) -> List[np.ndarray]:
        return [k.conj().T @ k for k in self.ops]

    def first_moment(self, which: str = "M") -> np.ndarray:
        """``sum_j v_j E_j`` for the readings of pointer ``which``."""
        vals = self.m_values if which == "M" else self.n_values
        return sum(v * e for v, e in zip(vals, self.povm()))

    def pinch(self, b: np.ndarray) -> np.ndarray:
        """``sum_j K_j^† b K_j``."""
        return sum(k.conj().T @ b @ k for k in self.ops)


def simultaneous_eigenbasis(m: np.ndarray, n: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthonormal common eigenvectors of commuting Hermitian ``m`` and ``n``.

    Returns ``(vectors, m_values, n_values)`` with columns ordered
    lexicographically by ``(m, n)``.
    """
    if np.max(np.abs(m @ n - n @ m)) > TOL_IDENTITY:
        raise ModelError("pointer observables do not commute")
    cols, mv, nv = [], [], []
    dec = spectral_decompose(m)
    for val, proj in zip(dec.eigenvalues, dec.projectors):
        w, v = np.linalg.eigh(proj)
        basis = v[:, w > 0.5]
        nw, nvec = np.linalg.eigh(basis.conj().T @ n @ basis)
        for j in range(basis.shape[1]):
            cols.append(basis @ nvec[:, j])
            mv.append(val)
            nv.append(nw[j])
    order = sorted(range(len(cols)), key=lambda i: (mv[i], nv[i], i))
    vecs = np.column_stack([cols[i] for i in order])
    return vecs, np.array([mv[i] for i in order]), np.array([nv[i] for i in order])


def _isometry(model: MeasurementModel) -> np.ndarray:
    """``W[i, a, j] = <i, a| U |j ⊗ xi>``."""
    ds, da = model.sys_dim, model.app_dim
    return np.einsum("iajb,b->iaj", model.U.reshape(ds, da, ds, da), model.xi)


def kraus_from_model(model: MeasurementModel) -> KrausSet:
    """Expand ``U|psi ⊗ xi>`` over the pointers' common eigenbasis.

    Elements with norm below ``1e-12`` are dropped.
    """
    vecs, mv, nv = simultaneous_eigenbasis(model.pointer_M, model.pointer_N)
    w = _isometry(model)
    ops, ms, ns = [], [], []
    for col in range(vecs.shape[1]):
        k = np.einsum("a,iaj->ij", vecs[:, col].conj(), w)
        if operator_norm(k) < KRAUS_DROP:
            continue
        ops.append(k)
        ms.append(mv[col])
        ns.append(nv[col])
    return KrausSet(tuple(ops), np.array(ms), np.array(ns))


def outcome_probabilities(ks: KrausSet, psi) -> List[Tuple[float, float, float]]:
    """``(m, n, p)`` per Kraus element, with ``p = <psi|K^† K|psi>``."""
    psi = as_state(psi, TOL_IDENTITY)
    if psi.shape[0] != ks.dim:
        raise ValueError(f"dimension mismatch: state {psi.shape[0]} vs Kraus {ks.dim}")
    out = []
    for k, m, n in zip(ks.ops, ks.m_values, ks.n_values):
        kp = k @ psi
        out.append((float(m), float(n), float(np.vdot(kp, kp).real)))
    return out


def marginal(outcomes: Sequence[Tuple[float, float, float]], which: str = "M"):
    """Collapse ``(m, n, p)`` triples onto the readings of one pointer.

    Returns ``(values, probabilities)`` with equal readings summed.
    """
    idx = 0 if which == "M" else 1
    acc = {}
    for row in outcomes:
        acc[row[idx]] = acc.get(row[idx], 0.0) + row[2]
    vals = np.array(sorted(acc))
    return vals, np.array([acc[v] for v in vals])


def projective_dilation(a) -> MeasurementModel:
    """Shift-register dilation of the projective measurement of ``a``.

    With ``a = sum_k a_k P_k`` (``K`` distinct eigenvalues) the apparatus is
    ``K``-dimensional, starts in ``|0>``, and ``U = sum_k P_k ⊗ S^k`` where
    ``S`` is the cyclic shift.  The M pointer reads ``a_k`` on ``|k>``.
    """
    a = as_hermitian(a)
    dec = spectral_decompose(a)
    K = len(dec)
    shift = np.roll(np.eye(K), 1, axis=0)
    U = sum(np.kron(p, np.linalg.matrix_power(shift, k)) for k, p in enumerate(dec.projectors))
    xi = np.zeros(K)
    xi[0] = 1.0
    return MeasurementModel(a.shape[0], K, xi, U, np.diag(dec.eigenvalues).astype(complex))


@dataclass(frozen=True)
class SpinDetuningModel:
    """Projective measurement of ``sigma_phi`` used as an approximate
    measurement of ``sigma_x``, with ``0 <= phi <= pi/2``."""

    phi: float

    def __post_init__(self):
        if not (0.0 <= self.phi <= np.pi / 2 + 1e-15):
            raise ValueError(f"phi must lie in [0, pi/2], got {self.phi!r}")

    @property
    def observable(self) -> np.ndarray:
        return sigma_phi(self.phi)

    @property
    def projectors(self) -> Tuple[np.ndarray, np.ndarray]:
        """``(E(+), E(-))`` with ``E(±) = (1 ± sigma_phi) / 2``."""
        s = self.observable
        eye = np.eye(2)
        return (eye + s) / 2, (eye - s) / 2

    def model(self) -> MeasurementModel:
        """The shift-register dilation with exact readings ``-1, +1``.

        Same layout as :func:`projective_dilation` (ascending readings):
        ``U = E(-) ⊗ 1 + E(+) ⊗ X``.
        """
        e_plus, e_minus = self.projectors
        shift = np.array([[0, 1], [1, 0]], dtype=complex)
        U = np.kron(e_minus, np.eye(2)) + np.kron(e_plus, shift)
        return MeasurementModel(2, 2, np.array([1.0, 0.0]), U, np.diag([-1.0, 1.0]).astype(complex))


def spin_model(phi: float) -> MeasurementModel:
    return SpinDetuningModel(phi).model()


def model_from_kraus(ops: Sequence[np.ndarray], m_values, n_values=None,
                     app_dim: Optional[int] = None) -> MeasurementModel:
    """Build a model realizing the given Kraus operators.

    Apparatus basis vector ``|j>`` carries Kraus operator ``j`` and diagonal
    pointer readings ``(m_j, n_j)``; extra apparatus levels read zero.  The
    isometry ``psi ⊗ |0> -> sum_j K_j psi ⊗ |j>`` is completed to a unitary.
    """
    ops = [as_operator(k) for k in ops]
    J, ds = len(ops), ops[0].shape[0]
    da = J if app_dim is None else app_dim
    if da < J:
        raise ValueError("app_dim smaller than the number of Kraus operators")
    m = np.zeros(da)
    m[:J] = np.asarray(m_values, dtype=float)
    n = np.zeros(da)
    if n_values is not None:
        n[:J] = np.asarray(n_values, dtype=float)
    d = ds * da
    iso = np.zeros((ds, da, ds), dtype=complex)
    for j, k in enumerate(ops):
        iso[:, j, :] = k
    iso = iso.reshape(d, ds)
    if np.max(np.abs(iso.conj().T @ iso - np.eye(ds))) > TOL_IDENTITY:
        raise ModelError("Kraus operators are not complete")
    # orthonormal complement of the isometry's range fills the other columns
    u_full, _, _ = np.linalg.svd(iso, full_matrices=True)
    complement = u_full[:, ds:]
    U = np.zeros((d, d), dtype=complex)
    input_cols = [j * da for j in range(ds)]
    other_cols = [c for c in range(d) if c not in input_cols]
    U[:, input_cols] = iso
    U[:, other_cols] = complement
    xi = np.zeros(da)
    xi[0] = 1.0
    return MeasurementModel(ds, da, xi, U, np.diag(m).astype(complex), np.diag(n).astype(complex))


def _pairs(a: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.ravel(a)]


def _unpairs(rows, shape) -> np.ndarray:
    arr = np.array([complex(re, im) for re, im in rows], dtype=complex)
    return arr.reshape(shape)


def model_to_dict(model: MeasurementModel) -> dict:
    """JSON-ready dict; complex entries as ``[re, im]`` pairs, row-major."""
    return {
        "sys_dim": model.sys_dim,
        "app_dim": model.app_dim,
        "xi": _pairs(model.xi),
        "U": _pairs(model.U),
        "pointer_M": {
            "matrix": _pairs(model.pointer_M),
            "spectrum": [float(x) for x in np.linalg.eigvalsh(model.pointer_M)],
        },
        "pointer_N": {
            "matrix": _pairs(model.pointer_N),
            "spectrum": [float(x) for x in np.linalg.eigvalsh(model.pointer_N)],
        },
    }


def model_from_dict(doc: dict) -> MeasurementModel:
    ds, da = int(doc["sys_dim"]), int(doc["app_dim"])
    return MeasurementModel(
        ds, da,
        _unpairs(doc["xi"], (da,)),
        _unpairs(doc["U"], (ds * da, ds * da)),
        _unpairs(doc["pointer_M"]["matrix"], (da, da)),
        _unpairs(doc["pointer_N"]["matrix"], (da, da)),
    )


def model_to_json(model: MeasurementModel, **kwargs) -> str:
    return json.dumps(model_to_dict(model), **kwargs)


def model_from_json(text: str) -> MeasurementModel:
    return model_from_dict(json.loads(text))
