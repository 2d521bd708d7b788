"""Scalar functionals of a ``(model, A, B, psi)`` measurement context.

Error and disturbance are root-mean-square quantities::

    eps(A) = <(M_out - A)^2>^(1/2)     eta(B) = <(B_out - B)^2>^(1/2)

evaluated on the composite state ``psi ⊗ xi``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Tuple

import numpy as np

from .measurement import (
    KrausSet,
    MeasurementModel,
    kraus_from_model,
    out_operator_pointer,
    out_operator_system,
    spin_model,
)
from .operators import (
    KET_PLUS_Z,
    SIGMA_X,
    SIGMA_Y,
    TOL_IDENTITY,
    TOL_MARGIN,
    as_hermitian,
    as_state,
    operator_norm,
)

DEFECT_TARGETS = ("measurement_A", "measurement_B_pointer", "disturbance_B")


class ConsistencyError(RuntimeError):
    """An identity that must hold under its stated conditions did not."""


@dataclass(frozen=True, eq=False)
class MomentContext:
    model: MeasurementModel
    a: np.ndarray
    b: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        a = as_hermitian(self.a, TOL_IDENTITY)
        b = as_hermitian(self.b, TOL_IDENTITY)
        psi = as_state(self.psi, TOL_IDENTITY)
        ds = self.model.sys_dim
        if a.shape[0] != ds or b.shape[0] != ds or psi.shape[0] != ds:
            raise ValueError("observables and state must match the model's system dimension")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "psi", psi)

    @cached_property
    def state(self) -> np.ndarray:
        return self.model.composite_state(self.psi)

    @cached_property
    def a_ext(self) -> np.ndarray:
        return np.kron(self.a, np.eye(self.model.app_dim))

    @cached_property
    def b_ext(self) -> np.ndarray:
        return np.kron(self.b, np.eye(self.model.app_dim))

    @cached_property
    def m_out(self) -> np.ndarray:
        return out_operator_pointer(self.model, "M")

    @cached_property
    def n_out(self) -> np.ndarray:
        return out_operator_pointer(self.model, "N")

    @cached_property
    def b_out(self) -> np.ndarray:
        return out_operator_system(self.model, self.b)

    @cached_property
    def kraus(self) -> KrausSet:
        return kraus_from_model(self.model)

    def mean(self, op: np.ndarray) -> complex:
        return complex(np.vdot(self.state, op @ self.state))

    def comm_mean(self, x: np.ndarray, y: np.ndarray) -> complex:
        """``<[x, y]>`` on the composite state, without forming ``[x, y]``."""
        s = self.state
        xs, ys = x.conj().T @ s, y @ s
        return complex(np.vdot(xs, ys) - np.vdot(y.conj().T @ s, x @ s))


def spin_context(phi: float, psi=KET_PLUS_Z) -> MomentContext:
    """Spin detuning set-up: ``A = sigma_x``, ``B = sigma_y``."""
    return MomentContext(spin_model(phi), SIGMA_X, SIGMA_Y, psi)


def sigma(op: np.ndarray, s: np.ndarray) -> float:
    """Standard deviation of Hermitian ``op`` in state ``s``.

    Uses the centred form ``||(op - <op>) s||`` so the variance cannot go
    negative through cancellation.
    """
    if op.shape[0] != s.shape[0]:
        raise ValueError(f"dimension mismatch: {op.shape[0]} vs {s.shape[0]}")
    v = op @ s
    mu = np.vdot(s, v).real
    return float(np.linalg.norm(v - mu * s))


def _rms(op: np.ndarray, s: np.ndarray) -> float:
    return float(np.linalg.norm(op @ s))


def spread(ctx: MomentContext, which: str = "A") -> float:
    """``sigma(A)`` or ``sigma(B)`` in the system state."""
    op = ctx.a if which == "A" else ctx.b
    return sigma(op, ctx.psi)


def error_epsilon(ctx: MomentContext, which: str = "A") -> float:
    """RMS error of pointer M against A (``which="A"``) or N against B."""
    if which == "A":
        return _rms(ctx.m_out - ctx.a_ext, ctx.state)
    if which == "B":
        return _rms(ctx.n_out - ctx.b_ext, ctx.state)
    raise ValueError("which must be 'A' or 'B'")


def disturbance_eta(ctx: MomentContext) -> float:
    return _rms(ctx.b_out - ctx.b_ext, ctx.state)


def bar_epsilon(ctx: MomentContext, which: str = "A") -> float:
    return error_epsilon(ctx, which) + spread(ctx, which)


def bar_eta(ctx: MomentContext) -> float:
    return disturbance_eta(ctx) + spread(ctx, "B")


def unbiasedness_defect(ctx: MomentContext, target: str) -> float:
    """Operator-norm residual of an unbiasedness condition.

    ``measurement_A``: ``||sum m_k E_k - A||``;
    ``measurement_B_pointer``: ``||sum n_l E_l - B||``;
    ``disturbance_B``: ``||sum K^† B K - B||``.
    Zero exactly when the condition holds for every system state.
    """
    ks = ctx.kraus
    if target == "measurement_A":
        return operator_norm(ks.first_moment("M") - ctx.a)
    if target == "measurement_B_pointer":
        return operator_norm(ks.first_moment("N") - ctx.b)
    if target == "disturbance_B":
        return operator_norm(ks.pinch(ctx.b) - ctx.b)
    raise ValueError(f"unknown defect target {target!r}; expected one of {DEFECT_TARGETS}")


def commutator_terms(ctx: MomentContext, variant: str = "disturbance") -> Tuple[complex, complex, complex]:
    """``(<[A, Y - B]>, <[M_out - A, B]>, <[A, B]>)`` with ``Y`` = ``B_out``
    (``variant="disturbance"``) or ``N_out`` (``variant="error"``)."""
    y = ctx.b_out if variant == "disturbance" else ctx.n_out
    return (
        ctx.comm_mean(ctx.a_ext, y - ctx.b_ext),
        ctx.comm_mean(ctx.m_out - ctx.a_ext, ctx.b_ext),
        ctx.comm_mean(ctx.a_ext, ctx.b_ext),
    )


@dataclass(frozen=True)
class MomentIdentityReport:
    sigma_m_out_sq: float
    eps_a_sq: float
    sigma_a_sq: float
    residual_measurement: float
    sigma_b_out_sq: float
    eta_b_sq: float
    sigma_b_sq: float
    residual_disturbance: float
    # sigma(M_out)^2 - sigma(A)^2 split into sigma(D)^2 and two cross terms, D = M_out - A
    decomposition: Tuple[float, complex, complex]
    decomposition_residual: float
    defect_measurement: float
    defect_disturbance: float
    cross_moment_measurement: float
    cross_moment_disturbance: float

    @property
    def measurement_conditions_hold(self) -> bool:
        return self.defect_measurement <= TOL_IDENTITY and self.cross_moment_measurement <= TOL_IDENTITY

    @property
    def disturbance_conditions_hold(self) -> bool:
        return self.defect_disturbance <= TOL_IDENTITY and self.cross_moment_disturbance <= TOL_IDENTITY


def moment_identities_check(ctx: MomentContext) -> MomentIdentityReport:
    """Evaluate ``sigma(M_out)^2 = eps(A)^2 + sigma(A)^2`` and its disturbance
    analogue.

    Raises ``ConsistencyError`` if either identity fails although its
    unbiasedness and cross-moment conditions hold.
    """
    s = ctx.state
    d = ctx.m_out - ctx.a_ext
    sm2 = sigma(ctx.m_out, s) ** 2
    ea2 = error_epsilon(ctx, "A") ** 2
    sa2 = spread(ctx, "A") ** 2
    sb_out2 = sigma(ctx.b_out, s) ** 2
    eb2 = disturbance_eta(ctx) ** 2
    sb2 = spread(ctx, "B") ** 2

    d_c = d - ctx.mean(d).real * np.eye(ctx.model.dim)
    cross1 = ctx.mean(d_c @ ctx.a_ext)
    cross2 = ctx.mean(ctx.a_ext @ d_c)
    sd2 = sigma(d, s) ** 2
    decomp_res = abs(sm2 - sa2 - (sd2 + (cross1 + cross2).real))

    report = MomentIdentityReport(
        sigma_m_out_sq=sm2,
        eps_a_sq=ea2,
        sigma_a_sq=sa2,
        residual_measurement=sm2 - ea2 - sa2,
        sigma_b_out_sq=sb_out2,
        eta_b_sq=eb2,
        sigma_b_sq=sb2,
        residual_disturbance=sb_out2 - eb2 - sb2,
        decomposition=(sd2, cross1, cross2),
        decomposition_residual=decomp_res,
        defect_measurement=unbiasedness_defect(ctx, "measurement_A"),
        defect_disturbance=unbiasedness_defect(ctx, "disturbance_B"),
        cross_moment_measurement=abs(ctx.mean(d @ ctx.a_ext)),
        cross_moment_disturbance=abs(ctx.mean((ctx.b_out - ctx.b_ext) @ ctx.b_ext)),
    )
    if report.measurement_conditions_hold and abs(report.residual_measurement) > TOL_MARGIN:
        raise ConsistencyError(f"measurement identity residual {report.residual_measurement:.3e}")
    if report.disturbance_conditions_hold and abs(report.residual_disturbance) > TOL_MARGIN:
        raise ConsistencyError(f"disturbance identity residual {report.residual_disturbance:.3e}")
    if decomp_res > TOL_MARGIN * max(1.0, sm2):
        raise ConsistencyError(f"variance decomposition residual {decomp_res:.3e}")
    return report
