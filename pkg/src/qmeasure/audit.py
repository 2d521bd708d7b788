"""Randomized audit of the universally valid relations."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .measurement import MeasurementModel
from .moments import MomentContext, disturbance_eta
from .operators import (
    TOL_MARGIN,
    child_seed,
    make_rng,
    operator_norm,
    random_hermitian,
    random_state,
    random_unitary,
)
from .relations import CATALOG, UNIVERSAL_RELATIONS, evaluate_all

HISTOGRAM_EDGES = (-np.inf, -TOL_MARGIN, TOL_MARGIN, 0.01, 0.1, 1.0, 10.0, np.inf)


def _pointer_spectrum(rng: np.random.Generator, dim: int) -> np.ndarray:
    # degenerate integer spectra a third of the time exercise the eigenspace handling
    if rng.random() < 1 / 3:
        return rng.integers(-1, 2, size=dim).astype(float)
    return rng.standard_normal(dim)


def random_model(sys_dim: int, app_dim: int, seed) -> MeasurementModel:
    """Haar interaction, Haar apparatus state, commuting pointers in a Haar basis."""
    rng = make_rng(seed)
    U = random_unitary(sys_dim * app_dim, rng)
    xi = random_state(app_dim, rng)
    V = random_unitary(app_dim, rng)
    m = V @ np.diag(_pointer_spectrum(rng, app_dim)) @ V.conj().T
    n = V @ np.diag(_pointer_spectrum(rng, app_dim)) @ V.conj().T
    return MeasurementModel(sys_dim, app_dim, xi, U, (m + m.conj().T) / 2, (n + n.conj().T) / 2)


def random_context(seed, sys_dims: Tuple[int, int] = (2, 4),
                   app_dims: Tuple[int, int] = (2, 4)) -> MomentContext:
    rng = make_rng(seed)
    ds = int(rng.integers(sys_dims[0], sys_dims[1] + 1))
    da = int(rng.integers(app_dims[0], app_dims[1] + 1))
    model = random_model(ds, da, rng)
    return MomentContext(model, random_hermitian(ds, rng), random_hermitian(ds, rng),
                         random_state(ds, rng))


@dataclass
class Violation:
    trial: int
    check: str
    detail: float
    context: MomentContext = field(repr=False)


@dataclass
class AuditResult:
    trials: int
    seed: int
    margins: Dict[str, np.ndarray]
    violations: List[Violation]
    dims: List[Tuple[int, int]] = field(default_factory=list)

    def histogram(self, name: str) -> np.ndarray:
        counts, _ = np.histogram(self.margins[name], bins=np.array(HISTOGRAM_EDGES))
        return counts


def audit_context(ctx: MomentContext) -> Tuple[Dict[str, float], List[Tuple[str, float]]]:
    """Margins of every relation plus any failed universality checks."""
    reports = {r.name: r for r in evaluate_all(ctx)}
    failures = []
    for name in UNIVERSAL_RELATIONS:
        if not reports[name].holds:
            failures.append((name, reports[name].margin))
    for name in CATALOG:
        r = reports[name]
        if not r.universal and not r.holds and max(r.assumption_defects) <= 1e-10:
            failures.append((f"{name}:unflagged_failure", r.margin))

    # boundedness of the disturbed observable
    b_norm = operator_norm(ctx.b)
    b_out_sq = ctx.mean(ctx.b_out @ ctx.b_out).real
    if b_out_sq > b_norm ** 2 + TOL_MARGIN:
        failures.append(("bounded_second_moment", b_out_sq - b_norm ** 2))
    eta = disturbance_eta(ctx)
    if eta > 2 * b_norm + TOL_MARGIN:
        failures.append(("bounded_disturbance", eta - 2 * b_norm))
    if eta > operator_norm(ctx.b_out - ctx.b_ext) + TOL_MARGIN:
        failures.append(("disturbance_below_norm", eta))

    tight = reports["tight_robertson_error_disturbance"]
    uh = reports["universal_heisenberg"]
    if tight.holds and not uh.holds:
        failures.append(("derivation_chain", uh.margin))
    if uh.saturated and not reports["robertson_error_disturbance"].saturated:
        failures.append(("saturation_chain", uh.margin))
    return {name: r.margin for name, r in reports.items()}, failures


def universality_audit(trials: int, seed: int = 1,
                       sys_dims: Tuple[int, int] = (2, 4),
                       app_dims: Tuple[int, int] = (2, 4)) -> AuditResult:
    """Run ``trials`` independent random contexts, trial ``i`` seeded by ``(seed, i)``."""
    margins: Dict[str, List[float]] = {name: [] for name in CATALOG}
    violations: List[Violation] = []
    dims = []
    for i in range(trials):
        ctx = random_context(child_seed(seed, i), sys_dims, app_dims)
        dims.append((ctx.model.sys_dim, ctx.model.app_dim))
        m, fails = audit_context(ctx)
        for name, val in m.items():
            margins[name].append(val)
        violations.extend(Violation(i, name, val, ctx) for name, val in fails)
    return AuditResult(trials, seed, {k: np.array(v) for k, v in margins.items()}, violations, dims)
