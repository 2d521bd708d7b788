"""Catalog of uncertainty relations evaluated on a :class:`MomentContext`.

Each relation produces a :class:`RelationReport` carrying the assumptions
its derivation needs together with the *measured* defect of each
assumption, so that a failing conditional relation can be traced to the
assumption that failed.  Relations whose only assumption is commuting
pointers (or none) are universally valid.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from .moments import (
    MomentContext,
    commutator_terms,
    disturbance_eta,
    error_epsilon,
    sigma,
    spread,
    unbiasedness_defect,
)
from .operators import TOL_MARGIN, operator_norm

NONE = "none"
COMMUTING = "commuting_pointers"
UNBIASED_A = "unbiased_measurement_A"
UNBIASED_B = "unbiased_measurement_B"
UNBIASED_DIST_B = "unbiased_disturbance_B"

CSV_COLUMNS = ("name", "lhs", "rhs", "margin", "holds", "saturated", "assumptions", "defects")


@dataclass(frozen=True)
class RelationReport:
    name: str
    lhs: float
    rhs: float
    assumptions: Tuple[str, ...]
    assumption_defects: Tuple[float, ...]
    tol: float = TOL_MARGIN

    def __post_init__(self):
        if len(self.assumptions) != len(self.assumption_defects):
            raise ValueError("assumption_defects must align with assumptions")

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    @property
    def holds(self) -> bool:
        return self.margin >= -self.tol

    @property
    def saturated(self) -> bool:
        return abs(self.margin) <= self.tol

    @property
    def universal(self) -> bool:
        return set(self.assumptions) <= {NONE, COMMUTING}

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "holds": self.holds,
            "saturated": self.saturated,
            "assumptions": list(self.assumptions),
            "defects": list(self.assumption_defects),
        }

    def csv_row(self) -> list:
        return [
            self.name, repr(self.lhs), repr(self.rhs), repr(self.margin),
            str(self.holds).lower(), str(self.saturated).lower(),
            ";".join(self.assumptions),
            ";".join(repr(d) for d in self.assumption_defects),
        ]


def _commuting_defect(ctx: MomentContext, variant: str) -> float:
    other = ctx.b_out if variant == "disturbance" else ctx.n_out
    return operator_norm(ctx.m_out @ other - other @ ctx.m_out)


def _defects(ctx: MomentContext, assumptions: Sequence[str], variant: str) -> Tuple[float, ...]:
    out = []
    for item in assumptions:
        if item == NONE:
            out.append(0.0)
        elif item == COMMUTING:
            out.append(_commuting_defect(ctx, variant))
        elif item == UNBIASED_A:
            out.append(unbiasedness_defect(ctx, "measurement_A"))
        elif item == UNBIASED_B:
            out.append(unbiasedness_defect(ctx, "measurement_B_pointer"))
        elif item == UNBIASED_DIST_B:
            out.append(unbiasedness_defect(ctx, "disturbance_B"))
        else:
            raise ValueError(item)
    return tuple(out)


def _report(ctx, name, lhs, rhs, assumptions, variant) -> RelationReport:
    assumptions = tuple(assumptions)
    return RelationReport(name, float(lhs), float(rhs), assumptions,
                          _defects(ctx, assumptions, variant))


def _second(ctx: MomentContext, variant: str) -> np.ndarray:
    """The out-operator playing B's role: ``N_out`` or ``B_out``."""
    return ctx.n_out if variant == "error" else ctx.b_out


def _half_comm_ab(ctx: MomentContext) -> float:
    return 0.5 * abs(ctx.comm_mean(ctx.a_ext, ctx.b_ext))


def _robertson(ctx: MomentContext, variant: str) -> RelationReport:
    s = ctx.state
    x = ctx.m_out - ctx.a_ext
    y = _second(ctx, variant) - ctx.b_ext
    lhs = sigma(x, s) * sigma(y, s)
    rhs = 0.5 * abs(ctx.comm_mean(x, y))
    return _report(ctx, f"robertson_{'error_error' if variant == 'error' else 'error_disturbance'}",
                   lhs, rhs, (NONE,), variant)


def robertson_error_error(ctx: MomentContext) -> RelationReport:
    """``sigma(M_out - A) sigma(N_out - B) >= |<[M_out - A, N_out - B]>| / 2``."""
    return _robertson(ctx, "error")


def robertson_error_disturbance(ctx: MomentContext) -> RelationReport:
    """``sigma(M_out - A) sigma(B_out - B) >= |<[M_out - A, B_out - B]>| / 2``."""
    return _robertson(ctx, "disturbance")


def _heisenberg_any(ctx: MomentContext, variant: str) -> RelationReport:
    s = ctx.state
    y = _second(ctx, variant)
    lhs = ((sigma(ctx.m_out - ctx.a_ext, s) + sigma(ctx.m_out, s))
           * (sigma(y - ctx.b_ext, s) + sigma(y, s)))
    suffix = "error_error" if variant == "error" else "error_disturbance"
    return _report(ctx, f"heisenberg_type_any_{suffix}", lhs, _half_comm_ab(ctx), (NONE,), variant)


def heisenberg_type_any_error_error(ctx):
    return _heisenberg_any(ctx, "error")


def heisenberg_type_any_error_disturbance(ctx):
    return _heisenberg_any(ctx, "disturbance")


def _universal_sum(ctx: MomentContext, variant: str) -> RelationReport:
    s = ctx.state
    y = _second(ctx, variant)
    lhs = ((sigma(ctx.m_out - ctx.a_ext, s) + spread(ctx, "A"))
           * (sigma(y - ctx.b_ext, s) + spread(ctx, "B")))
    rhs = 2 * _half_comm_ab(ctx)
    suffix = "error_error" if variant == "error" else "error_disturbance"
    return _report(ctx, f"universal_sum_{suffix}", lhs, rhs, (COMMUTING,), variant)


def universal_sum_error_error(ctx):
    return _universal_sum(ctx, "error")


def universal_sum_error_disturbance(ctx):
    return _universal_sum(ctx, "disturbance")


def _tight(ctx: MomentContext, variant: str) -> RelationReport:
    second = error_epsilon(ctx, "B") if variant == "error" else disturbance_eta(ctx)
    lhs = error_epsilon(ctx, "A") * second
    rhs = 0.5 * abs(sum(commutator_terms(ctx, variant)))
    suffix = "error_error" if variant == "error" else "error_disturbance"
    return _report(ctx, f"tight_robertson_{suffix}", lhs, rhs, (COMMUTING,), variant)


def tight_robertson_error_error(ctx):
    """``eps(A) eps(B)`` against the three-commutator right-hand side."""
    return _tight(ctx, "error")


def tight_robertson_error_disturbance(ctx):
    """``eps(A) eta(B)`` against the three-commutator right-hand side."""
    return _tight(ctx, "disturbance")


def naive_error_error(ctx):
    lhs = error_epsilon(ctx, "A") * error_epsilon(ctx, "B")
    return _report(ctx, "naive_error_error", lhs, _half_comm_ab(ctx),
                   (COMMUTING, UNBIASED_A, UNBIASED_B), "error")


def naive_error_disturbance(ctx):
    lhs = error_epsilon(ctx, "A") * disturbance_eta(ctx)
    return _report(ctx, "naive_error_disturbance", lhs, _half_comm_ab(ctx),
                   (COMMUTING, UNBIASED_A, UNBIASED_DIST_B), "disturbance")


def arthurs_kelly_standard(ctx):
    s = ctx.state
    lhs = sigma(ctx.m_out, s) * sigma(ctx.n_out, s)
    return _report(ctx, "arthurs_kelly_standard", lhs, 2 * _half_comm_ab(ctx),
                   (COMMUTING, UNBIASED_A, UNBIASED_B), "error")


def arthurs_kelly_universal(ctx):
    lhs = ((error_epsilon(ctx, "A") + spread(ctx, "A"))
           * (error_epsilon(ctx, "B") + spread(ctx, "B")))
    return _report(ctx, "arthurs_kelly_universal", lhs, 2 * _half_comm_ab(ctx),
                   (COMMUTING,), "error")


def universal_heisenberg(ctx):
    lhs = ((error_epsilon(ctx, "A") + spread(ctx, "A"))
           * (disturbance_eta(ctx) + spread(ctx, "B")))
    return _report(ctx, "universal_heisenberg", lhs, 2 * _half_comm_ab(ctx),
                   (COMMUTING,), "disturbance")


def ozawa_three_term(ctx):
    e, n = error_epsilon(ctx, "A"), disturbance_eta(ctx)
    lhs = e * n + spread(ctx, "A") * n + e * spread(ctx, "B")
    return _report(ctx, "ozawa_three_term", lhs, _half_comm_ab(ctx), (COMMUTING,), "disturbance")


def modified_arthurs_kelly(ctx):
    s = ctx.state
    lhs = sigma(ctx.m_out, s) * sigma(ctx.b_out, s)
    return _report(ctx, "modified_arthurs_kelly", lhs, 2 * _half_comm_ab(ctx),
                   (COMMUTING, UNBIASED_A, UNBIASED_DIST_B), "disturbance")


CATALOG: Dict[str, Callable[[MomentContext], RelationReport]] = {
    f.__name__: f for f in sorted([
        robertson_error_error,
        robertson_error_disturbance,
        heisenberg_type_any_error_error,
        heisenberg_type_any_error_disturbance,
        universal_sum_error_error,
        universal_sum_error_disturbance,
        tight_robertson_error_error,
        tight_robertson_error_disturbance,
        naive_error_error,
        naive_error_disturbance,
        arthurs_kelly_standard,
        arthurs_kelly_universal,
        universal_heisenberg,
        ozawa_three_term,
        modified_arthurs_kelly,
    ], key=lambda f: f.__name__)
}

UNIVERSAL_RELATIONS = tuple(
    name for name in CATALOG
    if not name.startswith(("naive", "arthurs_kelly_standard", "modified"))
)
CONDITIONAL_RELATIONS = tuple(name for name in CATALOG if name not in UNIVERSAL_RELATIONS)


def evaluate_all(ctx: MomentContext) -> List[RelationReport]:
    """Every relation in the catalog, ordered by name."""
    return [CATALOG[name](ctx) for name in CATALOG]


def reports_to_json(reports: Sequence[RelationReport], **kwargs) -> str:
    return json.dumps([r.to_dict() for r in reports], **kwargs)


def reports_to_csv(reports: Sequence[RelationReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()
