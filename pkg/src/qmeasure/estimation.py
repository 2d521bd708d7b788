"""Estimator statistics and searches over unbiased measurement models.

The linear estimator ``A_est = sum_i m_i n_i / n`` is built from the
outcome counts ``{n_i}`` of ``n`` repetitions of a measurement.  Its
large-``n`` scaled variance is ``sigma(M_out)^2``, and for an unbiased
measurement the estimation error ``n Var - sigma(A)^2`` coincides with the
squared RMS error ``eps(A)^2``.

Squared-error quantities in this module (``eps_A_sq``, ``eps_B_sq``) follow
that estimation convention; :mod:`qmeasure.moments` reports RMS values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import schur

from .measurement import MeasurementModel, marginal, outcome_probabilities, projective_dilation
from .moments import ConsistencyError, MomentContext, error_epsilon, sigma, spread, unbiasedness_defect
from .operators import TOL_IDENTITY, TOL_MARGIN, as_hermitian, as_state, make_rng

FEASIBILITY_TOL = 1e-6
BIAS_TOL = 1e-8
# keeps the N readings from drifting on low-probability outcomes
RADIUS_WEIGHT = 0.1


class BiasedMeasurementError(ValueError):
    """The measurement is not unbiased for the target observable."""

    def __init__(self, defect: float):
        super().__init__(f"measurement is biased: unbiasedness defect {defect:.6g}")
        self.defect = defect


@dataclass(frozen=True)
class EstimatorRun:
    probabilities: np.ndarray
    values: np.ndarray
    n: int
    seed: int = 0

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if p.shape != v.shape or p.ndim != 1:
            raise ValueError("probabilities and values must be aligned vectors")
        if np.any(p < -1e-12) or abs(p.sum() - 1.0) > TOL_IDENTITY:
            raise ValueError("probabilities must be non-negative and sum to 1")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        p = np.clip(p, 0.0, None)
        object.__setattr__(self, "probabilities", p / p.sum())
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class EstimationResult:
    empirical_mean: float
    empirical_scaled_var: Optional[float]
    analytic_mean: float
    analytic_scaled_var: float


def run_from_context(ctx: MomentContext, n: int, seed: int = 0, which: str = "M") -> EstimatorRun:
    """Outcome distribution of one pointer on ``ctx.psi``, readings merged."""
    vals, probs = marginal(outcome_probabilities(ctx.kraus, ctx.psi), which)
    return EstimatorRun(probs, vals, n, seed)


def sample_counts(run: EstimatorRun) -> np.ndarray:
    return make_rng(run.seed).multinomial(run.n, run.probabilities)


def analytic_moments(probabilities, values) -> Tuple[float, float]:
    """``(sum m p, sum m^2 p - (sum m p)^2)``: mean and ``n Var`` of the estimator."""
    p = np.asarray(probabilities, dtype=float)
    m = np.asarray(values, dtype=float)
    mean = float(np.dot(m, p))
    return mean, float(np.dot(m * m, p) - mean ** 2)


def estimator_statistics(run: EstimatorRun) -> EstimationResult:
    """Sampled and closed-form statistics of the linear estimator.

    ``empirical_scaled_var`` is the unbiased sample variance of the ``n``
    individual readings, which estimates ``n Var[A_est]``; it is ``None``
    for a single sample.
    """
    counts = sample_counts(run)
    m = run.values
    mean = float(np.dot(m, counts) / run.n)
    if run.n > 1:
        ss = float(np.dot(counts, (m - mean) ** 2))
        var = ss / (run.n - 1)
    else:
        var = None
    a_mean, a_var = analytic_moments(run.probabilities, m)
    return EstimationResult(mean, var, a_mean, a_var)


def count_vectors(n: int, k: int) -> Iterator[Tuple[int, ...]]:
    """All ``(n_1, ..., n_k)`` with ``n_i >= 0`` and ``sum n_i = n``."""
    for combo in combinations_with_replacement(range(k), n):
        counts = [0] * k
        for c in combo:
            counts[c] += 1
        yield tuple(counts)


def multinomial_pmf(counts: Sequence[int], probabilities: Sequence[float]) -> float:
    n = sum(counts)
    coef = math.factorial(n)
    out = 1.0
    for c, p in zip(counts, probabilities):
        coef //= math.factorial(c)
        out *= p ** c
    return coef * out


def enumerate_estimator_moments(probabilities, values, n: int) -> Tuple[float, float]:
    """``(E[A_est], n Var[A_est])`` by summing over every count vector."""
    p = list(map(float, probabilities))
    m = list(map(float, values))
    e1 = e2 = 0.0
    for counts in count_vectors(n, len(p)):
        w = multinomial_pmf(counts, p)
        est = sum(mi * ci for mi, ci in zip(m, counts)) / n
        e1 += w * est
        e2 += w * est * est
    return e1, n * (e2 - e1 * e1)


def estimation_error(ctx: MomentContext, tol: float = BIAS_TOL) -> float:
    """``n Var[A_est] - sigma(A)^2`` in the large-``n`` limit.

    Only meaningful for an unbiased measurement; raises
    :class:`BiasedMeasurementError` when the operator defect exceeds ``tol``.
    """
    defect = unbiasedness_defect(ctx, "measurement_A")
    if defect > tol:
        raise BiasedMeasurementError(defect)
    vals, probs = marginal(outcome_probabilities(ctx.kraus, ctx.psi), "M")
    _, scaled_var = analytic_moments(probs, vals)
    err = scaled_var - spread(ctx, "A") ** 2
    if err < -TOL_MARGIN:
        raise ConsistencyError(f"negative estimation error {err:.3e} on an unbiased measurement")
    return max(err, 0.0)


def optimal_pointer_variance(ctx: MomentContext) -> float:
    """Variance of a pointer that reads ``B_out`` precisely: ``sigma(B_out)^2``."""
    return sigma(ctx.b_out, ctx.state) ** 2


def estimation_disturbance(ctx: MomentContext) -> float:
    """Disturbance as excess variance of the optimal pointer over ``sigma(B)^2``."""
    return optimal_pointer_variance(ctx) - spread(ctx, "B") ** 2


def disturbance_interpretations(ctx: MomentContext) -> dict:
    """The two readings of the estimation-theoretic disturbance side by side.

    ``rms_squared`` is ``<(B_out - B)^2>``, bounded by ``4 ||B||^2``;
    ``optimal_pointer`` is ``sigma(B_out)^2 - sigma(B)^2``.
    """
    diff = ctx.b_out - ctx.b_ext
    return {
        "rms_squared": float(np.linalg.norm(diff @ ctx.state) ** 2),
        "optimal_pointer": estimation_disturbance(ctx),
    }


# ----------------------------------------------------------------------------
# parametrized joint-measurement models
# ----------------------------------------------------------------------------


class _JointFamily:
    """Models with a free interaction ``U = exp(-iH)``, ``xi = |0>`` and
    diagonal pointers whose readings are fitted to the target observables.

    Given ``U`` the readings enter the unbiasedness conditions linearly, so
    each evaluation solves for them by weighted least squares (weights are
    the outcome probabilities, which makes the solution the one with the
    smallest scaled variance).
    """

    def __init__(self, a, b, psi, app_dim: int):
        self.a = as_hermitian(a, TOL_IDENTITY)
        self.b = as_hermitian(b, TOL_IDENTITY)
        self.psi = as_state(psi, TOL_IDENTITY)
        self.ds = self.a.shape[0]
        self.da = app_dim
        self.d = self.ds * app_dim
        self.n_params = self.d * self.d
        self._iu = np.triu_indices(self.d, 1)
        self._input_cols = [j * app_dim for j in range(self.ds)]
        self.a_sq = float(np.vdot(self.psi, self.a @ self.a @ self.psi).real)
        self.b_sq = float(np.vdot(self.psi, self.b @ self.b @ self.psi).real)
        self.sigma_a_sq = sigma(self.a, self.psi) ** 2
        self.sigma_b_sq = sigma(self.b, self.psi) ** 2

    def hamiltonian(self, theta: np.ndarray) -> np.ndarray:
        d = self.d
        h = np.zeros((d, d), dtype=complex)
        k = len(self._iu[0])
        h[self._iu] = theta[d:d + k] + 1j * theta[d + k:]
        h = h + h.conj().T
        h[np.diag_indices(d)] = theta[:d]
        return h

    def unitary(self, theta: np.ndarray) -> np.ndarray:
        w, v = np.linalg.eigh(self.hamiltonian(theta))
        return (v * np.exp(-1j * w)) @ v.conj().T

    def theta_from_unitary(self, U: np.ndarray) -> np.ndarray:
        """Generator coordinates of a given unitary (principal logarithm)."""
        t, z = schur(U, output="complex")
        h = (z * -np.angle(np.diagonal(t))) @ z.conj().T
        h = (h + h.conj().T) / 2
        d = self.d
        return np.concatenate([h[np.diag_indices(d)].real, h[self._iu].real, h[self._iu].imag])

    def povm(self, U: np.ndarray) -> np.ndarray:
        iso = U[:, self._input_cols].reshape(self.ds, self.da, self.ds)
        kraus = np.transpose(iso, (1, 0, 2))
        return np.einsum("aki,akj->aij", kraus.conj(), kraus), kraus

    @staticmethod
    def fit_readings(povm: np.ndarray, targets: np.ndarray, weights: np.ndarray) -> np.ndarray:
        """Readings ``v`` minimizing ``sum w v^2`` subject to ``sum v E = target``
        (least squares when no exact solution exists), one column per target."""
        flat = povm.reshape(len(povm), -1)
        g = np.concatenate([flat.real, flat.imag], axis=1).T
        t = targets.reshape(len(targets), -1)
        x = np.concatenate([t.real, t.imag], axis=1).T
        scale = 1.0 / np.sqrt(weights)
        y, *_ = np.linalg.lstsq(g * scale, x, rcond=1e-12)
        return y * scale[:, None]

    def evaluate(self, theta: np.ndarray) -> dict:
        U = self.unitary(theta)
        povm, kraus = self.povm(U)
        p = np.einsum("i,aij,j->a", self.psi.conj(), povm, self.psi).real
        w = np.clip(p, 0.0, None) + 1e-6
        m, n = self.fit_readings(povm, np.stack([self.a, self.b]), w).T
        flat = povm.reshape(len(povm), -1)
        shape = (self.ds, self.ds)
        pinch = np.einsum("aki,kl,alj->ij", kraus.conj(), self.b, kraus)
        diffs = np.stack([(m @ flat).reshape(shape) - self.a,
                          (n @ flat).reshape(shape) - self.b,
                          pinch - self.b])
        res_a, res_b, res_dist = np.max(np.abs(np.linalg.eigvalsh(diffs)), axis=1)
        _, var_m = analytic_moments(p, m)
        _, var_n = analytic_moments(p, n)
        return {
            "U": U, "m": m, "n": n, "p": p,
            "res_a": float(res_a), "res_b": float(res_b), "res_dist": float(res_dist),
            "eps_a_sq": var_m - self.sigma_a_sq,
            "eps_b_sq": var_n - self.sigma_b_sq,
            "m_norm": float(np.max(np.abs(m))),
            "n_norm": float(np.max(np.abs(n))),
        }

    def model(self, ev: dict) -> MeasurementModel:
        xi = np.zeros(self.da)
        xi[0] = 1.0
        return MeasurementModel(self.ds, self.da, xi, ev["U"],
                                np.diag(ev["m"]).astype(complex), np.diag(ev["n"]).astype(complex))


def _coordinate_search(family: _JointFamily, theta0: np.ndarray, rng: np.random.Generator,
                       objective, max_evals: int,
                       penalties=(1e2, 1e4, 1e6, 1e8), step0: float = 0.2, min_step: float = 1e-9):
    """Random-coordinate pattern search with per-coordinate step adaptation.

    ``objective(ev) -> (value, defect, excess)``: ``defect`` (equality
    residuals) is penalized with escalating weight; ``excess`` (inequality
    violation) is penalized until it first reaches zero, after which it acts
    as a barrier.
    """
    theta = theta0.copy()
    ev = family.evaluate(theta)
    val, defect, excess = objective(ev)
    steps = np.full(theta.size, step0)
    per_stage = max(1, max_evals // len(penalties))
    evals = 1
    for rho in penalties:
        barrier = excess <= 0.0
        cur = val + rho * (defect ** 2 + excess ** 2)
        steps = np.maximum(steps, 1e-3)
        stop = evals + per_stage
        while evals < stop and steps.max() > min_step:
            i = int(rng.integers(theta.size))
            moved = False
            for sign in (1.0, -1.0) if rng.random() < 0.5 else (-1.0, 1.0):
                trial = theta.copy()
                trial[i] += sign * steps[i]
                ev_t = family.evaluate(trial)
                evals += 1
                v_t, d_t, x_t = objective(ev_t)
                if barrier and x_t > 0.0:
                    continue
                merit = v_t + rho * (d_t ** 2 + x_t ** 2)
                if merit < cur:
                    theta, ev, cur = trial, ev_t, merit
                    val, defect, excess = v_t, d_t, x_t
                    barrier = barrier or excess <= 0.0
                    steps[i] *= 1.6
                    moved = True
                    break
            if not moved:
                steps[i] *= 0.5
    return theta, ev


@dataclass
class TradeoffPoint:
    target: float
    eps_A_sq: float
    eps_B_sq: float
    constraint_residual_A: float
    constraint_residual_B: float
    pointer_N_norm: float
    rhs_bound: float
    model: Optional[MeasurementModel] = None
    feasible: bool = True

    @property
    def product(self) -> float:
        return self.eps_A_sq * self.eps_B_sq


def _rhs_bound(a, b, psi) -> float:
    c = np.vdot(psi, (a @ b - b @ a) @ psi)
    return 0.25 * abs(c) ** 2


def tradeoff_search(a, b, psi, target_eps_A_grid: Sequence[float], app_dim: int = 4,
                    seed: int = 0, budget: int = 3000, restarts: int = 32) -> List[TradeoffPoint]:
    """Trace the error-error frontier of unbiased joint measurements.

    For each level ``t`` of ``target_eps_A_grid`` minimize ``eps(B; N)``
    over models with both pointers unbiased and ``eps(A; M) <= t``.  Levels
    are visited from largest to smallest; every restart's final point is
    kept, and a level reports the best feasible point found anywhere that
    satisfies its cap, so the reported minima are monotone by construction.
    ``budget`` is the evaluation budget per restart.
    """
    if app_dim < 4:
        raise ValueError("app_dim must be >= 4")
    family = _JointFamily(a, b, psi, app_dim)
    bound = _rhs_bound(family.a, family.b, family.psi)
    levels = sorted(set(float(t) for t in target_eps_A_grid), reverse=True)
    found: List[dict] = []
    warm: Optional[np.ndarray] = None

    for li, t in enumerate(levels):
        def objective(ev, t=t):
            value = ev["eps_b_sq"] + RADIUS_WEIGHT * ev["n_norm"] ** 2
            return value, math.hypot(ev["res_a"], ev["res_b"]), max(0.0, ev["eps_a_sq"] - t)

        best_theta, best_val = None, math.inf
        for r in range(restarts):
            rng = make_rng(np.random.SeedSequence([int(seed), li, r]))
            if r == 0 and warm is not None:
                theta0 = warm
            else:
                theta0 = rng.standard_normal(family.n_params)
            theta, ev = _coordinate_search(family, theta0, rng, objective, budget)
            if _feasible(ev) and ev["eps_a_sq"] <= t:
                found.append(ev)
                if ev["eps_b_sq"] < best_val:
                    best_theta, best_val = theta, ev["eps_b_sq"]
        if best_theta is not None:
            warm = best_theta

    points = []
    for t in sorted(levels, reverse=True):
        ok = [ev for ev in found if ev["eps_a_sq"] <= t]
        if not ok:
            points.append(TradeoffPoint(t, math.nan, math.nan, math.nan, math.nan, math.nan,
                                        bound, None, feasible=False))
            continue
        ev = min(ok, key=lambda e: (e["eps_b_sq"], e["n_norm"]))
        points.append(TradeoffPoint(t, ev["eps_a_sq"], ev["eps_b_sq"], ev["res_a"], ev["res_b"],
                                    ev["n_norm"], bound, family.model(ev)))
    return points


def _feasible(ev: dict) -> bool:
    return ev["res_a"] <= FEASIBILITY_TOL and ev["res_b"] <= FEASIBILITY_TOL


@dataclass
class InfeasibilityResult:
    """Outcome of one cap in :func:`infeasibility_sweep`.

    ``residual`` is the quantity the obstruction keeps away from zero:
    the RMS error of ``a`` (pointer variant) or the disturbance defect of
    ``b`` (disturbance variant).  ``floor`` is the matching lower bound.
    """

    cap: float
    residual: float
    floor: float
    variant: str
    eps_a: float = math.nan
    b_defect: float = math.nan
    model: Optional[MeasurementModel] = None


def infeasibility_sweep(a, b, psi, caps: Sequence[float], seed: int = 0, budget: int = 3000,
                        restarts: int = 8, app_dim: int = 4,
                        variant: str = "pointer") -> List[InfeasibilityResult]:
    """Probe how far unbiasedness of ``b`` can coexist with measuring ``a``.

    ``variant="pointer"``: minimize the RMS error of ``a`` over models whose
    two pointers are both unbiased with ``||N|| <= cap``.  The error cannot
    drop below ``|<[a,b]>| / (2 cap)``, so it only approaches zero as the cap
    grows.

    ``variant="disturbance"``: minimize the disturbance defect
    ``||sum K^† b K - b||`` over models whose M pointer is unbiased with
    ``||M|| <= cap``.  Because the disturbed observable keeps the norm of
    ``b``, the defect is at least ``(|<[a,b]>| - 2 eps(a) ||b||) / (2 ||a||)``.

    Searches start from the projective dilation of ``a`` embedded in the
    apparatus, plus random restarts; caps are processed in increasing order,
    each warm-started from the previous optimum.  A residual of ``inf``
    means no feasible model was found.
    """
    if variant not in ("pointer", "disturbance"):
        raise ValueError("variant must be 'pointer' or 'disturbance'")
    family = _JointFamily(a, b, psi, app_dim)
    comm = abs(np.vdot(family.psi, (family.a @ family.b - family.b @ family.a) @ family.psi))
    norm_a, norm_b = np.linalg.norm(family.a, 2), np.linalg.norm(family.b, 2)
    precise = _embed_projective(family)
    out = []
    warm = None
    for ci, cap in enumerate(sorted(float(c) for c in caps)):
        if variant == "pointer":
            def objective(ev, cap=cap):
                return (ev["eps_a_sq"], math.hypot(ev["res_a"], ev["res_b"]),
                        max(0.0, ev["n_norm"] - cap))
        else:
            def objective(ev, cap=cap):
                return ev["res_dist"], ev["res_a"], max(0.0, ev["m_norm"] - cap)

        best_theta, best_ev, best_val = None, None, math.inf
        for r in range(restarts):
            rng = make_rng(np.random.SeedSequence([int(seed), ci, r]))
            if r == 0:
                theta0 = precise
            elif r == 1 and warm is not None:
                theta0 = warm
            else:
                theta0 = rng.standard_normal(family.n_params)
            theta, ev = _coordinate_search(family, theta0, rng, objective, budget)
            val, defect, excess = objective(ev)
            if defect <= FEASIBILITY_TOL and excess <= 0.0 and val < best_val:
                best_theta, best_ev, best_val = theta, ev, val
        if best_ev is None:
            floor = comm / (2 * cap) if variant == "pointer" else 0.0
            out.append(InfeasibilityResult(cap, math.inf, floor, variant))
            continue
        warm = best_theta
        model = family.model(best_ev)
        eps_a = error_epsilon(MomentContext(model, family.a, family.b, family.psi), "A")
        if variant == "pointer":
            out.append(InfeasibilityResult(cap, eps_a, comm / (2 * cap), variant,
                                           eps_a, best_ev["res_b"], model))
        else:
            floor = max(0.0, (comm - 2 * eps_a * norm_b) / (2 * norm_a))
            out.append(InfeasibilityResult(cap, best_ev["res_dist"], floor, variant,
                                           eps_a, best_ev["res_dist"], model))
    return out


def infeasibility_audit(a, b, psi, pointer_norm_cap: float, seed: int = 0, budget: int = 3000,
                        restarts: int = 8, app_dim: int = 4, variant: str = "pointer") -> float:
    """Best residual for a single cap; see :func:`infeasibility_sweep`."""
    return infeasibility_sweep(a, b, psi, [pointer_norm_cap], seed, budget, restarts,
                               app_dim, variant)[0].residual


def _embed_projective(family: _JointFamily) -> np.ndarray:
    """Generator of the projective dilation of ``a`` padded to ``app_dim``."""
    base = projective_dilation(family.a)
    k = base.app_dim
    if k > family.da:
        raise ValueError("apparatus too small for the projective dilation")
    ds, da = family.ds, family.da
    U = np.zeros((ds, da, ds, da), dtype=complex)
    small = base.U.reshape(ds, k, ds, k)
    U[:, :k, :, :k] = small
    for extra in range(k, da):
        U[:, extra, :, extra] = np.eye(ds)
    return family.theta_from_unitary(U.reshape(family.d, family.d))
