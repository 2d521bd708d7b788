"""Simulation and verification of quantum measurement models.

Submodules:

* :mod:`qmeasure.operators`: dense operator algebra and seeded sampling
* :mod:`qmeasure.measurement`: measurement models, Kraus sets, dilations
* :mod:`qmeasure.moments`: spreads, errors, disturbances, defects
* :mod:`qmeasure.relations`: the uncertainty-relation catalog
* :mod:`qmeasure.audit`: randomized universality audit
* :mod:`qmeasure.estimation`: estimator statistics and unbiased-model searches
* :mod:`qmeasure.cli`: command-line front end
"""
from .audit import AuditResult, random_context, random_model, universality_audit
from .estimation import (
    BiasedMeasurementError,
    EstimationResult,
    EstimatorRun,
    InfeasibilityResult,
    TradeoffPoint,
    enumerate_estimator_moments,
    estimation_disturbance,
    estimation_error,
    estimator_statistics,
    infeasibility_audit,
    infeasibility_sweep,
    optimal_pointer_variance,
    run_from_context,
    sample_counts,
    tradeoff_search,
)
from .measurement import (
    KrausSet,
    MeasurementModel,
    ModelError,
    SpinDetuningModel,
    kraus_from_model,
    model_from_json,
    model_from_kraus,
    model_to_json,
    out_operator_pointer,
    out_operator_system,
    outcome_probabilities,
    projective_dilation,
    spin_model,
)
from .moments import (
    ConsistencyError,
    MomentContext,
    bar_epsilon,
    bar_eta,
    commutator_terms,
    disturbance_eta,
    error_epsilon,
    moment_identities_check,
    sigma,
    spin_context,
    spread,
    unbiasedness_defect,
)
from .operators import (
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    SpectralDecomposition,
    commutator,
    expectation,
    make_rng,
    operator_norm,
    polarization_states,
    random_hermitian,
    random_state,
    random_unitary,
    sigma_phi,
    spectral_decompose,
    tensor_product,
)
from .relations import CATALOG, RelationReport, evaluate_all

__version__ = "0.1.0"
