"""Embeddability of 2x2 to 4x4 Markov matrices in Markov semigroups and flows."""

from .classify import CaseTag, NecessaryReport, Pattern, classify, necessary_checks
from .embed import (
    Construction,
    EmbeddingResult,
    GeneratorCandidate,
    HyperbolaPoint,
    Reason,
    SearchStatus,
    Uniqueness,
    Verdict,
    decide,
    delta_min,
    embed_d2,
    embed_d3_complex,
    embed_d3_cyclic_real,
    embed_d3_deg2,
    embed_d3_eq_input_neg,
    embed_d4,
    eq_input_extremal_generators,
    hyperbola_search,
    smt_coeffs,
    uniqueness_certificates,
)
from .errors import (
    ClassificationError,
    DegenerateDenominatorError,
    DimensionError,
    IllConditionedError,
    InfeasibleParamsError,
    MarkovEmbedError,
    NonpositiveParameterError,
    NotConvergedError,
    NotTotallyPositiveError,
    SpectrumOnCutError,
)
from .inhom import (
    GReport,
    GVerdict,
    PoissonFactor,
    Schedule,
    b_quantity,
    bangbang_product,
    evolve,
    g_embed_d3,
    g_necessary,
    liouville_det,
    peano_baker,
    poisson_matrix,
    star_point,
)
from .kernel import (
    DEFAULT_TOL,
    JordanStructure,
    RealJordanDecomposition,
    Spectrum,
    Tolerances,
    as_matrix,
    eigenvalues,
    is_generator,
    is_markov,
    jordan_structure,
    mat_exp,
    poly_in,
    principal_log,
    real_jordan,
)
from .models import (
    EqualInputParams,
    K3STParams,
    TNParams,
    commutant_basis_d3,
    embed_equal_input,
    embed_k3st,
    embed_tn,
    equal_input_matrix,
    k3st_matrix,
    k3st_spectrum,
    model_recognize,
    recognize_equal_input,
    recognize_k3st,
    recognize_tn,
    tn_condition,
    tn_matrix,
    tn_shaped,
    tn_spectrum,
)

__version__ = "0.1.0"
