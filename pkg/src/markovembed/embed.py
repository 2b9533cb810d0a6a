"""Embeddability decisions for Markov matrices of dimension 2-4.

``decide`` routes a matrix through its case pattern and constructs every
candidate generator the case theory allows: closed-form polynomial
logarithms for the cyclic and principal-branch cases, branch enumeration
for complex-pair spectra, the extremal commuting pair for the
equal-input d=3 case with a negative double eigenvalue, and a hyperbola
search over the real square roots of -I for the d=4 cases with a repeated
eigenvalue pair.

Every candidate that is reported has been re-verified: it passes
``is_generator`` and the residual certificate ||exp(Q) - M|| <= residual
tolerance * scale(M).  Verdicts are three-valued; ``Undecided`` absorbs
numerical failure and the search's honest "Inconclusive" outcome, and
never masquerades as ``NotEmbeddable``.
"""

from __future__ import annotations

import dataclasses
import enum
import math

import numpy as np
import scipy.linalg

from .classify import CaseTag, Pattern, classify, necessary_checks
from .errors import (
    ClassificationError,
    DegenerateDenominatorError,
    DimensionError,
    IllConditionedError,
    MarkovEmbedError,
    NonpositiveParameterError,
)
from .kernel import (
    DEFAULT_TOL,
    RealJordanDecomposition,
    Tolerances,
    as_matrix,
    is_generator,
    is_markov,
    mat_exp,
    poly_in,
    scale_of,
)

# Hyperbola search geometry (see hyperbola_search): base grid per the
# documented contract, then deterministic local refinement and a
# Lipschitz branch-and-bound certification pass.
_GRID_X_DECADES = (-3.0, 3.0)
_GRID_Z_DECADES = (-3.0, 3.0)
_GRID_POINTS = 200
_REFINE_ROUNDS = 6
_REFINE_POINTS = 41
_BNB_MAX_CELLS = 400_000


class Verdict(enum.Enum):
    EMBEDDABLE = "Embeddable"
    NOT_EMBEDDABLE = "NotEmbeddable"
    UNDECIDED = "Undecided"


class Uniqueness(enum.Enum):
    UNIQUE = "Unique"
    MULTIPLE_KNOWN = "MultipleKnown"
    POSSIBLY_MORE = "PossiblyMore"
    UNKNOWN = "Unknown"


class Construction(enum.Enum):
    PRINCIPAL_LOG = "PRINCIPAL_LOG"
    POLY_SMT = "POLY_SMT"
    HYPERBOLA = "HYPERBOLA"
    EQ_INPUT_EXTREMAL_PLUS = "EQ_INPUT_EXTREMAL_PLUS"
    EQ_INPUT_EXTREMAL_MINUS = "EQ_INPUT_EXTREMAL_MINUS"


class Reason(enum.Enum):
    DET_NONPOSITIVE = "DET_NONPOSITIVE"
    ZERO_DIAGONAL = "ZERO_DIAGONAL"
    UNIT_CIRCLE_EIGENVALUE = "UNIT_CIRCLE_EIGENVALUE"
    NEGATIVE_EIGENVALUE_CULVER = "NEGATIVE_EIGENVALUE_CULVER"
    TRANSITIVITY_VIOLATION = "TRANSITIVITY_VIOLATION"
    SPECTRUM_NOT_POSITIVE = "SPECTRUM_NOT_POSITIVE"
    LOG_NOT_GENERATOR = "LOG_NOT_GENERATOR"
    NO_BRANCH_FEASIBLE = "NO_BRANCH_FEASIBLE"
    K_RANGE_EMPTY = "K_RANGE_EMPTY"
    EXCEEDS_EXTREMAL_BOUND = "EXCEEDS_EXTREMAL_BOUND"
    SEARCH_INCONCLUSIVE = "SEARCH_INCONCLUSIVE"
    NEAR_BOUNDARY = "NEAR_BOUNDARY"
    ILL_CONDITIONED = "ILL_CONDITIONED"
    NOT_EQUAL_INPUT = "NOT_EQUAL_INPUT"
    RESIDUAL_CHECK_FAILED = "RESIDUAL_CHECK_FAILED"


class SearchStatus(enum.Enum):
    FOUND = "Found"
    INFEASIBLE = "Infeasible"
    INCONCLUSIVE = "Inconclusive"


@dataclasses.dataclass(frozen=True)
class HyperbolaPoint:
    """Point (x, y, z) with y*z - x^2 = 1, z > 0, parametrising a real
    square root of -I_2."""

    x: float
    y: float
    z: float


@dataclasses.dataclass(frozen=True)
class GeneratorCandidate:
    matrix: np.ndarray
    branch: int
    construction: Construction
    residual: float


@dataclasses.dataclass(frozen=True)
class EmbeddingResult:
    verdict: Verdict
    generators: tuple[GeneratorCandidate, ...]
    uniqueness: Uniqueness
    reason: Reason | None = None
    case: CaseTag | None = None

    def __post_init__(self) -> None:
        if (self.verdict is Verdict.EMBEDDABLE) != bool(self.generators):
            raise ValueError("verdict Embeddable iff generators nonempty")
        if self.verdict is Verdict.UNDECIDED and self.reason is None:
            raise ValueError("Undecided requires a reason")


def _embeddable(gens, uniqueness, case=None) -> EmbeddingResult:
    return EmbeddingResult(Verdict.EMBEDDABLE, tuple(gens), uniqueness, None, case)


def _not_embeddable(reason, case=None) -> EmbeddingResult:
    return EmbeddingResult(Verdict.NOT_EMBEDDABLE, (), Uniqueness.UNKNOWN, reason, case)


def _undecided(reason, case=None) -> EmbeddingResult:
    return EmbeddingResult(Verdict.UNDECIDED, (), Uniqueness.UNKNOWN, reason, case)


def _candidate(
    M: np.ndarray,
    Q: np.ndarray,
    branch: int,
    construction: Construction,
    tol: Tolerances,
) -> GeneratorCandidate | None:
    """Re-verify a proposed generator; None when it fails either check."""
    if not is_generator(Q, tol):
        return None
    residual = float(np.abs(mat_exp(Q) - M).max())
    if residual > tol.residual * scale_of(M):
        return None
    return GeneratorCandidate(Q, branch, construction, residual)


# ---------------------------------------------------------------------------
# closed-form logarithm coefficients (spectral mapping)
# ---------------------------------------------------------------------------


def _real_part(values, scale: float) -> list[float]:
    worst = max(abs(v.imag) for v in values)
    if worst > 1e-8 * max(1.0, scale):
        raise IllConditionedError(f"coefficients not real: imaginary size {worst:g}")
    return [float(v.real) for v in values]


def _require_positive(*lams: float) -> None:
    if min(lams) <= 0.0:
        raise DegenerateDenominatorError(
            "principal-branch formula needs positive eigenvalues"
        )


def _coeffs_two_distinct(mu: float, nu: float, tol: Tolerances) -> list[float]:
    _require_positive(1.0 + mu, 1.0 + nu)
    if abs(mu - nu) < tol.spec_cluster * max(1.0, abs(mu), abs(nu)):
        raise DegenerateDenominatorError("mu and nu coincide")
    if min(abs(mu), abs(nu)) < tol.spec_cluster:
        raise DegenerateDenominatorError("eigenvalue shift vanishes")
    den = mu * nu * (mu - nu)
    alpha = (mu**2 * math.log1p(nu) - nu**2 * math.log1p(mu)) / den
    beta = (-mu * math.log1p(nu) + nu * math.log1p(mu)) / den
    return [alpha, beta]


def _coeffs_jordan_pair(mu: float, tol: Tolerances) -> list[float]:
    _require_positive(1.0 + mu)
    if abs(mu) < tol.spec_cluster or abs(1.0 + mu) < tol.spec_cluster:
        raise DegenerateDenominatorError("degenerate shift in confluent pair")
    alpha = 2.0 * math.log1p(mu) / mu - 1.0 / (1.0 + mu)
    beta = 1.0 / (mu * (1.0 + mu)) - math.log1p(mu) / mu**2
    return [alpha, beta]


def _coeffs_complex_pair(lam: complex, k: int, tol: Tolerances) -> list[float]:
    mu = lam - 1.0
    if abs(mu.imag) < tol.spec_cluster:
        raise DegenerateDenominatorError("pair is not genuinely complex")
    zk = np.log(lam) + 2j * math.pi * k
    den = abs(mu) ** 2 * (mu.conjugate() - mu)
    alpha = (mu.conjugate() ** 2 * zk - mu**2 * zk.conjugate()) / den
    beta = (-mu.conjugate() * zk + mu * zk.conjugate()) / den
    return _real_part([alpha, beta], abs(zk))


def _coeffs_three_distinct(lams: list[float], tol: Tolerances) -> list[float]:
    _require_positive(*lams)
    mus = [lam - 1.0 for lam in lams]
    ms = []
    for i in range(3):
        m = mus[i]
        for j in range(3):
            if j != i:
                m *= mus[j] - mus[i]
        if abs(m) < tol.spec_cluster**2:
            raise DegenerateDenominatorError("near-coincident eigenvalues")
        ms.append(m)
    logs = [math.log(lam) for lam in lams]
    alpha = sum(
        (mus[(i + 1) % 3] * mus[(i + 2) % 3] / ms[i]) * logs[i] for i in range(3)
    )
    beta = -sum(((sum(mus) - mus[i]) / ms[i]) * logs[i] for i in range(3))
    gamma = sum(logs[i] / ms[i] for i in range(3))
    return [alpha, beta, gamma]


def _coeffs_real_plus_pair(
    lam: float, theta: complex, k: int, tol: Tolerances
) -> list[float]:
    _require_positive(lam)
    mu = lam - 1.0
    nu = theta - 1.0
    if abs(nu.imag) < tol.spec_cluster:
        raise DegenerateDenominatorError("pair is not genuinely complex")
    zk = np.log(theta) + 2j * math.pi * k
    m1 = mu * (mu - nu) * (mu - nu.conjugate())
    m2 = nu * (nu - mu) * (nu - nu.conjugate())
    m3 = nu.conjugate() * (nu.conjugate() - mu) * (nu.conjugate() - nu)
    if min(abs(m1), abs(m2)) < tol.spec_cluster**3:
        raise DegenerateDenominatorError("near-coincident eigenvalues")
    lg = math.log(lam)
    alpha = (abs(nu) ** 2 / m1) * lg + (mu * nu.conjugate() / m2) * zk + (
        mu * nu / m3
    ) * zk.conjugate()
    beta = (
        -((nu + nu.conjugate()) / m1) * lg
        - ((mu + nu.conjugate()) / m2) * zk
        - ((mu + nu) / m3) * zk.conjugate()
    )
    gamma = lg / m1 + zk / m2 + zk.conjugate() / m3
    return _real_part([alpha, beta, gamma], abs(zk) + abs(lg))


def _coeffs_jordan3(lam: float, tol: Tolerances) -> list[float]:
    _require_positive(lam)
    mu = lam - 1.0
    if abs(mu) < tol.spec_cluster:
        raise DegenerateDenominatorError("eigenvalue shift vanishes")
    rhs = np.array([math.log(lam), 1.0 / lam, -1.0 / lam**2])
    inv = np.array(
        [
            [3.0 / mu, -2.0, mu / 2.0],
            [-3.0 / mu**2, 3.0 / mu, -1.0],
            [1.0 / mu**3, -1.0 / mu**2, 1.0 / (2.0 * mu)],
        ]
    )
    return list(inv @ rhs)


def _coeffs_simple_plus_jordan(l1: float, l2: float, tol: Tolerances) -> list[float]:
    _require_positive(l1, l2)
    m1, m2 = l1 - 1.0, l2 - 1.0
    if abs(m1 - m2) < tol.spec_cluster or min(abs(m1), abs(m2)) < tol.spec_cluster:
        raise DegenerateDenominatorError("near-coincident eigenvalues")
    dd = (m1 - m2) ** 2
    inv = np.array(
        [
            [m2**2 / (m1 * dd), m1 * (2 * m1 - 3 * m2) / (m2 * dd), -m1 / (m1 - m2)],
            [-2 * m2 / (m1 * dd), (3 * m2**2 - m1**2) / (m2**2 * dd), (m1 + m2) / (m2 * (m1 - m2))],
            [1.0 / (m1 * dd), (m1 - 2 * m2) / (m2**2 * dd), -1.0 / (m2 * (m1 - m2))],
        ]
    )
    rhs = np.array([math.log(l1), math.log(l2), 1.0 / l2])
    return list(inv @ rhs)


def smt_coeffs(
    case: CaseTag,
    eigen_data: dict[str, complex] | None = None,
    k: int = 0,
    tol: Tolerances = DEFAULT_TOL,
) -> list[float]:
    """Real coefficients c with poly_in(c, A) the branch-k real logarithm.

    Dispatches on the case pattern to the matching closed-form solution of
    the spectral-mapping equations.  Raises
    :class:`DegenerateDenominatorError` when eigenvalue differences or the
    denominators fall below the clustering threshold; callers reroute to
    the confluent variant or report Undecided.
    """
    eig = case.eigen if eigen_data is None else eigen_data
    p = case.pattern

    single = {
        Pattern.D2_SIMPLE,
        Pattern.D3_DEG2_1_1_L,
        Pattern.D3_DEG2_1_L_L_POS,
        Pattern.D3_DEG2_1_L_L_NEG,
        Pattern.D4_DEG2_TRIPLE_ONE,
        Pattern.D4_DEG2_TRIPLE_L,
        Pattern.D4_DEG2_DOUBLE_POS,
    }
    if p in single:
        lam = complex(eig["lambda"]).real
        if lam <= 0.0 or lam >= 1.0:
            raise DegenerateDenominatorError(f"no principal branch at lambda={lam:g}")
        return [-math.log(lam) / (1.0 - lam)]
    if p in (Pattern.D3_SIMPLE_REAL, Pattern.D4_DEG3_TWO_ONES_DISTINCT):
        mu = complex(eig["lambda1"]).real - 1.0
        nu = complex(eig["lambda2"]).real - 1.0
        return _coeffs_two_distinct(mu, nu, tol)
    if p is Pattern.D4_DEG3_DOUBLE_L2_POS:
        mu = complex(eig["lambda1"]).real - 1.0
        nu = complex(eig["lambda2"]).real - 1.0
        return _coeffs_two_distinct(mu, nu, tol)
    if p in (
        Pattern.D3_JORDAN2,
        Pattern.D4_DEG3_TWO_ONES_JORDAN,
        Pattern.D4_DEG3_L_JORDAN_L,
    ):
        return _coeffs_jordan_pair(complex(eig["lambda"]).real - 1.0, tol)
    if p in (Pattern.D3_COMPLEX_PAIR, Pattern.D4_DEG3_COMPLEX):
        return _coeffs_complex_pair(complex(eig["lambda"]), k, tol)
    if p is Pattern.D4_SIMPLE_REAL:
        lams = [complex(eig[f"lambda{i}"]).real for i in (1, 2, 3)]
        return _coeffs_three_distinct(lams, tol)
    if p is Pattern.D4_SIMPLE_COMPLEX:
        return _coeffs_real_plus_pair(
            complex(eig["lambda"]).real, complex(eig["theta"]), k, tol
        )
    if p is Pattern.D4_JORDAN3:
        return _coeffs_jordan3(complex(eig["lambda"]).real, tol)
    if p is Pattern.D4_MIXED_JORDAN2:
        return _coeffs_simple_plus_jordan(
            complex(eig["lambda1"]).real, complex(eig["lambda2"]).real, tol
        )
    raise DegenerateDenominatorError(f"no coefficient formula for {p}")


# ---------------------------------------------------------------------------
# equal-input d=3 with a negative double eigenvalue
# ---------------------------------------------------------------------------


def delta_min(c1: float, c2: float, c3: float) -> float:
    """Smallest decay exponent reachable on the ray of (c1, c2, c3).

    Positively homogeneous of degree 0; its value pi*sqrt(3) at equal
    parameters is the global minimum.
    """
    if min(c1, c2, c3) <= 0.0:
        raise NonpositiveParameterError("parameters must be strictly positive")
    c = c1 + c2 + c3
    kappa = max(c1, c2, c3)
    return math.pi * kappa * math.sqrt(c) / math.sqrt(c1 * c2 * c3)


def eq_input_extremal_generators(
    c1: float, c2: float, c3: float
) -> tuple[np.ndarray, np.ndarray]:
    """The two generators whose exponential is the extremal equal-input
    matrix on the ray of (c1, c2, c3)."""
    if min(c1, c2, c3) <= 0.0:
        raise NonpositiveParameterError("parameters must be strictly positive")
    c = c1 + c2 + c3
    kappa = max(c1, c2, c3)
    pref = math.pi / math.sqrt(c * c1 * c2 * c3)

    def build(sign: float) -> np.ndarray:
        return pref * np.array(
            [
                [-kappa * (c2 + c3), c2 * (kappa + sign * c3), c3 * (kappa - sign * c2)],
                [c1 * (kappa - sign * c3), -kappa * (c1 + c3), c3 * (kappa + sign * c1)],
                [c1 * (kappa + sign * c2), c2 * (kappa - sign * c1), -kappa * (c1 + c2)],
            ]
        )

    return build(1.0), build(-1.0)


def _equal_input_params(
    M: np.ndarray, tol: Tolerances
) -> tuple[np.ndarray, float] | None:
    """Column parameters (c_1..c_d, c) if M is equal-input, else None."""
    d = M.shape[0]
    c_vec = np.empty(d)
    for j in range(d):
        off = [M[i, j] for i in range(d) if i != j]
        c_vec[j] = float(np.mean(off))
        if max(abs(v - c_vec[j]) for v in off) > 10.0 * tol.rowsum:
            return None
    c = float(c_vec.sum())
    rebuilt = (1.0 - c) * np.eye(d) + np.tile(c_vec, (d, 1))
    if np.abs(rebuilt - M).max() > 10.0 * tol.rowsum:
        return None
    return c_vec, c


def embed_d3_eq_input_neg(
    M: object, tol: Tolerances = DEFAULT_TOL, case: CaseTag | None = None
) -> EmbeddingResult:
    """Equal-input d=3 matrix with a negative double eigenvalue.

    Embeddable iff the summatory parameter stays within the extremal bound
    of its ray; in that case two commuting-deformation generators are
    produced (exactly the extremal pair at the boundary).
    """
    A = as_matrix(M)
    params = _equal_input_params(A, tol)
    if params is None:
        return _undecided(Reason.NOT_EQUAL_INPUT, case)
    c_vec, c = params
    if c_vec.min() <= tol.nonneg:
        return _undecided(Reason.NEAR_BOUNDARY, case)

    dmin = delta_min(*c_vec)
    cmax = 1.0 + math.exp(-dmin)
    excess = c - cmax
    boundary_eps = 1e-12 * max(1.0, c)
    if excess > tol.nonneg:
        return _not_embeddable(Reason.EXCEEDS_EXTREMAL_BOUND, case)
    if excess > boundary_eps:
        return _undecided(Reason.NEAR_BOUNDARY, case)
    if c - 1.0 <= tol.nonneg:
        return _undecided(Reason.NEAR_BOUNDARY, case)

    qp, qm = eq_input_extremal_generators(*c_vec)
    if abs(excess) <= boundary_eps:
        tau = 0.0
    else:
        tau = math.log((cmax - 1.0) / (c - 1.0)) / cmax
    scaled = (cmax / c) * c_vec
    qc = np.tile(scaled, (3, 1)) - cmax * np.eye(3)

    gens = []
    for Q, construction in (
        (qp + tau * qc, Construction.EQ_INPUT_EXTREMAL_PLUS),
        (qm + tau * qc, Construction.EQ_INPUT_EXTREMAL_MINUS),
    ):
        cand = _candidate(A, Q, 0, construction, tol)
        if cand is not None:
            gens.append(cand)
    if not gens:
        return _undecided(Reason.RESIDUAL_CHECK_FAILED, case)
    return _embeddable(gens, Uniqueness.MULTIPLE_KNOWN, case)


# ---------------------------------------------------------------------------
# hyperbola search over the real square roots of -I
# ---------------------------------------------------------------------------


def _nullspace(B: np.ndarray, tol: Tolerances) -> np.ndarray:
    _u, sv, vh = np.linalg.svd(B)
    threshold = tol.rank * sv[0] if sv[0] > 0 else np.inf
    ns = vh[sv < threshold].T
    if ns.shape[1] == 0:
        # fall back to the smallest singular direction
        ns = vh[-1:].T
    return ns


def _fix_sign(v: np.ndarray) -> np.ndarray:
    return v if v[int(np.argmax(np.abs(v)))] >= 0 else -v


def _pair_decomposition(
    M: np.ndarray, fixed_eigs: list[float], pair_value: float, tol: Tolerances
) -> RealJordanDecomposition:
    """Similarity with the repeated-pair eigenspace in the last two columns.

    The first column is the all-ones eigenvector, so any log candidate
    assembled in this basis has zero row sums by construction.  Directions
    for eigenvalues appearing more than once are drawn from one orthonormal
    pool per eigenvalue (the pair reserves the first two).
    """
    d = M.shape[0]
    ones = np.ones(d)
    pools: dict[float, list[np.ndarray]] = {}

    def pool(lam: float) -> list[np.ndarray]:
        if lam not in pools:
            ns = _nullspace(M - lam * np.eye(d), tol)
            if lam == 1.0:
                u = ones / math.sqrt(d)
                ns = ns - np.outer(u, u @ ns)
                q, r = np.linalg.qr(ns)
                ns = q[:, np.abs(np.diag(r)) > 1e-8]
            pools[lam] = [_fix_sign(ns[:, j]) for j in range(ns.shape[1])]
        return pools[lam]

    if len(pool(pair_value)) < 2:
        raise IllConditionedError("pair eigenspace not numerically two-dimensional")
    pair_cols = pool(pair_value)[:2]
    counters = {pair_value: 2}
    columns = [ones]
    for lam in fixed_eigs:
        i = counters.get(lam, 0)
        counters[lam] = i + 1
        if i >= len(pool(lam)):
            raise IllConditionedError("eigenspace deficient for the fixed block")
        columns.append(pool(lam)[i])
    columns.extend(pair_cols)

    T = np.column_stack(columns)
    canonical = np.diag(np.array([1.0] + list(fixed_eigs) + [pair_value, pair_value]))
    cond = float(np.linalg.cond(T))
    return RealJordanDecomposition(T, canonical, cond, cond > 1e8)


@dataclasses.dataclass(frozen=True)
class _AffineConstraints:
    """Off-diagonal entries of R(x,y,z) = base + angle*(x Wx + y Wy + z Wz)."""

    f: np.ndarray  # constant part per off-diagonal entry
    a: np.ndarray  # x coefficient (angle folded in)
    b: np.ndarray  # y coefficient
    c: np.ndarray  # z coefficient

    def violation(self, x, y, z):
        g = (
            self.f[:, None]
            + self.a[:, None] * np.atleast_1d(x)[None, :]
            + self.b[:, None] * np.atleast_1d(y)[None, :]
            + self.c[:, None] * np.atleast_1d(z)[None, :]
        )
        return np.max(-g, axis=0)


def _build_constraints(
    decomp: RealJordanDecomposition,
    fixed_block: np.ndarray,
    log_modulus: float,
    angle: float,
) -> _AffineConstraints:
    S = decomp.T
    d = S.shape[0]
    Sinv = np.linalg.inv(S)
    fixed = scipy.linalg.block_diag(np.atleast_2d(fixed_block), log_modulus * np.eye(2))
    base = S @ fixed @ Sinv

    def wrap(N: np.ndarray) -> np.ndarray:
        return S @ scipy.linalg.block_diag(np.zeros((d - 2, d - 2)), N) @ Sinv

    Wx = wrap(np.array([[1.0, 0.0], [0.0, -1.0]]))
    Wy = wrap(np.array([[0.0, 0.0], [1.0, 0.0]]))
    Wz = wrap(np.array([[0.0, -1.0], [0.0, 0.0]]))

    off = ~np.eye(d, dtype=bool)
    return _AffineConstraints(
        f=base[off], a=angle * Wx[off], b=angle * Wy[off], c=angle * Wz[off]
    )


def _grid_search(cons: _AffineConstraints) -> tuple[float, float, float]:
    """Deterministic coarse grid plus local refinement; returns (V, x, z)."""
    half = _GRID_POINTS // 2
    xs = np.concatenate(
        [-np.logspace(_GRID_X_DECADES[1], _GRID_X_DECADES[0], half),
         np.logspace(_GRID_X_DECADES[0], _GRID_X_DECADES[1], half)]
    )
    zs = np.logspace(_GRID_Z_DECADES[0], _GRID_Z_DECADES[1], _GRID_POINTS)
    X, Z = np.meshgrid(xs, zs, indexing="ij")
    xf, zf = X.ravel(), Z.ravel()
    V = cons.violation(xf, (1.0 + xf**2) / zf, zf)
    k = int(np.argmin(V))
    best_v, best_x, best_z = float(V[k]), float(xf[k]), float(zf[k])

    wx = max(abs(best_x), 1e-2)
    for _ in range(_REFINE_ROUNDS):
        lx = np.linspace(best_x - wx, best_x + wx, _REFINE_POINTS)
        lz = best_z * np.exp(np.linspace(-wx / max(best_z, 1.0), wx / max(best_z, 1.0), _REFINE_POINTS))
        lz = lz[lz > 0]
        X, Z = np.meshgrid(lx, lz, indexing="ij")
        xf, zf = X.ravel(), Z.ravel()
        V = cons.violation(xf, (1.0 + xf**2) / zf, zf)
        k = int(np.argmin(V))
        if V[k] < best_v:
            best_v, best_x, best_z = float(V[k]), float(xf[k]), float(zf[k])
        wx *= 0.25
    return best_v, best_x, best_z


def _cone_margin(cons: _AffineConstraints) -> float:
    """Certified lower bound of the worst violation over asymptotic
    directions (the cone y z = x^2, y + z = 1)."""
    n = 4001
    phi = np.linspace(0.0, math.pi / 2.0, n)
    h = phi[1] - phi[0]
    lip = float(np.max(np.abs(cons.a) + np.abs(cons.b) + np.abs(cons.c)))
    worst = np.inf
    for sign in (1.0, -1.0):
        x = sign * 0.5 * np.sin(2.0 * phi)
        y = np.sin(phi) ** 2
        z = np.cos(phi) ** 2
        g = (
            cons.a[:, None] * x[None, :]
            + cons.b[:, None] * y[None, :]
            + cons.c[:, None] * z[None, :]
        )
        worst = min(worst, float(np.min(np.max(-g, axis=0))))
    return worst - lip * h / 2.0


def _bnb_certify(
    cons: _AffineConstraints, u_max: float, w_max: float, found_tol: float, margin: float
) -> tuple[bool, tuple[float, float] | None]:
    """Lipschitz branch and bound over the sheet patch |u|,|w| bounded.

    Returns (certified_infeasible, found_point).  Sheet parametrisation:
    x = sinh u, y = cosh u e^w, z = cosh u e^-w.
    """
    a_abs = np.abs(cons.a)
    b_abs = np.abs(cons.b)
    c_abs = np.abs(cons.c)

    def violation_at(u: float, w: float) -> float:
        x, ch = math.sinh(u), math.cosh(u)
        return float(cons.violation(x, ch * math.exp(w), ch * math.exp(-w))[0])

    stack = [(-u_max, u_max, -w_max, w_max)]
    processed = 0
    while stack:
        processed += 1
        if processed > _BNB_MAX_CELLS:
            return False, None
        ulo, uhi, wlo, whi = stack.pop()
        uc, wc = 0.5 * (ulo + uhi), 0.5 * (wlo + whi)
        vc = violation_at(uc, wc)
        if vc <= found_tol:
            return False, (uc, wc)
        um = max(abs(ulo), abs(uhi))
        ew, emw = math.exp(whi), math.exp(-wlo)
        ch, sh = math.cosh(um), math.sinh(um)
        lu = float(np.max(a_abs * ch + (b_abs * ew + c_abs * emw) * sh))
        lw = float(np.max((b_abs * ew + c_abs * emw) * ch))
        bound = vc - 0.5 * (lu * (uhi - ulo) + lw * (whi - wlo))
        if bound > margin:
            continue  # certified positive on this cell
        if lu * (uhi - ulo) >= lw * (whi - wlo):
            stack.append((ulo, uc, wlo, whi))
            stack.append((uc, uhi, wlo, whi))
        else:
            stack.append((ulo, uhi, wlo, wc))
            stack.append((ulo, uhi, wc, whi))
    return True, None


def hyperbola_search(
    decomp: RealJordanDecomposition,
    fixed_block: object,
    log_modulus: float,
    angle: float,
    tol: Tolerances = DEFAULT_TOL,
) -> tuple[SearchStatus, HyperbolaPoint | None]:
    """Feasibility of R(x,y,z) = T (fixed + (log_modulus I + angle I_xyz)) T^-1.

    The last two columns of ``decomp.T`` must span the repeated-eigenvalue
    pair eigenspace; ``fixed_block`` is the leading log-domain block.  Each
    off-diagonal nonnegativity constraint is affine in (x, y, z), searched
    over the sheet y z - x^2 = 1, z > 0.

    Found        -- a point with worst violation <= nonneg tolerance
    Infeasible   -- violation certified > 10 x nonneg everywhere (Lipschitz
                    branch-and-bound on a compact patch plus an asymptotic
                    cone bound covering z -> 0, z -> inf)
    Inconclusive -- neither certificate obtained
    """
    fixed = np.atleast_2d(np.asarray(fixed_block, dtype=float))
    cons = _build_constraints(decomp, fixed, log_modulus, angle)

    best_v, x0, z0 = _grid_search(cons)
    if best_v <= tol.nonneg:
        y0 = (1.0 + x0 * x0) / z0
        return SearchStatus.FOUND, HyperbolaPoint(x0, y0, z0)

    margin = 10.0 * tol.nonneg
    delta = _cone_margin(cons)
    if delta <= margin:
        return SearchStatus.INCONCLUSIVE, None
    C = float(np.max(np.abs(cons.f)))
    L2 = float(np.max(np.sqrt(cons.a**2 + cons.b**2 + cons.c**2)))
    r0 = max(3.0, (C + margin + 3.0 * delta + 3.0 * L2) / ((2.0 / 3.0) * delta))
    reach = math.acosh(max(r0 / 2.0, 1.0 + 1e-12))
    ok, point = _bnb_certify(cons, reach, reach, tol.nonneg, margin)
    if point is not None:
        u, w = point
        x = math.sinh(u)
        return SearchStatus.FOUND, HyperbolaPoint(
            x, math.cosh(u) * math.exp(w), math.cosh(u) * math.exp(-w)
        )
    if ok:
        return SearchStatus.INFEASIBLE, None
    return SearchStatus.INCONCLUSIVE, None


def rotation_log(
    decomp: RealJordanDecomposition,
    fixed_block: object,
    log_modulus: float,
    angle: float,
    point: HyperbolaPoint,
) -> np.ndarray:
    """Assemble the real logarithm a hyperbola point parametrises."""
    S = decomp.T
    d = S.shape[0]
    rot = log_modulus * np.eye(2) + angle * np.array(
        [[point.x, -point.z], [point.y, -point.x]]
    )
    block = scipy.linalg.block_diag(np.atleast_2d(np.asarray(fixed_block, float)), rot)
    return S @ block @ np.linalg.inv(S)


# ---------------------------------------------------------------------------
# case deciders
# ---------------------------------------------------------------------------


def embed_d2(M: object, tol: Tolerances = DEFAULT_TOL) -> EmbeddingResult:
    """d=2: embeddable iff a + b < 1, with the unique closed-form generator.

    The comparison is exact on the matrix entries (the boundary a + b = 1
    is singular, hence definitely not embeddable).
    """
    A = as_matrix(M)
    if A.shape[0] != 2:
        raise DimensionError("embed_d2 expects a 2x2 matrix")
    a, b = float(A[0, 1]), float(A[1, 0])
    s = a + b
    if s >= 1.0:
        return _not_embeddable(Reason.DET_NONPOSITIVE)
    if s <= 0.0:
        zero = GeneratorCandidate(np.zeros((2, 2)), 0, Construction.PRINCIPAL_LOG, 0.0)
        return _embeddable([zero], Uniqueness.UNIQUE)
    Q = (-math.log1p(-s) / s) * (A - np.eye(2))
    cand = _candidate(A, Q, 0, Construction.POLY_SMT, tol)
    if cand is None:
        return _undecided(Reason.RESIDUAL_CHECK_FAILED)
    return _embeddable([cand], Uniqueness.UNIQUE)


def uniqueness_certificates(
    M: object, Q: object, tol: Tolerances = DEFAULT_TOL
) -> Uniqueness:
    """Global uniqueness certificates for a verified generator.

    Unique when min m_ii > 1/2 (the principal log is then the sole
    candidate), or when det(M) min m_ii > e^-pi prod m_ii; Unknown
    otherwise.
    """
    A = as_matrix(M)
    diag = np.diag(A)
    if float(diag.min()) > 0.5:
        return Uniqueness.UNIQUE
    det = float(np.linalg.det(A))
    if det * float(diag.min()) > math.exp(-math.pi) * float(np.prod(diag)):
        return Uniqueness.UNIQUE
    return Uniqueness.UNKNOWN


def _sign_gate(lam: float, tol: Tolerances) -> str:
    if abs(lam) <= tol.nonneg or abs(1.0 - lam) <= tol.nonneg:
        return "boundary"
    return "pos" if lam > 0.0 else "neg"


def _rotation_branch_range(log_modulus: float, odd: bool, slack: float = 1e-9) -> list[int]:
    """Branch indices k whose rotation angle fits the generator spectrum.

    Angles are 2k*pi (odd=False) or (2k+1)*pi (odd=True), admissible while
    |angle| <= |log_modulus| (+ slack for boundary cases).
    """
    limit = abs(log_modulus) * (1.0 + 1e-12) + slack
    ks = []
    if odd:
        n = 0
        while (2 * n + 1) * math.pi <= limit:
            ks.extend([n, -n - 1])
            n += 1
    else:
        n = 1
        while 2 * n * math.pi <= limit:
            ks.extend([n, -n])
            n += 1
    return sorted(ks)


def _search_pair_case(
    A, tag, fixed_eigs, pair_value, odd, principal, tol, all_branches
) -> EmbeddingResult:
    """Shared driver for cases whose extra logs live on the hyperbola.

    ``principal`` is a verified candidate or None.  With a principal
    generator in hand the extra branches only affect uniqueness and are
    searched on demand; without one they decide embeddability.
    """
    log_mod = math.log(abs(pair_value))
    ks = _rotation_branch_range(log_mod, odd)
    gens = [principal] if principal is not None else []

    if principal is not None and not all_branches:
        if not ks:
            return _embeddable(gens, Uniqueness.UNIQUE, tag)
        u = uniqueness_certificates(A, principal.matrix, tol)
        u = Uniqueness.POSSIBLY_MORE if u is Uniqueness.UNKNOWN else u
        return _embeddable(gens, u, tag)

    if not ks and principal is None:
        return _not_embeddable(Reason.K_RANGE_EMPTY, tag)

    decomp = _pair_decomposition(A, fixed_eigs, pair_value, tol)
    # fixed log block: 0 for each unit eigenvalue, log(lam) otherwise
    fixed_block = np.diag([0.0] + [0.0 if l == 1.0 else math.log(l) for l in fixed_eigs])

    inconclusive = False
    found_extra = False
    for k in ks:
        angle = (2 * k + 1) * math.pi if odd else 2 * k * math.pi
        status, point = hyperbola_search(decomp, fixed_block, log_mod, angle, tol)
        if status is SearchStatus.FOUND and point is not None:
            Q = rotation_log(decomp, fixed_block, log_mod, angle, point)
            cand = _candidate(A, Q, k, Construction.HYPERBOLA, tol)
            if cand is not None:
                gens.append(cand)
                found_extra = True
            else:
                inconclusive = True
        elif status is SearchStatus.INCONCLUSIVE:
            inconclusive = True

    if gens:
        if len(gens) > 1:
            return _embeddable(gens, Uniqueness.MULTIPLE_KNOWN, tag)
        u = uniqueness_certificates(A, gens[0].matrix, tol)
        if u is Uniqueness.UNKNOWN:
            certified_alone = (
                principal is not None and not found_extra and not inconclusive
            )
            u = Uniqueness.UNIQUE if certified_alone else Uniqueness.POSSIBLY_MORE
        return _embeddable(gens, u, tag)
    if inconclusive:
        return _undecided(Reason.SEARCH_INCONCLUSIVE, tag)
    return _not_embeddable(Reason.NO_BRANCH_FEASIBLE, tag)


def embed_d3_deg2(
    M: object,
    tag: CaseTag | None = None,
    tol: Tolerances = DEFAULT_TOL,
    all_branches: bool = False,
) -> EmbeddingResult:
    """d=3 with minimal polynomial degree 2 and a nonnegative eigenvalue."""
    A = as_matrix(M)
    if tag is None:
        tag = classify(A, tol)
    lam = complex(tag.eigen["lambda"]).real
    gate = _sign_gate(lam, tol)
    if gate == "boundary":
        return _undecided(Reason.NEAR_BOUNDARY, tag)
    if gate == "neg":
        if tag.pattern is Pattern.D3_DEG2_1_1_L:
            return _not_embeddable(Reason.NEGATIVE_EIGENVALUE_CULVER, tag)
        return embed_d3_eq_input_neg(A, tol, tag)

    Q = (-math.log(lam) / (1.0 - lam)) * (A - np.eye(3))
    cand = _candidate(A, Q, 0, Construction.POLY_SMT, tol)
    if cand is None:
        return _undecided(Reason.RESIDUAL_CHECK_FAILED, tag)
    if tag.pattern is Pattern.D3_DEG2_1_1_L:
        return _embeddable([cand], Uniqueness.UNIQUE, tag)

    # repeated pair: extra rotational branches exist only for tiny lambda
    branch_bound = abs(math.log(lam)) / (2.0 * math.pi * math.sqrt(3.0))
    if branch_bound < 1.0:
        return _embeddable([cand], Uniqueness.UNIQUE, tag)
    if not all_branches:
        u = uniqueness_certificates(A, Q, tol)
        u = Uniqueness.POSSIBLY_MORE if u is Uniqueness.UNKNOWN else u
        return _embeddable([cand], u, tag)
    return _search_pair_case(A, tag, [], lam, odd=False, principal=cand,
                             tol=tol, all_branches=True)


def embed_d3_cyclic_real(
    M: object, tag: CaseTag | None = None, tol: Tolerances = DEFAULT_TOL
) -> EmbeddingResult:
    """d=3 cyclic with real spectrum: positive eigenvalues and a generator
    polynomial logarithm are jointly necessary and sufficient."""
    A = as_matrix(M)
    if tag is None:
        tag = classify(A, tol)
    lams = (
        [complex(tag.eigen["lambda1"]).real, complex(tag.eigen["lambda2"]).real]
        if tag.pattern is Pattern.D3_SIMPLE_REAL
        else [complex(tag.eigen["lambda"]).real]
    )
    for lam in lams:
        gate = _sign_gate(lam, tol)
        if gate == "boundary":
            return _undecided(Reason.NEAR_BOUNDARY, tag)
        if gate == "neg":
            return _not_embeddable(Reason.NEGATIVE_EIGENVALUE_CULVER, tag)
    try:
        coeffs = smt_coeffs(tag, tol=tol)
    except DegenerateDenominatorError:
        return _undecided(Reason.ILL_CONDITIONED, tag)
    Q = poly_in(coeffs, A - np.eye(3))
    if not is_generator(Q, tol):
        return _not_embeddable(Reason.LOG_NOT_GENERATOR, tag)
    cand = _candidate(A, Q, 0, Construction.POLY_SMT, tol)
    if cand is None:
        return _undecided(Reason.RESIDUAL_CHECK_FAILED, tag)
    return _embeddable([cand], Uniqueness.UNIQUE, tag)


def _complex_branch_window(lam: complex, slope: float) -> list[int]:
    """Branch indices compatible with the generator eigenvalue sector
    |Im| <= slope * |Re| (slope = cot(pi/d))."""
    log_mod = abs(math.log(abs(lam)))
    arg = math.atan2(lam.imag, lam.real)
    limit = slope * log_mod * (1.0 + 1e-12) + 1e-9
    kmax = int(math.floor((limit + abs(arg)) / (2.0 * math.pi))) + 1
    return list(range(-kmax, kmax + 1))


def _enumerate_complex_branches(
    A: np.ndarray, tag: CaseTag, slope: float, tol: Tolerances
) -> EmbeddingResult:
    lam = complex(tag.eigen.get("theta", tag.eigen.get("lambda")))
    r = abs(lam)
    if r >= 1.0 - tol.nonneg:
        return _not_embeddable(Reason.UNIT_CIRCLE_EIGENVALUE, tag)
    if r <= tol.nonneg:
        return _not_embeddable(Reason.DET_NONPOSITIVE, tag)

    gens = []
    uncertain = False
    Ash = A - np.eye(A.shape[0])
    for k in _complex_branch_window(lam, slope):
        try:
            coeffs = smt_coeffs(tag, k=k, tol=tol)
        except DegenerateDenominatorError:
            return _undecided(Reason.ILL_CONDITIONED, tag)
        R = poly_in(coeffs, Ash)
        if not is_generator(R, tol):
            continue
        cand = _candidate(A, R, k, Construction.POLY_SMT, tol)
        if cand is not None:
            gens.append(cand)
        else:
            uncertain = True
    if not gens:
        if uncertain:
            return _undecided(Reason.RESIDUAL_CHECK_FAILED, tag)
        return _not_embeddable(Reason.NO_BRANCH_FEASIBLE, tag)
    u = Uniqueness.UNIQUE if len(gens) == 1 else Uniqueness.MULTIPLE_KNOWN
    return _embeddable(gens, u, tag)


def embed_d3_complex(
    M: object, tag: CaseTag | None = None, tol: Tolerances = DEFAULT_TOL
) -> EmbeddingResult:
    """d=3 with a complex-conjugate pair: enumerate all branch logarithms."""
    A = as_matrix(M)
    if tag is None:
        tag = classify(A, tol)
    return _enumerate_complex_branches(A, tag, slope=1.0 / math.sqrt(3.0), tol=tol)


def _principal_only(
    A: np.ndarray, tag: CaseTag, lams: list[float], tol: Tolerances
) -> EmbeddingResult:
    """Cases where the principal polynomial logarithm is the sole candidate."""
    for lam in lams:
        gate = _sign_gate(lam, tol)
        if gate == "boundary":
            return _undecided(Reason.NEAR_BOUNDARY, tag)
        if gate == "neg":
            return _not_embeddable(Reason.NEGATIVE_EIGENVALUE_CULVER, tag)
    try:
        coeffs = smt_coeffs(tag, tol=tol)
    except DegenerateDenominatorError:
        return _undecided(Reason.ILL_CONDITIONED, tag)
    Q = poly_in(coeffs, A - np.eye(A.shape[0]))
    if not is_generator(Q, tol):
        return _not_embeddable(Reason.LOG_NOT_GENERATOR, tag)
    cand = _candidate(A, Q, 0, Construction.POLY_SMT, tol)
    if cand is None:
        return _undecided(Reason.RESIDUAL_CHECK_FAILED, tag)
    return _embeddable([cand], Uniqueness.UNIQUE, tag)


def embed_d4(
    M: object,
    tag: CaseTag | None = None,
    tol: Tolerances = DEFAULT_TOL,
    all_branches: bool = False,
) -> EmbeddingResult:
    """Case dispatch for d=4 (everything except the identity)."""
    A = as_matrix(M)
    if tag is None:
        tag = classify(A, tol)
    p = tag.pattern

    if p in (Pattern.D4_DEG2_TRIPLE_ONE, Pattern.D4_DEG2_TRIPLE_L):
        lam = complex(tag.eigen["lambda"]).real
        gate = _sign_gate(lam, tol)
        if gate == "boundary":
            return _undecided(Reason.NEAR_BOUNDARY, tag)
        if gate == "neg":
            return _not_embeddable(Reason.NEGATIVE_EIGENVALUE_CULVER, tag)
        Q = (-math.log(lam) / (1.0 - lam)) * (A - np.eye(4))
        cand = _candidate(A, Q, 0, Construction.POLY_SMT, tol)
        if cand is None:
            return _undecided(Reason.RESIDUAL_CHECK_FAILED, tag)
        if p is Pattern.D4_DEG2_TRIPLE_ONE:
            # rotations inside the unit eigenspace would need purely
            # imaginary generator eigenvalues, which Gershgorin excludes
            return _embeddable([cand], Uniqueness.UNIQUE, tag)
        if not _rotation_branch_range(math.log(lam), odd=False):
            return _embeddable([cand], Uniqueness.UNIQUE, tag)
        if all_branches:
            # partial: scans one pair plane of the triple eigenspace
            res = _search_pair_case(A, tag, [lam], lam, odd=False,
                                    principal=cand, tol=tol, all_branches=True)
            if res.verdict is Verdict.EMBEDDABLE and len(res.generators) > 1:
                return _embeddable(res.generators, Uniqueness.MULTIPLE_KNOWN, tag)
        u = uniqueness_certificates(A, Q, tol)
        u = Uniqueness.POSSIBLY_MORE if u is Uniqueness.UNKNOWN else u
        return _embeddable([cand], u, tag)

    if p in (Pattern.D4_DEG2_DOUBLE_POS, Pattern.D4_DEG2_DOUBLE_NEG):
        lam = complex(tag.eigen["lambda"]).real
        gate = _sign_gate(lam, tol)
        if gate == "boundary":
            return _undecided(Reason.NEAR_BOUNDARY, tag)
        if gate == "pos":
            Q = (-math.log(lam) / (1.0 - lam)) * (A - np.eye(4))
            cand = _candidate(A, Q, 0, Construction.POLY_SMT, tol)
            if cand is None:
                return _undecided(Reason.RESIDUAL_CHECK_FAILED, tag)
            return _search_pair_case(A, tag, [1.0], lam, odd=False,
                                     principal=cand, tol=tol, all_branches=all_branches)
        return _search_pair_case(A, tag, [1.0], lam, odd=True, principal=None,
                                 tol=tol, all_branches=all_branches)

    if p in (
        Pattern.D4_DEG3_TWO_ONES_DISTINCT,
        Pattern.D4_DEG3_TWO_ONES_JORDAN,
        Pattern.D4_DEG3_L_JORDAN_L,
        Pattern.D4_SIMPLE_REAL,
        Pattern.D4_JORDAN3,
        Pattern.D4_MIXED_JORDAN2,
    ):
        keys = sorted(k for k in tag.eigen if k.startswith("lambda"))
        lams = [complex(tag.eigen[k]).real for k in keys]
        return _principal_only(A, tag, lams, tol)

    if p in (Pattern.D4_DEG3_DOUBLE_L2_POS, Pattern.D4_DEG3_DOUBLE_L2_NEG):
        l1 = complex(tag.eigen["lambda1"]).real
        l2 = complex(tag.eigen["lambda2"]).real
        gate1 = _sign_gate(l1, tol)
        if gate1 == "boundary":
            return _undecided(Reason.NEAR_BOUNDARY, tag)
        if gate1 == "neg":
            return _not_embeddable(Reason.NEGATIVE_EIGENVALUE_CULVER, tag)
        gate2 = _sign_gate(l2, tol)
        if gate2 == "boundary":
            return _undecided(Reason.NEAR_BOUNDARY, tag)
        principal = None
        if gate2 == "pos":
            try:
                coeffs = smt_coeffs(tag, tol=tol)
                principal = _candidate(
                    A, poly_in(coeffs, A - np.eye(4)), 0, Construction.POLY_SMT, tol
                )
            except DegenerateDenominatorError:
                return _undecided(Reason.ILL_CONDITIONED, tag)
            if principal is None:
                # k = 0 exhausted; rotations at k != 0 may still embed
                return _search_pair_case(A, tag, [l1], l2, odd=False, principal=None,
                                         tol=tol, all_branches=all_branches)
            return _search_pair_case(A, tag, [l1], l2, odd=False, principal=principal,
                                     tol=tol, all_branches=all_branches)
        return _search_pair_case(A, tag, [l1], l2, odd=True, principal=None,
                                 tol=tol, all_branches=all_branches)

    if p is Pattern.D4_DEG3_COMPLEX:
        return _enumerate_complex_branches(A, tag, slope=1.0, tol=tol)

    if p is Pattern.D4_SIMPLE_COMPLEX:
        lam = complex(tag.eigen["lambda"]).real
        gate = _sign_gate(lam, tol)
        if gate == "boundary":
            return _undecided(Reason.NEAR_BOUNDARY, tag)
        if gate == "neg":
            return _not_embeddable(Reason.NEGATIVE_EIGENVALUE_CULVER, tag)
        return _enumerate_complex_branches(A, tag, slope=1.0, tol=tol)

    raise MarkovEmbedError(f"embed_d4 cannot handle pattern {p}")


_ZERO_GEN = {2: np.zeros((2, 2)), 3: np.zeros((3, 3)), 4: np.zeros((4, 4))}


def decide(
    M: object,
    tol: Tolerances = DEFAULT_TOL,
    all_branches: bool = False,
) -> EmbeddingResult:
    """Full embeddability decision for a Markov matrix of dimension 2-4.

    Runs the necessary-condition screen first, then the case decider for
    the matrix's pattern.  Numerical failures (ill-conditioned Jordan
    decisions, inconclusive searches, boundary-ambiguous eigenvalues)
    surface as Undecided with a reason, never as NotEmbeddable.
    """
    A = as_matrix(M)
    if not is_markov(A, tol):
        raise ValueError("decide expects a Markov matrix")
    d = A.shape[0]

    # inside the residual certificate the zero generator already embeds the
    # matrix; eigenvalue multiplicities are unresolvable this close to the
    # identity, so skip classification entirely
    gap = float(np.abs(A - np.eye(d)).max())
    if gap <= tol.residual:
        tag = CaseTag(d, 1, getattr(Pattern, f"D{d}_IDENTITY"))
        zero = GeneratorCandidate(_ZERO_GEN[d].copy(), 0, Construction.PRINCIPAL_LOG, gap)
        return _embeddable([zero], Uniqueness.UNIQUE, tag)

    try:
        tag = classify(A, tol)
    except (IllConditionedError, ClassificationError):
        return _undecided(Reason.ILL_CONDITIONED)

    if tag.pattern in (Pattern.D2_IDENTITY, Pattern.D3_IDENTITY, Pattern.D4_IDENTITY):
        return _undecided(Reason.RESIDUAL_CHECK_FAILED, tag)

    if A.shape[0] == 2:
        res = embed_d2(A, tol)
        return dataclasses.replace(res, case=tag)

    report = necessary_checks(A, tol)
    if not report.det_positive:
        return _not_embeddable(Reason.DET_NONPOSITIVE, tag)
    if not report.diag_positive:
        return _not_embeddable(Reason.ZERO_DIAGONAL, tag)
    if not report.unit_circle_ok:
        return _not_embeddable(Reason.UNIT_CIRCLE_EIGENVALUE, tag)
    if not report.culver_ok:
        return _not_embeddable(Reason.NEGATIVE_EIGENVALUE_CULVER, tag)
    if not report.transitivity_ok:
        return _not_embeddable(Reason.TRANSITIVITY_VIOLATION, tag)

    try:
        if tag.pattern in (Pattern.D3_DEG2_1_1_L, Pattern.D3_DEG2_1_L_L_POS):
            res = embed_d3_deg2(A, tag, tol, all_branches)
        elif tag.pattern is Pattern.D3_DEG2_1_L_L_NEG:
            res = embed_d3_eq_input_neg(A, tol, tag)
        elif tag.pattern in (Pattern.D3_SIMPLE_REAL, Pattern.D3_JORDAN2):
            res = embed_d3_cyclic_real(A, tag, tol)
        elif tag.pattern is Pattern.D3_COMPLEX_PAIR:
            res = embed_d3_complex(A, tag, tol)
        else:
            res = embed_d4(A, tag, tol, all_branches)
    except (IllConditionedError, DegenerateDenominatorError):
        return _undecided(Reason.ILL_CONDITIONED, tag)

    if (
        res.verdict is Verdict.EMBEDDABLE
        and len(res.generators) == 1
        and res.uniqueness in (Uniqueness.POSSIBLY_MORE, Uniqueness.UNKNOWN)
    ):
        if uniqueness_certificates(A, res.generators[0].matrix, tol) is Uniqueness.UNIQUE:
            res = dataclasses.replace(res, uniqueness=Uniqueness.UNIQUE)
    return res
