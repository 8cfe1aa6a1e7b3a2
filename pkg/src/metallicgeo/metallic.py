"""Almost complex metallic structures, hyperbolic compatibility, classification.

A metallic structure is a (1,1)-tensor field J_M with

    J_M^2 - p J_M + (3/2) q I = 0,   q > 0,  -sqrt(6q) < p < sqrt(6q),

the conjugate structure is pI - J_M, and an almost complex structure J
corresponds to J_M = (p/2) I +- (sqrt(6q - p^2)/2) J. A metric is
hyperbolic when g(J_M X, Y) = -g(X, J_M Y), which makes the fundamental
2-form w(X, Y) = g(J_M X, Y) skew.

Note on the parameter p: skewness of w forces the g-trace of J_M to
vanish, while the polynomial identity forces trace J_M = p k on a
2k-dimensional chart. A nondegenerate hyperbolic pair therefore requires
p = 0; the classifier stays generic in (p, q) and simply reports the
residuals, and the built-in fixtures use p = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from .diffcalc import DiffScheme, PointContext
from .geometry import Chart, TensorField, max_abs

__all__ = [
    "MetallicParams",
    "ComplexMetallicMean",
    "metallic_mean",
    "jm_from_j_matrix",
    "j_from_jm_matrix",
    "conjugate_matrix",
    "jm_from_j",
    "j_from_jm",
    "conjugates",
    "StructureBundle",
    "Tolerances",
    "ClassificationReport",
    "classify",
    "check_hyperbolic",
    "hyperbolicity_quartet",
    "fundamental_form",
    "f_tensor",
    "VERDICT_NONE",
    "VERDICT_HERMITIAN",
    "VERDICT_ALMOST_KAHLER",
    "VERDICT_KAHLER",
    "VERDICT_NEARLY",
]

VERDICT_NONE = "not metallic-Hermitian"
VERDICT_HERMITIAN = "almost metallic Hermitian"
VERDICT_ALMOST_KAHLER = "almost metallic Kähler"
VERDICT_KAHLER = "metallic Kähler"
VERDICT_NEARLY = "nearly metallic Kähler"


@dataclass(frozen=True)
class MetallicParams:
    """Admissible structure parameters: q > 0 and p^2 < 6q."""

    p: float
    q: float

    def __post_init__(self):
        if not (self.q > 0.0):
            raise ValueError("q must be strictly positive")
        if not (self.p * self.p < 6.0 * self.q):
            raise ValueError("p must satisfy -sqrt(6q) < p < sqrt(6q)")

    @property
    def coeff(self) -> float:
        """The real coefficient sqrt(6q - p^2)/2 linking J and J_M."""
        return math.sqrt(6.0 * self.q - self.p * self.p) / 2.0


@dataclass(frozen=True)
class ComplexMetallicMean:
    """The upper complex root of z^2 - p z + (3/2) q = 0."""

    real: float
    imag: float

    @property
    def value(self) -> complex:
        return complex(self.real, self.imag)


def metallic_mean(p: float, q: float) -> ComplexMetallicMean:
    """Root with positive imaginary part; validates (p, q) admissibility."""
    params = MetallicParams(p, q)
    return ComplexMetallicMean(real=params.p / 2.0, imag=params.coeff)


# --- pointwise matrix algebra -----------------------------------------------


def jm_from_j_matrix(J: np.ndarray, params: MetallicParams, sign: int = +1) -> np.ndarray:
    """J_M = (p/2) I + sign * (sqrt(6q - p^2)/2) J for an almost complex J."""
    J = np.asarray(J, dtype=float)
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    return (params.p / 2.0) * np.eye(J.shape[0]) + sign * params.coeff * J


def j_from_jm_matrix(JM: np.ndarray, params: MetallicParams, sign: int = +1) -> np.ndarray:
    """Inverse affine map: J = sign * (2 / sqrt(6q - p^2)) (J_M - (p/2) I)."""
    JM = np.asarray(JM, dtype=float)
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    return sign * (JM - (params.p / 2.0) * np.eye(JM.shape[0])) / params.coeff


def conjugate_matrix(M: np.ndarray, params: Optional[MetallicParams] = None) -> np.ndarray:
    """Conjugate structure: pI - J_M for metallic inputs, -J when params is None."""
    M = np.asarray(M, dtype=float)
    if params is None:
        return -M
    return params.p * np.eye(M.shape[0]) - M


def polynomial_residual(JM: np.ndarray, params: MetallicParams) -> float:
    JM = np.asarray(JM, dtype=float)
    eye = np.eye(JM.shape[0])
    return max_abs(JM @ JM - params.p * JM + 1.5 * params.q * eye)


def almost_complex_residual(J: np.ndarray) -> float:
    J = np.asarray(J, dtype=float)
    return max_abs(J @ J + np.eye(J.shape[0]))


# --- field-level wrappers ----------------------------------------------------


def jm_from_j(j_field: TensorField, params: MetallicParams, sign: int = +1) -> TensorField:
    def fn(pt):
        return jm_from_j_matrix(j_field(pt), params, sign)

    return TensorField(name=f"{j_field.name}->metallic", sig="ud", fn=fn)


def j_from_jm(jm_field: TensorField, params: MetallicParams, sign: int = +1) -> TensorField:
    def fn(pt):
        return j_from_jm_matrix(jm_field(pt), params, sign)

    return TensorField(name=f"{jm_field.name}->complex", sig="ud", fn=fn)


def conjugates(structure: TensorField, params: Optional[MetallicParams] = None) -> TensorField:
    def fn(pt):
        return conjugate_matrix(structure(pt), params)

    return TensorField(name=f"{structure.name}-conjugate", sig="ud", fn=fn)


# --- tolerances ----------------------------------------------------------------


@dataclass(frozen=True)
class Tolerances:
    """Residual tiers by derivative depth."""

    alg: float = 1e-8     # no derivatives
    d1: float = 1e-5      # first-derivative identities
    d2: float = 1e-4      # curvature / second derivatives
    d3: float = 1e-3      # third derivatives and large-cancellation relations


# --- the bundle ----------------------------------------------------------------


class StructureBundle:
    """Chart + metric + metallic structure, with cached per-point contexts.

    Immutable after construction; classification and contexts are memoized.
    """

    def __init__(self, chart: Chart, g: TensorField, jm: TensorField,
                 params: MetallicParams, source_j: Optional[TensorField] = None,
                 sign: int = +1, scheme: Optional[DiffScheme] = None,
                 tolerances: Optional[Tolerances] = None, name: str = ""):
        self.chart = chart
        self.g = g
        self.jm = jm
        self.params = params
        self.source_j = source_j
        self.sign = sign
        self.scheme = scheme or DiffScheme()
        self.tolerances = tolerances or Tolerances()
        self.name = name or "bundle"
        self.scheme.check_chart(chart)
        chart.validate_scheme_margin(self.scheme.h2)
        self._contexts: dict = {}
        self._classification: Optional[ClassificationReport] = None

    @classmethod
    def from_j(cls, chart, g, j_field, params, sign=+1, **kw) -> "StructureBundle":
        return cls(chart, g, jm_from_j(j_field, params, sign), params,
                   source_j=j_field, sign=sign, **kw)

    @cached_property
    def jhat(self) -> TensorField:
        return conjugates(self.jm, self.params)

    @cached_property
    def sample_points(self) -> np.ndarray:
        return self.chart.sample_points()

    def context(self, point) -> PointContext:
        key = np.asarray(point, dtype=float).tobytes()
        ctx = self._contexts.get(key)
        if ctx is None:
            ctx = PointContext(self.g, self.jm, self.params.p, self.params.q,
                               point, self.scheme, chart=self.chart)
            self._contexts[key] = ctx
        return ctx

    def contexts(self, points=None):
        pts = self.sample_points if points is None else np.asarray(points, dtype=float)
        return [self.context(pt) for pt in pts]

    def classification(self) -> "ClassificationReport":
        if self._classification is None:
            self._classification = classify(self)
        return self._classification


# --- structure-level checks ------------------------------------------------------


def check_hyperbolic(bundle: StructureBundle, points=None) -> dict:
    """Max residuals of the two hyperbolic-compatibility forms over basis pairs.

    Direct form: g(J_M X, Y) + g(X, J_M Y); derived form:
    g(J_M X, J_M Y) + p g(X, J_M Y) - (3/2) q g(X, Y). Their joint vanishing
    is reported as a fact about the data, not assumed.
    """
    p, q = bundle.params.p, bundle.params.q
    tol = bundle.tolerances.alg
    r_direct = 0.0
    r_derived = 0.0
    for ctx in bundle.contexts(points):
        w = ctx.omega
        r_direct = max(r_direct, max_abs(w + w.T))
        pair = np.einsum("ai,bm,ab->im", ctx.J, ctx.J, ctx.g)
        r_derived = max(r_derived, max_abs(pair + p * w.T - 1.5 * q * ctx.g))
    return {
        "direct": r_direct,
        "derived": r_derived,
        "vanish_together": bool((r_direct < tol) == (r_derived < tol)),
    }


def hyperbolicity_quartet(bundle: StructureBundle, points=None) -> dict:
    """Skew-compatibility residuals for J, its conjugate, J_M and its conjugate.

    The source J is reconstructed from J_M when the bundle was not built
    from one.
    """
    j_field = bundle.source_j or j_from_jm(bundle.jm, bundle.params, +1)
    out = {}
    pts = bundle.sample_points if points is None else np.asarray(points, dtype=float)
    for label, fld in (
        ("J", j_field),
        ("J-conjugate", conjugates(j_field)),
        ("JM", bundle.jm),
        ("JM-conjugate", bundle.jhat),
    ):
        worst = 0.0
        for pt in pts:
            g = bundle.g(pt)
            A = fld(pt)
            w = np.einsum("ti,tm->im", A, g)
            worst = max(worst, max_abs(w + w.T))
        out[label] = worst
    return out


def fundamental_form(bundle: StructureBundle, point) -> tuple[np.ndarray, float]:
    """w components at a point and the skewness residual (same array as the
    direct hyperbolic residual, by construction)."""
    ctx = bundle.context(point)
    return ctx.omega, max_abs(ctx.omega + ctx.omega.T)


def f_tensor(bundle: StructureBundle, point) -> np.ndarray:
    """F[i, j, k] = g((nabla_i J_M) d_j, d_k) at a point."""
    return bundle.context(point).F


# --- classification -----------------------------------------------------------


@dataclass(frozen=True)
class ClassificationReport:
    verdict: str
    nearly: bool
    residuals: dict
    near_boundary: tuple
    theorem_dN_equiv_covJ: bool  # closedness+integrability vs parallel structure
    tolerances: Tolerances = field(default_factory=Tolerances)

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "nearly": self.nearly,
            "residuals": dict(self.residuals),
            "near_boundary": list(self.near_boundary),
            "parallel_equivalence_consistent": self.theorem_dN_equiv_covJ,
        }


def classify(bundle: StructureBundle, points=None, tolerances: Optional[Tolerances] = None) -> ClassificationReport:
    """Compute every classification residual and pick the most specific verdict.

    Verdict ladder: polynomial identity + skew compatibility give almost
    metallic Hermitian; closed fundamental form adds almost metallic
    Kahler; vanishing Nijenhuis tensor on top gives metallic Kahler (with
    the parallel-structure cross-check); a vanishing symmetrized nabla J_M
    gives nearly metallic Kahler, of which metallic Kahler is the special
    case. Residuals within a factor 10 of their threshold are flagged as
    near-boundary rather than silently classified.
    """
    tol = tolerances or bundle.tolerances
    p, q = bundle.params.p, bundle.params.q
    res = {
        "polynomial": 0.0,
        "conjugate_polynomial": 0.0,
        "hyperbolic_direct": 0.0,
        "hyperbolic_derived": 0.0,
        "omega_skewness": 0.0,
        "max_domega": 0.0,
        "max_nijenhuis": 0.0,
        "max_cov_jm": 0.0,
        "max_sym_cov_jm": 0.0,
    }
    for ctx in bundle.contexts(points):
        eye = np.eye(ctx.n)
        res["polynomial"] = max(res["polynomial"], max_abs(ctx.J @ ctx.J - p * ctx.J + 1.5 * q * eye))
        res["conjugate_polynomial"] = max(
            res["conjugate_polynomial"], max_abs(ctx.Jhat @ ctx.Jhat - p * ctx.Jhat + 1.5 * q * eye)
        )
        skew = max_abs(ctx.omega + ctx.omega.T)
        res["hyperbolic_direct"] = max(res["hyperbolic_direct"], skew)
        res["omega_skewness"] = max(res["omega_skewness"], skew)
        pair = np.einsum("ai,bm,ab->im", ctx.J, ctx.J, ctx.g)
        res["hyperbolic_derived"] = max(
            res["hyperbolic_derived"], max_abs(pair + p * ctx.omega.T - 1.5 * q * ctx.g)
        )
        res["max_domega"] = max(res["max_domega"], max_abs(ctx.domega))
        res["max_nijenhuis"] = max(res["max_nijenhuis"], max_abs(ctx.N))
        res["max_cov_jm"] = max(res["max_cov_jm"], max_abs(ctx.covJ))
        res["max_sym_cov_jm"] = max(res["max_sym_cov_jm"], max_abs(ctx.sym_covJ))

    hermitian = res["polynomial"] < tol.alg and res["hyperbolic_direct"] < tol.alg
    closed = hermitian and res["max_domega"] < tol.d1
    integrable = hermitian and res["max_nijenhuis"] < tol.d1
    parallel = hermitian and res["max_cov_jm"] < tol.d1
    nearly = hermitian and res["max_sym_cov_jm"] < tol.d1

    if not hermitian:
        verdict = VERDICT_NONE
    elif closed and integrable:
        verdict = VERDICT_KAHLER
    elif nearly:
        verdict = VERDICT_NEARLY
    elif closed:
        verdict = VERDICT_ALMOST_KAHLER
    else:
        verdict = VERDICT_HERMITIAN

    thresholds = {
        "polynomial": tol.alg,
        "conjugate_polynomial": tol.alg,
        "hyperbolic_direct": tol.alg,
        "hyperbolic_derived": tol.alg,
        "omega_skewness": tol.alg,
        "max_domega": tol.d1,
        "max_nijenhuis": tol.d1,
        "max_cov_jm": tol.d1,
        "max_sym_cov_jm": tol.d1,
    }
    near = tuple(
        k for k, v in res.items() if thresholds[k] / 10.0 <= v <= thresholds[k] * 10.0
    )
    return ClassificationReport(
        verdict=verdict,
        nearly=nearly,
        residuals=res,
        near_boundary=near,
        theorem_dN_equiv_covJ=((closed and integrable) == parallel),
        tolerances=tol,
    )
