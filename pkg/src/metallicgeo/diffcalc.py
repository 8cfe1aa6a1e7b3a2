"""Numerical differentiation engine and curvature machinery.

Conventions (fixed once, used by every checker in the package):

* Christoffel symbols: Gamma^h_ij = 1/2 g^{ht} (d_i g_tj + d_j g_ti - d_t g_ij),
  stored as gamma[h, i, j].
* Curvature: R_kji^h are the components of R(d_k, d_j) d_i, i.e.
  R_kji^h = d_k Gamma^h_ji - d_j Gamma^h_ki + Gamma^t_ji Gamma^h_kt - Gamma^t_ki Gamma^h_jt,
  stored as Rup[k, j, i, h]; lowered Rdown[k, j, i, l] = Rup[k, j, i, t] g_tl.
  Ricci is the trace over the first and the upper slot, ricci[j, i] = Rup[h, j, i, h],
  and scalar = g^{ji} ricci[j, i]. With this sign the unit sphere has positive
  scalar curvature (2 for S^2, 30 for S^6).
* Exterior derivative of a 2-form: dw[a, b, c] = d_a w_bc + d_b w_ca + d_c w_ab.
* Second covariant derivatives store the outer derivative index first:
  covcov[a, b, ...] = (nabla_a nabla_b T)_...

Differencing is central, in two tiers: first derivatives use step h1 at
order1 (default order 4), nested outer derivatives use step h2 = h1^(5/6)
at order2 (default order 2) with optional Richardson extrapolation
(default on for the outer tier; needed to push curvature truncation error
well below the curvature tolerance tier).

Everything here is a pure function of (field, point); per-point caches are
built once and read-only afterwards, so evaluation across sample points
can proceed in parallel with a deterministic reduction order.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
import numpy as np

from .geometry import Chart, ChartBoundsError, inverse_metric, max_abs

__all__ = [
    "DiffScheme",
    "ConnectionCoefficients",
    "CurvaturePack",
    "partial",
    "partial_all",
    "christoffel",
    "covariant_derivative",
    "second_covariant_derivative",
    "riemann",
    "exterior_derivative_2form",
    "nijenhuis",
    "PointContext",
    "metric_compat_residual",
]

DEFAULT_H1 = 1e-3


@dataclass(frozen=True)
class DiffScheme:
    """Finite-difference policy: steps, orders and Richardson flags per tier."""

    h1: float = DEFAULT_H1
    order1: int = 4
    h2: float = DEFAULT_H1 ** (5.0 / 6.0)  # 10^-2.5 at the default h1
    order2: int = 2
    richardson1: bool = False
    richardson2: bool = True

    def __post_init__(self):
        if self.h1 <= 0 or self.h2 <= 0:
            raise ValueError("steps must be positive")
        if self.order1 not in (2, 4) or self.order2 not in (2, 4):
            raise ValueError("central differences of order 2 or 4 only")

    @classmethod
    def with_h(cls, h1: float, **kw) -> "DiffScheme":
        return cls(h1=h1, h2=h1 ** (5.0 / 6.0), **kw)

    def reach(self, stage: int = 1) -> float:
        """Farthest stencil excursion from the base point for one derivative."""
        h, order = (self.h1, self.order1) if stage == 1 else (self.h2, self.order2)
        return h * (2 if order == 4 else 1)

    def check_chart(self, chart: Chart):
        if self.h2 >= chart.margin / 2.0:
            raise ValueError(
                f"step h2={self.h2:g} must stay below half the chart margin {chart.margin:g}"
            )


def _central(fn, point, axis, h, order):
    point = np.asarray(point, dtype=float)
    e = np.zeros_like(point)
    e[axis] = 1.0
    if order == 2:
        return (np.asarray(fn(point + h * e)) - np.asarray(fn(point - h * e))) / (2.0 * h)
    return (
        -np.asarray(fn(point + 2 * h * e))
        + 8.0 * np.asarray(fn(point + h * e))
        - 8.0 * np.asarray(fn(point - h * e))
        + np.asarray(fn(point - 2 * h * e))
    ) / (12.0 * h)


def partial(fn, point, axis: int, scheme: DiffScheme | None = None, stage: int = 1, chart: Chart | None = None):
    """Central-difference partial derivative of a (possibly array-valued) field.

    stage 1 uses (h1, order1, richardson1); stage 2 the outer-tier settings.
    With Richardson the error is two orders better than the base stencil.
    """
    scheme = scheme or DiffScheme()
    h, order, rich = (
        (scheme.h1, scheme.order1, scheme.richardson1)
        if stage == 1
        else (scheme.h2, scheme.order2, scheme.richardson2)
    )
    if chart is not None:
        reach = h * (2 if order == 4 else 1)
        if not chart.contains(point, margin=0.0):
            raise ChartBoundsError(f"point {np.asarray(point).tolist()} is outside the chart")
        if not chart.contains(point, margin=reach):
            raise ChartBoundsError(
                f"point {np.asarray(point).tolist()} is too close to the boundary for step {h:g}"
            )
    if not rich:
        return _central(fn, point, axis, h, order)
    coarse = _central(fn, point, axis, h, order)
    fine = _central(fn, point, axis, h / 2.0, order)
    w = 2.0**order
    return (w * fine - coarse) / (w - 1.0)


def partial_all(fn, point, scheme: DiffScheme | None = None, stage: int = 1, chart: Chart | None = None):
    """Stack of partial derivatives along every coordinate: out[a, ...] = d_a fn."""
    point = np.asarray(point, dtype=float)
    return np.stack(
        [partial(fn, point, a, scheme, stage=stage, chart=chart) for a in range(point.size)],
        axis=0,
    )


@dataclass(frozen=True)
class ConnectionCoefficients:
    """Connection coefficients at a point; torsion is zero for Levi-Civita."""

    gamma: np.ndarray  # gamma[h, i, j]

    @property
    def torsion(self) -> np.ndarray:
        return self.gamma - np.swapaxes(self.gamma, 1, 2)


def christoffel(g_fn, point, scheme: DiffScheme | None = None, chart: Chart | None = None) -> ConnectionCoefficients:
    """Levi-Civita coefficients from first derivatives of the metric."""
    point = np.asarray(point, dtype=float)
    g = np.asarray(g_fn(point), dtype=float)
    ginv = inverse_metric(g, point)
    dg = partial_all(g_fn, point, scheme, stage=1, chart=chart)  # dg[a, i, j]
    gamma = 0.5 * np.einsum(
        "ht,itj->hij",
        ginv,
        dg.transpose(0, 1, 2) + dg.transpose(2, 1, 0) - dg.transpose(1, 0, 2),
    )
    # dg[i,t,j] + dg[j,t,i] - dg[t,i,j] arranged as [i,t,j]
    return ConnectionCoefficients(gamma=gamma)


def _cov_correct(value: np.ndarray, sig: str, gamma: np.ndarray) -> np.ndarray:
    """Gamma corrections for every slot; returns corr[a, ...] to add to d_a T."""
    n = gamma.shape[0]
    corr = np.zeros((n,) + value.shape)
    for axis, kind in enumerate(sig):
        if kind == "u":
            # + Gamma^h_at T^{...t...}
            term = np.tensordot(value, gamma, axes=([axis], [2]))  # (..., h, a) at the end
            term = np.moveaxis(term, -1, 0)  # a first
            corr += np.moveaxis(term, -1, axis + 1)
        else:
            # - Gamma^t_a(axis) T_{...t...}
            term = np.tensordot(value, gamma, axes=([axis], [0]))  # (..., a, j) at the end
            term = np.moveaxis(term, -2, 0)
            corr -= np.moveaxis(term, -1, axis + 1)
    return corr


def covariant_derivative(
    fn, sig: str, point, gamma: np.ndarray | None = None, g_fn=None,
    scheme: DiffScheme | None = None, stage: int = 1, chart: Chart | None = None,
) -> np.ndarray:
    """Covariant derivative, one covariant slot prepended: out[a, ...] = (nabla_a T)_...

    Supply either the connection coefficients at the point or a metric field
    to derive them from.
    """
    point = np.asarray(point, dtype=float)
    if gamma is None:
        if g_fn is None:
            raise ValueError("need gamma or a metric field")
        gamma = christoffel(g_fn, point, scheme, chart=chart).gamma
    dT = partial_all(fn, point, scheme, stage=stage, chart=chart)
    value = np.asarray(fn(point), dtype=float)
    if not sig:
        return dT
    return dT + _cov_correct(value, sig, gamma)


def covariant_derivative_field(fn, sig: str, g_fn, scheme: DiffScheme | None = None):
    """Wrap nabla T as a new field (signature 'd' + sig), evaluable anywhere."""

    def cov_fn(point):
        return covariant_derivative(fn, sig, point, g_fn=g_fn, scheme=scheme, stage=1)

    return cov_fn, "d" + sig


def second_covariant_derivative(
    fn, sig: str, point, g_fn, scheme: DiffScheme | None = None, chart: Chart | None = None
) -> np.ndarray:
    """Two added covariant slots, outer first: out[a, b, ...] = (nabla_a nabla_b T)_...

    The inner derivative is evaluated as a field with the first-tier stencil;
    the outer differencing uses the second tier (wider step, optional
    Richardson) so the nested stencil stays inside the chart.
    """
    scheme = scheme or DiffScheme()
    inner_fn, inner_sig = covariant_derivative_field(fn, sig, g_fn, scheme)
    return covariant_derivative(
        inner_fn, inner_sig, point, g_fn=g_fn, scheme=scheme, stage=2, chart=chart
    )


@dataclass(frozen=True)
class CurvaturePack:
    """Riemann (both forms), Ricci and scalar curvature at a point."""

    Rup: np.ndarray    # R_kji^h as [k, j, i, h]
    Rdown: np.ndarray  # R_kjil
    ricci: np.ndarray  # S_ji = R_hji^h
    scalar: float

    def symmetry_residuals(self) -> dict:
        """Algebraic invariants of the lowered tensor, as relative residuals."""
        R = self.Rdown
        scale = max(1.0, max_abs(R))
        first_bianchi = R + np.transpose(R, (1, 2, 0, 3)) + np.transpose(R, (2, 0, 1, 3))
        return {
            "antisym_first_pair": max_abs(R + np.transpose(R, (1, 0, 2, 3))) / scale,
            "antisym_last_pair": max_abs(R + np.transpose(R, (0, 1, 3, 2))) / scale,
            "pair_symmetry": max_abs(R - np.transpose(R, (2, 3, 0, 1))) / scale,
            "first_bianchi": max_abs(first_bianchi) / scale,
        }


def riemann(g_fn, point, scheme: DiffScheme | None = None, chart: Chart | None = None) -> CurvaturePack:
    """Curvature from outer differencing of the Christoffel field."""
    scheme = scheme or DiffScheme()
    point = np.asarray(point, dtype=float)

    def gamma_fn(p):
        return christoffel(g_fn, p, scheme).gamma

    dGamma = partial_all(gamma_fn, point, scheme, stage=2, chart=chart)  # [k, h, i, j]
    gamma = gamma_fn(point)
    # R_kji^h = d_k G^h_ji - d_j G^h_ki + G^t_ji G^h_kt - G^t_ki G^h_jt
    Rup = (
        np.einsum("khji->kjih", dGamma)
        - np.einsum("jhki->kjih", dGamma)
        + np.einsum("tji,hkt->kjih", gamma, gamma)
        - np.einsum("tki,hjt->kjih", gamma, gamma)
    )
    g = np.asarray(g_fn(point), dtype=float)
    ginv = inverse_metric(g, point)
    Rdown = np.einsum("kjit,tl->kjil", Rup, g)
    ricci = np.einsum("hjih->ji", Rup)
    scalar = float(np.einsum("ji,ji->", ginv, ricci))
    return CurvaturePack(Rup=Rup, Rdown=Rdown, ricci=ricci, scalar=scalar)


def exterior_derivative_2form(
    omega_fn, point, scheme: DiffScheme | None = None, chart: Chart | None = None, skew_tol: float = 1e-8
) -> np.ndarray:
    """dw[a, b, c] = d_a w_bc + d_b w_ca + d_c w_ab; input must be antisymmetric."""
    point = np.asarray(point, dtype=float)
    w = np.asarray(omega_fn(point), dtype=float)
    if max_abs(w + w.T) > skew_tol * max(1.0, max_abs(w)):
        raise ValueError("exterior derivative needs an antisymmetric 2-form")
    dw = partial_all(omega_fn, point, scheme, stage=1, chart=chart)  # dw[a, b, c]
    out = dw + np.einsum("bca->abc", dw) + np.einsum("cab->abc", dw)
    return out


def nijenhuis(j_fn, point, scheme: DiffScheme | None = None, chart: Chart | None = None) -> np.ndarray:
    """Bracket-formula Nijenhuis tensor of a (1,1) field, N[i, j, h] = N_ij^h.

    Computed from plain partials; antisymmetry in (i, j) is structural.
    N_ij^h = J_i^t d_t J_j^h - J_j^t d_t J_i^h + (d_j J_i^t) J_t^h - (d_i J_j^t) J_t^h
    """
    point = np.asarray(point, dtype=float)
    J = np.asarray(j_fn(point), dtype=float)  # J[h, i]
    dJ = partial_all(j_fn, point, scheme, stage=1, chart=chart)  # dJ[a, h, i]
    term1 = np.einsum("ti,thj->ijh", J, dJ)
    term3 = np.einsum("jti,ht->ijh", dJ, J)
    return term1 - np.einsum("ijh->jih", term1) + term3 - np.einsum("ijh->jih", term3)


def metric_compat_residual(g_fn, point, h: float, order: int = 2) -> float:
    """Metric-compatibility residual of the step-h connection.

    The connection is built from order-`order` differences at step h while
    the partial derivatives of g are taken from a high-accuracy reference
    stencil (order 4 with Richardson at the default step). Computing both
    sides from the same stencil would cancel identically, so this is the
    quantity whose truncation error actually shrinks with h.
    """
    point = np.asarray(point, dtype=float)
    coarse = DiffScheme.with_h(h, order1=order, richardson1=False)
    ref = DiffScheme(richardson1=True)
    gamma = christoffel(g_fn, point, coarse).gamma
    dg_ref = partial_all(g_fn, point, ref, stage=1)
    g = np.asarray(g_fn(point), dtype=float)
    corr = np.einsum("tai,tj->aij", gamma, g) + np.einsum("taj,ti->aij", gamma, g)
    return max_abs(dg_ref - corr)


class PointContext:
    """Lazy per-point cache of every derived quantity of a (g, J_M) pair.

    All members are computed at most once; the object is effectively
    immutable after the caches fill, so contexts may be shared freely.
    """

    def __init__(self, g_fn, j_fn, p: float, q: float, point, scheme: DiffScheme | None = None,
                 chart: Chart | None = None):
        self.g_fn = g_fn
        self.j_fn = j_fn
        self.p = float(p)
        self.q = float(q)
        self.point = np.asarray(point, dtype=float)
        self.scheme = scheme or DiffScheme()
        self.chart = chart
        self.n = self.point.size

    # --- algebra at the point ---

    @cached_property
    def g(self) -> np.ndarray:
        return np.asarray(self.g_fn(self.point), dtype=float)

    @cached_property
    def ginv(self) -> np.ndarray:
        return inverse_metric(self.g, self.point)

    @cached_property
    def J(self) -> np.ndarray:
        return np.asarray(self.j_fn(self.point), dtype=float)

    @cached_property
    def Jhat(self) -> np.ndarray:
        return self.p * np.eye(self.n) - self.J

    @cached_property
    def omega(self) -> np.ndarray:
        # w_im = (J_M)_i^t g_tm
        return np.einsum("ti,tm->im", self.J, self.g)

    def omega_fn(self, pt) -> np.ndarray:
        Jp = np.asarray(self.j_fn(pt), dtype=float)
        gp = np.asarray(self.g_fn(pt), dtype=float)
        return np.einsum("ti,tm->im", Jp, gp)

    # --- first derivatives ---

    @cached_property
    def gamma(self) -> np.ndarray:
        return christoffel(self.g_fn, self.point, self.scheme, chart=self.chart).gamma

    @cached_property
    def dJ(self) -> np.ndarray:
        return partial_all(self.j_fn, self.point, self.scheme, stage=1, chart=self.chart)

    @cached_property
    def covJ(self) -> np.ndarray:
        """covJ[a, h, i] = (nabla_a J)_i^h."""
        return self.dJ + _cov_correct(self.J, "ud", self.gamma)

    @cached_property
    def sym_covJ(self) -> np.ndarray:
        """(nabla_i J)_j^h + (nabla_j J)_i^h, the nearly-vanishing combination."""
        return self.covJ + np.einsum("ahi->iha", self.covJ)

    @cached_property
    def F(self) -> np.ndarray:
        """F[i, j, k] = g((nabla_i J) d_j, d_k) = g_kt (nabla_i J)_j^t."""
        return np.einsum("itj,tk->ijk", self.covJ, self.g)

    @cached_property
    def cov_omega(self) -> np.ndarray:
        """(nabla_a w)_im computed directly from the w field (independent of F)."""
        return covariant_derivative(
            self.omega_fn, "dd", self.point, gamma=self.gamma, scheme=self.scheme, chart=self.chart
        )

    @cached_property
    def domega(self) -> np.ndarray:
        # differentiates the antisymmetric part of w: identical whenever the
        # bundle is skew-compatible, and still a well-defined 2-form (hence a
        # reportable residual) on bundles that fail that compatibility
        def skew_fn(pt):
            w = self.omega_fn(pt)
            return 0.5 * (w - w.T)

        return exterior_derivative_2form(skew_fn, self.point, self.scheme, chart=self.chart)

    @cached_property
    def N(self) -> np.ndarray:
        return nijenhuis(self.j_fn, self.point, self.scheme, chart=self.chart)

    # --- curvature ---

    @cached_property
    def curvature(self) -> CurvaturePack:
        return riemann(self.g_fn, self.point, self.scheme, chart=self.chart)

    @cached_property
    def H(self) -> np.ndarray:
        """H_ji = R_hji^t (J_M)_t^h, the curvature/2-form contraction.

        This is the arrangement that satisfies the contracted commutation
        identity nabla_h nabla_j (J_M)_i^h = S_jt (J_M)_i^t - H_ji; raising
        the 2-form's slots in the opposite order flips the sign.
        """
        return np.einsum("hjit,ht->ji", self.curvature.Rup, self.J)

    @cached_property
    def Sstar(self) -> np.ndarray:
        """Ricci-star: S*_ji = -H_jt (J_M)_i^t."""
        return -np.einsum("jt,ti->ji", self.H, self.J)

    @cached_property
    def scalar_star(self) -> float:
        return float(np.einsum("nj,jn->", self.ginv, self.Sstar))

    @cached_property
    def norm_covJ_sq(self) -> float:
        """g^{km} g_{jt} g^{is} (nabla_m J)_i^t (nabla_k J)_s^j (signed for indefinite g)."""
        return float(
            np.einsum("km,jt,is,mti,kjs->", self.ginv, self.g, self.ginv, self.covJ, self.covJ)
        )

    # --- second derivatives ---

    @cached_property
    def covcov_omega(self) -> np.ndarray:
        """covcov[a, b, i, m] = (nabla_a nabla_b w)_im."""
        return second_covariant_derivative(
            self.omega_fn, "dd", self.point, self.g_fn, self.scheme, chart=self.chart
        )

    @cached_property
    def covcovJ(self) -> np.ndarray:
        """covcov[a, b, h, i] = (nabla_a nabla_b J)_i^h."""
        return second_covariant_derivative(
            self.j_fn, "ud", self.point, self.g_fn, self.scheme, chart=self.chart
        )
