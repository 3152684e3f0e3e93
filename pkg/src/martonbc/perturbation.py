"""Perturbation calculus on joint distributions.

A direction is a real function L on the (U,V,X) atoms with zero
conditional mean given X; it tilts the base joint as
p_eps = p0 * (1 + eps*L) over a feasible eps interval.  This module
provides the tilted family, the L-weighted entropy/information
functionals H_L and I_L, the exact entropy decomposition along the
family, the Fisher-information form of its second derivative, and the
first/second-order stationarity diagnostics.

Derivative outputs are in bits: where the natural-log Fisher information
I(eps) appears, the entropy curvature is -log2(e) * I(eps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .info_core import (
    JointDistribution,
    AxisError,
    entropy,
    entropy_of_tensor,
    marginal_tensor,
    mutual_information,
    _resolve,
)

DIRECTION_AXES = ("U", "V", "X")

FEASIBILITY_TOL = 1e-12
ADMISSIBILITY_TOL = 1e-9
ZERO_DIRECTION_SNAP = 1e-14


class DirectionError(ValueError):
    """Invalid perturbation direction or infeasible eps."""


def broadcast_to_joint(dist: JointDistribution, values: np.ndarray,
                       value_axes: Sequence[str]) -> np.ndarray:
    """Expand a tensor over a subset of axes to the joint's full shape.

    `values` must be indexed by `value_axes` in the distribution's own
    axis order.
    """
    value_axes = _resolve(dist, value_axes)
    shape = tuple(s if n in value_axes else 1 for n, s in dist.axes)
    return np.broadcast_to(values.reshape(shape), dist.probs.shape)


def conditional_mean(dist: JointDistribution, values: np.ndarray,
                     value_axes: Sequence[str],
                     given_axes: Iterable[str]) -> np.ndarray:
    """E[f | given_axes] as a table over the conditioning atoms.

    Atoms of zero probability get 0.  `values` is a tensor over
    `value_axes` (in the distribution's axis order).
    """
    given = _resolve(dist, given_axes)
    full = broadcast_to_joint(dist, values, value_axes)
    drop = tuple(i for i, (n, _) in enumerate(dist.axes) if n not in given)
    num = (dist.probs * full).sum(axis=drop) if drop else dist.probs * full
    den = marginal_tensor(dist, given)
    out = np.zeros_like(den)
    pos = den > 0
    out[pos] = num[pos] / den[pos]
    return out


@dataclass(frozen=True)
class PerturbationDirection:
    """Direction L(u,v,x) together with its feasible eps interval.

    values carries the full L tensor over the (U,V,X) atoms, in the base
    joint's axis order; off-support atoms are 0 by convention.  eps_lo and
    eps_hi may be -inf/+inf when no atom binds on that side.
    """

    values: np.ndarray
    eps_lo: float
    eps_hi: float
    axis_names: tuple[str, ...] = DIRECTION_AXES

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise DirectionError("direction values must be finite")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        if not (self.eps_lo < 0.0 < self.eps_hi):
            raise DirectionError(
                f"eps interval [{self.eps_lo}, {self.eps_hi}] must straddle 0")


def _direction_values(L: Union[PerturbationDirection, np.ndarray],
                      axes: Sequence[str] | None = None
                      ) -> tuple[np.ndarray, tuple[str, ...]]:
    if isinstance(L, PerturbationDirection):
        return L.values, L.axis_names
    return np.asarray(L, dtype=float), tuple(axes or DIRECTION_AXES)


def epsilon_range(base: JointDistribution, values: np.ndarray,
                  value_axes: Sequence[str] = DIRECTION_AXES) -> tuple[float, float]:
    """Feasible eps interval: the largest [lo, hi] with 1 + eps*L >= 0 on
    every positive-probability atom.

    Raises DirectionError when L vanishes on the whole support ("zero
    direction": the family would be constant).
    """
    value_axes = _resolve(base, value_axes)
    support = marginal_tensor(base, value_axes) > 0
    if not support.any():
        raise DirectionError("base distribution has empty support")
    vals = np.asarray(values, dtype=float)[support]
    if np.abs(vals).max() == 0.0:
        raise DirectionError("zero direction")
    vmin = vals.min()
    vmax = vals.max()
    eps_hi = 1.0 / -vmin if vmin < 0 else math.inf
    eps_lo = -1.0 / vmax if vmax > 0 else -math.inf
    return eps_lo, eps_hi


def center_direction(raw: np.ndarray, base: JointDistribution,
                     value_axes: Sequence[str] = DIRECTION_AXES) -> PerturbationDirection:
    """Project a raw function of (U,V,X) to an admissible direction.

    Subtracts the conditional mean given X, so E[L | X=x] = 0 on every
    positive-probability x.  Values off the support are set to 0, and
    numerical dust (relative magnitude below 1e-14) is snapped to 0 so a
    raw function of x alone yields the exact zero direction, whose eps
    interval is unbounded.
    """
    value_axes = _resolve(base, value_axes)
    if "X" not in value_axes:
        raise AxisError("direction axes must include X")
    raw = np.asarray(raw, dtype=float)
    support = marginal_tensor(base, value_axes) > 0
    mean_x = conditional_mean(base, raw, value_axes, ["X"])
    shape = tuple(s for n, s in base.axes if n in value_axes)
    mean_full = np.broadcast_to(mean_x.reshape(
        tuple(shape[i] if value_axes[i] == "X" else 1
              for i in range(len(value_axes)))), shape)
    values = np.where(support, raw - mean_full, 0.0)
    snap = ZERO_DIRECTION_SNAP * max(1.0, float(np.abs(raw).max(initial=0.0)))
    values[np.abs(values) <= snap] = 0.0
    try:
        eps_lo, eps_hi = epsilon_range(base, values, value_axes)
    except DirectionError:
        eps_lo, eps_hi = -math.inf, math.inf
    return PerturbationDirection(values, eps_lo, eps_hi, value_axes)


def perturb(base: JointDistribution, L: PerturbationDirection,
            eps: float) -> JointDistribution:
    """The tilted joint p0 * (1 + eps*L(u,v,x)).

    eps must lie in the direction's feasible interval; atoms pushed to
    tiny negatives (>= -1e-12) by rounding are clamped to 0.  The X, Y
    and Z marginals and the channel conditional are unchanged because
    E[L|X] = 0.
    """
    slack = 1e-12 * (1.0 + abs(eps))
    if eps < L.eps_lo - slack or eps > L.eps_hi + slack:
        raise DirectionError(
            f"eps={eps} outside feasible interval [{L.eps_lo}, {L.eps_hi}]")
    factor = 1.0 + eps * broadcast_to_joint(base, L.values, L.axis_names)
    out = base.probs * factor
    if out.min() < -FEASIBILITY_TOL:
        raise DirectionError(
            f"perturbed mass {out.min()} below -1e-12; direction infeasible")
    np.clip(out, 0.0, None, out=out)
    return JointDistribution(base.axes, out)


def h_L(base: JointDistribution, L: Union[PerturbationDirection, np.ndarray],
        axes: Iterable[str], value_axes: Sequence[str] | None = None) -> float:
    """L-weighted entropy: sum_s p(s) E[L|s] log2(1/p(s)) over the marginal.

    With L identically 1 this reduces to the Shannon entropy.
    """
    values, vaxes = _direction_values(L, value_axes)
    axes = _resolve(base, axes)
    t = conditional_mean(base, values, vaxes, axes)
    p = marginal_tensor(base, axes)
    pos = p > 0
    return float(-(p[pos] * t[pos] * np.log2(p[pos])).sum())


def h_L_given(base: JointDistribution, L: Union[PerturbationDirection, np.ndarray],
              axes_a: Iterable[str], axes_b: Iterable[str],
              value_axes: Sequence[str] | None = None) -> float:
    """Conditional form: sum_{a,b} p(a,b) E[L|a,b] log2(1/p(a|b))."""
    values, vaxes = _direction_values(L, value_axes)
    a = _resolve(base, axes_a)
    b = _resolve(base, axes_b)
    if set(a) & set(b):
        raise AxisError(f"overlapping axis sets {a} and {b}")
    ab = _resolve(base, a + b)
    p_ab = marginal_tensor(base, ab)
    p_b = marginal_tensor(base, b)
    t = conditional_mean(base, values, vaxes, ab)
    # p(a|b) over the joint (a,b) tensor
    b_shape = tuple(s if n in b else 1 for n, s in base.axes if n in ab)
    p_b_full = np.broadcast_to(p_b.reshape(b_shape), p_ab.shape)
    pos = p_ab > 0
    cond = p_ab[pos] / p_b_full[pos]
    return float(-(p_ab[pos] * t[pos] * np.log2(cond)).sum())


def i_L(base: JointDistribution, L: Union[PerturbationDirection, np.ndarray],
        axes_a: Iterable[str], axes_b: Iterable[str],
        value_axes: Sequence[str] | None = None) -> float:
    """L-weighted information I_L(A;B) = H_L(A) - H_L(A|B)."""
    return (h_L(base, L, axes_a, value_axes)
            - h_L_given(base, L, axes_a, axes_b, value_axes))


def r_function(x):
    """(1 + x) log2(1 + x), extended by continuity to r(-1) = 0.

    Convex on [-1, inf); r(0) = 0.  Raises for arguments below -1.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < -1.0 - 1e-12):
        raise ValueError(f"r(x) undefined below -1, got min {arr.min()}")
    arr = np.clip(arr, -1.0, None)
    one_plus = 1.0 + arr
    out = np.zeros_like(arr)
    pos = one_plus > 0
    out[pos] = one_plus[pos] * np.log2(one_plus[pos])
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


def fisher_information(base: JointDistribution, L: PerturbationDirection,
                       eps: float, axes: Iterable[str]) -> float:
    """Fisher information of the tilted family at eps, seen on a marginal.

    Returns E[ E[L|axes]^2 / (1 + eps*E[L|axes]) ] under the base law; the
    entropy curvature in bits is -log2(e) times this value.  eps must lie
    strictly inside the feasible interval.
    """
    if not (L.eps_lo < eps < L.eps_hi):
        raise DirectionError(
            f"eps={eps} not strictly inside ({L.eps_lo}, {L.eps_hi})")
    axes = _resolve(base, axes)
    t = conditional_mean(base, L.values, L.axis_names, axes)
    p = marginal_tensor(base, axes)
    pos = p > 0
    den = 1.0 + eps * t[pos]
    if den.min() <= 0:
        raise DirectionError("denominator vanished: eps is at the boundary")
    return float((p[pos] * t[pos] ** 2 / den).sum())


def entropy_decomposition_check(base: JointDistribution, L: PerturbationDirection,
                                eps: float, axes: Iterable[str]
                                ) -> tuple[float, float, float]:
    """Exact entropy decomposition along the family, on a marginal.

    lhs: entropy of the tilted marginal; rhs: H + eps*H_L - E[r(eps*E[L|.])].
    Returns (lhs, rhs, |lhs - rhs|); the identity is exact, so the residual
    is rounding-level.
    """
    axes = _resolve(base, axes)
    tilted = perturb(base, L, eps)
    lhs = entropy(tilted, axes)
    t = conditional_mean(base, L.values, L.axis_names, axes)
    p = marginal_tensor(base, axes)
    pos = p > 0
    expected_r = float((p[pos] * r_function(eps * t[pos])).sum())
    rhs = entropy(base, axes) + eps * h_L(base, L, axes) - expected_r
    return lhs, rhs, abs(lhs - rhs)


@dataclass(frozen=True)
class StationarityReport:
    """First/second-order diagnostics of the tilted objective at eps = 0.

    first_derivative: d/deps of
        I(U;Y) + I(V;Z) - I(U;V) + lam*I(U;Y) + gam*I(V;Z)
    second_derivative: log2(e) * (E[E[L|UY]^2] + E[E[L|VZ]^2] - E[E[L|UV]^2]),
        the curvature of the unweighted part; at a maximizer it is <= 0.
    """

    first_derivative: float
    second_derivative: float
    second_derivative_decomposition: tuple[float, float, float]


def second_moment_of_conditional_mean(base: JointDistribution,
                                      L: Union[PerturbationDirection, np.ndarray],
                                      axes: Iterable[str],
                                      value_axes: Sequence[str] | None = None) -> float:
    """E[ E[L|axes]^2 ] under the base law."""
    values, vaxes = _direction_values(L, value_axes)
    axes = _resolve(base, axes)
    t = conditional_mean(base, values, vaxes, axes)
    p = marginal_tensor(base, axes)
    return float((p * t ** 2).sum())


def admissibility_residual(base: JointDistribution,
                           L: Union[PerturbationDirection, np.ndarray],
                           value_axes: Sequence[str] | None = None) -> float:
    """max_x |E[L | X=x]| over positive-probability x."""
    values, vaxes = _direction_values(L, value_axes)
    t = conditional_mean(base, values, vaxes, ["X"])
    px = marginal_tensor(base, ["X"])
    pos = px > 0
    return float(np.abs(t[pos]).max()) if pos.any() else 0.0


def weighted_pair_objective(dist: JointDistribution,
                            lam: float = 0.0, gam: float = 0.0) -> float:
    """(1+lam) I(U;Y) + (1+gam) I(V;Z) - I(U;V), in bits."""
    return ((1.0 + lam) * mutual_information(dist, ["U"], ["Y"])
            + (1.0 + gam) * mutual_information(dist, ["V"], ["Z"])
            - mutual_information(dist, ["U"], ["V"]))


def stationarity_check(base: JointDistribution, L: PerturbationDirection,
                       lam: float = 0.0, gam: float = 0.0,
                       admissibility_tol: float = ADMISSIBILITY_TOL) -> StationarityReport:
    """Analytic first and second derivative data of the tilted objective.

    Requires an admissible direction (E[L|X] = 0 within admissibility_tol).
    The first derivative equals
        (1+lam) I_L(U;Y) + (1+gam) I_L(V;Z) - I_L(U;V);
    at an interior maximizer both it and the second-derivative combination
    must be (non-positively) zero.
    """
    if lam < 0 or gam < 0:
        raise ValueError(f"weights lam={lam}, gam={gam} must be nonnegative")
    resid = admissibility_residual(base, L)
    if resid > admissibility_tol:
        raise DirectionError(
            f"direction not admissible: max |E[L|X]| = {resid}")
    first = ((1.0 + lam) * i_L(base, L, ["U"], ["Y"])
             + (1.0 + gam) * i_L(base, L, ["V"], ["Z"])
             - i_L(base, L, ["U"], ["V"]))
    m_uy = second_moment_of_conditional_mean(base, L, ["U", "Y"])
    m_vz = second_moment_of_conditional_mean(base, L, ["V", "Z"])
    m_uv = second_moment_of_conditional_mean(base, L, ["U", "V"])
    second = math.log2(math.e) * (m_uy + m_vz - m_uv)
    return StationarityReport(first, second, (m_uy, m_vz, m_uv))
