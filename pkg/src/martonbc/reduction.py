"""Constructive support reductions on auxiliary variables.

Three transformations, each preserving the quantities that matter for the
rate region while shrinking or extremizing part of the joint:

* reduce_w: reweight the W marginal (keeping p(u,v,x|w) fixed) down to at
  most |X|+4 positive atoms, preserving p(x), I(W;Y), I(W;Z), I(U;Y|W) and
  I(V;Z|W) exactly and never increasing I(U;V|W).
* reduce_u_support / reduce_v_support: at a stationary point of the
  two-auxiliary objective, walk a certified direction to its boundary and
  drop at least one U (resp. V) atom without moving the objective.
* extremize_x: holding p(u,v,w) fixed, push the conditional p(x|u,v,w) to
  a deterministic map without decreasing a weighted six-tuple objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channels import BroadcastChannel
from .info_core import (
    AxisError,
    JointDistribution,
    condition,
    conditional_mutual_information,
    entropy,
    marginal_tensor,
    mutual_information,
    push_through_channel,
    six_tuple_from_tensor,
)
from .perturbation import (
    PerturbationDirection,
    epsilon_range,
    i_L,
    weighted_pair_objective,
)

SV_CUTOFF = 1e-10
CERTIFICATE_TOL = 1e-7
OBJECTIVE_DRIFT_TOL = 1e-6

STATUS_REDUCED = "reduced"
STATUS_ALREADY_SMALL = "already-small"
STATUS_NOT_AT_EXTREME = "not-at-extreme"


@dataclass(frozen=True)
class ReductionOutcome:
    result: JointDistribution
    preserved: dict[str, tuple[float, float]]
    support_sizes: dict[str, int]
    status: str
    detail: dict[str, float] = field(default_factory=dict)


def _require_axes(joint: JointDistribution, names: Sequence[str]) -> None:
    missing = [n for n in names if not joint.has_axis(n)]
    if missing:
        raise AxisError(f"joint lacks required axes {missing}; has {joint.axis_names}")


def _w_quantities(full: JointDistribution) -> dict[str, float]:
    return {
        "I(W;Y)": mutual_information(full, ["W"], ["Y"]),
        "I(W;Z)": mutual_information(full, ["W"], ["Z"]),
        "I(U;Y|W)": conditional_mutual_information(full, ["U"], ["Y"], ["W"]),
        "I(V;Z|W)": conditional_mutual_information(full, ["V"], ["Z"], ["W"]),
        "I(U;V|W)": conditional_mutual_information(full, ["U"], ["V"], ["W"]),
    }


def _support_sizes(joint: JointDistribution) -> dict[str, int]:
    return {n: joint.support_size(n) for n in joint.axis_names}


def _null_vector(mat: np.ndarray) -> np.ndarray:
    """A unit vector in the (numerical) null space of `mat`."""
    _, sv, vt = np.linalg.svd(mat)
    rank = int(np.sum(sv > SV_CUTOFF * sv[0])) if sv.size and sv[0] > 0 else 0
    if rank >= vt.shape[0]:
        raise np.linalg.LinAlgError("constraint matrix has no null direction")
    return vt[-1]


def reduce_w(joint: JointDistribution, channel: BroadcastChannel) -> ReductionOutcome:
    """Shrink the W support to at most |X|+4 atoms.

    Keeps p(u,v,x|w) for every surviving w and moves only the W marginal,
    inside the polytope fixed by p(x) and the four per-w conditional
    statistics; each step follows a null direction of those constraints,
    oriented so the I(U;V|W) aggregate cannot increase, until a vertex
    with small support is reached.
    """
    _require_axes(joint, ("U", "V", "W", "X"))
    full = push_through_channel(joint, channel)
    before = _w_quantities(full)
    nx = channel.sizes[0]
    target = nx + 4
    p_w = marginal_tensor(joint, ["W"])
    support = list(np.flatnonzero(p_w > 0))
    if len(support) <= target:
        return ReductionOutcome(joint, {k: (v, v) for k, v in before.items()},
                                _support_sizes(joint), STATUS_ALREADY_SMALL)

    # Per-atom statistics of the fixed conditionals p(u,v,x|w).
    n_all = joint.axis_size("W")
    px_w = np.zeros((n_all, nx))
    h_y = np.zeros(n_all)
    h_z = np.zeros(n_all)
    i_uy = np.zeros(n_all)
    i_vz = np.zeros(n_all)
    i_uv = np.zeros(n_all)
    for w in support:
        slab = condition(full, "W", w)
        px_w[w] = marginal_tensor(slab, ["X"])
        h_y[w] = entropy(slab, ["Y"])
        h_z[w] = entropy(slab, ["Z"])
        i_uy[w] = mutual_information(slab, ["U"], ["Y"])
        i_vz[w] = mutual_information(slab, ["V"], ["Z"])
        i_uv[w] = mutual_information(slab, ["U"], ["V"])

    # One p(x) constraint is implied by the total-mass row; drop it.
    constraints = np.vstack([np.ones(n_all), px_w.T[: nx - 1], h_y, h_z, i_uy, i_vz])

    q = p_w.copy()
    steps = 0
    max_steps = len(support) - target
    while len(support) > target:
        if steps >= max_steps + 2:
            raise RuntimeError("support reduction failed to terminate")
        idx = np.array(support)
        d = _null_vector(constraints[:, idx])
        swing = float(d @ i_uv[idx])
        tie_tol = 1e-12
        if swing > tie_tol:
            d = -d
        elif abs(swing) <= tie_tol:
            d = _tie_break_sign(q[idx], d, idx)
        t, hits = _max_step(q[idx], d)
        q[idx] = np.clip(q[idx] + t * d, 0.0, None)
        q[idx[hits]] = 0.0
        support = [w for w in support if q[w] > 0]
        steps += 1
    q /= q.sum()

    w_axis = joint.axis_index("W")
    moved = np.moveaxis(joint.probs, w_axis, 0)
    new = np.zeros_like(moved)
    for w in np.flatnonzero(q > 0):
        new[w] = moved[w] / p_w[w] * q[w]
    result = JointDistribution(joint.axes, np.moveaxis(new, 0, w_axis))

    after = _w_quantities(push_through_channel(result, channel))
    preserved = {k: (before[k], after[k]) for k in before}
    px_dev = float(np.max(np.abs(marginal_tensor(result, ["X"])
                                 - marginal_tensor(joint, ["X"]))))
    return ReductionOutcome(result, preserved, _support_sizes(result),
                            STATUS_REDUCED,
                            {"steps": float(steps), "px_max_dev": px_dev})


def _max_step(q: np.ndarray, d: np.ndarray) -> tuple[float, np.ndarray]:
    """Largest t >= 0 with q + t*d >= 0, and the indices driven to zero."""
    neg = d < -1e-15
    if not neg.any():
        raise RuntimeError("null direction has no decreasing coordinate")
    ratios = q[neg] / -d[neg]
    t = float(ratios.min())
    hits_local = np.flatnonzero(neg)[ratios <= t * (1 + 1e-9)]
    return t, hits_local


def _tie_break_sign(q: np.ndarray, d: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """When both orientations leave I(U;V|W) unchanged, pick the one that
    eliminates the lowest-indexed atom, for determinism."""
    _, hits_pos = _max_step(q, d)
    _, hits_neg = _max_step(q, -d)
    return d if idx[hits_pos].min() <= idx[hits_neg].min() else -d


def reduce_u_support(joint: JointDistribution, lam: float = 0.0, gam: float = 0.0,
                     certificate_tol: float = CERTIFICATE_TOL,
                     objective_tol: float = OBJECTIVE_DRIFT_TOL) -> ReductionOutcome:
    """Drop one U atom at a stationary point of the weighted pair objective.

    Looks for a direction L'(u) with E[L'|X=x] = 0 everywhere; at a true
    maximizer any such direction must also satisfy E[L'|V,Z] = 0, which
    makes the objective affine in the tilt and lets us walk to the
    boundary for free.  When no direction passes the certificate (within
    certificate_tol) the point was not an extreme and the joint is
    returned untouched with the best residual achieved.
    """
    _require_axes(joint, ("U", "V", "X", "Y", "Z"))
    nx = joint.axis_size("X")
    p_u = marginal_tensor(joint, ["U"])
    u_support = np.flatnonzero(p_u > 0)
    j0 = weighted_pair_objective(joint, lam, gam)
    if len(u_support) <= nx:
        return ReductionOutcome(joint, {"objective": (j0, j0)},
                                _support_sizes(joint), STATUS_ALREADY_SMALL)

    # Admissible directions: null space of E[L'(U)|X=x] = 0 over support atoms.
    p_ux = marginal_tensor(joint, ["U", "X"])
    p_x = p_ux.sum(axis=0)
    cols = u_support
    a_rows = [p_ux[cols, x] / p_x[x] for x in range(nx) if p_x[x] > 0]
    amat = np.vstack(a_rows)
    _, sv, vt = np.linalg.svd(amat, full_matrices=True)
    rank = int(np.sum(sv > SV_CUTOFF * sv[0])) if sv.size and sv[0] > 0 else 0
    null_basis = vt[rank:].T  # columns span the admissible directions
    if null_basis.shape[1] == 0:
        raise np.linalg.LinAlgError("no admissible direction despite |U| > |X|")

    # Certificate operator: rows are p(u | v,z) over positive (v,z) atoms.
    p_uvz = marginal_tensor(joint, ["U", "V", "Z"])
    p_vz = p_uvz.sum(axis=0)
    pos_vz = p_vz > 0
    bmat = (p_uvz[:, pos_vz] / p_vz[pos_vz]).T[:, cols]

    # Most nearly certified direction: minimal ||E[L'|VZ]|| over unit L'.
    _, _, cvt = np.linalg.svd(bmat @ null_basis, full_matrices=True)
    coeff = cvt[-1]
    l_support = null_basis @ coeff
    l_support /= np.abs(l_support).max()
    residual = float(np.abs(bmat @ l_support).max())
    if residual > certificate_tol:
        return ReductionOutcome(joint, {"objective": (j0, j0)},
                                _support_sizes(joint), STATUS_NOT_AT_EXTREME,
                                {"certificate_residual": residual})

    l_u = np.zeros(joint.axis_size("U"))
    l_u[cols] = l_support
    uvx_axes = tuple(n for n in joint.axis_names if n in ("U", "V", "X"))
    shape = tuple(joint.axis_size(n) for n in uvx_axes)
    values = np.broadcast_to(
        l_u.reshape(tuple(s if n == "U" else 1 for n, s in zip(uvx_axes, shape))),
        shape) * (marginal_tensor(joint, uvx_axes) > 0)
    eps_lo, eps_hi = epsilon_range(joint, values, uvx_axes)
    direction = PerturbationDirection(values, eps_lo, eps_hi, uvx_axes)

    slope = ((1.0 + lam) * i_L(joint, direction, ["U"], ["Y"])
             + (1.0 + gam) * i_L(joint, direction, ["V"], ["Z"])
             - i_L(joint, direction, ["U"], ["V"]))

    candidates = []
    for eps in (eps_lo, eps_hi):
        if not math.isfinite(eps):
            continue
        tilted = _tilt_u_marginal(joint, l_u, eps)
        candidates.append((weighted_pair_objective(tilted, lam, gam), eps, tilted))
    if not candidates:
        raise RuntimeError("direction admits no finite boundary")
    preferred = max(c[1] for c in candidates) if slope >= 0 else min(c[1] for c in candidates)
    best = max(candidates, key=lambda c: (c[0], c[1] == preferred))
    j1, eps_star, result = best
    drift = j1 - j0
    if drift < -objective_tol:
        return ReductionOutcome(joint, {"objective": (j0, j0)},
                                _support_sizes(joint), STATUS_NOT_AT_EXTREME,
                                {"certificate_residual": residual,
                                 "objective_drift": drift})
    return ReductionOutcome(result, {"objective": (j0, j1)},
                            _support_sizes(result), STATUS_REDUCED,
                            {"certificate_residual": residual,
                             "objective_drift": drift, "eps": eps_star,
                             "slope": slope})


def _tilt_u_marginal(joint: JointDistribution, l_u: np.ndarray,
                     eps: float) -> JointDistribution:
    """p * (1 + eps*L'(u)) with the binding atoms zeroed exactly."""
    factor = 1.0 + eps * l_u
    factor[np.abs(factor) <= 1e-12] = 0.0
    if factor.min() < 0:
        raise ValueError(f"infeasible tilt: factor {factor.min()} < 0")
    u_axis = joint.axis_index("U")
    shape = tuple(s if i == u_axis else 1 for i, (_, s) in enumerate(joint.axes))
    new = joint.probs * factor.reshape(shape)
    return JointDistribution(joint.axes, new / new.sum())


def _swap_axis_names(joint: JointDistribution,
                     mapping: dict[str, str]) -> JointDistribution:
    axes = tuple((mapping.get(n, n), s) for n, s in joint.axes)
    return JointDistribution(axes, joint.probs)


def reduce_v_support(joint: JointDistribution, lam: float = 0.0, gam: float = 0.0,
                     certificate_tol: float = CERTIFICATE_TOL,
                     objective_tol: float = OBJECTIVE_DRIFT_TOL) -> ReductionOutcome:
    """Role-swapped reduce_u_support acting on V (certificate E[L'|U,Y])."""
    swap = {"U": "V", "V": "U", "Y": "Z", "Z": "Y"}
    outcome = reduce_u_support(_swap_axis_names(joint, swap), gam, lam,
                               certificate_tol, objective_tol)
    result = _swap_axis_names(outcome.result, swap)
    sizes = {swap.get(n, n): c for n, c in outcome.support_sizes.items()}
    return ReductionOutcome(result, outcome.preserved, sizes,
                            outcome.status, outcome.detail)


def extremize_x(joint: JointDistribution, channel: BroadcastChannel,
                weights: Sequence[float]) -> ReductionOutcome:
    """Push p(x|u,v,w) to a deterministic map, cell by cell.

    The weighted six-tuple objective is convex in the conditional kernel,
    so for each (u,v,w) cell the best of the |X| point masses is at least
    as good as the current mixture; cycling until no cell improves yields
    a deterministic kernel whose objective never dropped below the input.
    """
    _require_axes(joint, ("U", "V", "W", "X"))
    w6 = np.asarray(list(weights), dtype=float)
    if w6.shape != (6,) or w6.min() < 0:
        raise ValueError("weights must be six nonnegative reals")
    order = ("U", "V", "W", "X")
    perm = [joint.axis_index(n) for n in order]
    p4 = np.transpose(joint.probs, perm)
    nu, nv, nw, nx = p4.shape
    p_uvw = p4.sum(axis=3)
    kernel = np.zeros_like(p4)
    pos = p_uvw > 0
    kernel[pos] = p4[pos] / p_uvw[pos][..., None]
    kernel[~pos, 0] = 1.0

    def objective(k: np.ndarray) -> float:
        st = six_tuple_from_tensor(p_uvw[..., None] * k, channel)
        return float(w6 @ st.as_array())

    j_in = objective(kernel)
    cells = [tuple(c) for c in np.argwhere(pos)]
    current = j_in
    changed_any = False
    for _ in range(100):
        changed = False
        for cell in cells:
            row = kernel[cell].copy()
            was_det = bool(row.max() >= 1.0)
            x_old = int(row.argmax())
            best_x, best_val = 0, -math.inf
            for x in range(nx):
                kernel[cell] = 0.0
                kernel[cell][x] = 1.0
                val = objective(kernel)
                if val > best_val + 1e-15:
                    best_x, best_val = x, val
            if was_det and (best_x == x_old or best_val <= current + 1e-12):
                kernel[cell] = row  # no strict improvement: keep
            else:
                kernel[cell] = 0.0
                kernel[cell][best_x] = 1.0
                changed = True
                current = best_val
        changed_any = changed_any or changed
        if not changed:
            break
    j_out = objective(kernel)
    result_t = p_uvw[..., None] * kernel
    inv = np.argsort(perm)
    result = JointDistribution(joint.axes, np.transpose(result_t, inv))
    status = STATUS_REDUCED if changed_any else STATUS_ALREADY_SMALL
    return ReductionOutcome(result, {"objective": (j_in, j_out)},
                            _support_sizes(result), status)
