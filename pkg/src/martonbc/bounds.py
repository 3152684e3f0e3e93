"""Sum-rate bound computations for two-receiver broadcast channels.

For binary-input channels the inner-bound sum rate is the larger of two
terms: a min-max over a two-atom time-sharing variable, solved through an
upper-concave-envelope construction, and a maximization over independent
binary auxiliaries driving a deterministic input map.  The outer-bound
sum rate is the max-min of three information expressions over
conditionally independent ternary auxiliaries.  A generic supporting-
hyperplane maximizer samples the computable six-coordinate region for
arbitrary input alphabets.

All optimizers are deterministic given (channel, config): random starts
come from a seeded generator, and multi-start winners are reduced with an
explicit value-then-witness tie-break.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channels import BroadcastChannel, validate
from .info_core import (
    JointDistribution,
    SixTuple,
    entropy_of_tensor,
    mutual_information,
    conditional_mutual_information,
    push_through_channel,
    six_tuple,
    six_tuple_from_tensor,
)
from .reduction import extremize_x

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class OptimizationConfig:
    grid_points: int = 201
    starts: int = 64
    seed: int = 0
    tol: float = 1e-7
    max_iters: int = 2000

    def __post_init__(self):
        if self.grid_points < 33 or self.grid_points % 2 == 0:
            raise ValueError(f"grid_points must be odd and >= 33, got {self.grid_points}")
        if self.starts < 1:
            raise ValueError(f"starts must be >= 1, got {self.starts}")
        if self.tol <= 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")


@dataclass(frozen=True)
class OptimizationResult:
    value: float
    kind: str
    witness: dict
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class HyperplaneWeights:
    l1: float
    l2: float
    l3: float
    l4: float
    l5: float
    l6: float

    def __post_init__(self):
        if min(self.as_array()) < 0:
            raise ValueError(f"hyperplane weights must be nonnegative: {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.l1, self.l2, self.l3, self.l4, self.l5, self.l6])

    @staticmethod
    def of(values: Sequence[float]) -> "HyperplaneWeights":
        vals = list(values)
        if len(vals) != 6:
            raise ValueError(f"expected 6 weights, got {len(vals)}")
        return HyperplaneWeights(*map(float, vals))


# --------------------------------------------------------------------------
# small numeric helpers (binary-input closed forms)
# --------------------------------------------------------------------------

def _ent(p: np.ndarray, axis: int = -1) -> np.ndarray:
    """Entropy in bits along an axis, vectorized, 0 log 0 = 0."""
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -terms.sum(axis=axis)


def _golden_max(f, lo: float, hi: float, tol: float, max_iter: int = 80):
    """Golden-section maximization of a unimodal scalar function."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    it = 0
    while b - a > tol and it < max_iter:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
        it += 1
    x = c if fc >= fd else d
    return x, max(fc, fd)


def _golden_min(f, lo: float, hi: float, tol: float, max_iter: int = 80):
    x, v = _golden_max(lambda t: -f(t), lo, hi, tol, max_iter)
    return x, -v


def _upper_hull(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Indices of the upper concave hull vertices of (x, y), x increasing."""
    hull: list[int] = []
    for i in range(len(x)):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            # pop i1 when it lies on or below chord (i0, i)
            if (y[i1] - y[i0]) * (x[i] - x[i0]) <= (y[i] - y[i0]) * (x[i1] - x[i0]):
                hull.pop()
            else:
                break
        hull.append(i)
    return np.array(hull)


def _project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    n = v.size
    a = -np.sort(-v)
    cums = (np.cumsum(a) - 1.0) / np.arange(1, n + 1)
    k = np.nonzero(a > cums)[0][-1]
    return np.maximum(v - cums[k], 0.0)


def _require_binary_input(channel: BroadcastChannel) -> None:
    if channel.sizes[0] != 2:
        raise ValueError(f"binary input channel required, |X| = {channel.sizes[0]}")


# --------------------------------------------------------------------------
# T(p) and term A: the two-atom time-sharing term
# --------------------------------------------------------------------------

def t_function(p: float, channel: BroadcastChannel) -> float:
    """max(I(X;Y), I(X;Z)) at input P(X=1) = p, in bits."""
    _require_binary_input(channel)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p = {p} outside [0, 1]")
    q_y, q_z = channel.y_kernel, channel.z_kernel
    i_y = _ent((1 - p) * q_y[0] + p * q_y[1]) - ((1 - p) * _ent(q_y[0]) + p * _ent(q_y[1]))
    i_z = _ent((1 - p) * q_z[0] + p * q_z[1]) - ((1 - p) * _ent(q_z[0]) + p * _ent(q_z[1]))
    return float(max(i_y, i_z))


class _BinaryCurves:
    """Vectorized output-entropy and T curves for a binary-input channel."""

    def __init__(self, channel: BroadcastChannel):
        self.q_y = channel.y_kernel
        self.q_z = channel.z_kernel
        self.hy_rows = _ent(self.q_y, axis=1)
        self.hz_rows = _ent(self.q_z, axis=1)

    def out_entropy_y(self, p):
        p = np.asarray(p, dtype=float)
        mix = (1 - p)[..., None] * self.q_y[0] + p[..., None] * self.q_y[1]
        return _ent(mix)

    def out_entropy_z(self, p):
        p = np.asarray(p, dtype=float)
        mix = (1 - p)[..., None] * self.q_z[0] + p[..., None] * self.q_z[1]
        return _ent(mix)

    def t_curve(self, p):
        p = np.asarray(p, dtype=float)
        i_y = self.out_entropy_y(p) - ((1 - p) * self.hy_rows[0] + p * self.hy_rows[1])
        i_z = self.out_entropy_z(p) - ((1 - p) * self.hz_rows[0] + p * self.hz_rows[1])
        return np.maximum(i_y, i_z)


def _pair_value(curves: _BinaryCurves, gamma: float, pl: float, pr: float,
                tol: float) -> tuple[float, float]:
    """Best two-point mixture value over the split weight, and that weight."""

    def g(p: float) -> float:
        arr = np.asarray([p])
        return float(curves.t_curve(arr)[0]
                     - gamma * curves.out_entropy_y(arr)[0]
                     - (1 - gamma) * curves.out_entropy_z(arr)[0])

    g_l, g_r = g(pl), g(pr)

    def phi(theta: float) -> float:
        q = np.asarray([theta * pl + (1 - theta) * pr])
        base = gamma * curves.out_entropy_y(q)[0] + (1 - gamma) * curves.out_entropy_z(q)[0]
        return base + theta * g_l + (1 - theta) * g_r

    if abs(pr - pl) < 1e-12:
        return phi(1.0), 1.0
    theta, val = _golden_max(phi, 0.0, 1.0, tol)
    # endpoints too: the mixture may degenerate to a single atom
    for th in (0.0, 1.0):
        v = phi(th)
        if v > val:
            theta, val = th, v
    return val, theta


def term_a_inner(channel: BroadcastChannel, gamma: float,
                 config: OptimizationConfig | None = None,
                 polish: bool = True) -> tuple[float, dict]:
    """Inner maximum of the time-sharing term at a fixed tilt gamma.

    Evaluates gamma*I(W;Y) + (1-gamma)*I(W;Z) + E_w T(p(X=1|W=w)) over all
    p(w, x) with a two-atom W, through the upper concave envelope of
    g(p) = T(p) - gamma*H_Y(p) - (1-gamma)*H_Z(p) on a grid, followed by a
    local golden-section polish of the two active envelope points.
    """
    _require_binary_input(channel)
    cfg = config or OptimizationConfig()
    curves = _BinaryCurves(channel)
    grid = np.linspace(0.0, 1.0, cfg.grid_points)
    hy = curves.out_entropy_y(grid)
    hz = curves.out_entropy_z(grid)
    g = curves.t_curve(grid) - gamma * hy - (1 - gamma) * hz
    hull = _upper_hull(grid, g)
    env = np.interp(grid, grid[hull], g[hull])
    total = gamma * hy + (1 - gamma) * hz + env
    i_star = int(np.argmax(total))
    q_star = grid[i_star]
    seg = int(np.searchsorted(grid[hull], q_star, side="right"))
    if q_star == grid[hull[seg - 1]]:
        pl = pr = float(grid[hull[seg - 1]])
    else:
        pl, pr = float(grid[hull[seg - 1]]), float(grid[hull[seg]])
    value, theta = _pair_value(curves, gamma, pl, pr, cfg.tol)
    if polish:
        step = grid[1] - grid[0]
        for _ in range(2):
            pl, _ = _golden_max(
                lambda p: _pair_value(curves, gamma, p, pr, cfg.tol)[0],
                max(0.0, pl - step), min(1.0, pl + step), cfg.tol)
            pr, _ = _golden_max(
                lambda p: _pair_value(curves, gamma, pl, p, cfg.tol)[0],
                max(0.0, pr - step), min(1.0, pr + step), cfg.tol)
        value, theta = _pair_value(curves, gamma, pl, pr, cfg.tol)
    witness = {"p_w": (theta, 1.0 - theta), "p_x1_given_w": (pl, pr)}
    return float(value), witness


def _evaluate_term_a_witness(channel: BroadcastChannel, gamma: float,
                             witness: dict) -> float:
    """Recompute the term-A objective of a witness through info_core."""
    theta = witness["p_w"][0]
    pl, pr = witness["p_x1_given_w"]
    p_wx = np.array([[theta * (1 - pl), theta * pl],
                     [(1 - theta) * (1 - pr), (1 - theta) * pr]])
    dist = push_through_channel(
        JointDistribution((("W", 2), ("X", 2)), p_wx), channel)
    val = (gamma * mutual_information(dist, ["W"], ["Y"])
           + (1 - gamma) * mutual_information(dist, ["W"], ["Z"]))
    for p_w, p1 in ((theta, pl), (1 - theta, pr)):
        val += p_w * t_function(p1, channel)
    return float(val)


def term_a(channel: BroadcastChannel,
           config: OptimizationConfig | None = None) -> OptimizationResult:
    """The time-sharing part of the binary-input sum rate.

    Outer minimization over the tilt gamma in [0,1] by golden section;
    the inner maximum is a pointwise max of functions affine in gamma,
    hence convex in gamma.
    """
    _require_binary_input(channel)
    cfg = config or OptimizationConfig()
    t0 = time.perf_counter()

    def inner(gamma: float) -> float:
        return term_a_inner(channel, gamma, cfg, polish=False)[0]

    gamma_star, _ = _golden_min(inner, 0.0, 1.0, cfg.tol, max_iter=60)
    _, witness = term_a_inner(channel, gamma_star, cfg, polish=True)
    witness = dict(witness, gamma=float(gamma_star))
    value = _evaluate_term_a_witness(channel, gamma_star, witness)
    return OptimizationResult(
        value=value, kind="term_a", witness=witness,
        diagnostics={"gamma": float(gamma_star),
                     "wall_time": time.perf_counter() - t0})


# --------------------------------------------------------------------------
# term B: independent binary auxiliaries with a deterministic input map
# --------------------------------------------------------------------------

ALL_BINARY_MAPS = [(m >> 3 & 1, m >> 2 & 1, m >> 1 & 1, m & 1) for m in range(16)]


def _term_b_value(channel: BroadcastChannel, fmap: tuple[int, int, int, int],
                  a: float, b: float) -> float:
    """I(U;Y) + I(V;Z) for P(U=1)=a, P(V=1)=b, X = fmap(U,V)."""
    q_y, q_z = channel.y_kernel, channel.z_kernel
    f00, f01, f10, f11 = fmap
    py_u0 = (1 - b) * q_y[f00] + b * q_y[f01]
    py_u1 = (1 - b) * q_y[f10] + b * q_y[f11]
    py = (1 - a) * py_u0 + a * py_u1
    i_uy = _ent(py) - ((1 - a) * _ent(py_u0) + a * _ent(py_u1))
    pz_v0 = (1 - a) * q_z[f00] + a * q_z[f10]
    pz_v1 = (1 - a) * q_z[f01] + a * q_z[f11]
    pz = (1 - b) * pz_v0 + b * pz_v1
    i_vz = _ent(pz) - ((1 - b) * _ent(pz_v0) + b * _ent(pz_v1))
    return float(i_uy + i_vz)


def term_b(channel: BroadcastChannel,
           config: OptimizationConfig | None = None) -> OptimizationResult:
    """max I(U;Y) + I(V;Z) over independent binary U, V and deterministic
    X = f(U,V); all 16 maps are scanned on an (a,b) grid then polished."""
    _require_binary_input(channel)
    cfg = config or OptimizationConfig()
    t0 = time.perf_counter()
    q_y, q_z = channel.y_kernel, channel.z_kernel
    grid = np.linspace(0.0, 1.0, cfg.grid_points)
    a_col = grid[:, None]
    best = (-math.inf, 0, 0.5, 0.5)
    per_map = []
    for m, fmap in enumerate(ALL_BINARY_MAPS):
        f00, f01, f10, f11 = fmap
        py_u0 = (1 - grid)[:, None] * q_y[f00] + grid[:, None] * q_y[f01]  # (b, ny)
        py_u1 = (1 - grid)[:, None] * q_y[f10] + grid[:, None] * q_y[f11]
        h_u0 = _ent(py_u0, axis=1)
        h_u1 = _ent(py_u1, axis=1)
        py = (1 - a_col)[..., None] * py_u0[None] + a_col[..., None] * py_u1[None]
        i_uy = _ent(py) - ((1 - a_col) * h_u0[None] + a_col * h_u1[None])
        pz_v0 = (1 - grid)[:, None] * q_z[f00] + grid[:, None] * q_z[f10]  # (a, nz)
        pz_v1 = (1 - grid)[:, None] * q_z[f01] + grid[:, None] * q_z[f11]
        h_v0 = _ent(pz_v0, axis=1)
        h_v1 = _ent(pz_v1, axis=1)
        pz = ((1 - grid)[None, :, None] * pz_v0[:, None]
              + grid[None, :, None] * pz_v1[:, None])
        i_vz = _ent(pz) - ((1 - grid)[None, :] * h_v0[:, None]
                           + grid[None, :] * h_v1[:, None])
        total = i_uy + i_vz
        flat = int(np.argmax(total))
        ia, ib = divmod(flat, cfg.grid_points)
        per_map.append(float(total[ia, ib]))
        if total[ia, ib] > best[0] + 1e-15:
            best = (float(total[ia, ib]), m, float(grid[ia]), float(grid[ib]))
    _, m_best, a, b = best
    fmap = ALL_BINARY_MAPS[m_best]
    step = grid[1] - grid[0]
    for _ in range(3):
        a, _ = _golden_max(lambda t: _term_b_value(channel, fmap, t, b),
                           max(0.0, a - step), min(1.0, a + step), cfg.tol)
        b, _ = _golden_max(lambda t: _term_b_value(channel, fmap, a, t),
                           max(0.0, b - step), min(1.0, b + step), cfg.tol)
    witness = {"map": fmap, "p_u1": float(a), "p_v1": float(b)}
    value = _evaluate_term_b_witness(channel, witness)
    return OptimizationResult(
        value=value, kind="term_b", witness=witness,
        diagnostics={"per_map_grid_values": per_map,
                     "wall_time": time.perf_counter() - t0})


def _term_b_joint(witness: dict) -> JointDistribution:
    fmap = witness["map"]
    a, b = witness["p_u1"], witness["p_v1"]
    p = np.zeros((2, 2, 2))
    for u in range(2):
        for v in range(2):
            x = fmap[u * 2 + v]
            p[u, v, x] = (a if u else 1 - a) * (b if v else 1 - b)
    return JointDistribution((("U", 2), ("V", 2), ("X", 2)), p)


def _evaluate_term_b_witness(channel: BroadcastChannel, witness: dict) -> float:
    dist = push_through_channel(_term_b_joint(witness), channel)
    return float(mutual_information(dist, ["U"], ["Y"])
                 + mutual_information(dist, ["V"], ["Z"]))


# --------------------------------------------------------------------------
# Marton sum rate (binary input): max of the two terms
# --------------------------------------------------------------------------

MARTON_CAVEAT = ("value equals the Marton sum rate only if the inner and outer "
                 "regions coincide for this channel; otherwise it is a lower bound")


def marton_sum_rate(channel: BroadcastChannel,
                    config: OptimizationConfig | None = None,
                    strict: bool = False) -> OptimizationResult:
    """Binary-input inner-bound sum rate: max(term_a, term_b).

    With strict=True the positivity hypothesis (all entries of q(y|x) and
    q(z|x) nonzero) is enforced as an error; otherwise a violation is
    recorded in the diagnostics.
    """
    _require_binary_input(channel)
    cfg = config or OptimizationConfig()
    report = validate(channel)
    if not report.strictly_positive:
        if strict:
            raise ValueError("channel violates the strict positivity hypothesis")
    res_a = term_a(channel, cfg)
    res_b = term_b(channel, cfg)
    winner = res_a if res_a.value >= res_b.value else res_b
    return OptimizationResult(
        value=winner.value, kind="marton",
        witness={"winner": winner.kind, "term_a": res_a, "term_b": res_b},
        diagnostics={"caveat": MARTON_CAVEAT,
                     "strictly_positive": report.strictly_positive,
                     "term_a_value": res_a.value, "term_b_value": res_b.value})


# --------------------------------------------------------------------------
# Nair-El Gamal outer-bound sum rate
# --------------------------------------------------------------------------

NE_CARD = 3  # |U| = |V| = 3 in the min-of-three characterization


def _ne_normalize(px: np.ndarray, pux: np.ndarray, pvx: np.ndarray):
    px = np.maximum(px, 0.0)
    px = px / px.sum()
    pux = np.maximum(pux, 0.0)
    pux = pux / pux.sum(axis=1, keepdims=True)
    pvx = np.maximum(pvx, 0.0)
    pvx = pvx / pvx.sum(axis=1, keepdims=True)
    return px, pux, pvx


def _cond_entropy(p_joint: np.ndarray, p_marg: np.ndarray) -> float:
    """sum_a p(a) H(row_a / p(a)) with zero-mass rows skipped."""
    pos = p_marg > 0
    rows = p_joint[pos] / p_marg[pos, None]
    return float((p_marg[pos] * _ent(rows, axis=1)).sum())


def _ne_terms(px: np.ndarray, pux: np.ndarray, pvx: np.ndarray,
              q_y: np.ndarray, q_z: np.ndarray) -> np.ndarray:
    """(I(U;Y)+I(V;Z), I(U;Y)+I(X;Z|U), I(V;Z)+I(X;Y|V)), in bits."""
    px, pux, pvx = _ne_normalize(px, pux, pvx)
    h_y_x = float(px @ _ent(q_y, axis=1))
    h_z_x = float(px @ _ent(q_z, axis=1))
    h_y = float(_ent(px @ q_y))
    h_z = float(_ent(px @ q_z))
    pxu = px[:, None] * pux             # joint p(x, u)
    pu = pxu.sum(axis=0)
    h_y_u = _cond_entropy(pxu.T @ q_y, pu)
    h_z_u = _cond_entropy(pxu.T @ q_z, pu)
    pxv = px[:, None] * pvx
    pv = pxv.sum(axis=0)
    h_z_v = _cond_entropy(pxv.T @ q_z, pv)
    h_y_v = _cond_entropy(pxv.T @ q_y, pv)
    i_uy = h_y - h_y_u
    i_vz = h_z - h_z_v
    i_xz_u = h_z_u - h_z_x              # H(Z|XU) = H(Z|X)
    i_xy_v = h_y_v - h_y_x
    return np.array([i_uy + i_vz, i_uy + i_xz_u, i_vz + i_xy_v])


def _ne_structured_starts(nx: int) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Deterministic seeds: X-revealing and constant auxiliaries."""
    uniform_x = np.full(nx, 1.0 / nx)
    embed = np.zeros((nx, NE_CARD))
    embed[np.arange(nx), np.arange(nx) % NE_CARD] = 1.0
    const = np.zeros((nx, NE_CARD))
    const[:, 0] = 1.0
    flat = np.full((nx, NE_CARD), 1.0 / NE_CARD)
    return [
        (uniform_x.copy(), embed.copy(), const.copy()),   # U=X, V constant
        (uniform_x.copy(), const.copy(), embed.copy()),   # U constant, V=X
        (uniform_x.copy(), embed.copy(), embed.copy()),   # U=V=X
        (uniform_x.copy(), flat.copy(), flat.copy()),
    ]


def ne_outer_sum_rate(channel: BroadcastChannel,
                      config: OptimizationConfig | None = None) -> OptimizationResult:
    """Outer-bound sum rate: maximize
        min(I(U;Y)+I(V;Z), I(U;Y)+I(X;Z|U), I(V;Z)+I(X;Y|V))
    over p(x) and conditionally independent p(u|x), p(v|x) with ternary
    U, V.  Multi-start projected subgradient ascent on the min; when
    several terms tie at the minimum their finite-difference gradients
    are averaged before the simplex-projected step.
    """
    cfg = config or OptimizationConfig()
    t0 = time.perf_counter()
    nx = channel.sizes[0]
    q_y, q_z = channel.y_kernel, channel.z_kernel
    rng = np.random.default_rng(cfg.seed)

    starts = _ne_structured_starts(nx)
    while len(starts) < cfg.starts:
        starts.append((rng.dirichlet(np.ones(nx)),
                       rng.dirichlet(np.ones(NE_CARD), size=nx),
                       rng.dirichlet(np.ones(NE_CARD), size=nx)))
    starts = starts[: cfg.starts]

    def objective(theta: np.ndarray) -> float:
        px, pux, pvx = _unpack(theta)
        return float(_ne_terms(px, pux, pvx, q_y, q_z).min())

    def terms_of(theta: np.ndarray) -> np.ndarray:
        px, pux, pvx = _unpack(theta)
        return _ne_terms(px, pux, pvx, q_y, q_z)

    def _unpack(theta: np.ndarray):
        px = theta[:nx]
        pux = theta[nx: nx + nx * NE_CARD].reshape(nx, NE_CARD)
        pvx = theta[nx + nx * NE_CARD:].reshape(nx, NE_CARD)
        return px, pux, pvx

    def _pack(px, pux, pvx) -> np.ndarray:
        return np.concatenate([px.ravel(), pux.ravel(), pvx.ravel()])

    blocks = [(0, nx)] + [(nx + i * NE_CARD, nx + (i + 1) * NE_CARD) for i in range(nx)] \
        + [(nx + nx * NE_CARD + i * NE_CARD, nx + nx * NE_CARD + (i + 1) * NE_CARD)
           for i in range(nx)]

    def _project(theta: np.ndarray) -> np.ndarray:
        out = theta.copy()
        for lo, hi in blocks:
            out[lo:hi] = _project_simplex(out[lo:hi])
        return out

    fd_step = 1e-5
    best_theta, best_val = None, -math.inf
    converged = 0
    iters_used = []
    for px0, pux0, pvx0 in starts:
        theta = _project(_pack(px0, pux0, pvx0))
        val = objective(theta)
        alpha = 0.25
        stalled = 0
        it = 0
        while it < cfg.max_iters and stalled < 3:
            terms = terms_of(theta)
            active = np.nonzero(terms <= terms.min() + 1e-9)[0]
            grad = np.zeros((3, theta.size))
            for k in range(theta.size):
                bump = np.zeros(theta.size)
                bump[k] = fd_step
                grad[:, k] = (terms_of(theta + bump) - terms_of(theta - bump)) / (2 * fd_step)
            g = grad[active].mean(axis=0)
            for lo, hi in blocks:
                g[lo:hi] -= g[lo:hi].mean()
            gain = 0.0
            a = alpha
            while a > 1e-9:
                cand = _project(theta + a * g)
                cv = objective(cand)
                if cv > val + 1e-12:
                    gain = cv - val
                    theta, val = cand, cv
                    alpha = min(a * 1.5, 1.0)
                    break
                a *= 0.5
            stalled = stalled + 1 if gain < cfg.tol else 0
            it += 1
        iters_used.append(it)
        if it < cfg.max_iters:
            converged += 1
        if (val > best_val + 1e-15
                or (abs(val - best_val) <= 1e-15 and best_theta is not None
                    and theta.tobytes() < best_theta.tobytes())):
            best_theta, best_val = theta.copy(), val

    px, pux, pvx = (_ne_normalize(*_unpack(best_theta)))
    witness = {"p_x": px, "p_u_given_x": pux, "p_v_given_x": pvx}
    value, terms = _evaluate_ne_witness(channel, witness)
    return OptimizationResult(
        value=value, kind="ne_outer",
        witness=dict(witness, terms=terms),
        diagnostics={"starts": len(starts), "converged": converged,
                     "iterations": iters_used,
                     "wall_time": time.perf_counter() - t0})


def _ne_witness_joint(channel: BroadcastChannel, witness: dict) -> JointDistribution:
    px = np.asarray(witness["p_x"])
    pux = np.asarray(witness["p_u_given_x"])
    pvx = np.asarray(witness["p_v_given_x"])
    nx = px.size
    p = np.einsum("x,xu,xv->uvx", px, pux, pvx)
    return JointDistribution((("U", NE_CARD), ("V", NE_CARD), ("X", nx)), p)


def _evaluate_ne_witness(channel: BroadcastChannel, witness: dict
                         ) -> tuple[float, tuple[float, float, float]]:
    dist = push_through_channel(_ne_witness_joint(channel, witness), channel)
    i_uy = mutual_information(dist, ["U"], ["Y"])
    i_vz = mutual_information(dist, ["V"], ["Z"])
    t1 = i_uy + i_vz
    t2 = i_uy + conditional_mutual_information(dist, ["X"], ["Z"], ["U"])
    t3 = i_vz + conditional_mutual_information(dist, ["X"], ["Y"], ["V"])
    return float(min(t1, t2, t3)), (float(t1), float(t2), float(t3))


# --------------------------------------------------------------------------
# supporting-hyperplane maximization over the computable region
# --------------------------------------------------------------------------

def hyperplane_max(channel: BroadcastChannel,
                   weights: HyperplaneWeights | Sequence[float],
                   config: OptimizationConfig | None = None) -> OptimizationResult:
    """Maximize sum_i w_i * (six-tuple coordinate i) over joints with
    |U| = |V| = |X|, |W| = |X|+4 and deterministic x(u,v,w).

    Multi-start: random p(u,v,w) plus a random conditional kernel, pushed
    to a deterministic map by extremize_x, then cyclic mass-shift ascent
    over the p(u,v,w) cells, alternating until stable.
    """
    if not isinstance(weights, HyperplaneWeights):
        weights = HyperplaneWeights.of(weights)
    w6 = weights.as_array()
    cfg = config or OptimizationConfig()
    t0 = time.perf_counter()
    nx, _, _ = channel.sizes
    nu = nv = nx
    nw = nx + 4
    rng = np.random.default_rng(cfg.seed)
    axes = (("U", nu), ("V", nv), ("W", nw), ("X", nx))

    def objective_tensor(p4: np.ndarray) -> float:
        return float(w6 @ six_tuple_from_tensor(p4, channel).as_array())

    def cyclic_ascent(p_uvw: np.ndarray, kernel: np.ndarray
                      ) -> tuple[np.ndarray, float]:
        flat = p_uvw.ravel().copy()
        current = objective_tensor((flat.reshape(p_uvw.shape))[..., None] * kernel)
        tgrid = np.linspace(0.0, 0.999, 17)
        for _ in range(8):
            moved = False
            for i in range(flat.size):
                pi = flat[i]
                if pi >= 1.0 - 1e-12:
                    continue

                def reweighted(t: float) -> np.ndarray:
                    out = flat * ((1.0 - t) / (1.0 - pi))
                    out[i] = t
                    return out

                def val(t: float) -> float:
                    f = reweighted(t)
                    return objective_tensor(f.reshape(p_uvw.shape)[..., None] * kernel)

                cand_vals = [val(t) for t in tgrid]
                j = int(np.argmax(cand_vals))
                lo = tgrid[max(j - 1, 0)]
                hi = tgrid[min(j + 1, len(tgrid) - 1)]
                t_star, v_star = _golden_max(val, lo, hi, cfg.tol, max_iter=40)
                if max(v_star, cand_vals[j]) > current + 1e-12:
                    t_star = t_star if v_star >= cand_vals[j] else tgrid[j]
                    flat = reweighted(t_star)
                    current = max(v_star, cand_vals[j])
                    moved = True
            if not moved:
                break
        return flat.reshape(p_uvw.shape), current

    candidates: list[tuple[float, bytes, np.ndarray]] = []

    def add_candidate(p4: np.ndarray) -> None:
        candidates.append((objective_tensor(p4), p4.tobytes(), p4))

    for _ in range(cfg.starts):
        p_uvw = rng.dirichlet(np.ones(nu * nv * nw)).reshape(nu, nv, nw)
        kernel = rng.dirichlet(np.ones(nx), size=(nu, nv, nw))
        joint = JointDistribution(axes, p_uvw[..., None] * kernel)
        out = extremize_x(joint, channel, w6)
        p4 = np.asarray(out.result.probs)
        kernel = _kernel_of(p4)
        prev = -math.inf
        for _ in range(10):
            p_uvw, cur = cyclic_ascent(p4.sum(axis=3), kernel)
            joint = JointDistribution(axes, p_uvw[..., None] * kernel)
            out = extremize_x(joint, channel, w6)
            p4 = np.asarray(out.result.probs)
            kernel = _kernel_of(p4)
            cur = objective_tensor(p4)
            if cur <= prev + cfg.tol:
                break
            prev = cur
        add_candidate(p4)
        if weights.l5 == 0.0 and weights.l6 == 0.0:
            add_candidate(_reveal_x(p4))

    # winner: max value, ties broken by lexicographically smallest witness
    _, _, p4_best = sorted(candidates, key=lambda c: (-c[0], c[1]))[0]
    witness_joint = JointDistribution(axes, p4_best)
    st = six_tuple(push_through_channel(witness_joint, channel))
    value = float(w6 @ st.as_array())
    return OptimizationResult(
        value=value, kind="hyperplane",
        witness={"joint": witness_joint, "six_tuple": st, "weights": weights},
        diagnostics={"starts": cfg.starts,
                     "candidate_values": sorted(c[0] for c in candidates),
                     "wall_time": time.perf_counter() - t0})


def _kernel_of(p4: np.ndarray) -> np.ndarray:
    p3 = p4.sum(axis=3)
    kernel = np.zeros_like(p4)
    pos = p3 > 0
    kernel[pos] = p4[pos] / p3[pos][..., None]
    kernel[~pos, 0] = 1.0
    return kernel


def _reveal_x(p4: np.ndarray) -> np.ndarray:
    """Replace U and V by X, keeping p(w, x): valid when the s-coordinates
    carry no weight, and always at least as good for the first four."""
    nx = p4.shape[3]
    p_wx = p4.sum(axis=(0, 1))
    out = np.zeros_like(p4)
    for x in range(nx):
        out[x, x, :, x] = p_wx[:, x]
    return out


def region_sample(channel: BroadcastChannel,
                  weight_list: Sequence[HyperplaneWeights | Sequence[float]],
                  config: OptimizationConfig | None = None
                  ) -> list[tuple[HyperplaneWeights, SixTuple]]:
    """Support-function sampling: hyperplane_max over a list of weights."""
    out = []
    for w in weight_list:
        res = hyperplane_max(channel, w, config)
        out.append((res.witness["weights"], res.witness["six_tuple"]))
    return out


# --------------------------------------------------------------------------
# re-evaluation of witnesses (value/witness consistency)
# --------------------------------------------------------------------------

def reevaluate(channel: BroadcastChannel, result: OptimizationResult) -> float:
    """Recompute a result's value from its witness through info_core."""
    if result.kind == "term_a":
        return _evaluate_term_a_witness(channel, result.witness["gamma"],
                                        result.witness)
    if result.kind == "term_b":
        return _evaluate_term_b_witness(channel, result.witness)
    if result.kind == "marton":
        winner = result.witness[result.witness["winner"]]
        return reevaluate(channel, winner)
    if result.kind == "ne_outer":
        return _evaluate_ne_witness(channel, result.witness)[0]
    if result.kind == "hyperplane":
        st = six_tuple(push_through_channel(result.witness["joint"], channel))
        return float(result.witness["weights"].as_array() @ st.as_array())
    raise ValueError(f"unknown result kind {result.kind!r}")
