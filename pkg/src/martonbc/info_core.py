"""Exact finite-alphabet probability and information primitives.

All quantities are in bits (base-2 logarithms).  Distributions are dense
tensors over named axes; every operation is pure and returns fresh,
immutable objects, so values can be shared freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from .channels import BroadcastChannel

SUM_TOL = 1e-12
NEG_TOL = 1e-12


class AxisError(ValueError):
    """Unknown, duplicate or overlapping axis names."""


class DistributionError(ValueError):
    """Tensor fails to be a probability distribution."""


def _xlog2x(p: np.ndarray) -> np.ndarray:
    """p * log2(p) with the 0*log(0)=0 convention."""
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = p[pos] * np.log2(p[pos])
    return out


def entropy_of_tensor(p: np.ndarray) -> float:
    """Shannon entropy in bits of an unlabelled probability tensor."""
    return float(-_xlog2x(np.asarray(p, dtype=float)).sum())


@dataclass(frozen=True)
class JointDistribution:
    """Dense joint probability tensor over named finite axes.

    axes:   ordered tuple of (axis-name, alphabet-size)
    probs:  nonnegative tensor of matching shape, summing to 1
    """

    axes: tuple[tuple[str, int], ...]
    probs: np.ndarray

    def __post_init__(self):
        axes = tuple((str(n), int(s)) for n, s in self.axes)
        names = [n for n, _ in axes]
        if len(set(names)) != len(names):
            raise AxisError(f"duplicate axis names in {names}")
        p = np.asarray(self.probs, dtype=float)
        if p.shape != tuple(s for _, s in axes):
            raise DistributionError(
                f"tensor shape {p.shape} does not match axes {axes}")
        if p.min(initial=0.0) < -NEG_TOL:
            raise DistributionError(f"negative probability {p.min()}")
        total = p.sum()
        if abs(total - 1.0) > SUM_TOL:
            raise DistributionError(f"probabilities sum to {total}, not 1")
        p = p.copy()
        np.clip(p, 0.0, None, out=p)
        p.flags.writeable = False
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "probs", p)

    @property
    def axis_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.axes)

    def axis_index(self, name: str) -> int:
        try:
            return self.axis_names.index(name)
        except ValueError:
            raise AxisError(f"unknown axis {name!r}; have {self.axis_names}")

    def axis_size(self, name: str) -> int:
        return self.axes[self.axis_index(name)][1]

    def has_axis(self, name: str) -> bool:
        return name in self.axis_names

    def support_size(self, name: str) -> int:
        """Number of atoms of the named axis carrying positive mass."""
        m = marginalize(self, [name])
        return int(np.count_nonzero(m.probs > 0))


def _resolve(dist: JointDistribution, axes: Iterable[str]) -> tuple[str, ...]:
    """Validate axis names and return them in the distribution's order."""
    wanted = list(axes)
    if len(set(wanted)) != len(wanted):
        raise AxisError(f"repeated axis names in {wanted}")
    for n in wanted:
        dist.axis_index(n)
    return tuple(n for n in dist.axis_names if n in set(wanted))


def marginal_tensor(dist: JointDistribution, keep: Iterable[str]) -> np.ndarray:
    """Marginal tensor over the kept axes, in the distribution's axis order."""
    keep_ordered = _resolve(dist, keep)
    drop = tuple(i for i, (n, _) in enumerate(dist.axes)
                 if n not in keep_ordered)
    return dist.probs.sum(axis=drop) if drop else dist.probs.copy()


def marginalize(dist: JointDistribution, keep: Iterable[str]) -> JointDistribution:
    """Marginal distribution over the kept axes (original axis order)."""
    keep_ordered = _resolve(dist, keep)
    p = marginal_tensor(dist, keep_ordered)
    axes = tuple((n, s) for n, s in dist.axes if n in set(keep_ordered))
    return JointDistribution(axes, p)


def condition(dist: JointDistribution, axis: str, value: int) -> JointDistribution:
    """Distribution of the remaining axes given axis == value.

    Raises DistributionError when the conditioning atom has zero mass.
    """
    i = dist.axis_index(axis)
    size = dist.axes[i][1]
    if not 0 <= value < size:
        raise AxisError(f"value {value} out of range for axis {axis} (size {size})")
    slab = np.take(dist.probs, value, axis=i)
    mass = slab.sum()
    if mass <= 0.0:
        raise DistributionError(
            f"conditioning on zero-probability atom {axis}={value}")
    axes = tuple(a for j, a in enumerate(dist.axes) if j != i)
    return JointDistribution(axes, slab / mass)


def entropy(dist: JointDistribution, axes: Iterable[str]) -> float:
    """H of the marginal over the named axes, in bits."""
    return entropy_of_tensor(marginal_tensor(dist, axes))


def mutual_information(dist: JointDistribution,
                       axes_a: Iterable[str],
                       axes_b: Iterable[str]) -> float:
    """I(A;B) = H(A) + H(B) - H(AB), in bits."""
    a = _resolve(dist, axes_a)
    b = _resolve(dist, axes_b)
    if set(a) & set(b):
        raise AxisError(f"overlapping axis sets {a} and {b}")
    return entropy(dist, a) + entropy(dist, b) - entropy(dist, a + b)


def conditional_mutual_information(dist: JointDistribution,
                                   axes_a: Iterable[str],
                                   axes_b: Iterable[str],
                                   axes_c: Iterable[str]) -> float:
    """I(A;B|C) = H(AC) + H(BC) - H(ABC) - H(C), in bits.

    Equals sum_c p(c) I(A;B|C=c); zero-probability conditioning atoms
    contribute nothing.
    """
    a = _resolve(dist, axes_a)
    b = _resolve(dist, axes_b)
    c = _resolve(dist, axes_c)
    for s, t in ((a, b), (a, c), (b, c)):
        if set(s) & set(t):
            raise AxisError(f"overlapping axis sets {s} and {t}")
    return (entropy(dist, a + c) + entropy(dist, b + c)
            - entropy(dist, a + b + c) - entropy(dist, c))


def push_through_channel(dist: JointDistribution,
                         channel: "BroadcastChannel",
                         input_axis: str = "X",
                         output_axes: tuple[str, str] = ("Y", "Z")) -> JointDistribution:
    """Attach channel outputs: p(..., x, y, z) = p(..., x) * q(y, z | x).

    The input must carry the channel-input axis and must not already have
    the output axes; the chain (everything else) -> X -> YZ then holds by
    construction.
    """
    ay, az = output_axes
    for n in output_axes:
        if dist.has_axis(n):
            raise AxisError(f"input already has axis {n}")
    i = dist.axis_index(input_axis)
    nx, ny, nz = channel.sizes
    if dist.axes[i][1] != nx:
        raise AxisError(
            f"axis {input_axis} has size {dist.axes[i][1]}, channel expects {nx}")
    moved = np.moveaxis(dist.probs, i, -1)             # (..., x)
    out = moved[..., :, None, None] * channel.kernel   # (..., x, y, z)
    out = np.moveaxis(out, -3, i)                      # X back in place
    axes = dist.axes + ((ay, ny), (az, nz))
    return JointDistribution(axes, out)


@dataclass(frozen=True)
class SixTuple:
    """The six rate coordinates attached to one auxiliary choice (U,V,W).

    Coordinates, in bits:
      c1 = I(W;Y)            c2 = I(W;Z)
      c3 = I(UW;Y)           c4 = I(VW;Z)
      c5 = s + I(W;Y)        c6 = s + I(W;Z)
    with s = I(U;Y|W) + I(V;Z|W) - I(U;V|W).
    """

    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    c6: float

    def as_array(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.c3, self.c4, self.c5, self.c6])

    def identity_residual(self) -> float:
        """|(c5 - c6) - (c1 - c2)|; zero up to rounding by construction."""
        return abs((self.c5 - self.c6) - (self.c1 - self.c2))

    def dominates(self, other: "SixTuple", tol: float = 0.0) -> bool:
        """Coordinatewise >= comparison (down-set membership test)."""
        return bool(np.all(self.as_array() + tol >= other.as_array()))


def six_tuple(dist: JointDistribution) -> SixTuple:
    """Six-tuple of a joint over U, V, W, Y, Z (X may also be present)."""
    c1 = mutual_information(dist, ["W"], ["Y"])
    c2 = mutual_information(dist, ["W"], ["Z"])
    c3 = mutual_information(dist, ["U", "W"], ["Y"])
    c4 = mutual_information(dist, ["V", "W"], ["Z"])
    s = (conditional_mutual_information(dist, ["U"], ["Y"], ["W"])
         + conditional_mutual_information(dist, ["V"], ["Z"], ["W"])
         - conditional_mutual_information(dist, ["U"], ["V"], ["W"]))
    return SixTuple(c1, c2, c3, c4, s + c1, s + c2)


def six_tuple_from_tensor(p_uvwx: np.ndarray, channel: "BroadcastChannel") -> SixTuple:
    """Six-tuple straight from a p(u,v,w,x) tensor; hot-path variant of
    six_tuple used inside optimizers."""
    q_y = channel.y_kernel
    q_z = channel.z_kernel
    p_uwx = p_uvwx.sum(axis=1)
    p_vwx = p_uvwx.sum(axis=0)
    p_wx = p_uwx.sum(axis=0)
    h_w = entropy_of_tensor(p_wx.sum(axis=1))
    h_uw = entropy_of_tensor(p_uwx.sum(axis=2))
    h_vw = entropy_of_tensor(p_vwx.sum(axis=2))
    h_uvw = entropy_of_tensor(p_uvwx.sum(axis=3))
    p_wy = p_wx @ q_y
    p_wz = p_wx @ q_z
    h_y = entropy_of_tensor(p_wy.sum(axis=0))
    h_z = entropy_of_tensor(p_wz.sum(axis=0))
    h_wy = entropy_of_tensor(p_wy)
    h_wz = entropy_of_tensor(p_wz)
    h_uwy = entropy_of_tensor(np.einsum("uwx,xy->uwy", p_uwx, q_y))
    h_vwz = entropy_of_tensor(np.einsum("vwx,xz->vwz", p_vwx, q_z))
    c1 = h_w + h_y - h_wy
    c2 = h_w + h_z - h_wz
    c3 = h_uw + h_y - h_uwy
    c4 = h_vw + h_z - h_vwz
    i_uy_w = h_uw + h_wy - h_uwy - h_w
    i_vz_w = h_vw + h_wz - h_vwz - h_w
    i_uv_w = h_uw + h_vw - h_uvw - h_w
    s = i_uy_w + i_vz_w - i_uv_w
    return SixTuple(c1, c2, c3, c4, s + c1, s + c2)
