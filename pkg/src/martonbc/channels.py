"""Broadcast channel construction, validation and text-file I/O.

A two-receiver channel is the stochastic kernel q(y,z|x), stored densely
as an |X| x |Y| x |Z| tensor.  The file format is plain text: a size
header line ``|X| |Y| |Z|`` followed by one line per x holding the
|Y|*|Z| probabilities in row-major (y-major, z-minor) order; lines
starting with ``#`` are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

ROW_SUM_TOL = 1e-9


class ChannelFormatError(ValueError):
    """Malformed channel file or kernel."""


@dataclass(frozen=True)
class BroadcastChannel:
    """Memoryless broadcast channel q(y,z|x)."""

    kernel: np.ndarray  # shape (|X|, |Y|, |Z|)

    def __post_init__(self):
        k = np.asarray(self.kernel, dtype=float)
        if k.ndim != 3:
            raise ChannelFormatError(f"kernel must be 3-D, got shape {k.shape}")
        if k.min() < 0:
            raise ChannelFormatError(f"negative kernel entry {k.min()}")
        rows = k.sum(axis=(1, 2))
        if np.max(np.abs(rows - 1.0)) > ROW_SUM_TOL:
            raise ChannelFormatError(f"row sums {rows} deviate from 1")
        k = k.copy()
        k.flags.writeable = False
        object.__setattr__(self, "kernel", k)

    @property
    def sizes(self) -> tuple[int, int, int]:
        return self.kernel.shape  # type: ignore[return-value]

    @cached_property
    def y_kernel(self) -> np.ndarray:
        """Marginal kernel q(y|x), shape (|X|, |Y|)."""
        m = self.kernel.sum(axis=2)
        m.flags.writeable = False
        return m

    @cached_property
    def z_kernel(self) -> np.ndarray:
        """Marginal kernel q(z|x), shape (|X|, |Z|)."""
        m = self.kernel.sum(axis=1)
        m.flags.writeable = False
        return m

    @cached_property
    def strictly_positive(self) -> bool:
        """True when both marginal kernels have no zero entry."""
        return bool(self.y_kernel.min() > 0 and self.z_kernel.min() > 0)


@dataclass(frozen=True)
class ChannelReport:
    """Validation summary: row-sum residuals and the positivity hypothesis."""

    row_sum_residual: float
    y_positive: bool
    z_positive: bool

    @property
    def valid(self) -> bool:
        return self.row_sum_residual <= ROW_SUM_TOL

    @property
    def strictly_positive(self) -> bool:
        return self.y_positive and self.z_positive


def validate(channel: BroadcastChannel) -> ChannelReport:
    rows = channel.kernel.sum(axis=(1, 2))
    return ChannelReport(
        row_sum_residual=float(np.max(np.abs(rows - 1.0))),
        y_positive=bool(channel.y_kernel.min() > 0),
        z_positive=bool(channel.z_kernel.min() > 0),
    )


def product_channel(q_y: np.ndarray, q_z: np.ndarray) -> BroadcastChannel:
    """Compose marginal kernels into q(y,z|x) = q(y|x) q(z|x)."""
    q_y = np.asarray(q_y, dtype=float)
    q_z = np.asarray(q_z, dtype=float)
    if q_y.ndim != 2 or q_z.ndim != 2 or q_y.shape[0] != q_z.shape[0]:
        raise ChannelFormatError("marginal kernels must share the input alphabet")
    return BroadcastChannel(q_y[:, :, None] * q_z[:, None, :])


def binary_example(alpha: float, beta: float) -> BroadcastChannel:
    """The binary channel family:

      q(Y=0|X=0)=alpha, q(Y=0|X=1)=beta,
      q(Z=0|X=0)=1-beta, q(Z=0|X=1)=1-alpha,

    with Y and Z conditionally independent given X.
    """
    if not (0.0 < alpha < 1.0 and 0.0 < beta < 1.0):
        raise ValueError(f"alpha={alpha}, beta={beta} must lie strictly inside (0,1)")
    q_y = np.array([[alpha, 1.0 - alpha], [beta, 1.0 - beta]])
    q_z = np.array([[1.0 - beta, beta], [1.0 - alpha, alpha]])
    return product_channel(q_y, q_z)


def random_channel(seed: int, sizes: tuple[int, int, int]) -> BroadcastChannel:
    """Kernel with each row q(.,.|x) drawn from a flat Dirichlet; deterministic in seed."""
    nx, ny, nz = sizes
    if min(nx, ny, nz) < 1:
        raise ValueError(f"sizes {sizes} must all be >= 1")
    rng = np.random.default_rng(seed)
    rows = rng.dirichlet(np.ones(ny * nz), size=nx)
    return BroadcastChannel(rows.reshape(nx, ny, nz))


def save(channel: BroadcastChannel, path: str) -> None:
    nx, ny, nz = channel.sizes
    lines = [f"{nx} {ny} {nz}"]
    for x in range(nx):
        row = channel.kernel[x].reshape(ny * nz)
        lines.append(" ".join(f"{v:.17g}" for v in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load(path: str) -> BroadcastChannel:
    with open(path, encoding="utf-8") as fh:
        raw = fh.readlines()
    rows: list[tuple[int, list[str]]] = []  # (1-based line number, tokens)
    for i, line in enumerate(raw, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        rows.append((i, stripped.split()))
    if not rows:
        raise ChannelFormatError(f"{path}: empty channel file")
    hd_line, header = rows[0]
    if len(header) != 3:
        raise ChannelFormatError(
            f"{path}:{hd_line}: header must be '|X| |Y| |Z|', got {' '.join(header)!r}")
    try:
        nx, ny, nz = (int(t) for t in header)
    except ValueError:
        raise ChannelFormatError(f"{path}:{hd_line}: non-integer size in header")
    body = rows[1:]
    if len(body) != nx:
        raise ChannelFormatError(
            f"{path}:{hd_line}: expected {nx} kernel rows, found {len(body)}")
    kernel = np.zeros((nx, ny, nz))
    for x, (ln, tokens) in enumerate(body):
        if len(tokens) != ny * nz:
            raise ChannelFormatError(
                f"{path}:{ln}: expected {ny * nz} entries, found {len(tokens)}")
        try:
            vals = np.array([float(t) for t in tokens])
        except ValueError:
            raise ChannelFormatError(f"{path}:{ln}: non-numeric probability")
        if vals.min() < 0:
            raise ChannelFormatError(f"{path}:{ln}: negative probability")
        kernel[x] = vals.reshape(ny, nz)
    try:
        return BroadcastChannel(kernel)
    except ChannelFormatError as exc:
        raise ChannelFormatError(f"{path}: {exc}") from exc
