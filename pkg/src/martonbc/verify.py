"""Randomized verification suites behind the CLI `verify` command.

Each suite draws seeded random instances and checks an exact identity or
a derivative consistency property, reporting pass counts and the worst
residual observed.  The suites are also exercised directly by the test
suite, where the tolerances double as acceptance thresholds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import BroadcastChannel, random_channel
from .info_core import (
    JointDistribution,
    conditional_mutual_information,
    entropy,
    push_through_channel,
)
from .perturbation import (
    PerturbationDirection,
    center_direction,
    entropy_decomposition_check,
    fisher_information,
    h_L,
    perturb,
    stationarity_check,
    weighted_pair_objective,
)

EXACT_TOL = 1e-10
DERIVATIVE_TOL = 1e-5
FD_STEP = 1e-4
APPENDIX_VI_TOL = 1e-9


@dataclass
class VerifyReport:
    name: str
    trials: int
    passes: int
    worst: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.passes == self.trials

    def lines(self) -> list[str]:
        out = [f"{self.name}: {self.passes}/{self.trials} trials passed"]
        for key, val in self.worst.items():
            out.append(f"  worst {key}: {val:.3e}")
        return out


def random_perturbation_instance(rng: np.random.Generator
                                 ) -> tuple[JointDistribution, PerturbationDirection, float]:
    """A random joint over (U,V,X,Y,Z), an admissible direction, and a
    feasible interior eps."""
    nu, nv, nx = rng.integers(2, 4, size=3)
    ny, nz = rng.integers(2, 4, size=2)
    p = rng.dirichlet(np.ones(nu * nv * nx)).reshape(nu, nv, nx)
    core = JointDistribution((("U", int(nu)), ("V", int(nv)), ("X", int(nx))), p)
    channel = random_channel(int(rng.integers(0, 2 ** 31)), (int(nx), int(ny), int(nz)))
    base = push_through_channel(core, channel)
    direction = None
    for _ in range(10):
        raw = rng.normal(size=(nu, nv, nx))
        direction = center_direction(raw, base)
        if np.abs(direction.values).max() > 1e-6:
            break
    assert direction is not None
    hi = direction.eps_hi if math.isfinite(direction.eps_hi) else 1.0
    lo = direction.eps_lo if math.isfinite(direction.eps_lo) else -1.0
    frac = rng.uniform(0.2, 0.8)
    eps = frac * (hi if rng.uniform() < 0.5 else lo)
    return base, direction, float(eps)


_DECOMP_AXES = (["X"], ["U"], ["Y"], ["U", "Y"], ["V", "Z"], ["U", "V"],
                ["U", "V", "X", "Y", "Z"])
_DERIV_AXES = (["U"], ["U", "Y"], ["V", "Z"])


def run_lemma3_suite(trials: int, seed: int = 0) -> VerifyReport:
    """Exact entropy decomposition plus first/second derivative consistency
    along random tilted families."""
    rng = np.random.default_rng(seed)
    passes = 0
    worst = {"decomposition_residual": 0.0, "first_derivative_error": 0.0,
             "second_derivative_error": 0.0}
    for _ in range(trials):
        base, L, eps = random_perturbation_instance(rng)
        ok = True

        res = max(entropy_decomposition_check(base, L, eps, axes)[2]
                  for axes in _DECOMP_AXES)
        worst["decomposition_residual"] = max(worst["decomposition_residual"], res)
        ok &= res <= EXACT_TOL

        d1_err = 0.0
        d2_err = 0.0
        for axes in _DERIV_AXES:
            def h_at(e: float) -> float:
                return entropy(perturb(base, L, e), axes)

            fd1 = (h_at(FD_STEP) - h_at(-FD_STEP)) / (2 * FD_STEP)
            d1_err = max(d1_err, abs(h_L(base, L, axes) - fd1))
            fd2 = (h_at(FD_STEP) - 2 * h_at(0.0) + h_at(-FD_STEP)) / FD_STEP ** 2
            analytic = -math.log2(math.e) * fisher_information(base, L, 0.0, axes)
            d2_err = max(d2_err, abs(analytic - fd2))
        worst["first_derivative_error"] = max(worst["first_derivative_error"], d1_err)
        worst["second_derivative_error"] = max(worst["second_derivative_error"], d2_err)
        ok &= d1_err <= DERIVATIVE_TOL and d2_err <= DERIVATIVE_TOL

        passes += bool(ok)
    return VerifyReport("lemma3", trials, passes, worst)


def run_stationarity_suite(trials: int, seed: int = 0) -> VerifyReport:
    """Analytic first/second derivatives of the tilted pair objective
    against centered finite differences."""
    rng = np.random.default_rng(seed)
    passes = 0
    worst = {"first_derivative_error": 0.0, "second_derivative_error": 0.0}
    for _ in range(trials):
        base, L, _ = random_perturbation_instance(rng)
        lam = float(rng.uniform(0.0, 2.0))
        gam = float(rng.uniform(0.0, 2.0))
        report = stationarity_check(base, L, lam, gam)

        def obj(e: float, a: float, b: float) -> float:
            return weighted_pair_objective(perturb(base, L, e), a, b)

        fd1 = (obj(FD_STEP, lam, gam) - obj(-FD_STEP, lam, gam)) / (2 * FD_STEP)
        e1 = abs(report.first_derivative - fd1)
        fd2 = (obj(FD_STEP, 0, 0) - 2 * obj(0, 0, 0) + obj(-FD_STEP, 0, 0)) / FD_STEP ** 2
        e2 = abs(report.second_derivative - fd2)
        worst["first_derivative_error"] = max(worst["first_derivative_error"], e1)
        worst["second_derivative_error"] = max(worst["second_derivative_error"], e2)
        passes += bool(e1 <= DERIVATIVE_TOL and e2 <= DERIVATIVE_TOL)
    return VerifyReport("stationarity", trials, passes, worst)


def random_appendix_vi_instance(rng: np.random.Generator
                                ) -> tuple[JointDistribution, str]:
    """Binary U,V with X = U xor V or X = U and V, nondegenerate marginals,
    and a full-support distinguishing Y-kernel; returns the joint over
    (U,V,X,Y) and the map name."""
    while True:
        p_uv = rng.dirichlet(np.ones(4)).reshape(2, 2)
        if p_uv.min() < 0.02:
            continue
        pu1 = p_uv[1].sum()
        pv1 = p_uv[:, 1].sum()
        if not (0.05 <= pu1 <= 0.95 and 0.05 <= pv1 <= 0.95):
            continue
        name = "xor" if rng.uniform() < 0.5 else "and"
        x_of = (lambda u, v: u ^ v) if name == "xor" else (lambda u, v: u & v)
        px1 = sum(p_uv[u, v] for u in range(2) for v in range(2) if x_of(u, v))
        if not 0.05 <= px1 <= 0.95:
            continue
        q_y = rng.dirichlet(np.ones(2), size=2)
        if q_y.min() < 0.02 or abs(q_y[0, 0] - q_y[1, 0]) < 0.05:
            continue
        p = np.zeros((2, 2, 2, 2))
        for u in range(2):
            for v in range(2):
                x = x_of(u, v)
                p[u, v, x, :] = p_uv[u, v] * q_y[x]
        joint = JointDistribution((("U", 2), ("V", 2), ("X", 2), ("Y", 2)), p)
        return joint, name


def run_appendix_vi_suite(trials: int, seed: int = 0) -> VerifyReport:
    """Contrapositive of the deterministic-map proposition: on every
    nondegenerate xor/and instance with an informative Y, the auxiliaries
    cannot be conditionally independent given Y."""
    rng = np.random.default_rng(seed)
    passes = 0
    worst = {"min I(U;V|Y)": math.inf}
    for _ in range(trials):
        joint, _ = random_appendix_vi_instance(rng)
        i_uv_y = conditional_mutual_information(joint, ["U"], ["V"], ["Y"])
        worst["min I(U;V|Y)"] = min(worst["min I(U;V|Y)"], i_uv_y)
        passes += bool(i_uv_y > APPENDIX_VI_TOL)
    return VerifyReport("appendix-vi", trials, passes, worst)


SUITES = {
    "lemma3": run_lemma3_suite,
    "stationarity": run_stationarity_suite,
    "appendix-vi": run_appendix_vi_suite,
}
