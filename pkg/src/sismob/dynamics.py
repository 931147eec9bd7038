"""Deterministic continuum dynamics.

The coupled system on n regions:

    dp/dt = (B - D - L(x)) p - diag(p) B p      (infected fractions)
    dx/dt = Q^T x                               (population fractions)

integrated jointly with classic fixed-step RK4. The infected-fraction
box [0,1]^n is invariant for the exact flow; the integrator clips
floating-point drift up to 1e-9 and treats anything larger as a
step-size failure.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sismob.errors import StateEscapedBox, ZeroPopulationEntry
from sismob.mobility import GeneratorMatrix, PopulationDistribution, _readonly
from sismob.spectral import EpidemicParams

BOX_SLACK = 1e-9
DEFAULT_DT = 0.01
DEFAULT_T_MAX = 500.0


@dataclass(frozen=True)
class ModelState:
    """Infected fractions p in [0,1]^n plus population fractions x."""

    p: np.ndarray
    x: PopulationDistribution

    def __post_init__(self):
        object.__setattr__(self, "p", _readonly(np.atleast_1d(self.p)))
        if self.p.shape != (self.x.n,):
            raise ValueError(f"p has shape {self.p.shape}, expected ({self.x.n},)")
        if np.any(self.p < 0.0) or np.any(self.p > 1.0):
            raise ValueError("infected fractions must lie in [0, 1]")

    @property
    def n(self) -> int:
        return self.x.n


@dataclass(frozen=True)
class Trajectory:
    """Sampled states of one integration run. `p` and `x` are (m, n)
    arrays aligned with `times`; `clips` counts steps where floating-point
    drift outside [0,1] (within the 1e-9 slack) was clipped back."""

    times: np.ndarray
    p: np.ndarray
    x: np.ndarray
    params: EpidemicParams
    generator: GeneratorMatrix
    clips: int = 0

    def __post_init__(self):
        for name in ("times", "p", "x"):
            object.__setattr__(self, name, _readonly(getattr(self, name)))
        if not (len(self.times) == len(self.p) == len(self.x)):
            raise ValueError("times, p, x must have matching lengths")
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError("sample times must be strictly increasing")

    def state(self, k: int) -> ModelState:
        return ModelState(p=self.p[k], x=PopulationDistribution(x=self.x[k]))

    def final(self) -> ModelState:
        return self.state(len(self.times) - 1)


def _check_positive(x: np.ndarray):
    if np.any(x <= 0.0):
        raise ZeroPopulationEntry(int(np.flatnonzero(x <= 0.0)[0]))


def _rhs(p, x, qt, bd, beta):
    """Derivatives without validation; qt = Q^T, bd = beta - delta.

    The coupling term L(x) p is evaluated as (p * (Q^T x) - Q^T (x p)) / x,
    which avoids materializing the n-by-n Laplacian at every stage.
    """
    qtx = qt @ x
    dp = bd * p - beta * p * p - (p * qtx - qt @ (x * p)) / x
    return dp, qtx


def rhs(state: ModelState, params: EpidemicParams, g: GeneratorMatrix):
    """(dp, dx) for the coupled system at one state."""
    if params.n != g.n or state.n != g.n:
        raise ValueError("state, params, and generator sizes must agree")
    x = state.x.x
    _check_positive(x)
    dp, dx = _rhs(state.p, x, g.q.T.copy(), params.beta - params.delta, params.beta)
    return dp, dx


def _rk4_step(p, x, dt, qt, bd, beta):
    _check_positive(x)
    k1p, k1x = _rhs(p, x, qt, bd, beta)
    x2 = x + (0.5 * dt) * k1x
    _check_positive(x2)
    k2p, k2x = _rhs(p + (0.5 * dt) * k1p, x2, qt, bd, beta)
    x3 = x + (0.5 * dt) * k2x
    _check_positive(x3)
    k3p, k3x = _rhs(p + (0.5 * dt) * k2p, x3, qt, bd, beta)
    x4 = x + dt * k3x
    _check_positive(x4)
    k4p, k4x = _rhs(p + dt * k3p, x4, qt, bd, beta)
    p_new = p + (dt / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    x_new = x + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    return p_new, x_new


def _police_box(p: np.ndarray, t: float) -> tuple[np.ndarray, bool]:
    lo = float(p.min())
    hi = float(p.max())
    if lo < -BOX_SLACK or hi > 1.0 + BOX_SLACK:
        node = int(np.argmin(p)) if lo < -BOX_SLACK else int(np.argmax(p))
        raise StateEscapedBox(t, node, float(p[node]))
    if lo < 0.0 or hi > 1.0:
        return np.clip(p, 0.0, 1.0), True
    return p, False


def integrate(
    initial: ModelState,
    params: EpidemicParams,
    g: GeneratorMatrix,
    t_end: float,
    dt: float = DEFAULT_DT,
    output_stride: int = 1,
) -> Trajectory:
    """Fixed-step RK4 from t = 0 to exactly t_end.

    States are recorded at t = 0, every `output_stride` full steps, and
    at t_end (the last step is shortened to land on it exactly).
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t_end <= 0.0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    if output_stride < 1:
        raise ValueError("output_stride must be at least 1")
    if params.n != g.n or initial.n != g.n:
        raise ValueError("state, params, and generator sizes must agree")

    qt = g.q.T.copy()
    bd = params.beta - params.delta
    beta = params.beta

    n_full = int(np.floor(t_end / dt + 1e-9))
    rem = t_end - n_full * dt
    if rem <= 1e-12 * max(1.0, t_end):
        rem = 0.0

    p = initial.p.copy()
    x = initial.x.x.copy()
    times = [0.0]
    ps = [p.copy()]
    xs = [x.copy()]
    clips = 0

    for k in range(1, n_full + 1):
        p, x = _rk4_step(p, x, dt, qt, bd, beta)
        t = k * dt
        p, clipped = _police_box(p, t)
        clips += clipped
        if k % output_stride == 0 and not (k == n_full and rem == 0.0):
            times.append(t)
            ps.append(p.copy())
            xs.append(x.copy())
    if rem > 0.0:
        p, x = _rk4_step(p, x, rem, qt, bd, beta)
        p, clipped = _police_box(p, t_end)
        clips += clipped
    _check_positive(x)
    times.append(t_end)
    ps.append(p.copy())
    xs.append(x.copy())

    return Trajectory(
        times=np.array(times),
        p=np.vstack(ps),
        x=np.vstack(xs),
        params=params,
        generator=g,
        clips=clips,
    )


@dataclass(frozen=True)
class LimitResult:
    """Near-equilibrium state reached by long integration; `converged`
    is False when the derivative norm was still above tolerance at t_max."""

    state: ModelState
    converged: bool
    t: float


def limit_state(
    g: GeneratorMatrix,
    params: EpidemicParams,
    initial: ModelState,
    dt: float = DEFAULT_DT,
    t_max: float = DEFAULT_T_MAX,
    tol: float = 1e-10,
) -> LimitResult:
    """Integrate until ||dp||_inf + ||dx||_inf < tol or t_max is reached.

    The derivative norm is checked once per unit-time chunk, so the
    returned t is a chunk boundary.
    """
    if params.n != g.n or initial.n != g.n:
        raise ValueError("state, params, and generator sizes must agree")
    qt = g.q.T.copy()
    bd = params.beta - params.delta
    beta = params.beta

    chunk_steps = max(1, int(round(1.0 / dt)))
    p = initial.p.copy()
    x = initial.x.x.copy()
    t = 0.0
    converged = False
    while t < t_max - 1e-12:
        for _ in range(chunk_steps):
            p, x = _rk4_step(p, x, dt, qt, bd, beta)
            t += dt
            p, _clipped = _police_box(p, t)
        _check_positive(x)
        dp, dx = _rhs(p, x, qt, bd, beta)
        if float(np.abs(dp).max()) + float(np.abs(dx).max()) < tol:
            converged = True
            break
    return LimitResult(
        state=ModelState(p=p, x=PopulationDistribution(x=x / x.sum())),
        converged=converged,
        t=t,
    )
