"""Equilibria of the continuum model.

The disease-free state (0, v) always exists. When the stability margin
mu(B - D - L*) is positive there is additionally a unique strictly
positive endemic profile p*, found here as the fixed point of

    H(p) = (I + A diag(p))^{-1} A p,    A = (L* + D)^{-1} B.

H is monotone on [0,1]^n and maps it into itself, so iterating from the
all-ones vector descends to p*.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from sismob.dynamics import ModelState
from sismob.errors import (
    DegenerateSolution,
    NoConvergence,
    NotEndemicRegime,
    SingularSystem,
)
from sismob.mobility import (
    GeneratorMatrix,
    _readonly,
    mobility_laplacian,
    stationary_distribution,
)
from sismob.spectral import (
    EpidemicParams,
    next_generation_matrix,
    spectral_abscissa,
)

MAX_FIXED_POINT_ITER = 1_000_000
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class EndemicSolution:
    """Strictly positive equilibrium profile with iteration diagnostics.
    `residual` is the infinity norm of (B - D - L* - diag(p*) B) p*."""

    p_star: np.ndarray
    iterations: int
    residual: float

    def __post_init__(self):
        object.__setattr__(self, "p_star", _readonly(self.p_star))

    def to_json(self) -> str:
        return json.dumps(
            {
                "p_star": [float(v) for v in self.p_star],
                "iterations": self.iterations,
                "residual": self.residual,
            },
            indent=2,
        )


def disease_free(g: GeneratorMatrix) -> ModelState:
    """(p, x) = (0, v): no infection anywhere, population at stationarity."""
    v = stationary_distribution(g)
    return ModelState(p=np.zeros(g.n), x=v)


def h_map(p, a: np.ndarray) -> np.ndarray:
    """One application of H: solve (I + A diag(p)) h = A p."""
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    try:
        return np.linalg.solve(np.eye(n) + a * p[None, :], a @ p)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(f"H-map system singular: {exc}") from exc


def endemic_fixed_point(
    params: EpidemicParams,
    g: GeneratorMatrix,
    tol: float = 1e-12,
) -> EndemicSolution:
    """Unique strictly positive fixed point of H, reached by downward
    monotone iteration from the all-ones vector.

    Raises NotEndemicRegime when mu <= 0 (no positive equilibrium
    exists), SingularMMatrix when every recovery rate is zero, and
    DegenerateSolution if the iterate collapses to the boundary.
    """
    if params.n != g.n:
        raise ValueError(f"params length {params.n} does not match generator n {g.n}")
    v = stationary_distribution(g)
    lstar = mobility_laplacian(g, v)
    jac = np.diag(params.beta - params.delta) - lstar.l
    mu = spectral_abscissa(jac).value
    if mu <= 0.0:
        raise NotEndemicRegime(mu)
    a = next_generation_matrix(params, lstar)

    p = np.ones(g.n)
    for it in range(1, MAX_FIXED_POINT_ITER + 1):
        p_next = h_map(p, a)
        if float(np.abs(p_next - p).max()) <= tol:
            p = p_next
            break
        p = p_next
    else:
        raise NoConvergence("endemic fixed-point iteration", MAX_FIXED_POINT_ITER)

    if np.any(p <= 0.0):
        raise DegenerateSolution(int(np.argmin(p)))
    residual = float(np.abs(jac @ p - p * (params.beta * p)).max())
    if residual > RESIDUAL_TOL:
        raise NoConvergence(
            f"endemic equilibrium residual {residual} above {RESIDUAL_TOL}", it
        )
    return EndemicSolution(p_star=p, iterations=it, residual=residual)


def lower_box_vector(a: np.ndarray) -> tuple[float, np.ndarray]:
    """(epsilon, u) with u the Perron vector of A and epsilon halved from 1
    until H(eps u) >= eps u holds componentwise.

    The positive fixed point of H lies in the box [eps u, 1]. Provided
    for diagnostics and property tests; the production solver iterates
    from the top of the box instead.
    """
    pair = spectral_abscissa(a)
    rho = pair.value
    if rho <= 1.0:
        raise NotEndemicRegime(rho - 1.0)
    u = pair.vector / pair.vector.max()
    eps = 1.0
    for _ in range(200):
        if np.all(h_map(eps * u, a) >= eps * u):
            return eps, u
        eps *= 0.5
    raise NoConvergence("lower corner search for the fixed-point box", 200)
