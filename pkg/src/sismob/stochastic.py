"""Finite-population stochastic simulation of the coupled SIS/mobility
process.

Two samplers are provided. `gillespie_run` is the exact event-driven
reference. `fixed_step_run` is the discrete-time protocol with one
categorical draw per individual per step (migrate, change disease
state, or stay); it is biased for finite dt but matches the exact
sampler as dt -> 0.

Event channels at node k, with s_k susceptible and i_k infected:

    recovery            delta_k * i_k
    infection           beta_k * i_k * s_k / (s_k + i_k)   (0 if empty)
    migration S, k->j   q_kj * s_k
    migration I, k->j   q_kj * i_k

The frequency-dependent infection rate has per-node mean field
beta p (1 - p), matching the continuum model.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sismob.errors import GridMismatch, StepTooLarge
from sismob.mobility import GeneratorMatrix
from sismob.spectral import EpidemicParams

DEFAULT_SAMPLE_DT = 1.0


@dataclass(frozen=True)
class Population:
    """Integer counts per node; susceptible in `s`, infected in `i`."""

    s: np.ndarray
    i: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s, dtype=np.int64)
        i = np.asarray(self.i, dtype=np.int64)
        s.setflags(write=False)
        i.setflags(write=False)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "i", i)
        if s.shape != i.shape or s.ndim != 1:
            raise ValueError("s and i must be 1-d arrays of equal length")
        if np.any(s < 0) or np.any(i < 0):
            raise ValueError("counts must be nonnegative")

    @property
    def n(self) -> int:
        return self.s.shape[0]

    @property
    def total(self) -> int:
        return int(self.s.sum() + self.i.sum())

    def fractions(self):
        """(p, x): infected fraction per node (0 where empty) and node
        occupancy fraction of the grand total."""
        tot = self.s + self.i
        p = np.divide(self.i, tot, out=np.zeros(self.n), where=tot > 0)
        return p, tot / tot.sum()


def seed_population(n: int, per_node: int, p0, x0=None) -> Population:
    """Deterministic integer seeding: node totals follow x0 (uniform when
    omitted) scaled to n * per_node individuals, infected counts are
    round(p0 * total) per node."""
    if x0 is None:
        totals = np.full(n, per_node, dtype=np.int64)
    else:
        x0 = np.asarray(x0, dtype=float)
        totals = np.rint(x0 / x0.sum() * n * per_node).astype(np.int64)
    p0 = np.broadcast_to(np.asarray(p0, dtype=float), (n,))
    if np.any(p0 < 0.0) or np.any(p0 > 1.0):
        raise ValueError("p0 must lie in [0, 1]")
    i = np.rint(p0 * totals).astype(np.int64)
    return Population(s=totals - i, i=i)


@dataclass(frozen=True)
class SampledRun:
    """One replica sampled on a uniform grid; counts are (m, n) arrays."""

    times: np.ndarray
    s: np.ndarray
    i: np.ndarray
    seed: object

    def fractions(self):
        tot = self.s + self.i
        p = np.divide(self.i, tot, out=np.zeros(tot.shape), where=tot > 0)
        x = tot / tot.sum(axis=1, keepdims=True)
        return p, x


@dataclass(frozen=True)
class EnsembleResult:
    """Replica-averaged infected fractions. Grid points where a node was
    empty in every replica hold NaN in mean_p (no fraction is defined
    there); empty_counts records how many replicas were excluded per
    sample."""

    times: np.ndarray
    mean_p: np.ndarray
    mean_x: np.ndarray
    replicas: int
    seed: object
    empty_counts: np.ndarray


def _sample_grid(t_end: float, sample_dt: float) -> np.ndarray:
    if sample_dt <= 0.0 or t_end <= 0.0:
        raise ValueError("t_end and sample_dt must be positive")
    m = int(np.floor(t_end / sample_dt + 1e-9))
    times = sample_dt * np.arange(m + 1)
    if times[-1] < t_end - 1e-9 * max(1.0, t_end):
        times = np.append(times, t_end)
    return times


def gillespie_run(
    pop0: Population,
    params: EpidemicParams,
    g: GeneratorMatrix,
    t_end: float,
    seed,
    sample_dt: float = DEFAULT_SAMPLE_DT,
) -> SampledRun:
    """Exact continuous-time simulation, sampled on a uniform grid.

    Each grid point records the state that held at that instant (the
    state just before the first event beyond it).
    """
    rng = np.random.default_rng(seed)
    n = g.n
    times = _sample_grid(t_end, sample_dt)
    beta, delta = params.beta, params.delta

    mask = g.q > 0.0
    from_k, to_j = np.nonzero(mask)
    edge_rate = g.q[from_k, to_j]

    s = pop0.s.astype(np.int64).copy()
    i = pop0.i.astype(np.int64).copy()
    out_s = np.empty((len(times), n), dtype=np.int64)
    out_i = np.empty((len(times), n), dtype=np.int64)
    ptr = 0
    t = 0.0
    n_events = 0

    while True:
        tot = s + i
        frac = np.divide(i, tot, out=np.zeros(n), where=tot > 0)
        rates = np.concatenate(
            [delta * i, beta * s * frac, edge_rate * s[from_k], edge_rate * i[from_k]]
        )
        total_rate = float(rates.sum())
        if total_rate <= 0.0:
            break
        t += rng.exponential(1.0 / total_rate)
        while ptr < len(times) and times[ptr] <= t:
            out_s[ptr] = s
            out_i[ptr] = i
            ptr += 1
        if t >= t_end:
            break
        cum = np.cumsum(rates)
        ch = int(np.searchsorted(cum, rng.random() * total_rate, side="right"))
        n_events += 1
        if ch < n:                      # recovery at node ch
            i[ch] -= 1
            s[ch] += 1
        elif ch < 2 * n:                # infection at node ch - n
            k = ch - n
            s[k] -= 1
            i[k] += 1
        elif ch < 2 * n + len(from_k):  # susceptible migration
            e = ch - 2 * n
            s[from_k[e]] -= 1
            s[to_j[e]] += 1
        else:                           # infected migration
            e = ch - 2 * n - len(from_k)
            i[from_k[e]] -= 1
            i[to_j[e]] += 1

    while ptr < len(times):
        out_s[ptr] = s
        out_i[ptr] = i
        ptr += 1
    return SampledRun(times=times, s=out_s, i=out_i, seed=seed)


def step_size_limit(params: EpidemicParams, g: GeneratorMatrix) -> float:
    """Largest dt for which every per-individual event probability per
    step stays at or below 1."""
    # beta is validated strictly positive, so worst > 0 always
    worst = float(np.max(g.nu + np.maximum(params.beta, params.delta)))
    return 1.0 / worst


def fixed_step_run(
    pop0: Population,
    params: EpidemicParams,
    g: GeneratorMatrix,
    t_end: float,
    dt: float,
    seed,
    sample_dt: float = DEFAULT_SAMPLE_DT,
) -> SampledRun:
    """Discrete-time protocol: per step, every individual takes a single
    categorical draw over (migrate to j, change disease state, stay)
    with probabilities q_kj dt, beta_k (i_k/(s_k+i_k)) dt or delta_k dt,
    and the remainder.

    Samples are recorded at the whole step nearest each grid time, so
    grids line up exactly with gillespie_run's for cross-method
    comparisons.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    limit = step_size_limit(params, g)
    if dt > limit:
        raise StepTooLarge(limit)
    rng = np.random.default_rng(seed)
    n = g.n
    beta, delta = params.beta, params.delta

    times = _sample_grid(t_end, sample_dt)
    target_steps = np.rint(times / dt).astype(np.int64)
    n_steps = int(np.ceil(t_end / dt - 1e-9))
    target_steps[-1] = min(target_steps[-1], n_steps)

    mig = g.q * dt
    np.fill_diagonal(mig, 0.0)
    # susceptible pool: columns [migrate to 1..n, become infected, stay]
    pv_s = np.zeros((n, n + 2))
    pv_s[:, :n] = mig
    # infected pool: columns [migrate to 1..n, recover, stay]
    pv_i = np.zeros((n, n + 2))
    pv_i[:, :n] = mig
    pv_i[:, n] = delta * dt
    pv_i[:, n + 1] = np.maximum(0.0, 1.0 - pv_i[:, : n + 1].sum(axis=1))

    s = pop0.s.astype(np.int64).copy()
    i = pop0.i.astype(np.int64).copy()
    out_s = np.empty((len(times), n), dtype=np.int64)
    out_i = np.empty((len(times), n), dtype=np.int64)
    ptr = 0
    for step in range(n_steps + 1):
        while ptr < len(times) and target_steps[ptr] == step:
            out_s[ptr] = s
            out_i[ptr] = i
            ptr += 1
        if step == n_steps:
            break
        tot = s + i
        frac = np.divide(i, tot, out=np.zeros(n), where=tot > 0)
        pv_s[:, n] = beta * dt * frac
        pv_s[:, n + 1] = np.maximum(0.0, 1.0 - pv_s[:, : n + 1].sum(axis=1))
        moves_s = rng.multinomial(s, pv_s)
        moves_i = rng.multinomial(i, pv_i)
        mig_s = moves_s[:, :n]
        mig_i = moves_i[:, :n]
        infections = moves_s[:, n]
        recoveries = moves_i[:, n]
        s = s - mig_s.sum(axis=1) - infections + mig_s.sum(axis=0) + recoveries
        i = i - mig_i.sum(axis=1) - recoveries + mig_i.sum(axis=0) + infections
    return SampledRun(times=times, s=out_s, i=out_i, seed=seed)


def ensemble_average(runs, seed=None) -> EnsembleResult:
    """Per-node infected fractions averaged across replicas; empty-node
    samples are left out of the average and tallied."""
    if not runs:
        raise ValueError("need at least one run")
    times = runs[0].times
    for r in runs[1:]:
        if r.times.shape != times.shape or not np.array_equal(r.times, times):
            raise GridMismatch("replica sample grids differ")
    s = np.stack([r.s for r in runs])           # (replicas, m, n)
    i = np.stack([r.i for r in runs])
    tot = s + i
    occupied = tot > 0
    p = np.divide(i, tot, out=np.zeros(tot.shape), where=occupied)
    counts = occupied.sum(axis=0)
    with np.errstate(invalid="ignore"):
        mean_p = np.where(
            counts > 0,
            p.sum(axis=0) / np.maximum(counts, 1),
            np.nan,
        )
    x = tot / tot.sum(axis=2, keepdims=True)
    return EnsembleResult(
        times=times,
        mean_p=mean_p,
        mean_x=x.mean(axis=0),
        replicas=len(runs),
        seed=seed,
        empty_counts=(~occupied).sum(axis=0),
    )


def run_ensemble(
    pop0: Population,
    params: EpidemicParams,
    g: GeneratorMatrix,
    t_end: float,
    replicas: int,
    base_seed: int,
    method: str = "fixed_step",
    dt: float = 0.01,
    sample_dt: float = DEFAULT_SAMPLE_DT,
) -> EnsembleResult:
    """Run independent replicas with per-replica streams seeded by
    (base_seed, replica_index) and average them."""
    if replicas < 1:
        raise ValueError("need at least one replica")
    runs = []
    for r in range(replicas):
        seed = (base_seed, r)
        if method == "fixed_step":
            runs.append(fixed_step_run(pop0, params, g, t_end, dt, seed, sample_dt))
        elif method == "gillespie":
            runs.append(gillespie_run(pop0, params, g, t_end, seed, sample_dt))
        else:
            raise ValueError(f"unknown method {method!r}")
    return ensemble_average(runs, seed=base_seed)
