"""Mobility networks: region graphs, CTMC generator matrices, stationary
distributions, and the population-dependent mobility Laplacian L(x).

Nodes are numbered 1..n in graphs and JSON documents; matrices use the
usual 0-based array indexing internally.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from sismob.errors import (
    AsymmetricGraph,
    IsolatedNode,
    NegativeOffDiagonal,
    NonzeroRowSum,
    NotIrreducible,
    TooFewNodes,
    ZeroPopulationEntry,
    ZeroTargetEntry,
)

ROW_SUM_TOL = 1e-12        # structural identities
RESIDUAL_TOL = 1e-12       # solved stationary distribution
SIMPLEX_TOL = 1e-12

GRAPH_KINDS = ("line", "ring", "star", "complete")


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class RegionGraph:
    """Directed graph over regions 1..n; self-loops are not edges."""

    n: int
    edges: tuple

    def __post_init__(self):
        if self.n < 1:
            raise TooFewNodes(f"need at least 1 node, got {self.n}")
        seen = set()
        for (i, j) in self.edges:
            if i == j:
                raise ValueError(f"self-loop ({i}, {j}) is not allowed in the edge list")
            if not (1 <= i <= self.n and 1 <= j <= self.n):
                raise ValueError(f"edge ({i}, {j}) outside node range 1..{self.n}")
            seen.add((i, j))
        if len(seen) != len(self.edges):
            raise ValueError("duplicate edges in edge list")

    def out_degree(self, i: int) -> int:
        return sum(1 for (a, _) in self.edges if a == i)

    def is_symmetric(self) -> bool:
        s = set(self.edges)
        return all((j, i) in s for (i, j) in s)


@dataclass(frozen=True)
class GeneratorMatrix:
    """Validated CTMC transition-rate matrix: zero row sums, q_ij >= 0 off
    the diagonal. Entry (i, j) is the instantaneous rate from i to j."""

    q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "q", _readonly(self.q))

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @property
    def nu(self) -> np.ndarray:
        """Total exit rate per node, nu_i = -q_ii."""
        return -np.diag(self.q)

    def region_graph(self) -> RegionGraph:
        n = self.n
        edges = tuple(
            (i + 1, j + 1)
            for i in range(n)
            for j in range(n)
            if i != j and self.q[i, j] > 0.0
        )
        return RegionGraph(n=n, edges=edges)


@dataclass(frozen=True)
class PopulationDistribution:
    """Strictly positive fractions on the open simplex (sum 1)."""

    x: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _readonly(self.x))
        bad = np.flatnonzero(self.x <= 0.0)
        if bad.size:
            raise ZeroPopulationEntry(int(bad[0]))
        if abs(float(self.x.sum()) - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"fractions sum to {self.x.sum()}, expected 1")

    @property
    def n(self) -> int:
        return self.x.shape[0]


@dataclass(frozen=True)
class MobilityLaplacian:
    """State-dependent Laplacian coupling infected fractions through
    population flows; rows sum to zero, off-diagonals are nonpositive."""

    l: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "l", _readonly(self.l))

    @property
    def n(self) -> int:
        return self.l.shape[0]


# ---- construction and validation ----------------------------------------

def validate_generator(q) -> GeneratorMatrix:
    """Check sign pattern and zero row sums, returning the validated matrix.

    Raises NegativeOffDiagonal or NonzeroRowSum naming the offending row.
    """
    q = np.asarray(q, dtype=float)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ValueError(f"generator must be square, got shape {q.shape}")
    n = q.shape[0]
    if n < 1:
        raise TooFewNodes("generator must have at least one row")
    off = q.copy()
    np.fill_diagonal(off, 0.0)
    neg = np.argwhere(off < 0.0)
    if neg.size:
        i, j = map(int, neg[0])
        raise NegativeOffDiagonal(i, j, float(q[i, j]))
    scale = max(1.0, float(np.abs(q).max(initial=0.0)))
    sums = q.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums) > ROW_SUM_TOL * scale)
    if bad.size:
        i = int(bad[0])
        raise NonzeroRowSum(i, float(sums[i]))
    return GeneratorMatrix(q=q)


def strongly_connected(adjacency: np.ndarray) -> bool:
    """True iff the boolean adjacency matrix describes a strongly
    connected digraph (forward and reverse reachability from node 0)."""
    n = adjacency.shape[0]
    if n <= 1:
        return True

    def reachable(adj):
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        stack = [0]
        while stack:
            u = stack.pop()
            nxt = np.flatnonzero(adj[u] & ~seen)
            seen[nxt] = True
            stack.extend(int(k) for k in nxt)
        return seen.all()

    return reachable(adjacency) and reachable(adjacency.T)


def is_irreducible(g: GeneratorMatrix) -> bool:
    """True iff the digraph of strictly positive off-diagonal rates is
    strongly connected (Markov-chain irreducibility)."""
    # diagonal entries are <= 0, so they never show up as edges
    return strongly_connected(g.q > 0.0)


def make_graph(kind: str, n: int) -> RegionGraph:
    """Bidirectional line, ring, star (hub = node 1), or complete graph."""
    if n < 2:
        raise TooFewNodes(f"{kind} graph needs n >= 2, got {n}")
    if kind == "line":
        pairs = [(i, i + 1) for i in range(1, n)]
    elif kind == "ring":
        pairs = [(i, i + 1) for i in range(1, n)] + [(n, 1)]
    elif kind == "star":
        pairs = [(1, j) for j in range(2, n + 1)]
    elif kind == "complete":
        pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    else:
        raise ValueError(f"unknown graph kind {kind!r}; expected one of {GRAPH_KINDS}")
    edges = []
    for (i, j) in pairs:
        edges.append((i, j))
        edges.append((j, i))
    return RegionGraph(n=n, edges=tuple(edges))


def uniform_out_rates(g: RegionGraph, nu) -> GeneratorMatrix:
    """Split each node's total exit rate nu_i equally among its out-edges:
    q_ij = nu_i / outdegree(i)."""
    nu = np.broadcast_to(np.asarray(nu, dtype=float), (g.n,))
    if np.any(nu <= 0.0):
        raise ValueError("exit rates must be strictly positive")
    q = np.zeros((g.n, g.n))
    deg = np.zeros(g.n, dtype=int)
    for (i, j) in g.edges:
        deg[i - 1] += 1
    lonely = np.flatnonzero(deg == 0)
    if lonely.size:
        raise IsolatedNode(int(lonely[0]) + 1)
    for (i, j) in g.edges:
        q[i - 1, j - 1] = nu[i - 1] / deg[i - 1]
    np.fill_diagonal(q, -q.sum(axis=1))
    return GeneratorMatrix(q=q)


def metropolis_hastings_rates(g: RegionGraph, target, base_rate: float) -> GeneratorMatrix:
    """Degree-corrected Metropolis-Hastings rates on a symmetric graph:

        q_ij = base_rate * min(1, target_j d_i / (target_i d_j)) / d_i

    The resulting chain satisfies detailed balance with respect to
    `target`, so `target` is its stationary distribution.
    """
    if not g.is_symmetric():
        raise AsymmetricGraph("Metropolis-Hastings construction needs a symmetric edge set")
    t = target.x if isinstance(target, PopulationDistribution) else np.asarray(target, dtype=float)
    if t.shape != (g.n,):
        raise ValueError(f"target has length {t.shape}, expected {g.n}")
    bad = np.flatnonzero(t <= 0.0)
    if bad.size:
        raise ZeroTargetEntry(int(bad[0]))
    if base_rate <= 0.0:
        raise ValueError("base_rate must be strictly positive")
    deg = np.zeros(g.n, dtype=int)
    for (i, _) in g.edges:
        deg[i - 1] += 1
    lonely = np.flatnonzero(deg == 0)
    if lonely.size:
        raise IsolatedNode(int(lonely[0]) + 1)
    q = np.zeros((g.n, g.n))
    for (i, j) in g.edges:
        a, b = i - 1, j - 1
        accept = min(1.0, (t[b] * deg[a]) / (t[a] * deg[b]))
        q[a, b] = base_rate * accept / deg[a]
    np.fill_diagonal(q, -q.sum(axis=1))
    return GeneratorMatrix(q=q)


# ---- solved quantities ----------------------------------------------------

def stationary_distribution(g: GeneratorMatrix) -> PopulationDistribution:
    """Solve Q^T v = 0, 1^T v = 1 for the strictly positive stationary
    distribution of an irreducible generator.

    Dense LU on Q^T with the last row replaced by the normalization
    constraint, plus one iterative-refinement pass to push the residual
    below 1e-12.
    """
    if not is_irreducible(g):
        raise NotIrreducible("stationary distribution needs an irreducible generator")
    n = g.n
    if n == 1:
        return PopulationDistribution(x=np.ones(1))
    m = g.q.T.copy()
    m[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    v = np.linalg.solve(m, rhs)
    # one refinement step on the bordered system
    r = g.q.T @ v
    corr = np.concatenate([-r[:-1], [1.0 - v.sum()]])
    v = v + np.linalg.solve(m, corr)
    resid = float(np.abs(g.q.T @ v).max())
    scale = max(1.0, float(np.abs(g.q).max()))
    if resid > RESIDUAL_TOL * scale or np.any(v <= 0.0):
        raise NotIrreducible(
            f"stationary solve failed (residual {resid}); generator may be reducible"
        )
    return PopulationDistribution(x=v / v.sum())


def mobility_laplacian(g: GeneratorMatrix, x) -> MobilityLaplacian:
    """L(x) with l_ij = -q_ji x_j / x_i off the diagonal and row sums zero.

    At x = v (the stationary distribution) the diagonal equals the exit
    rates nu_i.
    """
    xv = x.x if isinstance(x, PopulationDistribution) else np.asarray(x, dtype=float)
    if xv.shape != (g.n,):
        raise ValueError(f"x has shape {xv.shape}, expected ({g.n},)")
    bad = np.flatnonzero(xv <= 0.0)
    if bad.size:
        raise ZeroPopulationEntry(int(bad[0]))
    return MobilityLaplacian(l=_laplacian_array(g.q, xv))


def _laplacian_array(q: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Raw L(x) as an ndarray; hot path shared with the ODE right-hand side."""
    l = -(q.T * x[None, :]) / x[:, None]
    np.fill_diagonal(l, 0.0)
    np.fill_diagonal(l, -l.sum(axis=1))
    return l


# ---- serialization --------------------------------------------------------

def graph_to_json(g) -> str:
    """Serialize a RegionGraph or GeneratorMatrix to the JSON document
    `{"n": ..., "edges": [[i, j], ...], "rates": [[i, j, q], ...]}` with
    1-based node indices; `rates` is present only for generators."""
    if isinstance(g, GeneratorMatrix):
        rg = g.region_graph()
        doc = {
            "n": rg.n,
            "edges": [[i, j] for (i, j) in rg.edges],
            "rates": [[i, j, float(g.q[i - 1, j - 1])] for (i, j) in rg.edges],
        }
    elif isinstance(g, RegionGraph):
        doc = {"n": g.n, "edges": [[i, j] for (i, j) in g.edges]}
    else:
        raise TypeError(f"cannot serialize {type(g).__name__}")
    return json.dumps(doc)


def graph_from_json(text: str):
    """Inverse of graph_to_json; returns a GeneratorMatrix when rates are
    present, otherwise a RegionGraph."""
    doc = json.loads(text)
    n = int(doc["n"])
    edges = tuple((int(i), int(j)) for (i, j) in doc["edges"])
    graph = RegionGraph(n=n, edges=edges)
    if "rates" not in doc:
        return graph
    q = np.zeros((n, n))
    for (i, j, rate) in doc["rates"]:
        if not (1 <= int(i) <= n and 1 <= int(j) <= n) or int(i) == int(j):
            raise ValueError(f"rate entry ({i}, {j}) is not a valid edge")
        q[int(i) - 1, int(j) - 1] = float(rate)
    np.fill_diagonal(q, -q.sum(axis=1))
    return validate_generator(q)


def matrix_to_csv(m: np.ndarray) -> str:
    """Row-major CSV at full float64 precision (%.17g)."""
    m = np.asarray(m, dtype=float)
    lines = [",".join("%.17g" % val for val in row) for row in np.atleast_2d(m)]
    return "\n".join(lines) + "\n"


def matrix_from_csv(text: str) -> np.ndarray:
    rows = [
        [float(tok) for tok in line.split(",")]
        for line in text.strip().splitlines()
        if line.strip()
    ]
    return np.array(rows, dtype=float)
