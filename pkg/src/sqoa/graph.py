"""Graph instances, random regular generation, greedy coloring, and MaxCut oracles.

Vertices are 0-based. Edges are stored as sorted (u, v) pairs with u < v and
the edge list itself kept in lexicographic order, so two graphs with the same
edge set compare equal and serialize identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ValidationError
from .seeding import derive_seed

MAX_CERTIFIED_N = 28


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices 0..n-1."""

    n: int
    edges: tuple

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"vertex count must be >= 1, got {self.n}")
        norm = []
        for e in self.edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise ValidationError(f"self-loop at vertex {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValidationError(f"edge ({u},{v}) outside [0,{self.n})")
            norm.append((min(u, v), max(u, v)))
        norm.sort()
        for a, b in zip(norm, norm[1:]):
            if a == b:
                raise ValidationError(f"parallel edge {a}")
        object.__setattr__(self, "edges", tuple(norm))

    @property
    def m(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def neighbors(self) -> list:
        adj = [[] for _ in range(self.n)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj

    def adjacency_csr(self):
        """Flat neighbor array plus per-vertex offsets, for tight loops."""
        adj = self.neighbors()
        start = np.zeros(self.n + 1, dtype=np.int64)
        for v in range(self.n):
            start[v + 1] = start[v] + len(adj[v])
        flat = np.empty(start[-1], dtype=np.int64)
        for v in range(self.n):
            flat[start[v]:start[v + 1]] = adj[v]
        return flat, start

    def is_connected(self) -> bool:
        if self.n == 1:
            return True
        adj = self.neighbors()
        seen = [False] * self.n
        stack = [0]
        seen[0] = True
        count = 1
        while stack:
            v = stack.pop()
            for u in adj[v]:
                if not seen[u]:
                    seen[u] = True
                    count += 1
                    stack.append(u)
        return count == self.n


@dataclass(frozen=True)
class Coloring:
    """Proper vertex coloring with contiguous color indices starting at 0."""

    color_of: tuple
    num_colors: int

    def class_sizes(self) -> list:
        sizes = [0] * self.num_colors
        for c in self.color_of:
            sizes[c] += 1
        return sizes


@dataclass(frozen=True)
class CutResult:
    value: int
    certified: bool
    assignment: tuple  # per-vertex spin in {+1, -1}


def cut_value(g: Graph, spins) -> int:
    """Number of edges whose endpoints carry different spins."""
    return sum(1 for u, v in g.edges if spins[u] != spins[v])


def validate_coloring(g: Graph, c: Coloring) -> None:
    if len(c.color_of) != g.n:
        raise ValidationError("coloring length does not match vertex count")
    used = set(c.color_of)
    if used != set(range(c.num_colors)):
        raise ValidationError("color indices must be contiguous from 0")
    for u, v in g.edges:
        if c.color_of[u] == c.color_of[v]:
            raise ValidationError(f"edge ({u},{v}) has both endpoints colored {c.color_of[u]}")


# ---------------------------------------------------------------------------
# random regular instances (pairing model)
# ---------------------------------------------------------------------------

def generate_regular_graph(n: int, degree: int, seed: int, max_retries: int = 200) -> Graph:
    """Random simple degree-regular graph via the pairing model.

    Stub pairings containing self-loops or parallel edges are rejected and
    redrawn, which keeps the distribution close to uniform for small degree.
    Deterministic for a fixed seed.
    """
    if (n * degree) % 2 != 0:
        raise ValidationError(f"n*degree must be even, got n={n}, degree={degree}")
    if degree >= n:
        raise ValidationError(f"degree must be < n, got degree={degree}, n={n}")
    if degree < 1:
        raise ValidationError(f"degree must be >= 1, got {degree}")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n, dtype=np.int64), degree)
    for _ in range(max_retries):
        perm = rng.permutation(stubs)
        a = perm[0::2]
        b = perm[1::2]
        u = np.minimum(a, b)
        v = np.maximum(a, b)
        if np.any(u == v):
            continue
        keys = u * n + v
        if np.unique(keys).size != keys.size:
            continue
        return Graph(n, tuple(zip(u.tolist(), v.tolist())))
    raise ValidationError(
        f"pairing model failed to produce a simple {degree}-regular graph on "
        f"{n} vertices within {max_retries} attempts"
    )


# ---------------------------------------------------------------------------
# greedy coloring
# ---------------------------------------------------------------------------

def greedy_coloring(g: Graph, balance: bool = True, pack_size: int = 3) -> Coloring:
    """Greedy proper coloring in largest-degree-first order (ties by index).

    With ``balance=True`` a local-search pass then recolors single vertices to
    reduce sum(ceil(|V_c| / pack_size)), which is the number of qubits the
    classes will later occupy when packed pack_size-to-a-qubit.
    """
    deg = g.degrees()
    order = sorted(range(g.n), key=lambda v: (-int(deg[v]), v))
    adj = g.neighbors()
    colors = [-1] * g.n
    for v in order:
        taken = {colors[u] for u in adj[v] if colors[u] >= 0}
        c = 0
        while c in taken:
            c += 1
        colors[v] = c
    num = max(colors) + 1
    if balance:
        colors, num = _balance_classes(g, colors, num, pack_size)
    return Coloring(tuple(colors), num)


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def _balance_classes(g: Graph, colors, num_colors, pack_size):
    """First-improvement recoloring that lowers the packed-qubit count."""
    adj = g.neighbors()
    sizes = [0] * num_colors
    for c in colors:
        sizes[c] += 1
    improved = True
    while improved:
        improved = False
        for v in range(g.n):
            c0 = colors[v]
            forbidden = {colors[u] for u in adj[v]}
            for c1 in range(num_colors):
                if c1 == c0 or c1 in forbidden:
                    continue
                delta = (
                    _ceil_div(sizes[c0] - 1, pack_size)
                    + _ceil_div(sizes[c1] + 1, pack_size)
                    - _ceil_div(sizes[c0], pack_size)
                    - _ceil_div(sizes[c1], pack_size)
                )
                if delta < 0:
                    colors[v] = c1
                    sizes[c0] -= 1
                    sizes[c1] += 1
                    improved = True
                    break
    # drop emptied classes and relabel contiguously
    remap = {}
    for c in range(num_colors):
        if sizes[c] > 0:
            remap[c] = len(remap)
    return [remap[c] for c in colors], len(remap)


# ---------------------------------------------------------------------------
# MaxCut oracles
# ---------------------------------------------------------------------------

@njit(cache=True)
def _gray_max_cut(n, adj_flat, adj_start):
    # Enumerates all 2^(n-1) bipartitions (vertex n-1 pinned to side 0),
    # flipping one vertex per step in Gray-code order and updating the cut
    # incrementally.
    side = np.zeros(n, np.uint8)
    best_side = side.copy()
    cut = 0
    best = 0
    total = np.int64(1) << (n - 1)
    for step in range(1, total):
        v = 0
        while ((step >> v) & 1) == 0:
            v += 1
        sv = side[v]
        same = 0
        for k in range(adj_start[v], adj_start[v + 1]):
            if side[adj_flat[k]] == sv:
                same += 1
        deg = adj_start[v + 1] - adj_start[v]
        cut += 2 * same - deg
        side[v] = 1 - sv
        if cut > best:
            best = cut
            best_side[:] = side
    return best, best_side


@njit(cache=True)
def _anneal_restart(adj_flat, adj_start, side, uniforms, t0, t1):
    n = side.shape[0]
    sweeps = uniforms.shape[0]
    cut = 0
    for v in range(n):
        sv = side[v]
        for k in range(adj_start[v], adj_start[v + 1]):
            u = adj_flat[k]
            if u > v and side[u] != sv:
                cut += 1
    best = cut
    best_side = side.copy()
    ratio = (t1 / t0) ** (1.0 / max(sweeps - 1, 1))
    temp = t0
    for s in range(sweeps):
        for v in range(n):
            sv = side[v]
            same = 0
            for k in range(adj_start[v], adj_start[v + 1]):
                if side[adj_flat[k]] == sv:
                    same += 1
            deg = adj_start[v + 1] - adj_start[v]
            delta = 2 * same - deg
            if delta >= 0 or uniforms[s, v] < math.exp(delta / temp):
                side[v] = 1 - sv
                cut += delta
                if cut > best:
                    best = cut
                    best_side[:] = side
        temp *= ratio
    return best, best_side


def best_cut(
    g: Graph,
    mode: str = "certified",
    seed: int = 0,
    restarts: int = 20,
    total_sweeps: int = 100_000,
    max_certified_n: int = MAX_CERTIFIED_N,
) -> CutResult:
    """Exact (``certified``) or simulated-annealing (``best_found``) MaxCut.

    Certified mode enumerates every bipartition and is limited to
    n <= max_certified_n. best_found runs multi-restart annealing with a
    geometric temperature schedule and never claims optimality.
    """
    if mode not in ("certified", "best_found"):
        raise ValidationError(f"unknown mode {mode!r}")
    adj_flat, adj_start = g.adjacency_csr()
    if mode == "certified":
        if g.n > max_certified_n:
            raise ValidationError(
                f"certified enumeration capped at n <= {max_certified_n}, got n={g.n}"
            )
        value, side = _gray_max_cut(g.n, adj_flat, adj_start)
        spins = tuple(1 if s == 0 else -1 for s in side)
        recount = cut_value(g, spins)
        assert recount == value
        return CutResult(int(value), True, spins)

    sweeps_per = max(1, total_sweeps // max(restarts, 1))
    best_val = -1
    best_spins = None
    for r in range(restarts):
        rng = np.random.default_rng(derive_seed(seed, "anneal", r))
        side = rng.integers(0, 2, g.n).astype(np.uint8)
        uniforms = rng.random((sweeps_per, g.n))
        value, bside = _anneal_restart(adj_flat, adj_start, side, uniforms, 3.0, 0.05)
        if value > best_val:
            best_val = int(value)
            best_spins = tuple(1 if s == 0 else -1 for s in bside)
    recount = cut_value(g, best_spins)
    assert recount == best_val
    return CutResult(best_val, False, best_spins)


# ---------------------------------------------------------------------------
# edge-list text format
# ---------------------------------------------------------------------------

def graph_to_text(g: Graph) -> str:
    """Serialize as "n m" followed by one sorted "u v" line per edge."""
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


def graph_from_text(text: str) -> Graph:
    rows = [line.split() for line in text.strip().splitlines() if line.strip()]
    if not rows or len(rows[0]) != 2:
        raise ValidationError("edge list must start with a 'n m' header line")
    n, m = int(rows[0][0]), int(rows[0][1])
    if len(rows) - 1 != m:
        raise ValidationError(f"header declares {m} edges but {len(rows) - 1} lines follow")
    edges = []
    for row in rows[1:]:
        if len(row) != 2:
            raise ValidationError(f"malformed edge line: {' '.join(row)}")
        edges.append((int(row[0]), int(row[1])))
    return Graph(n, tuple(edges))


def write_graph(path, g: Graph) -> None:
    with open(path, "w") as fh:
        fh.write(graph_to_text(g))


def read_graph(path) -> Graph:
    with open(path) as fh:
        return graph_from_text(fh.read())
