"""Cubic graph representation, I/O, random generation, and geodesic harvesting.

Vertices are 0-based ints. Edges carry stable ids (their index in the edge
list); all colouring machinery downstream indexes by edge id. Graphs are
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from random import Random
from typing import Iterable, Optional, Sequence


def mix_seed(*parts) -> int:
    """Deterministic 63-bit seed from ints and strings (runs reproduce
    across processes; str hashing avoids the salted built-in hash)."""
    acc = 0x9E3779B97F4A7C15
    for p in parts:
        if isinstance(p, str):
            v = 0xCBF29CE484222325
            for ch in p.encode():
                v = ((v ^ ch) * 0x100000001B3) & (2 ** 64 - 1)
            p = v
        acc ^= (p + 0x9E3779B97F4A7C15 + (acc << 6) + (acc >> 2)) & (2 ** 64 - 1)
        acc &= 2 ** 64 - 1
    return acc & (2 ** 63 - 1)


class GraphFormatError(ValueError):
    """Malformed graph input (graph6 or edge list)."""


class NotCubicError(ValueError):
    """Input graph fails the 3-regularity invariant."""

    def __init__(self, vertex, degree):
        self.vertex = vertex
        self.degree = degree
        super().__init__(f"vertex {vertex} has degree {degree} != 3")


class CubicGraph:
    """Immutable simple 3-regular graph with edge identities.

    Attributes:
        n: vertex count.
        m: edge count (= 3n/2).
        edges: list of (u, v) with u < v; index = edge id.
        nbr / eid: flat adjacency, slots 3v..3v+2 hold the neighbours of v
            and the corresponding edge ids.
    """

    __slots__ = ("n", "m", "edges", "nbr", "eid", "_edge_index")

    def __init__(self, n: int, edges: Sequence[tuple[int, int]]):
        if n < 4 or n % 2 != 0:
            raise GraphFormatError(f"cubic graph needs even n >= 4, got {n}")
        deg = [0] * n
        seen = set()
        norm = []
        for (u, v) in edges:
            if u == v:
                raise GraphFormatError(f"loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise GraphFormatError(f"edge ({u},{v}) out of range")
            if u > v:
                u, v = v, u
            if (u, v) in seen:
                raise GraphFormatError(f"parallel edge ({u},{v})")
            seen.add((u, v))
            norm.append((u, v))
            deg[u] += 1
            deg[v] += 1
        for v in range(n):
            if deg[v] != 3:
                raise NotCubicError(v, deg[v])
        self.n = n
        self.m = len(norm)
        self.edges = norm
        nbr = [0] * (3 * n)
        eid = [0] * (3 * n)
        fill = [0] * n
        for e, (u, v) in enumerate(norm):
            nbr[3 * u + fill[u]] = v
            eid[3 * u + fill[u]] = e
            fill[u] += 1
            nbr[3 * v + fill[v]] = u
            eid[3 * v + fill[v]] = e
            fill[v] += 1
        self.nbr = nbr
        self.eid = eid
        self._edge_index = {uv: e for e, uv in enumerate(norm)}

    def neighbours(self, v: int) -> tuple[int, int, int]:
        b = 3 * v
        return (self.nbr[b], self.nbr[b + 1], self.nbr[b + 2])

    def incident_edges(self, v: int) -> tuple[int, int, int]:
        b = 3 * v
        return (self.eid[b], self.eid[b + 1], self.eid[b + 2])

    def edge_id(self, u: int, v: int) -> Optional[int]:
        """Edge id of (u, v), or None if not an edge."""
        if u > v:
            u, v = v, u
        return self._edge_index.get((u, v))

    def other_end(self, e: int, v: int) -> int:
        u, w = self.edges[e]
        return w if v == u else u

    def third_neighbour(self, v: int, a: int, b: int) -> tuple[int, int]:
        """The neighbour of v other than a and b, with its edge id."""
        base = 3 * v
        for k in range(3):
            w = self.nbr[base + k]
            if w != a and w != b:
                return w, self.eid[base + k]
        raise ValueError(f"{a},{b} do not leave a third neighbour at {v}")

    def is_connected(self) -> bool:
        seen = bytearray(self.n)
        queue = deque([0])
        seen[0] = 1
        count = 1
        while queue:
            v = queue.popleft()
            for k in range(3):
                w = self.nbr[3 * v + k]
                if not seen[w]:
                    seen[w] = 1
                    count += 1
                    queue.append(w)
        return count == self.n

    def __repr__(self):
        return f"CubicGraph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class Geodesic:
    """A shortest path, stored as its vertex sequence p_0..p_L."""

    vertices: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    def edge_ids(self, g: CubicGraph) -> list[int]:
        vs = self.vertices
        return [g.edge_id(vs[i], vs[i + 1]) for i in range(len(vs) - 1)]


@dataclass
class Config:
    """All asymptotic constants of the construction, as explicit parameters.

    `paper` / `desk` build the two standard profiles. Every field is
    positive; segment bounds are ordered; the gadget length range starts
    at 3 (shorter gadgets do not exist).
    """

    n: int
    seed: int = 0
    profile: str = "desk"
    geo_length: Optional[int] = None    # None: min(paper value, diameter-2)
    geo_separation: int = 50
    ell_range: tuple[int, int] = (3, 4)
    long_path_threshold: int = 20
    q1_bound: int = 0                   # 0 -> ceil(1000 ln n)
    segment_bounds: tuple[int, int] = (5, 10)
    transversal_degree_cap: int = 4
    weak_thomassen_bound: int = 40
    component_size_cap: int = 0         # 0 -> 64 ceil(sqrt(ln n))
    gadgets_per_length: int = 4
    epsilon: float = 0.5
    approx_attempts: int = 16
    exact_attempts: int = 8
    scale: float = 0.0

    def __post_init__(self):
        ln = math.log(max(self.n, 4))
        if self.q1_bound <= 0:
            self.q1_bound = math.ceil(1000.0 * ln)
        if self.component_size_cap <= 0:
            self.component_size_cap = 64 * math.ceil(math.sqrt(ln))
        if self.ell_range[0] < 3:
            raise ValueError("gadget length range must start at >= 3")
        if self.segment_bounds[0] > self.segment_bounds[1]:
            raise ValueError("segment bounds out of order")
        for name in ("geo_separation", "long_path_threshold",
                     "transversal_degree_cap", "weak_thomassen_bound",
                     "gadgets_per_length", "approx_attempts", "exact_attempts"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not (0.0 < self.epsilon < 1.0):
            raise ValueError("epsilon must lie in (0, 1)")

    @classmethod
    def desk(cls, n: int, seed: int = 0, **over) -> "Config":
        t = over.pop("long_path_threshold", 20)
        seg = over.pop("segment_bounds", (max(4, t // 4), max(8, t // 2)))
        return cls(n=n, seed=seed, profile="desk", long_path_threshold=t,
                   segment_bounds=seg, **over)

    @classmethod
    def paper(cls, n: int, seed: int = 0, **over) -> "Config":
        root = math.sqrt(math.log(max(n, 4)))
        t = math.ceil(4000 * root)
        return cls(
            n=n, seed=seed, profile="paper",
            geo_length=math.ceil(1e10 * root),
            ell_range=(3, math.ceil(1e10 * root)),
            long_path_threshold=t,
            segment_bounds=(math.ceil(1000 * root), math.ceil(2000 * root)),
            scale=1.0,
            **over,
        )

    def sub_rng(self, tag: int, ident: int) -> Random:
        # Stable per-object stream: int tuple hashing is deterministic.
        return Random(mix_seed(self.seed, tag, ident))


# ---------------------------------------------------------------------------
# graph6
# ---------------------------------------------------------------------------

def parse_graph6(text: str) -> CubicGraph:
    """Decode one header-less graph6 record into a CubicGraph.

    Raises GraphFormatError on malformed input and NotCubicError (with the
    offending vertex and degree) when the decoded graph is not 3-regular.
    """
    s = text.strip()
    if s.startswith(">>graph6<<"):
        s = s[len(">>graph6<<"):]
    if not s:
        raise GraphFormatError("empty graph6 input")
    data = [ord(c) - 63 for c in s]
    if any(b < 0 or b > 63 for b in data):
        raise GraphFormatError("graph6 byte out of range")
    if data[0] < 63:
        n = data[0]
        body = data[1:]
    elif len(data) >= 4 and data[1] < 63:
        n = (data[1] << 12) | (data[2] << 6) | data[3]
        body = data[4:]
    else:
        raise GraphFormatError("unsupported graph6 size prefix")
    nbits = n * (n - 1) // 2
    if len(body) != (nbits + 5) // 6:
        raise GraphFormatError(
            f"graph6 body length {len(body)} does not match n={n}")
    bits = []
    for b in body:
        for k in range(5, -1, -1):
            bits.append((b >> k) & 1)
    edges = []
    i = 0
    for v in range(1, n):
        for u in range(v):
            if bits[i]:
                edges.append((u, v))
            i += 1
    return CubicGraph(n, edges)


def to_graph6(g: CubicGraph) -> str:
    """Encode as a header-less graph6 string (bit-exact standard encoding)."""
    n = g.n
    if n <= 62:
        prefix = chr(n + 63)
    else:
        prefix = chr(126) + "".join(
            chr(((n >> s) & 63) + 63) for s in (12, 6, 0))
    adj = set(g.edges)
    bits = []
    for v in range(1, n):
        for u in range(v):
            bits.append(1 if (u, v) in adj else 0)
    while len(bits) % 6:
        bits.append(0)
    chars = []
    for i in range(0, len(bits), 6):
        b = 0
        for k in range(6):
            b = (b << 1) | bits[i + k]
        chars.append(chr(b + 63))
    return prefix + "".join(chars)


# ---------------------------------------------------------------------------
# edge-list format: "u v" per line, 0-based, '#' comments
# ---------------------------------------------------------------------------

def parse_edge_list(text: str) -> CubicGraph:
    edges = []
    top = -1
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"line {lineno}: expected 'u v'")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(f"line {lineno}: non-integer vertex")
        edges.append((u, v))
        top = max(top, u, v)
    if not edges:
        raise GraphFormatError("empty edge list")
    return CubicGraph(top + 1, edges)


def to_edge_list(g: CubicGraph) -> str:
    lines = [f"# cubic graph, n={g.n}, m={g.m}"]
    lines += [f"{u} {v}" for (u, v) in g.edges]
    return "\n".join(lines) + "\n"


def load_graph(text: str) -> CubicGraph:
    """Accept either graph6 (single token) or edge-list text."""
    stripped = text.strip()
    if "\n" not in stripped and " " not in stripped and not stripped.startswith("#"):
        return parse_graph6(stripped)
    return parse_edge_list(text)


# ---------------------------------------------------------------------------
# random cubic graphs (configuration model, restart on loop/multi-edge)
# ---------------------------------------------------------------------------

def random_cubic(n: int, seed: int = 0, require_connected: bool = False) -> CubicGraph:
    """Random simple 3-regular graph on n vertices, deterministic per seed.

    Full-restart rejection keeps the sampler simple; exact uniformity is not
    required anywhere downstream.
    """
    if n % 2 != 0:
        raise ValueError(f"no cubic graph on odd n={n} (handshake parity)")
    if n < 4:
        raise ValueError("need n >= 4")
    rng = Random(mix_seed(seed, 0x9E3779B9, n))
    while True:
        stubs = [v for v in range(n) for _ in range(3)]
        rng.shuffle(stubs)
        seen = set()
        ok = True
        for i in range(0, len(stubs), 2):
            u, v = stubs[i], stubs[i + 1]
            if u == v:
                ok = False
                break
            key = (u, v) if u < v else (v, u)
            if key in seen:
                ok = False
                break
            seen.add(key)
        if not ok:
            continue
        g = CubicGraph(n, sorted(seen))
        if require_connected and not g.is_connected():
            continue
        return g


# ---------------------------------------------------------------------------
# distances and geodesics
# ---------------------------------------------------------------------------

def bfs_distances(g: CubicGraph, sources: Iterable[int],
                  cutoff: Optional[int] = None) -> list[int]:
    """Distance from the nearest source; -1 beyond cutoff / unreachable."""
    dist = [-1] * g.n
    queue = deque()
    for s in sources:
        if dist[s] < 0:
            dist[s] = 0
            queue.append(s)
    nbr = g.nbr
    while queue:
        v = queue.popleft()
        d = dist[v] + 1
        if cutoff is not None and d > cutoff:
            continue
        for k in range(3):
            w = nbr[3 * v + k]
            if dist[w] < 0:
                dist[w] = d
                queue.append(w)
    return dist


def distance(g: CubicGraph, a: Iterable[int], b: Iterable[int]) -> int:
    """min over pairs of the BFS distance between vertex sets a and b."""
    aset = list(a)
    bset = set(b)
    if not aset or not bset:
        raise ValueError("distance of empty vertex set")
    if bset.intersection(aset):
        return 0
    dist = bfs_distances(g, aset)
    best = min((dist[v] for v in bset if dist[v] >= 0), default=-1)
    if best < 0:
        raise ValueError("vertex sets lie in different components")
    return best


def bfs_parents(g: CubicGraph, source: int) -> tuple[list[int], list[int]]:
    dist = [-1] * g.n
    parent = [-1] * g.n
    dist[source] = 0
    queue = deque([source])
    nbr = g.nbr
    while queue:
        v = queue.popleft()
        base = 3 * v
        for k in range(3):
            w = nbr[base + k]
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                parent[w] = v
                queue.append(w)
    return dist, parent


def diameter(g: CubicGraph) -> int:
    """Exact diameter (all-pairs BFS); fine at harvesting scales."""
    best = 0
    for v in range(g.n):
        d = max(bfs_distances(g, [v]))
        if d > best:
            best = d
    return best


def eccentricity_path(g: CubicGraph, v: int, length: int) -> Optional[Geodesic]:
    """A geodesic of the given length starting at v, or None.

    Ties in the BFS tree are broken toward smaller vertex ids so the result
    is deterministic.
    """
    dist, parent = bfs_parents(g, v)
    target = -1
    for w in range(g.n):
        if dist[w] == length:
            target = w
            break
    if target < 0:
        return None
    path = [target]
    while path[-1] != v:
        path.append(parent[path[-1]])
    path.reverse()
    return Geodesic(tuple(path))


def is_geodesic(g: CubicGraph, vertices: Sequence[int]) -> bool:
    """Exact check: consecutive adjacency plus d(p_i, p_j) = j - i."""
    vs = list(vertices)
    for i in range(len(vs) - 1):
        if g.edge_id(vs[i], vs[i + 1]) is None:
            return False
    dist = bfs_distances(g, [vs[0]])
    if any(dist[p] != i for i, p in enumerate(vs)):
        return False
    # distance from the start pins one end; confirm the other direction too
    dist_end = bfs_distances(g, [vs[-1]])
    return all(dist_end[p] == len(vs) - 1 - i for i, p in enumerate(vs))


def harvest_geodesics(g: CubicGraph, cfg: Config,
                      geo_length: Optional[int] = None,
                      separation: Optional[int] = None,
                      max_count: Optional[int] = None) -> list[Geodesic]:
    """Greedy ball-packing harvest of pairwise-distant geodesics.

    Centers are chosen farthest-point-first (ties to smaller vertex id) with
    spacing 2*L + separation, and a length-L geodesic is grown from each
    center along its BFS tree. Every returned pair is rechecked by BFS to be
    at distance >= separation; an empty list means the diameter is too small
    (the caller decides the fallback).
    """
    L = geo_length if geo_length is not None else cfg.geo_length
    if L is None:
        L = max(4, diameter(g) - 2) if g.n <= 4096 else cfg.long_path_threshold
    sep = separation if separation is not None else cfg.geo_separation
    # candidate centers: greedy farthest-point, spread a bit beyond the
    # separation; the exact per-vertex distance array enforces the contract
    spacing = max(2, sep + 1)
    mindist = [10 ** 9] * g.n
    centers = []
    c = 0
    while True:
        centers.append(c)
        d = bfs_distances(g, [c])
        for v in range(g.n):
            dv = d[v] if d[v] >= 0 else 10 ** 9
            if dv < mindist[v]:
                mindist[v] = dv
        far = max(range(g.n), key=lambda v: (mindist[v], -v))
        if mindist[far] < spacing:
            break
        c = far
    inf = 10 ** 9
    dist_kept = [inf] * g.n
    out: list[Geodesic] = []
    for c in centers:
        if dist_kept[c] < sep:
            continue
        dist_c, parent = bfs_parents(g, c)
        # grow toward targets that stay clear of everything kept so far
        targets = sorted((v for v in range(g.n) if dist_c[v] == L),
                         key=lambda v: (-dist_kept[v], v))
        for t in targets[:24]:
            path = [t]
            while path[-1] != c:
                path.append(parent[path[-1]])
            path.reverse()
            if min(dist_kept[v] for v in path) >= sep:
                out.append(Geodesic(tuple(path)))
                d = bfs_distances(g, path)
                for v in range(g.n):
                    if 0 <= d[v] < dist_kept[v]:
                        dist_kept[v] = d[v]
                break
        if max_count is not None and len(out) >= max_count:
            break
    return out
