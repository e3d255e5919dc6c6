"""Bit-packed simple graphs with stable labels, graph rewriting moves, and GF(2) linear algebra.

Vertices carry external integer labels that survive deletions; adjacency is
stored as one Python-int bit row per vertex, indexed by internal position.
All graph values are immutable: every operation returns a new Graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

__all__ = [
    "MAX_VERTICES",
    "Graph",
    "TransformStep",
    "lc",
    "dele",
    "piv",
    "local_complement",
    "delete_vertex",
    "pivot",
    "apply_sequence",
    "induced_subgraph",
    "write_edge_list",
    "parse_edge_list",
    "F2Matrix",
    "f2_rank",
    "f2_solve",
]

MAX_VERTICES = 4096


def _bits(mask: int):
    """Yield set bit positions of mask, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


@dataclass(frozen=True)
class Graph:
    """Immutable simple graph.

    labels: external vertex names; position in the tuple is the internal index.
    adj: bit rows over internal indices; bit j of adj[i] set iff {labels[i], labels[j]} is an edge.
    left_mask: internal-index bitmask of the left side when the graph carries a
        bipartition tag, else None.  The right side is the complement.
    origin: optional provenance tag, e.g. ("projective", 3) or ("random", l, r, seed).
    """

    labels: tuple[int, ...]
    adj: tuple[int, ...]
    left_mask: int | None = None
    origin: tuple | None = field(default=None, compare=False)

    @cached_property
    def _index(self) -> dict[int, int]:
        return {lab: i for i, lab in enumerate(self.labels)}

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def m(self) -> int:
        return sum(row.bit_count() for row in self.adj) // 2

    @property
    def right_mask(self) -> int | None:
        if self.left_mask is None:
            return None
        return ((1 << self.n) - 1) ^ self.left_mask

    def index_of(self, label: int) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise ValueError(f"no vertex with label {label}") from None

    def has_vertex(self, label: int) -> bool:
        return label in self._index

    def has_edge(self, a: int, b: int) -> bool:
        return bool(self.adj[self.index_of(a)] >> self.index_of(b) & 1)

    def neighbors(self, label: int) -> tuple[int, ...]:
        row = self.adj[self.index_of(label)]
        return tuple(self.labels[i] for i in _bits(row))

    def degree(self, label: int) -> int:
        return self.adj[self.index_of(label)].bit_count()

    def edges(self) -> list[tuple[int, int]]:
        out = []
        for i, row in enumerate(self.adj):
            for j in _bits(row):
                if j > i:
                    a, b = self.labels[i], self.labels[j]
                    out.append((a, b) if a < b else (b, a))
        out.sort()
        return out

    def side_of(self, label: int) -> str:
        if self.left_mask is None:
            raise ValueError("graph carries no bipartition")
        return "L" if self.left_mask >> self.index_of(label) & 1 else "R"

    def left_labels(self) -> tuple[int, ...]:
        if self.left_mask is None:
            raise ValueError("graph carries no bipartition")
        return tuple(self.labels[i] for i in _bits(self.left_mask))

    def right_labels(self) -> tuple[int, ...]:
        if self.left_mask is None:
            raise ValueError("graph carries no bipartition")
        return tuple(self.labels[i] for i in _bits(self.right_mask))

    def check(self) -> None:
        """Validate structural invariants; raises ValueError on violation."""
        n = self.n
        if n > MAX_VERTICES:
            raise ValueError(f"graph exceeds {MAX_VERTICES} vertices")
        if len(set(self.labels)) != n:
            raise ValueError("duplicate vertex labels")
        if len(self.adj) != n:
            raise ValueError("adjacency row count does not match vertex count")
        full = (1 << n) - 1 if n else 0
        for i, row in enumerate(self.adj):
            if row >> n:
                raise ValueError("adjacency bits outside vertex range")
            if row >> i & 1:
                raise ValueError(f"self-loop at {self.labels[i]}")
        for i in range(n):
            for j in _bits(self.adj[i]):
                if not self.adj[j] >> i & 1:
                    raise ValueError("asymmetric adjacency")
        if self.left_mask is not None:
            if self.left_mask & ~full:
                raise ValueError("bipartition mask outside vertex range")
            left = self.left_mask
            for i in range(n):
                same = left if left >> i & 1 else full ^ left
                if self.adj[i] & same:
                    raise ValueError("edge inside one side of the bipartition")

    @staticmethod
    def from_edges(
        labels: list[int] | tuple[int, ...],
        edges: list[tuple[int, int]] | tuple[tuple[int, int], ...],
        left: list[int] | tuple[int, ...] | None = None,
        origin: tuple | None = None,
    ) -> "Graph":
        labels = tuple(labels)
        if len(labels) > MAX_VERTICES:
            raise ValueError(f"graph exceeds {MAX_VERTICES} vertices")
        idx = {lab: i for i, lab in enumerate(labels)}
        if len(idx) != len(labels):
            raise ValueError("duplicate vertex labels")
        rows = [0] * len(labels)
        for a, b in edges:
            if a == b:
                raise ValueError(f"self-loop at {a}")
            ia, ib = idx[a], idx[b]
            rows[ia] |= 1 << ib
            rows[ib] |= 1 << ia
        mask = None
        if left is not None:
            mask = 0
            for lab in left:
                mask |= 1 << idx[lab]
        g = Graph(labels, tuple(rows), mask, origin)
        g.check()
        return g


@dataclass(frozen=True)
class TransformStep:
    """One rewriting move: kind "LC" (a = vertex), "DEL" (a = vertex), or "PIVOT" (edge a,b)."""

    kind: str
    a: int
    b: int | None = None

    def __post_init__(self):
        if self.kind not in ("LC", "DEL", "PIVOT"):
            raise ValueError(f"unknown step kind {self.kind!r}")
        if (self.b is None) != (self.kind != "PIVOT"):
            raise ValueError("PIVOT takes two operands, LC/DEL take one")

    def __str__(self) -> str:
        if self.kind == "PIVOT":
            return f"PIVOT {self.a} {self.b}"
        return f"{self.kind} {self.a}"

    @staticmethod
    def parse(line: str) -> "TransformStep":
        parts = line.split()
        if len(parts) == 2 and parts[0] in ("LC", "DEL"):
            return TransformStep(parts[0], int(parts[1]))
        if len(parts) == 3 and parts[0] == "PIVOT":
            return TransformStep("PIVOT", int(parts[1]), int(parts[2]))
        raise ValueError(f"unparseable step line {line!r}")


def lc(v: int) -> TransformStep:
    return TransformStep("LC", v)


def dele(v: int) -> TransformStep:
    return TransformStep("DEL", v)


def piv(a: int, b: int) -> TransformStep:
    return TransformStep("PIVOT", a, b)


def local_complement(g: Graph, v: int) -> Graph:
    """Complement the subgraph induced by the neighborhood of v."""
    i = g.index_of(v)
    nb = g.adj[i]
    rows = list(g.adj)
    for j in _bits(nb):
        rows[j] ^= nb ^ (1 << j)
    return Graph(g.labels, tuple(rows), g.left_mask, g.origin)


def delete_vertex(g: Graph, v: int) -> Graph:
    """Remove v and its incident edges; remaining labels keep their identity."""
    i = g.index_of(v)
    low = (1 << i) - 1

    def squeeze(mask: int) -> int:
        return (mask & low) | ((mask >> (i + 1)) << i)

    rows = [squeeze(row) for k, row in enumerate(g.adj) if k != i]
    labels = g.labels[:i] + g.labels[i + 1 :]
    mask = None if g.left_mask is None else squeeze(g.left_mask)
    return Graph(labels, tuple(rows), mask, g.origin)


def pivot(g: Graph, a: int, b: int) -> Graph:
    """Pivot on edge {a, b}: the triple local complementation at a, b, a.

    When the graph carries a bipartition, a and b swap sides (they are on
    opposite sides of any bipartite graph, being adjacent).
    """
    ia, ib = g.index_of(a), g.index_of(b)
    if not g.adj[ia] >> ib & 1:
        raise ValueError(f"pivot requires an edge between {a} and {b}")
    h = local_complement(local_complement(local_complement(g, a), b), a)
    mask = g.left_mask
    if mask is not None:
        mask ^= (1 << ia) | (1 << ib)
    return Graph(h.labels, h.adj, mask, g.origin)


def apply_sequence(g: Graph, steps) -> Graph:
    """Fold a sequence of transform steps over g.

    Runs of consecutive DEL steps are applied as one batched restriction
    (deletions of distinct vertices commute); error messages still carry the
    index of the first offending step.
    """
    steps = list(steps)
    cur = g
    i = 0
    while i < len(steps):
        step = steps[i]
        try:
            if step.kind == "DEL":
                doomed = []
                j = i
                while j < len(steps) and steps[j].kind == "DEL":
                    v = steps[j].a
                    if not cur.has_vertex(v) or v in doomed:
                        raise ValueError(f"cannot delete missing vertex {v}")
                    doomed.append(v)
                    j += 1
                gone = set(doomed)
                cur = induced_subgraph(cur, [x for x in cur.labels if x not in gone])
                i = j
                continue
            if step.kind == "LC":
                cur = local_complement(cur, step.a)
            else:
                cur = pivot(cur, step.a, step.b)
        except ValueError as exc:
            raise ValueError(f"step {i} ({step}): {exc}") from None
        i += 1
    return cur


def induced_subgraph(g: Graph, keep) -> Graph:
    """Subgraph induced by the given labels; vertex order follows g's internal order."""
    keep = set(keep)
    idxs = [i for i, lab in enumerate(g.labels) if lab in keep]
    if len(idxs) != len(keep):
        missing = keep - set(g.labels)
        raise ValueError(f"labels not in graph: {sorted(missing)}")
    labels = tuple(g.labels[i] for i in idxs)
    rows = []
    for i in idxs:
        row = g.adj[i]
        packed = 0
        for pos, j in enumerate(idxs):
            packed |= (row >> j & 1) << pos
        rows.append(packed)
    mask = None
    if g.left_mask is not None:
        mask = 0
        for pos, j in enumerate(idxs):
            mask |= (g.left_mask >> j & 1) << pos
    return Graph(labels, tuple(rows), mask, g.origin)


# ---------------------------------------------------------------------------
# Edge-list text format
# ---------------------------------------------------------------------------
#   line 1: "n m" or "n m bipartite l"       (l = size of the left side)
#   next m lines: "u v" with 0-based labels, u < v, sorted
# Lines starting with '#' before the header are comments (used for provenance)
# and are ignored by the parser, except a "# origin: ..." line which restores
# the construction tag.


def write_edge_list(g: Graph, header_lines: tuple[str, ...] = ()) -> str:
    if tuple(g.labels) != tuple(range(g.n)):
        raise ValueError("edge-list format requires labels 0..n-1")
    lines = [f"# {h}" for h in header_lines]
    if g.origin is not None:
        lines.append("# origin: " + " ".join(str(x) for x in g.origin))
    edges = g.edges()
    head = f"{g.n} {len(edges)}"
    if g.left_mask is not None:
        left = g.left_labels()
        if tuple(left) != tuple(range(len(left))):
            raise ValueError("bipartite edge-list format requires the left side to be 0..l-1")
        head += f" bipartite {len(left)}"
    lines.append(head)
    lines.extend(f"{a} {b}" for a, b in edges)
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> Graph:
    origin = None
    lines = []
    for raw in text.splitlines():
        if raw.startswith("#"):
            body = raw[1:].strip()
            if body.startswith("origin:"):
                parts = body[len("origin:") :].split()
                origin = tuple(parts[:1] + [int(x) if x.lstrip("-").isdigit() else x for x in parts[1:]])
            continue
        lines.append(raw)
    if not lines:
        raise ValueError("empty edge-list document")
    head = lines[0].split()
    left = None
    if len(head) == 2:
        n, m = int(head[0]), int(head[1])
    elif len(head) == 4 and head[2] == "bipartite":
        n, m = int(head[0]), int(head[1])
        left = list(range(int(head[3])))
    else:
        raise ValueError(f"bad header line {lines[0]!r}")
    if len(lines) != m + 1:
        raise ValueError(f"expected {m} edge lines, found {len(lines) - 1}")
    edges = []
    for ln in lines[1:]:
        u, v = ln.split()
        u, v = int(u), int(v)
        if not (0 <= u < n and 0 <= v < n):
            raise ValueError(f"edge endpoint out of range in {ln!r}")
        edges.append((u, v))
    return Graph.from_edges(list(range(n)), edges, left=left, origin=origin)


# ---------------------------------------------------------------------------
# GF(2) linear algebra on bit rows
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class F2Matrix:
    """Matrix over GF(2); row i is the int rows[i], bit j the entry (i, j)."""

    rows: tuple[int, ...]
    cols: int

    def __post_init__(self):
        for row in self.rows:
            if row >> self.cols:
                raise ValueError("row has bits beyond declared column count")

    @property
    def nrows(self) -> int:
        return len(self.rows)

    def transpose(self) -> "F2Matrix":
        cols = [0] * self.cols
        for i, row in enumerate(self.rows):
            for j in _bits(row):
                cols[j] |= 1 << i
        return F2Matrix(tuple(cols), self.nrows)


def f2_rank(m: F2Matrix) -> int:
    rank = 0
    pivots: list[int] = []
    for row in m.rows:
        for p in pivots:
            low = p & -p
            if row & low:
                row ^= p
        if row:
            pivots.append(row)
            rank += 1
    return rank


def f2_solve(m: F2Matrix, t: int) -> int | None:
    """Find x with xT M = tT (t a column bit vector); None when inconsistent.

    The returned int has bit i set iff row i participates.  t = 0 yields 0.
    When M is square and of full rank the solution is unique.
    """
    if t >> m.cols:
        raise ValueError("target has bits beyond column count")
    # Eliminate over rows while tracking the row combination producing each pivot.
    pivots: list[tuple[int, int]] = []  # (reduced row, combination mask)
    for i, row in enumerate(m.rows):
        combo = 1 << i
        for p, c in pivots:
            if row & (p & -p):
                row ^= p
                combo ^= c
        if row:
            pivots.append((row, combo))
    combo = 0
    for p, c in pivots:
        if t & (p & -p):
            t ^= p
            combo ^= c
    if t:
        return None
    return combo
