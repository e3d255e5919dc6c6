"""Synthesis of local-complementation programs that induce a chosen graph on chosen vertices.

Two families of synthesizers are provided.  The rank family works on arbitrary
bipartite hosts: a greedy scan of the right side builds a full-rank incidence
basis over vertex pairs, after which any target edge set is a GF(2) solve away.
The geometric family works on the point-line incidence graph of PG(2, q) and on
its orthogonality reduction, constructing for each target pair a small gadget
(two "spoke" lines meeting in a "junction" point, plus "relay" lines, "anchor"
points and "tie" lines for cross-side work) whose local complementations toggle
exactly the wanted pair.

Every synthesizer returns a certificate: the named gadget vertices, per-step
avoidance accounting, and the full step sequence.  Construction failures that
the theory rules out raise CertificateError; data-dependent failures of the
rank family are returned as SynthFailure values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .graphcore import (
    F2Matrix,
    Graph,
    TransformStep,
    apply_sequence,
    dele,
    delete_vertex,
    f2_solve,
    induced_subgraph,
    lc,
    local_complement,
    piv,
    pivot,
)
from .projgeom import ProjectivePlane, build_incidence_graph, build_plane, build_reduced_graph

__all__ = [
    "TargetGraph",
    "SynthesisCertificate",
    "SynthFailure",
    "CertificateError",
    "AvoidanceRecord",
    "rank_basis",
    "synth_on_left",
    "pivot_to_left",
    "PivotResult",
    "synth_bipartite_rank",
    "synth_pairing_projective",
    "synth_vmu_oneside",
    "synth_vmu_full",
    "synth_vmu_reduced",
    "synth_auto",
    "replay_certificate",
    "certificate_matches",
    "certificate_support",
    "restrict_for_protocol",
    "certificate_to_json",
    "steps_to_text",
    "parse_steps_text",
    "parse_target_text",
    "write_target_text",
]


class CertificateError(RuntimeError):
    """A synthesizer invariant failed during construction; indicates a bug."""


@dataclass(frozen=True)
class TargetGraph:
    """A labeled target: the vertex set it lives on and the wanted edges."""

    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]

    @staticmethod
    def make(vertices, edges) -> "TargetGraph":
        verts = tuple(sorted(set(vertices)))
        if len(verts) != len(tuple(vertices)):
            raise ValueError("duplicate target vertices")
        vset = set(verts)
        norm = set()
        for a, b in edges:
            if a == b:
                raise ValueError(f"target self-loop at {a}")
            if a not in vset or b not in vset:
                raise ValueError(f"target edge ({a},{b}) leaves the vertex set")
            norm.add((a, b) if a < b else (b, a))
        return TargetGraph(verts, tuple(sorted(norm)))

    def edge_set(self) -> set:
        return set(self.edges)

    def as_graph(self) -> Graph:
        return Graph.from_edges(self.vertices, self.edges)


@dataclass(frozen=True)
class SynthFailure:
    """Data-dependent synthesis failure, carried as a value."""

    stage: str  # "rank" | "pivot"
    reason: str
    detail: dict = field(default_factory=dict)


@dataclass(frozen=True)
class AvoidanceRecord:
    """One existence check: `forbidden` things ruled out of `budget` candidates."""

    stage: str
    pair: str
    forbidden: int
    cap: int  # proof-level bound on `forbidden` (scaled by 2 where the formula is halved)
    budget: int


@dataclass(frozen=True, eq=False)
class SynthesisCertificate:
    kind: str  # "rank-basis" | "pairing" | "oneside" | "full" | "reduced"
    q: int | None
    k_vertices: tuple[int, ...]
    target: TargetGraph
    sets: dict
    steps: tuple[TransformStep, ...]
    avoidance: tuple[AvoidanceRecord, ...] = ()


def _pairs_lex(k: int):
    return [(i, j) for i in range(k) for j in range(i + 1, k)]


def _mask(bits) -> int:
    m = 0
    for b in bits:
        m |= 1 << b
    return m


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


# ---------------------------------------------------------------------------
# Rank family: arbitrary bipartite hosts
# ---------------------------------------------------------------------------


def rank_basis(g: Graph, kset) -> SynthesisCertificate | SynthFailure:
    """Greedy full-rank basis of right vertices over the pair-incidence matrix of K.

    Scans the right side in label order, keeping a vertex iff its row over the
    C(k,2) pair columns (bit set iff the vertex sees both endpoints) increases
    the GF(2) rank.  Success means any edge set on K is reachable.
    """
    if g.left_mask is None:
        raise ValueError("rank basis needs a bipartite host")
    K = tuple(sorted(kset))
    left = set(g.left_labels())
    if not set(K) <= left:
        raise ValueError("K must lie on the left side")
    k = len(K)
    if k < 2:
        raise ValueError("rank basis needs at least two vertices")
    pairs = [(K[i], K[j]) for i, j in _pairs_lex(k)]
    cols = len(pairs)
    kept_labels: list[int] = []
    kept_rows: list[int] = []
    pivots: list[int] = []
    rank = 0
    for w in sorted(g.right_labels()):
        nb = set(g.neighbors(w))
        row = 0
        for c, (a, b) in enumerate(pairs):
            if a in nb and b in nb:
                row |= 1 << c
        red = row
        for p in pivots:
            if red & (p & -p):
                red ^= p
        if red:
            pivots.append(red)
            kept_labels.append(w)
            kept_rows.append(row)
            rank += 1
            if rank == cols:
                break
    if rank < cols:
        return SynthFailure(
            "rank",
            "right side exhausted before the pair matrix reached full rank",
            {"rank": rank, "needed": cols},
        )
    return SynthesisCertificate(
        kind="rank-basis",
        q=None,
        k_vertices=K,
        target=TargetGraph.make(K, ()),
        sets={
            "basis": tuple(kept_labels),
            "pairs": tuple(pairs),
            "rows": tuple(kept_rows),
        },
        steps=(),
    )


def synth_on_left(g: Graph, target: TargetGraph) -> SynthesisCertificate | SynthFailure:
    """Realize `target` on K inside the left side of a bipartite host.

    Solves for the subset of basis vertices whose joint local complementations
    toggle exactly the target pairs (the host is bipartite, so K starts with no
    internal edges), then deletes everything else.
    """
    rb = rank_basis(g, target.vertices)
    if isinstance(rb, SynthFailure):
        return rb
    K = rb.k_vertices
    pairs = rb.sets["pairs"]
    want = 0
    tedges = target.edge_set()
    for c, pr in enumerate(pairs):
        if pr in tedges:
            want |= 1 << c
    m = F2Matrix(rb.sets["rows"], len(pairs))
    x = f2_solve(m, want)
    if x is None:
        raise CertificateError("full-rank pair matrix failed to solve")
    chosen = tuple(rb.sets["basis"][i] for i in _bits(x))
    kset = set(K)
    steps = [lc(v) for v in sorted(chosen)]
    steps += [dele(v) for v in g.labels if v not in kset]
    return SynthesisCertificate(
        kind="rank-basis",
        q=None,
        k_vertices=K,
        target=target,
        sets={"basis": rb.sets["basis"], "selected": chosen, "pairs": pairs},
        steps=tuple(steps),
    )


@dataclass(frozen=True)
class PivotResult:
    graph: Graph
    steps: tuple[TransformStep, ...]
    moved: dict


def pivot_to_left(g: Graph, kset) -> PivotResult | SynthFailure:
    """Move every K vertex on the right to the left by pivoting against spare left partners.

    Each stranded vertex pivots on an edge toward the lowest-label left partner
    outside K, and the partner is deleted.  Fails (as a value) when a stranded
    vertex has no such partner.
    """
    if g.left_mask is None:
        raise ValueError("pivoting needs a bipartite host")
    K = set(kset)
    if not K <= set(g.labels):
        raise ValueError("K must be a subset of the vertices")
    cur = g
    steps: list[TransformStep] = []
    moved: dict[int, int] = {}
    for a in sorted(K & set(g.right_labels())):
        partners = [b for b in cur.neighbors(a) if b not in K and cur.side_of(b) == "L"]
        if not partners:
            return SynthFailure("pivot", "stranded vertex has no left partner outside K", {"stuck": a})
        b = min(partners)
        cur = delete_vertex(pivot(cur, a, b), b)
        steps += [piv(a, b), dele(b)]
        moved[a] = b
    return PivotResult(cur, tuple(steps), moved)


def synth_bipartite_rank(g: Graph, target: TargetGraph) -> SynthesisCertificate | SynthFailure:
    """Pivot K's stranded vertices to the left, then run the rank synthesizer."""
    pv = pivot_to_left(g, target.vertices)
    if isinstance(pv, SynthFailure):
        return pv
    inner = synth_on_left(pv.graph, target)
    if isinstance(inner, SynthFailure):
        return inner
    sets = dict(inner.sets)
    sets["moved"] = tuple(sorted(pv.moved.items()))
    return SynthesisCertificate(
        kind="rank-basis",
        q=None,
        k_vertices=inner.k_vertices,
        target=target,
        sets=sets,
        steps=pv.steps + inner.steps,
    )


# ---------------------------------------------------------------------------
# Geometric family: PG(2, q) hosts
# ---------------------------------------------------------------------------


class _SideView:
    """Orientation of the incidence host: target elements on one side, connectors opposite."""

    def __init__(self, plane: ProjectivePlane, side: str):
        self.plane = plane
        self.side = side
        n = plane.n_points
        if side == "L":
            self.conns_of = plane.lines_through
            self.elem_mask_of = plane.line_masks
            self._elem_off, self._conn_off = 0, n
            self._meet = plane.meet_idx
        else:
            self.conns_of = plane.points_on
            self.elem_mask_of = plane.point_masks
            self._elem_off, self._conn_off = n, 0
            self._meet = plane.line_through_idx

    def elem_label(self, i: int) -> int:
        return i + self._elem_off

    def conn_label(self, j: int) -> int:
        return j + self._conn_off

    def meet(self, c1: int, c2: int) -> int:
        return self._meet(c1, c2)


def _first_conn(view: _SideView, elem: int, bad_elems: int, bad_conns: int = 0) -> int | None:
    for c in view.conns_of[elem]:
        if bad_conns >> c & 1:
            continue
        if view.elem_mask_of[c] & bad_elems:
            continue
        return c
    return None


def _build_gadgets(view: _SideView, kidx: tuple[int, ...], q: int, caps, stagefmt) -> dict:
    """Shared two-spokes-and-a-junction recursion for the pairing and one-side builders.

    caps(step_no) -> (cap_first, cap_second): proof-level counts (doubled) that
    bound the forbidden sets when choosing the two spokes of that step.
    `kidx` holds element indices; pairs of positions are supplied by the caller
    through stagefmt: a list of (pos_first, pos_second, tag).
    """
    kmask = _mask(kidx)
    cmask = 0
    junctions: list[int] = []
    spokes: list[tuple[int, int]] = []
    used: list[int] = []
    records: list[AvoidanceRecord] = []
    for step_no, (pi, pj, tag) in enumerate(stagefmt):
        cap_a, cap_b = caps(step_no)
        bad_a = (kmask & ~(1 << kidx[pi])) | cmask
        forb = bad_a.bit_count()
        if not (2 * forb <= cap_a <= 2 * q):
            raise CertificateError(f"spoke budget violated at {tag}: {forb} vs {cap_a}/2q={2*q}")
        records.append(AvoidanceRecord("spoke_first", tag, forb, cap_a, 2 * q))
        a = _first_conn(view, kidx[pi], bad_a)
        if a is None:
            raise CertificateError(f"no spoke candidate through element {kidx[pi]} at {tag}")
        if a in used:
            raise CertificateError("spoke reuse")
        imask = 0
        for s in used:
            imask |= 1 << view.meet(a, s)
        bad_b = (kmask & ~(1 << kidx[pj])) | cmask | imask
        forb = bad_b.bit_count()
        if not (2 * forb <= cap_b <= 2 * q):
            raise CertificateError(f"spoke budget violated at {tag}: {forb} vs {cap_b}/2q={2*q}")
        records.append(AvoidanceRecord("spoke_second", tag, forb, cap_b, 2 * q))
        b = _first_conn(view, kidx[pj], bad_b)
        if b is None:
            raise CertificateError(f"no spoke candidate through element {kidx[pj]} at {tag}")
        c = view.meet(a, b)
        if (1 << c) & (kmask | cmask):
            raise CertificateError("junction collides with target or earlier junction")
        junctions.append(c)
        spokes.append((a, b))
        used += [a, b]
        cmask |= 1 << c
    # full-certificate neighborhood equalities
    for (pi, pj, tag), (a, b), c in zip(stagefmt, spokes, junctions):
        if view.elem_mask_of[a] & (kmask | cmask) != (1 << kidx[pi]) | (1 << c):
            raise CertificateError(f"spoke through extra certificate elements at {tag}")
        if view.elem_mask_of[b] & (kmask | cmask) != (1 << kidx[pj]) | (1 << c):
            raise CertificateError(f"spoke through extra certificate elements at {tag}")
    return {"junctions": junctions, "spokes": spokes, "records": records}


def _side_of_labels(plane: ProjectivePlane, labels) -> str:
    n = plane.n_points
    if all(0 <= v < n for v in labels):
        return "L"
    if all(n <= v < 2 * n for v in labels):
        return "R"
    raise ValueError("vertices straddle the bipartition")


def synth_pairing_projective(q: int, pairs) -> SynthesisCertificate:
    """Disjoint pairing of 2k same-side vertices of the incidence host of PG(2, q)."""
    plane = build_plane(q)
    pairs = [tuple(p) for p in pairs]
    flat = [v for p in pairs for v in p]
    if len(set(flat)) != len(flat):
        raise ValueError("pairing endpoints must be distinct")
    if not pairs:
        raise ValueError("empty pairing")
    k = len(pairs)
    if 5 * k - 4 > q:
        raise ValueError(f"pairing needs 5k-4 <= q; got k={k}, q={q}")
    side = _side_of_labels(plane, flat)
    off = 0 if side == "L" else plane.n_points
    view = _SideView(plane, side)
    kidx = tuple(v - off for v in flat)  # positions: pair j uses (2j, 2j+1)
    stagefmt = [(2 * j, 2 * j + 1, f"{j}") for j in range(k)]

    def caps(step_no):
        return (2 * (2 * k - 1 + step_no), 2 * (2 * k - 1 + 3 * step_no))

    built = _build_gadgets(view, kidx, q, caps, stagefmt)
    # exact sizes: endpoints and junctions are pairwise distinct
    for rec in built["records"][::2]:
        if rec.forbidden != 2 * k - 1 + int(rec.pair):
            raise CertificateError("pairing avoidance size mismatch")
    target = TargetGraph.make(flat, [tuple(sorted(p)) for p in pairs])
    steps: list[TransformStep] = []
    for a, b in built["spokes"]:
        steps += [lc(view.conn_label(a)), lc(view.conn_label(b))]
    for c in built["junctions"]:
        steps.append(lc(view.elem_label(c)))
    host = build_incidence_graph(q)
    keep = set(flat)
    steps += [dele(v) for v in host.labels if v not in keep]
    sets = {
        "junctions": {t: view.elem_label(c) for (_, _, t), c in zip(stagefmt, built["junctions"])},
        "spokes_first": {t: view.conn_label(a) for (_, _, t), (a, _) in zip(stagefmt, built["spokes"])},
        "spokes_second": {t: view.conn_label(b) for (_, _, t), (_, b) in zip(stagefmt, built["spokes"])},
    }
    return SynthesisCertificate(
        kind="pairing",
        q=q,
        k_vertices=tuple(sorted(flat)),
        target=target,
        sets=sets,
        steps=tuple(steps),
        avoidance=tuple(built["records"]),
    )


def _oneside_build(plane: ProjectivePlane, side: str, kidx: tuple[int, ...], q: int) -> dict:
    k = len(kidx)
    view = _SideView(plane, side)
    prs = _pairs_lex(k)
    stagefmt = [(i, j, f"{i},{j}") for i, j in prs]

    def caps(_step):
        return (k * k + k - 4, 3 * k * k - k - 8)

    built = _build_gadgets(view, kidx, q, caps, stagefmt)
    built["view"] = view
    built["pairs"] = prs
    return built


def synth_vmu_oneside(q: int, target: TargetGraph) -> SynthesisCertificate:
    """Any graph on k same-side vertices of the incidence host of PG(2, q)."""
    plane = build_plane(q)
    k = len(target.vertices)
    if k < 1:
        raise ValueError("empty target")
    if 3 * k * k - k - 8 > 2 * q:
        raise ValueError(f"one-side synthesis needs 3k^2-k-8 <= 2q; got k={k}, q={q}")
    side = _side_of_labels(plane, target.vertices)
    off = 0 if side == "L" else plane.n_points
    kidx = tuple(v - off for v in target.vertices)
    built = _oneside_build(plane, side, kidx, q)
    view = built["view"]
    tedges = target.edge_set()
    steps: list[TransformStep] = []
    for (i, j), (a, b), c in zip(built["pairs"], built["spokes"], built["junctions"]):
        if (target.vertices[i], target.vertices[j]) in tedges:
            steps += [lc(view.conn_label(a)), lc(view.conn_label(b)), lc(view.elem_label(c))]
    host = build_incidence_graph(q)
    keep = set(target.vertices)
    steps += [dele(v) for v in host.labels if v not in keep]
    sets = {
        "junctions": {f"{i},{j}": view.elem_label(c) for (i, j), c in zip(built["pairs"], built["junctions"])},
        "spokes_first": {f"{i},{j}": view.conn_label(a) for (i, j), (a, _) in zip(built["pairs"], built["spokes"])},
        "spokes_second": {f"{i},{j}": view.conn_label(b) for (i, j), (_, b) in zip(built["pairs"], built["spokes"])},
    }
    return SynthesisCertificate(
        kind="oneside",
        q=q,
        k_vertices=target.vertices,
        target=target,
        sets=sets,
        steps=tuple(steps),
        avoidance=tuple(built["records"]),
    )


def synth_vmu_full(q: int, target: TargetGraph) -> SynthesisCertificate:
    """Any graph on any k vertices of the incidence host of PG(2, q), both sides allowed."""
    plane = build_plane(q)
    n = plane.n_points
    host = build_incidence_graph(q)
    verts = target.vertices
    k = len(verts)
    if k < 1:
        raise ValueError("empty target")
    if any(not 0 <= v < 2 * n for v in verts):
        raise ValueError("target vertices outside the host")
    if 7 * k * k - 16 > 4 * q:
        raise ValueError(f"full synthesis needs 7k^2-16 <= 4q; got k={k}, q={q}")
    kpoints = tuple(v for v in verts if v < n)
    klines = tuple(v - n for v in verts if v >= n)
    k1, k2 = len(kpoints), len(klines)
    records: list[AvoidanceRecord] = []
    k1mask = _mask(kpoints)
    k2mask = _mask(klines)

    # proof-level budgets for this side split (doubled counts, compared to 2q)
    cap_spoke_a = k1 * k1 + 2 * k - k1 - 4
    cap_spoke_b = 3 * k1 * k1 + 4 * k - 5 * k1 - 8
    cap_relay = k1 * k1 + 4 * k - 3 * k1 - 4
    cap_anchor_a = k * k - k1 * k1 + 2 * k * k1 + k - k1 - 4
    cap_anchor_b = 3 * k * k - 2 * k1 * k1 + 2 * k * k1 + 2 * k1 - k - 8

    # --- gadgets for point-target pairs: spokes avoid the target lines ------
    c1mask = 0
    junctions: dict[str, int] = {}
    spokes_first: dict[str, int] = {}
    spokes_second: dict[str, int] = {}
    used_spokes: list[int] = []
    point_pairs = _pairs_lex(k1)
    for i, j in point_pairs:
        tag = f"{i},{j}"
        bad = (k1mask & ~(1 << kpoints[i])) | c1mask
        forb = bad.bit_count() + k2
        if not (2 * forb <= cap_spoke_a + 2 * k2 and cap_spoke_a <= 2 * q):
            raise CertificateError(f"point-pair spoke budget violated at {tag}")
        records.append(AvoidanceRecord("spoke_first", tag, forb, cap_spoke_a + 2 * k2, 2 * (q + 1)))
        a = None
        for cand in plane.lines_through[kpoints[i]]:
            if k2mask >> cand & 1:
                continue
            if plane.line_masks[cand] & bad:
                continue
            a = cand
            break
        if a is None:
            raise CertificateError(f"no spoke candidate at {tag}")
        imask = 0
        for s in used_spokes:
            imask |= 1 << plane.meet_idx(a, s)
        for s in klines:
            imask |= 1 << plane.meet_idx(a, s)
        bad_b = (k1mask & ~(1 << kpoints[j])) | c1mask | imask
        forb = bad_b.bit_count() + k2
        if not (cap_spoke_b <= 2 * q):
            raise CertificateError(f"point-pair spoke budget violated at {tag}")
        records.append(AvoidanceRecord("spoke_second", tag, forb, cap_spoke_b + 2 * k2, 2 * (q + 1)))
        b = None
        for cand in plane.lines_through[kpoints[j]]:
            if k2mask >> cand & 1:
                continue
            if plane.line_masks[cand] & bad_b:
                continue
            b = cand
            break
        if b is None:
            raise CertificateError(f"no spoke candidate at {tag}")
        c = plane.meet_idx(a, b)
        junctions[tag] = c
        spokes_first[tag], spokes_second[tag] = a, b
        used_spokes += [a, b]
        c1mask |= 1 << c

    spoke_mask = _mask(used_spokes)
    # junction sanity: no junction on a target line, all distinct from targets
    if c1mask & k1mask:
        raise CertificateError("junction collides with a point target")
    for c in _bits(c1mask):
        if plane.point_masks[c] & k2mask:
            raise CertificateError("junction lies on a target line")

    # --- relay lines: k2 per point target, reserved for cross-side toggles ---
    relays: dict[str, int] = {}
    relay_mask = 0
    for i in range(k1):
        bad = (k1mask & ~(1 << kpoints[i])) | c1mask
        for j in range(k2):
            tag = f"{i},{j}"
            forb = bad.bit_count() + k2 + len(used_spokes) + relay_mask.bit_count()
            if not (cap_relay <= 2 * q):
                raise CertificateError(f"relay budget violated at {tag}")
            records.append(AvoidanceRecord("relay", tag, forb, cap_relay + 2 * (k2 + len(used_spokes) + k1 * k2), 2 * (q + 1)))
            r = None
            for cand in plane.lines_through[kpoints[i]]:
                if (k2mask | spoke_mask | relay_mask) >> cand & 1:
                    continue
                if plane.line_masks[cand] & bad:
                    continue
                r = cand
                break
            if r is None:
                raise CertificateError(f"no relay candidate at {tag}")
            relays[tag] = r
            relay_mask |= 1 << r

    # --- anchors and ties over the extended pair schedule --------------------
    anchors_first: dict[str, int] = {}
    anchors_second: dict[str, int] = {}
    ties: dict[str, int] = {}
    anchor_mask = 0
    tie_mask = 0
    ext_pairs = [(i, j) for i in range(1, k1 + k2) for j in range(min(i, k2))]
    for i, j in ext_pairs:
        tag = f"{i},{j}"
        r_line = klines[i] if i < k2 else relays[f"{i - k2},{j}"]
        cert_lines = k2mask | spoke_mask | relay_mask | tie_mask
        if not (cap_anchor_a <= 2 * q):
            raise CertificateError(f"anchor budget violated at {tag}")
        other = cert_lines & ~(1 << r_line)
        a_pt = None
        for cand in plane.points_on[r_line]:
            if (k1mask | c1mask) >> cand & 1:
                continue
            if plane.point_masks[cand] & other:
                continue
            a_pt = cand
            break
        records.append(AvoidanceRecord("anchor_first", tag, (k1mask | c1mask).bit_count() + other.bit_count(), cap_anchor_a, 2 * q))
        if a_pt is None:
            raise CertificateError(f"no anchor candidate on line {r_line} at {tag}")
        if anchor_mask >> a_pt & 1:
            raise CertificateError("anchor reuse")
        cross = 0
        for x in _bits(anchor_mask):
            cross |= 1 << plane.line_through_idx(a_pt, x)
        for x in _bits(k1mask | c1mask):
            cross |= 1 << plane.line_through_idx(a_pt, x)
        lam = klines[j]
        if not (cap_anchor_b <= 2 * q):
            raise CertificateError(f"anchor budget violated at {tag}")
        other_b = (cert_lines | cross) & ~(1 << lam)
        b_pt = None
        for cand in plane.points_on[lam]:
            if (k1mask | c1mask) >> cand & 1:
                continue
            if plane.point_masks[cand] & other_b:
                continue
            b_pt = cand
            break
        records.append(AvoidanceRecord("anchor_second", tag, (k1mask | c1mask).bit_count() + other_b.bit_count(), cap_anchor_b, 2 * q))
        if b_pt is None:
            raise CertificateError(f"no anchor candidate on line {lam} at {tag}")
        t_line = plane.line_through_idx(a_pt, b_pt)
        if (cert_lines >> t_line) & 1:
            raise CertificateError("tie collides with certificate lines")
        anchors_first[tag], anchors_second[tag], ties[tag] = a_pt, b_pt, t_line
        anchor_mask |= (1 << a_pt) | (1 << b_pt)
        tie_mask |= 1 << t_line

    # --- post-conditions with the full sets ----------------------------------
    cert_lines = k2mask | spoke_mask | relay_mask | tie_mask
    if anchor_mask & (k1mask | c1mask):
        raise CertificateError("anchor collides with point targets or junctions")
    for i, j in ext_pairs:
        tag = f"{i},{j}"
        r_line = klines[i] if i < k2 else relays[f"{i - k2},{j}"]
        a_pt, b_pt, t_line = anchors_first[tag], anchors_second[tag], ties[tag]
        if plane.point_masks[a_pt] & cert_lines != (1 << r_line) | (1 << t_line):
            raise CertificateError(f"first anchor on stray certificate lines at {tag}")
        if plane.point_masks[b_pt] & cert_lines != (1 << klines[j]) | (1 << t_line):
            raise CertificateError(f"second anchor on stray certificate lines at {tag}")
        if plane.line_masks[t_line] & (k1mask | c1mask):
            raise CertificateError(f"tie passes through point targets or junctions at {tag}")
    for tag, r in relays.items():
        i = int(tag.split(",")[0])
        if plane.line_masks[r] & (k1mask | c1mask) != 1 << kpoints[i]:
            raise CertificateError(f"relay sees extra certificate points at {tag}")

    # --- steps ---------------------------------------------------------------
    lab_line = lambda idx: n + idx  # noqa: E731
    named = set(verts)
    named |= {c for c in _bits(c1mask)}
    named |= {lab_line(s) for s in used_spokes}
    named |= {lab_line(r) for r in relays.values()}
    named |= {lab_line(t) for t in ties.values()}
    named |= {a for a in _bits(anchor_mask)}
    steps: list[TransformStep] = [dele(v) for v in host.labels if v not in named]
    tedges = target.edge_set()
    for i, j in point_pairs:
        tag = f"{i},{j}"
        if (kpoints[i], kpoints[j]) in tedges:
            steps += [lc(lab_line(spokes_first[tag])), lc(lab_line(spokes_second[tag])), lc(junctions[tag])]
    for i, j in ext_pairs:
        tag = f"{i},{j}"
        lam_label = lab_line(klines[j])
        if i < k2:
            pair = tuple(sorted((lam_label, lab_line(klines[i]))))
            if pair in tedges:
                steps += [lc(anchors_first[tag]), lc(anchors_second[tag]), lc(lab_line(ties[tag]))]
        else:
            pt = kpoints[i - k2]
            pair = tuple(sorted((pt, lam_label)))
            have = host.has_edge(pt, lam_label)
            want = pair in tedges
            if have != want:
                steps += [
                    lc(anchors_first[tag]),
                    lc(anchors_second[tag]),
                    lc(lab_line(ties[tag])),
                    lc(lab_line(relays[f"{i - k2},{j}"])),
                ]
    steps += [dele(v) for v in sorted(named - set(verts))]
    sets = {
        "point_targets": kpoints,
        "line_targets": tuple(lab_line(x) for x in klines),
        "junctions": {t: c for t, c in junctions.items()},
        "spokes_first": {t: lab_line(s) for t, s in spokes_first.items()},
        "spokes_second": {t: lab_line(s) for t, s in spokes_second.items()},
        "relays": {t: lab_line(r) for t, r in relays.items()},
        "anchors_first": dict(anchors_first),
        "anchors_second": dict(anchors_second),
        "ties": {t: lab_line(x) for t, x in ties.items()},
    }
    return SynthesisCertificate(
        kind="full",
        q=q,
        k_vertices=verts,
        target=target,
        sets=sets,
        steps=tuple(steps),
        avoidance=tuple(records),
    )


def synth_vmu_reduced(q: int, target: TargetGraph) -> SynthesisCertificate:
    """Any graph on any k vertices of the orthogonality reduction of PG(2, q)."""
    plane = build_plane(q)
    n = plane.n_points
    host = build_reduced_graph(q)
    verts = target.vertices
    k = len(verts)
    if k < 1:
        raise ValueError("empty target")
    if any(not 0 <= v < n for v in verts):
        raise ValueError("target vertices outside the host")
    if 5 * k * k - k - 10 > 2 * q:
        raise ValueError(f"reduced synthesis needs 5k^2-k-10 <= 2q; got k={k}, q={q}")
    kmask = _mask(verts)
    cmask = 0
    amask = 0  # anchor points (the polars of chosen spokes)
    junctions: dict[str, int] = {}
    anchors_first: dict[str, int] = {}
    anchors_second: dict[str, int] = {}
    records: list[AvoidanceRecord] = []
    prs = _pairs_lex(k)
    cap_a = 2 * (2 * k * k - 5)
    cap_b = 5 * k * k - k - 10
    for i, j in prs:
        tag = f"{i},{j}"
        # first spoke: a line through u_i avoiding target/junction polars as a line,
        # and avoiding target, junction, and anchor points
        bad_pts = (kmask & ~(1 << verts[i])) | cmask | amask
        bad_lines = kmask | cmask  # polar lines of targets and junctions (duality keeps indices)
        forb = bad_pts.bit_count() + bad_lines.bit_count()
        if not (2 * forb <= 2 * cap_a // 2 + 2 * forb and cap_a <= 2 * q):  # cap vs 2q
            raise CertificateError(f"reduced spoke budget violated at {tag}")
        records.append(AvoidanceRecord("spoke_first", tag, forb, cap_a, 2 * q))
        alpha = None
        for cand in plane.lines_through[verts[i]]:
            if bad_lines >> cand & 1:
                continue
            if plane.line_masks[cand] & bad_pts:
                continue
            alpha = cand
            break
        if alpha is None:
            raise CertificateError(f"no spoke candidate at {tag}")
        # crossings of the first spoke with the polar lines of K and of C
        cross = 0
        for x in verts:
            if x != alpha:
                cross |= 1 << plane.meet_idx(alpha, x)
        for x in _bits(cmask):
            if x != alpha:
                cross |= 1 << plane.meet_idx(alpha, x)
        bad_pts_b = (kmask & ~(1 << verts[j])) | cmask | amask | cross | (1 << alpha)
        forb = bad_pts_b.bit_count() + cmask.bit_count()
        if not (cap_b <= 2 * q):
            raise CertificateError(f"reduced spoke budget violated at {tag}")
        records.append(AvoidanceRecord("spoke_second", tag, forb, cap_b, 2 * q))
        beta = None
        for cand in plane.lines_through[verts[j]]:
            if cmask >> cand & 1:
                continue
            if plane.line_masks[cand] & bad_pts_b:
                continue
            beta = cand
            break
        if beta is None:
            raise CertificateError(f"no spoke candidate at {tag}")
        c = plane.meet_idx(alpha, beta)
        junctions[tag] = c
        anchors_first[tag], anchors_second[tag] = alpha, beta  # polar points share the index
        cmask |= 1 << c
        amask |= (1 << alpha) | (1 << beta)

    # post-conditions with the full sets, on the reduced host adjacency
    if cmask & (kmask | amask) or amask & kmask:
        raise CertificateError("junction/anchor/target sets overlap")
    for i, j in prs:
        tag = f"{i},{j}"
        c = junctions[tag]
        pa, pb = anchors_first[tag], anchors_second[tag]
        crow = host.adj[c]
        if crow & (cmask & ~(1 << c)):
            raise CertificateError(f"junction adjacent to another junction at {tag}")
        if crow & kmask:
            raise CertificateError(f"junction adjacent to a target at {tag}")
        for p, u in ((pa, verts[i]), (pb, verts[j])):
            if host.adj[p] & (amask & ~(1 << p)):
                raise CertificateError(f"anchors adjacent at {tag}")
            if host.adj[p] & (kmask | cmask) != (1 << u) | (1 << c):
                raise CertificateError(f"anchor neighborhood wrong at {tag}")

    tedges = target.edge_set()
    steps: list[TransformStep] = []
    for i, j in prs:
        tag = f"{i},{j}"
        have = host.has_edge(verts[i], verts[j])
        want = (verts[i], verts[j]) in tedges
        if have != want:
            steps += [lc(anchors_first[tag]), lc(anchors_second[tag]), lc(junctions[tag])]
    keep = set(verts)
    steps += [dele(v) for v in host.labels if v not in keep]
    sets = {
        "junctions": dict(junctions),
        "anchors_first": dict(anchors_first),
        "anchors_second": dict(anchors_second),
    }
    return SynthesisCertificate(
        kind="reduced",
        q=q,
        k_vertices=verts,
        target=target,
        sets=sets,
        steps=tuple(steps),
        avoidance=tuple(records),
    )


def synth_auto(g: Graph, target: TargetGraph) -> SynthesisCertificate | SynthFailure:
    """Dispatch on the host's construction tag."""
    if g.origin is None:
        raise ValueError("host carries no construction tag; pick a synthesizer explicitly")
    kind = g.origin[0]
    if kind == "projective":
        q = g.origin[1]
        n = q * q + q + 1
        if all(v < n for v in target.vertices) or all(v >= n for v in target.vertices):
            return synth_vmu_oneside(q, target)
        return synth_vmu_full(q, target)
    if kind == "reduced":
        return synth_vmu_reduced(g.origin[1], target)
    if g.left_mask is not None:
        return synth_bipartite_rank(g, target)
    raise ValueError(f"no synthesizer for host tag {g.origin!r}")


# ---------------------------------------------------------------------------
# Replay, support, serialization
# ---------------------------------------------------------------------------


def replay_certificate(host: Graph, cert: SynthesisCertificate) -> Graph:
    """Apply the certificate's steps to the host."""
    return apply_sequence(host, cert.steps)


def certificate_matches(host: Graph, cert: SynthesisCertificate) -> bool:
    """Replay and compare with the certified target, labels and edges exactly."""
    got = replay_certificate(host, cert)
    want = cert.target.as_graph()
    return tuple(sorted(got.labels)) == want.labels and set(got.edges()) == set(want.edges())


def certificate_support(cert: SynthesisCertificate) -> tuple[int, ...]:
    """K plus every named gadget vertex."""
    support = set(cert.k_vertices)
    for name, val in cert.sets.items():
        if isinstance(val, dict):
            support.update(val.values())
        elif name in ("basis", "selected", "point_targets", "line_targets"):
            support.update(val)
        elif name == "moved":
            support.update(b for _, b in val)
    return tuple(sorted(support))


def restrict_for_protocol(host: Graph, cert: SynthesisCertificate) -> tuple[Graph, tuple[TransformStep, ...]]:
    """Shrink a certificate to its support: small host, same moves, junk deletions dropped."""
    support = set(certificate_support(cert))
    small = induced_subgraph(host, sorted(support))
    steps = tuple(s for s in cert.steps if s.kind != "DEL" or s.a in support)
    return small, steps


def steps_to_text(steps) -> str:
    return "".join(f"{s}\n" for s in steps)


def parse_steps_text(text: str) -> tuple[TransformStep, ...]:
    out = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        out.append(TransformStep.parse(line))
    return tuple(out)


def certificate_to_json(cert: SynthesisCertificate) -> str:
    doc = {
        "kind": cert.kind,
        "q": cert.q,
        "k_vertices": list(cert.k_vertices),
        "target_edges": [list(e) for e in cert.target.edges],
        "sets": {
            name: (dict(val) if isinstance(val, dict) else list(val))
            for name, val in cert.sets.items()
        },
        "steps": [str(s) for s in cert.steps],
        "avoidance": [
            {"stage": r.stage, "pair": r.pair, "forbidden": r.forbidden, "cap": r.cap, "budget": r.budget}
            for r in cert.avoidance
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# --- target file format -----------------------------------------------------
#   line 1: "k m"
#   line 2: k vertex labels, space separated (the target's vertex set)
#   next m lines: "u v" edges over those labels


def write_target_text(target: TargetGraph) -> str:
    lines = [f"{len(target.vertices)} {len(target.edges)}"]
    lines.append(" ".join(str(v) for v in target.vertices))
    lines.extend(f"{a} {b}" for a, b in target.edges)
    return "\n".join(lines) + "\n"


def parse_target_text(text: str) -> TargetGraph:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if len(lines) < 2:
        raise ValueError("target document needs a count line and a vertex line")
    km = lines[0].split()
    if len(km) != 2:
        raise ValueError(f"bad target header {lines[0]!r}")
    k, m = int(km[0]), int(km[1])
    verts = [int(x) for x in lines[1].split()]
    if len(verts) != k:
        raise ValueError(f"expected {k} vertices, found {len(verts)}")
    if len(lines) != 2 + m:
        raise ValueError(f"expected {m} edge lines, found {len(lines) - 2}")
    edges = []
    for ln in lines[2:]:
        a, b = ln.split()
        edges.append((int(a), int(b)))
    return TargetGraph.make(verts, edges)
