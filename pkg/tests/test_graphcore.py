"""Tests for bit-packed graphs, rewriting moves, GF(2) algebra, and edge-list IO."""

import itertools
import random

import pytest

from vmu.graphcore import (
    F2Matrix,
    Graph,
    TransformStep,
    apply_sequence,
    dele,
    delete_vertex,
    f2_rank,
    f2_solve,
    induced_subgraph,
    lc,
    local_complement,
    parse_edge_list,
    piv,
    pivot,
    write_edge_list,
)


# --- reference implementations kept deliberately naive --------------------


def ref_local_complement(edges: set, vertices: list, v: int) -> set:
    nb = {b for a, b in edges if a == v} | {a for a, b in edges if b == v}
    out = set(edges)
    for a, b in itertools.combinations(sorted(nb), 2):
        e = frozenset((a, b))
        if e in out:
            out.discard(e)
        else:
            out.add(e)
    return out


def ref_bipartite_pivot(g: Graph, a: int, b: int) -> Graph:
    # Direct toggle form for bipartite graphs: flip all pairs between
    # N(a)\{b} and N(b)\{a}, then exchange the adjacencies of a and b.
    na = set(g.neighbors(a)) - {b}
    nb = set(g.neighbors(b)) - {a}
    edges = {frozenset(e) for e in g.edges()}
    for u in na:
        for w in nb:
            e = frozenset((u, w))
            edges ^= {e}
    # N'(b) = N(a) symdiff {a,b},  N'(a) = N(b) symdiff {a,b}
    new_na = (set(g.neighbors(b)) ^ {a, b}) - {a}
    new_nb = (set(g.neighbors(a)) ^ {a, b}) - {b}
    edges = {e for e in edges if a not in e and b not in e}
    edges |= {frozenset((a, u)) for u in new_na}
    edges |= {frozenset((b, u)) for u in new_nb}
    left = set(g.left_labels()) ^ {a, b}
    return Graph.from_edges(g.labels, [tuple(sorted(e)) for e in edges], left=sorted(left))


def edgeset(g: Graph) -> set:
    return {frozenset(e) for e in g.edges()}


def random_graph(rng: random.Random, n: int) -> Graph:
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.5]
    return Graph.from_edges(list(range(n)), edges)


def random_bipartite(rng: random.Random, l: int, r: int) -> Graph:
    edges = [(i, l + j) for i in range(l) for j in range(r) if rng.random() < 0.5]
    return Graph.from_edges(list(range(l + r)), edges, left=list(range(l)))


PATH3 = Graph.from_edges([1, 2, 3], [(1, 2), (2, 3)])


# --- local complementation -------------------------------------------------


def test_lc_path_center_gives_triangle():
    got = local_complement(PATH3, 2)
    want = ref_local_complement({frozenset((1, 2)), frozenset((2, 3))}, [1, 2, 3], 2)
    assert edgeset(got) == want == {frozenset((1, 2)), frozenset((2, 3)), frozenset((1, 3))}


def test_lc_small_degree_is_identity():
    g = Graph.from_edges([0, 1, 2], [(0, 1)])
    for v in (0, 1, 2):
        assert edgeset(local_complement(g, v)) == edgeset(g)


def test_lc_involution_random():
    rng = random.Random(7)
    for _ in range(100):
        n = rng.randint(1, 16)
        g = random_graph(rng, n)
        v = rng.choice(g.labels)
        assert local_complement(local_complement(g, v), v) == g


def test_lc_matches_reference_random():
    rng = random.Random(11)
    for _ in range(100):
        n = rng.randint(2, 12)
        g = random_graph(rng, n)
        v = rng.choice(g.labels)
        assert edgeset(local_complement(g, v)) == ref_local_complement(edgeset(g), list(g.labels), v)


def test_lc_missing_vertex_errors():
    with pytest.raises(ValueError):
        local_complement(PATH3, 9)


# --- deletion --------------------------------------------------------------


def test_delete_k2_leaves_isolated_vertex():
    g = Graph.from_edges([4, 9], [(4, 9)])
    h = delete_vertex(g, 9)
    assert h.labels == (4,) and h.edges() == []


def test_delete_triangle_keeps_labels():
    g = Graph.from_edges([3, 5, 8], [(3, 5), (5, 8), (3, 8)])
    h = delete_vertex(g, 5)
    assert h.labels == (3, 8) and h.edges() == [(3, 8)]
    with pytest.raises(ValueError):
        h.index_of(5)


def test_delete_then_delete_again_errors():
    h = delete_vertex(PATH3, 2)
    with pytest.raises(ValueError):
        delete_vertex(h, 2)


# --- pivot -----------------------------------------------------------------


def test_pivot_k2_swaps_sides():
    g = Graph.from_edges([0, 1], [(0, 1)], left=[0])
    h = pivot(g, 0, 1)
    assert edgeset(h) == {frozenset((0, 1))}
    assert h.side_of(0) == "R" and h.side_of(1) == "L"


def test_pivot_path_by_hand():
    got = pivot(PATH3, 1, 2)
    assert edgeset(got) == {frozenset((1, 2)), frozenset((1, 3))}


def test_pivot_requires_edge():
    with pytest.raises(ValueError):
        pivot(PATH3, 1, 3)


def test_pivot_matches_direct_toggle_on_bipartite():
    rng = random.Random(13)
    done = 0
    while done < 100:
        g = random_bipartite(rng, rng.randint(1, 5), rng.randint(1, 5))
        if not g.edges():
            continue
        a, b = rng.choice(g.edges())
        got = pivot(g, a, b)
        want = ref_bipartite_pivot(g, a, b)
        assert edgeset(got) == edgeset(want)
        assert set(got.left_labels()) == set(want.left_labels())
        # symmetric in the edge
        assert edgeset(pivot(g, b, a)) == edgeset(got)
        done += 1


def test_pivot_neighborhood_identity():
    # After pivoting edge (a, b):  N'(b) = N(a) symdiff {a, b}.
    rng = random.Random(17)
    done = 0
    while done < 50:
        g = random_bipartite(rng, rng.randint(1, 5), rng.randint(1, 5))
        if not g.edges():
            continue
        a, b = rng.choice(g.edges())
        h = pivot(g, a, b)
        assert set(h.neighbors(b)) == (set(g.neighbors(a)) ^ {a, b}) - {b}
        assert set(h.neighbors(a)) == (set(g.neighbors(b)) ^ {a, b}) - {a}
        done += 1


# --- sequences and induced subgraphs --------------------------------------


def test_apply_sequence_empty_is_identity():
    assert apply_sequence(PATH3, []) == PATH3


def test_apply_sequence_path_to_k2():
    got = apply_sequence(PATH3, [lc(2), dele(2)])
    assert got.labels == (1, 3) and got.edges() == [(1, 3)]


def test_apply_sequence_error_carries_index():
    with pytest.raises(ValueError, match="step 1"):
        apply_sequence(PATH3, [lc(2), dele(7)])
    with pytest.raises(ValueError, match="step 2"):
        apply_sequence(PATH3, [dele(1), lc(2), piv(2, 1)])


def test_apply_sequence_batched_deletes_match_one_by_one():
    rng = random.Random(23)
    for _ in range(50):
        g = random_graph(rng, 10)
        doomed = rng.sample(g.labels, 4)
        batched = apply_sequence(g, [dele(v) for v in doomed])
        cur = g
        for v in doomed:
            cur = delete_vertex(cur, v)
        assert batched == cur


def test_induced_subgraph_cases():
    tri = Graph.from_edges([1, 2, 3], [(1, 2), (2, 3), (1, 3)])
    assert induced_subgraph(tri, [1, 2, 3]) == tri
    k2 = induced_subgraph(tri, [1, 3])
    assert k2.labels == (1, 3) and k2.edges() == [(1, 3)]
    empty = induced_subgraph(tri, [])
    assert empty.n == 0 and empty.edges() == []
    with pytest.raises(ValueError):
        induced_subgraph(tri, [1, 9])


def test_vertex_cap():
    with pytest.raises(ValueError):
        Graph.from_edges(list(range(5000)), [])


# --- transform steps -------------------------------------------------------


def test_step_text_round_trip():
    for s in (lc(3), dele(0), piv(4, 7)):
        assert TransformStep.parse(str(s)) == s
    with pytest.raises(ValueError):
        TransformStep.parse("LC")
    with pytest.raises(ValueError):
        TransformStep("LC", 1, 2)


# --- edge-list format ------------------------------------------------------


def test_edge_list_round_trip_plain():
    rng = random.Random(29)
    for _ in range(20):
        g = random_graph(rng, rng.randint(0, 10))
        assert parse_edge_list(write_edge_list(g)) == g


def test_edge_list_round_trip_bipartite():
    rng = random.Random(31)
    for _ in range(20):
        g = random_bipartite(rng, rng.randint(1, 5), rng.randint(1, 5))
        back = parse_edge_list(write_edge_list(g))
        assert back == g and back.left_mask == g.left_mask


def test_edge_list_exact_bytes():
    g = Graph.from_edges([0, 1, 2], [(1, 2), (0, 2)], left=[0, 1])
    assert write_edge_list(g) == "3 2 bipartite 2\n0 2\n1 2\n"


def test_edge_list_header_comments_and_origin():
    g = Graph.from_edges([0, 1], [(0, 1)], origin=("projective", 3))
    text = write_edge_list(g, header_lines=("tool test",))
    assert text.startswith("# tool test\n# origin: projective 3\n")
    back = parse_edge_list(text)
    assert back.origin == ("projective", 3)
    assert back == g


def test_edge_list_rejects_bad_labels():
    g = Graph.from_edges([1, 2], [(1, 2)])
    with pytest.raises(ValueError):
        write_edge_list(g)


def test_parse_edge_list_errors():
    with pytest.raises(ValueError):
        parse_edge_list("2 1\n")
    with pytest.raises(ValueError):
        parse_edge_list("2 1\n0 5\n")
    with pytest.raises(ValueError):
        parse_edge_list("")


# --- GF(2) linear algebra --------------------------------------------------


def ref_rank(rows, cols) -> int:
    # Naive elimination over a list-of-list matrix.
    mat = [[row >> j & 1 for j in range(cols)] for row in rows]
    rank = 0
    for j in range(cols):
        sel = None
        for i in range(rank, len(mat)):
            if mat[i][j]:
                sel = i
                break
        if sel is None:
            continue
        mat[rank], mat[sel] = mat[sel], mat[rank]
        for i in range(len(mat)):
            if i != rank and mat[i][j]:
                mat[i] = [x ^ y for x, y in zip(mat[i], mat[rank])]
        rank += 1
    return rank


def test_f2_rank_basics():
    ident = F2Matrix((1, 2, 4), 3)
    assert f2_rank(ident) == 3
    assert f2_rank(F2Matrix((5, 5, 5), 3)) == 1
    assert f2_rank(F2Matrix((), 4)) == 0


def test_f2_rank_matches_reference_and_transpose():
    rng = random.Random(37)
    for _ in range(100):
        nr, nc = rng.randint(1, 20), rng.randint(1, 6)
        rows = tuple(rng.getrandbits(nc) for _ in range(nr))
        m = F2Matrix(rows, nc)
        r = f2_rank(m)
        assert r == ref_rank(rows, nc)
        assert r == f2_rank(m.transpose())


def test_f2_rank_invariant_under_row_ops():
    rng = random.Random(41)
    for _ in range(50):
        nr, nc = rng.randint(2, 10), rng.randint(1, 8)
        rows = [rng.getrandbits(nc) for _ in range(nr)]
        r = f2_rank(F2Matrix(tuple(rows), nc))
        perm = rows[:]
        rng.shuffle(perm)
        assert f2_rank(F2Matrix(tuple(perm), nc)) == r
        i, j = rng.sample(range(nr), 2)
        added = rows[:]
        added[i] ^= added[j]
        assert f2_rank(F2Matrix(tuple(added), nc)) == r


def test_f2_solve_identity_and_zero():
    ident = F2Matrix((1, 2, 4), 3)
    for t in range(8):
        assert f2_solve(ident, t) == t
    rng = random.Random(43)
    rows = tuple(rng.getrandbits(5) for _ in range(6))
    assert f2_solve(F2Matrix(rows, 5), 0) == 0


def test_f2_solve_random_consistency():
    rng = random.Random(47)
    for _ in range(100):
        nr, nc = rng.randint(1, 12), rng.randint(1, 8)
        rows = tuple(rng.getrandbits(nc) for _ in range(nr))
        m = F2Matrix(rows, nc)
        pick = rng.getrandbits(nr)
        t = 0
        for i in range(nr):
            if pick >> i & 1:
                t ^= rows[i]
        x = f2_solve(m, t)
        assert x is not None
        back = 0
        for i in range(nr):
            if x >> i & 1:
                back ^= rows[i]
        assert back == t


def test_f2_solve_inconsistent():
    m = F2Matrix((1, 1), 2)  # both rows are e1; t = e2 unreachable
    assert f2_solve(m, 2) is None
