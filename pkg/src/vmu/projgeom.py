"""Finite fields GF(q) and the projective plane PG(2, q).

Points and lines are nonzero coordinate triples over GF(q) normalized so the
first nonzero coordinate is 1; lines are stored by their normal vector, so
incidence is vanishing of the dot product.  The plane exposes two derived
graphs: the bipartite point-line incidence graph, and the reduced graph whose
vertices are the points with edges between distinct orthogonal points.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import lru_cache

from .graphcore import Graph

__all__ = [
    "Gfq",
    "make_field",
    "ProjPoint",
    "ProjLine",
    "ProjectivePlane",
    "build_plane",
    "build_incidence_graph",
    "build_reduced_graph",
    "points_csv",
]

# Irreducible monic polynomials over GF(p), coefficients low degree first,
# defining the supported extension fields.
_EXTENSION_MODULI: dict[int, tuple[int, tuple[int, ...]]] = {
    4: (2, (1, 1, 1)),            # x^2 + x + 1
    8: (2, (1, 1, 0, 1)),         # x^3 + x + 1
    9: (3, (1, 0, 1)),            # x^2 + 1
    16: (2, (1, 1, 0, 0, 1)),     # x^4 + x + 1
    25: (5, (2, 0, 1)),           # x^2 + 2
    27: (3, (1, 2, 0, 1)),        # x^3 + 2x + 1
    32: (2, (1, 0, 1, 0, 0, 1)),  # x^5 + x^2 + 1
    49: (7, (1, 0, 1)),           # x^2 + 1
    64: (2, (1, 1, 0, 0, 0, 0, 1)),  # x^6 + x + 1
}

_PRIME_CAP = 1 << 16


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


class Gfq:
    """Arithmetic in GF(q); elements are ints in [0, q).

    For extension fields the base-p digits of an element are the polynomial
    coefficients (low degree first); multiplication tables are precomputed.
    Prime fields use modular arithmetic directly.
    """

    __slots__ = ("q", "p", "e", "modulus", "_mul", "_inv")

    def __init__(self, q: int, p: int, e: int, modulus: tuple[int, ...] | None):
        self.q = q
        self.p = p
        self.e = e
        self.modulus = modulus
        self._mul: list[int] | None = None
        self._inv: list[int] | None = None
        if e > 1:
            self._build_tables()

    def _poly_mul(self, a: int, b: int) -> int:
        p, e = self.p, self.e
        da = self._digits(a)
        db = self._digits(b)
        prod = [0] * (2 * e - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    prod[i + j] = (prod[i + j] + x * y) % p
        # reduce modulo the defining polynomial (monic, degree e)
        mod = self.modulus
        for top in range(2 * e - 2, e - 1, -1):
            coef = prod[top]
            if coef:
                prod[top] = 0
                for j in range(e):
                    prod[top - e + j] = (prod[top - e + j] - coef * mod[j]) % p
        return self._undigits(prod[:e])

    def _digits(self, a: int) -> list[int]:
        p = self.p
        out = []
        for _ in range(self.e):
            out.append(a % p)
            a //= p
        return out

    def _undigits(self, ds: list[int]) -> int:
        out = 0
        for d in reversed(ds):
            out = out * self.p + d
        return out

    def _build_tables(self) -> None:
        q = self.q
        mul = [0] * (q * q)
        for a in range(q):
            for b in range(a, q):
                v = self._poly_mul(a, b)
                mul[a * q + b] = v
                mul[b * q + a] = v
        inv = [0] * q
        for a in range(1, q):
            for b in range(1, q):
                if mul[a * q + b] == 1:
                    inv[a] = b
                    break
            else:
                raise ValueError(f"modulus for q={q} is not irreducible: {a} has no inverse")
        self._mul = mul
        self._inv = inv

    def add(self, a: int, b: int) -> int:
        if self.e == 1:
            return (a + b) % self.p
        p = self.p
        out, shift = 0, 1
        for _ in range(self.e):
            out += ((a + b) % p) * shift
            a //= p
            b //= p
            shift *= p
        return out

    def neg(self, a: int) -> int:
        if self.e == 1:
            return (-a) % self.p
        p = self.p
        out, shift = 0, 1
        for _ in range(self.e):
            out += ((-a) % p) * shift
            a //= p
            shift *= p
        return out

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.e == 1:
            return a * b % self.p
        return self._mul[a * self.q + b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        if self.e == 1:
            return pow(a, self.p - 2, self.p)
        return self._inv[a]

    def __repr__(self) -> str:
        return f"Gfq({self.q})"


@lru_cache(maxsize=None)
def make_field(q: int) -> Gfq:
    """Field with q elements; q prime (< 2^16) or one of the supported prime powers."""
    if q in _EXTENSION_MODULI:
        p, mod = _EXTENSION_MODULI[q]
        e = len(mod) - 1
        return Gfq(q, p, e, mod)
    if q >= _PRIME_CAP:
        raise ValueError(f"prime order {q} exceeds supported cap {_PRIME_CAP}")
    if _is_prime(q):
        return Gfq(q, q, 1, None)
    raise ValueError(f"unsupported field order {q}")


@dataclass(frozen=True)
class ProjPoint:
    """Projective point, coordinates normalized so the first nonzero entry is 1."""

    coords: tuple[int, int, int]


@dataclass(frozen=True)
class ProjLine:
    """Projective line, stored by its normal vector, normalized the same way."""

    coords: tuple[int, int, int]


def _normalize(field: Gfq, vec: tuple[int, int, int]) -> tuple[int, int, int]:
    for c in vec:
        if c != 0:
            s = field.inv(c)
            return tuple(field.mul(s, x) for x in vec)
    raise ValueError("zero vector has no projective class")


def _cross(field: Gfq, u: tuple[int, int, int], v: tuple[int, int, int]) -> tuple[int, int, int]:
    m, s = field.mul, field.sub
    return (
        s(m(u[1], v[2]), m(u[2], v[1])),
        s(m(u[2], v[0]), m(u[0], v[2])),
        s(m(u[0], v[1]), m(u[1], v[0])),
    )


def _dot(field: Gfq, u: tuple[int, int, int], v: tuple[int, int, int]) -> int:
    m, a = field.mul, field.add
    return a(a(m(u[0], v[0]), m(u[1], v[1])), m(u[2], v[2]))


def _enumerate_classes(q: int) -> list[tuple[int, int, int]]:
    # All normalized representatives in lexicographic coordinate order.
    out = [(0, 0, 1)]
    out.extend((0, 1, z) for z in range(q))
    out.extend((1, y, z) for y in range(q) for z in range(q))
    out.sort()
    return out


class ProjectivePlane:
    """PG(2, q): canonical point/line enumerations plus incidence structure."""

    def __init__(self, q: int):
        field = make_field(q)
        self.q = q
        self.field = field
        classes = _enumerate_classes(q)
        self.points: tuple[ProjPoint, ...] = tuple(ProjPoint(c) for c in classes)
        self.lines: tuple[ProjLine, ...] = tuple(ProjLine(c) for c in classes)
        self.n_points = len(self.points)
        self._point_index = {p.coords: i for i, p in enumerate(self.points)}
        # line_masks[j]: bitmask of point indices incident to line j
        # point_masks[i]: bitmask of line indices through point i
        npts = self.n_points
        line_masks = [0] * npts
        point_masks = [0] * npts
        for j, line in enumerate(self.lines):
            mask = 0
            for i, pt in enumerate(self.points):
                if _dot(field, pt.coords, line.coords) == 0:
                    mask |= 1 << i
                    point_masks[i] |= 1 << j
            line_masks[j] = mask
        self.line_masks = tuple(line_masks)
        self.point_masks = tuple(point_masks)
        self.lines_through = tuple(
            tuple(j for j in range(npts) if point_masks[i] >> j & 1) for i in range(npts)
        )
        self.points_on = tuple(
            tuple(i for i in range(npts) if line_masks[j] >> i & 1) for j in range(npts)
        )

    def point_index(self, p: ProjPoint) -> int:
        return self._point_index[p.coords]

    def line_index(self, l: ProjLine) -> int:
        return self._point_index[l.coords]

    def incident(self, p: ProjPoint, l: ProjLine) -> bool:
        return _dot(self.field, p.coords, l.coords) == 0

    def line_through(self, p1: ProjPoint, p2: ProjPoint) -> ProjLine:
        if p1 == p2:
            raise ValueError("two distinct points are required to span a line")
        return ProjLine(_normalize(self.field, _cross(self.field, p1.coords, p2.coords)))

    def meet(self, l1: ProjLine, l2: ProjLine) -> ProjPoint:
        if l1 == l2:
            raise ValueError("two distinct lines are required to meet in one point")
        return ProjPoint(_normalize(self.field, _cross(self.field, l1.coords, l2.coords)))

    def line_through_idx(self, i1: int, i2: int) -> int:
        return self._point_index[self.line_through(self.points[i1], self.points[i2]).coords]

    def meet_idx(self, j1: int, j2: int) -> int:
        return self._point_index[self.meet(self.lines[j1], self.lines[j2]).coords]

    def phi(self, p: ProjPoint) -> ProjLine:
        """Self-duality: the line whose normal vector is the point itself."""
        return ProjLine(p.coords)

    def phi_inv(self, l: ProjLine) -> ProjPoint:
        return ProjPoint(l.coords)


@lru_cache(maxsize=None)
def build_plane(q: int) -> ProjectivePlane:
    return ProjectivePlane(q)


@lru_cache(maxsize=None)
def build_incidence_graph(q: int) -> Graph:
    """Bipartite incidence graph: points labeled 0..N-1 (left), lines N..2N-1 (right)."""
    plane = build_plane(q)
    npts = plane.n_points
    rows = [0] * (2 * npts)
    for j, mask in enumerate(plane.line_masks):
        rows[npts + j] = mask
        for i in range(npts):
            if mask >> i & 1:
                rows[i] |= 1 << (npts + j)
    return Graph(
        labels=tuple(range(2 * npts)),
        adj=tuple(rows),
        left_mask=(1 << npts) - 1,
        origin=("projective", q),
    )


@lru_cache(maxsize=None)
def build_reduced_graph(q: int) -> Graph:
    """Reduced orthogonality graph: points 0..N-1, edge iff distinct and orthogonal."""
    plane = build_plane(q)
    npts = plane.n_points
    rows = [0] * npts
    for i in range(npts):
        for j in range(i + 1, npts):
            if _dot(plane.field, plane.points[i].coords, plane.points[j].coords) == 0:
                rows[i] |= 1 << j
                rows[j] |= 1 << i
    return Graph(
        labels=tuple(range(npts)),
        adj=tuple(rows),
        left_mask=None,
        origin=("reduced", q),
    )


def points_csv(q: int, include_lines: bool = True) -> str:
    """Sidecar table mapping vertex index to coordinates: ``index,x,y,z``."""
    plane = build_plane(q)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "x", "y", "z"])
    for i, p in enumerate(plane.points):
        w.writerow([i, *p.coords])
    if include_lines:
        for j, l in enumerate(plane.lines):
            w.writerow([plane.n_points + j, *l.coords])
    return buf.getvalue()
