"""L-infinity geometry of a triangulation: slopes, flips, the Delaunay
certificate and the greedy reduction.

All length comparisons are made at the surface's current flow parameter lam:
comparing max(e^t|w|, e^{-t}|h|) values is, after multiplying through by e^t,
the comparison of max(lam |w|, |h|), which stays rational in exact mode.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DegeneracyError, NotFlippableError, VeertrackError
from .surface import EPS_AXIS, Surface

FLOAT_TIE = 1e-9


def linf_length(p) -> object:
    """max(|w|, |h|) of a period or plain (w, h) pair."""
    return max(abs(p[0]), abs(p[1]))


def linf_scaled(s: Surface, vec) -> float:
    """Flowed L-infinity length of a period vector of s, as a float."""
    sig = s.sigma
    return max(abs(float(vec[0])) * sig, abs(float(vec[1])) / sig)


def _linf_key(s: Surface, vec):
    """Comparison key: the flowed length multiplied through by e^t."""
    return max(s.lam * abs(vec[0]), abs(vec[1]))


def cmp_linf(s: Surface, u, v) -> int:
    """-1/0/+1 comparison of flowed L-infinity lengths; 0 means a tie."""
    a, b = _linf_key(s, u), _linf_key(s, v)
    if s.mode == "exact":
        return (a > b) - (a < b)
    if abs(a - b) <= FLOAT_TIE * max(1.0, abs(a), abs(b)):
        return 0
    return 1 if a > b else -1


def slope_sign(p) -> int:
    """Sign of w*h; raises on axis-parallel periods."""
    w, h = float(p[0]), float(p[1])
    if abs(w) <= EPS_AXIS or abs(h) <= EPS_AXIS:
        raise DegeneracyError(f"axis-parallel period ({p[0]}, {p[1]})")
    return 1 if (p[0] > 0) == (p[1] > 0) else -1


def is_veering(s: Surface) -> bool:
    """No triangle carries three edges of one slope sign."""
    for t in range(len(s.triangles)):
        signs = {slope_sign(s.periods[e]) for e, _ in s.triangles[t]}
        if len(signs) < 2:
            return False
    return True


@dataclass(frozen=True)
class Quad:
    """The quadrilateral around an interior edge, developed into one chart.

    Sides run a, b, c, d counterclockwise; the present diagonal joins the
    start of a to the end of b, the other diagonal is b + c.  Each side is an
    (edge, sign) occurrence whose sign is already adjusted for the developing
    map (a half-translation gluing negates the far triangle's chart).
    """

    edge: str
    t1: int
    t2: int
    sides: tuple[tuple[str, int], ...]  # a, b, c, d
    vectors: tuple  # signed period vectors of a, b, c, d


@dataclass(frozen=True)
class FlipRecord:
    old_edge: str
    old_period: tuple
    new_period: tuple
    quad: tuple[tuple[str, int], ...]


def build_quad(s: Surface, e: str) -> Quad:
    occs = s.occurrences()[e]
    if len(occs) != 2:
        raise VeertrackError(f"edge {e} is not interior to two triangles")
    (t1, i1, s1), (t2, i2, s2) = occs
    eps = -(s1 * s2)
    a = s.triangles[t1][(i1 + 1) % 3]
    b = s.triangles[t1][(i1 + 2) % 3]
    c0 = s.triangles[t2][(i2 + 1) % 3]
    d0 = s.triangles[t2][(i2 + 2) % 3]
    c = (c0[0], eps * c0[1])
    d = (d0[0], eps * d0[1])
    vecs = tuple((sg * s.periods[eid].w, sg * s.periods[eid].h) for eid, sg in (a, b, c, d))
    return Quad(e, t1, t2, (a, b, c, d), vecs)


def _cross(u, v):
    return u[0] * v[1] - u[1] * v[0]


def other_diagonal(s: Surface, e: str):
    """(diagonal period vector, flippable flag) for the quadrilateral of e."""
    q = build_quad(s, e)
    va, vb, vc, vd = q.vectors
    diag = (vb[0] + vc[0], vb[1] + vc[1])
    c1, c2 = _cross(vb, vc), _cross(vd, va)
    # zero cross product: one of the would-be triangles is flat, which
    # happens structurally when the two triangles share a second edge
    # (a flat cylinder); the diagonal exchange is illegal there
    tol = 0.0 if s.mode == "exact" else 1e-12
    flippable = c1 > tol and c2 > tol
    if flippable and (abs(float(diag[0])) <= EPS_AXIS or abs(float(diag[1])) <= EPS_AXIS):
        raise DegeneracyError(f"edge {e}: new diagonal is axis-parallel")
    return diag, flippable


def delaunay_violations(s: Surface) -> list[str]:
    """Edges whose flippable quadrilateral has a strictly shorter other
    diagonal.  An exact tie is a hard error: the Delaunay triangulation is
    not unique there."""
    out = []
    for e in s.edges:
        diag, flippable = other_diagonal(s, e)
        if not flippable:
            continue
        c = cmp_linf(s, diag, (s.periods[e].w, s.periods[e].h))
        if c == 0:
            raise DegeneracyError(f"edge {e}: certificate tie (equal L-infinity lengths)")
        if c < 0:
            out.append(e)
    return out


def is_delaunay(s: Surface) -> bool:
    return not delaunay_violations(s)


def flip(s: Surface, e: str) -> tuple[Surface, FlipRecord]:
    """Replace e by the other diagonal of its quadrilateral; e keeps its label."""
    q = build_quad(s, e)
    va, vb, vc, vd = q.vectors
    if not (_cross(vb, vc) > 0 and _cross(vd, va) > 0):
        raise NotFlippableError(f"edge {e}: quadrilateral is not convex")
    a, b, c, d = q.sides
    new_p = (vb[0] + vc[0], vb[1] + vc[1])
    if abs(float(new_p[0])) <= EPS_AXIS or abs(float(new_p[1])) <= EPS_AXIS:
        raise DegeneracyError(f"edge {e}: new diagonal is axis-parallel")
    triangles = list(s.triangles)
    tri1 = (b, c, (e, -1))
    tri2 = (d, a, (e, 1))
    triangles[q.t1] = tri1
    triangles[q.t2] = tri2
    periods = dict(s.periods)
    old = periods[e]
    periods[e] = new_p
    rec = FlipRecord(e, (old.w, old.h), new_p, q.sides)
    return s.replace(triangles=triangles, periods=periods), rec


def greedy_delaunay(s: Surface, max_flips: int = 10000) -> tuple[Surface, list[FlipRecord]]:
    """Flip violating edges, longest first (label order breaks ties), until
    the certificate passes."""
    records: list[FlipRecord] = []
    cur = s
    for _ in range(max_flips):
        bad = delaunay_violations(cur)
        if not bad:
            return cur, records
        bad.sort(key=lambda e: (-linf_scaled(cur, cur.periods[e]), e))
        cur, rec = flip(cur, bad[0])
        records.append(rec)
    raise VeertrackError(f"greedy did not terminate within {max_flips} flips")


def total_linf(s: Surface) -> float:
    """Sum of flowed L-infinity edge lengths (the greedy's potential)."""
    return sum(linf_scaled(s, s.periods[e]) for e in s.edges)
