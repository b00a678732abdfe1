"""Dual train tracks of a veering triangulation.

One branch per edge, one trivalent switch per triangle; the large half-edge
at a switch is dual to the widest (vertical track) or tallest (horizontal
track) side of the triangle.  The transverse measure is the widths, the
tangential one the rectangle heights: branches that are large at both their
switches carry 0, every other branch carries half the sum of the heights of
its small partners.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import _exact
from .errors import DegeneracyError, VeertrackError
from .surface import Surface, corner_classes


@dataclass(frozen=True)
class TrainTrack:
    direction: str  # "vertical" | "horizontal"
    triangles: tuple  # same combinatorics as the source surface
    large_slots: tuple[int, ...]  # per triangle, the slot of the large branch

    @property
    def branches(self) -> tuple[str, ...]:
        out = set()
        for tri in self.triangles:
            for e, _ in tri:
                out.add(e)
        return tuple(sorted(out))

    def switches(self) -> list[tuple[str, str, str]]:
        """(large, small1, small2) per triangle, smalls in cyclic order."""
        out = []
        for tri, ls in zip(self.triangles, self.large_slots):
            out.append((tri[ls][0], tri[(ls + 1) % 3][0], tri[(ls + 2) % 3][0]))
        return out

    def branch_roles(self) -> dict[str, str]:
        """'large' / 'mixed' / 'small' according to the two switch roles."""
        large_count: dict[str, int] = {b: 0 for b in self.branches}
        for lg, _, _ in self.switches():
            large_count[lg] += 1
        names = {2: "large", 1: "mixed", 0: "small"}
        return {b: names[c] for b, c in large_count.items()}

    def switch_matrix(self) -> list[list[int]]:
        """Rows: transverse(large) - transverse(small1) - transverse(small2)."""
        idx = {b: i for i, b in enumerate(self.branches)}
        rows = []
        for lg, s1, s2 in self.switches():
            row = [0] * len(idx)
            row[idx[lg]] += 1
            row[idx[s1]] -= 1
            row[idx[s2]] -= 1
            rows.append(row)
        return rows


@dataclass(frozen=True)
class MeasurePair:
    transverse: dict
    tangential: dict


@dataclass(frozen=True)
class RegionCensus:
    """Complementary regions: an n-gon per cone point of angle n*pi."""

    regions: tuple  # (n, marked) per region
    counts: dict  # n -> multiplicity

    @staticmethod
    def from_regions(regions) -> "RegionCensus":
        counts: dict[int, int] = {}
        for n, _ in regions:
            counts[n] = counts.get(n, 0) + 1
        return RegionCensus(tuple(regions), counts)


@dataclass(frozen=True)
class Subgraph:
    branches: frozenset

    def __init__(self, branches):
        object.__setattr__(self, "branches", frozenset(branches))


def _abs_w(p):
    return abs(p.w)


def _abs_h(p):
    return abs(p.h)


def dual_track(s: Surface, direction: str = "vertical") -> tuple[TrainTrack, MeasurePair]:
    """Dual track plus its transverse/tangential measure pair.

    Measures are taken in the base chart (flow parameter factored out), so
    the inner product with the tangential heights equals the area for every
    flow time.
    """
    if direction not in ("vertical", "horizontal"):
        raise ValueError(f"bad direction {direction!r}")
    size = _abs_w if direction == "vertical" else _abs_h
    partner_size = _abs_h if direction == "vertical" else _abs_w

    large_slots = []
    for t, tri in enumerate(s.triangles):
        vals = [size(s.periods[e]) for e, _ in tri]
        mx = max(vals)
        if s.mode == "float":
            near = [i for i, v in enumerate(vals) if abs(float(v) - float(mx)) <= 1e-9 * max(1.0, float(mx))]
        else:
            near = [i for i, v in enumerate(vals) if v == mx]
        if len(near) != 1:
            raise DegeneracyError(f"triangle {t}: no strictly largest side for the {direction} track")
        large_slots.append(near[0])
    track = TrainTrack(direction, s.triangles, tuple(large_slots))

    transverse = {e: size(p) for e, p in s.periods.items()}
    zero = Fraction(0) if s.mode == "exact" else 0.0
    tangential = {e: zero for e in s.periods}
    roles = track.branch_roles()
    for lg, s1, s2 in track.switches():
        # at this switch, each small contributes half its partner's height
        tangential[s1] += partner_size(s.periods[s2]) / 2
        tangential[s2] += partner_size(s.periods[s1]) / 2
    for e, role in roles.items():
        if role == "large":
            tangential[e] = zero
    return track, MeasurePair(transverse, tangential)


# ---------------------------------------------------------------------------
# complementary regions


def _region_data(track: TrainTrack):
    """(corner classes, region polygon sizes, marked flags, corner->region)."""
    classes = corner_classes(track.triangles)
    corner_region: dict[tuple[int, int], int] = {}
    sizes = []
    for ridx, cls in enumerate(classes):
        cusps = 0
        for (t, i) in cls:
            corner_region[(t, i)] = ridx
            if track.large_slots[t] == (i + 1) % 3:
                cusps += 1  # the corner opposite the large side is a cusp
        sizes.append(cusps)
    marked = [n <= 2 for n in sizes]
    return classes, sizes, marked, corner_region


def complementary_regions(track: TrainTrack) -> RegionCensus:
    """Census by ribbon traversal: one n-gon per cone point of angle n*pi."""
    _, sizes, marked, _ = _region_data(track)
    return RegionCensus.from_regions(tuple(zip(sizes, marked)))


def _branch_region_edges(track: TrainTrack, corner_region):
    """branch -> (region id, region id) of the two sides of the branch."""
    occ: dict[str, list[tuple[int, int]]] = {}
    for t, tri in enumerate(track.triangles):
        for i, (e, _) in enumerate(tri):
            occ.setdefault(e, []).append((t, i))
    out = {}
    for e, occs in occ.items():
        (t1, i1), _ = occs
        out[e] = (corner_region[(t1, i1)], corner_region[(t1, (i1 + 1) % 3)])
    return out


def is_filling_subtrack(track: TrainTrack, support: Subgraph) -> bool:
    """The support fills iff every complementary component of the subtrack is
    a disk or once-punctured disk.

    Deleting a branch merges the regions on its two sides across a rectangle;
    a component with k regions and d deleted branches has Euler number k - d,
    so it is a disk iff the component is a tree, and the punctures it holds
    are the marked points of its regions.
    """
    if not support.branches:
        raise VeertrackError("empty support")
    unknown = support.branches - set(track.branches)
    if unknown:
        raise VeertrackError(f"support contains unknown branches {sorted(unknown)}")
    _, _, marked, corner_region = _region_data(track)
    sides = _branch_region_edges(track, corner_region)

    nreg = len(marked)
    parent = list(range(nreg))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    deleted = [e for e in track.branches if e not in support.branches]
    for e in deleted:
        r1, r2 = sides[e]
        parent[find(r1)] = find(r2)
    comp_regions: dict[int, int] = {}
    comp_marked: dict[int, int] = {}
    for r in range(nreg):
        c = find(r)
        comp_regions[c] = comp_regions.get(c, 0) + 1
        comp_marked[c] = comp_marked.get(c, 0) + int(marked[r])
    comp_deleted: dict[int, int] = {c: 0 for c in comp_regions}
    for e in deleted:
        comp_deleted[find(sides[e][0])] += 1
    for c in comp_regions:
        euler = comp_regions[c] - comp_deleted[c]
        if euler != 1 or comp_marked[c] > 1:
            return False
    return True


# ---------------------------------------------------------------------------
# vertex curves


def extreme_rays_nonneg(rows, n: int) -> list[tuple[int, ...]]:
    """Minimal integral extreme rays of {x >= 0, rows . x = 0}.

    Double description over the rationals; fine for desk-scale systems.
    """
    rays: list[list[Fraction]] = [[Fraction(i == j) for j in range(n)] for i in range(n)]
    for a in rows:
        pos, zer, neg = [], [], []
        for r in rays:
            d = sum(ai * ri for ai, ri in zip(a, r))
            (pos if d > 0 else neg if d < 0 else zer).append((r, d))
        new = [r for r, _ in zer]
        for u, du in pos:
            for v, dv in neg:
                comb = [du * vi - dv * ui for ui, vi in zip(u, v)]
                new.append(comb)
        # normalize and drop duplicates / non-minimal supports
        normed = []
        seen = set()
        for r in new:
            ints = _exact.scale_to_integers(r)
            if any(ints) and tuple(ints) not in seen:
                seen.add(tuple(ints))
                normed.append(ints)
        keep = []
        for r in normed:
            sup = {i for i, x in enumerate(r) if x}
            minimal = True
            for r2 in normed:
                if r2 is r:
                    continue
                sup2 = {i for i, x in enumerate(r2) if x}
                if sup2 < sup:
                    minimal = False
                    break
            if minimal:
                keep.append(r)
        rays = [[Fraction(x) for x in r] for r in keep]

    out = []
    for r in rays:
        ints = _exact.scale_to_integers(r)
        # extremality certificate: the rows restricted to the support must
        # have a one-dimensional kernel
        sup = [i for i, x in enumerate(ints) if x]
        sub = [[row[i] for i in sup] for row in rows]
        if len(_exact.kernel_basis(sub, ncols=len(sup))) == 1:
            out.append(tuple(ints))
    out.sort()
    return out


def vertex_curves(track: TrainTrack) -> list[tuple[int, ...]]:
    """Integral extreme rays of the transverse-measure polytope of the track,
    indexed like track.branches."""
    return extreme_rays_nonneg(track.switch_matrix(), len(track.branches))


# ---------------------------------------------------------------------------
# inessential subgraphs and resolution


def _half_edge_condition(track: TrainTrack, H: Subgraph) -> bool:
    for lg, s1, s2 in track.switches():
        if lg in H.branches and not (s1 in H.branches and s2 in H.branches):
            return False
    return True


@dataclass(frozen=True)
class ReducedTrack:
    """Complement of an inessential subgraph after deletion and smoothing.

    Branches are paths of original branches (merged across valence-2
    switches); switches keep their (large, small, small) roles.
    """

    branch_paths: dict  # new id -> tuple of original branch ids
    switches: tuple  # (large id, small id, small id)

    @property
    def branches(self):
        return tuple(sorted(self.branch_paths))

    def switch_matrix(self):
        idx = {b: i for i, b in enumerate(self.branches)}
        rows = []
        for lg, s1, s2 in self.switches:
            row = [0] * len(idx)
            row[idx[lg]] += 1
            row[idx[s1]] -= 1
            row[idx[s2]] -= 1
            rows.append(row)
        return rows


def _reduce_complement(track: TrainTrack, H: Subgraph):
    """Delete H one small branch at a time, smoothing valence-2 switches."""
    switches = {i: list(sw) for i, sw in enumerate(track.switches())}  # id -> [large, s1, s2]
    paths = {b: (b,) for b in track.branches}
    in_h = lambda b: all(x in H.branches for x in paths[b])

    def attachments(b):
        out = []
        for sid, sw in switches.items():
            for pos, bb in enumerate(sw):
                if bb == b:
                    out.append((sid, pos))
        return out

    changed = True
    while changed:
        changed = False
        # delete a branch of H that is nowhere large
        for b in sorted(paths):
            if not in_h(b):
                continue
            att = attachments(b)
            if any(pos == 0 for _, pos in att):
                continue  # still large somewhere; smalls go first
            for sid, pos in att:
                switches[sid][pos] = None
            del paths[b]
            changed = True
            break
        # clean up switches
        for sid in list(switches):
            sw = switches[sid]
            live = [x for x in sw if x is not None]
            if len(live) == 3:
                continue
            if len(live) == 0:
                del switches[sid]
                changed = True
            elif len(live) == 2:
                if sw[0] is None:
                    continue  # two smalls meet in a cusp; they must be deleted first
                other = live[0] if live[0] != sw[0] else live[1]
                big = sw[0]
                if big == other:
                    # a branch closing up on itself through this switch
                    del switches[sid]
                    changed = True
                    continue
                merged = paths[big] + paths[other]
                paths[big] = merged
                del paths[other]
                for s2, sw2 in switches.items():
                    for pos, bb in enumerate(sw2):
                        if bb == other:
                            sw2[pos] = big
                del switches[sid]
                changed = True
            elif len(live) == 1:
                return None  # dead end: complement is not a track

    if any(in_h(b) for b in paths):
        return None  # stuck: some H branch stayed large
    sws = tuple((sw[0], sw[1], sw[2]) for sw in switches.values())
    return ReducedTrack(dict(paths), sws)


def _is_birecurrent(reduced: ReducedTrack) -> bool:
    """Recurrent: vertex curves cover every branch.  Transversely recurrent:
    a positive tangential solution of the switch inequalities exists."""
    branches = reduced.branches
    if not branches:
        return False
    rows = reduced.switch_matrix()
    rays = extreme_rays_nonneg(rows, len(branches))
    covered = set()
    for r in rays:
        covered |= {i for i, x in enumerate(r) if x}
    if covered != set(range(len(branches))):
        return False
    try:
        from scipy.optimize import linprog
    except ImportError:  # pragma: no cover
        return True
    # find r with r >= 1 and r(large) - r(s1) - r(s2) <= 0
    if rows:
        res = linprog(
            c=[0.0] * len(branches),
            A_ub=[[float(x) for x in row] for row in rows],
            b_ub=[0.0] * len(rows),
            bounds=[(1.0, None)] * len(branches),
            method="highs",
        )
        return bool(res.success)
    return True


def detect_inessential(track: TrainTrack, H: Subgraph):
    """(is inessential, reduced complement track or None)."""
    if not H.branches:
        return True, ReducedTrack({b: (b,) for b in track.branches}, tuple(track.switches()))
    if not _half_edge_condition(track, H):
        return False, None
    complement = set(track.branches) - H.branches
    if not complement:
        return False, None
    if not is_filling_subtrack(track, Subgraph(complement)):
        return False, None
    reduced = _reduce_complement(track, H)
    if reduced is None:
        return False, None
    if not _is_birecurrent(reduced):
        return False, None
    return True, reduced


# ---------------------------------------------------------------------------
# combinatorial splits (used by resolution; the flow module drives the
# geometric version through delaunay.flip)


def _occurrences(triangles, e):
    out = []
    for t, tri in enumerate(triangles):
        for i, (ee, s) in enumerate(tri):
            if ee == e:
                out.append((t, i, s))
    return out


def split_with_direction(track: TrainTrack, e: str, direction: str):
    """Split the large branch e leftward or rightward, combinatorially.

    Returns (track', losers, winners).  A left split keeps the sides that
    follow e in each triangle as the losers.
    """
    roles = track.branch_roles()
    if roles.get(e) != "large":
        raise VeertrackError(f"branch {e} is not large at both switches")
    if direction not in ("L", "R"):
        raise ValueError(f"bad direction {direction!r}")
    occs = _occurrences(track.triangles, e)
    (t1, i1, s1), (t2, i2, s2) = occs
    eps = -(s1 * s2)
    a = track.triangles[t1][(i1 + 1) % 3]
    b = track.triangles[t1][(i1 + 2) % 3]
    c0 = track.triangles[t2][(i2 + 1) % 3]
    d0 = track.triangles[t2][(i2 + 2) % 3]
    c = (c0[0], eps * c0[1])
    d = (d0[0], eps * d0[1])
    losers = (a[0], c[0]) if direction == "L" else (b[0], d[0])
    winners = (b[0], d[0]) if direction == "L" else (a[0], c[0])
    triangles = list(track.triangles)
    triangles[t1] = (b, c, (e, -1))
    triangles[t2] = (d, a, (e, 1))
    large = list(track.large_slots)
    if direction == "L":
        large[t1], large[t2] = 0, 0  # winners b and d head their triangles
    else:
        large[t1], large[t2] = 1, 1  # winners c and a sit second
    return TrainTrack(track.direction, tuple(triangles), tuple(large)), losers, winners


def track_split(track: TrainTrack, mu: dict, e: str):
    """Split the branch e in the direction chosen by the transverse measure.

    Returns (track', mu', direction, losers, winners).
    """
    occs = _occurrences(track.triangles, e)
    (t1, i1, s1), (t2, i2, s2) = occs
    a = track.triangles[t1][(i1 + 1) % 3][0]
    b = track.triangles[t1][(i1 + 2) % 3][0]
    c = track.triangles[t2][(i2 + 1) % 3][0]
    d = track.triangles[t2][(i2 + 2) % 3][0]
    left_score = mu[b] + mu[d]
    right_score = mu[a] + mu[c]
    if left_score == right_score:
        raise DegeneracyError(f"branch {e}: measure does not decide the split")
    direction = "L" if left_score > right_score else "R"
    new_track, losers, winners = split_with_direction(track, e, direction)
    new_mu = dict(mu)
    new_mu[e] = abs(mu[b] - mu[c])
    return new_track, new_mu, direction, losers, winners


def resolve(track: TrainTrack, H: Subgraph, mu: dict, max_steps: int = 1000):
    """Greedily apply improvements (measure-compatible splits with a loser in
    H) until none remains."""
    cur, cur_mu, cur_h = track, dict(mu), set(H.branches)
    for _ in range(max_steps):
        applied = False
        for e in sorted(cur.branches):
            if cur.branch_roles().get(e) != "large":
                continue
            try:
                nxt, nxt_mu, _, losers, _ = track_split(cur, cur_mu, e)
            except DegeneracyError:
                continue
            if not any(l in cur_h for l in losers):
                continue
            cur, cur_mu = nxt, nxt_mu
            applied = True
            break
        if not applied:
            return cur, Subgraph(cur_h), cur_mu
    raise VeertrackError("resolution did not stabilize")
