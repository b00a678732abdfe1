"""Event-driven simulation of the diagonal flow on a Delaunay triangulation.

An edge e that is large in the vertical track splits when its rectangle
becomes a square: e^{2t*} = h_d / w_e where d is the other diagonal of its
quadrilateral.  Thresholds are stored as absolute values of lam = e^{2t}
relative to the base chart, so in exact mode the whole splitting sequence is
a sequence of exact rational comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .delaunay import build_quad, delaunay_violations, flip, other_diagonal, slope_sign
from .errors import DegeneracyError, VeertrackError
from .surface import Surface
from .traintrack import dual_track, vertex_curves

FLOAT_EVENT_TIE = 1e-12


@dataclass(frozen=True)
class SplitEvent:
    threshold: object  # lam = e^{2t*}, absolute (Fraction in exact mode)
    edge: str
    direction: str  # "L" | "R"
    losers: tuple[str, str]
    winners: tuple[str, str]

    @property
    def t(self) -> float:
        return 0.5 * math.log(float(self.threshold))


@dataclass
class Trajectory:
    start: Surface
    events: list[SplitEvent]
    surfaces: list[Surface]  # surface after each event, lam = its threshold
    t_end: float  # duration measured from the start surface

    def states(self) -> list[Surface]:
        return [self.start] + list(self.surfaces)

    def times(self) -> list[float]:
        """Event times measured from the start surface."""
        t0 = 0.5 * math.log(float(self.start.lam))
        return [ev.t - t0 for ev in self.events]


@dataclass(frozen=True)
class ThickStats:
    eps: float
    thick_time: float
    theta: float


def _split_candidates(s: Surface):
    track, _ = dual_track(s, "vertical")
    roles = track.branch_roles()
    out = []
    for e, role in roles.items():
        if role != "large":
            continue
        diag, flippable = other_diagonal(s, e)
        if not flippable:
            continue
        w_e, h_e = abs(s.periods[e].w), abs(s.periods[e].h)
        w_d, h_d = abs(diag[0]), abs(diag[1])
        if w_d < w_e and h_d > h_e:
            out.append((h_d / w_e, e, diag))
    return out


def next_split(s: Surface) -> SplitEvent | None:
    """Earliest future split of a certified Delaunay surface, or None."""
    cands = [c for c in _split_candidates(s) if c[0] > s.lam]
    if not cands:
        return None
    cands.sort(key=lambda c: (float(c[0]), c[1]))
    thr, e, diag = cands[0]
    for thr2, e2, _ in cands[1:]:
        if e2 == e:
            continue
        if s.mode == "exact":
            tie = thr2 == thr
        else:
            tie = abs(thr2 - thr) <= FLOAT_EVENT_TIE * max(1.0, abs(thr))
        if tie:
            raise DegeneracyError(f"simultaneous split events on {e} and {e2}")
        break
    direction = "L" if slope_sign(diag) > 0 else "R"
    q = build_quad(s, e)
    a, b, c, d = (side[0] for side in q.sides)
    losers = (a, c) if direction == "L" else (b, d)
    winners = (b, d) if direction == "L" else (a, c)
    # cross-check with the width comparison that defines the track split
    wb = abs(q.vectors[1][0]) + abs(q.vectors[3][0])
    wa = abs(q.vectors[0][0]) + abs(q.vectors[2][0])
    width_dir = "L" if wb > wa else "R"
    if width_dir != direction:
        raise VeertrackError(
            f"edge {e}: slope direction {direction} disagrees with width comparison"
        )
    return SplitEvent(thr, e, direction, tuple(sorted(losers)), tuple(sorted(winners)))


def run_flow(s: Surface, T: float, max_events: int = 10000, verify: str = "debug") -> Trajectory:
    """Iterate next_split and flip until time T (from s) or max_events."""
    if delaunay_violations(s):
        raise VeertrackError("run_flow needs a certified Delaunay start surface")
    lam_end_f = float(s.lam) * math.exp(2.0 * T)
    events: list[SplitEvent] = []
    surfaces: list[Surface] = []
    cur = s
    while len(events) < max_events:
        ev = next_split(cur)
        if ev is None or float(ev.threshold) > lam_end_f:
            break
        at_event = cur.replace(lam=ev.threshold)
        flipped, _ = flip(at_event, ev.edge)
        if verify == "debug":
            nxt = next_split(flipped)
            upper = float(nxt.threshold) if nxt is not None else lam_end_f
            mid = (float(ev.threshold) + upper) / 2
            lam_mid = Fraction(mid).limit_denominator(10**12) if flipped.mode == "exact" else mid
            probe = flipped.replace(lam=lam_mid)
            if float(lam_mid) > float(ev.threshold) and delaunay_violations(probe):
                raise VeertrackError(f"lost the Delaunay certificate after splitting {ev.edge}")
        events.append(ev)
        surfaces.append(flipped)
        cur = flipped
    return Trajectory(s, events, surfaces, T)


# ---------------------------------------------------------------------------
# recurrence statistics


def _proxy_coefficients(s: Surface):
    """(A, B) per vertex curve of both dual tracks: the proxy systole at
    absolute time t is min over curves of max(A e^t, B e^{-t})."""
    coeffs = []
    for direction in ("vertical", "horizontal"):
        track, mp = dual_track(s, direction)
        branches = track.branches
        for curve in vertex_curves(track):
            if direction == "vertical":
                A = sum(c * abs(float(s.periods[b].w)) for c, b in zip(curve, branches))
                B = sum(c * float(mp.tangential[b]) for c, b in zip(curve, branches))
            else:
                B = sum(c * abs(float(s.periods[b].h)) for c, b in zip(curve, branches))
                A = sum(c * float(mp.tangential[b]) for c, b in zip(curve, branches))
            coeffs.append((A, B))
    return coeffs


def thick_fraction(traj: Trajectory, eps: float) -> ThickStats:
    """Lebesgue measure of the times where the proxy systole stays >= eps."""
    t0 = 0.5 * math.log(float(traj.start.lam))
    t_stop = t0 + traj.t_end
    cuts = [t0] + [ev.t for ev in traj.events if ev.t < t_stop] + [t_stop]
    states = traj.states()
    thin_total = 0.0
    for k in range(len(cuts) - 1):
        lo, hi = cuts[k], cuts[k + 1]
        if hi <= lo:
            continue
        intervals = []
        for A, B in _proxy_coefficients(states[min(k, len(states) - 1)]):
            # max(A e^t, B e^-t) < eps on (ln(B/eps), ln(eps/A))
            l = math.log(B / eps) if B > 0 else -math.inf
            r = math.log(eps / A) if A > 0 else math.inf
            l, r = max(l, lo), min(r, hi)
            if r > l:
                intervals.append((l, r))
        intervals.sort()
        last = lo
        for l, r in intervals:
            l = max(l, last)
            if r > l:
                thin_total += r - l
                last = r
    total = traj.t_end
    thick = max(0.0, total - thin_total)
    return ThickStats(eps, thick, thick / total if total > 0 else 1.0)


# ---------------------------------------------------------------------------
# periodicity


@dataclass(frozen=True)
class PeriodicMatch:
    m: int  # state index (0 = start surface)
    m2: int
    relabel: dict  # edge -> (edge', sign)
    lam_w: float  # width expansion across the period, e^{T'}
    word: tuple  # the SplitEvents between the matched states

    @property
    def period_t(self) -> float:
        return math.log(self.lam_w)


def _triangle_isomorphisms(s1: Surface, s2: Surface):
    """Label bijections with signs carrying the triangulation of s1 to s2."""
    tris1, tris2 = s1.triangles, s2.triangles
    if len(tris1) != len(tris2):
        return
    occ2: dict[str, list[tuple[int, int]]] = {}
    for t, tri in enumerate(tris2):
        for i, (e, _) in enumerate(tri):
            occ2.setdefault(e, []).append((t, i))
    for t0 in range(len(tris2)):
        for rot in range(3):
            sigma: dict[str, tuple[str, int]] = {}
            tri_map = {0: (t0, rot)}
            stack = [0]
            ok = True
            seen_tri = {0}
            while stack and ok:
                t = stack.pop()
                tt, rr = tri_map[t]
                for i in range(3):
                    e, sg = tris1[t][i]
                    e2, sg2 = tris2[tt][(i + rr) % 3]
                    f = sg * sg2
                    if e in sigma:
                        if sigma[e] != (e2, f):
                            ok = False
                            break
                    else:
                        if any(v[0] == e2 for v in sigma.values()):
                            ok = False
                            break
                        sigma[e] = (e2, f)
                    # propagate to the neighbor triangle across e
                    for (tn, jn) in _occ(tris1, e):
                        if tn == t and jn == i:
                            continue
                        for (tn2, jn2) in occ2[e2]:
                            if tn2 == tt and jn2 == (i + rr) % 3:
                                continue
                            if tn in tri_map:
                                if tri_map[tn] != (tn2, (jn2 - jn) % 3):
                                    ok = False
                            else:
                                tri_map[tn] = (tn2, (jn2 - jn) % 3)
                                if tn not in seen_tri:
                                    seen_tri.add(tn)
                                    stack.append(tn)
            if ok and len(tri_map) == len(tris1) and len(sigma) == len(s1.periods):
                yield sigma


def _occ(tris, e):
    return [(t, i) for t, tri in enumerate(tris) for i, (ee, _) in enumerate(tri) if ee == e]


def detect_periodicity(traj: Trajectory, rel_tol: float = 1e-9) -> PeriodicMatch | None:
    """Find state indices m < m' whose surfaces recur as marked surfaces.

    A periodic orbit returns to the same point of moduli space, so the
    geometric (flow-applied) period vectors of the two states agree up to a
    relabeling and a global sign.  The width expansion across the period is
    then read off the flow parameters: lam_w = sqrt(lam_{m'} / lam_m).
    """
    states = traj.states()
    eff = [{e: s.effective_period(e) for e in s.edges} for s in states]
    for span in range(1, len(states)):
        for m in range(0, len(states) - span):
            m2 = m + span
            lam_w = math.sqrt(float(states[m2].lam) / float(states[m].lam))
            if not lam_w > 1 + 1e-9:
                continue
            for sigma in _triangle_isomorphisms(states[m], states[m2]):
                glob = None
                good = True
                for e, (e2, f) in sigma.items():
                    w1, h1 = eff[m][e]
                    w2, h2 = f * eff[m2][e2][0], f * eff[m2][e2][1]
                    scale = max(abs(w1), abs(h1), 1e-15)
                    if glob is None:
                        if abs(abs(w1) - abs(w2)) > rel_tol * scale:
                            good = False
                            break
                        glob = 1 if w1 * w2 > 0 else -1
                    w2, h2 = glob * w2, glob * h2
                    if abs(w2 - w1) > rel_tol * scale or abs(h2 - h1) > rel_tol * scale:
                        good = False
                        break
                if good and glob is not None:
                    relabel = {e: (e2, glob * f) for e, (e2, f) in sigma.items()}
                    word = tuple(traj.events[m:m2])
                    return PeriodicMatch(m, m2, relabel, lam_w, word)
    return None
