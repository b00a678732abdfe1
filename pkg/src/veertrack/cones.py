"""Transition matrices of splitting sequences, measure cones, and the
Hilbert projective metric.

Transverse measures pull back along a split: if the branch e splits and the
branches l1, l2 lose, the old measure of e equals the new measure of e plus
the new measures of l1 and l2, every other branch keeping its value.  The
transition matrix of a word is the product of these elementary matrices in
temporal order, so (old widths) = M (new widths).  Tangential measures push
forward by the transpose.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._exact import identity, in_span, mat_det, mat_mul, transpose
from .errors import DegeneracyError, VeertrackError
from .flow import PeriodicMatch, SplitEvent, Trajectory
from .traintrack import Subgraph, TrainTrack, dual_track, is_filling_subtrack, split_with_direction

CONE_TOL = 1e-12


# ---------------------------------------------------------------------------
# transition matrices


@dataclass(frozen=True)
class TransitionPair:
    """Integer matrix pair acting on transverse (pull back) and tangential
    (push forward) measures, indexed by a fixed branch order."""

    branches: tuple[str, ...]
    transverse: tuple[tuple[int, ...], ...]
    tangential: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        tidy = lambda m: tuple(tuple(int(x) for x in row) for row in m)
        object.__setattr__(self, "transverse", tidy(self.transverse))
        object.__setattr__(self, "tangential", tidy(self.tangential))
        if self.tangential != tidy(transpose(self.transverse)):
            raise VeertrackError("tangential matrix is not the transpose of the transverse one")

    @property
    def n(self) -> int:
        return len(self.branches)

    def det(self) -> int:
        return int(mat_det([[Fraction(x) for x in row] for row in self.transverse]))

    def nonneg_shift(self) -> bool:
        """Whether M - I is entrywise nonnegative."""
        return all(
            self.transverse[i][j] - (1 if i == j else 0) >= 0
            for i in range(self.n)
            for j in range(self.n)
        )


def split_transition(event: SplitEvent, branches: tuple[str, ...]) -> TransitionPair:
    """Elementary transition matrix of one split event."""
    idx = {b: i for i, b in enumerate(branches)}
    m = [[1 if i == j else 0 for j in range(len(branches))] for i in range(len(branches))]
    row = idx[event.edge]
    for loser in event.losers:
        m[row][idx[loser]] += 1
    mt = tuple(tuple(r) for r in m)
    return TransitionPair(branches, mt, transpose(mt))


def compose_word(events, branches: tuple[str, ...]) -> TransitionPair:
    """Product of elementary matrices in temporal order."""
    m = identity(len(branches))
    for ev in events:
        m = mat_mul(m, [list(r) for r in split_transition(ev, branches).transverse])
    mt = tuple(tuple(int(x) for x in row) for row in m)
    return TransitionPair(branches, mt, transpose(mt))


def reconstruct_from_words(
    track0: TrainTrack,
    track_end: TrainTrack,
    words: dict[str, str],
) -> tuple[list[tuple[str, str, tuple[str, str], tuple[str, str]]], TransitionPair]:
    """Rebuild a splitting sequence from its per-branch direction words.

    words maps each branch label to the string of directions ("L"/"R") of its
    splits, in temporal order.  The search interleaves the words in every
    admissible way (a branch may only split while it is large) by
    backtracking, and accepts a linearization when the final track equals
    track_end.  Returns the event list as (edge, direction, losers, winners)
    tuples together with the composed transition pair.
    """
    branches = tuple(sorted(track0.branches))
    remaining0 = {e: list(w) for e, w in words.items() if w}

    def canon(track: TrainTrack):
        out = []
        for tri, slot in zip(track.triangles, track.large_slots):
            best = min(
                (tuple(tri[(r + k) % 3] for k in range(3)), (slot - r) % 3)
                for r in range(3)
            )
            out.append(best)
        return frozenset(out)

    target = canon(track_end)
    seen: set = set()

    def search(track: TrainTrack, remaining: dict, trail: list):
        key = (canon(track), tuple(sorted((e, len(w)) for e, w in remaining.items())))
        if key in seen:
            return None
        seen.add(key)
        if not remaining:
            return list(trail) if canon(track) == target else None
        roles = track.branch_roles()
        for e in sorted(remaining):
            if roles.get(e) != "large":
                continue
            direction = remaining[e][0]
            try:
                nxt, losers, winners = split_with_direction(track, e, direction)
            except VeertrackError:
                continue
            new_remaining = {k: v[1:] if k == e else v for k, v in remaining.items()}
            new_remaining = {k: v for k, v in new_remaining.items() if v}
            trail.append((e, direction, tuple(sorted(losers)), tuple(sorted(winners))))
            hit = search(nxt, new_remaining, trail)
            if hit is not None:
                return hit
            trail.pop()
        return None

    events = search(track0, remaining0, [])
    if events is None:
        raise VeertrackError("no interleaving of the direction words joins the two tracks")
    pseudo = [
        SplitEvent(1, e, d, losers, winners) for (e, d, losers, winners) in events
    ]
    return events, compose_word(pseudo, branches)


# ---------------------------------------------------------------------------
# the equivalence space of tangential measures


def equivalence_space(track: TrainTrack) -> list[list[Fraction]]:
    """Spanning vectors of the subspace V(tau) that tangential measures are
    taken modulo: one vector 1_large - 1_small - 1_small per switch."""
    branches = track.branches
    idx = {b: i for i, b in enumerate(branches)}
    rows = []
    for tri, slot in zip(track.triangles, track.large_slots):
        row = [Fraction(0)] * len(branches)
        for i, (e, _) in enumerate(tri):
            row[idx[e]] += Fraction(1) if i == slot else Fraction(-1)
        rows.append(row)
    return rows


def tangential_equivalent(track: TrainTrack, r1, r2) -> bool:
    """Whether two tangential vectors (branch order = track.branches) differ
    by an element of V(tau)."""
    diff = [Fraction(a) - Fraction(b) for a, b in zip(r1, r2)]
    if all(x == 0 for x in diff):
        return True
    return in_span(equivalence_space(track), diff)


# ---------------------------------------------------------------------------
# polyhedral cones and the Hilbert metric


@dataclass(frozen=True)
class Cone:
    """A full-dimensional polyhedral cone in R^n, by generators, facets, or
    both.  Facet normals f satisfy f . x >= 0 on the cone."""

    dim: int
    generators: tuple[tuple[float, ...], ...] = ()
    facets: tuple[tuple[float, ...], ...] = ()

    def with_facets(self) -> "Cone":
        if self.facets:
            return self
        return Cone(self.dim, self.generators, facets_from_generators(self.generators))


def orthant(n: int) -> Cone:
    basis = tuple(tuple(1.0 if i == j else 0.0 for j in range(n)) for i in range(n))
    return Cone(n, generators=basis, facets=basis)


def facets_from_generators(generators) -> tuple[tuple[float, ...], ...]:
    """Facet normals of cone(generators): for every (n-1)-subset spanning a
    hyperplane, keep its normal when all generators lie weakly on one side."""
    gens = np.asarray(generators, dtype=float)
    k, n = gens.shape
    if k < n:
        raise VeertrackError("cone is not full-dimensional: too few generators")
    tol = 1e-9 * max(1.0, float(np.abs(gens).max()))
    found = []
    for subset in itertools.combinations(range(k), n - 1):
        a = gens[list(subset)]
        if np.linalg.matrix_rank(a, tol=tol) < n - 1:
            continue
        _, _, vt = np.linalg.svd(a)
        v = vt[-1]
        vals = gens @ v
        if np.all(vals >= -tol):
            cand = v
        elif np.all(vals <= tol):
            cand = -v
        else:
            continue
        cand = cand / np.linalg.norm(cand)
        if not any(np.allclose(cand, f, atol=1e-8) for f in found):
            found.append(cand)
    if len(found) < n:
        raise VeertrackError("generator set does not span a full-dimensional pointed cone")
    return tuple(tuple(float(x) for x in f) for f in found)


def _facet_values(cone: Cone, x):
    c = cone.with_facets()
    xv = np.asarray(x, dtype=float)
    return np.array([float(np.dot(f, xv)) for f in c.facets])


def hilbert_distance(cone: Cone, x, y) -> float:
    """Hilbert projective distance via facet functionals:
    d = log max_f f(x)/f(y) + log max_g g(y)/g(x).

    Points on the cone boundary are infinitely far from interior points; the
    distance is returned as math.inf in that case.  Points outside the cone
    are an error.
    """
    fx, fy = _facet_values(cone, x), _facet_values(cone, y)
    scale = max(1.0, float(np.abs(fx).max()), float(np.abs(fy).max()))
    if fx.min() < -CONE_TOL * scale or fy.min() < -CONE_TOL * scale:
        raise VeertrackError("point lies outside the cone")
    if fx.min() <= CONE_TOL * scale or fy.min() <= CONE_TOL * scale:
        return math.inf
    return float(np.log(np.max(fx / fy)) + np.log(np.max(fy / fx)))


def image_diameter(matrix, cone: Cone, target: Cone | None = None) -> float:
    """Hilbert diameter of matrix . cone inside target (default: cone).

    Infinite when some generator lands on the boundary of the target."""
    target = (target or cone).with_facets()
    a = np.asarray(matrix, dtype=float)
    images = [tuple(a @ np.asarray(g, dtype=float)) for g in cone.generators]
    diam = 0.0
    for u, v in itertools.combinations(images, 2):
        d = hilbert_distance(target, u, v)
        if math.isinf(d):
            return math.inf
        diam = max(diam, d)
    return diam


def birkhoff_coefficient(diameter: float) -> float:
    """Contraction ratio tanh(diameter / 4); 1.0 for an infinite diameter."""
    if math.isinf(diameter):
        return 1.0
    return math.tanh(diameter / 4.0)


# ---------------------------------------------------------------------------
# periodic words and pseudo-Anosov data


@dataclass(frozen=True)
class PAReport:
    support: frozenset
    filling: bool
    is_pseudo_anosov: bool
    lam_w: float | None
    lam_h: float | None
    entropy: float | None
    branches: tuple[str, ...]
    return_matrix: tuple[tuple[int, ...], ...] | None
    word_pair: TransitionPair
    positive_power: int | None


def perron_root(matrix, tol: float = 1e-12, max_iter: int = 100000) -> tuple[float, np.ndarray]:
    """Largest eigenvalue and eigenvector of a nonnegative matrix by power
    iteration from the all-ones vector."""
    a = np.asarray(matrix, dtype=float)
    if a.min() < 0:
        raise VeertrackError("power iteration needs a nonnegative matrix")
    v = np.ones(a.shape[0])
    lam = 0.0
    for _ in range(max_iter):
        w = a @ v
        nw = np.linalg.norm(w)
        if nw == 0:
            raise DegeneracyError("matrix kills the positive cone")
        w = w / nw
        lam_new = float(w @ (a @ w))
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return lam_new, w
        lam, v = lam_new, w
    raise VeertrackError("power iteration did not converge")


def analyze_periodic_word(traj: Trajectory, match: PeriodicMatch) -> PAReport:
    """Decide whether the periodic word acts as a pseudo-Anosov map and
    extract its dilatation data.

    The return map on transverse measures is M_word composed with the inverse
    relabeling permutation; its Perron root is the width dilatation lam_w.
    The height dilatation lam_h is measured on the geometric tangential data
    of the matched states, so lam_w * lam_h = 1 is a genuine numeric check.
    """
    states = traj.states()
    s1, s2 = states[match.m], states[match.m2]
    branches = tuple(sorted(s1.edges))
    pair = compose_word(match.word, branches)

    # support: branches split in the word, closed under the relabeling orbit
    support = {ev.edge for ev in match.word}
    while True:
        grown = support | {match.relabel[e][0] for e in support}
        if grown == support:
            break
        support = grown
    track1, mp1 = dual_track(s1, "vertical")
    filling = is_filling_subtrack(track1, Subgraph(frozenset(support)))
    if not filling:
        return PAReport(
            frozenset(support), False, False, None, None, None, branches, None, pair, None
        )

    # fold the word matrix with the relabeling: A = M_word P^{-1}, where
    # (P x)(e) = x(sigma(e)); then the base-chart widths at the first state
    # form an eigenvector of A with eigenvalue lam_w
    idx = {b: i for i, b in enumerate(branches)}
    n = len(branches)
    pinv = [[0] * n for _ in range(n)]
    for e in branches:
        pinv[idx[e]][idx[match.relabel[e][0]]] = 1
    pinv_t = transpose(tuple(tuple(r) for r in pinv))
    a = mat_mul([list(r) for r in pair.transverse], [list(r) for r in pinv_t])
    a_int = tuple(tuple(int(x) for x in row) for row in a)
    lam_w, vec = perron_root(a_int)

    # eigenvector check against the actual widths
    widths = np.array([abs(float(s1.periods[b].w)) for b in branches])
    widths = widths / np.linalg.norm(widths)
    if np.linalg.norm(np.asarray(a_int, dtype=float) @ widths - lam_w * widths) > 1e-6 * lam_w:
        raise VeertrackError("width vector is not an eigenvector of the folded return matrix")

    # height dilatation from the geometric tangential measures of the two
    # matched states, compared branch by branch through the relabeling
    _, mp2 = dual_track(s2, "vertical")
    ratios = []
    for e in branches:
        r1 = float(mp1.tangential[e])
        r2 = float(mp2.tangential[match.relabel[e][0]])
        if r1 > 1e-12 and r2 > 1e-12:
            ratios.append(r1 / r2)
    if not ratios:
        raise DegeneracyError("tangential measures vanish on every branch")
    lam_h = float(np.median(ratios))
    if max(ratios) - min(ratios) > 1e-6 * max(ratios):
        raise VeertrackError("tangential ratios disagree across branches")

    positive_power = None
    power = np.asarray(a_int, dtype=float)
    for k in range(1, 2 * n + 1):
        if power.min() > 0:
            positive_power = k
            break
        power = power @ np.asarray(a_int, dtype=float)

    return PAReport(
        frozenset(support),
        True,
        True,
        lam_w,
        lam_h,
        math.log(lam_w),
        branches,
        a_int,
        pair,
        positive_power,
    )
