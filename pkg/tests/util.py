"""Shared helpers for the test suite: random suited surfaces, scrambles,
exact trajectory prefixes, and brute-force oracles."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from veertrack._exact import kernel_basis
from veertrack.delaunay import build_quad, flip, greedy_delaunay, other_diagonal
from veertrack.errors import DegeneracyError, NotFlippableError, VeertrackError
from veertrack.fixtures import octagon, t2
from veertrack.flow import next_split
from veertrack.surface import Surface, validate


def random_veering_triangle(rng: random.Random, exact: bool):
    """Two random sides of opposite slope signs plus the closing side."""
    def q(lo, hi):
        if exact:
            return Fraction(rng.randint(lo * 100, hi * 100), 100)
        return rng.uniform(lo, hi)

    while True:
        v1 = (q(1, 3), q(1, 3))  # positive slope
        v2 = (q(1, 3), -q(1, 3))  # negative slope
        v3 = (-(v1[0] + v2[0]), -(v1[1] + v2[1]))
        if any(x == 0 for v in (v1, v2, v3) for x in v):
            continue
        if v1[0] * v2[1] - v1[1] * v2[0] > 0:
            return (v1, v2, v3)
        v1, v2 = v2, v1
        if v1[0] * v2[1] - v1[1] * v2[0] > 0:
            return (v1, v2, v3)


def sheared_surface(base: Surface, rng: random.Random) -> Surface:
    """Apply a random small rational shear to every period."""
    a = Fraction(rng.randint(-12, 12), 100)
    b = Fraction(rng.randint(-12, 12), 100)
    periods = {}
    for e, p in base.periods.items():
        periods[e] = (p.w + a * p.h, b * p.w + p.h)
    return base.replace(periods=periods)


def random_suited_surface(seed: int) -> Surface | None:
    """A sheared torus or genus-2 surface passing validation, or None."""
    rng = random.Random(seed)
    base = t2() if rng.random() < 0.5 else octagon()
    s = sheared_surface(base, rng)
    if not validate(s).passed:
        return None
    try:
        s, _ = greedy_delaunay(s)
    except (DegeneracyError, VeertrackError):
        return None
    return s


def exact_trajectory_prefix(s: Surface, max_events: int = 20):
    """Iterate splits on an exact-mode Delaunay surface until a degeneracy,
    exhaustion, or the event cap.  Returns (events, states)."""
    events, states = [], [s]
    cur = s
    while len(events) < max_events:
        try:
            ev = next_split(cur)
        except DegeneracyError:
            break
        if ev is None:
            break
        at = cur.replace(lam=ev.threshold)
        try:
            cur, _ = flip(at, ev.edge)
        except (DegeneracyError, NotFlippableError):
            break
        events.append(ev)
        states.append(cur)
    return events, states


def scramble(s: Surface, rng: random.Random, flips: int = 8) -> Surface:
    """Apply up to the given number of random legal flips."""
    cur = s
    for _ in range(flips):
        candidates = []
        for e in cur.edges:
            try:
                _, ok = other_diagonal(cur, e)
            except DegeneracyError:
                ok = False
            if ok:
                candidates.append(e)
        if not candidates:
            break
        e = rng.choice(sorted(candidates))
        try:
            cur, _ = flip(cur, e)
        except (DegeneracyError, NotFlippableError):
            continue
    return cur


def brute_force_rays(rows, n):
    """Support-enumeration oracle for the extreme rays of {x >= 0, Ax = 0}:
    a support is extreme when the kernel restricted to it is one strictly
    positive line and no smaller support works."""
    from veertrack._exact import scale_to_integers

    found = []
    for size in range(1, n + 1):
        for support in itertools.combinations(range(n), size):
            sub = [[row[j] for j in support] for row in rows]
            kern = kernel_basis(sub, len(support))
            if len(kern) != 1:
                continue
            vec = kern[0]
            if all(x < 0 for x in vec):
                vec = [-x for x in vec]
            if not all(x > 0 for x in vec):
                continue
            found.append((set(support), vec))
    rays = []
    for support, vec in found:
        if any(other < support for other, _ in found):
            continue
        full = [Fraction(0)] * n
        for j, x in zip(sorted(support), vec):
            full[j] = x
        rays.append(tuple(scale_to_integers(full)))
    return sorted(set(rays))
