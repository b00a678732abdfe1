"""Triangulated half-translation surfaces in period coordinates.

A surface is a list of counterclockwise triangles, each an ordered triple of
(edge label, sign), together with one period (w, h) per edge.  The two
occurrences of an edge determine the gluing; opposite occurrence signs mean a
translation gluing, equal signs the half-translation one.

The diagonal flow g_t scales (w, h) to (e^t w, e^{-t} h).  In exact mode the
flow is never applied destructively: the surface keeps rational base periods
plus the parameter lam = e^{2t}, and every geometric comparison downstream is
phrased as a comparison rational in lam.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .errors import DocumentError

EPS_AXIS = 1e-9
EPS_ANGLE = 1e-9

Corner = tuple[int, int]  # (triangle index, slot index)


class Period(NamedTuple):
    """One complex edge period, split into width and height."""

    w: object  # Fraction in exact mode, float otherwise
    h: object


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    violations: tuple[tuple[str, str, str], ...] = ()


class Surface:
    """Immutable triangulated surface.  Use module functions to transform it."""

    __slots__ = ("triangles", "periods", "mode", "lam", "_vertex_cache")

    def __init__(self, triangles, periods, mode, lam=None):
        self.triangles = tuple(tuple((str(e), int(s)) for e, s in tri) for tri in triangles)
        if mode not in ("exact", "float"):
            raise DocumentError(f"unknown mode {mode!r}")
        self.mode = mode
        conv = (lambda x: Fraction(x)) if mode == "exact" else float
        self.periods = {str(e): Period(conv(p[0]), conv(p[1])) for e, p in periods.items()}
        if lam is None:
            lam = Fraction(1) if mode == "exact" else 1.0
        self.lam = lam
        self._vertex_cache = None

    # -- basic accessors ---------------------------------------------------

    @property
    def edges(self) -> tuple[str, ...]:
        return tuple(sorted(self.periods))

    @property
    def sigma(self) -> float:
        """e^t as a float (exact value is sqrt(lam), kept symbolic elsewhere)."""
        return math.sqrt(float(self.lam))

    def signed(self, tri_idx: int, slot: int) -> tuple:
        e, s = self.triangles[tri_idx][slot % 3]
        p = self.periods[e]
        return (s * p.w, s * p.h)

    def effective_period(self, e: str) -> tuple[float, float]:
        """Flowed period as floats; for display and float-mode geometry."""
        p = self.periods[e]
        return (float(p.w) * self.sigma, float(p.h) / self.sigma)

    def replace(self, triangles=None, periods=None, lam=None) -> "Surface":
        return Surface(
            self.triangles if triangles is None else triangles,
            self.periods if periods is None else periods,
            self.mode,
            self.lam if lam is None else lam,
        )

    def occurrences(self) -> dict[str, list[tuple[int, int, int]]]:
        """edge -> list of (triangle index, slot, sign)."""
        occ: dict[str, list[tuple[int, int, int]]] = {}
        for t, tri in enumerate(self.triangles):
            for i, (e, s) in enumerate(tri):
                occ.setdefault(e, []).append((t, i, s))
        return occ

    # -- vertices ----------------------------------------------------------

    def vertex_classes(self) -> list[frozenset[Corner]]:
        """Corners grouped by the vertex of the glued cell complex."""
        if self._vertex_cache is None:
            self._vertex_cache = corner_classes(self.triangles)
        return self._vertex_cache

    def corner_angle(self, t: int, i: int) -> float:
        """Interior angle at corner (t, i), in radians, from base periods.

        Corner angles are flow dependent; the census k (total angle / pi) is
        not, so the base chart is the right place to measure it.
        """
        uw, uh = self.signed(t, i)
        vw, vh = self.signed(t, (i - 1) % 3)
        uw, uh, vw, vh = float(uw), float(uh), float(-vw), float(-vh)
        return math.atan2(uw * vh - uh * vw, uw * vw + uh * vh) % (2 * math.pi)

    def vertex_angle_multiples(self) -> list[int]:
        """For each vertex, the integer k with cone angle k*pi (unrounded check
        is the caller's business; see validate)."""
        out = []
        for cls in self.vertex_classes():
            total = sum(self.corner_angle(t, i) for t, i in cls)
            out.append(round(total / math.pi))
        return out

    def vertex_census(self) -> dict[int, int]:
        census: dict[int, int] = {}
        for k in self.vertex_angle_multiples():
            census[k] = census.get(k, 0) + 1
        return census

    def marked_vertex_flags(self) -> list[bool]:
        """Vertices of cone angle pi or 2*pi are the marked points."""
        return [k <= 2 for k in self.vertex_angle_multiples()]


def corner_classes(triangles) -> list[frozenset[Corner]]:
    """Corners grouped by the vertex of the glued cell complex.

    Corner (t, i) sits at vertex i of triangle t, between sides i-1 and i.
    Gluing the two occurrences (t1,i1) and (t2,i2) of an edge identifies
    corner (t1,i1) with (t2,i2+1) and (t1,i1+1) with (t2,i2).
    """
    parent: dict[Corner, Corner] = {}

    def find(x: Corner) -> Corner:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    occ: dict[str, list[tuple[int, int]]] = {}
    for t, tri in enumerate(triangles):
        for i in range(3):
            parent[(t, i)] = (t, i)
        for i, (e, _) in enumerate(tri):
            occ.setdefault(e, []).append((t, i))
    for e, occs in occ.items():
        if len(occs) != 2:
            raise DocumentError(f"edge {e} used {len(occs)} times")
        (t1, i1), (t2, i2) = occs
        for a, b in (((t1, i1), (t2, (i2 + 1) % 3)), ((t1, (i1 + 1) % 3), (t2, i2))):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
    groups: dict[Corner, set[Corner]] = {}
    for c in parent:
        groups.setdefault(find(c), set()).add(c)
    out = [frozenset(g) for g in groups.values()]
    out.sort(key=lambda g: min(g))
    return out


# ---------------------------------------------------------------------------
# parsing / serialization


def _parse_number(x, mode: str):
    if mode == "exact":
        if isinstance(x, str):
            return Fraction(x)
        if isinstance(x, bool) or not isinstance(x, int):
            raise DocumentError(f"exact mode needs integers or 'p/q' strings, got {x!r}")
        return Fraction(x)
    return float(Fraction(x) if isinstance(x, str) else x)


def _emit_number(x, mode: str):
    if mode == "exact":
        f = Fraction(x)
        return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"
    return float(x)


def parse_surface(document: str) -> Surface:
    """Parse the JSON surface document; raises DocumentError on bad input."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"syntax error at offset {exc.pos}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise DocumentError("document root must be an object")
    for key in ("mode", "edges", "triangles"):
        if key not in doc:
            raise DocumentError(f"missing field {key!r}")
    mode = doc["mode"]
    if mode not in ("exact", "float"):
        raise DocumentError(f"mode must be 'exact' or 'float', got {mode!r}")
    periods = {}
    for label, pair in doc["edges"].items():
        if not (isinstance(pair, (list, tuple)) and len(pair) == 2):
            raise DocumentError(f"edge {label}: period must be [w, h]")
        periods[label] = (_parse_number(pair[0], mode), _parse_number(pair[1], mode))
    triangles = []
    for t, tri in enumerate(doc["triangles"]):
        if len(tri) != 3:
            raise DocumentError(f"triangle {t} must have 3 sides")
        sides = []
        for slot in tri:
            e, s = slot["edge"], slot["sign"]
            if s not in (1, -1):
                raise DocumentError(f"triangle {t}: sign must be +-1")
            if e not in periods:
                raise DocumentError(f"triangle {t}: unknown edge {e!r}")
            sides.append((e, s))
        triangles.append(tuple(sides))
    lam = None
    if "flow" in doc:
        lam = _parse_number(doc["flow"], mode)
    counts: dict[str, int] = {}
    for tri in triangles:
        for e, _ in tri:
            counts[e] = counts.get(e, 0) + 1
    for e in periods:
        if counts.get(e, 0) != 2:
            raise DocumentError(f"edge {e} appears {counts.get(e, 0)} times, expected 2")
    surf = Surface(triangles, periods, mode, lam)
    if "marked_vertices" in doc:
        declared = len(doc["marked_vertices"])
        derived = sum(surf.marked_vertex_flags())
        if declared != derived:
            raise DocumentError(
                f"marked_vertices lists {declared} points but the cone angles imply {derived}"
            )
    return surf


def serialize_surface(s: Surface) -> str:
    doc = {
        "mode": s.mode,
        "edges": {e: [_emit_number(p.w, s.mode), _emit_number(p.h, s.mode)] for e, p in sorted(s.periods.items())},
        "triangles": [[{"edge": e, "sign": sg} for e, sg in tri] for tri in s.triangles],
    }
    if s.lam != 1:
        doc["flow"] = _emit_number(s.lam, s.mode)
    return json.dumps(doc, indent=2)


# ---------------------------------------------------------------------------
# validation


def _cross(a, b):
    return a[0] * b[1] - a[1] * b[0]


def validate(s: Surface) -> ValidationReport:
    """Check every structural invariant; violations are data, not exceptions."""
    violations: list[tuple[str, str, str]] = []
    tol = 0.0 if s.mode == "exact" else 1e-9

    occ = s.occurrences()
    for e, occs in occ.items():
        if len(occs) != 2:
            violations.append(("gluing", e, f"edge used {len(occs)} times"))
    if any(v[0] == "gluing" for v in violations):
        return ValidationReport(False, tuple(violations))

    for t in range(len(s.triangles)):
        sides = [s.signed(t, i) for i in range(3)]
        sw = sum(p[0] for p in sides)
        sh = sum(p[1] for p in sides)
        if abs(float(sw)) > tol or abs(float(sh)) > tol:
            violations.append(("zero-sum", f"triangle {t}", f"signed periods sum to ({sw}, {sh})"))
        cr = _cross(sides[0], sides[1])
        if not cr > tol:
            violations.append(("orientation", f"triangle {t}", f"cross product {cr} not positive"))

    for e, p in s.periods.items():
        if abs(float(p.w)) <= EPS_AXIS or abs(float(p.h)) <= EPS_AXIS:
            violations.append(("axis", e, f"axis-parallel period ({p.w}, {p.h})"))

    if not any(v[0] in ("zero-sum", "orientation") for v in violations):
        for idx, cls in enumerate(s.vertex_classes()):
            total = sum(s.corner_angle(t, i) for t, i in cls)
            k = total / math.pi
            if abs(k - round(k)) > EPS_ANGLE * max(1.0, abs(k)) or round(k) < 1:
                violations.append(("cone-angle", f"vertex {idx}", f"total angle {total} is not a multiple of pi"))

    return ValidationReport(not violations, tuple(violations))


# ---------------------------------------------------------------------------
# area and flow


def triangle_area_shoelace(sides) -> object:
    """Half the cross product of the first two sides (positively oriented)."""
    return _cross(sides[0], sides[1]) / 2


def triangle_area_trapezoid(sides) -> object:
    """Largest width times largest height, minus half the sum of the per-edge
    width-height products.  Valid for triangles carrying both slope signs."""
    ws = [abs(p[0]) for p in sides]
    hs = [abs(p[1]) for p in sides]
    return max(ws) * max(hs) - sum(w * h for w, h in zip(ws, hs)) / 2


def area(s: Surface) -> object:
    """Total flat area; cross-checks the two per-triangle formulas."""
    total = Fraction(0) if s.mode == "exact" else 0.0
    for t in range(len(s.triangles)):
        sides = [s.signed(t, i) for i in range(3)]
        a1 = triangle_area_shoelace(sides)
        signs = {(p[0] > 0) == (p[1] > 0) for p in sides}
        if len(signs) == 2:  # both slope signs present: trapezoid formula applies
            a2 = triangle_area_trapezoid(sides)
            if s.mode == "exact":
                if a1 != a2:
                    raise ArithmeticError(f"triangle {t}: area formulas disagree ({a1} vs {a2})")
            elif abs(a1 - a2) > 1e-12 * max(1.0, abs(a1)):
                raise ArithmeticError(f"triangle {t}: area formulas disagree ({a1} vs {a2})")
        if not float(a1) > 0:
            raise ArithmeticError(f"triangle {t} has non-positive area {a1}")
        total += a1
    return total


def apply_flow(s: Surface, t: float) -> Surface:
    """g_t in float mode: scale the stored periods, keep lam untouched."""
    if s.mode == "exact":
        if t == 0:
            return s
        raise ValueError("exact mode flows via apply_flow_scale(s, lam) with rational lam = e^{2t}")
    et = math.exp(t)
    periods = {e: (p.w * et, p.h / et) for e, p in s.periods.items()}
    return s.replace(periods=periods)


def apply_flow_scale(s: Surface, lam) -> Surface:
    """Multiply the flow parameter: lam_new = lam * lam_old, lam = e^{2t}."""
    if float(lam) <= 0:
        raise ValueError("flow parameter must be positive")
    if s.mode == "exact":
        lam = Fraction(lam)
    else:
        lam = float(lam)
    return s.replace(lam=s.lam * lam)


def rebase(s: Surface) -> Surface:
    """Fold the flow parameter into the stored periods (float mode only)."""
    if s.mode == "exact":
        if s.lam == 1:
            return s
        raise ValueError("exact surfaces cannot be rebased without leaving the rationals")
    sig = s.sigma
    periods = {e: (p.w * sig, p.h / sig) for e, p in s.periods.items()}
    return Surface(s.triangles, periods, "float")
