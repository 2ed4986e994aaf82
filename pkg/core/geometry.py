"""Plane geometry and sets of headings on the circle."""

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from core.exceptions import DegenerateWallError, InvalidStateError


TWO_PI = 2.0 * math.pi
MERGE_TOL = 1e-12  # Arcs closer than this are merged
EQ_TOL = 1e-9  # Tolerance for set equality and membership

Piece = Tuple[float, float]


def wrap_angle(angle: float) -> float:
    """Map an angle in radians into (-pi, pi]."""
    wrapped = math.fmod(angle + math.pi, TWO_PI)
    if wrapped <= 0.0:
        wrapped += TWO_PI
    return wrapped - math.pi


def angle_diff(a: float, b: float) -> float:
    """Signed smallest difference a - b in (-pi, pi]."""
    return wrap_angle(a - b)


@dataclass(frozen=True)
class Vec2:
    """A point or displacement in the plane, meters."""
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise InvalidStateError(f"Vec2 components must be finite, got ({self.x}, {self.y})")

    @classmethod
    def from_polar(cls, radius: float, angle: float) -> "Vec2":
        return cls(radius * math.cos(angle), radius * math.sin(angle))

    @classmethod
    def from_iterable(cls, values: Sequence[float]) -> "Vec2":
        x, y = values
        return cls(float(x), float(y))

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, scale: float) -> "Vec2":
        return Vec2(self.x * scale, self.y * scale)

    __rmul__ = __mul__

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def distance_to(self, other: "Vec2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)

    def bearing_to(self, other: "Vec2") -> float:
        """Heading from this point towards `other`, in (-pi, pi]."""
        return wrap_angle(math.atan2(other.y - self.y, other.x - self.x))

    def as_tuple(self) -> Tuple[float, float]:
        return (self.x, self.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)


@dataclass(frozen=True)
class Arc:
    """
    Counter-clockwise arc of headings starting at `start` and spanning `width`.

    `start` is stored in (-pi, pi]; `start + width` may exceed pi (wrap-around).
    """
    start: float
    width: float

    def __post_init__(self):
        if not (math.isfinite(self.start) and math.isfinite(self.width)):
            raise InvalidStateError(f"Arc must be finite, got start={self.start}, width={self.width}")
        if self.width < -EQ_TOL or self.width > TWO_PI + EQ_TOL:
            raise InvalidStateError(f"Arc width must lie in [0, 2pi], got {self.width}")
        object.__setattr__(self, "start", wrap_angle(self.start))
        object.__setattr__(self, "width", min(max(self.width, 0.0), TWO_PI))

    @classmethod
    def centered(cls, center: float, half_width: float) -> "Arc":
        return cls(center - half_width, 2.0 * half_width)

    @classmethod
    def from_bounds(cls, lo: float, hi: float) -> "Arc":
        """Arc running counter-clockwise from `lo` to `hi`."""
        return cls(lo, (hi - lo) % TWO_PI)

    @property
    def end(self) -> float:
        """Unwrapped end angle, start + width."""
        return self.start + self.width

    @property
    def center(self) -> float:
        return wrap_angle(self.start + 0.5 * self.width)

    @property
    def half_width(self) -> float:
        return 0.5 * self.width

    def contains(self, angle: float, tol: float = EQ_TOL) -> bool:
        offset = (angle - self.start) % TWO_PI
        return offset <= self.width + tol or offset >= TWO_PI - tol

    def pieces(self) -> List[Piece]:
        """Split into linear intervals of [-pi, pi]."""
        if self.width >= TWO_PI - MERGE_TOL:
            return [(-math.pi, math.pi)]
        end = self.start + self.width
        if end <= math.pi:
            return [(self.start, end)]
        return [(self.start, math.pi), (-math.pi, end - TWO_PI)]


def _normalize(pieces: Iterable[Piece]) -> Tuple[Piece, ...]:
    """Sort, clip and merge linear pieces into the canonical disjoint form."""
    clipped = []
    for lo, hi in pieces:
        lo = max(lo, -math.pi)
        hi = min(hi, math.pi)
        if hi > lo:
            clipped.append((lo, hi))
    clipped.sort()

    merged: List[Piece] = []
    for lo, hi in clipped:
        if merged and lo <= merged[-1][1] + MERGE_TOL:
            prev_lo, prev_hi = merged[-1]
            merged[-1] = (prev_lo, max(prev_hi, hi))
        else:
            merged.append((lo, hi))
    return tuple(merged)


class AngularIntervalSet:
    """
    A finite union of disjoint arcs on the circle.

    Internally the set is a sorted tuple of disjoint linear pieces of [-pi, pi];
    an arc crossing the pi/-pi seam is one piece at each end. The canonical arc
    view (`arcs`) merges those two back into a single wrap arc, so equal sets
    have equal representations regardless of how they were built.
    """

    __slots__ = ("_pieces",)

    def __init__(self, arcs: Iterable[Arc] = ()):
        pieces: List[Piece] = []
        for arc in arcs:
            pieces.extend(arc.pieces())
        self._pieces = _normalize(pieces)

    @classmethod
    def _from_pieces(cls, pieces: Iterable[Piece]) -> "AngularIntervalSet":
        instance = cls.__new__(cls)
        instance._pieces = _normalize(pieces)
        return instance

    @classmethod
    def empty(cls) -> "AngularIntervalSet":
        return cls()

    @classmethod
    def full(cls) -> "AngularIntervalSet":
        return cls._from_pieces([(-math.pi, math.pi)])

    @classmethod
    def from_arc(cls, arc: Arc) -> "AngularIntervalSet":
        return cls([arc])

    @property
    def pieces(self) -> Tuple[Piece, ...]:
        return self._pieces

    @property
    def arcs(self) -> Tuple[Arc, ...]:
        pieces = self._pieces
        if not pieces:
            return ()
        if self.is_full():
            return (Arc(math.pi, TWO_PI),)
        wraps = (
            len(pieces) > 1
            and pieces[0][0] <= -math.pi + MERGE_TOL
            and pieces[-1][1] >= math.pi - MERGE_TOL
        )
        if not wraps:
            return tuple(Arc(lo, hi - lo) for lo, hi in pieces)
        inner = [Arc(lo, hi - lo) for lo, hi in pieces[1:-1]]
        wrap_lo = pieces[-1][0]
        wrap = Arc(wrap_lo, (math.pi - wrap_lo) + (pieces[0][1] + math.pi))
        return tuple(inner + [wrap])

    @property
    def measure(self) -> float:
        return sum(hi - lo for lo, hi in self._pieces)

    def is_empty(self) -> bool:
        return not self._pieces

    def is_full(self) -> bool:
        return self.measure >= TWO_PI - MERGE_TOL * 4

    def contains(self, angle: float, tol: float = EQ_TOL) -> bool:
        a = wrap_angle(angle)
        candidates = (a, a - TWO_PI) if a > math.pi - tol else (a,)
        for lo, hi in self._pieces:
            for c in candidates:
                if lo - tol <= c <= hi + tol:
                    return True
        return False

    def complement(self) -> "AngularIntervalSet":
        gaps: List[Piece] = []
        previous = -math.pi
        for lo, hi in self._pieces:
            if lo - previous > MERGE_TOL:
                gaps.append((previous, lo))
            previous = hi
        if math.pi - previous > MERGE_TOL:
            gaps.append((previous, math.pi))
        return AngularIntervalSet._from_pieces(gaps)

    def union(self, other: "AngularIntervalSet") -> "AngularIntervalSet":
        return AngularIntervalSet._from_pieces(self._pieces + other._pieces)

    def intersection(self, other: "AngularIntervalSet") -> "AngularIntervalSet":
        result: List[Piece] = []
        a, b = self._pieces, other._pieces
        i = j = 0
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if hi > lo:
                result.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return AngularIntervalSet._from_pieces(result)

    def difference(self, other: "AngularIntervalSet") -> "AngularIntervalSet":
        if other.is_empty():
            return self
        return self.intersection(other.complement())

    def issubset(self, other: "AngularIntervalSet", tol: float = EQ_TOL) -> bool:
        return self.difference(other).measure <= tol

    def boundaries(self) -> List[float]:
        """Start and end angles of every canonical arc (none for the full circle)."""
        if self.is_full():
            return []
        bounds: List[float] = []
        for arc in self.arcs:
            bounds.append(arc.start)
            bounds.append(wrap_angle(arc.end))
        return bounds

    def distance_to_boundary(self, angle: float) -> float:
        bounds = self.boundaries()
        if not bounds:
            return math.inf
        return min(abs(angle_diff(angle, b)) for b in bounds)

    def sample(self, rng: np.random.Generator) -> float:
        """Draw a heading uniformly with respect to arc length."""
        total = self.measure
        if total <= 0.0:
            raise ValueError("Cannot sample from an empty interval set")
        u = rng.uniform(0.0, total)
        for lo, hi in self._pieces:
            length = hi - lo
            if u <= length:
                return wrap_angle(lo + u)
            u -= length
        return wrap_angle(self._pieces[-1][1])

    __or__ = union
    __and__ = intersection
    __sub__ = difference

    def __bool__(self) -> bool:
        return bool(self._pieces)

    def __len__(self) -> int:
        return len(self.arcs)

    def __iter__(self) -> Iterator[Arc]:
        return iter(self.arcs)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AngularIntervalSet):
            return NotImplemented
        if len(self._pieces) != len(other._pieces):
            return False
        return all(
            abs(p[0] - q[0]) <= EQ_TOL and abs(p[1] - q[1]) <= EQ_TOL
            for p, q in zip(self._pieces, other._pieces)
        )

    __hash__ = None

    def __repr__(self) -> str:
        arcs = ", ".join(f"[{a.start:.6f}, {a.end:.6f}]" for a in self.arcs)
        return f"AngularIntervalSet({{{arcs}}})"


@dataclass(frozen=True)
class WallSegment:
    """A static wall modelled as a line segment."""
    a: Vec2
    b: Vec2

    def __post_init__(self):
        if self.a.distance_to(self.b) < MERGE_TOL:
            raise DegenerateWallError(
                "Wall endpoints coincide",
                {"a": self.a.as_tuple(), "b": self.b.as_tuple()}
            )

    @property
    def length(self) -> float:
        return self.a.distance_to(self.b)

    def direction(self) -> Vec2:
        d = self.b - self.a
        return d * (1.0 / d.norm())

    def normal(self) -> Vec2:
        d = self.direction()
        return Vec2(-d.y, d.x)

    def offset(self, distance: float) -> Tuple[Vec2, Vec2]:
        """Endpoints of the parallel segment shifted by `distance` along the normal."""
        n = self.normal() * distance
        return self.a + n, self.b + n

    def distance_to(self, point: Vec2) -> float:
        return float(point_segment_distance(point.as_array(), self.a.as_array(), self.b.as_array()))


def point_segment_distance(points: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distance from each point (..., 2) to the segment [a, b]."""
    ab = b - a
    denom = float(ab @ ab)
    ap = points - a
    if denom <= 0.0:
        return np.linalg.norm(ap, axis=-1)
    t = np.clip((ap @ ab) / denom, 0.0, 1.0)
    closest = a + np.expand_dims(t, -1) * ab
    return np.linalg.norm(points - closest, axis=-1)


def _cross(u: np.ndarray, v: np.ndarray) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def segment_segment_distance(p0: np.ndarray, p1: np.ndarray, q0: np.ndarray, q1: np.ndarray) -> float:
    """Exact distance between segments [p0, p1] and [q0, q1]."""
    r = p1 - p0
    s = q1 - q0
    denom = _cross(r, s)
    if abs(denom) > 1e-15:
        t = _cross(q0 - p0, s) / denom
        u = _cross(q0 - p0, r) / denom
        if 0.0 <= t <= 1.0 and 0.0 <= u <= 1.0:
            return 0.0
    return float(min(
        point_segment_distance(p0, q0, q1),
        point_segment_distance(p1, q0, q1),
        point_segment_distance(q0, p0, p1),
        point_segment_distance(q1, p0, p1),
    ))


def clip_segment_to_disc(a: Vec2, b: Vec2, center: Vec2, radius: float) -> Optional[Tuple[Vec2, Vec2]]:
    """Part of the segment [a, b] inside the closed disc, or None."""
    d = b - a
    f = a - center
    qa = d.dot(d)
    qb = 2.0 * f.dot(d)
    qc = f.dot(f) - radius * radius
    disc = qb * qb - 4.0 * qa * qc
    if qa <= 0.0 or disc < 0.0:
        return None
    root = math.sqrt(disc)
    t0 = max((-qb - root) / (2.0 * qa), 0.0)
    t1 = min((-qb + root) / (2.0 * qa), 1.0)
    if t1 < t0:
        return None
    return a + d * t0, a + d * t1
