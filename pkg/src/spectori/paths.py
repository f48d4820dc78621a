"""Planar paths built from line segments and circular arcs."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Segment:
    """A line (``a`` -> ``b``) or an arc around ``center`` from ``theta0`` by ``sweep``."""

    kind: str
    a: complex = 0j
    b: complex = 0j
    center: complex = 0j
    radius: float = 0.0
    theta0: float = 0.0
    sweep: float = 0.0

    @staticmethod
    def line(a: complex, b: complex) -> "Segment":
        return Segment("line", a=complex(a), b=complex(b))

    @staticmethod
    def arc(center: complex, radius: float, theta0: float, sweep: float) -> "Segment":
        c = complex(center)
        return Segment("arc", a=c + radius * cmath.exp(1j * theta0),
                       b=c + radius * cmath.exp(1j * (theta0 + sweep)),
                       center=c, radius=float(radius), theta0=float(theta0), sweep=float(sweep))

    def point(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "line":
            return self.a + (self.b - self.a) * s
        return self.center + self.radius * np.exp(1j * (self.theta0 + self.sweep * s))

    def velocity(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "line":
            return np.full(s.shape, self.b - self.a, dtype=complex)
        return 1j * self.sweep * self.radius * np.exp(1j * (self.theta0 + self.sweep * s))

    def sub(self, s0: float, s1: float) -> "Segment":
        if self.kind == "line":
            return Segment.line(complex(self.point(s0)), complex(self.point(s1)))
        return Segment.arc(self.center, self.radius, self.theta0 + self.sweep * s0,
                           self.sweep * (s1 - s0))

    def reversed(self) -> "Segment":
        if self.kind == "line":
            return Segment.line(self.b, self.a)
        return Segment.arc(self.center, self.radius, self.theta0 + self.sweep, -self.sweep)

    def conjugated(self) -> "Segment":
        if self.kind == "line":
            return Segment.line(self.a.conjugate(), self.b.conjugate())
        return Segment.arc(self.center.conjugate(), self.radius, -self.theta0, -self.sweep)

    @property
    def length(self) -> float:
        if self.kind == "line":
            return abs(self.b - self.a)
        return abs(self.sweep) * self.radius

    def distance_to(self, e: complex) -> float:
        if self.kind == "line":
            d = self.b - self.a
            if d == 0:
                return abs(e - self.a)
            t = ((e - self.a) * d.conjugate()).real / abs(d) ** 2
            t = min(1.0, max(0.0, t))
            return abs(e - (self.a + t * d))
        # arc: closest point on the full circle, clipped to the swept range
        ang = cmath.phase(e - self.center) if e != self.center else self.theta0
        lo, hi = sorted((self.theta0, self.theta0 + self.sweep))
        k = math.floor((ang - lo) / (2 * math.pi))
        ang -= 2 * math.pi * k
        if lo <= ang <= hi:
            return abs(abs(e - self.center) - self.radius)
        return min(abs(e - self.a), abs(e - self.b))

    def polyline(self, max_angle: float = math.pi / 64) -> np.ndarray:
        if self.kind == "line":
            return np.array([self.a, self.b])
        m = max(2, int(math.ceil(abs(self.sweep) / max_angle)) + 1)
        return self.point(np.linspace(0.0, 1.0, m))


@dataclass(frozen=True)
class PlanarPath:
    """Ordered segments.  ``branch_start``/``branch_end`` flag endpoints that sit on
    branch points and are therefore exempt from the clearance rule."""

    segments: tuple
    closed: bool = False
    branch_start: bool = False
    branch_end: bool = False

    @property
    def start(self) -> complex:
        return self.segments[0].a

    @property
    def end(self) -> complex:
        return self.segments[-1].b

    @property
    def length(self) -> float:
        return sum(s.length for s in self.segments)

    def reversed(self) -> "PlanarPath":
        return PlanarPath(tuple(s.reversed() for s in reversed(self.segments)), self.closed,
                          self.branch_end, self.branch_start)

    def conjugated(self) -> "PlanarPath":
        return PlanarPath(tuple(s.conjugated() for s in self.segments), self.closed,
                          self.branch_start, self.branch_end)

    def polyline(self) -> np.ndarray:
        pts = [self.segments[0].a]
        for s in self.segments:
            pts.extend(list(s.polyline())[1:])
        return np.array(pts, dtype=complex)

    def clearance(self, points: Sequence[complex]) -> float:
        """Smallest distance from the path to the points, ignoring flagged endpoints."""
        best = math.inf
        for e in points:
            for k, seg in enumerate(self.segments):
                d = seg.distance_to(e)
                at_start = k == 0 and self.branch_start and abs(e - seg.a) < 1e-14 * max(1, abs(e))
                at_end = (k == len(self.segments) - 1 and self.branch_end
                          and abs(e - seg.b) < 1e-14 * max(1, abs(e)))
                if at_start or at_end:
                    continue
                best = min(best, d)
        return best

    def winding_number(self, e: complex) -> int:
        """Argument-principle count of how often a closed path winds around ``e``."""
        total = 0.0
        for seg in self.segments:
            pts = seg.polyline(math.pi / 256) if seg.kind == "arc" else np.array([seg.a, seg.b])
            for z0, z1 in zip(pts[:-1], pts[1:]):
                # split long lines so each piece subtends less than pi
                m = 1
                while True:
                    zs = z0 + (z1 - z0) * np.linspace(0.0, 1.0, m + 1)
                    d = np.angle((zs[1:] - e) / (zs[:-1] - e))
                    if np.all(np.abs(d) < math.pi / 2) or m > 4096:
                        break
                    m *= 2
                total += float(np.sum(d))
        return int(round(total / (2 * math.pi)))


def stadium(p0: complex, p1: complex, width: float, start_at: complex = None) -> PlanarPath:
    """Counter-clockwise stadium around the segment p0 -> p1 at distance ``width``.

    When ``start_at`` is given the loop is rotated to begin at the boundary
    point closest to it.
    """
    p0 = complex(p0)
    p1 = complex(p1)
    d = p1 - p0
    u = d / abs(d)
    nrm = u * 1j  # left normal
    ang = cmath.phase(u)
    segs = [
        Segment.line(p0 - nrm * width, p1 - nrm * width),
        Segment.arc(p1, width, ang - math.pi / 2, math.pi),
        Segment.line(p1 + nrm * width, p0 + nrm * width),
        Segment.arc(p0, width, ang + math.pi / 2, math.pi),
    ]
    path = PlanarPath(tuple(segs), closed=True)
    if start_at is not None:
        path = rotate_closed(path, start_at)
    return path


def rotate_closed(path: PlanarPath, target: complex) -> PlanarPath:
    """Rotate a closed path so it starts at the point of it nearest ``target``."""
    best = (math.inf, 0, 0.0)
    for k, seg in enumerate(path.segments):
        s = np.linspace(0.0, 1.0, 401)
        z = seg.point(s)
        j = int(np.argmin(np.abs(z - target)))
        # refine by golden-section style local search
        lo, hi = s[max(j - 1, 0)], s[min(j + 1, 400)]
        for _ in range(60):
            m1 = lo + (hi - lo) / 3
            m2 = hi - (hi - lo) / 3
            if abs(seg.point(m1) - target) < abs(seg.point(m2) - target):
                hi = m2
            else:
                lo = m1
        sm = 0.5 * (lo + hi)
        dist = abs(complex(seg.point(sm)) - target)
        if dist < best[0]:
            best = (dist, k, sm)
    _, k, sm = best
    segs = list(path.segments)
    head, tail = [], []
    if sm > 1e-12:
        tail.append(segs[k].sub(0.0, sm))
    if sm < 1 - 1e-12:
        head.append(segs[k].sub(sm, 1.0))
    new = head + segs[k + 1:] + segs[:k] + tail
    return PlanarPath(tuple(new), closed=True)


def polygon_path(vertices: Sequence[complex]) -> PlanarPath:
    vs = [complex(v) for v in vertices]
    if abs(vs[0] - vs[-1]) > 0:
        vs.append(vs[0])
    segs = tuple(Segment.line(a, b) for a, b in zip(vs[:-1], vs[1:]) if a != b)
    return PlanarPath(segs, closed=True)


def signed_area(path: PlanarPath) -> float:
    pts = path.polyline()
    return 0.5 * float(np.sum((pts[:-1].conj() * pts[1:]).imag))
