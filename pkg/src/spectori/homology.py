"""Concrete contours for the cycles a_i, b_i, the open curves c_{+1}, c_{-1},
and the large circle |z| = mu.

Layout on each quotient curve.  The branch points are threaded on a simple
polygonal chain e_1 -> e_2 -> ... -> e_{2g+1} so that every a-pair is a link
(e_{2k-1}, e_{2k}).  Then

* a_k is a thin stadium around that link;
* b_k is the boundary of a tube around the sub-chain e_{2k} ... e_{2g+1}.

The tubes are nested with decreasing width, so b-cycles never meet each other
and b_k meets only a_k.  Orientation of b_k is fixed by a_k . b_k = +1, which
is checked by explicit crossing counts on the lifted polylines.
"""

from __future__ import annotations

import csv
import heapq
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from shapely.geometry import LineString, Point

from .analytic import _branch_points, _ratio_sqrt, continue_fiber
from .errors import SpectralError
from .geometry import Family, ModuliPoint, QuotientCurve, Sign, quotient_curves
from .paths import PlanarPath, Segment, polygon_path, rotate_closed, signed_area, stadium


@dataclass(frozen=True)
class LiftedCycle:
    """A planar path plus the value of w where continuation starts."""

    path: PlanarPath
    start_fiber: complex
    label: str
    curve_sign: Optional[Sign]
    family: Optional[Family] = None


@dataclass
class CycleSystem:
    a_cycles: list
    b_cycles: list
    open_curves: dict
    intersection: np.ndarray
    curve: QuotientCurve
    chain: list = field(default_factory=list)
    delta: float = 0.0


# ----------------------------------------------------------------------
# sheet rules
# ----------------------------------------------------------------------
def sheet_unit(family: Family, sign: Sign) -> complex:
    """Unit u such that the chosen lift has w/u > 0 on the real axis in (-2, 2).

    These are the lift rules for the a-cycles at their upward real crossing.
    """
    if family is Family.ODD:
        return -1j if sign is Sign.PLUS else 1.0
    return 1.0 if sign is Sign.PLUS else 1j


def open_curve_unit(family: Family) -> complex:
    # ODD: w_+/i > 0 at the start of c_{+1}, c_{-1} (see the decisions log);
    # EVEN: w_+ > 0 at the start of c_1 and w_-/i > 0 at the start of c_{-1}.
    return 1j


def pick_fiber(pts, z: complex, unit: complex, node: Optional[complex] = None) -> complex:
    """Root w of prod(z - e) with Re(w/unit) > 0.

    With ``node`` set the rule is applied to (z - node) w, the limit of w on
    the nearby smooth curves where the node is a close pair of branch points.
    """
    if node is not None:
        unit = unit / (z - node)
    p = complex(np.prod([z - e for e in pts])) if len(pts) else 1.0 + 0j
    w = complex(np.sqrt(p))
    val = (w / unit).real
    if val < 0 or (val == 0 and (w / unit).imag < 0):
        w = -w
    return w


# ----------------------------------------------------------------------
# chain construction
# ----------------------------------------------------------------------
def _pairs(lambdas) -> list:
    return [(lambdas[2 * i], lambdas[2 * i + 1], i) for i in range(len(lambdas) // 2)]


def chain_order(family: Family, sign: Sign, R, lambdas) -> tuple:
    """Branch points in chain order, plus the pair index of each a-link.

    Returns (points, pair_labels) where pair_labels[k] is the lambda-pair
    index of link (points[2k], points[2k+1]) or -1 for the link (2, R).
    """
    pairs = _pairs(list(lambdas))
    inc = sorted(pairs, key=lambda t: ((t[0] + t[1]) / 2).real)
    dec = list(reversed(inc))
    pts, labels = [], []
    if family is Family.ODD and sign is Sign.PLUS:
        for a, b, i in inc:
            pts += [a, b]
            labels.append(i)
        pts.append(complex(R))
    elif family is Family.ODD:
        pts += [2 + 0j, complex(R)]
        labels.append(-1)
        for a, b, i in dec:
            pts += [a, b]
            labels.append(i)
        pts.append(-2 + 0j)
    elif sign is Sign.PLUS:
        for a, b, i in dec:
            pts += [a, b]
            labels.append(i)
        pts.append(-2 + 0j)
    else:
        for a, b, i in inc:
            pts += [a, b]
            labels.append(i)
        pts.append(2 + 0j)
    return pts, labels


# links keep this many clearances from other branch points and from the chain
ROUTE_GAP = 2.5


def _route(pts: list, clearance: float) -> list:
    """Chain vertices, with detours where a straight link would graze a branch
    point or the chain drawn so far.  The result is a simple polyline.

    Each entry is (z, branch_index or None).
    """
    allpts = np.array(pts, dtype=complex)
    height = float(np.max(np.abs(allpts.imag))) + 1.0
    gap = ROUTE_GAP * clearance
    out = [(pts[0], 0)]
    for k in range(len(pts) - 1):
        a, b = pts[k], pts[k + 1]
        # points sitting on top of an endpoint (a collapsed pair partner) are ignored
        others = [e for j, e in enumerate(pts) if j not in (k, k + 1)
                  and min(abs(e - a), abs(e - b)) > 0.5 * clearance]
        blocked = _drawn_obstacle([z for z, _ in out], a, clearance)
        if k % 2 and k + 2 < len(pts):
            # b-links leave room for the next link to depart from b; a-links
            # stay straight when they can, so the a-cycles cross the real axis
            ahead = _drawn_obstacle([pts[k + 2], b], b, clearance)
            if ahead is not None:
                # it may run back past a, where the link has to start
                ahead = ahead.difference(Point(a.real, a.imag).buffer(3 * clearance))
            if ahead is not None and not ahead.is_empty:
                blocked = ahead if blocked is None else blocked.union(ahead)

        def clear(route, obstacle):
            segs = [Segment.line(x, y) for x, y in zip(route[:-1], route[1:])]
            if not all(sg.distance_to(e) > gap for sg in segs for e in others):
                return False
            if obstacle is None:
                return True
            line = LineString([(z.real, z.imag) for z in route])
            return line.distance(obstacle) > gap

        route = None
        if k % 2 == 0 and len(out) > 1:
            # a straight a-link may hug the segment it continues (a V shape
            # thickens without holes) as long as it does not fold back on it
            drawn = [z for z, _ in out]
            turn = abs(np.angle((b - a) / (drawn[-2] - a)))
            if turn > math.pi / 9 and clear([a, b], _drawn_obstacle(drawn[:-1], a, clearance)):
                route = [a, b]
        if route is None:
            candidates = [[a, b]] + [[a, a.real + side * height, b.real + side * height, b] for side in (1j, -1j)]
            route = next((r for r in candidates if clear(r, blocked)), None)
        if route is None:
            route = _visibility_route(a, b, others, blocked, clearance, height)
        out += [(z, None) for z in route[1:-1]] + [(b, k + 1)]
    return out


def _drawn_obstacle(drawn: list, a: complex, clearance: float):
    """The chain drawn so far, minus a small disc at its current end a."""
    if len(drawn) < 2:
        return None
    geom = LineString([(z.real, z.imag) for z in drawn]).difference(Point(a.real, a.imag).buffer(3 * clearance))
    return None if geom.is_empty else geom


def _visibility_route(a: complex, b: complex, others: list, blocked, clearance: float,
                      height: float) -> list:
    """Shortest polyline from a to b through waypoints ringed round the obstacles."""
    gap = ROUTE_GAP * clearance
    ring = 4 * clearance
    nodes = [a, b]
    for e in list(others) + [a, b]:
        nodes += [e + ring * np.exp(2j * math.pi * j / 16) for j in range(16)]
        nodes += [e.real + dx + 1j * h for dx in (-ring, ring) for h in (height, -height)]
    if blocked is not None:
        # waypoints on both sides of every drawn vertex
        coords = []
        for g in getattr(blocked, "geoms", [blocked]):
            coords += list(g.coords)
        for x, y in coords:
            nodes += [complex(x, y) + 1.2 * gap * np.exp(2j * math.pi * j / 8) for j in range(8)]
    nodes = nodes[:2] + [z for z in nodes[2:] if all(abs(z - e) > gap * 1.01 for e in others)]

    cache = {}

    def visible(i, j):
        key = (min(i, j), max(i, j))
        if key not in cache:
            seg = Segment.line(nodes[i], nodes[j])
            ok = all(seg.distance_to(e) > gap for e in others)
            if ok and blocked is not None:
                line = LineString([(nodes[i].real, nodes[i].imag), (nodes[j].real, nodes[j].imag)])
                ok = line.distance(blocked) > gap
            cache[key] = ok
        return cache[key]

    dist = {0: 0.0}
    prev = {}
    heap = [(0.0, 0)]
    done = set()
    while heap:
        d, i = heapq.heappop(heap)
        if i in done:
            continue
        done.add(i)
        if i == 1:
            break
        for j in range(len(nodes)):
            if j in done or not visible(i, j):
                continue
            nd = d + abs(nodes[j] - nodes[i])
            if nd < dist.get(j, math.inf):
                dist[j] = nd
                prev[j] = i
                heapq.heappush(heap, (nd, j))
    if 1 not in prev:
        raise SpectralError("DEGENERATE", "cannot route the branch chain")
    path = [1]
    while path[-1] != 0:
        path.append(prev[path[-1]])
    return [nodes[i] for i in reversed(path)]


def _tube(vertices: list, width: float) -> PlanarPath:
    """Counter-clockwise boundary of the width-neighbourhood of a polyline."""
    if len(vertices) == 1:
        c = vertices[0]
        return PlanarPath((Segment.arc(c, width, math.pi, 2 * math.pi),), closed=True)
    line = LineString([(z.real, z.imag) for z in vertices])
    poly = line.buffer(width, quad_segs=48)
    if poly.geom_type != "Polygon" or len(poly.interiors) > 0:
        raise SpectralError("DEGENERATE", "tube around the branch chain is not simply connected")
    xs, ys = poly.exterior.coords.xy
    ring = [complex(x, y) for x, y in zip(xs, ys)]
    path = polygon_path(ring)
    if signed_area(path) < 0:
        path = path.reversed()
    return path


def default_delta(p: ModuliPoint) -> float:
    pts = _all_points(p)
    sep = min(abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1:])
    return 0.1 * sep


def _all_points(p: ModuliPoint) -> list:
    pts = [2 + 0j, -2 + 0j] + list(p.lambdas)
    if p.R is not None:
        pts.append(complex(p.R))
    return pts


def _min_separation(p: ModuliPoint) -> float:
    pts = _all_points(p)
    return min(abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1:])


# ----------------------------------------------------------------------
# crossing counts
# ----------------------------------------------------------------------
class _Sampler:
    """Dense polyline of a lifted cycle with w attached to every vertex."""

    def __init__(self, cycle: LiftedCycle, pts):
        track = continue_fiber(pts, cycle.path, cycle.start_fiber)
        zs, ws = [], []
        for pnl in track.panels:
            if pnl.singular is not None:
                continue
            m = 16 if pnl.seg.kind == "arc" else 2
            s = np.linspace(pnl.s0, pnl.s1, m)
            z = pnl.seg.point(s)
            w = pnl.w_ref * _ratio_sqrt(pts, z, pnl.z_ref)
            zs.append(z)
            ws.append(w)
        self.z = np.concatenate(zs)
        self.w = np.concatenate(ws)


def intersection_number(c1: LiftedCycle, c2: LiftedCycle, pts) -> int:
    """Signed count of transverse crossings where both lifts sit on the same sheet."""
    s1 = _Sampler(c1, pts)
    s2 = _Sampler(c2, pts)
    a0, a1 = s1.z[:-1], s1.z[1:]
    b0, b1 = s2.z[:-1], s2.z[1:]
    da = a1 - a0
    db = b1 - b0
    total = 0
    for i in range(len(a0)):
        if da[i] == 0:
            continue
        cross = (np.conj(da[i]) * db).imag
        rel = b0 - a0[i]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (np.conj(rel) * db).imag / cross
            u = (np.conj(rel) * da[i]).imag / cross
        hit = (cross != 0) & (t >= 0) & (t < 1) & (u >= 0) & (u < 1)
        for j in np.nonzero(hit)[0]:
            wa = s1.w[i] + (s1.w[i + 1] - s1.w[i]) * t[j]
            wb = s2.w[j] + (s2.w[j + 1] - s2.w[j]) * u[j]
            if abs(wa - wb) < abs(wa + wb):
                total += 1 if cross[j] > 0 else -1
    return total


# ----------------------------------------------------------------------
# main constructor
# ----------------------------------------------------------------------
def _layout(p: ModuliPoint, sign: Sign, delta: Optional[float]) -> tuple:
    """(layout point, integration points, delta, skipped pair label).

    A nodal point (nu = 0) is laid out as if the collapsed pair sat at
    mu +- i nu_lay with nu_lay well inside the tubes, while integration runs
    on the normalisation.  Its own a-cycle is skipped.
    """
    if p.is_degenerate:
        base = p.base()
        plus, minus = quotient_curves(base)
        curve = plus if sign is Sign.PLUS else minus
        allp = _all_points(base) + [complex(p.mu)]
        sep = min(abs(a - b) for i, a in enumerate(allp) for b in allp[i + 1:])
        if delta is None:
            delta = 0.1 * sep
        if not 0 < delta < 0.5 * sep:
            raise SpectralError("CLEARANCE", f"delta={delta:.3e} must be below half the separation {sep:.3e}")
        lay = p.with_coordinates(nu=0.1 * delta).expanded()
        return lay, curve, delta, base.n
    q = p.expanded() if p.mu is not None else p
    plus, minus = quotient_curves(q)
    curve = plus if sign is Sign.PLUS else minus
    sep = _min_separation(q)
    if delta is None:
        delta = 0.1 * sep
    if not 0 < delta < 0.5 * sep:
        raise SpectralError("CLEARANCE", f"delta={delta:.3e} must be below half the separation {sep:.3e}")
    return q, curve, delta, None


def canonical_contours(p: ModuliPoint, sign: Sign, delta: Optional[float] = None) -> CycleSystem:
    """Cycle system on C_+ (sign PLUS) or C_- (sign MINUS).

    A point carrying (mu, nu != 0) is expanded to its genuine (n+1)-point; a
    nodal point (nu = 0) is handled on its normalisation, i.e. on p itself,
    with the old cycles drawn exactly as for small nu > 0.

    With the default clearance, crowded configurations are retried with the
    clearance halved (up to five times); periods do not depend on it.
    """
    if delta is not None:
        return _build_contours(p, sign, delta)
    base = _layout(p, sign, None)[2]
    for k in range(6):
        try:
            return _build_contours(p, sign, base / 2 ** k if k else None)
        except SpectralError as exc:
            if exc.code not in ("DEGENERATE", "CLEARANCE") or k == 5:
                raise


def _build_contours(p: ModuliPoint, sign: Sign, delta: Optional[float]) -> CycleSystem:
    q, curve, delta, skip = _layout(p, sign, delta)
    if q.real_form:
        for lam in q.lambdas[::2]:
            if not (-2 + delta < lam.real - delta and lam.real + delta < 2 - delta):
                raise SpectralError("DEGENERATE", f"pair at {lam} too close to +-2 for real crossings")
    pts = list(curve.smooth_branch_points)
    node = complex(p.mu) if p.is_degenerate else None
    family = q.family
    order, labels = chain_order(family, sign, q.R, q.lambdas)
    route = _route(order, delta)
    vertices = [z for z, _ in route]
    where = {idx: k for k, (_, idx) in enumerate(route) if idx is not None}

    g = len(labels)
    unit = sheet_unit(family, sign)
    a_width = 0.5 * delta
    a_by_label, b_by_label = {}, {}
    for k, lab in enumerate(labels):
        if lab == skip:
            continue
        e0, e1 = order[2 * k], order[2 * k + 1]
        link = vertices[where[2 * k]:where[2 * k + 1] + 1]
        # a detoured link gets a thin tube instead of a straight stadium
        loop = stadium(e0, e1, a_width) if len(link) == 2 else _tube(link, a_width)
        poly = loop.polyline()
        mid = 0.5 * (e0 + e1)
        target = complex(float(np.max(poly.real)), mid.imag)
        if len(link) > 2:
            # start a tube on its rightmost crossing of the line through mid
            ring = LineString([(z.real, z.imag) for z in poly])
            across = LineString([(float(np.min(poly.real)) - 1, mid.imag), (target.real + 1, mid.imag)])
            hits = ring.intersection(across)
            xs = [c[0] for g in getattr(hits, "geoms", [hits]) for c in g.coords] if not hits.is_empty else []
            if xs:
                target = complex(max(xs), mid.imag)
        loop = rotate_closed(loop, target)
        w0 = pick_fiber(pts, loop.start, unit, node)
        a_by_label[lab] = LiftedCycle(loop, w0, f"A({lab + 1 if lab >= 0 else 0})", sign, family)

        width = delta * (0.5 + 0.5 * (g - k) / g)
        sub = vertices[where[2 * k + 1]:]
        tube = _tube(sub, width)
        wb = pick_fiber(pts, tube.start, 1.0)
        b_by_label[lab] = LiftedCycle(tube, wb, f"B({lab + 1 if lab >= 0 else 0})", sign, family)

    keys = sorted(a_by_label)  # -1 (the (2,R) link) first, then pair indices
    a_list = [a_by_label[k] for k in keys]
    b_list = []
    for k in keys:
        b = b_by_label[k]
        s = intersection_number(a_by_label[k], b, pts)
        if s == -1:
            b = LiftedCycle(b.path.reversed(), b.start_fiber, b.label, sign, family)
        elif s != 1:
            raise SpectralError("DEGENERATE", f"a.b = {s} for {b.label}")
        b_list.append(b)

    for cyc in a_list + b_list:
        if cyc.path.clearance(pts) < 0.45 * delta:
            raise SpectralError("CLEARANCE", f"{cyc.label} passes too close to a branch point")

    inter = intersection_matrix(a_list, b_list, pts)
    open_curves = _open_curves(q, sign, pts, delta, node)
    return CycleSystem(a_list, b_list, open_curves, inter, curve, vertices, delta)


def intersection_matrix(a_list, b_list, pts) -> np.ndarray:
    cycles = list(a_list) + list(b_list)
    m = len(cycles)
    out = np.zeros((m, m), dtype=int)
    for i in range(m):
        for j in range(i + 1, m):
            v = intersection_number(cycles[i], cycles[j], pts)
            out[i, j] = v
            out[j, i] = -v
    return out


def is_symplectic(mat: np.ndarray) -> bool:
    g = mat.shape[0] // 2
    ref = np.zeros_like(mat)
    ref[:g, g:] = np.eye(g, dtype=int)
    ref[g:, :g] = -np.eye(g, dtype=int)
    return bool(np.array_equal(mat, ref))


# ----------------------------------------------------------------------
# open curves and circles
# ----------------------------------------------------------------------
def _loop_from(base: complex, pts, radius: float, preferred: complex) -> PlanarPath:
    """Loop from ``base`` out along a ray, once round |z| = radius, and back."""
    best = None
    for k in range(16):
        d = preferred * np.exp(1j * math.pi * k / 8) if k else preferred
        d = complex(d) / abs(d)
        # ray base + t d meets the circle at t > 0
        b = (base * d.conjugate()).real
        t = -b + math.sqrt(b * b - abs(base) ** 2 + radius ** 2)
        end = base + t * d
        seg = Segment.line(base, end)
        clear = min((seg.distance_to(e) for e in pts), default=math.inf)
        if best is None or clear > best[0] + 1e-12:
            best = (clear, end)
        if k == 0 and clear > 1e-3 * radius:
            break
    end = best[1]
    theta = math.atan2(end.imag, end.real)
    segs = (Segment.line(base, end), Segment.arc(0j, radius, theta, 2 * math.pi), Segment.line(end, base))
    return PlanarPath(segs, closed=False)


def _open_curves(q: ModuliPoint, sign: Sign, pts, delta: float, node=None) -> dict:
    family = q.family
    out = {}
    big = max([abs(e) for e in pts] + [2.0]) + 1.0
    if family is Family.ODD:
        if sign is not Sign.PLUS:
            return out
        R = q.R
        rho = delta
        segs = (Segment.line(2.0, R - rho), Segment.arc(R, rho, math.pi, 2 * math.pi),
                Segment.line(R - rho, 2.0))
        path1 = PlanarPath(segs, closed=False)
        path2 = _loop_from(-2 + 0j, pts, big, -1)
        unit = open_curve_unit(family)
        out["C(+1)"] = LiftedCycle(path1, pick_fiber(pts, 2.0, unit, node), "C(+1)", sign, family)
        out["C(-1)"] = LiftedCycle(path2, pick_fiber(pts, -2.0, unit, node), "C(-1)", sign, family)
        for c in out.values():
            if c.path.clearance(pts) < 0.45 * delta:
                raise SpectralError("DEGENERATE", f"{c.label} cannot keep clear of the branch points")
    elif sign is Sign.PLUS:
        path = _loop_from(2 + 0j, pts, big, 1)
        out["C(+1)"] = LiftedCycle(path, pick_fiber(pts, 2.0, 1.0, node), "C(+1)", sign, family)
    else:
        path = _loop_from(-2 + 0j, pts, big, -1)
        out["C(-1)"] = LiftedCycle(path, pick_fiber(pts, -2.0, 1j, node), "C(-1)", sign, family)
    return out


def large_circle(p: ModuliPoint, mu: float, sign: Sign = Sign.PLUS, orientation: str = "CW") -> LiftedCycle:
    """The circle |z| = mu on the normalised curve, starting at z = mu.

    The start sheet is the one on which w ~ +z^(deg/2) for real z -> +infinity.
    Every quotient polynomial has odd degree, so going once round ends on the
    other sheet, at the second preimage of z = mu.  Those two preimages are
    identified in the nodal curve with a node at mu, where the lift is closed.
    """
    base = p.base()
    plus, minus = quotient_curves(base)
    curve = plus if sign is Sign.PLUS else minus
    pts = list(curve.smooth_branch_points)
    if mu <= max(abs(e) for e in pts) * (1 + 1e-9):
        raise SpectralError("TOO_SMALL", f"|z| = {mu} does not enclose every branch point")
    sweep = -2 * math.pi if orientation.upper() == "CW" else 2 * math.pi
    path = PlanarPath((Segment.arc(0j, mu, 0.0, sweep),), closed=True)
    d = len(pts)
    w0 = pick_fiber(pts, complex(mu), complex(mu) ** (d / 2) / abs(complex(mu) ** (d / 2)))
    return LiftedCycle(path, w0, "GAMMA_CIRCLE", sign, base.family)


def node_path(p: ModuliPoint, sign: Sign, delta: Optional[float] = None) -> LiftedCycle:
    """Open path on the normalisation representing b_{n+1} of the nodal point (p, mu, 0).

    It leaves the node at z = mu along the chain link that the collapsed pair
    occupies, runs once round the tube of the remaining sub-chain and returns
    to mu on the opposite sheet.  The direction is chosen so that a small
    circle round mu, lifted by the a-cycle sheet rule, meets it with index +1;
    that circle is the limit of a_{n+1}.
    """
    if p.mu is None:
        raise SpectralError("DEGENERATE", "node_path needs a point with mu set")
    nodal = p.with_coordinates(nu=0.0)
    lay, curve, delta, _ = _layout(nodal, sign, delta)
    pts = list(curve.smooth_branch_points)
    mu = complex(p.mu)
    order, labels = chain_order(lay.family, sign, lay.R, lay.lambdas)
    lower = complex(lay.lambdas[-1])
    node_pos = next(k for k, z in enumerate(order) if abs(z - lower) < 1e-15)
    g = len(labels)
    k_link = node_pos // 2
    width = delta * (0.5 + 0.5 * (g - k_link) / g)
    route = _route([mu] + [complex(z) for z in order[node_pos + 1:]], delta)
    vertices = [z for z, _ in route]
    tube = _tube(vertices[1:], width)
    first = vertices[1]
    u = (first - mu) / abs(first - mu)
    tube = rotate_closed(tube, first - width * u)
    anchor = tube.start
    segs = (Segment.line(mu, anchor),) + tuple(tube.segments) + (Segment.line(anchor, mu),)
    path = PlanarPath(segs, closed=False)
    if path.clearance(pts) < 0.45 * delta:
        raise SpectralError("CLEARANCE", "node path passes too close to a branch point")
    unit = sheet_unit(lay.family, sign)
    w0 = pick_fiber(pts, mu, 1.0)
    lasso = LiftedCycle(path, w0, f"B({lay.n})", sign, lay.family)
    r = 0.25 * delta
    circle = PlanarPath((Segment.arc(mu, r, 0.0, 2 * math.pi),), closed=True)
    ring = LiftedCycle(circle, pick_fiber(pts, mu + r, unit), "A_NODE", sign, lay.family)
    s = intersection_number(ring, lasso, pts)
    if s == -1:
        track = continue_fiber(pts, path, w0)
        lasso = LiftedCycle(path.reversed(), track.end[1], lasso.label, sign, lay.family)
    elif s != 1:
        raise SpectralError("DEGENERATE", f"node circle meets the node path {s} times")
    return lasso


# ----------------------------------------------------------------------
# involutions and export
# ----------------------------------------------------------------------
def involution_image(c: LiftedCycle, which: str) -> LiftedCycle:
    """Image under the sheet swap (SIGMA) or the real structure (RHO)."""
    which = which.upper()
    if which == "SIGMA":
        return LiftedCycle(c.path, -c.start_fiber, c.label, c.curve_sign, c.family)
    if which == "RHO":
        if c.family is Family.ODD:
            factor = -1.0 if c.curve_sign is Sign.PLUS else 1.0
        else:
            factor = 1.0 if c.curve_sign is Sign.PLUS else -1.0
        return LiftedCycle(c.path.conjugated(), factor * c.start_fiber.conjugate(),
                           c.label, c.curve_sign, c.family)
    raise ValueError(f"unknown involution {which}")


def rho_factor(family: Family, sign: Sign) -> float:
    """rho^* Omega = factor * conj(Omega) for the real structure on C_sign."""
    if family is Family.ODD:
        return -1.0 if sign is Sign.PLUS else 1.0
    return 1.0 if sign is Sign.PLUS else -1.0


def dump_contours(systems: list) -> str:
    """CSV of polylines: curve, label, vertex index, Re z, Im z."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["curve", "label", "index", "re", "im"])
    for sysm in systems:
        name = sysm.curve.sign.value
        cycles = list(sysm.a_cycles) + list(sysm.b_cycles) + list(sysm.open_curves.values())
        for cyc in cycles:
            for k, z in enumerate(cyc.path.polyline()):
                writer.writerow([name, cyc.label, k, f"{z.real:.12g}", f"{z.imag:.12g}"])
    return buf.getvalue()
