"""Finite-depth puzzle graphs for f_a and shallow parameter graphs.

The depth-0 dynamical graph is the image-petal boundary, the angle-0
external ray (plus the angle-1/2 ray inside the wakes), and one external
equipotential; depth-m graphs add every third-preimage of those: external
rays at the 3^m-division angles, the equipotential at the cube-root level,
and branch-tracked pull-backs of the petal boundary.  Bounded arrangement
faces touching the deepest equipotential are the puzzle pieces.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import boettcher, conjugacy, dynamics, model
from .angles import RationalAngle, angles_with_triple_image, zero_preimage_angles
from .arrangement import Arc, Arrangement
from .errors import (ArrangementDegenerate, MissingComponentData,
                     NotALandingVertex, ObstructedInternalRay, RayCrash)
from .fatou import FatouCoordinate

GRAPH_POTENTIAL = math.e          # the fixed r > 1 for the depth-0 equipotential


# ---------------------------------------------------------------------------
# curve pull-back under the cubic
# ---------------------------------------------------------------------------

def _match_roots(roots: list[complex], prev: list[complex]):
    best, assigned = None, None
    for perm in itertools.permutations(range(3)):
        cost = sum(abs(roots[perm[k]] - prev[k]) for k in range(3))
        if best is None or cost < best:
            best = cost
            assigned = [roots[perm[k]] for k in range(3)]
    return assigned


def _preimages(a: complex, w: complex) -> list[complex]:
    return [complex(r) for r in np.roots([1.0, a, 1.0, -complex(w)])]


def pullback_curves(a: complex, curve: np.ndarray,
                    jump_tol: float = 0.25, refine: int = 7) -> list[np.ndarray]:
    """All preimage polylines of a curve under f_a, tracked by continuity.

    Three root tracks follow the samples.  Where a matched root jumps (the
    segment crosses a critical value and two branches swap) the input
    segment is bisected up to `refine` times; a persistent jump is a branch
    collision, and the colliding midpoint is appended to both sides so the
    cut pieces meet at the junction to within snapping distance.
    """
    a = complex(a)
    pts = [complex(w) for w in np.asarray(curve, dtype=np.complex128)]
    tracks: list[list[complex]] = [[], [], []]
    pieces: list[np.ndarray] = []
    prev = None

    def flush(k):
        if len(tracks[k]) > 1:
            pieces.append(np.array(tracks[k]))
        tracks[k] = []

    def advance(w, assigned, depth):
        nonlocal prev
        scale = max(2e-2, float(np.median([abs(x) for x in prev])))
        jumps = [k for k in range(3)
                 if abs(assigned[k] - prev[k]) > jump_tol * max(1.0, scale)]
        if jumps and depth < refine:
            mid = 0.5 * (w_prev[0] + w)
            mid_assigned = _match_roots(_preimages(a, mid), prev)
            advance(mid, mid_assigned, depth + 1)
            assigned2 = _match_roots(_preimages(a, w), prev)
            advance(w, assigned2, depth + 1)
            return
        if jumps:
            # branch collision: close the affected tracks at the junction
            for k in jumps:
                junction = 0.5 * (prev[k] + assigned[k])
                near = min(range(3), key=lambda i: abs(assigned[i] - prev[k]))
                junction = prev[k] if abs(assigned[near] - prev[k]) > 1e-4 \
                    else 0.5 * (prev[k] + assigned[near])
                tracks[k].append(junction)
                flush(k)
                tracks[k].append(junction)
        for k in range(3):
            tracks[k].append(assigned[k])
        prev = assigned
        w_prev[0] = w

    w_prev = [pts[0]]
    for w in pts:
        roots = _preimages(a, w)
        if prev is None:
            assigned = sorted(roots, key=lambda r: (round(r.real, 12),
                                                    round(r.imag, 12)))
            for k in range(3):
                tracks[k].append(assigned[k])
            prev = assigned
            w_prev[0] = w
            continue
        advance(w, _match_roots(roots, prev), 0)
    for k in range(3):
        flush(k)
    return pieces


def iterated_polynomial_roots(a: complex, m: int) -> np.ndarray:
    """Roots of f_a^m(z) = 0 (the depth-m preimages of the parabolic point)."""
    from numpy.polynomial import polynomial as P
    f = np.array([0.0, 1.0, a, 1.0], dtype=complex)  # ascending coefficients
    cur = np.array([0.0, 1.0], dtype=complex)        # the identity, z
    for _ in range(m):
        new = np.zeros(1, dtype=complex)
        # compose: f(cur) = cur^3 + a*cur^2 + cur
        c2 = P.polymul(cur, cur)
        c3 = P.polymul(c2, cur)
        new = P.polyadd(P.polyadd(c3, a * c2), cur)
        cur = new
    cur = np.trim_zeros(cur, "b")
    return np.roots(cur[::-1])


# ---------------------------------------------------------------------------
# graphs
# ---------------------------------------------------------------------------

@dataclass
class PuzzleGraph:
    a: complex
    depth: int
    kind: str                      # "Y" | "X"
    arcs: list[Arc]
    arrangement: Arrangement
    landing_points: dict           # angle -> snapped landing vertex
    wake: bool = False
    generator: int | None = None   # l for X-graphs

    @property
    def pieces(self):
        return extract_pieces(self)


def _petal_image_boundary(fc: FatouCoordinate, y_max: float = 36.0,
                          n: int = 321) -> np.ndarray:
    """f(petal boundary) closed onto the parabolic point at both ends."""
    t = np.linspace(-1.0, 1.0, n | 1)
    ys = y_max * t ** 3
    pts = [0.0 + 0.0j]
    pts.extend(fc.petal_inverse(1.0 + 1j * y) for y in ys)
    pts.append(0.0 + 0.0j)
    return np.array(pts, dtype=np.complex128)


def _snap_curve_ends(curves: list[np.ndarray], targets: np.ndarray,
                     tol: float = 0.08) -> list[np.ndarray]:
    """Append the nearest target vertex to curve ends that stop just short
    of it (petal pull-backs converge to preimages of the parabolic point)."""
    out = []
    for c in curves:
        c = list(c)
        for end in (0, -1):
            z = c[end]
            i = int(np.argmin(np.abs(targets - z)))
            d = abs(targets[i] - z)
            if 1e-9 < d < tol:
                if end == 0:
                    c.insert(0, complex(targets[i]))
                else:
                    c.append(complex(targets[i]))
        out.append(np.array(c, dtype=np.complex128))
    return out


def _trace_graph_ray(a: complex, t: RationalAngle, r_level: float,
                     depth_for_landing: int, roots0, snap=2e-2):
    """Ray from just above the graph equipotential level down to its landing
    point (the overshoot makes the ray cross the equipotential polyline),
    snapped onto the algebraic preimages of the parabolic point when the
    estimate matches one."""
    tr = boettcher.trace_dynamical_ray(a, t, log_r_min=1e-10,
                                       r_start=r_level ** 1.7)
    if tr.landing.kind == "crashed":
        raise RayCrash(f"ray {t} crashed: {tr.landing.reason}",
                       depth=depth_for_landing, angle=t)
    pts = np.array([s.point for s in tr.samples], dtype=np.complex128)
    end = tr.end
    landing = None
    if roots0 is not None and len(roots0):
        i = int(np.argmin(np.abs(roots0 - end)))
        if abs(roots0[i] - end) < max(snap, 10 * tr.landing.confidence):
            landing = complex(roots0[i])
    if landing is not None:
        pts = np.append(pts, landing)
    return pts, landing


def build_graph_Y(a: complex, depth: int, wake: bool = False,
                  r: float = GRAPH_POTENTIAL, ray_snap: float = 2e-2) -> PuzzleGraph:
    """Dynamical graph adapted to the inverse orbit of the parabolic point."""
    if depth > 5:
        raise ValueError("depth capped at 5")
    a = complex(a)
    fc = FatouCoordinate(a)
    arcs: list[Arc] = []
    landing: dict = {}
    # all preimages of the parabolic point up to the graph depth (vertices)
    vertex_pool = [np.array([0.0 + 0.0j])]
    for m in range(1, depth + 1):
        vertex_pool.append(iterated_polynomial_roots(a, m))
    all_vertices = np.unique(np.round(np.concatenate(vertex_pool), 12))
    # petal image boundary and its pull-backs, ends snapped to the vertices
    bnd = _petal_image_boundary(fc)
    arcs.append(Arc("petal-boundary", bnd, depth=0))
    cur = [bnd]
    for m in range(1, depth + 1):
        nxt = []
        for c in cur:
            nxt.extend(pullback_curves(a, c))
        nxt = _snap_curve_ends(nxt, all_vertices)
        for c in nxt:
            arcs.append(Arc("petal-boundary", c, depth=m))
        cur = nxt
    # external rays at the division angles
    angles = set(zero_preimage_angles(depth))
    if wake:
        angles |= {t for t in angles_with_triple_image(RationalAngle(1, 2), depth)}
    roots0 = np.append(iterated_polynomial_roots(a, depth), 0.0 + 0.0j) \
        if depth > 0 else np.array([0.0 + 0j])
    for t in sorted(angles):
        pts, land = _trace_graph_ray(a, t, r, depth, roots0, snap=ray_snap)
        arcs.append(Arc("external-ray", pts, depth=depth, angle=t))
        if land is not None:
            landing[t] = land
    # equipotential at the depth level
    level = r ** (3.0 ** -depth)
    eq = boettcher.equipotential_dynamical(a, level, n_samples=max(384, 128 * 3 ** min(depth, 3)))
    arcs.append(Arc("equipotential", eq, depth=depth, level=level))
    arr = Arrangement(arcs, snap_tol=1e-6)
    return PuzzleGraph(a, depth, "Y", arcs, arr, landing, wake=wake)


def locate_internal_external_pair(a: complex, l: int,
                                  n_links: int = 14) -> tuple[list[np.ndarray],
                                                              RationalAngle, complex]:
    """The internal ray cycle generator theta_l = 1/(2^l - 1) together with
    the external angle eta_l whose ray lands at the same periodic point."""
    theta = RationalAngle(1, (1 << l) - 1)
    links = conjugacy.dynamical_internal_ray(a, theta, n_links=n_links,
                                             samples_per_link=90)
    target = links[-1][-1]
    den = 3 ** l - 1
    best = None
    for p in range(1, den):
        eta = RationalAngle(p, den)
        try:
            tr = boettcher.trace_dynamical_ray(a, eta, log_r_min=1e-9)
        except Exception:
            continue
        if tr.landing.point is None:
            continue
        d = abs(tr.landing.point - target)
        if best is None or d < best[0]:
            best = (d, eta, tr.landing.point)
    if best is None or best[0] > 2e-3:
        raise ObstructedInternalRay(
            f"no external ray of period {l} lands with the internal cycle "
            f"(best match {best[0]:.3g})" if best else "no candidate landed")
    return links, best[1], best[2]


def build_graph_X(a: complex, depth: int, l: int = 2,
                  r: float = GRAPH_POTENTIAL) -> PuzzleGraph:
    """Dynamical graph adapted to points off the inverse orbit of 0: an
    internal-ray cycle, the matched external cycle, the petal boundary, the
    equipotential, and their pull-backs to the requested depth."""
    if depth > 5:
        raise ValueError("depth capped at 5")
    a = complex(a)
    fc = FatouCoordinate(a)
    arcs: list[Arc] = []
    links, eta, xland = locate_internal_external_pair(a, l)
    theta = RationalAngle(1, (1 << l) - 1)
    # internal cycle: forward images of the generator ray
    ray = np.concatenate(links)
    cycle = [ray]
    for j in range(1, l):
        cycle.append(np.array([dynamics.iterate(a, z, j) for z in ray]))
    for j, c in enumerate(cycle):
        arcs.append(Arc("internal-ray", c, depth=0, angle=theta.times(2 ** j)))
    # matched external cycle
    for j in range(l):
        ang = eta.times(3 ** j)
        tr = boettcher.trace_dynamical_ray(a, ang, log_r_min=1e-9, r_start=r)
        pts = np.array([s.point for s in tr.samples])
        if tr.landing.point is not None:
            pts = np.append(pts, tr.landing.point)
        arcs.append(Arc("external-ray", pts, depth=0, angle=ang))
    bnd = _petal_image_boundary(fc)
    arcs.append(Arc("petal-boundary", bnd, depth=0))
    # pull-backs
    base = [a0 for a0 in arcs]
    cur = [(ar.kind, ar.points, ar.angle) for ar in base]
    for m in range(1, depth + 1):
        nxt = []
        for kind, ptsm, ang in cur:
            for c in pullback_curves(a, ptsm):
                nxt.append((kind, c, None))
                arcs.append(Arc(kind, c, depth=m, angle=None))
        cur = nxt
    # external rays at preimage angles are labeled exactly (retraced)
    ext_angles = set()
    for j in range(l):
        for mdepth in range(1, depth + 1):
            ext_angles |= set(angles_with_triple_image(eta.times(3 ** j), mdepth))
    arcs = [ar for ar in arcs if not (ar.kind == "external-ray" and ar.angle is None)]
    for ang in sorted(ext_angles):
        tr = boettcher.trace_dynamical_ray(a, ang, log_r_min=1e-8, r_start=r)
        pts = np.array([s.point for s in tr.samples])
        if tr.landing.point is not None:
            pts = np.append(pts, tr.landing.point)
        arcs.append(Arc("external-ray", pts, depth=depth, angle=ang))
    level = r ** (3.0 ** -depth)
    eq = boettcher.equipotential_dynamical(a, level, n_samples=max(384, 128 * 3 ** min(depth, 3)))
    arcs.append(Arc("equipotential", eq, depth=depth, level=level))
    arr = Arrangement(arcs, snap_tol=1e-6)
    return PuzzleGraph(a, depth, "X", arcs, arr, {eta: xland}, generator=l)


# ---------------------------------------------------------------------------
# pieces
# ---------------------------------------------------------------------------

@dataclass
class PuzzlePiece:
    piece_id: int
    depth: int
    polygon: np.ndarray
    arc_labels: list[str]
    area: float

    def contains(self, z: complex) -> bool:
        from .arrangement import _point_in_loop
        return _point_in_loop(z, self.polygon)

    def diameter(self) -> float:
        d = 0.0
        for i in range(0, len(self.polygon), max(1, len(self.polygon) // 256)):
            d = max(d, float(np.max(np.abs(self.polygon - self.polygon[i]))))
        return d


def extract_pieces(graph: PuzzleGraph) -> list[PuzzlePiece]:
    """Bounded faces whose boundary meets the deepest equipotential."""
    out = []
    arr = graph.arrangement
    for f in arr.faces:
        if any(arr.arcs[i].kind == "equipotential" for i in f.arc_ids):
            labels = sorted({arr.arcs[i].label() for i in f.arc_ids})
            out.append(PuzzlePiece(len(out), graph.depth, f.vertices, labels, f.area))
    return out


def locate(point: complex, pieces: list[PuzzlePiece],
           boundary_tol: float = 1e-6):
    """Piece id containing the point, "boundary" within tolerance, or None."""
    z = complex(point)
    for p in pieces:
        poly = p.polygon
        for i in range(len(poly)):
            q0, q1 = poly[i], poly[(i + 1) % len(poly)]
            from .arrangement import _point_segment_distance
            if _point_segment_distance(z, q0, q1) < boundary_tol:
                return "boundary"
    hits = [p.piece_id for p in pieces if p.contains(z)]
    if not hits:
        return None
    return min(hits, key=lambda i: pieces[i].area)


def adjacent_pieces_at_zero_preimage(graph: PuzzleGraph, x: complex,
                                     tol: float = 1e-4):
    """The two pieces sharing the ray segment landing at x (a point of the
    depth-m inverse orbit of the parabolic point), ordered (plus, minus) by
    the angular probe around the landing segment."""
    pieces = extract_pieces(graph)
    matches = [(t, v) for t, v in graph.landing_points.items()
               if abs(v - complex(x)) < max(tol, 1e-9)]
    if not matches:
        raise NotALandingVertex(f"{x} is not a snapped landing vertex")
    t, v = matches[0]
    arc = next(ar for ar in graph.arcs
               if ar.kind == "external-ray" and ar.angle == t)
    # probe on both sides of the ray near its landing end
    k = max(2, len(arc.points) - 6)
    p0, p1 = complex(arc.points[-2]), complex(arc.points[-1])
    d = p1 - p0
    d /= abs(d)
    probe_base = p1 - 0.35 * abs(p1 - p0) * d - 0.0 * d
    eps = max(2e-4, 3 * abs(p1 - p0))
    left = probe_base + 1j * d * eps
    right = probe_base - 1j * d * eps
    li = locate(left, pieces)
    ri = locate(right, pieces)
    if not isinstance(li, int) or not isinstance(ri, int) or li == ri:
        # widen the probe until the two sides separate
        for fac in (3.0, 9.0, 27.0):
            left = probe_base + 1j * d * eps * fac
            right = probe_base - 1j * d * eps * fac
            li, ri = locate(left, pieces), locate(right, pieces)
            if isinstance(li, int) and isinstance(ri, int) and li != ri:
                break
        else:
            raise NotALandingVertex("could not separate the two adjacent pieces")
    # label: Q_plus is the side hit by rotating the incoming ray direction
    # counterclockwise (the larger-angle side)
    return pieces[li], pieces[ri]


def nesting_report(a: complex, depths: list[int], kind: str = "Y",
                   l: int = 2, wake: bool = False,
                   probe: complex | None = None) -> dict:
    """Containment/diameter table for the pieces holding the free critical
    value across consecutive depths."""
    a = complex(a)
    v_probe = probe if probe is not None else dynamics.critical_values(a)[1]
    rows = []
    prev_piece = None
    prev_graph = None
    for m in sorted(depths):
        graph = build_graph_Y(a, m, wake=wake) if kind == "Y" \
            else build_graph_X(a, m, l=l)
        pieces = extract_pieces(graph)
        loc = locate(v_probe, pieces)
        row = {"depth": m, "piece": None, "diameter": None,
               "contained_in_previous": None, "strictly_inside": None}
        if isinstance(loc, int):
            piece = pieces[loc]
            row["piece"] = loc
            row["diameter"] = piece.diameter()
            if prev_piece is not None:
                inside = all(prev_piece.contains(z)
                             for z in piece.polygon[:: max(1, len(piece.polygon) // 64)])
                row["contained_in_previous"] = bool(inside)
                if inside:
                    dmin = min(abs(z - w)
                               for z in piece.polygon[:: max(1, len(piece.polygon) // 32)]
                               for w in prev_piece.polygon[:: max(1, len(prev_piece.polygon) // 32)])
                    row["strictly_inside"] = bool(dmin > 1e-6)
            prev_piece = piece
        rows.append(row)
        prev_graph = graph
    return {"a": a, "kind": kind, "rows": rows}


# ---------------------------------------------------------------------------
# parameter graphs (shallow)
# ---------------------------------------------------------------------------

def parameter_angles(depth: int) -> list[tuple[str, RationalAngle]]:
    """T_depth with quadrant branch tags: the zero-family over the whole
    wake-plus-quadrant region and the half-family restricted to [1/2, 1]."""
    out = []
    for t in angles_with_triple_image(RationalAngle(0, 1), depth):
        out.append(("S" if t.turns() <= 0.75 else "iS", t))
    for t in angles_with_triple_image(RationalAngle(1, 2), depth):
        if 0.5 <= t.turns() <= 1.0 or t == RationalAngle(0, 1):
            out.append(("iS" if t.turns() > 0.75 else "S", t))
    seen = set()
    uniq = []
    for q, t in out:
        if (q, t) not in seen:
            seen.add((q, t))
            uniq.append((q, t))
    return sorted(uniq, key=lambda p: (p[1], p[0]))


def build_para_graph(depth: int, r: float = GRAPH_POTENTIAL,
                     include_components: bool = True) -> PuzzleGraph:
    """Shallow parameter graph: parameter rays at T_depth, the parameter
    equipotential at the cube-root level, and the component equipotential
    [0, sqrt(3)] + gamma of the right-hand adjacent component."""
    if depth > 2:
        raise ValueError("parameter graphs are capped at depth 2")
    arcs = []
    landing = {}
    for q, t in parameter_angles(depth):
        tr = boettcher.trace_parameter_ray(q, t, log_r_min=1e-8)
        pts = np.array([s.point for s in tr.samples])
        if tr.landing.point is not None:
            pts = np.append(pts, tr.landing.point)
            landing[(q, t)] = tr.landing.point
        arcs.append(Arc("external-ray", pts, depth=depth, angle=t))
    level = r ** (3.0 ** -depth)
    eq = boettcher.equipotential_parameter(level, n_samples=540)
    arcs.append(Arc("equipotential", eq, depth=depth, level=level))
    if include_components:
        gamma = conjugacy.gamma_curve(samples=72)
        seg = np.linspace(0.0, math.sqrt(3.0), 64).astype(complex)
        arcs.append(Arc("petal-boundary", gamma, depth=0))
        arcs.append(Arc("petal-boundary", seg, depth=0))
    arr = Arrangement(arcs, snap_tol=1e-6)
    g = PuzzleGraph(0.0, depth, "Y", arcs, arr, landing)
    return g


def para_graph_connected(graph: PuzzleGraph, join_tol: float = 2e-2) -> bool:
    """Union-find connectivity of the graph arcs, joining endpoints and
    crossing arcs within tolerance."""
    n = len(graph.arcs)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i, j):
        parent[find(i)] = find(j)

    for i in range(n):
        for j in range(i + 1, n):
            pi = graph.arcs[i].points[:: max(1, len(graph.arcs[i].points) // 160)]
            pj = graph.arcs[j].points[:: max(1, len(graph.arcs[j].points) // 160)]
            d = np.min(np.abs(pi[:, None] - pj[None, :]))
            if d < join_tol:
                union(i, j)
    return len({find(i) for i in range(n)}) == 1
