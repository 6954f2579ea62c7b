"""Planar arrangement of labeled polyline arcs: endpoint snapping, segment
splitting at crossings, and bounded-face extraction by half-edge tracing.

Determinism: vertices are canonicalized by snapping to cluster
representatives chosen in lexicographic order, and faces are reported
sorted by their leftmost-lowest vertex.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArrangementDegenerate


class Arc:
    """A labeled polyline: external/internal ray, equipotential, or
    petal-boundary (and their pull-backs, tagged by depth)."""

    def __init__(self, kind, points, depth=0, angle=None, level=None):
        self.kind = kind
        self.points = np.asarray(points, dtype=np.complex128)
        self.depth = depth
        self.angle = angle      # RationalAngle for rays (None on pull-backs)
        self.level = level      # potential for equipotentials

    def label(self) -> str:
        if self.kind == "external-ray":
            return f"external-ray({self.angle})@{self.depth}"
        if self.kind == "internal-ray":
            return f"internal-ray({self.angle})@{self.depth}"
        if self.kind == "equipotential":
            return f"equipotential({self.level:.6g})@{self.depth}"
        return f"{self.kind}@{self.depth}"


@dataclass
class Face:
    face_id: int
    vertices: np.ndarray          # closed CCW loop (complex)
    arc_ids: set[int]             # arcs contributing boundary segments
    area: float

    def contains(self, z: complex) -> bool:
        return _point_in_loop(z, self.vertices)

    def diameter(self) -> float:
        pts = self.vertices
        # convex-hull-free O(n^2) on the loop samples; loops are small
        d = 0.0
        for i in range(len(pts)):
            d = max(d, float(np.max(np.abs(pts - pts[i]))))
        return d

    def touches(self, arrangement: "Arrangement", kind: str) -> bool:
        return any(arrangement.arcs[i].kind == kind for i in self.arc_ids)


def _point_in_loop(z: complex, loop: np.ndarray) -> bool:
    x, y = z.real, z.imag
    px, py = loop.real, loop.imag
    inside = False
    j = len(loop) - 1
    for i in range(len(loop)):
        if (py[i] > y) != (py[j] > y):
            xc = px[j] + (y - py[j]) * (px[i] - px[j]) / (py[i] - py[j])
            if x < xc:
                inside = not inside
        j = i
    return inside


def _seg_intersection(p, q, r, s, eps=1e-12):
    """Proper intersection parameter pair of segments [p,q], [r,s] or None."""
    d1 = q - p
    d2 = s - r
    den = d1.real * d2.imag - d1.imag * d2.real
    if abs(den) < eps * (abs(d1) * abs(d2) + eps):
        return None
    w = r - p
    t = (w.real * d2.imag - w.imag * d2.real) / den
    u = (w.real * d1.imag - w.imag * d1.real) / den
    if -1e-12 <= t <= 1 + 1e-12 and -1e-12 <= u <= 1 + 1e-12:
        return min(max(t, 0.0), 1.0), min(max(u, 0.0), 1.0)
    return None


class Arrangement:
    def __init__(self, arcs: list[Arc], snap_tol: float = 1e-6):
        self.arcs = arcs
        self.snap_tol = snap_tol
        self.vertices: list[complex] = []
        self.edges: list[tuple[int, int, int]] = []   # (u, v, arc_id)
        self.faces: list[Face] = []
        self._build()

    # -- vertex canonicalization -------------------------------------------
    def _vertex_id(self, z: complex, grid: dict, new_ok=True) -> int:
        t = self.snap_tol
        key = (round(z.real / t), round(z.imag / t))
        for dk0 in (-1, 0, 1):
            for dk1 in (-1, 0, 1):
                k = (key[0] + dk0, key[1] + dk1)
                if k in grid:
                    for vid in grid[k]:
                        if abs(self.vertices[vid] - z) <= t:
                            return vid
        if not new_ok:
            return -1
        vid = len(self.vertices)
        self.vertices.append(z)
        grid.setdefault(key, []).append(vid)
        return vid

    def _build(self):
        # collect segments with arc ids
        raw_segs = []
        for aid, arc in enumerate(self.arcs):
            pts = arc.points
            for i in range(len(pts) - 1):
                p, q = complex(pts[i]), complex(pts[i + 1])
                if abs(p - q) > self.snap_tol:
                    raw_segs.append((p, q, aid))
        if not raw_segs:
            raise ArrangementDegenerate("no segments")
        # spatial hash for intersection candidates
        cell = max(self.snap_tol * 10,
                   np.median([abs(q - p) for p, q, _ in raw_segs]) * 2.0)
        buckets: dict[tuple[int, int], list[int]] = {}
        for si, (p, q, _) in enumerate(raw_segs):
            for key in _cells_of_segment(p, q, cell):
                buckets.setdefault(key, []).append(si)
        cuts: dict[int, list[float]] = {i: [] for i in range(len(raw_segs))}
        seen = set()
        for key, ids in buckets.items():
            for ii in range(len(ids)):
                for jj in range(ii + 1, len(ids)):
                    i, j = ids[ii], ids[jj]
                    if (i, j) in seen:
                        continue
                    seen.add((i, j))
                    pi, qi, ai = raw_segs[i]
                    pj, qj, aj = raw_segs[j]
                    if ai == aj and abs(i - j) <= 1:
                        continue   # consecutive segments of one arc share a point
                    hit = _seg_intersection(pi, qi, pj, qj)
                    if hit is not None:
                        t, u = hit
                        cuts[i].append(t)
                        cuts[j].append(u)
        # split and snap
        grid: dict = {}
        edge_set = set()
        edges = []
        for si, (p, q, aid) in enumerate(raw_segs):
            ts = sorted({0.0, 1.0, *[t for t in cuts[si] if 1e-9 < t < 1 - 1e-9]})
            for t0, t1 in zip(ts, ts[1:]):
                z0 = p + t0 * (q - p)
                z1 = p + t1 * (q - p)
                u = self._vertex_id(z0, grid)
                v = self._vertex_id(z1, grid)
                if u == v:
                    continue
                key = (min(u, v), max(u, v))
                if key in edge_set:
                    continue
                edge_set.add(key)
                edges.append((u, v, aid))
        self.edges = edges
        self._trace_faces()

    def _trace_faces(self):
        # directed half-edges with angular order at each vertex
        out_edges: dict[int, list[int]] = {}
        half = []   # (u, v, arc_id)
        for (u, v, aid) in self.edges:
            half.append((u, v, aid))
            half.append((v, u, aid))
        for hid, (u, v, aid) in enumerate(half):
            out_edges.setdefault(u, []).append(hid)
        angle_of = {}
        for hid, (u, v, _) in enumerate(half):
            d = self.vertices[v] - self.vertices[u]
            angle_of[hid] = math.atan2(d.imag, d.real)
        for u in out_edges:
            out_edges[u].sort(key=lambda h: angle_of[h])
        # next half-edge: the one after the twin in clockwise rotation
        twin = {}
        for hid in range(0, len(half), 2):
            twin[hid] = hid + 1
            twin[hid + 1] = hid
        nxt = {}
        for hid, (u, v, _) in enumerate(half):
            tw = twin[hid]
            ring = out_edges[v]
            i = ring.index(tw)
            nxt[hid] = ring[(i - 1) % len(ring)]
        visited = [False] * len(half)
        faces = []
        for start in range(len(half)):
            if visited[start]:
                continue
            loop = []
            arcids = set()
            h = start
            guard = 0
            while not visited[h]:
                visited[h] = True
                u, v, aid = half[h]
                loop.append(u)
                arcids.add(aid)
                h = nxt[h]
                guard += 1
                if guard > len(half) + 4:
                    raise ArrangementDegenerate("face tracing did not close")
            pts = np.array([self.vertices[i] for i in loop], dtype=np.complex128)
            area = _signed_area(pts)
            faces.append((pts, arcids, area))
        # bounded faces have positive signed area with this rotation rule
        bounded = [(p, s, ar) for (p, s, ar) in faces if ar > 0]
        bounded.sort(key=lambda f: (round(min(z.real for z in f[0]), 9),
                                    round(min(z.imag for z in f[0]), 9)))
        self.faces = [Face(i, p, s, ar) for i, (p, s, ar) in enumerate(bounded)]

    # -- queries -------------------------------------------------------------
    def locate(self, z: complex, boundary_tol: float = 1e-6):
        """Face id containing z, or "boundary" within tolerance, or None."""
        z = complex(z)
        for (u, v, _) in self.edges:
            p, q = self.vertices[u], self.vertices[v]
            if _point_segment_distance(z, p, q) < boundary_tol:
                return "boundary"
        hits = [f.face_id for f in self.faces if f.contains(z)]
        if not hits:
            return None
        # nested positive loops: the smallest containing face is the cell
        return min(hits, key=lambda i: self.faces[i].area)


def _signed_area(pts: np.ndarray) -> float:
    x, y = pts.real, pts.imag
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _point_segment_distance(z, p, q) -> float:
    d = q - p
    L2 = (d.real * d.real + d.imag * d.imag)
    if L2 == 0:
        return abs(z - p)
    t = ((z - p).real * d.real + (z - p).imag * d.imag) / L2
    t = min(1.0, max(0.0, t))
    return abs(z - (p + t * d))


def _cells_of_segment(p: complex, q: complex, cell: float):
    n = max(1, int(abs(q - p) / cell) + 1)
    out = set()
    for i in range(n + 1):
        z = p + (q - p) * (i / n)
        out.add((int(math.floor(z.real / cell)), int(math.floor(z.imag / cell))))
    return out
