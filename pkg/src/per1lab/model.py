"""The quadratic model P(z) = z^2 + 1/4: parabolic basin machinery,
equipotentials E(n), and the jigsaw internal rays of angle +-1/(2^l - 1).

The parabolic point is 1/2; in the shifted coordinate u = z - 1/2 the map is
u -> u + u^2, handled by the shared parabolic engine.  The Fatou coordinate
is normalized so the critical point 0 has coordinate 0 (hence phi(1/4) = 1).
The maximal petal Omega0 is the Re > 0 sheet; its forward image (the Re > 1
sheet) is the petal whose boundary curve E(0) passes through 1/4.
"""

from __future__ import annotations

import cmath
import math
from functools import lru_cache

import numpy as np

from .angles import RationalAngle
from .errors import NotInBasin
from .parabolic import ParabolicGerm

PARABOLIC_POINT = 0.5
CRITICAL_POINT = 0.0
CRITICAL_VALUE = 0.25


class QuadraticModel:
    """Basin-of-1/2 machinery for z^2 + 1/4; one shared instance suffices."""

    def __init__(self, defect_tol: float = 1e-13, budget: int = 100000):
        self.germ = ParabolicGerm(1.0, 0.0, defect_tol=defect_tol, budget=budget,
                                  escape_radius=4.0)
        # normalization fatou(critical point) = 0 via fatou(1/4) = 1
        self.sigma = self.germ.raw(CRITICAL_VALUE - PARABOLIC_POINT) - 1.0

    @staticmethod
    def apply(z: complex) -> complex:
        return z * z + 0.25

    def fatou(self, z: complex) -> complex:
        return self.germ.raw(z - PARABOLIC_POINT) - self.sigma

    def fatou_batch(self, zs: np.ndarray) -> np.ndarray:
        return self.germ.raw_batch(np.asarray(zs) - PARABOLIC_POINT) - self.sigma

    def petal_inverse(self, w: complex) -> complex:
        w = complex(w)
        if abs(w) < 1e-9:
            # normalization anchor: fatou(critical point) = 0 exactly
            return CRITICAL_POINT + 0j
        return self.germ.raw_inverse(w + self.sigma) + PARABOLIC_POINT

    def in_basin(self, z: complex) -> bool:
        try:
            self.fatou(z)
            return True
        except NotInBasin:
            return False

    # -- inverse branches (off the closure of the Re > 1 petal) -------------
    @staticmethod
    def pull_up(z: complex) -> complex:
        """P_plus: preimage in the closed upper half-plane."""
        d = z - 0.25
        if d.imag == 0.0:
            d = complex(d.real, 0.0)
            if d.real <= 0:
                return 1j * math.sqrt(-d.real)
            return math.sqrt(d.real) + 0.0j   # boundary case, on the real axis
        s = cmath.sqrt(d)
        return s if s.imag > 0 else -s

    @classmethod
    def pull_down(cls, z: complex) -> complex:
        """P_minus: preimage in the closed lower half-plane."""
        return -cls.pull_up(z)

    # -- petal lobes (for point-in-region tests) -----------------------------
    @lru_cache(maxsize=8)
    def petal_lobe(self, y_max: float = 24.0, n: int = 384) -> np.ndarray:
        """Closed polygon approximating the maximal petal Omega0 (Re > 0
        sheet), through the critical point and the parabolic point."""
        ys = np.linspace(-y_max, y_max, n)
        pts = [self.petal_inverse(1j * y) for y in ys]
        pts.append(PARABOLIC_POINT + 0j)
        return np.array(pts, dtype=np.complex128)

    def mirror_lobe(self, y_max: float = 24.0, n: int = 384) -> np.ndarray:
        """The other preimage component of the image petal: -Omega0."""
        return -self.petal_lobe(y_max, n)


_MODEL: QuadraticModel | None = None


def shared_model() -> QuadraticModel:
    global _MODEL
    if _MODEL is None:
        _MODEL = QuadraticModel()
    return _MODEL


def point_in_polygon(z: complex, poly: np.ndarray) -> bool:
    """Even-odd crossing test."""
    x, y = z.real, z.imag
    px, py = poly.real, poly.imag
    inside = False
    j = len(poly) - 1
    for i in range(len(poly)):
        if (py[i] > y) != (py[j] > y):
            xc = px[j] + (y - py[j]) * (px[i] - px[j]) / (py[i] - py[j])
            if x < xc:
                inside = not inside
        j = i
    return inside


# ---------------------------------------------------------------------------
# Equipotentials E(n)
# ---------------------------------------------------------------------------

def equipotential_zero(samples: int = 512, y_max: float = 24.0) -> np.ndarray:
    """E(0): the Re fatou = 1 level on the principal sheet (the boundary of
    the image petal with the critical value 1/4 in the middle).

    The grid is odd and cubically concentrated so the curve passes exactly
    through 1/4 and pull-backs resolve the fold at the critical point.
    """
    m = shared_model()
    t = np.linspace(-1.0, 1.0, samples | 1)
    ys = y_max * t ** 3
    return np.array([m.petal_inverse(1.0 + 1j * y) for y in ys])


def _pullback_polyline(curve: np.ndarray, tol_join: float = 5e-3) -> list[np.ndarray]:
    """Both square-root preimage branches of a polyline under P, tracked for
    continuity; returns the branch curves (the full preimage is their union)."""
    d = curve - 0.25
    # track one branch continuously; the other is its negative
    branch = np.empty_like(curve)
    prev = None
    for i, val in enumerate(d):
        s = cmath.sqrt(val)
        if prev is not None and abs(-s - prev) < abs(s - prev):
            s = -s
        branch[i] = s
        prev = s
    return [branch, -branch]


def model_equipotential(depth: int, samples: int = 512) -> list[np.ndarray]:
    """E(depth) = P^{-depth}(E(0)) as a list of polylines."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if depth > 8:
        raise ValueError("depth capped at 8")
    curves = [equipotential_zero(samples)]
    for _ in range(depth):
        nxt = []
        for c in curves:
            nxt.extend(_pullback_polyline(c))
        curves = nxt
    return curves


# ---------------------------------------------------------------------------
# Jigsaw internal rays
# ---------------------------------------------------------------------------

def _semicircle_template(n: int) -> np.ndarray:
    """L': the right-bulging unit semicircle from 0 to i inside (0,1)x(0,1)."""
    s = np.linspace(0.0, 1.0, n)
    return 0.5j + 0.5 * np.exp(1j * math.pi * (s - 0.5))


def _strip_inverse(m: QuadraticModel, omega: complex) -> complex:
    """Inverse of the glued coordinate on the chain Delta^0, ..., Delta^{k-1}:
    omega with Re in [-n, 1-n] maps through petal_inverse(omega + n) pulled
    up n times."""
    n = max(0, math.ceil(-omega.real - 1e-12))
    z = m.petal_inverse(omega + n)
    for _ in range(n):
        z = m.pull_up(z)
    return z


def internal_ray_generator(angle: RationalAngle) -> tuple[int, int]:
    """(l, sign) for angles +-1/(2^l - 1); raises for other angles."""
    q = angle.den
    l = (q + 1).bit_length() - 1
    if (1 << l) - 1 == q and l >= 2:
        if angle.num == 1:
            return l, 1
        if angle.num == q - 1:
            return l, -1
    raise ValueError(f"angle {angle} is not +-1/(2^l - 1) with l >= 2")


def model_internal_ray(angle: RationalAngle, n_links: int = 24,
                       samples_per_link: int = 160) -> list[np.ndarray]:
    """The jigsaw internal ray of angle +-1/(2^l - 1) as a list of links.

    Link 0 is the fundamental arc delta (a Fatou-coordinate line segment
    followed by the fixed semicircle template); link j+1 is its image under
    the composition (pull_up^{l-1} . pull_down), so P^l maps link j+1 onto
    link j sample-by-sample.  Negative angles mirror through conjugation.
    """
    l, sign = internal_ray_generator(angle)
    m = shared_model()
    k = l
    n1 = max(8, samples_per_link * 2 // 3)
    n2 = max(6, samples_per_link - n1)
    # straight line L from 1+i down to -(k-1) in the glued strip coordinates,
    # so that delta starts at petal_inverse(1+i)
    ts = np.linspace(0.0, 1.0, n1)
    Ls = (1.0 + 1j) * (1.0 - ts) + (-(k - 1.0)) * ts
    part1 = np.array([_strip_inverse(m, complex(w)) for w in Ls])
    # L' template through the mirror petal, pulled up k-1 times
    sc = _semicircle_template(n2)
    part2 = []
    for w in sc:
        z = -m.petal_inverse(complex(w)) if w != 0 else -CRITICAL_POINT + 0j
        for _ in range(k - 1):
            z = m.pull_up(z)
        part2.append(z)
    delta = np.concatenate([part1, np.array(part2)])
    links = [delta]
    cur = delta
    for _ in range(n_links - 1):
        nxt = np.empty_like(cur)
        for i, z in enumerate(cur):
            y = m.pull_down(z)
            for _ in range(k - 1):
                y = m.pull_up(y)
            nxt[i] = y
        links.append(nxt)
        cur = nxt
    if sign < 0:
        links = [np.conj(c) for c in links]
    return links


def internal_ray_tail_limit(angle: RationalAngle, iters: int = 80) -> complex:
    """Limit point of the jigsaw ray: iterate the link map on one point."""
    l, sign = internal_ray_generator(angle)
    m = shared_model()
    z = m.petal_inverse(1 + 1j)
    if sign < 0:
        z = z.conjugate()
    for _ in range(iters):
        if sign > 0:
            y = m.pull_down(z)
            for _ in range(l - 1):
                y = m.pull_up(y)
        else:
            y = m.pull_up(z)
            for _ in range(l - 1):
                y = m.pull_down(y)
        z = y
    return z
