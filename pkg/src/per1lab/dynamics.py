"""The cubic family f_a(z) = z^3 + a z^2 + z and its critical data.

Branch convention for the critical points: with sigma(a) = a*sqrt(1 - 3/a^2)
(principal square root) one has

    c_plus(a) = (-a + sigma(a))/3,   c_minus(a) = (-a - sigma(a))/3.

sigma is holomorphic on C minus the segment [-sqrt(3), sqrt(3)] because
1 - 3/a^2 only meets the negative reals for a on that segment, so this single
formula realizes the half-plane-wise assignment that keeps c_minus(a) ~ -2a/3
at infinity.  On the open segment we extend by the limit from the upper
half-plane, which amounts to sigma(x) = i*sqrt(3 - x^2); at a = 0 the limit
is c_plus = i/sqrt(3).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BudgetExceeded, DegenerateParameter, WindowTooLarge

SQRT3 = math.sqrt(3.0)

ESCAPE_RADIUS_FLOOR = 1e3
CLASSIFY_BUDGET = 1000        # render-scale iteration budget
VERIFY_BUDGET = 100000        # verification-scale iteration budget


def evaluate(a: complex, z: complex) -> complex:
    """f_a(z) = z^3 + a z^2 + z, in Horner form."""
    return z * (1.0 + z * (a + z))


def derivative(a: complex, z: complex) -> complex:
    """f_a'(z) = 3 z^2 + 2 a z + 1."""
    return 1.0 + z * (2.0 * a + 3.0 * z)


def iterate(a: complex, z: complex, n: int) -> complex:
    for _ in range(n):
        z = evaluate(a, z)
    return z


def sigma(a: complex) -> complex:
    """Branch-consistent square root of a^2 - 3 (see module docstring)."""
    a = complex(a)
    if abs(a * a - 3.0) < 4e-15 * max(1.0, abs(a) ** 2):
        return 0.0 + 0.0j
    if a.imag == 0.0 and abs(a.real) <= SQRT3:
        return 1j * math.sqrt(max(0.0, 3.0 - a.real * a.real))
    return a * np.sqrt(1.0 - 3.0 / (a * a))


@dataclass(frozen=True)
class CriticalPair:
    c_plus: complex
    c_minus: complex


def critical_points(a: complex, require_distinct: bool = False) -> CriticalPair:
    """Critical points with the continuous branch assignment.

    require_distinct raises DegenerateParameter at a = +-sqrt(3) where the
    two roots collide.
    """
    a = complex(a)
    s = sigma(a)
    if require_distinct and s == 0:
        raise DegenerateParameter(f"critical points coincide at a = {a}")
    return CriticalPair((-a + s) / 3.0, (-a - s) / 3.0)


def critical_values(a: complex, require_distinct: bool = False) -> tuple[complex, complex]:
    cp = critical_points(a, require_distinct=require_distinct)
    return evaluate(a, cp.c_plus), evaluate(a, cp.c_minus)


def critical_minus_derivative(a: complex) -> complex:
    """d c_minus / da; not defined on the segment [-sqrt(3), sqrt(3)]."""
    s = sigma(a)
    if s == 0:
        raise DegenerateParameter("derivative undefined at a double critical point")
    return (-1.0 - a / s) / 3.0


def escape_radius(a: complex) -> float:
    """max(1e3, |a|^2): beyond this the orbit provably tends to infinity."""
    return max(ESCAPE_RADIUS_FLOOR, abs(a) ** 2)


@dataclass(frozen=True)
class EscapeVerdict:
    escaped: bool
    n: int = 0

    def __bool__(self):
        return self.escaped


BOUNDED = EscapeVerdict(False)


def escape_classify(a: complex, z: complex, max_iter: int = CLASSIFY_BUDGET) -> EscapeVerdict:
    """Escaped(n) at the first n <= max_iter with |f^n(z)| > escape_radius(a).

    Bounded is the timeout verdict, not an error.  One extra safety iterate
    confirms growth after the crossing.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    a = complex(a)
    z = complex(z)
    R = escape_radius(a)
    if abs(z) > R:
        return EscapeVerdict(True, 0)
    for n in range(1, max_iter + 1):
        z = evaluate(a, z)
        if abs(z) > R:
            # safety iterate: the modulus must keep growing
            z2 = evaluate(a, z)
            if abs(z2) > abs(z):
                return EscapeVerdict(True, n)
    return BOUNDED


def green_function(a: complex, z: complex, tol: float = 1e-12,
                   max_iter: int = VERIFY_BUDGET) -> float:
    """Green function g(z) = lim 3^{-n} log|f^n(z)|, 0 on bounded orbits.

    Computed as 3^{-n} log|z_n| plus the telescoping corrections
    3^{-(k+1)} log|f(z_k)/z_k^3| once the orbit has escaped; the corrections
    decay super-geometrically so a handful of terms reach any tolerance.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = complex(a)
    z = complex(z)
    R = escape_radius(a)
    n = 0
    while abs(z) <= R:
        if n >= max_iter:
            return 0.0
        z = evaluate(a, z)
        n += 1
    g = (3.0 ** -n) * math.log(abs(z))
    scale = 3.0 ** -(n + 1)
    for _ in range(64):
        w = 1.0 + (a + 1.0 / z) / z
        g += scale * math.log(abs(w))
        # remaining tail is bounded by sum of scale*(|a|+1)/|z| terms
        bound = scale * (abs(a) + 1.0) / abs(z)
        if bound < tol:
            return g
        if abs(z) > 1e100:
            return g
        z = evaluate(a, z)
        scale /= 3.0
    raise BudgetExceeded(f"green tail did not reach tol={tol}")


# ---------------------------------------------------------------------------
# Misiurewicz-parabolic parameters: f_a^{n+1}(c_minus(a)) = 0, f_a^n(...) != 0
# ---------------------------------------------------------------------------
#
# c is eliminated through the quadratic 3c^2 + 2ac + 1 = 0: every iterate
# f_a^k(c) reduces mod that relation to A_k(a) + B_k(a) c with polynomial
# coefficients, and the product over both critical roots
#
#   G_n(a) = prod_c f_a^{n+1}(c) = A^2 - (2a/3) A B + B^2/3
#
# is a polynomial in a alone (the resultant up to a constant factor).  Its
# coefficients are computed exactly over Q, the roots by companion matrix,
# and each root polished by Newton on a -> f_a^{n+1}(c_minus(a)).

def _padd(p, q):
    n = max(len(p), len(q))
    p = p + [Fraction(0)] * (n - len(p))
    q = q + [Fraction(0)] * (n - len(q))
    return [x + y for x, y in zip(p, q)]


def _pmul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, x in enumerate(p):
        if x:
            for j, y in enumerate(q):
                out[i + j] += x * y
    return out


def _pscale(p, s):
    return [x * s for x in p]


_A_POLY = [Fraction(0), Fraction(1)]  # the polynomial "a"


def _reduce_quadratic(P2, P1, P0):
    """P2 c^2 + P1 c + P0 modulo 3c^2 + 2ac + 1 (so c^2 = -(2ac + 1)/3)."""
    A = _padd(P0, _pscale(P2, Fraction(-1, 3)))
    B = _padd(P1, _pmul(P2, _pscale(_A_POLY, Fraction(-2, 3))))
    return A, B


def _apply_f(A, B):
    """Map z = A + B c to f_a(z) = z^3 + a z^2 + z modulo the critical relation."""
    A2, B2 = _reduce_quadratic(_pmul(B, B), _pscale(_pmul(A, B), 2), _pmul(A, A))
    A3, B3 = _reduce_quadratic(_pmul(B2, B), _padd(_pmul(A2, B), _pmul(B2, A)),
                               _pmul(A2, A))
    return (_padd(_padd(A3, _pmul(_A_POLY, A2)), A),
            _padd(_padd(B3, _pmul(_A_POLY, B2)), B))


def misiurewicz_polynomial(depth: int) -> list[Fraction]:
    """Exact coefficients (ascending) of G_depth(a); degree 3^(depth+1) - 1."""
    A, B = [Fraction(0)], [Fraction(1)]
    for _ in range(depth + 1):
        A, B = _apply_f(A, B)
    G = _padd(_padd(_pmul(A, A), _pscale(_pmul(_pmul(_A_POLY, A), B), Fraction(-2, 3))),
              _pscale(_pmul(B, B), Fraction(1, 3)))
    while len(G) > 1 and G[-1] == 0:
        G.pop()
    return G


def _orbit_residuals(a: complex, depth: int) -> tuple[complex, complex, complex]:
    """(c_minus, f^depth(c_minus), f^(depth+1)(c_minus))."""
    c = critical_points(a).c_minus
    z = c
    for _ in range(depth):
        z = evaluate(a, z)
    return c, z, evaluate(a, z)


def _newton_polish_misiurewicz(a: complex, depth: int, steps: int = 60) -> complex:
    """Newton on h(a) = f_a^{depth+1}(c_minus(a)) with forward-mode derivative."""
    for _ in range(steps):
        c = critical_points(a).c_minus
        dc = critical_minus_derivative(a)
        z, dz = c, dc
        for _ in range(depth + 1):
            dz = derivative(a, z) * dz + z * z
            z = evaluate(a, z)
        if abs(z) < 1e-14:
            break
        if dz == 0:
            break
        a = a - z / dz
    return a


def solve_misiurewicz_parabolic(depth: int, window=((-4.0, -4.0), (4.0, 4.0)),
                                degree_area_budget: float = 2e6) -> list[complex]:
    """All a in the window with f^{depth+1}(c_minus) = 0, f^depth(c_minus) != 0.

    window is ((re_min, im_min), (re_max, im_max)).  Roots are polished to
    residual < 1e-10 and filtered to the c_minus branch.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if depth > 6:
        raise WindowTooLarge("depth > 6 exceeds the degree-growth precondition")
    (re0, im0), (re1, im1) = window
    if not (re1 > re0 and im1 > im0):
        raise ValueError("empty window")
    degree = 3 ** (depth + 1) - 1
    area = (re1 - re0) * (im1 - im0)
    if degree * area > degree_area_budget:
        raise WindowTooLarge(f"degree {degree} x area {area:.3g} exceeds budget")
    G = misiurewicz_polynomial(depth)
    coeffs = np.array([float(x) for x in G][::-1], dtype=np.float64)
    roots = np.roots(coeffs)
    out = []
    for r in roots:
        a = _newton_polish_misiurewicz(complex(r), depth)
        if abs(a.imag) < 1e-12:
            a = complex(a.real, 0.0)
        if abs(a.real) < 1e-12:
            a = complex(0.0, a.imag)
        c, zn, zn1 = _orbit_residuals(a, depth)
        if abs(zn1) >= 1e-10 or abs(zn) <= 1e-4:
            continue
        if not (re0 - 1e-12 <= a.real <= re1 + 1e-12 and im0 - 1e-12 <= a.imag <= im1 + 1e-12):
            continue
        if any(abs(a - b) < 1e-8 for b in out):
            continue
        out.append(a)
    out.sort(key=lambda z: (round(z.real, 9), round(z.imag, 9)))
    return out


def capture_center_polynomial(depth: int) -> list[Fraction]:
    """Coefficients of prod_c (f_a^{depth+1}(c) - partner(c)) over both critical
    roots, where partner(c) = -2a/3 - c is the other critical point.

    Roots of this polynomial with the c_minus branch are the centers of the
    capture components of depth `depth` (f^{n+1}(c_minus) = c_plus); for
    depth-0 "centers" the equation v_minus = c_plus has the four special
    solutions +-s0, +-conj(s0).
    """
    A, B = [Fraction(0)], [Fraction(1)]
    for _ in range(depth + 1):
        A, B = _apply_f(A, B)
    # g = (A - (-2a/3)) + (B + 1) c  : f^{n+1}(c) - (-2a/3 - c)
    A = _padd(A, _pscale(_A_POLY, Fraction(2, 3)))
    B = _padd(B, [Fraction(1)])
    G = _padd(_padd(_pmul(A, A), _pscale(_pmul(_pmul(_A_POLY, A), B), Fraction(-2, 3))),
              _pscale(_pmul(B, B), Fraction(1, 3)))
    while len(G) > 1 and G[-1] == 0:
        G.pop()
    return G


def solve_capture_centers(depth: int) -> list[complex]:
    """Parameters with f_a^{depth+1}(c_minus(a)) = c_plus(a), Newton-polished."""
    G = capture_center_polynomial(depth)
    coeffs = np.array([float(x) for x in G][::-1], dtype=np.float64)
    roots = np.roots(coeffs)
    out = []
    for r in roots:
        a = complex(r)
        for _ in range(60):
            cp = critical_points(a)
            ds = sigma(a)
            if ds == 0:
                break
            dcm = (-1.0 - a / ds) / 3.0
            dcp = (-1.0 + a / ds) / 3.0
            z, dz = cp.c_minus, dcm
            for _ in range(depth + 1):
                dz = derivative(a, z) * dz + z * z
                z = evaluate(a, z)
            F = z - cp.c_plus
            dF = dz - dcp
            if abs(F) < 1e-14 or dF == 0:
                break
            a = a - F / dF
        cp = critical_points(a)
        z = cp.c_minus
        for _ in range(depth + 1):
            z = evaluate(a, z)
        if abs(z - cp.c_plus) > 1e-9:
            continue
        if any(abs(a - b) < 1e-8 for b in out):
            continue
        out.append(a)
    out.sort(key=lambda z: (round(z.real, 9), round(z.imag, 9)))
    return out
