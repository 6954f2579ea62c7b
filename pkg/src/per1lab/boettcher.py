"""Boettcher coordinate at infinity, external rays and equipotentials in the
dynamical plane, the degree-3 parameter map a -> phi_a(v_minus(a)), and
parameter external rays with landing estimation.

Ray points at low potential are found through the composed equation

    phi(f^n(z)) = exp(3^n (s + 2 pi i t)),        s = log r,

with n chosen so the argument of phi is comfortably beyond the escape
radius, where the principal-log product for phi is unconditionally valid.
Newton continuation steps the log-potential down geometrically
(s -> s / tau) with adaptive halving, which also serves as crash detection:
a ray that crashes on a precritical point makes the Newton solve diverge
persistently.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import dynamics
from .angles import RationalAngle
from .errors import (BranchAmbiguity, NotEscaping, NotInHInfinity,
                     SeedEscapedQuadrant)

TAU_DEFAULT = 1.1
SEED_POTENTIAL = 1e6
LAND_CLUSTER = 10
LAND_SPREAD = 1e-4
LAND_POTENTIAL = 1.0 + 1e-6

QUADRANTS = ("S", "iS", "-S", "-iS")
_QUADRANT_MID = {"S": math.pi / 4, "iS": 3 * math.pi / 4,
                 "-S": -3 * math.pi / 4, "-iS": -math.pi / 4}


def boettcher(a: complex, z: complex, max_iter: int = 400) -> complex:
    """phi(z) = z * exp(sum 3^{-(n+1)} Log(f(z_n)/z_n^3)), principal logs.

    Valid when every pre-escape factor stays in the safety disk |w - 1| < 1;
    leaving it raises BranchAmbiguity, a bounded orbit raises NotEscaping.
    """
    a = complex(a)
    z = complex(z)
    if z == 0:
        raise NotEscaping("z = 0 is fixed")
    verdict = dynamics.escape_classify(a, z, max_iter=max_iter)
    if not verdict.escaped:
        raise NotEscaping(f"orbit stayed below escape radius for {max_iter} iterates")
    R = dynamics.escape_radius(a)
    logphi = cmath.log(z)
    scale = 1.0 / 3.0
    escaped = abs(z) > R
    for n in range(max_iter + 80):
        w = 1.0 + (a + 1.0 / z) / z
        if not escaped and abs(w - 1.0) >= 1.0:
            raise BranchAmbiguity(
                f"factor left the safety disk at iterate {n} (|w-1|={abs(w-1):.3g})")
        logphi += scale * cmath.log(w)
        if escaped and abs(w - 1.0) < 1e-17:
            return cmath.exp(logphi)
        z = dynamics.evaluate(a, z)
        if abs(z) > R:
            escaped = True
        if abs(z) > 1e130:
            # remaining factors are below double-precision resolution
            return cmath.exp(logphi)
        scale /= 3.0
    return cmath.exp(logphi)


def _phi_far(a: complex, Z: complex, dZ_dz: complex | None = None,
             dZ_da: complex | None = None):
    """Boettcher value at a point beyond the escape radius, with optional
    forward-mode derivatives; returns (phi, dphi_dz, dphi_da)."""
    z = Z
    dz = dZ_dz if dZ_dz is not None else 0.0
    dza = dZ_da if dZ_da is not None else 0.0
    logphi = cmath.log(z)
    dlog = dz / z
    dloga = dza / z
    scale = 1.0 / 3.0
    for _ in range(80):
        iz = 1.0 / z
        w = 1.0 + (a + iz) * iz
        dw_dz = (-a - 2.0 * iz) * iz * iz
        logphi += scale * cmath.log(w)
        if dZ_dz is not None:
            dlog += scale * dw_dz * dz / w
        if dZ_da is not None:
            dloga += scale * (iz + dw_dz * dza) / w
        if abs(w - 1.0) < 1e-17 or abs(z) > 1e130:
            break
        if dZ_dz is not None:
            dz = dynamics.derivative(a, z) * dz
        if dZ_da is not None:
            dza = dynamics.derivative(a, z) * dza + z * z
        z = dynamics.evaluate(a, z)
        scale /= 3.0
    phi = cmath.exp(logphi)
    return phi, phi * dlog, phi * dloga


def phi_infty(a: complex, max_iter: int = 100000) -> complex:
    """Phi_infinity(a) = phi_a(v_minus(a)) for a with escaping c_minus."""
    a = complex(a)
    _, vm = dynamics.critical_values(a)
    verdict = dynamics.escape_classify(a, vm, max_iter=max_iter)
    if not verdict.escaped:
        raise NotInHInfinity(f"c_minus does not escape for a = {a}")
    return boettcher(a, vm)


def phi_infty_winding(radius: float, samples: int = 720) -> int:
    """Net winding number of Phi_infinity along |a| = radius."""
    total = 0.0
    prev = None
    for k in range(samples + 1):
        a = radius * cmath.exp(2j * math.pi * k / samples)
        val = phi_infty(a)
        ang = cmath.phase(val)
        if prev is not None:
            d = ang - prev
            while d > math.pi:
                d -= 2 * math.pi
            while d < -math.pi:
                d += 2 * math.pi
            total += d
        prev = ang
    return round(total / (2 * math.pi))


# ---------------------------------------------------------------------------
# Ray data types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PotentialSample:
    point: complex
    potential: float         # r > 1
    angle: RationalAngle


@dataclass(frozen=True)
class Landing:
    kind: str                 # "landed" | "crashed" | "truncated"
    point: complex | None = None
    confidence: float = math.inf
    reason: str = ""

    @property
    def landed(self):
        return self.kind == "landed"


@dataclass
class RayTrace:
    angle: RationalAngle
    samples: list[PotentialSample]
    landing: Landing
    quadrant: str | None = None    # parameter rays only

    def records(self):
        """JSON-lines records: one per sample, landing verdict last."""
        q = self.quadrant or ""
        for s in self.samples:
            yield {"angle_num": self.angle.num, "angle_den": self.angle.den,
                   "quadrant": q, "r": s.potential,
                   "re": s.point.real, "im": s.point.imag}
        rec = {"angle_num": self.angle.num, "angle_den": self.angle.den,
               "quadrant": q, "landing": self.landing.kind,
               "confidence": self.landing.confidence}
        if self.landing.point is not None:
            rec["re"] = self.landing.point.real
            rec["im"] = self.landing.point.imag
        if self.landing.reason:
            rec["reason"] = self.landing.reason
        yield rec

    @property
    def end(self) -> complex:
        if self.landing.point is not None:
            return self.landing.point
        return self.samples[-1].point


def extrapolate_landing(samples: list[tuple[float, complex]],
                        window_frac: float = 0.65) -> tuple[complex, float]:
    """Extrapolate the landing point from tail samples (s = log r, z).

    Landings at (pre)parabolic points converge like a power of
    u = 1/log(1/s); z is fitted against powers of u and of sqrt(u) over the
    tail window log(1/s) >= window_frac * max, picking the basis with the
    smaller residual (repelling landings converge faster than any power and
    either basis absorbs them).  The confidence is the Richardson-style
    spread between the degree-3 and degree-2 fits.
    """
    usable = [(s, z) for s, z in samples if 0 < s < 0.5]
    if len(usable) < 5:
        z = samples[-1][1]
        spread = max(abs(z - zz) for _, zz in samples[-3:]) if len(samples) >= 3 else math.inf
        return z, spread
    Lmax = math.log(1.0 / usable[-1][0])
    tail = [(s, z) for s, z in usable if math.log(1.0 / s) >= window_frac * Lmax]
    if len(tail) < 5:
        tail = usable[-8:]
    step = max(1, len(tail) // 24)
    tail = tail[::step] + ([tail[-1]] if (len(tail) - 1) % step else [])
    u = np.array([1.0 / math.log(1.0 / s) for s, _ in tail])
    z = np.array([p for _, p in tail])
    deg = 3 if len(tail) >= 8 else (2 if len(tail) >= 6 else 1)
    best = None
    for var in (u, np.sqrt(u)):
        V = np.vander(var, deg + 1)
        coef, *_ = np.linalg.lstsq(V, z, rcond=None)
        resid = float(np.max(np.abs(V @ coef - z)))
        if deg >= 2:
            Vlo = np.vander(var, deg)
            coef_lo, *_ = np.linalg.lstsq(Vlo, z, rcond=None)
            conf = abs(complex(coef[-1]) - complex(coef_lo[-1])) + resid
        else:
            conf = resid + float(np.max(np.abs(z - z[-1])))
        if best is None or resid < best[2]:
            best = (complex(coef[-1]), conf, resid)
    return best[0], best[1]


def _landing_verdict(samples: list[tuple[float, complex]], reached_rmin: bool,
                     crash_reason: str | None) -> Landing:
    if crash_reason is not None:
        return Landing("crashed", reason=crash_reason)
    tail = samples[-LAND_CLUSTER:]
    spread = max(abs(z1 - z2) for _, z1 in tail for _, z2 in tail)
    low_potential = samples[-1][0] <= math.log(LAND_POTENTIAL) + 1e-15
    point, conf = extrapolate_landing(samples)
    if reached_rmin and low_potential and min(spread, conf) < 1e-3:
        # parabolic landings converge like 1/log(1/s); the 10-sample cluster
        # rule tightens the confidence but cannot be required at floating-
        # point-representable potentials, so the verdict leans on the
        # extrapolation confidence instead
        return Landing("landed", point=point,
                       confidence=conf if spread < LAND_SPREAD else max(conf, 0.1 * spread))
    return Landing("truncated", point=point, confidence=max(conf, spread))


# ---------------------------------------------------------------------------
# Dynamical rays
# ---------------------------------------------------------------------------

def _comfort_log_potential(a: complex) -> float:
    return math.log(dynamics.escape_radius(a)) + 1.0


def _dyn_target(a, s, t_frac, depth):
    tt = t_frac
    for _ in range(depth):
        tt = (3.0 * tt) % 1.0
    return cmath.exp((3.0 ** depth) * s + 2j * math.pi * tt)


def _dyn_ray_newton(a: complex, s: float, t_frac: float, seed: complex,
                    L1: float, tol: float = 1e-12, max_newton: int = 40):
    """Solve phi(f^n(z)) = target for z; returns (z, iterations) or (None, n)."""
    depth = max(0, math.ceil(math.log(L1 / s) / math.log(3.0))) if s < L1 else 0
    target = _dyn_target(a, s, t_frac, depth)
    z = seed
    for it in range(max_newton):
        Z, dZ = z, 1.0 + 0.0j
        overflow = False
        for _ in range(depth):
            dZ = dynamics.derivative(a, Z) * dZ
            Z = dynamics.evaluate(a, Z)
            if abs(Z) > 1e140:
                overflow = True
                break
        if overflow:
            return None, it
        phi, dphi, _ = _phi_far(a, Z, dZ_dz=dZ)
        F = phi - target
        if abs(F) < tol * abs(target):
            return z, it
        if dphi == 0:
            return None, it
        z = z - F / dphi
    return None, max_newton


def trace_dynamical_ray(a: complex, angle: RationalAngle, r_min: float = 0.0,
                        r_start: float = 100.0, tau: float = TAU_DEFAULT,
                        max_samples: int = 5000,
                        log_r_min: float | None = None) -> RayTrace:
    """External ray of the given exact angle, traced from potential r_start
    down toward r_min by geometric Newton continuation.

    log_r_min, when given, overrides r_min; it is the way to request traces
    deeper than potentials representable as 1 + eps in double precision.
    """
    if log_r_min is not None:
        r_min = math.exp(min(log_r_min, 700.0)) if log_r_min > 1e-3 else 1.0 + log_r_min
    if log_r_min is None and not (1.0 < r_min < r_start):
        raise ValueError("need 1 < r_min < r_start")
    a = complex(a)
    t = angle.turns()
    L1 = _comfort_log_potential(a)
    s_hi = max(3.0 * L1, math.log(r_start))
    # asymptotic seed phi(z) ~ z + a/3
    W = cmath.exp(s_hi + 2j * math.pi * t)
    z, _ = _dyn_ray_newton(a, s_hi, t, W - a / 3.0, L1)
    if z is None:
        raise NotEscaping("could not seed the ray at high potential")
    s = s_hi
    s_rec = math.log(r_start)
    s_min = log_r_min if log_r_min is not None else math.log(r_min)
    samples: list[tuple[float, complex]] = []
    crash = None
    # walk down to the recording state first, then record
    pending = sorted({s_rec, s_min}, reverse=True)
    halvings = 0
    while s > s_min and len(samples) < max_samples:
        s_next = max(s / tau, s_min)
        # always hit the exact recording endpoints
        for p in pending:
            if s > p > s_next:
                s_next = p
                break
        znew, _ = _dyn_ray_newton(a, s_next, t, z, L1)
        step_bound = max(0.5 * max(abs(z), 1e-3), 10.0 * abs(z) * (s - s_next) + 1e-2)
        if znew is None or abs(znew - z) > step_bound:
            halvings += 1
            if halvings > 60:
                crash = f"newton stalled near s={s:.3g}"
                break
            tau = math.sqrt(tau)
            continue
        z, s = znew, s_next
        if s <= s_rec + 1e-15:
            samples.append((s, z))
    reached = s <= s_min * (1 + 1e-12) or (samples and samples[-1][0] <= s_min + 1e-15)
    if not samples:
        samples.append((s, z))
    landing = _landing_verdict(samples, reached, crash)
    pts = [PotentialSample(z, math.exp(s), angle) for s, z in samples]
    return RayTrace(angle, pts, landing)


def equipotential_dynamical(a: complex, r: float, n_samples: int = 512) -> np.ndarray:
    """Closed polyline of constant Green potential log r, uniformly spaced in
    angle, each point solved by Newton to high residual."""
    if r <= 1.0:
        raise ValueError("need r > 1")
    a = complex(a)
    s = math.log(r)
    L1 = _comfort_log_potential(a)
    # reach the level along the angle-0 ray
    z = None
    for seed_try in range(2):
        sc = max(3.0 * L1, s)
        W = cmath.exp(sc)
        z, _ = _dyn_ray_newton(a, sc, 0.0, W - a / 3.0, L1)
        if z is None:
            raise NotEscaping("equipotential seed failed")
        while sc > s:
            sc = max(sc / TAU_DEFAULT, s)
            z, _ = _dyn_ray_newton(a, sc, 0.0, z, L1)
            if z is None:
                raise NotEscaping("equipotential descent failed")
        break
    pts = np.empty(n_samples + 1, dtype=np.complex128)
    pts[0] = z
    t_prev = 0.0
    for k in range(1, n_samples + 1):
        t = k / n_samples
        z = _march_angle(lambda tt, seed: _dyn_ray_newton(a, s, tt % 1.0, seed,
                                                          L1, tol=1e-13)[0],
                         t_prev, t, z)
        if z is None:
            raise NotEscaping(f"equipotential stalled at angle {t}")
        t_prev = t
        pts[k] = z
    return pts


def _march_angle(solve, t_prev, t_target, seed, max_depth=12):
    """Continuation in the angle with adaptive bisection of the stride."""
    stack = [(t_prev, t_target)]
    z = seed
    depth = 0
    while stack:
        lo, hi = stack.pop()
        znew = solve(hi, z)
        if znew is not None:
            z = znew
            continue
        depth += 1
        if depth > max_depth * 8 or hi - lo < 1e-9:
            return None
        mid = 0.5 * (lo + hi)
        stack.append((mid, hi))
        stack.append((lo, mid))
    return z


# ---------------------------------------------------------------------------
# Parameter rays
# ---------------------------------------------------------------------------

def _vminus_with_derivative(a: complex):
    cp = dynamics.critical_points(a)
    s = dynamics.sigma(a)
    dc = (-1.0 - a / s) / 3.0 if s != 0 else 0.0
    v = dynamics.evaluate(a, cp.c_minus)
    dv = dynamics.derivative(a, cp.c_minus) * dc + cp.c_minus * cp.c_minus
    return v, dv


def _param_point_newton(a: complex, s: float, t_frac: float,
                        tol: float = 1e-11, max_newton: int = 60):
    """Solve phi_a(v_minus(a)) = exp(s + 2 pi i t) for a (composed form)."""
    for it in range(max_newton):
        try:
            v, dv = _vminus_with_derivative(a)
        except ZeroDivisionError:
            return None, it
        L1 = _comfort_log_potential(a)
        depth = max(0, math.ceil(math.log(L1 / s) / math.log(3.0))) if s < L1 else 0
        target = _dyn_target(a, s, t_frac, depth)
        Z, dZa = v, dv
        overflow = False
        for _ in range(depth):
            dZa = dynamics.derivative(a, Z) * dZa + Z * Z
            Z = dynamics.evaluate(a, Z)
            if abs(Z) > 1e140:
                overflow = True
                break
        if overflow or abs(Z) <= 1.0:
            return None, it
        phi, _, dphia = _phi_far(a, Z, dZ_da=dZa)
        F = phi - target
        if abs(F) < tol * abs(target):
            return a, it
        if dphia == 0:
            return None, it
        a = a - F / dphia
    return None, max_newton


def parameter_ray_seed(quadrant: str, angle: RationalAngle,
                       r0: float = SEED_POTENTIAL) -> complex:
    """Cube root of 27 r0 e^{2 pi i t} / 4 in the requested quadrant.

    Each closed quadrant carries angles spanning 3/4 of the circle; asking
    for an angle whose three ray branches all avoid the quadrant raises
    SeedEscapedQuadrant.
    """
    if quadrant not in QUADRANTS:
        raise ValueError(f"quadrant must be one of {QUADRANTS}")
    W = r0 * cmath.exp(2j * math.pi * angle.turns())
    base = (27.0 * W / 4.0) ** (1.0 / 3.0)
    mid = _QUADRANT_MID[quadrant]
    seed = min((base * cmath.exp(2j * math.pi * k / 3.0) for k in range(3)),
               key=lambda r: abs(cmath.phase(r * cmath.exp(-1j * mid))))
    if abs(cmath.phase(seed * cmath.exp(-1j * mid))) > math.pi / 4 + 1e-9:
        raise SeedEscapedQuadrant(
            f"no branch of the angle-{angle} ray enters quadrant {quadrant}")
    return seed


def trace_parameter_ray(quadrant: str, angle: RationalAngle, r_min: float = 0.0,
                        r0: float = SEED_POTENTIAL, tau: float = TAU_DEFAULT,
                        max_samples: int = 5000,
                        log_r_min: float | None = None) -> RayTrace:
    """Parameter external ray in the tagged cube-root branch."""
    if log_r_min is None and r_min <= 1.0:
        raise ValueError("need r_min > 1")
    t = angle.turns()
    a = parameter_ray_seed(quadrant, angle, r0)
    s = math.log(r0)
    a, _ = _param_point_newton(a, s, t)
    if a is None:
        raise SeedEscapedQuadrant("seed Newton failed at r0")
    samples: list[tuple[float, complex]] = [(s, a)]
    s_min = log_r_min if log_r_min is not None else math.log(r_min)
    crash = None
    halvings = 0
    while s > s_min and len(samples) < max_samples:
        s_next = max(s / tau, s_min)
        anew, _ = _param_point_newton(a, s_next, t)
        step_bound = 0.35 * max(abs(a), 0.5)
        if anew is None or abs(anew - a) > step_bound:
            halvings += 1
            if halvings > 60:
                crash = f"continuation stalled near s={s:.3g}"
                break
            tau = math.sqrt(tau)
            continue
        a, s = anew, s_next
        samples.append((s, a))
    reached = s <= s_min * (1 + 1e-12)
    if crash is not None and halvings > 60:
        # a persistent stall that crossed branches is the quadrant error
        pass
    landing = _landing_verdict(samples, reached, crash)
    pts = [PotentialSample(z, math.exp(sv), angle) for sv, z in samples]
    return RayTrace(angle, pts, landing, quadrant=quadrant)


def equipotential_parameter(r: float, n_samples: int = 768) -> np.ndarray:
    """Closed parameter-plane curve |Phi_infinity| = r; the preimage of the
    circle triple-covers the angle, so the parametrization runs 3 turns."""
    if r <= 1.0:
        raise ValueError("need r > 1")
    s = math.log(r)
    # descend along the S, angle-0 ray to the level
    a = parameter_ray_seed("S", RationalAngle(0, 1))
    sc = math.log(SEED_POTENTIAL)
    a, _ = _param_point_newton(a, sc, 0.0)
    if a is None:
        raise SeedEscapedQuadrant("equipotential seed failed")
    while sc > s:
        sc = max(sc / TAU_DEFAULT, s)
        anew, _ = _param_point_newton(a, sc, 0.0)
        if anew is None:
            raise SeedEscapedQuadrant("equipotential descent failed")
        a = anew
    pts = np.empty(n_samples + 1, dtype=np.complex128)
    pts[0] = a
    t_prev = 0.0
    for k in range(1, n_samples + 1):
        t = 3.0 * k / n_samples
        a = _march_angle(lambda tt, seed: _param_point_newton(seed, s, tt % 1.0)[0],
                         t_prev, t, a)
        if a is None:
            raise SeedEscapedQuadrant(f"equipotential stalled at sample {k}")
        t_prev = t
        pts[k] = a
    return pts
