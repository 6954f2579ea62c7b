"""The semi-conjugacy lift h_a from the basin of f_a to the basin of the
quadratic model, the parametrizations of adjacent and capture components,
dynamical internal rays for f_a, and parameter-plane internal objects.

The lift of a point z follows the paper-style pull-back: iterate z forward
to its first certified passage onto the image-petal sheet, read the Fatou
coordinate there, map it into the model petal, and pull back under the model
map step by step.  Steps whose dynamical point sits on the petal sheet or on
its mirror component have a canonical model preimage; the remaining steps
need one bit (upper or lower model half-plane).  That bit is fixed by
continuity: along the real axis every lift is real and unambiguous, and
values elsewhere are obtained by continuation along parameter or point
paths, with each step's pull-back choices anchored to the previous lifted
orbit.  A persistent ambiguity raises SideUndecided instead of guessing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import dynamics, model
from .errors import (NotAdjacent, NotApplicable, NotInBasin, OrbitBudget,
                     RayHitsCriticalValue, SideUndecided, WrongDepth,
                     ContinuationStalled)
from .fatou import FatouCoordinate, capture_depth

ENTRY_SHEET_RE = 1.0       # Re fatou threshold certifying the image-petal sheet
SHEET_TOL = 1e-6
K_SEARCH_BUDGET = 10000


@dataclass
class ConjugacyLift:
    a: complex
    value: complex                    # lifted model point
    labels: str                       # one letter per pull-back step:
                                      # P petal sheet, Q mirror sheet, +/- model half
    orbit: list[complex] = field(default_factory=list)   # lifted model orbit m_0..m_k

    @property
    def model_orbit(self):
        return self.orbit


class LiftContext:
    """Per-parameter cache: Fatou handle plus the mirror-lobe polygon."""

    def __init__(self, a: complex, fc: FatouCoordinate | None = None):
        self.a = complex(a)
        self.fc = fc or FatouCoordinate(a)
        self._mirror_lobe = None

    def mirror_lobe(self) -> np.ndarray:
        """Polygon around the component of f^{-1}(image petal) attached to
        the petal at c_plus (the analog of the model's -Omega0)."""
        if self._mirror_lobe is None:
            self._mirror_lobe = _mirror_lobe_polygon(self.fc)
        return self._mirror_lobe


def _mirror_lobe_polygon(fc: FatouCoordinate, y_max: float = 12.0,
                         n: int = 160) -> np.ndarray:
    """Boundary of the non-petal preimage component of the image petal.

    For each boundary point of the image petal (Re fatou = 1 level) the
    cubic has three preimages; removing the petal-sheet one leaves the two
    arcs bounding the mirror lobe, chained through c_plus.
    """
    a = fc.a
    t = np.linspace(-1.0, 1.0, n | 1)
    ys = y_max * t ** 3
    plus_arm: list[complex] = []
    minus_arm: list[complex] = []
    prev_pair: tuple[complex, complex] | None = None
    for y in ys:
        target = fc.petal_inverse(1.0 + 1j * y)
        petal_pre = fc.petal_inverse(1j * y) if abs(y) > 1e-12 else fc.c_plus
        roots = np.roots([1.0, a, 1.0, -target])
        others = sorted(roots, key=lambda r: abs(complex(r) - petal_pre))[1:]
        p, q = complex(others[0]), complex(others[1])
        if prev_pair is not None:
            # keep the two arcs continuous
            if abs(p - prev_pair[0]) + abs(q - prev_pair[1]) > \
               abs(q - prev_pair[0]) + abs(p - prev_pair[1]):
                p, q = q, p
        plus_arm.append(p)
        minus_arm.append(q)
        prev_pair = (p, q)
    return np.array(plus_arm + minus_arm[::-1], dtype=np.complex128)


def _forward_orbit_to_sheet(ctx: LiftContext, z: complex,
                            budget: int = K_SEARCH_BUDGET):
    """Orbit z, f(z), ... up to the first certified image-petal-sheet point."""
    fc = ctx.fc
    orbit = [complex(z)]
    for k in range(budget):
        x = orbit[-1]
        ok, _ = fc.sheet_certificate(x, tol=SHEET_TOL, min_real=ENTRY_SHEET_RE)
        if ok:
            return orbit, k
        if abs(x) > fc.germ.escape_radius:
            raise NotInBasin(f"orbit escaped after {k} iterates")
        orbit.append(dynamics.evaluate(ctx.a, x))
    raise OrbitBudget(f"no certified petal passage within {budget} iterates")


def lift_orbit(ctx: LiftContext, z: complex,
               reference: list[complex] | None = None) -> ConjugacyLift:
    """Lift z through the semi-conjugacy; reference, when given, is the
    lifted model orbit of a nearby point with the same combinatorics and
    resolves the two-fold pull-back choices by proximity."""
    fc = ctx.fc
    mdl = model.shared_model()
    orbit, k = _forward_orbit_to_sheet(ctx, z)
    zeta = fc(orbit[k])
    m = mdl.petal_inverse(zeta)
    lifted = [m]
    labels = []
    for j in range(k - 1, -1, -1):
        x = orbit[j]
        m_next = lifted[0]
        ok, _ = fc.sheet_certificate(x, tol=SHEET_TOL, min_real=-0.25)
        if ok:
            zj = fc(x)
            mj = mdl.petal_inverse(zj)
            labels.append("P")
        else:
            in_mirror = model.point_in_polygon(x, ctx.mirror_lobe())
            if in_mirror:
                zj = fc(x)
                mj = -mdl.petal_inverse(zj)
                labels.append("Q")
            else:
                s = model.QuadraticModel.pull_up(m_next)
                cands = (s, -s)
                if reference is not None and j < len(reference):
                    ref = reference[j]
                    d0, d1 = abs(cands[0] - ref), abs(cands[1] - ref)
                    sep = abs(cands[0] - cands[1])
                    if min(d0, d1) > 0.45 * sep + 1e-12 and \
                            not (sep < 1e-4 and min(d0, d1) < 0.08):
                        raise SideUndecided(
                            f"reference too far from both branches at step {j}")
                    mj = cands[0] if d0 <= d1 else cands[1]
                elif abs(x.imag) < 1e-14 and abs(ctx.a.imag) < 1e-14:
                    # real dynamics: a real basin point always lifts onto a
                    # petal sheet; reaching here means the combinatorics
                    # changed and the caller must refine its path
                    raise SideUndecided(f"real orbit point off both sheets at step {j}")
                else:
                    raise SideUndecided(
                        f"no reference for a two-fold choice at step {j}")
                labels.append("+" if mj.imag > 0 else "-")
        if abs(model.QuadraticModel.apply(mj) - m_next) > 1e-6:
            raise SideUndecided(
                f"lift chain broke at step {j} "
                f"(|P(m_j) - m_(j+1)| = {abs(model.QuadraticModel.apply(mj) - m_next):.2e})")
        lifted.insert(0, mj)
    return ConjugacyLift(ctx.a, lifted[0], "".join(reversed(labels)), lifted)


def lift_to_model(a: complex, z: complex, ctx: LiftContext | None = None,
                  max_bisection: int = 24) -> ConjugacyLift:
    """Public lift of a basin point: continuation along the segment from a
    petal anchor to z resolves pull-back ambiguities by continuity."""
    ctx = ctx or LiftContext(a)
    try:
        return lift_orbit(ctx, z)
    except SideUndecided:
        pass
    anchor = ctx.fc.v_plus
    path = [(0.0, lift_orbit(ctx, anchor))]
    t = 1.0
    bisections = 0
    while True:
        t_prev, ref = path[-1]
        zt = anchor + t * (z - anchor)
        try:
            lifted = lift_orbit(ctx, zt, reference=ref.orbit)
        except SideUndecided:
            bisections += 1
            if bisections > max_bisection * 8:
                raise
            t = 0.5 * (t_prev + t)
            if t - t_prev < 1e-9:
                raise
            continue
        except NotInBasin as e:
            raise NotInBasin(f"continuation path left the basin at t={t:.3g}: {e}")
        path.append((t, lifted))
        if t >= 1.0:
            return lifted
        t = min(1.0, t + 2.0 * (t - t_prev))


# ---------------------------------------------------------------------------
# Parametrizations of adjacent and capture components
# ---------------------------------------------------------------------------

def _lift_free_value(a: complex, reference: list[complex] | None = None,
                     ctx: LiftContext | None = None) -> ConjugacyLift:
    ctx = ctx or LiftContext(a)
    return lift_orbit(ctx, ctx.fc.v_minus, reference=reference)


def _continue_along_parameters(a_from: complex, lift_from: ConjugacyLift,
                               a_to: complex, max_steps: int = 4000) -> ConjugacyLift:
    """Continue a -> lift(v_minus(a)) along the segment [a_from, a_to]."""
    t = 1.0
    t_prev = 0.0
    ref = lift_from
    fails = 0
    while True:
        at = a_from + t * (a_to - a_from)
        try:
            lifted = _lift_free_value(at, reference=ref.orbit)
        except (SideUndecided, NotInBasin, OrbitBudget) as e:
            fails += 1
            t = 0.5 * (t_prev + t)
            if fails > max_steps or t - t_prev < 1e-10:
                raise ContinuationStalled(
                    f"parametrization continuation stalled near "
                    f"a = {a_from + t * (a_to - a_from):.6g}: {e}",
                    last_point=a_from + t_prev * (a_to - a_from))
            continue
        if t >= 1.0:
            return lifted
        t_prev, ref = t, lifted
        t = min(1.0, t + 2.0 * (t - t_prev) if t > t_prev else t + 0.05)


def _real_anchor() -> complex:
    return complex(0.5 * (math.sqrt(3.0) + 2.0), 0.0)


def phi_adjacent(a: complex, verify: bool = False) -> complex:
    """Phi(a): position of the lifted free critical value, parametrizing the
    adjacent components; mirror parameters are handled by the odd symmetry
    of the family (the lift itself is built in the right-half-plane wing)."""
    a = complex(a)
    if a == 0:
        raise NotApplicable("a = 0")
    if verify:
        v = capture_depth(a)
        if not v.is_adjacent:
            raise NotAdjacent(f"capture_depth(a) = {v.kind}")
    wing_a = -a if a.real < 0 or (a.real == 0 and a.imag < 0) else a
    if abs(wing_a - _real_anchor()) < 1e-9:
        return _lift_free_value(wing_a).value
    anchor = _real_anchor()
    base = _lift_free_value(anchor)
    try:
        return _continue_along_parameters(anchor, base, wing_a).value
    except NotInBasin as e:
        raise NotAdjacent(f"free critical value left the basin: {e}")


def phi_capture(a: complex, depth: int, verify: bool = False) -> complex:
    """Phi_U(a) = lift of the first basin iterate of the free critical orbit
    on a capture component of the given depth; anchored at the component
    center (where the value is the model critical point 0)."""
    a = complex(a)
    if verify:
        v = capture_depth(a, max_depth=max(depth + 2, 4))
        if not (v.is_capture and v.depth == depth):
            raise WrongDepth(f"capture_depth(a) = {v.kind}({v.depth})")
    centers = dynamics.solve_capture_centers(depth)
    if not centers:
        raise WrongDepth(f"no capture centers at depth {depth}")
    center = min(centers, key=lambda c: abs(c - a))

    def lift_entry(at: complex, reference=None) -> ConjugacyLift:
        ctx = LiftContext(at)
        z = ctx.fc.c_minus
        for _ in range(depth + 1):
            z = dynamics.evaluate(at, z)
        return lift_orbit(ctx, z, reference=reference)

    base = lift_entry(center)
    if abs(a - center) < 1e-12:
        return base.value
    t, t_prev, ref, fails = 1.0, 0.0, base, 0
    while True:
        at = center + t * (a - center)
        try:
            lifted = lift_entry(at, reference=ref.orbit)
        except (SideUndecided, NotInBasin, OrbitBudget) as e:
            fails += 1
            t = 0.5 * (t_prev + t)
            if fails > 2000 or t - t_prev < 1e-10:
                raise ContinuationStalled(
                    f"capture parametrization stalled: {e}",
                    last_point=center + t_prev * (a - center))
            continue
        if t >= 1.0:
            return lifted.value
        t_prev, ref = t, lifted
        t = min(1.0, t + 2.0 * (t - t_prev) if t > t_prev else t + 0.05)


# ---------------------------------------------------------------------------
# Dynamical internal rays for f_a
# ---------------------------------------------------------------------------

def _inverse_lift_point(ctx: LiftContext, m: complex,
                        reference: list[complex] | None,
                        prev_reference: list[complex] | None = None,
                        petal_hops: int = 64) -> tuple[complex, list[complex]]:
    """h^{-1}(m): iterate the model point into the model petal, pull the
    Fatou coordinate back through f_a choosing cubic roots by continuity
    against the reference backward orbit.

    prev_reference enables linear extrapolation of the reference: curves
    that pass straight through a critical preimage (a fold of the chain)
    separate the two branches symmetrically around the old reference, and
    only the extrapolated motion can select the continuing branch.
    """
    mdl = model.shared_model()
    # iterate forward until on the model petal sheet (Re fatou > 1 and
    # round trip); the model sheet test mirrors the dynamical one
    fwd = [complex(m)]
    K = 0
    cur = complex(m)
    while K < petal_hops:
        try:
            zeta = mdl.fatou(cur)
            if zeta.real > ENTRY_SHEET_RE and \
               abs(mdl.petal_inverse(zeta) - cur) < SHEET_TOL:
                break
        except NotInBasin:
            pass
        cur = model.QuadraticModel.apply(cur)
        fwd.append(cur)
        K += 1
    else:
        raise OrbitBudget("model point did not reach the model petal sheet")
    zeta = mdl.fatou(cur)
    x = ctx.fc.petal_inverse(zeta)
    back = [x]
    for j in range(K - 1, -1, -1):
        target = back[0]
        roots = [complex(r) for r in np.roots([1.0, ctx.a, 1.0, -target])]
        pick = None
        if reference is not None and j < len(reference):
            ref = reference[j]
            if prev_reference is not None and j < len(prev_reference):
                ref = ref + (ref - prev_reference[j])
            roots.sort(key=lambda r: abs(r - ref))
            sep = abs(roots[0] - roots[1]) if len(roots) > 1 else math.inf
            # collided roots (curve passing a critical preimage): either
            # branch is the same point to within sep
            if abs(roots[0] - ref) > 0.45 * sep and not (sep < 1e-4 and
                                                         abs(roots[0] - ref) < 0.08):
                raise SideUndecided(f"backward branch ambiguous at step {j}")
            pick = roots[0]
        else:
            # no reference: only valid when the preimage is forced through
            # the petal sheets (real-symmetric or petal-side continuation)
            mj = fwd[j]
            try:
                zj = mdl.fatou(mj)
            except NotInBasin:
                raise SideUndecided(f"no reference at backward step {j}")
            cand_petal = None
            if zj.real > -0.25:
                try:
                    if abs(mdl.petal_inverse(zj) - mj) < SHEET_TOL:
                        cand_petal = ctx.fc.petal_inverse(zj)
                    elif abs(-mdl.petal_inverse(zj) - mj) < SHEET_TOL:
                        dyn_mirror = min(
                            roots, key=lambda r: 0 if model.point_in_polygon(
                                r, ctx.mirror_lobe()) else 1)
                        cand_petal = dyn_mirror
                except Exception:
                    cand_petal = None
            if cand_petal is None:
                raise SideUndecided(f"no reference at backward step {j}")
            pick = min(roots, key=lambda r: abs(r - cand_petal))
        if abs(target - ctx.fc.v_minus) < 1e-6:
            raise RayHitsCriticalValue(
                f"pull-back passed through the free critical value at step {j}")
        back.insert(0, pick)
    return back[0], back


def dynamical_internal_ray(a: complex, angle, n_links: int = 12,
                           samples_per_link: int = 120) -> list[np.ndarray]:
    """Internal ray of f_a: the model jigsaw ray transferred through the
    conjugacy (degree-2 case) or built by the same pull-back with crash
    detection at the free critical value (adjacent case)."""
    ctx = LiftContext(a)
    links_model = model.model_internal_ray(angle, n_links=n_links,
                                           samples_per_link=samples_per_link)
    out = []
    ref_orbit = None           # backward orbit of the previous sample
    older_orbit = None         # ... and of the one before, for extrapolation
    prev_m = None
    for link in links_model:
        pts = []
        for mz in link:
            mz = complex(mz)
            if prev_m is not None and abs(mz - prev_m) < 1e-12:
                pts.append(pts[-1] if pts else out[-1][-1])
                continue
            try:
                x, back = _inverse_lift_point(ctx, mz, ref_orbit, older_orbit)
            except SideUndecided:
                # densify between the previous model sample and this one
                if prev_m is None:
                    raise
                x = back = None
                for frac in (0.25, 0.5, 0.75, 1.0):
                    mm = prev_m + frac * (mz - prev_m)
                    x, back = _inverse_lift_point(ctx, mm, ref_orbit, older_orbit)
                    older_orbit, ref_orbit = ref_orbit, back
            else:
                older_orbit, ref_orbit = ref_orbit, back
            pts.append(x)
            prev_m = mz
        out.append(np.array(pts, dtype=np.complex128))
    return out


# ---------------------------------------------------------------------------
# Parameter-plane internal objects (rays/equipotentials inside components)
# ---------------------------------------------------------------------------

def _transport_parameter(lift_value, a_seed: complex, target: complex,
                         max_iter: int = 48,
                         fd_h: float = 1e-7) -> complex | None:
    """One Newton solve of lift_value(a) = target seeded at a_seed."""
    a = a_seed
    for _ in range(max_iter):
        try:
            F = lift_value(a) - target
        except Exception:
            return None
        if abs(F) < 1e-9:
            return a
        h = fd_h * max(1.0, abs(a))
        try:
            Fh = lift_value(a + h) - target
        except Exception:
            return None
        d = (Fh - F) / h
        if d == 0:
            return None
        step = F / d
        if abs(step) > 0.2 * max(abs(a), 1.0):
            step *= 0.2 * max(abs(a), 1.0) / abs(step)
        a = a - step
    return None


def transport_curve(lift_value, a_seed: complex, model_curve: np.ndarray,
                    max_fails: int = 200) -> np.ndarray:
    """March a(p) with lift_value(a(p)) = p along a model-plane polyline,
    bisecting strides that Newton cannot follow."""
    out = []
    a = a_seed
    i = 0
    pts = list(model_curve)
    fails = 0
    while i < len(pts):
        target = complex(pts[i])
        anew = _transport_parameter(lift_value, a, target)
        if anew is None:
            fails += 1
            if fails > max_fails:
                raise ContinuationStalled(
                    f"curve transport stalled at sample {i}",
                    last_point=a)
            if i > 0:
                mid = 0.5 * (complex(pts[i - 1]) + target)
            else:
                mid = target
            pts.insert(i, mid)
            continue
        a = anew
        out.append(a)
        i += 1
    return np.array(out, dtype=np.complex128)


def gamma_curve(samples: int = 96, y_min: float = 6e-4,
                y_max: float = 160.0) -> np.ndarray:
    """The arc joining sqrt(3) and 2 on which the lifted free value runs
    along the image-petal boundary; with [0, sqrt(3)] it forms the zeroth
    parameter equipotential of the right-hand adjacent component."""
    ys = np.geomspace(y_min, y_max, samples)
    mdl = model.shared_model()
    targets = np.array([mdl.petal_inverse(1.0 + 1j * y) for y in ys])

    state = {"ref": None}

    def lift_value(a: complex) -> complex:
        ctx = LiftContext(a)
        lifted = lift_orbit(ctx, ctx.fc.v_minus, reference=state["ref"])
        state["ref"] = lifted.orbit
        return lifted.value

    # seed just above sqrt(3) inside the wing
    a0 = math.sqrt(3.0) + 0.02 + 0.02j
    curve = transport_curve(lift_value, a0, targets)
    return curve


def parameter_internal_ray(angle, component_center: complex | None = None,
                           depth: int | None = None, n_links: int = 6,
                           samples_per_link: int = 48) -> np.ndarray:
    """Preimage of a model internal ray under the component parametrization:
    the adjacent wing when no center is given, else the capture component
    anchored at its center."""
    links = model.model_internal_ray(angle, n_links=n_links,
                                     samples_per_link=samples_per_link)
    targets = np.concatenate(links)
    state = {"ref": None}
    if component_center is None:
        def lift_value(a: complex) -> complex:
            ctx = LiftContext(a)
            lifted = lift_orbit(ctx, ctx.fc.v_minus, reference=state["ref"])
            state["ref"] = lifted.orbit
            return lifted.value
        seed = _real_anchor()
        # walk from the anchor value to the ray start first
        start = complex(targets[0])
        pre = np.linspace(0, 1, 24)
        base = lift_value(seed)
        path = base + (start - base) * pre
        a = transport_curve(lift_value, seed, path)[-1]
        return transport_curve(lift_value, a, targets)
    if depth is None:
        raise ValueError("depth required with a component center")

    def lift_value(a: complex) -> complex:
        ctx = LiftContext(a)
        z = ctx.fc.c_minus
        for _ in range(depth + 1):
            z = dynamics.evaluate(a, z)
        lifted = lift_orbit(ctx, z, reference=state["ref"])
        state["ref"] = lifted.orbit
        return lifted.value

    start = complex(targets[0])
    pre = np.linspace(0, 1, 24)
    path = (start * pre).astype(np.complex128)  # from the center value 0
    a = transport_curve(lift_value, component_center, path)[-1]
    return transport_curve(lift_value, a, targets)


def capture_equipotential(component_center: complex, depth: int,
                          level: int = 0, samples: int = 160) -> np.ndarray:
    """Closed parameter curve: preimage of the model equipotential E(level)
    inside one capture component (anchored at its center)."""
    curves = model.model_equipotential(level, samples=samples)
    target = curves[0]
    state = {"ref": None}

    def lift_value(a: complex) -> complex:
        ctx = LiftContext(a)
        z = ctx.fc.c_minus
        for _ in range(depth + 1):
            z = dynamics.evaluate(a, z)
        lifted = lift_orbit(ctx, z, reference=state["ref"])
        state["ref"] = lifted.orbit
        return lifted.value

    start = complex(target[0])
    pre = np.linspace(0, 1, 24)
    path = (start * pre).astype(np.complex128)
    a = transport_curve(lift_value, component_center, path)[-1]
    return transport_curve(lift_value, a, target)
