"""Attracting Fatou coordinate machinery for germs u -> u + alpha u^2 + beta u^3.

Both the cubic family (alpha = a, beta = 1) and the quadratic model
z^2 + 1/4 shifted to u = z - 1/2 (alpha = 1, beta = 0) run through this
engine.  In the coordinate w = -1/(alpha u) the germ becomes

    F(w) = w + 1 + A/w + O(1/w^2),        A = 1 - q,  q = beta/alpha^2,

and the Fatou coordinate has the asymptotic expansion

    phi(w) = w - A Log w + p1/w + p2/w^2 + p3/w^3 + p4/w^4 + O(w^-5)

with no logarithmic corrections through this order.  The p_k below were
obtained by solving the Abel equation order by order; the translation
normalization is fixed by the caller.  Evaluation iterates the orbit into
the sector Re w > W0 and truncates once the local Abel defect of the
approximant drops below `defect_tol`, which certifies the tail.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .errors import BudgetExceeded, InverseBranchLost, NotInBasin


def _expansion(q: complex):
    A = 1.0 - q
    p1 = 0.5 - q / 2.0 - q * q
    p2 = 1.0 / 3.0 - 7.0 * q / 12.0 - q * q / 4.0 - q ** 3 / 2.0
    p3 = 13.0 / 36.0 - 8.0 * q / 9.0 + q * q / 36.0 - q ** 3 / 6.0 - q ** 4 / 3.0
    p4 = (113.0 / 240.0 - 121.0 * q / 80.0 + 31.0 * q * q / 48.0 + q ** 3 / 48.0
          - q ** 4 / 8.0 - q ** 5 / 4.0)
    return A, (p1, p2, p3, p4)


class ParabolicGerm:
    """Fatou coordinate engine for one germ; immutable after construction."""

    def __init__(self, alpha: complex, beta: complex, sector_w0: float = 20.0,
                 defect_tol: float = 1e-13, budget: int = 100000,
                 escape_radius: float = 1e4):
        if alpha == 0:
            raise ValueError("alpha = 0 is a degenerate germ")
        self.alpha = complex(alpha)
        self.beta = complex(beta)
        self.q = self.beta / (self.alpha * self.alpha)
        self.A, self.p = _expansion(self.q)
        self.W0 = max(sector_w0, 3.0 * (1.0 + abs(self.A)))
        self.defect_tol = defect_tol
        self.budget = budget
        self.escape_radius = escape_radius

    # -- the germ ----------------------------------------------------------
    def f(self, u: complex) -> complex:
        return u * (1.0 + u * (self.alpha + self.beta * u))

    def fprime(self, u: complex) -> complex:
        return 1.0 + u * (2.0 * self.alpha + 3.0 * self.beta * u)

    def w_of(self, u: complex) -> complex:
        return -1.0 / (self.alpha * u)

    def u_of(self, w: complex) -> complex:
        return -1.0 / (self.alpha * w)

    # -- asymptotic approximant ---------------------------------------------
    def phi_hat(self, w: complex) -> complex:
        iw = 1.0 / w
        p1, p2, p3, p4 = self.p
        return w - self.A * cmath.log(w) + iw * (p1 + iw * (p2 + iw * (p3 + iw * p4)))

    def phi_hat_prime(self, w: complex) -> complex:
        iw = 1.0 / w
        p1, p2, p3, p4 = self.p
        return 1.0 - self.A * iw - iw * iw * (p1 + iw * (2 * p2 + iw * (3 * p3 + iw * 4 * p4)))

    # -- raw (unnormalized) Fatou coordinate --------------------------------
    def raw(self, u: complex, budget: int | None = None) -> complex:
        """lim_N phi_hat(w_N) - N along the orbit of u.

        Raises NotInBasin when the orbit escapes or the budget runs out
        before the sector is reached.
        """
        budget = self.budget if budget is None else budget
        u = complex(u)
        prev = None
        for n in range(budget):
            if u == 0:
                raise NotInBasin("orbit hit the fixed point exactly")
            w = self.w_of(u)
            if w.real > self.W0 and abs(w.imag) < 2.0 * w.real:
                val = self.phi_hat(w) - n
                if prev is not None and abs(val - prev) < self.defect_tol:
                    return val
                prev = val
            elif abs(u) > self.escape_radius:
                raise NotInBasin(f"orbit escaped after {n} steps")
            u = self.f(u)
        raise NotInBasin(f"sector not certified within budget {budget}")

    def in_sector(self, u: complex) -> bool:
        w = self.w_of(u) if u != 0 else complex("inf")
        return w.real > self.W0 and abs(w.imag) < 2.0 * w.real

    def orbit_enters_sector(self, u: complex, budget: int | None = None) -> int:
        """First n with f^n(u) in the attracting sector; -1 if never within budget
        or the orbit escapes."""
        budget = self.budget if budget is None else budget
        for n in range(budget):
            if u == 0:
                return n
            w = self.w_of(u)
            if w.real > self.W0 and abs(w.imag) < 2.0 * w.real:
                return n
            if abs(u) > self.escape_radius:
                return -1
            u = self.f(u)
        return -1

    # -- inverse ------------------------------------------------------------
    def _invert_far(self, Z: complex) -> complex:
        w = Z + self.A * cmath.log(Z + 2.0 * self.A + 10.0)
        for _ in range(80):
            F = self.phi_hat(w) - Z
            if abs(F) < 1e-14 * max(1.0, abs(Z)):
                break
            w = w - F / self.phi_hat_prime(w)
        return w

    def _backstep(self, u: complex, wj: complex) -> complex:
        """One inverse-branch step along the petal track (w moves by about -1)."""
        wt = wj - 1.0
        seed = self.u_of(wt - self.A / wt)
        x = seed
        ok = False
        for _ in range(50):
            F = self.f(x) - u
            if abs(F) < 1e-15 * max(abs(u), 1e-30):
                ok = True
                break
            d = self.fprime(x)
            if d == 0:
                break
            step = F / d
            # near a critical point of the germ Newton halves its rate; the
            # multiplicity-2 step restores quadratic convergence
            if abs(d) < 1e-4 * max(1.0, abs(x)):
                step = 2.0 * F / d
            x = x - step
        if not (ok and abs(self.w_of(x) - wt) < 1.0 + 2.0 * abs(self.A)):
            # consider every algebraic branch and keep the one on the track
            if self.beta != 0:
                roots = np.roots([self.beta, self.alpha, 1.0, -u])
            else:
                roots = np.roots([self.alpha, 1.0, -u])
            x = complex(min(roots, key=lambda r: abs(self.w_of(complex(r)) - wt)))
            for _ in range(8):
                F = self.f(x) - u
                d = self.fprime(x)
                if d == 0 or abs(F) < 1e-16 * max(abs(u), 1e-30):
                    break
                if abs(d) < 1e-4 * max(1.0, abs(x)):
                    x = x - 2.0 * F / d
                else:
                    x = x - F / d
            if abs(self.w_of(x) - wt) > 1.5 + 3.0 * abs(self.A):
                raise InverseBranchLost("backward orbit left the petal sector")
        return x

    def raw_inverse(self, zeta: complex, min_real: float = -0.75) -> complex:
        """u with raw(u) = zeta, on the injective petal sheet.

        Defined for Re zeta > min_real: the petal sheet continues a little
        past the Re = 0 boundary, which the sheet-certification tests rely on.
        """
        zeta = complex(zeta)
        if zeta.real < min_real:
            raise InverseBranchLost(f"Re zeta = {zeta.real:.3g} below sheet window")
        k = int(max(0.0, math.ceil(2.0 * self.W0 + 10.0 - zeta.real)))
        w = self._invert_far(zeta + k)
        u = self.u_of(w)
        for _ in range(k):
            u = self._backstep(u, self.w_of(u))
        return u

    # -- vectorized raw evaluation (for sample batches) ----------------------
    def raw_batch(self, us: np.ndarray, budget: int | None = None) -> np.ndarray:
        """raw() over a flat array; NaN entries mark points that failed
        (escape, fixed point, or budget), mirroring NotInBasin."""
        budget = self.budget if budget is None else budget
        u = np.array(us, dtype=np.complex128).ravel()
        out = np.full(u.shape, np.nan, dtype=np.complex128)
        prev = np.full(u.shape, np.nan, dtype=np.complex128)
        idx = np.arange(u.size)
        p1, p2, p3, p4 = self.p
        for n in range(budget):
            if idx.size == 0:
                break
            ua = u[idx]
            zero = ua == 0
            if zero.any():
                idx = idx[~zero]
                ua = u[idx]
            w = -1.0 / (self.alpha * ua)
            insec = (w.real > self.W0) & (np.abs(w.imag) < 2.0 * w.real)
            if insec.any():
                widx = idx[insec]
                ws = w[insec]
                iw = 1.0 / ws
                val = (ws - self.A * np.log(ws)
                       + iw * (p1 + iw * (p2 + iw * (p3 + iw * p4)))) - n
                done = np.abs(val - prev[widx]) < self.defect_tol
                out[widx[done]] = val[done]
                prev[widx] = val
                keep_mask = np.ones(idx.size, dtype=bool)
                keep_mask[np.flatnonzero(insec)[done]] = False
                idx = idx[keep_mask]
                ua = u[idx]
            esc = np.abs(ua) > self.escape_radius
            if esc.any():
                idx = idx[~esc]
                ua = u[idx]
            u[idx] = ua * (1.0 + ua * (self.alpha + self.beta * ua))
        return out.reshape(np.shape(us))


class BudgetPolicy:
    """Iteration/precision policy shared by the Fatou handles."""

    def __init__(self, budget: int = 100000, defect_tol: float = 1e-13,
                 sector_w0: float = 20.0):
        self.budget = budget
        self.defect_tol = defect_tol
        self.sector_w0 = sector_w0
