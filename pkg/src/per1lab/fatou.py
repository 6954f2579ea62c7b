"""Attracting Fatou coordinate at the parabolic point 0 of f_a, the maximal
petal, basin/capture classification, and the invariant I(a).

The coordinate is normalized so that fatou(c_plus(a)) = 0, realized as
raw(v_plus(a)) - 1; the free constant sigma is stored on the handle.  The
drift constant is A = 1 - 1/a^2 (Taylor data of the cubic in the coordinate
w = -1/(az)), validated independently by the Abel-equation tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import dynamics
from .errors import NotApplicable, NotInBasin
from .parabolic import BudgetPolicy, ParabolicGerm


class FatouCoordinate:
    """Handle for the normalized attracting Fatou coordinate of f_a."""

    def __init__(self, a: complex, policy: BudgetPolicy | None = None):
        a = complex(a)
        if a == 0:
            raise NotApplicable("a = 0 is degenerate (two attracting axes)")
        self.a = a
        self.policy = policy or BudgetPolicy()
        self.germ = ParabolicGerm(a, 1.0, sector_w0=self.policy.sector_w0,
                                  defect_tol=self.policy.defect_tol,
                                  budget=self.policy.budget,
                                  escape_radius=max(10.0, dynamics.escape_radius(a)))
        cp = dynamics.critical_points(a)
        self.c_plus = cp.c_plus
        self.c_minus = cp.c_minus
        self.v_plus = dynamics.evaluate(a, cp.c_plus)
        self.v_minus = dynamics.evaluate(a, cp.c_minus)
        # normalization fatou(c_plus) = 0, computed one step inside the petal
        self.sigma = self.germ.raw(self.v_plus) - 1.0

    @property
    def drift(self) -> complex:
        """A = 1 - 1/a^2."""
        return self.germ.A

    def __call__(self, z: complex) -> complex:
        return self.germ.raw(z) - self.sigma

    def batch(self, zs: np.ndarray) -> np.ndarray:
        return self.germ.raw_batch(zs) - self.sigma

    def petal_inverse(self, w: complex) -> complex:
        """z on the injective petal sheet with fatou(z) = w.

        w = 0 is the normalization anchor: the answer is the critical point
        itself (the generic inversion is sqrt-conditioned at that fold).
        """
        w = complex(w)
        if abs(w) < 1e-9:
            return self.c_plus
        return self.germ.raw_inverse(w + self.sigma)

    def in_maximal_petal(self, z: complex, tol: float = 1e-6) -> bool:
        """True iff fatou(z) is defined, Re fatou(z) > 0, and the petal
        round trip reproduces z within tol."""
        ok, _ = self.sheet_certificate(z, tol=tol, min_real=0.0)
        return ok

    def sheet_certificate(self, z: complex, tol: float = 1e-6,
                          min_real: float = 0.0) -> tuple[bool, str]:
        """Round-trip test that z lies on the injective sheet with
        Re fatou(z) > min_real; returns (verdict, reason)."""
        try:
            w = self(z)
        except NotInBasin as e:
            return False, f"not-in-basin: {e}"
        if not (w.real > min_real):
            return False, f"Re fatou = {w.real:.6g} <= {min_real:.3g}"
        try:
            back = self.petal_inverse(w)
        except Exception as e:  # InverseBranchLost
            return False, f"inverse failed: {e}"
        if abs(back - z) >= tol:
            return False, f"round trip off by {abs(back - z):.3g}"
        return True, "ok"


@dataclass(frozen=True)
class CaptureVerdict:
    kind: str                     # "adjacent" | "capture" | "escape" | "undetermined"
    depth: int = -1               # n for capture(n)
    resolution: float = 0.0       # grid spacing used for the basin mask

    @property
    def is_adjacent(self):
        return self.kind == "adjacent"

    @property
    def is_capture(self):
        return self.kind == "capture"


@dataclass
class GridPolicy:
    """Resolution ladder for the immediate-basin raster mask."""
    base_cells: int = 128
    levels: int = 3
    sector_budget: int = 600
    escape_budget: int = 400

    def cells(self, level: int) -> int:
        return self.base_cells * (2 ** level)


def _filled_julia_radius(a: complex) -> float:
    """|z| beyond which the orbit provably escapes (real quadratic bound)."""
    m = abs(a)
    return 0.5 * (m + math.sqrt(m * m + 12.0)) + 0.5


def _basin_mask(fc: FatouCoordinate, n_cells: int, radius: float,
                sector_budget: int) -> tuple[np.ndarray, float, complex]:
    """Raster of basin-of-0 points (orbit enters the attracting sector) on
    the centered square [-radius, radius]^2; returns (mask, h, ll_corner)."""
    a = fc.a
    h = 2.0 * radius / n_cells
    xs = -radius + h * (np.arange(n_cells) + 0.5)
    X, Y = np.meshgrid(xs, xs)
    z = (X + 1j * Y).ravel()
    alive = np.ones(z.size, dtype=bool)
    inbasin = np.zeros(z.size, dtype=bool)
    W0 = fc.germ.W0
    Resc = fc.germ.escape_radius
    aa = a
    idx = np.arange(z.size)
    zz = z.copy()
    for _ in range(sector_budget):
        if idx.size == 0:
            break
        cur = zz[idx]
        nz = cur != 0
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(nz, -1.0 / (aa * np.where(nz, cur, 1.0)), np.inf)
        insec = (~nz) | ((w.real > W0) & (np.abs(w.imag) < 2.0 * w.real))
        if insec.any():
            inbasin[idx[insec]] = True
            idx = idx[~insec]
            cur = zz[idx]
        esc = np.abs(cur) > Resc
        if esc.any():
            idx = idx[~esc]
            cur = zz[idx]
        zz[idx] = cur * (1.0 + cur * (aa + cur))
    mask = inbasin.reshape(n_cells, n_cells)
    return mask, h, complex(-radius, -radius)


def _flood_component(mask: np.ndarray, seeds: list[tuple[int, int]]) -> np.ndarray:
    """4-connected component of True cells containing the seeds."""
    comp = np.zeros_like(mask, dtype=bool)
    stack = [s for s in seeds if 0 <= s[0] < mask.shape[0]
             and 0 <= s[1] < mask.shape[1] and mask[s]]
    for s in stack:
        comp[s] = True
    while stack:
        i, j = stack.pop()
        for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            ii, jj = i + di, j + dj
            if 0 <= ii < mask.shape[0] and 0 <= jj < mask.shape[1] \
                    and mask[ii, jj] and not comp[ii, jj]:
                comp[ii, jj] = True
                stack.append((ii, jj))
    return comp


def _cell_of(z: complex, h: float, ll: complex, n: int) -> tuple[int, int]:
    j = int((z.real - ll.real) / h)
    i = int((z.imag - ll.imag) / h)
    return i, j


def capture_depth(a: complex, max_depth: int = 8,
                  grid: GridPolicy | None = None) -> CaptureVerdict:
    """Classify a: escape / adjacent / capture(n) / undetermined.

    Membership of f^m(c_minus) in the immediate basin B* is decided by
    4-connected flood fill from petal seeds on a raster of basin points;
    connectivity to the petal is the defining property of B*, discretized.
    The verdict is re-derived on a refinement ladder until two consecutive
    resolutions agree.
    """
    a = complex(a)
    if a == 0:
        raise NotApplicable("a = 0")
    grid = grid or GridPolicy()
    cm = dynamics.critical_points(a).c_minus
    esc = dynamics.escape_classify(a, cm, max_iter=max(grid.escape_budget, 200))
    if esc.escaped:
        return CaptureVerdict("escape", resolution=0.0)
    fc = FatouCoordinate(a)
    # orbit of c_minus up to (and including) its first sector entry
    entry = fc.germ.orbit_enters_sector(cm, budget=grid.sector_budget)
    if entry < 0:
        return CaptureVerdict("undetermined", resolution=0.0)
    orbit = [cm]
    for _ in range(min(entry, max_depth + 1)):
        orbit.append(dynamics.evaluate(a, orbit[-1]))
    if entry == 0:
        return CaptureVerdict("adjacent", resolution=0.0)

    radius = _filled_julia_radius(a)
    petal_seed_pts = [fc.petal_inverse(1.0 + t) for t in (0.0, 1.0, 2.0)]
    verdict_depth = None
    last = None
    for level in range(grid.levels):
        n_cells = grid.cells(level)
        mask, h, ll = _basin_mask(fc, n_cells, radius, grid.sector_budget)
        seeds = [_cell_of(p, h, ll, n_cells) for p in petal_seed_pts]
        comp = _flood_component(mask, seeds)
        m_found = None
        for m, zm in enumerate(orbit):
            if m > max_depth + 1:
                break
            i, j = _cell_of(zm, h, ll, n_cells)
            if 0 <= i < n_cells and 0 <= j < n_cells and comp[i, j]:
                m_found = m
                break
        if m_found is None and entry <= max_depth + 1:
            m_found = entry  # the sector point itself is certainly in B*
        if m_found is not None and m_found == last:
            verdict_depth = m_found
            break
        last = m_found
    if verdict_depth is None:
        return CaptureVerdict("undetermined", resolution=h)
    if verdict_depth == 0:
        return CaptureVerdict("adjacent", resolution=h)
    return CaptureVerdict("capture", depth=verdict_depth - 1, resolution=h)


@dataclass(frozen=True)
class IInvariantResult:
    value: float
    re_diagnostic: float
    upper_label: str   # which of the Eq.-(1) labels got the bigger Im image


def i_invariant(a: complex) -> IInvariantResult:
    """I(a) = Im difference of the Fatou images of the two critical values,
    ordered so the result is >= 0; defined when both critical orbits enter
    the attracting petal (e.g. a in (0, sqrt(3)])."""
    a = complex(a)
    fc = FatouCoordinate(a)
    try:
        wp = fc(fc.v_plus)
        wm = fc(fc.v_minus)
    except NotInBasin as e:
        raise NotApplicable(f"a critical orbit does not reach the petal: {e}")
    d = wp - wm
    if d.imag >= 0:
        return IInvariantResult(d.imag, d.real, "c_plus")
    return IInvariantResult(-d.imag, -d.real, "c_minus")
