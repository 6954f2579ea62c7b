"""Exact rational angles in Q/Z with tripling and doubling maps.

All angle arithmetic throughout the package is exact integer arithmetic on
reduced fractions; floats only appear when a point on the circle is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class RationalAngle:
    """Reduced fraction num/den representing an angle mod 1."""
    num: int
    den: int = 1

    def __post_init__(self):
        if self.den <= 0:
            raise ValueError("denominator must be positive")
        n = self.num % self.den
        g = math.gcd(n, self.den)
        object.__setattr__(self, "num", n // g)
        object.__setattr__(self, "den", self.den // g)

    @property
    def value(self) -> float:
        return self.num / self.den

    def triple(self) -> "RationalAngle":
        return RationalAngle(3 * self.num, self.den)

    def double(self) -> "RationalAngle":
        return RationalAngle(2 * self.num, self.den)

    def times(self, k: int) -> "RationalAngle":
        return RationalAngle(k * self.num, self.den)

    def __neg__(self) -> "RationalAngle":
        return RationalAngle(-self.num % self.den, self.den)

    def __str__(self):
        return f"{self.num}/{self.den}"

    def turns(self) -> float:
        """Angle in turns, in [0, 1)."""
        return self.num / self.den


def angles_with_triple_image(target: RationalAngle, depth: int) -> list[RationalAngle]:
    """All t with 3^depth * t == target (mod 1), sorted."""
    d = 3 ** depth
    out = {RationalAngle(target.num + k * target.den, target.den * d) for k in range(d)}
    return sorted(out)


def zero_preimage_angles(depth: int) -> list[RationalAngle]:
    """All t with 3^depth * t == 0 (mod 1): the j/3^depth grid."""
    return angles_with_triple_image(RationalAngle(0, 1), depth)
