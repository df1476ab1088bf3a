"""Triangle solvers for the Euclidean plane and the unit sphere.

Angles are recovered from side lengths with half-angle atan2 forms, which
stay accurate much closer to degeneracy than acos of a law-of-cosines
ratio.  Semiperimeter differences are always formed directly from the
sides (``s - a`` as ``(b + c - a) / 2``) so no cancellation is introduced
beyond what the input data carries.

Angle derivatives use the closed forms

    d(alpha)/da = 1 / (sin b sin gamma)        (spherical)
    d(alpha)/db = -cot(gamma) / sin b

and their Euclidean analogues (replace ``sin b`` by ``b``), extended to
the full 3x3 matrix by cyclic permutation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import StepReductionError, TriangleError

# Relative slack on the strict triangle inequality.
DEGENERACY_TOL = 1e-14

# Sines below this value make the derivative forms meaningless in double
# precision; callers are expected to retry with a smaller deformation step.
SIN_FLOOR = 1e-10


@dataclass(frozen=True)
class TriangleAngles:
    """Interior angles listed opposite the sides (a, b, c)."""

    alpha: float
    beta: float
    gamma: float

    def as_tuple(self):
        return (self.alpha, self.beta, self.gamma)

    @property
    def total(self):
        return self.alpha + self.beta + self.gamma


def _check_sides(a, b, c, spherical=False):
    sides = (a, b, c)
    if not all(math.isfinite(x) and x > 0.0 for x in sides):
        raise TriangleError(f"sides must be positive and finite, got {sides}")
    if spherical:
        if max(sides) >= math.pi:
            raise TriangleError(f"spherical sides must lie in (0, pi), got {sides}")
        if a + b + c >= 2.0 * math.pi:
            raise TriangleError(f"spherical perimeter must be < 2*pi, got {sides}")
    scale = max(sides)
    for x, y, z in ((a, b, c), (b, c, a), (c, a, b)):
        if y + z - x <= DEGENERACY_TOL * scale:
            raise TriangleError(f"triangle inequality fails for sides {sides}")


def euclidean_angles(a: float, b: float, c: float) -> TriangleAngles:
    """Angles of the Euclidean triangle with side lengths (a, b, c).

    Raises TriangleError unless the strict triangle inequality holds.
    """
    _check_sides(a, b, c)
    sa = 0.5 * (b + c - a)
    sb = 0.5 * (c + a - b)
    sc = 0.5 * (a + b - c)
    s = 0.5 * (a + b + c)
    alpha = 2.0 * math.atan2(math.sqrt(sb * sc), math.sqrt(s * sa))
    beta = 2.0 * math.atan2(math.sqrt(sc * sa), math.sqrt(s * sb))
    gamma = 2.0 * math.atan2(math.sqrt(sa * sb), math.sqrt(s * sc))
    return TriangleAngles(alpha, beta, gamma)


def spherical_angles(a: float, b: float, c: float) -> TriangleAngles:
    """Angles of the spherical triangle with side lengths (a, b, c)."""
    _check_sides(a, b, c, spherical=True)
    sa = 0.5 * (b + c - a)
    sb = 0.5 * (c + a - b)
    sc = 0.5 * (a + b - c)
    s = 0.5 * (a + b + c)
    ss, ssa, ssb, ssc = math.sin(s), math.sin(sa), math.sin(sb), math.sin(sc)
    alpha = 2.0 * math.atan2(math.sqrt(ssb * ssc), math.sqrt(ss * ssa))
    beta = 2.0 * math.atan2(math.sqrt(ssc * ssa), math.sqrt(ss * ssb))
    gamma = 2.0 * math.atan2(math.sqrt(ssa * ssb), math.sqrt(ss * ssc))
    return TriangleAngles(alpha, beta, gamma)


def euclidean_opposite_side(b: float, c: float, alpha: float) -> float:
    """Third side of a Euclidean triangle from two sides and the included angle."""
    # Stable form of the law of cosines: a^2 = (b - c)^2 + 4 b c sin^2(alpha/2).
    s = math.sin(0.5 * alpha)
    return math.sqrt((b - c) ** 2 + 4.0 * b * c * s * s)


def spherical_opposite_side(b: float, c: float, alpha: float) -> float:
    """Third side of a spherical triangle from two sides and the included angle."""
    cos_a = math.cos(b) * math.cos(c) + math.sin(b) * math.sin(c) * math.cos(alpha)
    return math.acos(min(1.0, max(-1.0, cos_a)))


def _derivative_rows(angles, sin_sides):
    """Shared assembly for the 3x3 derivative matrices.

    ``sin_sides`` is (sin a, sin b, sin c) on the sphere and (a, b, c) in
    the plane; the formulas coincide otherwise.
    """
    alpha, beta, gamma = angles.as_tuple()
    for name, ang in (("alpha", alpha), ("beta", beta), ("gamma", gamma)):
        if min(ang, math.pi - ang) < SIN_FLOOR:
            raise StepReductionError(
                f"angle {name}={ang!r} too close to 0 or pi for derivatives"
            )
    da, db, dc = sin_sides
    if min(abs(da), abs(db), abs(dc)) < SIN_FLOOR:
        raise StepReductionError("triangle side sine below derivative floor")
    sin_a, sin_b, sin_g = math.sin(alpha), math.sin(beta), math.sin(gamma)
    cot_a, cot_b, cot_g = (
        math.cos(alpha) / sin_a,
        math.cos(beta) / sin_b,
        math.cos(gamma) / sin_g,
    )
    return [
        [1.0 / (db * sin_g), -cot_g / db, -cot_b / dc],
        [-cot_g / da, 1.0 / (dc * sin_a), -cot_a / dc],
        [-cot_b / da, -cot_a / db, 1.0 / (da * sin_b)],
    ]


def euclidean_angle_derivatives(a: float, b: float, c: float):
    """3x3 matrix d(alpha_i)/d(side_j); rows alpha,beta,gamma, cols a,b,c.

    Each column sums to zero because the angle sum is constant.
    """
    angles = euclidean_angles(a, b, c)
    return _derivative_rows(angles, (a, b, c))


def spherical_angle_derivatives(a: float, b: float, c: float):
    """3x3 matrix of spherical angle derivatives, same layout as the
    Euclidean version."""
    angles = spherical_angles(a, b, c)
    sines = (math.sin(a), math.sin(b), math.sin(c))
    return _derivative_rows(angles, sines)
