"""
Non-uniform overlap measure ratio threshold (OMRT) fields.

lambda*(t) = lambda_0 + sum_j c_j * phi_j(t), with radial bumps
phi_j(t) = max(0, 1 - |t - center_j| / radius_j)^2, clamped to
[0, 1 - 2^-20]. Outside every bump's support the threshold is exactly
lambda_0, so bumps change nothing beyond their radius.
"""
import logging
import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

try:
    from .thresholds import LAMBDA_CEILING, as_fraction, format_lambda  # type: ignore
except Exception:
    from src.morphology.thresholds import LAMBDA_CEILING, as_fraction, format_lambda  # type: ignore

logger = logging.getLogger(__name__)

# Digits used when lambda* at a point is irrational.
DECIMAL_PRECISION = 60


@dataclass(frozen=True)
class RadialBump:
    center: Tuple[int, ...]
    radius: float
    coefficient: Fraction

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"bump radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", tuple(int(c) for c in self.center))
        object.__setattr__(self, "radius", float(self.radius))
        object.__setattr__(self, "coefficient", Fraction(self.coefficient))

    def support(self, shape: Sequence[int]) -> Optional[Tuple[slice, ...]]:
        """Bounding box of the bump's support clipped to the lattice, or None."""
        reach = int(math.ceil(self.radius))
        box = []
        for c, n in zip(self.center, shape):
            lo, hi = max(0, c - reach), min(n, c + reach + 1)
            if lo >= hi:
                return None
            box.append(slice(lo, hi))
        return tuple(box)

    def profile(self, box: Tuple[slice, ...]) -> np.ndarray:
        """phi over the lattice points of `box`."""
        axes = [np.arange(s.start, s.stop) - c for s, c in zip(box, self.center)]
        grids = np.meshgrid(*axes, indexing="ij", sparse=True)
        dist = np.sqrt(sum(g.astype(np.float64) ** 2 for g in grids))
        return np.maximum(0.0, 1.0 - dist / self.radius) ** 2

    def value_at(self, point: Sequence[int]) -> float:
        dist = math.dist(point, self.center)
        return max(0.0, 1.0 - dist / self.radius) ** 2

    def exact_value_at(self, point: Sequence[int]) -> Union[Fraction, Decimal]:
        """phi at `point` as a Fraction, or a Decimal when the distance is irrational.

        Decimal results use the caller's context precision.
        """
        d2 = sum((int(p) - c) ** 2 for p, c in zip(point, self.center))
        r = Fraction(self.radius)
        if d2 == 0:
            return Fraction(1)
        if d2 >= r * r:
            return Fraction(0)
        root = math.isqrt(d2)
        if root * root == d2:
            return (1 - Fraction(root) / r) ** 2
        return (Decimal(1) - Decimal(d2).sqrt() / Decimal(self.radius)) ** 2

    def to_dict(self) -> Dict:
        return {
            "center": list(self.center),
            "radius": self.radius,
            "coefficient": format_lambda(self.coefficient),
        }


@dataclass(frozen=True)
class OmrtField:
    """lambda_0 plus a tuple of radial bumps; immutable."""

    base: Fraction
    bumps: Tuple[RadialBump, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "base", as_fraction(self.base))
        object.__setattr__(self, "bumps", tuple(self.bumps))

    @classmethod
    def uniform(cls, lam) -> "OmrtField":
        return cls(as_fraction(lam))

    @property
    def term_count(self) -> int:
        """m: the constant term plus one per bump."""
        return 1 + len(self.bumps)

    @property
    def clamped_base(self) -> Fraction:
        return min(max(self.base, Fraction(0)), LAMBDA_CEILING)

    def with_bump(self, center: Sequence[int], radius: float, coefficient: Fraction) -> "OmrtField":
        """Add a bump; a bump already at `center` absorbs the coefficient instead."""
        center = tuple(int(c) for c in center)
        bumps = list(self.bumps)
        for i, bump in enumerate(bumps):
            if bump.center == center:
                bumps[i] = RadialBump(center, max(bump.radius, radius),
                                      bump.coefficient + Fraction(coefficient))
                return OmrtField(self.base, tuple(bumps))
        bumps.append(RadialBump(center, radius, Fraction(coefficient)))
        return OmrtField(self.base, tuple(bumps))

    def bump_sum(self, shape: Sequence[int]) -> np.ndarray:
        """sum_j c_j * phi_j(t) over the lattice (float64, zero outside all supports)."""
        total = np.zeros(tuple(shape), dtype=np.float64)
        for bump in self.bumps:
            if bump.coefficient == 0:
                continue
            box = bump.support(shape)
            if box is None:
                continue
            total[box] += float(bump.coefficient) * bump.profile(box)
        return total

    def support_mask(self, shape: Sequence[int]) -> np.ndarray:
        """Lattice points where at least one nonzero bump is active."""
        mask = np.zeros(tuple(shape), dtype=bool)
        for bump in self.bumps:
            if bump.coefficient == 0:
                continue
            box = bump.support(shape)
            if box is not None:
                mask[box] |= bump.profile(box) > 0
        return mask

    def evaluate(self, shape: Sequence[int]) -> np.ndarray:
        """Clamped lambda* over the lattice, as float64."""
        lam = float(self.base) + self.bump_sum(shape)
        return np.clip(lam, 0.0, float(LAMBDA_CEILING))

    def value_at(self, point: Sequence[int]) -> float:
        lam = float(self.base) + sum(float(b.coefficient) * b.value_at(point) for b in self.bumps)
        return min(max(lam, 0.0), float(LAMBDA_CEILING))

    def admits(self, point: Sequence[int], count: int, mmn_measure: int) -> bool:
        """Exact OM > lambda*(point) * |B| at one lattice point.

        Rational thresholds (bump centers, points outside a support, perfect-square
        distances) compare as Fractions; otherwise lambda* is irrational, never
        equal to count / |B|, and a high-precision Decimal decides.
        """
        with localcontext() as ctx:
            ctx.prec = DECIMAL_PRECISION
            terms = [(b.coefficient, b.exact_value_at(point)) for b in self.bumps if b.coefficient != 0]
            if all(isinstance(phi, Fraction) for _, phi in terms):
                lam = self.base + sum((c * phi for c, phi in terms), Fraction(0))
                lam = min(max(lam, Fraction(0)), LAMBDA_CEILING)
                return count > lam * mmn_measure

            def dec(q: Fraction) -> Decimal:
                return Decimal(q.numerator) / Decimal(q.denominator)

            lam = dec(self.base)
            for c, phi in terms:
                lam += dec(c) * (dec(phi) if isinstance(phi, Fraction) else phi)
            lam = min(max(lam, Decimal(0)), dec(LAMBDA_CEILING))
            return Decimal(count) > lam * mmn_measure

    def to_dict(self) -> Dict:
        return {
            "base": format_lambda(self.base),
            "base_float": float(self.base),
            "bumps": [b.to_dict() for b in self.bumps],
        }
