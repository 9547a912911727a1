"""
Exact threshold handling.

Lambdas are rationals in [0, 1). Decimal strings ("0.95") and ratios ("19/20")
both parse exactly.
"""
from fractions import Fraction
from typing import Iterable, List, Union

try:
    from ..core.errors import InvalidThresholdError  # type: ignore
except Exception:
    from src.core.errors import InvalidThresholdError  # type: ignore

LambdaLike = Union[str, int, Fraction]

# upper clamp for non-uniform thresholds: 1 - 2^-20
LAMBDA_CEILING = Fraction(1) - Fraction(1, 2 ** 20)


def as_fraction(value: LambdaLike) -> Fraction:
    """Parse a threshold exactly and check it lies in [0, 1).

    Floats are refused: they rarely hold the decimal the caller meant.
    """
    if isinstance(value, float):
        raise InvalidThresholdError(f"pass lambda as a string or Fraction, not float {value!r}")
    try:
        lam = Fraction(value.strip()) if isinstance(value, str) else Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError) as e:
        raise InvalidThresholdError(f"cannot parse lambda {value!r}: {e}")
    if not 0 <= lam < 1:
        raise InvalidThresholdError(f"lambda must be in [0, 1), got {lam}")
    return lam


def parse_lambda_list(text: str) -> List[Fraction]:
    """Comma-separated lambdas, which must be strictly ascending."""
    lams = [as_fraction(part) for part in text.split(",") if part.strip()]
    if not lams:
        raise InvalidThresholdError("empty lambda list")
    check_ascending(lams)
    return lams


def check_ascending(lams: Iterable[Fraction]):
    lams = list(lams)
    for a, b in zip(lams, lams[1:]):
        if not a < b:
            raise InvalidThresholdError(f"lambdas must be strictly ascending, got {a} then {b}")


def count_threshold(lam: Fraction, mmn_measure: int) -> int:
    """Largest count excluded by lam: OM > lam*|B| iff OM > floor(lam*|B|)."""
    return (lam.numerator * mmn_measure) // lam.denominator


def full_containment_lambda(mmn_measure: int) -> Fraction:
    """Smallest lambda whose motion set is OM = |B| (the lambda -> 1 limit)."""
    return Fraction(mmn_measure - 1, mmn_measure)


def format_lambda(lam: Fraction) -> str:
    return f"{lam.numerator}/{lam.denominator}"
