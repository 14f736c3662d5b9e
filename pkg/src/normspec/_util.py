"""Canonical rounding shared by models and measures."""

from __future__ import annotations

DIGITS = 12


def canon(z) -> complex:
    """Round ``z`` to 12 decimal digits, folding negative zeros."""
    z = complex(z)
    return complex(round(z.real, DIGITS) + 0.0, round(z.imag, DIGITS) + 0.0)


def sort_key(z: complex) -> tuple[float, float]:
    return (z.real, z.imag)
