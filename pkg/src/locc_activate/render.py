"""Human-readable amplitudes and kets.

Amplitudes that are dyadic rationals, or dyadic rationals times 1/√2, print
symbolically (``1/2``, ``-1/√2``, ``1/(2√2)``); anything else prints as a
decimal.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .hilbert import PartyLayout, StateVector

_SQRT2 = np.sqrt(2.0)
_MAX_DEN = 256


def _dyadic(x: float, tol: float) -> Fraction | None:
    q = 1
    while q <= _MAX_DEN:
        p = round(x * q)
        if abs(x * q - p) <= tol * q:
            return Fraction(p, q)
        q *= 2
    return None


def render_real(x: float, tol: float = 1e-9) -> str:
    if abs(x) <= tol:
        return "0"
    f = _dyadic(x, tol)
    if f is not None:
        return str(f)
    f = _dyadic(x * _SQRT2, tol)
    if f is not None:
        sign = "-" if f < 0 else ""
        num, den = abs(f.numerator), f.denominator
        if den == 1:
            return f"{sign}{num}/√2"
        return f"{sign}{num}/({den}√2)"
    return f"{x:.6g}"


def render_amplitude(z: complex, tol: float = 1e-9) -> str:
    """Symbolic form of a complex amplitude, decimals as a fallback."""
    re, im = float(np.real(z)), float(np.imag(z))
    if abs(im) <= tol:
        return render_real(re, tol)
    imag = render_real(im, tol)
    sign = "-" if imag.startswith("-") else ""
    mag = imag.lstrip("-")
    mag = f"({mag})i" if "/" in mag else f"{mag}i"
    if abs(re) <= tol:
        return sign + mag
    return f"({render_real(re, tol)} {sign or '+'} {mag})"


def ket(layout: PartyLayout, index: int) -> str:
    """``|x,y,...>`` with one composite digit per party (big-endian)."""
    digits = layout.decode(index)
    out, i = [], 0
    for p in layout.parties:
        val = 0
        for d, dig in zip(p.factors, digits[i:i + len(p.factors)]):
            val = val * d + dig
        out.append(str(val))
        i += len(p.factors)
    return "|" + ",".join(out) + ">"


def expansion(v: StateVector, tol: float = 1e-9) -> list[tuple[str, str]]:
    """Nonzero terms of ``v`` as ``(amplitude, ket)`` strings."""
    return [(render_amplitude(v.amplitudes[i], tol), ket(v.layout, i))
            for i in np.flatnonzero(np.abs(v.amplitudes) > tol)]


def render_state(v: StateVector, tol: float = 1e-9) -> str:
    terms = expansion(v, tol)
    if not terms:
        return "0"
    parts = []
    for k, (amp, kt) in enumerate(terms):
        neg = amp.startswith("-")
        mag = amp[1:] if neg else amp
        if k == 0:
            parts.append(f"{'-' if neg else ''}{mag} {kt}")
        else:
            parts.append(f"{'-' if neg else '+'} {mag} {kt}")
    return " ".join(parts)
