"""Elements of a value group Q(t_1, ..., t_k) restricted to linear expressions.

A :class:`GammaValue` is ``c_0 + c_1 t_1 + ... + c_k t_k`` with rational
coefficients and symbolic generators treated as independent transcendentals.
Addition, subtraction and rational scaling stay exact. Ordering uses a fixed
embedding of the generators into floats; equality is always symbolic, and an
order query whose float gap is too small to trust raises instead of guessing.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Mapping

from .exactgeom import rat

_TERM = re.compile(r"\s*([+-]?)\s*([^+-]+)")


class GammaValue:
    __slots__ = ("const", "coeffs")

    def __init__(self, const=0, coeffs: Mapping[str, object] | None = None):
        self.const = rat(const)
        items = {k: rat(v) for k, v in (coeffs or {}).items()}
        self.coeffs: tuple[tuple[str, Fraction], ...] = tuple(
            sorted((k, v) for k, v in items.items() if v != 0)
        )

    # -- arithmetic --------------------------------------------------------

    @staticmethod
    def lift(x) -> "GammaValue":
        return x if isinstance(x, GammaValue) else GammaValue(x)

    def _combine(self, other, sign: int) -> "GammaValue":
        other = GammaValue.lift(other)
        acc = dict(self.coeffs)
        for k, v in other.coeffs:
            acc[k] = acc.get(k, Fraction(0)) + sign * v
        return GammaValue(self.const + sign * other.const, acc)

    def __add__(self, other):
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1)

    def __rsub__(self, other):
        return GammaValue.lift(other)._combine(self, -1)

    def __neg__(self):
        return GammaValue(-self.const, {k: -v for k, v in self.coeffs})

    def __mul__(self, c):
        if isinstance(c, GammaValue):
            if c.coeffs and self.coeffs:
                raise TypeError("product of two symbolic values leaves the linear value group")
            if not c.coeffs:
                c = c.const
            else:
                return c * self.const
        c = rat(c)
        return GammaValue(self.const * c, {k: v * c for k, v in self.coeffs})

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self * (1 / rat(c))

    # -- queries -----------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return not self.coeffs

    def to_rational(self) -> Fraction:
        if self.coeffs:
            raise ValueError(f"{self} is not rational")
        return self.const

    def symbols(self) -> set[str]:
        return {k for k, _ in self.coeffs}

    def evaluate(self, embedding: Mapping[str, object]) -> Fraction:
        """Exact specialization at rational values of the generators."""
        return self.const + sum((v * rat(embedding[k]) for k, v in self.coeffs), Fraction(0))

    def approx(self, embedding: Mapping[str, float]) -> float:
        return float(self.const) + sum(float(v) * embedding[k] for k, v in self.coeffs)

    def compare(self, other, embedding: Mapping[str, float], guard: float = 1e-9) -> int:
        diff = self - other
        if diff.is_rational:
            c = diff.const
            return (c > 0) - (c < 0)
        x = diff.approx(embedding)
        scale = abs(float(diff.const)) + sum(abs(float(v)) for _, v in diff.coeffs)
        if abs(x) <= guard * max(scale, 1.0):
            raise ArithmeticError(f"cannot order {diff} against zero with the given embedding")
        return 1 if x > 0 else -1

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, GammaValue)):
            o = GammaValue.lift(other)
            return self.const == o.const and self.coeffs == o.coeffs
        return NotImplemented

    def __hash__(self):
        return hash((self.const, self.coeffs)) if self.coeffs else hash(self.const)

    def __str__(self):
        parts = [str(self.const)] if self.const != 0 or not self.coeffs else []
        for k, v in self.coeffs:
            parts.append(f"{v}*{k}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"GammaValue({str(self)!r})"


def parse_gamma(text, symbols: Mapping[str, object] | None = None):
    """Parse ``"1/2 + 3*t1 - t2/4"`` style strings.

    Plain rationals come back as Fraction; anything mentioning a declared
    generator comes back as GammaValue. Unknown names are an error.
    """
    if not isinstance(text, str):
        return rat(text)
    symbols = symbols or {}
    s = text.strip()
    if not s:
        raise ValueError("empty value")
    const = Fraction(0)
    coeffs: dict[str, Fraction] = {}
    pos = 0
    for m in _TERM.finditer(s):
        if m.start() != pos and s[pos:m.start()].strip():
            raise ValueError(f"cannot parse value {text!r}")
        pos = m.end()
        sign = -1 if m.group(1) == "-" else 1
        term = m.group(2).strip()
        if not term:
            raise ValueError(f"cannot parse value {text!r}")
        name = None
        factor = Fraction(1)
        for piece in term.split("*"):
            piece = piece.strip()
            if "/" in piece and piece.split("/")[0].strip() in symbols:
                sym, den = piece.split("/", 1)
                name = sym.strip()
                factor /= rat(den)
            elif piece in symbols:
                if name is not None:
                    raise ValueError("products of generators are not allowed")
                name = piece
            else:
                factor *= rat(piece)
        if name is None:
            const += sign * factor
        else:
            coeffs[name] = coeffs.get(name, Fraction(0)) + sign * factor
    if pos != len(s):
        raise ValueError(f"cannot parse value {text!r}")
    value = GammaValue(const, coeffs)
    return value.const if value.is_rational else value


def format_value(x) -> str:
    if isinstance(x, GammaValue):
        return str(x)
    x = rat(x)
    return str(x)
