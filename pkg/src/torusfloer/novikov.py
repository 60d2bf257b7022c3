"""Truncated Novikov series with rational exponents, and the Tate q-series.

A scalar is a finite sum  sum_i  c_i * q^(t_i)  with strictly increasing
rational exponents t_i, nonzero rational coefficients c_i, all exponents
below a truncation bound T.  Arithmetic is exact below T; whenever a term
at or above T is produced (or discarded on input) the result carries a
``truncated`` flag.  The flag is sticky under every operation, so a scalar
without it is an exact element of the Novikov field, not just a jet.

The valuation of the zero scalar is +infinity, represented by
``float("inf")`` which compares correctly against Fraction.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Union

Rational = Union[int, Fraction]

INF = float("inf")

DEFAULT_TRUNCATION = Fraction(20)


class NovikovError(ArithmeticError):
    """Raised for undefined Novikov-field operations (inverting zero,
    or an inverse whose leading term already falls outside the window)."""


def _frac(x: Rational) -> Fraction:
    if isinstance(x, Fraction):
        return x
    return Fraction(x)


class NovikovScalar:
    """One element of the truncated Novikov field.

    ``terms`` is a tuple of (exponent, coefficient) pairs, exponents
    strictly increasing Fractions, coefficients nonzero Fractions, all
    exponents < ``truncation``.  ``truncated`` records whether any term
    at or above the bound was ever discarded while producing this value.
    """

    __slots__ = ("terms", "truncation", "truncated")

    def __init__(
        self,
        terms: Iterable[tuple[Rational, Rational]] = (),
        truncation: Rational = DEFAULT_TRUNCATION,
        truncated: bool = False,
    ):
        T = _frac(truncation)
        merged: dict[Fraction, Fraction] = {}
        clipped = bool(truncated)
        for expo, coeff in terms:
            e = _frac(expo)
            c = _frac(coeff)
            if c == 0:
                continue
            if e >= T:
                clipped = True
                continue
            acc = merged.get(e)
            if acc is None:
                merged[e] = c
            else:
                acc = acc + c
                if acc == 0:
                    del merged[e]
                else:
                    merged[e] = acc
        object.__setattr__(self, "terms", tuple(sorted(merged.items())))
        object.__setattr__(self, "truncation", T)
        object.__setattr__(self, "truncated", clipped)

    def __setattr__(self, name, value):
        raise AttributeError("NovikovScalar is immutable")

    # ---- constructors -------------------------------------------------

    @classmethod
    def zero(cls, truncation: Rational = DEFAULT_TRUNCATION) -> "NovikovScalar":
        return cls((), truncation)

    @classmethod
    def one(cls, truncation: Rational = DEFAULT_TRUNCATION) -> "NovikovScalar":
        return cls(((Fraction(0), Fraction(1)),), truncation)

    @classmethod
    def monomial(
        cls,
        exponent: Rational,
        coefficient: Rational = 1,
        truncation: Rational = DEFAULT_TRUNCATION,
    ) -> "NovikovScalar":
        return cls(((exponent, coefficient),), truncation)

    # ---- structure ----------------------------------------------------

    def is_zero(self) -> bool:
        """True when no term is known; an unflagged zero is exactly zero."""
        return not self.terms

    def valuation(self):
        """Leading exponent; +infinity (float) for the zero scalar."""
        if not self.terms:
            return INF
        return self.terms[0][0]

    def leading_coefficient(self) -> Fraction:
        if not self.terms:
            raise NovikovError("zero scalar has no leading coefficient")
        return self.terms[0][1]

    def coefficient(self, exponent: Rational) -> Fraction:
        e = _frac(exponent)
        for expo, coeff in self.terms:
            if expo == e:
                return coeff
            if expo > e:
                break
        return Fraction(0)

    # ---- ring operations ----------------------------------------------

    def _joint_truncation(self, other: "NovikovScalar") -> Fraction:
        return min(self.truncation, other.truncation)

    def __add__(self, other: "NovikovScalar") -> "NovikovScalar":
        if not isinstance(other, NovikovScalar):
            return NotImplemented
        return NovikovScalar(
            self.terms + other.terms,
            self._joint_truncation(other),
            self.truncated or other.truncated,
        )

    def __sub__(self, other: "NovikovScalar") -> "NovikovScalar":
        if not isinstance(other, NovikovScalar):
            return NotImplemented
        return self + (-other)

    def __neg__(self) -> "NovikovScalar":
        return NovikovScalar(
            tuple((e, -c) for e, c in self.terms), self.truncation, self.truncated
        )

    def scale(self, coefficient: Rational) -> "NovikovScalar":
        c = _frac(coefficient)
        if c == 0:
            return NovikovScalar((), self.truncation, self.truncated)
        return NovikovScalar(
            tuple((e, k * c) for e, k in self.terms), self.truncation, self.truncated
        )

    def shift(self, exponent: Rational) -> "NovikovScalar":
        """Multiply by the monomial q^exponent."""
        e = _frac(exponent)
        return NovikovScalar(
            tuple((t + e, c) for t, c in self.terms), self.truncation, self.truncated
        )

    def __mul__(self, other: "NovikovScalar") -> "NovikovScalar":
        if not isinstance(other, NovikovScalar):
            return NotImplemented
        T = self._joint_truncation(other)
        clipped = self.truncated or other.truncated
        acc: dict[Fraction, Fraction] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = e1 + e2
                if e >= T:
                    clipped = True
                    continue
                prev = acc.get(e)
                acc[e] = c1 * c2 if prev is None else prev + c1 * c2
        return NovikovScalar(acc.items(), T, clipped)

    def inv(self) -> "NovikovScalar":
        """Multiplicative inverse, truncated at this scalar's bound.

        The result satisfies self * inv(self) == 1 up to exponent
        T - max(0, -valuation).  Inverting zero, or a scalar whose
        inverse has no representable term at all, is an error.
        """
        if not self.terms:
            raise NovikovError("cannot invert the zero scalar")
        T = self.truncation
        v, c0 = self.terms[0]
        if -v >= T:
            raise NovikovError(
                "inverse starts at exponent %s, at or beyond truncation %s" % (-v, T)
            )
        # self = c0 q^v (1 + u) with val(u) > 0; invert the unit part by
        # the geometric series, accumulating exponents below T + v.
        window = T + v
        tail = [(e - v, c / c0) for e, c in self.terms[1:]]
        acc: dict[Fraction, Fraction] = {Fraction(0): Fraction(1)}
        power: dict[Fraction, Fraction] = {Fraction(0): Fraction(1)}
        clipped = self.truncated
        while power:
            nxt: dict[Fraction, Fraction] = {}
            for pe, pc in power.items():
                for ue, uc in tail:
                    e = pe + ue
                    if e >= window:
                        clipped = True
                        continue
                    prev = nxt.get(e)
                    nxt[e] = -pc * uc if prev is None else prev - pc * uc
            nxt = {e: c for e, c in nxt.items() if c != 0}
            for e, c in nxt.items():
                prev = acc.get(e)
                acc[e] = c if prev is None else prev + c
            power = nxt
        inv_c0 = Fraction(1) / c0
        if tail:
            clipped = True  # the geometric series never terminates exactly
        return NovikovScalar(
            ((e - v, c * inv_c0) for e, c in acc.items()), T, clipped
        )

    # ---- comparison and display ----------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, NovikovScalar):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __repr__(self) -> str:
        if not self.terms:
            body = "0"
        else:
            chunks = []
            for e, c in self.terms:
                if e == 0:
                    chunks.append(str(c))
                else:
                    chunks.append("%s*q^(%s)" % (c, e))
            body = " + ".join(chunks)
        flag = ", truncated" if self.truncated else ""
        return "Nov(%s; T=%s%s)" % (body, self.truncation, flag)

    # ---- serialization --------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "terms": [
                [e.numerator, e.denominator, c.numerator, c.denominator]
                for e, c in self.terms
            ],
            "truncation": [self.truncation.numerator, self.truncation.denominator],
            "truncated": self.truncated,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "NovikovScalar":
        terms = [
            (Fraction(en, ed), Fraction(cn, cd)) for en, ed, cn, cd in obj["terms"]
        ]
        tn, td = obj["truncation"]
        return cls(terms, Fraction(tn, td), bool(obj.get("truncated", False)))


# ---------------------------------------------------------------------------
# Tate curve q-series.  s_k(q) = sum_{m>=1} m^k q^m / (1 - q^m) expanded by
# geometric series, so the n-th coefficient is the divisor power sum
# sigma_k(n).  The Weierstrass coefficients are
#     a4 = -5 s3,        a6 = -(5 s3 + 7 s5) / 12,
# and 5 sigma_3(n) + 7 sigma_5(n) = 0 mod 12 for every n, which we enforce
# with a hard error rather than assume.
# ---------------------------------------------------------------------------


class SeriesTable:
    """Integer q-expansion table: coefficients[n] for 1 <= n <= order."""

    __slots__ = ("name", "order", "coefficients")

    def __init__(self, name: str, order: int, coefficients: dict[int, int]):
        self.name = name
        self.order = order
        self.coefficients = dict(coefficients)

    def coefficient(self, n: int) -> int:
        if not 1 <= n <= self.order:
            raise ValueError("coefficient index %d outside table order %d" % (n, self.order))
        return self.coefficients.get(n, 0)

    def to_tsv(self) -> str:
        lines = ["n\tcoefficient"]
        for n in range(1, self.order + 1):
            lines.append("%d\t%d" % (n, self.coefficients.get(n, 0)))
        return "\n".join(lines) + "\n"

    def __eq__(self, other):
        if not isinstance(other, SeriesTable):
            return NotImplemented
        return (
            self.name == other.name
            and self.order == other.order
            and self.coefficients == other.coefficients
        )

    def __repr__(self):
        return "SeriesTable(%r, order=%d)" % (self.name, self.order)


def _power_sum_series(k: int, order: int) -> dict[int, int]:
    coeffs = {n: 0 for n in range(1, order + 1)}
    for m in range(1, order + 1):
        mk = m ** k
        for n in range(m, order + 1, m):
            coeffs[n] += mk
    return coeffs


def tate_series(name: str, order: int) -> SeriesTable:
    """Expand one of the Tate-curve series to the given order.

    Supported names: "s3", "s5", "a4", "a6".  The a6 coefficients are
    divisible by 12 term by term; a remainder raises ArithmeticError.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    if name == "s3":
        return SeriesTable(name, order, _power_sum_series(3, order))
    if name == "s5":
        return SeriesTable(name, order, _power_sum_series(5, order))
    if name == "a4":
        s3 = _power_sum_series(3, order)
        return SeriesTable(name, order, {n: -5 * c for n, c in s3.items()})
    if name == "a6":
        s3 = _power_sum_series(3, order)
        s5 = _power_sum_series(5, order)
        out = {}
        for n in range(1, order + 1):
            num = -(5 * s3[n] + 7 * s5[n])
            q, r = divmod(num, 12)
            if r != 0:
                raise ArithmeticError(
                    "a6 coefficient at q^%d is not integral: %d/12" % (n, num)
                )
            out[n] = q
        return SeriesTable(name, order, out)
    raise ValueError("unknown series %r (expected s3, s5, a4 or a6)" % name)
