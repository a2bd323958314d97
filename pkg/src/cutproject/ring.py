"""Exact arithmetic in real quadratic rings Z[q] and the cut and project lattice.

The ring is fixed by the minimal polynomial ``x**2 - p*x - r`` of ``q``.
Elements ``a + b*q`` are carried as integer pairs; everything that touches a
window boundary is decided in exact arithmetic in the field ``Q(sqrt(D))``
with ``D = p**2 + 4*r``.

Fourier sign convention
-----------------------
The embedding lattice is ``{(x, x*) : x in Z[q]}``.  Its dual lattice is
``{(y/sqrt(D), -y*/sqrt(D)) : y in Z[q]}``, so a Fourier module point ``k``
has physical coordinate ``k = y/sqrt(D)`` and internal dual coordinate
``k_internal = -y*/sqrt(D)``.  The pairing ``k*x + k_internal*x*`` equals the
``q``-coefficient of ``y*x`` and is therefore an integer.  We write
``k_star = y*/sqrt(D) = -k_internal``; with it ``exp(-2 pi i k x) ==
exp(-2 pi i k_star x*)`` for every lattice point ``x``.  Flipping the sign
convention in the diffraction routines replaces ``k_star`` by ``k_internal``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

INT64_MAX = 2**63 - 1


def _check_int64(*values):
    for v in values:
        if not -INT64_MAX <= v <= INT64_MAX:
            raise OverflowError(f"ring coefficient {v} exceeds the 64-bit range")


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


@dataclass(frozen=True)
class QuadraticNumber:
    """Exact number ``u + v*sqrt(d)`` with rational ``u``, ``v``.

    ``d`` must be a positive non-square integer.  Ordinary ints, Fractions
    and floats (taken at their exact binary value) mix freely.
    """

    u: Fraction
    v: Fraction = Fraction(0)
    d: int = 5

    def __post_init__(self):
        object.__setattr__(self, "u", _as_fraction(self.u))
        object.__setattr__(self, "v", _as_fraction(self.v))

    def _coerce(self, other) -> QuadraticNumber:
        if isinstance(other, QuadraticNumber):
            if other.d != self.d and other.v != 0 and self.v != 0:
                raise ValueError(f"mixing Q(sqrt({self.d})) and Q(sqrt({other.d}))")
            if other.v == 0 or other.d == self.d:
                return QuadraticNumber(other.u, other.v, self.d)
            return other
        return QuadraticNumber(_as_fraction(other), 0, self.d)

    def _field(self, other: QuadraticNumber) -> int:
        return self.d if self.v != 0 else other.d

    def __add__(self, other):
        o = self._coerce(other)
        return QuadraticNumber(self.u + o.u, self.v + o.v, self._field(o))

    __radd__ = __add__

    def __neg__(self):
        return QuadraticNumber(-self.u, -self.v, self.d)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        d = self._field(o)
        return QuadraticNumber(self.u * o.u + d * self.v * o.v, self.u * o.v + self.v * o.u, d)

    __rmul__ = __mul__

    def conjugate(self) -> QuadraticNumber:
        return QuadraticNumber(self.u, -self.v, self.d)

    def norm(self) -> Fraction:
        return self.u * self.u - self.d * self.v * self.v

    def __truediv__(self, other):
        o = self._coerce(other)
        n = o.norm()
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt(d))")
        num = self * o.conjugate()
        return QuadraticNumber(num.u / n, num.v / n, num.d)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        base = self if n >= 0 else 1 / self
        out = QuadraticNumber(1, 0, self.d)
        for _ in range(abs(n)):
            out = out * base
        return out

    def sign(self) -> int:
        su = (self.u > 0) - (self.u < 0)
        sv = (self.v > 0) - (self.v < 0)
        if su == sv or sv == 0:
            return su
        if su == 0:
            return sv
        # opposite signs: compare u**2 with d*v**2
        diff = self.u * self.u - self.d * self.v * self.v
        return su if diff > 0 else -su

    def _cmp(self, other) -> int:
        return (self - other).sign()

    def __eq__(self, other):
        try:
            return self._cmp(other) == 0
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self.v == 0:
            return hash(self.u)
        return hash((self.u, self.v, self.d))

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __float__(self):
        if self.v == 0:
            return float(self.u)
        root = math.sqrt(self.d)
        if (self.u >= 0) == (self.v >= 0):
            return float(self.u) + float(self.v) * root
        # cancellation-free: (u + v r) = (u^2 - d v^2) / (u - v r)
        return float(self.norm()) / (float(self.u) - float(self.v) * root)

    def __str__(self):
        if self.v == 0:
            return str(self.u)
        sign = "-" if self.v < 0 else "+"
        return f"{self.u} {sign} {abs(self.v)}*sqrt({self.d})"

    _PATTERN = re.compile(
        r"^\s*(?P<u>[-+]?\d+(?:/\d+)?)\s*"
        r"(?:(?P<s>[-+])\s*(?P<v>\d+(?:/\d+)?)\s*\*\s*sqrt\(\s*(?P<d>\d+)\s*\))?\s*$"
    )

    @classmethod
    def parse(cls, text: str, d: int = 5) -> QuadraticNumber:
        """Inverse of ``str``: accepts ``"3/2"`` or ``"1/2 - 1/2*sqrt(5)"``."""
        m = cls._PATTERN.match(text)
        if m is None:
            raise ValueError(f"not an exact quadratic number: {text!r}")
        u = Fraction(m.group("u"))
        if m.group("v") is None:
            return cls(u, 0, d)
        v = Fraction(m.group("v"))
        if m.group("s") == "-":
            v = -v
        return cls(u, v, int(m.group("d")))


def exact(x, d: int = 5) -> QuadraticNumber:
    """Promote an int/Fraction/float/QuadraticNumber to a QuadraticNumber."""
    if isinstance(x, QuadraticNumber):
        return x
    return QuadraticNumber(_as_fraction(x), 0, d)


@dataclass(frozen=True)
class QuadraticRing:
    """The ring Z[q] with ``q**2 = p*q + r``; ``q_value`` is the larger root."""

    p: int
    r: int

    def __post_init__(self):
        disc = self.p * self.p + 4 * self.r
        if disc <= 0:
            raise ValueError(f"discriminant {disc} must be positive")
        if math.isqrt(disc) ** 2 == disc:
            raise ValueError(f"discriminant {disc} is a perfect square; q is rational")

    @property
    def discriminant(self) -> int:
        return self.p * self.p + 4 * self.r

    @property
    def q_exact(self) -> QuadraticNumber:
        return QuadraticNumber(Fraction(self.p, 2), Fraction(1, 2), self.discriminant)

    @property
    def q_star_exact(self) -> QuadraticNumber:
        return self.q_exact.conjugate()

    @property
    def q_value(self) -> float:
        return float(self.q_exact)

    @property
    def q_star(self) -> float:
        return float(self.q_star_exact)

    def element(self, a: int, b: int = 0) -> RingElement:
        return RingElement(int(a), int(b), self)

    @property
    def zero(self) -> RingElement:
        return self.element(0, 0)

    @property
    def one(self) -> RingElement:
        return self.element(1, 0)

    @property
    def q(self) -> RingElement:
        return self.element(0, 1)

    def values(self, a, b) -> np.ndarray:
        """Vectorised float ``a + b*q`` for coefficient arrays."""
        return _embed(np.asarray(a), np.asarray(b), self.p, self.discriminant, +1)

    def star_values(self, a, b) -> np.ndarray:
        """Vectorised float ``a + b*q_star`` for coefficient arrays."""
        return _embed(np.asarray(a), np.asarray(b), self.p, self.discriminant, -1)


def _embed(a, b, p, disc, sign):
    # a + b*(p + sign*sqrt(D))/2 = (2a + b p)/2 + sign*b*sqrt(D)/2, evaluated
    # without cancellation when the two parts have opposite signs.
    u = 2.0 * a + float(p) * b
    w = sign * np.sqrt(disc) * b
    same = np.sign(u) * np.sign(w) >= 0
    out = np.empty(np.broadcast(u, w).shape)
    out[...] = (u + w) / 2.0
    if not np.all(same):
        ai = np.asarray(a, dtype=object)
        bi = np.asarray(b, dtype=object)
        num = (2 * ai + p * bi) ** 2 - disc * bi * bi
        num = np.broadcast_to(num, out.shape)
        diff = np.broadcast_to(u - w, out.shape)
        mask = ~np.broadcast_to(same, out.shape)
        out[mask] = num[mask].astype(float) / (2.0 * diff[mask])
    return out


@dataclass(frozen=True)
class RingElement:
    """``a + b*q`` in Z[q]; arithmetic is exact and overflow-checked to int64."""

    a: int
    b: int
    ring: QuadraticRing = field(repr=False)

    def __post_init__(self):
        _check_int64(self.a, self.b)

    def _same(self, other) -> RingElement:
        if isinstance(other, int):
            return RingElement(other, 0, self.ring)
        if not isinstance(other, RingElement):
            raise TypeError(f"unsupported operand {type(other).__name__}")
        if other.ring != self.ring:
            raise ValueError("elements belong to different rings")
        return other

    def __add__(self, other):
        o = self._same(other)
        return RingElement(self.a + o.a, self.b + o.b, self.ring)

    __radd__ = __add__

    def __neg__(self):
        return RingElement(-self.a, -self.b, self.ring)

    def __sub__(self, other):
        return self + (-self._same(other))

    def __rsub__(self, other):
        return self._same(other) - self

    def __mul__(self, other):
        return ring_mul(self, self._same(other))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not ring elements")
        out = self.ring.one
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, int):
            return self.a == other and self.b == 0
        if isinstance(other, RingElement):
            return (self.a, self.b, self.ring) == (other.a, other.b, other.ring)
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.ring))

    def norm(self) -> int:
        """Field norm ``x * x*``; units have norm +-1."""
        p, r = self.ring.p, self.ring.r
        return self.a * self.a + p * self.a * self.b - r * self.b * self.b

    def is_unit(self) -> bool:
        return abs(self.norm()) == 1

    @property
    def exact_value(self) -> QuadraticNumber:
        return self.a + self.b * self.ring.q_exact

    @property
    def exact_star(self) -> QuadraticNumber:
        return self.a + self.b * self.ring.q_star_exact

    @property
    def value(self) -> float:
        return float(self.exact_value)

    def __float__(self):
        return self.value

    def __str__(self):
        return f"{self.a}{'+' if self.b >= 0 else '-'}{abs(self.b)}q"


def ring_mul(x: RingElement, y: RingElement) -> RingElement:
    """Exact product ``(a1 + b1 q)(a2 + b2 q)``; raises OverflowError past int64."""
    if x.ring != y.ring:
        raise ValueError("elements belong to different rings")
    p, r = x.ring.p, x.ring.r
    a = x.a * y.a + r * x.b * y.b
    b = x.a * y.b + y.a * x.b + p * x.b * y.b
    return RingElement(a, b, x.ring)


def star(x: RingElement) -> float:
    """Galois conjugate ``a + b*q_star`` as a float (see ``exact_star``)."""
    return float(x.exact_star)


@dataclass(frozen=True)
class EmbeddingLattice:
    """The lattice ``{(x, x*)}`` in R^2 spanned by ``(1, 1)`` and ``(q, q*)``."""

    ring: QuadraticRing

    @property
    def basis(self) -> np.ndarray:
        return np.array([[1.0, 1.0], [self.ring.q_value, self.ring.q_star]])

    @property
    def covolume(self) -> float:
        return math.sqrt(self.ring.discriminant)

    @property
    def exact_basis(self):
        one = exact(1, self.ring.discriminant)
        return ((one, one), (self.ring.q_exact, self.ring.q_star_exact))

    def exact_dual_basis(self):
        """Dual vectors ``((-q*, q)/sqrt(D), (1, -1)/sqrt(D))`` in exact form."""
        d = self.ring.discriminant
        root = QuadraticNumber(0, 1, d)
        q, qs = self.ring.q_exact, self.ring.q_star_exact
        return ((-qs / root, q / root), (exact(1, d) / root, exact(-1, d) / root))

    def point(self, x: RingElement) -> tuple[float, float]:
        return (x.value, star(x))


def dual_basis(lattice: EmbeddingLattice) -> np.ndarray:
    """Float rows ``d1, d2`` with ``d_i . b_j == delta_ij``.

    Biorthogonality is checked in exact arithmetic before returning.
    """
    basis = lattice.exact_basis
    dual = lattice.exact_dual_basis()
    for i, dv in enumerate(dual):
        for j, bv in enumerate(basis):
            pairing = dv[0] * bv[0] + dv[1] * bv[1]
            if pairing != (1 if i == j else 0):
                raise ArithmeticError(f"dual basis check failed at ({i}, {j}): {pairing}")
    return np.array([[float(c) for c in dv] for dv in dual])


@dataclass(frozen=True)
class FourierModulePoint:
    """A point ``numerator/sqrt(D)`` of the Fourier module, with its dual coordinates."""

    numerator: RingElement

    @property
    def denominator(self) -> float:
        return math.sqrt(self.numerator.ring.discriminant)

    @property
    def k_value(self) -> float:
        return self.numerator.value / self.denominator

    @property
    def k_star(self) -> float:
        return star(self.numerator) / self.denominator

    @property
    def k_internal(self) -> float:
        """Second coordinate of the dual lattice vector; equals ``-k_star``."""
        return -self.k_star

    def pairing(self, x: RingElement) -> int:
        """Exact integer ``k*x + k_internal*x*`` (the q-coefficient of numerator*x)."""
        return ring_mul(self.numerator, x).b

    def scaled(self, factor: RingElement) -> FourierModulePoint:
        """The module point ``factor * k`` (action of the inflation on k-space)."""
        return FourierModulePoint(ring_mul(factor, self.numerator))


def is_module_point(lattice: EmbeddingLattice, k: float, k_internal: float, tol: float = 1e-9) -> bool:
    """Float test of dual-lattice membership of ``(k, k_internal)`` against both generators."""
    for x, xs in lattice.basis:
        s = k * x + k_internal * xs
        if abs(s - round(s)) > tol:
            return False
    return True


def fourier_module_points(lattice: EmbeddingLattice, k_max: float, k_star_max: float) -> list[FourierModulePoint]:
    """All module points with ``|k| <= k_max`` and ``|k_star| <= k_star_max``, sorted by k."""
    if k_max <= 0 or k_star_max <= 0:
        raise ValueError("k_max and k_star_max must be positive")
    from .modelset import Window, enumerate_coefficients

    root = math.sqrt(lattice.ring.discriminant)
    # the numerators form a model set with window |y*| <= sqrt(D) k_star_max
    window = Window(-k_star_max * root, k_star_max * root)
    a, b = enumerate_coefficients(lattice.ring, window, k_max * root)
    return [FourierModulePoint(lattice.ring.element(ai, bi)) for ai, bi in zip(a.tolist(), b.tolist())]
