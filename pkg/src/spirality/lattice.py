"""Exact arithmetic on slopes and finite-index sublattices of Z^2.

A slope is an isotopy class of essential simple closed curve on a torus:
a primitive integer vector up to sign, in a fixed basis of the torus.
Sublattices are kept in a canonical Hermite form so equality of values is
equality of subgroups.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

from .errors import ParallelSlopes, RankDeficient


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b), g >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


@dataclass(frozen=True, order=True)
class Slope:
    """Primitive (p, q) with p > 0, or p == 0 and q > 0."""

    p: int
    q: int

    def __post_init__(self):
        if (self.p, self.q) == (0, 0):
            raise ValueError("slope cannot be (0, 0)")
        if gcd(abs(self.p), abs(self.q)) != 1:
            raise ValueError(f"slope {(self.p, self.q)} not primitive")
        if self.p < 0 or (self.p == 0 and self.q < 0):
            raise ValueError(f"slope {(self.p, self.q)} not sign-normalized")

    def vector(self) -> tuple[int, int]:
        return (self.p, self.q)

    def __str__(self):
        return f"({self.p},{self.q})"


def slope(x: int, y: int) -> Slope:
    """Normalize an arbitrary nonzero integer vector to a Slope."""
    if (x, y) == (0, 0):
        raise ValueError("slope cannot be (0, 0)")
    g = gcd(abs(x), abs(y))
    x, y = x // g, y // g
    if x < 0 or (x == 0 and y < 0):
        x, y = -x, -y
    return Slope(x, y)


@dataclass(frozen=True, order=True)
class ScaledSlope:
    """k-th multiple of a slope, k >= 1.  Images of cylinder cores live here."""

    k: int
    s: Slope

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("scale must be a positive integer")

    def vector(self) -> tuple[int, int]:
        return (self.k * self.s.p, self.k * self.s.q)

    def vector_triple(self) -> tuple[int, int, int]:
        return (self.k, self.s.p, self.s.q)

    def __str__(self):
        return f"{self.k}*{self.s}" if self.k != 1 else str(self.s)


def scaled(x: int, y: int) -> ScaledSlope:
    """Factor an arbitrary nonzero integer vector as k * primitive slope."""
    if (x, y) == (0, 0):
        raise ValueError("zero vector has no slope")
    g = gcd(abs(x), abs(y))
    return ScaledSlope(g, slope(x, y))


def cross(u: tuple[int, int], v: tuple[int, int]) -> int:
    return u[0] * v[1] - u[1] * v[0]


def intersection_number(a, b) -> int:
    """Unsigned algebraic intersection number of two (possibly scaled) classes."""
    return abs(cross(a.vector(), b.vector()))


@dataclass(frozen=True)
class Lattice:
    """Finite-index sublattice of Z^2, generated by columns (a, 0) and (b, d).

    Canonical: a >= 1, d >= 1, 0 <= b < a.  Two Lattice values are equal as
    subgroups of Z^2 iff their fields are equal.
    """

    a: int
    b: int
    d: int

    def __post_init__(self):
        if self.a < 1 or self.d < 1 or not 0 <= self.b < self.a:
            raise ValueError(f"not a canonical Hermite form: {(self.a, self.b, self.d)}")

    def matrix(self) -> tuple[int, int, int, int]:
        """Row-major [[a, b], [0, d]]; columns generate the sublattice."""
        return (self.a, self.b, 0, self.d)

    def generators(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return ((self.a, 0), (self.b, self.d))

    def __str__(self):
        return f"<({self.a},0),({self.b},{self.d})>"


def hnf(gens) -> Lattice:
    """Canonical Hermite form of the sublattice generated by integer pairs.

    Raises RankDeficient when the span has rank < 2.
    """
    vs = [(int(x), int(y)) for x, y in gens]
    # combine generators until one vector carries the gcd of all second coords
    w = (0, 0)
    for v in vs:
        g, s, t = xgcd(w[1], v[1])
        w = (s * w[0] + t * v[0], g)
    d = w[1]
    if d == 0:
        raise RankDeficient("all generators lie on the x-axis")
    xs = [v[0] - (v[1] // d) * w[0] for v in vs]
    a = 0
    for x in xs:
        a = gcd(a, abs(x))
    if a == 0:
        raise RankDeficient("generators span rank 1")
    return Lattice(a, w[0] % a, d)


FULL = Lattice(1, 0, 1)


def index(lat: Lattice) -> int:
    """Index in Z^2 = |determinant| of the generator matrix."""
    return lat.a * lat.d


def contains(lat: Lattice, v: tuple[int, int]) -> bool:
    """Membership by back-substitution against the Hermite form."""
    x, y = v
    if y % lat.d != 0:
        return False
    return (x - (y // lat.d) * lat.b) % lat.a == 0


def coefficients(lat: Lattice, v: tuple[int, int]) -> tuple[int, int]:
    """Write v = m*(a,0) + n*(b,d); requires v in lat."""
    x, y = v
    if y % lat.d != 0:
        raise ValueError(f"{v} not in {lat}")
    n = y // lat.d
    if (x - n * lat.b) % lat.a != 0:
        raise ValueError(f"{v} not in {lat}")
    return ((x - n * lat.b) // lat.a, n)


def is_primitive_in(lat: Lattice, v: tuple[int, int]) -> bool:
    """True iff v is part of a basis of lat (not a proper multiple inside lat)."""
    m, n = coefficients(lat, v)
    return gcd(abs(m), abs(n)) == 1


def vector_order(lat: Lattice, v: tuple[int, int]) -> int:
    """Smallest j >= 1 with j*v in lat (the order of v in Z^2 / lat)."""
    x, y = v
    # j must clear the second coordinate first: j = t * j1
    j1 = lat.d // gcd(lat.d, abs(y)) if y else 1
    e = (j1 * y) // lat.d
    f = j1 * x - e * lat.b
    t = lat.a // gcd(lat.a, abs(f)) if f else 1
    return j1 * t


def span2(u: ScaledSlope, v: ScaledSlope) -> Lattice:
    """Sublattice generated by two scaled slopes; they must not be parallel."""
    if u.s == v.s:
        raise ParallelSlopes(f"{u} and {v} are parallel")
    return hnf([u.vector(), v.vector()])


def span_vectors(u: tuple[int, int], v: tuple[int, int]) -> Lattice:
    if cross(u, v) == 0:
        raise ParallelSlopes(f"{u} and {v} are parallel")
    return hnf([u, v])


@dataclass(frozen=True)
class Gluing:
    """Change of basis between the two sides of a decomposition torus.

    Row-major (a, b, c, d) with determinant +-1; maps end_a coordinates to
    end_b coordinates.
    """

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if self.det() not in (1, -1):
            raise ValueError("gluing matrix must have determinant +-1")

    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def apply(self, v: tuple[int, int]) -> tuple[int, int]:
        x, y = v
        return (self.a * x + self.b * y, self.c * x + self.d * y)

    def inverse(self) -> "Gluing":
        s = self.det()
        return Gluing(s * self.d, -s * self.b, -s * self.c, s * self.a)

    def apply_slope(self, s: Slope) -> Slope:
        return slope(*self.apply(s.vector()))

    def apply_scaled(self, c: ScaledSlope) -> ScaledSlope:
        return scaled(*self.apply(c.vector()))

    def matrix(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)


IDENTITY_GLUING = Gluing(1, 0, 0, 1)


def apply_gluing(g: Gluing, lat: Lattice) -> Lattice:
    """Image of a sublattice under a unimodular basis change; index is preserved."""
    u, v = lat.generators()
    return hnf([g.apply(u), g.apply(v)])


def basis_to_x_axis(s: Slope) -> Gluing:
    """A unimodular map sending the primitive s to (1, 0)."""
    g, al, be = xgcd(s.p, s.q)
    # al*p + be*q = 1, so rows (al, be) and (-q, p) form a unimodular matrix
    return Gluing(al, be, -s.q, s.p)


def compat_constants(c: ScaledSlope, t: Slope, t2: Slope) -> tuple[int, int]:
    """Constants (B, B2) making the two cylinder covers agree.

    For every alpha >= 1, span2(c, alpha*B*t) equals span2(c, alpha*B2*t2).
    Computed by moving c to the x-axis with a unimodular map: with c = (x, 0),
    t = (y, z), t2 = (y2, z2) we take B = x*|z2| and B2 = x*|z|.
    """
    if t == c.s or t2 == c.s:
        raise ParallelSlopes("slope parallel to the core")
    u = basis_to_x_axis(c.s)
    x = c.k
    z = u.apply(t.vector())[1]
    z2 = u.apply(t2.vector())[1]
    return (x * abs(z2), x * abs(z))


def completion_slope(s: Slope) -> Slope:
    """Deterministic slope completing s to a basis of Z^2 (|s x t| = 1).

    All completions form the coset t0 + Z*s; we return the smallest one under
    the key (max(|p|,|q|), p, q) after sign normalization.  The max-norm is
    convex piecewise-linear in the shift, so a bounded scan finds the minimum.
    """
    g, al, be = xgcd(s.p, s.q)
    t0 = (-be, al)  # s x t0 = p*al + q*be = 1
    bound = abs(t0[0]) + abs(t0[1]) + 2
    best = None
    for k in range(-bound, bound + 1):
        cand = slope(t0[0] + k * s.p, t0[1] + k * s.q)
        key = (max(abs(cand.p), abs(cand.q)), cand.p, cand.q)
        if best is None or key < best[0]:
            best = (key, cand)
    return best[1]
