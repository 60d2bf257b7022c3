"""Affine lines of rational slope on a flat 2-torus, their intersection
generators with integer gradings, and composition tables from exact
lattice-polygon enumeration.

Conventions fixed here (and validated globally by the relation checker):

* A line is (primitive direction (p, q), offset, grading lift).  The
  direction is normalized to q > 0, or q = 0 and p > 0.  The offset is
  the value of <(-q, p), x> mod 1, constant along the line.
* The degree of an intersection point from L1 to L2 is
  (lift1 - lift2) + (1 if angle(L1) > angle(L2) else 0), with angles in
  [0, pi) compared by an exact cross-product test.  Degrees of the two
  readings of a point sum to 1.
* mu^d(a_d, ..., a_1) counts convex embedded (d+1)-gons in the plane
  with vertices at lifts of the corner points, traversed
  counterclockwise in the cyclic order (output, a_d, ..., a_1), weighted
  q^(torus_area * euclidean area).  A polygon is counted once per
  translation class (the a_1 corner is anchored).  For straight lines
  and d <= 3 every contributing polygon is convex and embedded, because
  fewer than five corners cannot absorb a full extra turn; this is why
  arities stop at 3 and why distinct objects must have distinct slopes.
* When the chain closes up (first object = last object), the output
  lands in the rank-2 self-hom space: the degree-0 component weights
  each triangle by how often its closing boundary arc covers a fixed
  generic marked point of the line; the degree-1 component counts the
  triangles plainly.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .ainfty import AInftyCategory
from .novikov import NovikovScalar

# Sign data, frozen by an exhaustive search over the candidate rules at
# arity cap 4 (every alternative breaks the relations; see the tests).
# The sign of a polygon has an entry-level part depending on the corner
# degrees (MU2_TWIST as F_2 coefficients of (1, x2, x1, x2x1), MU3_TWIST
# of (1, x3, x2, x1, x3x2, x3x1, x2x1, x3x2x1)) and an orientation part
# depending on the polygon itself: with b_i the against-orientation bit
# of arc i, s_i / e_i the degrees of the generators where arc i starts /
# ends, the orientation sign is (-1) to the power
# ARC_RULE . (sum b_i, sum b_i s_i, sum b_i e_i).  Star-weighted counts
# (closing chains and point-class insertions) pick up STAR_ARC_TWIST
# when the arc carrying the marked point runs against orientation, and
# the listed global signs.
MU2_TWIST = (0, 0, 1, 0)
MU3_TWIST = (0, 0, 0, 0, 0, 0, 0, 0)
ARC_RULE = (0, 0, 0)
STAR_ARC_TWIST = 0
PAIRING_SIGN = 1
CLOSED_E_SIGN = 1
CLOSED_X_SIGN = 1
POINT_INSERTION_SIGNS = (1, 1, 1)

# Parameter along each line for the marked point used by the
# degree-0 closed-chain counts.  Any value whose denominator is coprime
# to every corner denominator works; a large prime keeps it generic.
MARKED_POINT_PARAMETER = Fraction(1, 1009)

# Parameter along each line for its spin point.  Same genericity
# requirement as the marked point, and the two must not collide.
SPIN_PARAMETER = Fraction(1015, 2027)


def _gcd(a: int, b: int) -> int:
    return math.gcd(a, b)


def _egcd(a: int, b: int):
    """(g, u, v) with u*a + v*b = g."""
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, u, v = _egcd(b, a % b)
    return g, v, u - (a // b) * v


def _cross(u, v) -> int:
    return u[0] * v[1] - u[1] * v[0]


def _dot(u, v):
    return u[0] * v[0] + u[1] * v[1]


class LagrangianLine:
    """An affine line of rational slope on the torus [0,1)^2.

    ``direction``: primitive integer vector, normalized as above.
    ``offset``: Fraction in [0,1), the value of <(-q,p), x> mod 1.
    ``grading_lift``: integer part of the phase; the fractional part is
    angle/pi, determined by the direction.
    ``orientation_sign``: +1 only; the shipped orientation convention is
    the one making every polygon count positive, and alternative spin
    choices are out of scope.
    """

    __slots__ = ("direction", "offset", "grading_lift", "orientation_sign", "torus_area")

    def __init__(
        self,
        direction,
        offset=Fraction(0),
        grading_lift: int = 0,
        orientation_sign: int = 1,
        torus_area=Fraction(1),
    ):
        p, q = int(direction[0]), int(direction[1])
        if p == 0 and q == 0:
            raise ValueError("direction must be nonzero")
        g = _gcd(abs(p), abs(q))
        p, q = p // g, q // g
        if q < 0 or (q == 0 and p < 0):
            p, q = -p, -q
        self.direction = (p, q)
        self.offset = Fraction(offset) % 1
        self.grading_lift = int(grading_lift)
        if orientation_sign != 1:
            raise ValueError(
                "only the +1 orientation convention is supported; it is the "
                "choice that makes all polygon counts positive"
            )
        self.orientation_sign = 1
        self.torus_area = Fraction(torus_area)
        if self.torus_area <= 0:
            raise ValueError("torus area must be positive")

    @property
    def normal(self):
        p, q = self.direction
        return (-q, p)

    def base_point(self):
        """Some rational point on the line."""
        n = self.normal
        nn = n[0] * n[0] + n[1] * n[1]
        return (self.offset * n[0] / nn, self.offset * n[1] / nn)

    def marked_point(self):
        """The fixed generic point used by closed-chain degree-0 counts."""
        bx, by = self.base_point()
        p, q = self.direction
        t = MARKED_POINT_PARAMETER
        return (bx + t * p, by + t * q)

    def spin_point(self):
        """The stitch point of the nontrivial double cover of the line.

        A boundary arc that passes over a lift of this point changes the
        sign of its polygon.  The point is generic: it collides with no
        intersection point arising from lines of bounded denominator.
        """
        bx, by = self.base_point()
        p, q = self.direction
        t = SPIN_PARAMETER
        return (bx + t * p, by + t * q)

    def contains(self, point) -> bool:
        n = self.normal
        return (n[0] * point[0] + n[1] * point[1] - self.offset) % 1 == 0

    def shift(self, n: int = 1) -> "LagrangianLine":
        """Same line with the grading lift moved by n (the [n] shift)."""
        return LagrangianLine(
            self.direction,
            self.offset,
            self.grading_lift - n,
            self.orientation_sign,
            self.torus_area,
        )

    def key(self):
        return (self.direction, self.offset, self.grading_lift, self.torus_area)

    def __eq__(self, other):
        if not isinstance(other, LagrangianLine):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return "LagrangianLine(direction=%s, offset=%s, lift=%d)" % (
            self.direction,
            self.offset,
            self.grading_lift,
        )

    def to_json_obj(self):
        return [
            self.direction[0],
            self.direction[1],
            self.offset.numerator,
            self.offset.denominator,
            self.grading_lift,
            self.orientation_sign,
        ]

    @classmethod
    def from_json_obj(cls, obj, torus_area=Fraction(1)):
        p, q, on, od, lift, sign = obj
        return cls((p, q), Fraction(on, od), lift, sign, torus_area)


def line_through(point, direction, grading_lift=0, torus_area=Fraction(1)):
    """The line with the given direction passing through the given point."""
    p, q = direction
    offset = -q * Fraction(point[0]) + p * Fraction(point[1])
    return LagrangianLine(direction, offset, grading_lift, 1, torus_area)


# ---------------------------------------------------------------------------
# Dehn twists.
# ---------------------------------------------------------------------------

TWIST_FIBRE = ((1, 0), (1, 1))  # fixes the fibre direction (0,1)
TWIST_SECTION = ((1, -1), (0, 1))  # fixes the section direction (1,0)


def _apply_matrix(M, v):
    return (M[0][0] * v[0] + M[0][1] * v[1], M[1][0] * v[0] + M[1][1] * v[1])


def dehn_twist(L: LagrangianLine, core: str) -> LagrangianLine:
    """Twist along the fibre ("fibre") or the section ("section").

    The linear action maps the line as a set; offsets transport because
    the matrices preserve the lattice, and the grading lift bumps by one
    exactly when the direction wraps past angle pi.
    """
    if core == "fibre":
        M = TWIST_FIBRE
    elif core == "section":
        M = TWIST_SECTION
    else:
        raise ValueError("core must be 'fibre' or 'section'")
    p, q = _apply_matrix(M, L.direction)
    lift = L.grading_lift
    if q < 0 or (q == 0 and p < 0):
        p, q = -p, -q
        lift += 1
    # transport the offset: the image line is {Mx : <n,x> = c}, and
    # <n', Mx> = <n, x> with n' the (renormalized) image normal
    new_normal = (-q, p)
    bx, by = L.base_point()
    img = (
        M[0][0] * bx + M[0][1] * by,
        M[1][0] * bx + M[1][1] * by,
    )
    offset = (new_normal[0] * img[0] + new_normal[1] * img[1]) % 1
    return LagrangianLine((p, q), offset, lift, L.orientation_sign, L.torus_area)


def iterated_twist(L: LagrangianLine, core: str, times: int) -> LagrangianLine:
    for _ in range(times):
        L = dehn_twist(L, core)
    return L


# ---------------------------------------------------------------------------
# Hom spaces.
# ---------------------------------------------------------------------------


class MorseModel:
    """Self-hom model: unit in degree 0, point class in degree 1."""

    __slots__ = ("line",)

    def __init__(self, line):
        self.line = line

    @property
    def degrees(self):
        return (0, 1)


class IntersectionBasis:
    """Transverse hom: the intersection points, all in one degree."""

    __slots__ = ("points", "degree")

    def __init__(self, points, degree):
        self.points = list(points)
        self.degree = degree


def morphism_degree(L1: LagrangianLine, L2: LagrangianLine) -> int:
    """Degree of any intersection point read as a morphism L1 -> L2."""
    c = _cross(L2.direction, L1.direction)
    if c == 0:
        raise ValueError("parallel lines have no transverse degree")
    return L1.grading_lift - L2.grading_lift + (1 if c > 0 else 0)


def intersection_points(L1: LagrangianLine, L2: LagrangianLine):
    """Sorted positions of L1 ∩ L2 on the torus; |det| many points."""
    n1, n2 = L1.normal, L2.normal
    det = n1[0] * n2[1] - n1[1] * n2[0]
    if det == 0:
        raise ValueError("parallel lines do not intersect transversely")
    pts = set()
    for i in range(abs(det)):
        for j in range(abs(det)):
            r1 = L1.offset + i
            r2 = L2.offset + j
            x = (n2[1] * r1 - n1[1] * r2) / det
            y = (-n2[0] * r1 + n1[0] * r2) / det
            pts.add((x % 1, y % 1))
    if len(pts) != abs(det):
        raise AssertionError("expected %d intersection points" % abs(det))
    return sorted(pts)


def hom_space(L1: LagrangianLine, L2: LagrangianLine):
    """Morse model for equal lines, intersection basis for transverse
    ones; distinct parallel lines are out of scope and rejected."""
    if L1.torus_area != L2.torus_area:
        raise ValueError("lines live on tori of different area")
    if L1.direction == L2.direction:
        if L1.offset == L2.offset:
            return MorseModel(L1)
        raise ValueError(
            "distinct parallel lines are not supported (no transverse "
            "intersection and no Morse model)"
        )
    return IntersectionBasis(intersection_points(L1, L2), morphism_degree(L1, L2))


# ---------------------------------------------------------------------------
# Polygon enumeration.  All corner coordinates are scaled to integers;
# candidate ranges come from the exact bound
#     |cross(edge_i, edge_{i+1})| = 2 area(corner triangle) <= 2 area(P),
# which caps every edge length once the polygon area is capped.
# ---------------------------------------------------------------------------


def _lcm(a: int, b: int) -> int:
    return a // _gcd(a, b) * b


def _denominator_lcm(points) -> int:
    N = 1
    for (x, y) in points:
        N = _lcm(N, Fraction(x).denominator)
        N = _lcm(N, Fraction(y).denominator)
    return N


def _solve_normal_equation(n, r):
    """Integer z with <n, z> = r, for primitive n."""
    g, u, v = _egcd(n[0], n[1])
    if r % g:
        raise ArithmeticError("congruence has no integer solution")
    return (u * (r // g), v * (r // g))


def _base_lift(S, line_normal, through, point):
    """A lift of ``point`` on the line with normal ``line_normal``
    through ``through``; coordinates are scaled by S, so lattice
    translates step by multiples of S."""
    n = line_normal
    r = _dot(n, through) - _dot(n, point)
    if r % S:
        raise ArithmeticError("point does not lie on the line downstairs")
    z = _solve_normal_equation(n, r // S)
    return (point[0] + S * z[0], point[1] + S * z[1])


def _quad_window(f, cap):
    """A finite range of integers k guaranteed to contain every k with
    0 < f(k) < cap, for an integer quadratic f with nonzero leading
    coefficient (verified by refitting on a fourth sample)."""
    f0, f1, fm1 = f(0), f(1), f(-1)
    c2, rem = divmod(f1 + fm1 - 2 * f0, 2)
    if rem:
        raise ArithmeticError("family area is not an integer quadratic")
    c1 = (f1 - fm1) // 2
    c0 = f0
    if f(2) != 4 * c2 + 2 * c1 + c0:
        raise ArithmeticError("family area is not quadratic")
    if c2 == 0:
        if c1 == 0:
            raise ArithmeticError("degenerate one-parameter family")
        lo = (-c0) * c1  # endpoints of 0 < c1*k + c0 < cap, widened
        hi = (cap - c0) * c1
        a, b = sorted((lo, hi))
        return range(a // (c1 * c1) - 2, b // (c1 * c1) + 3)
    if c2 > 0:
        disc = c1 * c1 - 4 * c2 * (c0 - cap)
        if disc < 0:
            return range(0)
        root = math.isqrt(disc)
        lo = (-c1 - root) // (2 * c2) - 2
        hi = (-c1 + root) // (2 * c2) + 3
        return range(lo, hi)
    disc = c1 * c1 - 4 * c2 * c0
    if disc < 0:
        return range(0)
    root = math.isqrt(disc)
    lo = (c1 - root) // (-2 * c2) - 2  # roots of f = 0, c2 < 0
    hi = (c1 + root) // (-2 * c2) + 3
    a, b = sorted((lo, hi))
    return range(a, b + 1)


class PolygonCount:
    """One contributing polygon: exponent, output position, weight, one
    bit per boundary arc recording whether the arc runs against the
    orientation of its line (arcs listed in chain order of the lines),
    and the parity of spin-point passages over the whole boundary.
    These bits feed the sign rule; polygons in the same structure
    constant can traverse their lines differently and cover different
    spin-point lifts, so the sign genuinely lives on the polygon and
    not on the table entry."""

    __slots__ = ("exponent", "output", "weight", "arcs", "spin")

    def __init__(self, exponent, output, weight, arcs, spin=0):
        self.exponent = exponent
        self.output = output
        self.weight = weight
        self.arcs = arcs
        self.spin = spin


def _against(vec, direction):
    """1 if the nonzero vector is a negative multiple of direction."""
    if direction[0]:
        return 1 if vec[0] * direction[0] < 0 else 0
    return 1 if vec[1] * direction[1] < 0 else 0


def _edge_steps(vec, direction):
    """vec = m * direction: return m (vec parallel to primitive direction)."""
    if direction[0]:
        return vec[0] // direction[0]
    return vec[1] // direction[1]


def _shoe_bound(S, truncation, torus_area):
    """Exclusive integer bound: exponent < T <=> shoelace < this."""
    cap = Fraction(2 * S * S) * Fraction(truncation) / torus_area
    return int(cap) + (0 if cap.denominator == 1 else 1)


def triangle_counts(lines, points, truncation, torus_area, star_side=None):
    """Convex-triangle counts for two transverse inputs.

    ``lines`` = (X0, X1, X2), ``points`` = (a1, a2) with a1 in X0∩X1 and
    a2 in X1∩X2.  Returns a list of PolygonCount with exponents < the
    truncation; outputs are positions in X0 ∩ X2 scaled by the returned
    S.  Complete below the bound: along the one translate family the
    doubled area is a genuine quadratic, so a finite window of k
    contains every contribution.

    With ``star_side`` in {"first", "middle", "last"} each triangle is
    weighted by the number of lifts of the marked point of the
    corresponding line covered by that boundary side (first = the X0
    side from a1 to the output, middle = the X1 side, last = the X2
    side from the output to a2).  This computes the arity-3 products
    with one point-class input, which constrains a boundary side to
    pass over the marked point.
    """
    L0, L1, L2 = lines
    a1, a2 = points
    d0, d1, d2 = L0.direction, L1.direction, L2.direction
    D = _cross(d0, d2)
    if D == 0:
        raise ValueError("first and last lines must be transverse")
    N = _denominator_lcm([a1, a2])
    S = N * abs(D)
    A1 = (int(S * Fraction(a1[0])), int(S * Fraction(a1[1])))
    P2 = (int(S * Fraction(a2[0])), int(S * Fraction(a2[1])))
    A2base = _base_lift(S, L1.normal, A1, P2)
    step = (S * d1[0], S * d1[1])
    cross_d2_d0 = _cross(d2, d0)
    shoe_max = _shoe_bound(S, truncation, torus_area)

    def corners(k):
        A2 = (A2base[0] + k * step[0], A2base[1] + k * step[1])
        num = _cross(d2, (A2[0] - A1[0], A2[1] - A1[1]))
        s = num // cross_d2_d0
        if s * cross_d2_d0 != num:
            raise ArithmeticError("corner solve lost integrality")
        Y = (A1[0] + s * d0[0], A1[1] + s * d0[1])
        return A2, Y

    def shoe_at(k):
        A2, Y = corners(k)
        return _cross((A2[0] - Y[0], A2[1] - Y[1]), (A1[0] - Y[0], A1[1] - Y[1]))

    out = []
    # Fully constant triangle: all corners at one common lift, which
    # happens exactly when some translate of a2 equals the a1 lift.  It
    # contributes only when the three phase sectors at the point
    # compose, i.e. when the degree of the output reading matches the
    # sum of the input degrees.  Nonconstant convex triangles satisfy
    # that automatically (their boundary turns through exactly 2 pi),
    # so only this degenerate case needs the explicit gate.  A marked
    # point is never covered by a degenerate side, so constant
    # triangles drop out of the star-weighted counts.
    m0 = _edge_steps((A2base[0] - A1[0], A2base[1] - A1[1]), d1)
    if star_side is None and m0 % S == 0 and morphism_degree(
        L0, L2
    ) == morphism_degree(L0, L1) + morphism_degree(L1, L2):
        out.append(PolygonCount(Fraction(0), A1, 1, (0, 0, 0)))
    if star_side is not None:
        star_line = {"first": L0, "middle": L1, "last": L2}[star_side]
        marked = star_line.marked_point()
    for k in _quad_window(shoe_at, shoe_max):
        A2, Y = corners(k)
        if A2 == A1 or Y == A1 or Y == A2:
            continue
        shoe = _cross((A2[0] - Y[0], A2[1] - Y[1]), (A1[0] - Y[0], A1[1] - Y[1]))
        if shoe <= 0 or shoe >= shoe_max:
            continue
        exponent = Fraction(shoe, 2 * S * S) * torus_area
        if exponent >= truncation:
            continue
        # boundary cycle Y -> A2 -> A1 is counterclockwise; arcs in line
        # order: L0 carries A1 -> Y, L1 carries A2 -> A1, L2 carries
        # Y -> A2
        arcs = (
            _against((Y[0] - A1[0], Y[1] - A1[1]), d0),
            _against((A1[0] - A2[0], A1[1] - A2[1]), d1),
            _against((A2[0] - Y[0], A2[1] - Y[1]), d2),
        )
        spin = (
            _marked_lifts_in_segment(L0, L0.spin_point(), A1, Y, S)
            + _marked_lifts_in_segment(L1, L1.spin_point(), A2, A1, S)
            + _marked_lifts_in_segment(L2, L2.spin_point(), Y, A2, S)
        ) & 1
        if star_side is None:
            weight = 1
        else:
            ends = {"first": (A1, Y), "middle": (A2, A1), "last": (Y, A2)}[star_side]
            weight = _marked_lifts_in_segment(star_line, marked, ends[0], ends[1], S)
            if weight == 0:
                continue
        out.append(PolygonCount(exponent, Y, weight, arcs, spin))
    return out, S


def quad_counts(lines, points, truncation, torus_area):
    """Convex-quadrilateral counts for mu^3(a_3, a_2, a_1) when the
    first and last objects differ.  Two translate families; the inner
    one is pruned by the corner-triangle bound, so the total work per
    chain stays near the number of contributing polygons."""
    L0, L1, L2, L3 = lines
    a1, a2, a3 = points
    d0, d1, d2, d3 = (L.direction for L in lines)
    D = _cross(d0, d3)
    if D == 0:
        raise ValueError("first and last lines must be transverse")
    N = _denominator_lcm([a1, a2, a3])
    S = N * abs(D)
    A1 = (int(S * Fraction(a1[0])), int(S * Fraction(a1[1])))
    P2 = (int(S * Fraction(a2[0])), int(S * Fraction(a2[1])))
    P3 = (int(S * Fraction(a3[0])), int(S * Fraction(a3[1])))
    A2base = _base_lift(S, L1.normal, A1, P2)
    A3base = _base_lift(S, L2.normal, A2base, P3)
    step1 = (S * d1[0], S * d1[1])
    step2 = (S * d2[0], S * d2[1])
    cross_d3_d0 = _cross(d3, d0)

    shoe_max = _shoe_bound(S, truncation, torus_area)
    quantum = S // N  # both ends of the middle edge sit on the S/N grid

    m1base = _edge_steps((A2base[0] - A1[0], A2base[1] - A1[1]), d1)
    m2base = _edge_steps((A3base[0] - A2base[0], A3base[1] - A2base[1]), d2)
    cross12 = abs(_cross(d1, d2))
    m1_cap = shoe_max // max(1, cross12 * quantum) + 1
    K2 = (m1_cap + abs(m1base)) // S + 2

    out = []
    for k2 in range(-K2, K2 + 1):
        A2 = (A2base[0] + k2 * step1[0], A2base[1] + k2 * step1[1])
        m1 = m1base + k2 * S
        if m1 == 0:
            continue  # degenerate X1-edge; no constant quadrilaterals
        # corner-triangle bound at a2: |m1 m2| cross(d1,d2) < shoe_max
        m2_cap = shoe_max // (cross12 * abs(m1)) + 1
        K3 = (m2_cap + abs(m2base)) // S + 2
        for k3 in range(-K3, K3 + 1):
            A3 = (
                A3base[0] + k2 * step1[0] + k3 * step2[0],
                A3base[1] + k2 * step1[1] + k3 * step2[1],
            )
            num = _cross(d3, (A3[0] - A1[0], A3[1] - A1[1]))
            s = num // cross_d3_d0
            if s * cross_d3_d0 != num:
                raise ArithmeticError("corner solve lost integrality")
            Y = (A1[0] + s * d0[0], A1[1] + s * d0[1])
            e0 = (A3[0] - Y[0], A3[1] - Y[1])
            e1 = (A2[0] - A3[0], A2[1] - A3[1])
            e2 = (A1[0] - A2[0], A1[1] - A2[1])
            e3 = (Y[0] - A1[0], Y[1] - A1[1])
            if (
                _cross(e0, e1) <= 0
                or _cross(e1, e2) <= 0
                or _cross(e2, e3) <= 0
                or _cross(e3, e0) <= 0
            ):
                continue
            shoe = (
                _cross(Y, A3)
                + _cross(A3, A2)
                + _cross(A2, A1)
                + _cross(A1, Y)
            )
            if shoe <= 0 or shoe >= shoe_max:
                continue
            exponent = Fraction(shoe, 2 * S * S) * torus_area
            if exponent >= truncation:
                continue
            # counterclockwise cycle Y -> A3 -> A2 -> A1; arcs in line
            # order: L0 carries A1 -> Y (= e3), L1 carries A2 -> A1
            # (= e2), L2 carries A3 -> A2 (= e1), L3 carries Y -> A3
            # (= e0)
            arcs = (
                _against(e3, d0),
                _against(e2, d1),
                _against(e1, d2),
                _against(e0, d3),
            )
            spin = (
                _marked_lifts_in_segment(L0, L0.spin_point(), A1, Y, S)
                + _marked_lifts_in_segment(L1, L1.spin_point(), A2, A1, S)
                + _marked_lifts_in_segment(L2, L2.spin_point(), A3, A2, S)
                + _marked_lifts_in_segment(L3, L3.spin_point(), Y, A3, S)
            ) & 1
            out.append(PolygonCount(exponent, Y, 1, arcs, spin))
    return out, S


def closed_triangle_counts(lines, points, truncation, torus_area, star_weight):
    """Triangle counts for mu^3 on a chain whose first and last objects
    coincide, so the output lies in the self-hom space.  The third
    corner is forced; with ``star_weight`` each triangle counts the
    lifts of the marked point covered by the closing arc (degree-0
    output), otherwise it counts once (degree-1 output)."""
    L0, L1, L2, L3 = lines
    if L3.key() != L0.key():
        raise ValueError("chain does not close up")
    a1, a2, a3 = points
    d0, d1, d2 = L0.direction, L1.direction, L2.direction
    D = _cross(d2, d0)
    if D == 0:
        raise ValueError("the closing pair of lines must be transverse")
    N = _denominator_lcm([a1, a2, a3])
    S = N * abs(D)
    A1 = (int(S * Fraction(a1[0])), int(S * Fraction(a1[1])))
    P2 = (int(S * Fraction(a2[0])), int(S * Fraction(a2[1])))
    P3s = (int(S * Fraction(a3[0])), int(S * Fraction(a3[1])))
    A2base = _base_lift(S, L1.normal, A1, P2)
    step = (S * d1[0], S * d1[1])
    shoe_max = _shoe_bound(S, truncation, torus_area)

    def corners(k):
        A2 = (A2base[0] + k * step[0], A2base[1] + k * step[1])
        # forced third corner: lift of X2 through A2 meets the X0-lift
        # through A1
        num = _cross(d2, (A2[0] - A1[0], A2[1] - A1[1]))
        s = num // D
        if s * D != num:
            raise ArithmeticError("corner solve lost integrality")
        A3 = (A1[0] + s * d0[0], A1[1] + s * d0[1])
        return A2, A3

    def shoe_at(k):
        A2, A3 = corners(k)
        return _cross((A2[0] - A3[0], A2[1] - A3[1]), (A1[0] - A3[0], A1[1] - A3[1]))

    if star_weight:
        marked = L0.marked_point()
    out = []
    for k in _quad_window(shoe_at, shoe_max):
        A2, A3 = corners(k)
        if A2 == A1 or A3 == A1 or A3 == A2:
            continue
        # A3 must be a lift of the prescribed corner a3
        if (A3[0] - P3s[0]) % S != 0 or (A3[1] - P3s[1]) % S != 0:
            continue
        shoe = _cross((A2[0] - A3[0], A2[1] - A3[1]), (A1[0] - A3[0], A1[1] - A3[1]))
        if shoe <= 0 or shoe >= shoe_max:
            continue
        exponent = Fraction(shoe, 2 * S * S) * torus_area
        if exponent >= truncation:
            continue
        if star_weight:
            weight = _marked_lifts_in_segment(L0, marked, A1, A3, S)
            if weight == 0:
                continue
        else:
            weight = 1
        # counterclockwise cycle A3 -> A2 -> A1; arcs in line order: the
        # closing line X0 carries A1 -> A3, X1 carries A2 -> A1, X2
        # carries A3 -> A2
        arcs = (
            _against((A3[0] - A1[0], A3[1] - A1[1]), d0),
            _against((A1[0] - A2[0], A1[1] - A2[1]), d1),
            _against((A2[0] - A3[0], A2[1] - A3[1]), d2),
        )
        spin = (
            _marked_lifts_in_segment(L0, L0.spin_point(), A1, A3, S)
            + _marked_lifts_in_segment(L1, L1.spin_point(), A2, A1, S)
            + _marked_lifts_in_segment(L2, L2.spin_point(), A3, A2, S)
        ) & 1
        out.append(PolygonCount(exponent, A3, weight, arcs, spin))
    return out, S


def _marked_lifts_in_segment(L0, marked, A1, A3, S):
    """Number of lattice lifts of the marked point lying strictly inside
    the segment from A1 to A3 (coordinates scaled by S)."""
    d0 = L0.direction
    n0 = L0.normal
    # lifts of marked on the line through A1/S: marked + z, <n0, z> = r
    r = Fraction(_dot(n0, A1), S) - (n0[0] * marked[0] + n0[1] * marked[1])
    if r.denominator != 1:
        raise ArithmeticError("marked point is not on the line downstairs")
    z = _solve_normal_equation(n0, int(r))
    base = (marked[0] + z[0], marked[1] + z[1])  # on the lift line
    # parametrize by t = <d0, P>: lifts sit at t_base + j * |d0|^2
    t_base = d0[0] * base[0] + d0[1] * base[1]
    t1 = Fraction(_dot(d0, A1), S)
    t3 = Fraction(_dot(d0, A3), S)
    lo, hi = (t1, t3) if t1 < t3 else (t3, t1)
    dd = d0[0] * d0[0] + d0[1] * d0[1]
    j_lo = (lo - t_base) / dd
    j_hi = (hi - t_base) / dd
    if j_lo.denominator == 1 or j_hi.denominator == 1:
        raise ArithmeticError(
            "marked point collides with a corner; change MARKED_POINT_PARAMETER"
        )
    # strict interior: lo < t_base + j*dd < hi
    return max(0, math.floor(j_hi) - math.ceil(j_lo) + 1)


# ---------------------------------------------------------------------------
# Category assembly.
# ---------------------------------------------------------------------------


class SignRule:
    """The sign data for polygon contributions.

    Entry-level twists: ``mu2`` as F_2 coefficients of (1, x2, x1,
    x2x1) in the input degree parities, ``mu3`` as coefficients of
    (1, x3, x2, x1, x3x2, x3x1, x2x1, x3x2x1).  Orientation part:
    ``arc`` = (c_b, c_s, c_e) weights the parity of against-orientation
    arcs, of their start-corner degrees, and of their end-corner
    degrees.  ``star_arc`` adds a sign when a star-weighted count's
    marked arc runs against orientation.  ``pairing``, ``closed_e``,
    ``closed_x`` and the three ``point_insertion`` entries are global
    signs on those count families."""

    __slots__ = ("mu2", "mu3", "arc", "star_arc", "pairing", "closed_e",
                 "closed_x", "point_insertion", "spin_sign")

    def __init__(self, mu2=MU2_TWIST, mu3=MU3_TWIST, arc=ARC_RULE,
                 star_arc=STAR_ARC_TWIST, pairing=PAIRING_SIGN,
                 closed_e=CLOSED_E_SIGN, closed_x=CLOSED_X_SIGN,
                 point_insertion=POINT_INSERTION_SIGNS, spin_sign=1):
        self.mu2 = tuple(mu2)
        self.mu3 = tuple(mu3)
        self.arc = tuple(arc)
        self.star_arc = star_arc
        self.pairing = pairing
        self.closed_e = closed_e
        self.closed_x = closed_x
        self.point_insertion = tuple(point_insertion)
        self.spin_sign = spin_sign

    def mu2_sign(self, deg2, deg1):
        x2, x1 = deg2 % 2, deg1 % 2
        c = self.mu2
        val = c[0] + c[1] * x2 + c[2] * x1 + c[3] * x2 * x1
        return -1 if val % 2 else 1

    def mu3_sign(self, deg3, deg2, deg1):
        x3, x2, x1 = deg3 % 2, deg2 % 2, deg1 % 2
        c = self.mu3
        val = (
            c[0]
            + c[1] * x3
            + c[2] * x2
            + c[3] * x1
            + c[4] * x3 * x2
            + c[5] * x3 * x1
            + c[6] * x2 * x1
            + c[7] * x3 * x2 * x1
        )
        return -1 if val % 2 else 1

    def orientation_sign(self, arcs, starts, ends):
        """Per-polygon sign from the against-orientation arc bits and
        the degrees of the corners where each arc starts and ends."""
        c_b, c_s, c_e = self.arc
        val = (
            c_b * sum(arcs)
            + c_s * sum(b * s for b, s in zip(arcs, starts))
            + c_e * sum(b * e for b, e in zip(arcs, ends))
        )
        return -1 if val % 2 else 1

    def star_sign(self, star_backwards):
        return -1 if (self.star_arc and star_backwards) else 1


class FukayaModel:
    """A finite collection of lines with its composition tables.

    ``category`` is the assembled A-infinity category; ``lines`` maps
    object names to LagrangianLine; ``positions`` maps transverse
    generator labels to their torus positions.
    """

    def __init__(self, lines, truncation=Fraction(20), torus_area=Fraction(1),
                 sign_rule=None):
        self.lines = dict(lines)
        self.truncation = Fraction(truncation)
        self.torus_area = Fraction(torus_area)
        self.sign_rule = sign_rule or SignRule()
        self.positions = {}
        self._labels_by_pair = {}
        self._hom_bases = {}
        self.polygon_log = []
        slopes = [L.direction for L in self.lines.values()]
        if len(set(slopes)) != len(slopes):
            raise ValueError(
                "objects must have pairwise distinct slopes; repeated "
                "slopes would need local systems, which are out of scope"
            )
        for L in self.lines.values():
            if L.torus_area != self.torus_area:
                raise ValueError("all lines must share the model's torus area")
        self.category = self._build()

    # ---- naming ------------------------------------------------------

    def unit_label(self, X):
        return "%s|%s|e" % (X, X)

    def point_class_label(self, X):
        return "%s|%s|x" % (X, X)

    def point_label(self, X, Y, index):
        return "%s|%s|p%d" % (X, Y, index)

    def label_position(self, label):
        return self.positions[label]

    def labels_for_pair(self, X, Y):
        return self._labels_by_pair[(X, Y)]

    # ---- assembly ----------------------------------------------------

    def _build(self) -> AInftyCategory:
        names = sorted(self.lines)
        for X in names:
            for Y in names:
                if X == Y:
                    basis = [(self.unit_label(X), 0), (self.point_class_label(X), 1)]
                    self._labels_by_pair[(X, X)] = [l for l, _ in basis]
                    self._hom_bases[(X, X)] = basis
                    continue
                space = hom_space(self.lines[X], self.lines[Y])
                deg = space.degree
                basis = []
                for i, pos in enumerate(space.points):
                    label = self.point_label(X, Y, i)
                    self.positions[label] = pos
                    basis.append((label, deg))
                self._hom_bases[(X, Y)] = basis
                self._labels_by_pair[(X, Y)] = [l for l, _ in basis]
        cat = self._fresh_category(names)
        self.polygon_log = []
        self._log_pairings(cat, names)
        self._log_triangle_products(cat, names)
        self._log_quad_products(cat, names)
        self._log_point_insertion_products(cat, names)
        self._emit_tables(cat, self.sign_rule)
        return cat

    def _fresh_category(self, names) -> AInftyCategory:
        """Category with hom spaces, units and unit products, but no
        polygon counts yet."""
        cat = AInftyCategory(names, arity_cap=4)
        for X in names:
            for Y in names:
                cat.add_hom(X, Y, self._hom_bases[(X, Y)])
        for X in names:
            cat.set_unit(X, self.unit_label(X))
        self._add_unit_products(cat, names)
        return cat

    def rebuild_with_rule(self, sign_rule) -> AInftyCategory:
        """Reassemble the composition tables from the stored polygon log
        under a different sign rule, without re-enumerating polygons.
        Replaces and returns ``self.category``."""
        self.sign_rule = sign_rule
        names = sorted(self.lines)
        cat = self._fresh_category(names)
        self._emit_tables(cat, sign_rule)
        self.category = cat
        return cat

    def _one(self, coeff=1):
        return NovikovScalar([(0, coeff)], self.truncation)

    def _series(self, rows):
        """rows: list of (exponent, integer coefficient)."""
        return NovikovScalar(rows, self.truncation)

    def _add_unit_products(self, cat, names):
        for X in names:
            e = self.unit_label(X)
            for Y in names:
                for a in self._labels_by_pair.get((X, Y), ()):
                    cat.add_mu((a, e), a, self._one())
                for a in self._labels_by_pair.get((Y, X), ()):
                    if a == e:
                        continue
                    sign = -1 if cat.deg(a) % 2 else 1
                    cat.add_mu((e, a), a, self._one(sign))

    def _log_pairings(self, cat, names):
        """mu^2(b, a) for a: X->Y, b: Y->X at the same point lands on the
        degree-1 self-hom class; distinct points pair to zero (straight
        lines bound no embedded bigons).  The polygon is the constant one
        at the point, so it has no arcs."""
        for X in names:
            for Y in names:
                if X == Y:
                    continue
                for a in self._labels_by_pair[(X, Y)]:
                    for b in self._labels_by_pair[(Y, X)]:
                        if self.positions[a] != self.positions[b]:
                            continue
                        self.polygon_log.append({
                            "kind": "pairing",
                            "key": (b, a),
                            "out": self.point_class_label(X),
                            "degs": (cat.deg(b), cat.deg(a)),
                            "polys": [(Fraction(0), 1, (), (), (), 0, 0)],
                        })

    def _position_index(self, X, Y):
        return {
            self.positions[label]: label for label in self._labels_by_pair[(X, Y)]
        }

    @staticmethod
    def _tri_corner_degs(deg1, deg2):
        """Start and end corner degrees for the three triangle arcs, in
        line order (L0: a1 -> out, L1: a2 -> a1, L2: out -> a2)."""
        dy = (deg1 + deg2) % 2
        return (deg1, deg2, dy), (dy, deg1, deg2)

    def _log_triangle_products(self, cat, names):
        for X0 in names:
            for X1 in names:
                if X1 == X0:
                    continue
                for X2 in names:
                    if X2 == X1 or X2 == X0:
                        continue
                    index = self._position_index(X0, X2)
                    lines = (self.lines[X0], self.lines[X1], self.lines[X2])
                    for a1 in self._labels_by_pair[(X0, X1)]:
                        for a2 in self._labels_by_pair[(X1, X2)]:
                            counts, S = triangle_counts(
                                lines,
                                (self.positions[a1], self.positions[a2]),
                                self.truncation,
                                self.torus_area,
                            )
                            if not counts:
                                continue
                            degs = (cat.deg(a2), cat.deg(a1))
                            starts, ends = self._tri_corner_degs(*degs[::-1])
                            polys_by_out = {}
                            for c in counts:
                                pos = (
                                    Fraction(c.output[0], S) % 1,
                                    Fraction(c.output[1], S) % 1,
                                )
                                polys_by_out.setdefault(index[pos], []).append(
                                    (c.exponent, c.weight, c.arcs, starts, ends,
                                     0, c.spin)
                                )
                            for out_label, polys in polys_by_out.items():
                                self.polygon_log.append({
                                    "kind": "tri",
                                    "key": (a2, a1),
                                    "out": out_label,
                                    "degs": degs,
                                    "polys": polys,
                                })

    def _chain_objects(self, length):
        names = sorted(self.lines)
        chains = [[X] for X in names]
        for _ in range(length):
            chains = [
                c + [Y] for c in chains for Y in names if Y != c[-1]
            ]
        return chains

    def _log_quad_products(self, cat, names):
        for X0, X1, X2, X3 in self._chain_objects(3):
            lines = tuple(self.lines[X] for X in (X0, X1, X2, X3))
            closed = X3 == X0
            if not closed:
                index = self._position_index(X0, X3)
            for a1 in self._labels_by_pair[(X0, X1)]:
                for a2 in self._labels_by_pair[(X1, X2)]:
                    for a3 in self._labels_by_pair[(X2, X3)]:
                        degs = (cat.deg(a3), cat.deg(a2), cat.deg(a1))
                        pts = (
                            self.positions[a1],
                            self.positions[a2],
                            self.positions[a3],
                        )
                        if closed:
                            total = sum(degs)
                            if total == 1:
                                out_label = self.unit_label(X0)
                                kind, star = "closed_e", True
                            elif total == 2:
                                out_label = self.point_class_label(X0)
                                kind, star = "closed_x", False
                            else:
                                continue
                            counts, S = closed_triangle_counts(
                                lines, pts, self.truncation, self.torus_area,
                                star,
                            )
                            # arcs in line order (X0 closing, X1, X2);
                            # the X0 arc runs from the a1 corner to the
                            # a3 corner and carries the star
                            starts = (degs[2], degs[1], degs[0])
                            ends = (degs[0], degs[2], degs[1])
                            polys = []
                            for c in counts:
                                pos = (
                                    Fraction(c.output[0], S) % 1,
                                    Fraction(c.output[1], S) % 1,
                                )
                                if pos != self.positions[a3]:
                                    raise AssertionError(
                                        "closed chain output drifted"
                                    )
                                polys.append((c.exponent, c.weight, c.arcs,
                                              starts, ends,
                                              c.arcs[0] if star else 0,
                                              c.spin))
                            if polys:
                                self.polygon_log.append({
                                    "kind": kind,
                                    "key": (a3, a2, a1),
                                    "out": out_label,
                                    "degs": degs,
                                    "polys": polys,
                                })
                            continue
                        counts, S = quad_counts(
                            lines, pts, self.truncation, self.torus_area
                        )
                        if not counts:
                            continue
                        dy = (sum(degs) + 1) % 2
                        starts = (degs[2], degs[1], degs[0], dy)
                        ends = (dy, degs[2], degs[1], degs[0])
                        polys_by_out = {}
                        for c in counts:
                            pos = (
                                Fraction(c.output[0], S) % 1,
                                Fraction(c.output[1], S) % 1,
                            )
                            polys_by_out.setdefault(index[pos], []).append(
                                (c.exponent, c.weight, c.arcs, starts, ends,
                                 0, c.spin)
                            )
                        for out_label, polys in polys_by_out.items():
                            self.polygon_log.append({
                                "kind": "quad",
                                "key": (a3, a2, a1),
                                "out": out_label,
                                "degs": degs,
                                "polys": polys,
                            })

    def _log_point_insertion_products(self, cat, names):
        """mu^3 with one point-class input: triangle counts with a
        marked-point passage constraint on the side of the line whose
        point class is inserted.  Chains that close up contribute
        nothing (two straight lines bound no embedded bigon, decorated
        or not)."""
        for A in names:
            for B in names:
                if B == A:
                    continue
                for C in names:
                    if C == A or C == B:
                        continue
                    # effective transverse 2-chain A -> B -> C
                    lines = (self.lines[A], self.lines[B], self.lines[C])
                    index = self._position_index(A, C)
                    for a1 in self._labels_by_pair[(A, B)]:
                        for a2 in self._labels_by_pair[(B, C)]:
                            pts = (self.positions[a1], self.positions[a2])
                            d1, d2 = cat.deg(a1), cat.deg(a2)
                            starts, ends = self._tri_corner_degs(d1, d2)
                            for slot, key, degs, side in (
                                (0, (a2, a1, self.point_class_label(A)),
                                 (d2, d1, 1), "first"),
                                (1, (a2, self.point_class_label(B), a1),
                                 (d2, 1, d1), "middle"),
                                (2, (self.point_class_label(C), a2, a1),
                                 (1, d2, d1), "last"),
                            ):
                                counts, S = triangle_counts(
                                    lines, pts, self.truncation,
                                    self.torus_area, star_side=side,
                                )
                                if not counts:
                                    continue
                                polys_by_out = {}
                                for c in counts:
                                    pos = (
                                        Fraction(c.output[0], S) % 1,
                                        Fraction(c.output[1], S) % 1,
                                    )
                                    polys_by_out.setdefault(index[pos], []).append(
                                        (c.exponent, c.weight, c.arcs,
                                         starts, ends, c.arcs[slot], c.spin)
                                    )
                                for out_label, polys in polys_by_out.items():
                                    self.polygon_log.append({
                                        "kind": "xins",
                                        "slot": slot,
                                        "key": key,
                                        "out": out_label,
                                        "degs": degs,
                                        "polys": polys,
                                    })

    def _entry_series(self, record, rule):
        """Signed Novikov series of one log record under a sign rule."""
        kind = record["kind"]
        degs = record["degs"]
        if kind == "pairing":
            base = rule.mu2_sign(*degs) * rule.pairing
        elif kind == "tri":
            base = rule.mu2_sign(*degs)
        elif kind == "quad":
            base = rule.mu3_sign(*degs)
        elif kind == "closed_e":
            base = rule.mu3_sign(*degs) * rule.closed_e
        elif kind == "closed_x":
            base = rule.mu3_sign(*degs) * rule.closed_x
        else:  # xins
            base = rule.mu3_sign(*degs) * rule.point_insertion[record["slot"]]
        rows = []
        for exponent, weight, arcs, starts, ends, star_back, spin in record["polys"]:
            sign = base * rule.orientation_sign(arcs, starts, ends)
            if star_back:
                sign *= rule.star_sign(star_back)
            if spin:
                sign *= rule.spin_sign
            rows.append((exponent, sign * weight))
        return self._series(rows)

    def _emit_tables(self, cat, rule):
        for record in self.polygon_log:
            scalar = self._entry_series(record, rule)
            if not scalar.is_zero():
                cat.add_mu(record["key"], record["out"], scalar)

    # ---- queries -------------------------------------------------------

    def mu(self, labels):
        """The stored structure constants mu^d on a tuple of labels,
        rightmost label applied first."""
        return self.category.mu_entry(tuple(labels))

    def hf_rank_table(self):
        """Graded rank of each hom space: {(X, Y): {degree: rank}}."""
        table = {}
        for X in sorted(self.lines):
            for Y in sorted(self.lines):
                space = self.category.hom_space(X, Y)
                table[(X, Y)] = space.dims_by_degree()
        return table

    def structure_rows(self):
        """TSV-ready rows (chain, output, exponent, coefficient), sorted."""
        rows = []
        for d in sorted(self.category.mu):
            for key in sorted(self.category.mu[d]):
                for out_label in sorted(self.category.mu[d][key]):
                    scalar = self.category.mu[d][key][out_label]
                    for expo, coeff in scalar.terms:
                        rows.append(
                            (
                                " ".join(key),
                                out_label,
                                "%d/%d" % (expo.numerator, expo.denominator),
                                "%d/%d" % (coeff.numerator, coeff.denominator),
                            )
                        )
        return rows

    def structure_tsv(self) -> str:
        lines = ["chain\toutput\texponent\tcoefficient"]
        for row in self.structure_rows():
            lines.append("\t".join(row))
        return "\n".join(lines) + "\n"


def section_line(torus_area=Fraction(1)) -> LagrangianLine:
    return LagrangianLine((1, 0), 0, 0, 1, torus_area)


def fibre_line(torus_area=Fraction(1)) -> LagrangianLine:
    return LagrangianLine((0, 1), 0, -1, 1, torus_area)


def twisted_section(a: int, torus_area=Fraction(1)) -> LagrangianLine:
    """The a-fold fibre-twist of the section: slope a through the origin."""
    return iterated_twist(section_line(torus_area), "fibre", a)


def build_gamma_category(
    max_twist: int,
    truncation=Fraction(10),
    torus_area=Fraction(1),
    sign_rule=None,
) -> FukayaModel:
    """The model on {fibre, section, twisted sections up to max_twist}."""
    if max_twist < 2:
        raise ValueError("need max_twist >= 2 for an interesting model")
    lines = {"Lf": fibre_line(torus_area)}
    for a in range(max_twist + 1):
        lines["t%d" % a] = twisted_section(a, torus_area)
    return FukayaModel(lines, truncation, torus_area, sign_rule)


def build_two_line_model(
    truncation=Fraction(20), torus_area=Fraction(1), sign_rule=None
) -> FukayaModel:
    """Just the section and the fibre: the smallest mirror-relevant model."""
    lines = {"Ls": section_line(torus_area), "Lf": fibre_line(torus_area)}
    return FukayaModel(lines, truncation, torus_area, sign_rule)
