"""Graded vector spaces over the truncated Novikov field, sparse
multilinear maps, and exact valuation-aware linear algebra.

Ranks and cohomology are computed by Gaussian elimination with pivots
chosen by minimal valuation (lexicographic position for ties).  Column
entries are cleared leading term by leading term, so the only products
ever formed are (series) x (monomial); those are exact below the
truncation bound.  A rank decision is "certified" when no entry that was
treated as zero carried the truncated flag; otherwise the answer is the
rank of the known jet and the caller may re-run at a larger bound.
"""

from __future__ import annotations

from fractions import Fraction

from .novikov import DEFAULT_TRUNCATION, NovikovScalar


class PrecisionError(ArithmeticError):
    """A rank or pivot decision depended on terms at or beyond the
    truncation bound.  Recompute with a larger truncation."""


class GradedSpace:
    """Ordered basis of (label, integer degree) pairs with unique labels."""

    __slots__ = ("basis", "_degree", "_index")

    def __init__(self, basis):
        basis = tuple((label, int(degree)) for label, degree in basis)
        self.basis = basis
        self._degree = {}
        self._index = {}
        for i, (label, degree) in enumerate(basis):
            if label in self._degree:
                raise ValueError("duplicate basis label %r" % (label,))
            self._degree[label] = degree
            self._index[label] = i

    @property
    def dim(self) -> int:
        return len(self.basis)

    def labels(self) -> tuple:
        return tuple(label for label, _ in self.basis)

    def degree(self, label) -> int:
        return self._degree[label]

    def index(self, label) -> int:
        return self._index[label]

    def degrees(self) -> list:
        return sorted({degree for _, degree in self.basis})

    def in_degree(self, r: int) -> list:
        return [label for label, degree in self.basis if degree == r]

    def dims_by_degree(self) -> dict:
        out: dict[int, int] = {}
        for _, degree in self.basis:
            out[degree] = out.get(degree, 0) + 1
        return out

    def __contains__(self, label) -> bool:
        return label in self._degree

    def __eq__(self, other):
        if not isinstance(other, GradedSpace):
            return NotImplemented
        return self.basis == other.basis

    def __hash__(self):
        return hash(self.basis)

    def __repr__(self):
        return "GradedSpace(dim=%d, degrees=%s)" % (self.dim, self.degrees())


class GradedTensor:
    """Sparse multilinear map of fixed degree.

    ``entries`` maps a tuple of input labels (parallel to ``inputs``) to a
    dict {output label: scalar}.  Every stored entry satisfies
    deg(out) = sum(deg(in_i)) + self.degree, and scalars that are zero in
    their known terms are never stored.
    """

    __slots__ = ("inputs", "output", "degree", "entries")

    def __init__(self, inputs, output, degree, entries=None):
        self.inputs = tuple(inputs)
        if not self.inputs:
            raise ValueError("a tensor needs arity >= 1")
        self.output = output
        self.degree = int(degree)
        self.entries: dict = {}
        if entries:
            for key, outs in entries.items():
                for out_label, scalar in outs.items():
                    self.add(key, out_label, scalar)

    @property
    def arity(self) -> int:
        return len(self.inputs)

    def _in_degree_sum(self, key) -> int:
        if len(key) != len(self.inputs):
            raise ValueError("key length %d, arity %d" % (len(key), len(self.inputs)))
        total = 0
        for space, label in zip(self.inputs, key):
            total += space.degree(label)
        return total

    def add(self, key, out_label, scalar: NovikovScalar):
        """Accumulate scalar into the (key, out_label) slot."""
        key = tuple(key)
        expected = self._in_degree_sum(key) + self.degree
        if self.output.degree(out_label) != expected:
            raise ValueError(
                "degree mismatch: |%s| = %d, inputs + tensor degree give %d"
                % (out_label, self.output.degree(out_label), expected)
            )
        slot = self.entries.get(key)
        if slot is None:
            slot = {}
            self.entries[key] = slot
        prev = slot.get(out_label)
        total = scalar if prev is None else prev + scalar
        if total.is_zero():
            slot.pop(out_label, None)
            if not slot:
                del self.entries[key]
        else:
            slot[out_label] = total

    def get(self, key) -> dict:
        return self.entries.get(tuple(key), {})

    def scalar(self, key, out_label) -> NovikovScalar:
        slot = self.entries.get(tuple(key))
        if slot is None or out_label not in slot:
            return NovikovScalar.zero()
        return slot[out_label]

    def is_zero(self) -> bool:
        return not self.entries

    def apply(self, vector: dict) -> dict:
        """Apply an arity-1 tensor to {label: scalar}; returns the image."""
        if self.arity != 1:
            raise ValueError("apply is only defined for arity-1 tensors")
        out: dict = {}
        for label, coeff in vector.items():
            for out_label, scalar in self.entries.get((label,), {}).items():
                term = scalar * coeff
                prev = out.get(out_label)
                total = term if prev is None else prev + term
                if total.is_zero():
                    out.pop(out_label, None)
                else:
                    out[out_label] = total
        return out

    def to_json_obj(self) -> list:
        """Sparse triplet dump: [input labels..., output label, scalar]."""
        rows = []
        for key in sorted(self.entries, key=repr):
            for out_label in sorted(self.entries[key], key=repr):
                rows.append(
                    [list(key), out_label, self.entries[key][out_label].to_json_obj()]
                )
        return rows

    def __repr__(self):
        return "GradedTensor(arity=%d, degree=%d, entries=%d)" % (
            self.arity,
            self.degree,
            len(self.entries),
        )


def identity_tensor(space: GradedSpace) -> GradedTensor:
    t = GradedTensor((space,), space, 0)
    for label, _ in space.basis:
        t.add((label,), label, NovikovScalar.one())
    return t


def compose(outer: GradedTensor, inner: GradedTensor, slot: int) -> GradedTensor:
    """Substitute ``inner`` into input ``slot`` of ``outer``.  No sign is
    applied; relation checkers own all Koszul signs."""
    if not 0 <= slot < outer.arity:
        raise ValueError("slot %d out of range for arity %d" % (slot, outer.arity))
    if inner.output != outer.inputs[slot]:
        raise ValueError("inner output space does not match outer input slot")
    inputs = outer.inputs[:slot] + inner.inputs + outer.inputs[slot + 1 :]
    result = GradedTensor(inputs, outer.output, outer.degree + inner.degree)
    by_slot_label: dict = {}
    for okey, outs in outer.entries.items():
        by_slot_label.setdefault(okey[slot], []).append((okey, outs))
    for ikey, iouts in inner.entries.items():
        for mid_label, c_in in iouts.items():
            for okey, outs in by_slot_label.get(mid_label, ()):
                key = okey[:slot] + ikey + okey[slot + 1 :]
                for out_label, c_out in outs.items():
                    result.add(key, out_label, c_out * c_in)
    return result


# ---------------------------------------------------------------------------
# Elimination.  Matrices are dicts {(row_index, col_index): scalar}; the
# same leading-term clearing runs on a dense list-of-lists grid for small
# shapes and on nested dicts above that.
# ---------------------------------------------------------------------------

DENSE_LIMIT = 64


class EliminationResult:
    __slots__ = ("rank", "certified", "pivots")

    def __init__(self, rank: int, certified: bool, pivots: list):
        self.rank = rank
        self.certified = certified
        self.pivots = pivots

    def __repr__(self):
        return "EliminationResult(rank=%d, certified=%s)" % (self.rank, self.certified)


def _clear_column_entry(row, pivot_row, col, active_cols, certified):
    """Subtract monomial multiples of pivot_row from row until row[col]
    has no known terms.  Returns the updated certified flag."""
    pivot = pivot_row[col]
    pv, pc = pivot.terms[0]
    while True:
        entry = row.get(col)
        if entry is None or entry.is_zero():
            if entry is not None and entry.truncated:
                certified = False
            row.pop(col, None)
            break
        ev, ec = entry.terms[0]
        factor = NovikovScalar.monomial(ev - pv, -ec / pc, entry.truncation)
        for j in active_cols:
            pj = pivot_row.get(j)
            if pj is None:
                continue
            term = pj * factor
            prev = row.get(j)
            total = term if prev is None else prev + term
            if total.is_zero() and not total.truncated:
                row.pop(j, None)
            else:
                row[j] = total
    return certified


def _eliminate_rows(rows: dict, active_cols: set) -> EliminationResult:
    """Shared elimination loop on {row_index: {col_index: scalar}}."""
    certified = True
    pivots = []
    active_rows = set(rows)
    while True:
        # Drop entries already zero in their known terms, noting flags.
        best = None
        for i in sorted(active_rows):
            row = rows[i]
            for j in sorted(row):
                if j not in active_cols:
                    continue
                s = row[j]
                if s.is_zero():
                    if s.truncated:
                        certified = False
                    del row[j]
                    continue
                cand = (s.valuation(), i, j)
                if best is None or cand < best:
                    best = cand
        if best is None:
            break
        _, pi, pj = best
        pivots.append((pi, pj))
        active_rows.discard(pi)
        active_cols.discard(pj)
        pivot_row = rows[pi]
        for i in list(active_rows):
            if pj in rows[i]:
                certified = _clear_column_entry(
                    rows[i], pivot_row, pj, active_cols | {pj}, certified
                )
    return EliminationResult(len(pivots), certified, pivots)


def matrix_rank(
    entries: dict,
    nrows: int,
    ncols: int,
    require_certified: bool = False,
) -> EliminationResult:
    """Rank of {(i, j): scalar} by min-valuation full pivoting.

    With ``require_certified`` a flagged-zero ambiguity raises
    PrecisionError instead of returning an uncertified answer.
    """
    rows: dict = {}
    certified_input = True
    for (i, j), s in entries.items():
        if not 0 <= i < nrows or not 0 <= j < ncols:
            raise ValueError("entry (%d, %d) outside %dx%d" % (i, j, nrows, ncols))
        if s.is_zero():
            if s.truncated:
                certified_input = False
            continue
        rows.setdefault(i, {})[j] = s
    if max(nrows, ncols) <= DENSE_LIMIT:
        result = _eliminate_dense(rows, nrows, ncols)
    else:
        result = _eliminate_rows(rows, set(range(ncols)))
    if not certified_input:
        result = EliminationResult(result.rank, False, result.pivots)
    if require_certified and not result.certified:
        raise PrecisionError(
            "rank decision hit entries known only beyond the truncation "
            "bound; recompute with a larger truncation"
        )
    return result


def _eliminate_dense(rows: dict, nrows: int, ncols: int) -> EliminationResult:
    """Same algorithm on a dense grid; worthwhile for the small matrices
    that dominate the structure-constant checks."""
    grid = [[None] * ncols for _ in range(nrows)]
    for i, row in rows.items():
        for j, s in row.items():
            grid[i][j] = s
    certified = True
    pivots = []
    active_rows = list(range(nrows))
    active_cols = list(range(ncols))
    while True:
        best = None
        for i in active_rows:
            for j in active_cols:
                s = grid[i][j]
                if s is None:
                    continue
                if s.is_zero():
                    if s.truncated:
                        certified = False
                    grid[i][j] = None
                    continue
                cand = (s.valuation(), i, j)
                if best is None or cand < best:
                    best = cand
        if best is None:
            break
        _, pi, pj = best
        pivots.append((pi, pj))
        active_rows.remove(pi)
        active_cols.remove(pj)
        pivot = grid[pi][pj]
        pv, pc = pivot.terms[0]
        for i in active_rows:
            while grid[i][pj] is not None and not grid[i][pj].is_zero():
                ev, ec = grid[i][pj].terms[0]
                factor = NovikovScalar.monomial(
                    ev - pv, -ec / pc, grid[i][pj].truncation
                )
                for j in active_cols + [pj]:
                    pval = grid[pi][j]
                    if pval is None:
                        continue
                    term = pval * factor
                    prev = grid[i][j]
                    total = term if prev is None else prev + term
                    if total.is_zero() and not total.truncated:
                        grid[i][j] = None
                    else:
                        grid[i][j] = total
            if grid[i][pj] is not None:
                if grid[i][pj].truncated:
                    certified = False
                grid[i][pj] = None
    return EliminationResult(len(pivots), certified, pivots)


def tensor_rank(
    t: GradedTensor, require_certified: bool = False
) -> EliminationResult:
    """Rank of an arity-1 tensor over the whole graded basis."""
    if t.arity != 1:
        raise ValueError("rank is only defined for arity-1 tensors")
    space_in, space_out = t.inputs[0], t.output
    entries = {}
    for (label,), outs in t.entries.items():
        j = space_in.index(label)
        for out_label, s in outs.items():
            entries[(space_out.index(out_label), j)] = s
    return matrix_rank(entries, space_out.dim, space_in.dim, require_certified)


# ---------------------------------------------------------------------------
# Solving and kernels.  These need honest division by pivots, so the
# results can carry truncation flags; systems in this package are small.
# ---------------------------------------------------------------------------


def _zero(truncation) -> NovikovScalar:
    return NovikovScalar((), truncation)


def solve(entries: dict, nrows: int, ncols: int, rhs: dict, truncation=None):
    """One solution x of A x = b, as {col: scalar}, or None if inconsistent.

    ``entries`` is {(i, j): scalar}, ``rhs`` is {i: scalar}.  Consistency
    is judged on known terms.
    """
    if truncation is None:
        truncation = DEFAULT_TRUNCATION
    rows = {}
    for (i, j), s in entries.items():
        if not s.is_zero():
            rows.setdefault(i, {})[j] = s
    vec = {i: s for i, s in rhs.items() if not s.is_zero()}
    assignments = []  # (pivot col, pivot row, rhs, inverse) in pivot order
    active_cols = set(range(ncols))
    while True:
        best = None
        for i, row in rows.items():
            for j, s in row.items():
                if j in active_cols and not s.is_zero():
                    cand = (s.valuation(), i, j)
                    if best is None or cand < best:
                        best = cand
        if best is None:
            break
        _, pi, pj = best
        pivot_row = rows.pop(pi)
        pivot_rhs = vec.pop(pi, _zero(truncation))
        pivot = pivot_row[pj]
        inv = pivot.inv()
        active_cols.discard(pj)
        for i in list(rows):
            row = rows[i]
            coeff = row.get(pj)
            if coeff is None or coeff.is_zero():
                continue
            factor = coeff * inv
            for j, s in pivot_row.items():
                upd = row.get(j, _zero(truncation)) - factor * s
                if upd.is_zero() and not upd.truncated:
                    row.pop(j, None)
                else:
                    row[j] = upd
            upd = vec.get(i, _zero(truncation)) - factor * pivot_rhs
            if upd.is_zero() and not upd.truncated:
                vec.pop(i, None)
            else:
                vec[i] = upd
        assignments.append((pj, pivot_row, pivot_rhs, inv))
    if any(not s.is_zero() for s in vec.values()):
        return None
    # A pivot row can only mention columns pivoted later, so substitute in
    # reverse pivot order; unpivoted columns stay at zero.
    x = {}
    for pj, pivot_row, pivot_rhs, inv in reversed(assignments):
        acc = pivot_rhs
        for j, s in pivot_row.items():
            if j == pj or j not in x:
                continue
            acc = acc - s * x[j]
        val = acc * inv
        if not val.is_zero():
            x[pj] = val
    return x


def kernel_basis(entries: dict, nrows: int, ncols: int, truncation=None) -> list:
    """Basis of ker A as a list of {col: scalar} vectors (free-column
    parametrization of the reduced echelon form)."""
    if truncation is None:
        truncation = DEFAULT_TRUNCATION
    rows = {}
    for (i, j), s in entries.items():
        if not s.is_zero():
            rows.setdefault(i, {})[j] = s
    # Reduce to echelon form with recorded pivot columns.
    pivot_rows = []  # (pivot col, {col: scalar} with pivot coefficient 1)
    active = dict(rows)
    while True:
        best = None
        for i, row in active.items():
            for j, s in row.items():
                if not s.is_zero():
                    cand = (s.valuation(), i, j)
                    if best is None or cand < best:
                        best = cand
        if best is None:
            break
        _, pi, pj = best
        row = active.pop(pi)
        inv = row[pj].inv()
        norm = {}
        for j, s in row.items():
            v = s * inv
            if not v.is_zero():
                norm[j] = v
        pivot_rows.append((pj, norm))
        for i in list(active):
            coeff = active[i].get(pj)
            if coeff is None or coeff.is_zero():
                continue
            upd_row = active[i]
            for j, s in norm.items():
                upd = upd_row.get(j, _zero(truncation)) - coeff * s
                if upd.is_zero() and not upd.truncated:
                    upd_row.pop(j, None)
                else:
                    upd_row[j] = upd
            if not upd_row:
                del active[i]
    # Back-substitute so each pivot row involves no other pivot column.
    for idx in range(len(pivot_rows) - 1, -1, -1):
        pj, norm = pivot_rows[idx]
        for k in range(idx):
            qj, other = pivot_rows[k]
            coeff = other.get(pj)
            if coeff is None or coeff.is_zero():
                continue
            for j, s in norm.items():
                upd = other.get(j, _zero(truncation)) - coeff * s
                if upd.is_zero() and not upd.truncated:
                    other.pop(j, None)
                else:
                    other[j] = upd
    pivot_cols = {pj for pj, _ in pivot_rows}
    basis = []
    one = NovikovScalar.one(truncation)
    for free in range(ncols):
        if free in pivot_cols:
            continue
        vec = {free: one}
        for pj, norm in pivot_rows:
            coeff = norm.get(free)
            if coeff is not None and not coeff.is_zero():
                vec[pj] = -coeff
        basis.append(vec)
    return basis


# ---------------------------------------------------------------------------
# Chain complexes.
# ---------------------------------------------------------------------------


class CohomologyResult:
    __slots__ = ("ranks", "certified", "dims")

    def __init__(self, ranks: dict, certified: bool, dims: dict):
        self.ranks = ranks
        self.certified = certified
        self.dims = dims

    def euler_characteristic(self) -> int:
        return sum((-1) ** (r % 2) * k for r, k in self.ranks.items())

    def __repr__(self):
        return "CohomologyResult(ranks=%s, certified=%s)" % (
            self.ranks,
            self.certified,
        )


class ChainComplex:
    """A graded space with a degree +1 square-zero differential."""

    def __init__(self, space: GradedSpace, differential: GradedTensor):
        if differential.arity != 1:
            raise ValueError("differential must have arity 1")
        if differential.degree != 1:
            raise ValueError("differential must have degree +1")
        if differential.inputs[0] != space or differential.output != space:
            raise ValueError("differential must act on the complex's space")
        self.space = space
        self.differential = differential

    def validate_d2(self):
        """Check d(d(x)) has no known terms for every basis x."""
        square = compose(self.differential, self.differential, 0)
        for key, outs in square.entries.items():
            for out_label, s in outs.items():
                if not s.is_zero():
                    raise ValueError(
                        "differential does not square to zero: d²(%s) has "
                        "component %s = %r" % (key[0], out_label, s)
                    )

    def _degree_matrix(self, r: int):
        cols = self.space.in_degree(r)
        rows = self.space.in_degree(r + 1)
        row_index = {label: i for i, label in enumerate(rows)}
        entries = {}
        for j, label in enumerate(cols):
            for out_label, s in self.differential.entries.get((label,), {}).items():
                entries[(row_index[out_label], j)] = s
        return entries, len(rows), len(cols)

    def cohomology(self, require_certified: bool = False) -> CohomologyResult:
        """Rank of H^r = ker d^r / im d^(r-1) for every populated degree."""
        self.validate_d2()
        dims = self.space.dims_by_degree()
        rank_d = {}
        certified = True
        for r in dims:
            entries, nrows, ncols = self._degree_matrix(r)
            res = matrix_rank(entries, nrows, ncols)
            rank_d[r] = res.rank
            certified = certified and res.certified
        ranks = {}
        for r, dim in dims.items():
            ranks[r] = dim - rank_d.get(r, 0) - rank_d.get(r - 1, 0)
        if require_certified and not certified:
            raise PrecisionError(
                "cohomology ranks depended on truncated entries; recompute "
                "with a larger truncation"
            )
        return CohomologyResult(ranks, certified, dims)
