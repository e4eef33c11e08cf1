"""Exact dense linear algebra over GF(q).

Matrices are immutable values storing their entries as canonical integer
encodings; all arithmetic goes through the field's precomputed tables.
For GF(2) the elimination and multiplication kernels transparently switch
to a bit-packed row representation; the packed kernels are differential
tested against the generic ones and must return bit-identical results.

Distances are exact: ``rank_distance`` returns a ``RankDistance`` holding
the raw (rank, ambient) pair, compared by cross-multiplication. Subspaces
are kept in reduced echelon form, the unique canonical representative of
their span, so subspace equality is a plain tuple comparison.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import (
    DimensionMismatch,
    FormatError,
    RelationsNotSatisfied,
    Singular,
    SpecMismatch,
)
from .gf import FieldElement, FieldSpec, field_for_order

# Tests flip this to force the generic kernels for differential checks.
_FORCE_GENERIC = False


def _use_packed(spec: FieldSpec) -> bool:
    return spec.q == 2 and not _FORCE_GENERIC


# ---------------------------------------------------------------------------
# GF(2) bit-packed kernels: a row is an int, bit j = column j.

def _b_pack(entries, rows, cols):
    out = []
    for i in range(rows):
        acc = 0
        base = i * cols
        for j in range(cols):
            if entries[base + j]:
                acc |= 1 << j
        out.append(acc)
    return out


def _b_unpack(rowints, cols):
    out = []
    for r in rowints:
        for j in range(cols):
            out.append((r >> j) & 1)
    return out


def _b_mul(arows, brows):
    out = []
    for a in arows:
        acc = 0
        while a:
            lsb = a & -a
            acc ^= brows[lsb.bit_length() - 1]
            a ^= lsb
        out.append(acc)
    return out


def _b_rref(rowints, ncols):
    rows = list(rowints)
    pivots = []
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        if r == nrows:
            break
        bit = 1 << c
        piv = -1
        for i in range(r, nrows):
            if rows[i] & bit:
                piv = i
                break
        if piv < 0:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        prow = rows[r]
        for i in range(nrows):
            if i != r and rows[i] & bit:
                rows[i] ^= prow
        pivots.append(c)
        r += 1
    return pivots, rows[:r]


# ---------------------------------------------------------------------------
# Generic kernels: a row is a list of int encodings.

def _g_rows(entries, rows, cols):
    return [list(entries[i * cols:(i + 1) * cols]) for i in range(rows)]


def _g_mul(arows, brows, spec, out_cols):
    q = spec.q
    add = spec._add
    mul = spec._mul
    out = []
    for arow in arows:
        acc = [0] * out_cols
        for k, s in enumerate(arow):
            if s:
                brow = brows[k]
                sm = mul[s * q:(s + 1) * q]
                acc = [add[x * q + sm[y]] for x, y in zip(acc, brow)]
        out.append(acc)
    return out


def _g_rref(rowlists, ncols, spec):
    rows = [list(r) for r in rowlists]
    q = spec.q
    add = spec._add
    mul = spec._mul
    neg = spec._neg
    inv = spec._inv
    pivots = []
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        if r == nrows:
            break
        piv = -1
        for i in range(r, nrows):
            if rows[i][c]:
                piv = i
                break
        if piv < 0:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        lead = rows[r][c]
        if lead != 1:
            s = inv[lead]
            sm = mul[s * q:(s + 1) * q]
            rows[r] = [sm[v] for v in rows[r]]
        prow = rows[r]
        for i in range(nrows):
            if i != r and rows[i][c]:
                f = neg[rows[i][c]]
                fm = mul[f * q:(f + 1) * q]
                rows[i] = [add[x * q + fm[y]] for x, y in zip(rows[i], prow)]
        pivots.append(c)
        r += 1
    return pivots, rows[:r]


def _rref_vectors(vectors, ncols, spec):
    """Canonical reduced echelon basis of the span of the given vectors."""
    if not vectors:
        return []
    if _use_packed(spec):
        packed = []
        for v in vectors:
            acc = 0
            for j, e in enumerate(v):
                if e:
                    acc |= 1 << j
            packed.append(acc)
        _, rows = _b_rref(packed, ncols)
        return [tuple((r >> j) & 1 for j in range(ncols)) for r in rows]
    _, rows = _g_rref(vectors, ncols, spec)
    return [tuple(r) for r in rows]


# ---------------------------------------------------------------------------


class RankDistance:
    """Exact normalized-rank distance: numerator/denominator, never floats.

    Stored raw (rank over ambient dimension); comparisons cross-multiply,
    so distances over different ambients compare correctly.
    """

    __slots__ = ("numerator", "denominator")

    def __init__(self, numerator: int, denominator: int):
        if denominator <= 0 or not 0 <= numerator <= denominator:
            raise FormatError(f"bad rank distance {numerator}/{denominator}")
        self.numerator = numerator
        self.denominator = denominator

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def reduced(self) -> "RankDistance":
        f = self.as_fraction()
        return RankDistance(f.numerator, f.denominator)

    @staticmethod
    def _other(value) -> Fraction:
        if isinstance(value, RankDistance):
            return value.as_fraction()
        if isinstance(value, (int, Fraction)):
            return Fraction(value)
        return NotImplemented

    def __eq__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self.as_fraction() == o

    def __lt__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self.as_fraction() < o

    def __le__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self.as_fraction() <= o

    def __gt__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self.as_fraction() > o

    def __ge__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else self.as_fraction() >= o

    def __hash__(self):
        return hash(self.as_fraction())

    def __str__(self):
        return f"{self.numerator}/{self.denominator}"

    def __repr__(self):
        return f"RankDistance({self.numerator}, {self.denominator})"


class Matrix:
    """A dense exact matrix over a fixed ``FieldSpec``. Immutable."""

    __slots__ = ("spec", "rows", "cols", "_e")

    def __init__(self, spec: FieldSpec, rows: int, cols: int, entries):
        if rows < 0 or cols < 0:
            raise DimensionMismatch("negative dimensions")
        vals = []
        for e in entries:
            if isinstance(e, FieldElement):
                if e.spec != spec:
                    raise SpecMismatch("entry from a different field")
                vals.append(e.val)
            else:
                vals.append(int(e) % spec.q)
        if len(vals) != rows * cols:
            raise DimensionMismatch(
                f"expected {rows * cols} entries, got {len(vals)}"
            )
        self.spec = spec
        self.rows = rows
        self.cols = cols
        self._e = tuple(vals)

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, spec: FieldSpec, rows: int, cols: int | None = None) -> "Matrix":
        cols = rows if cols is None else cols
        return cls(spec, rows, cols, [0] * (rows * cols))

    @classmethod
    def identity(cls, spec: FieldSpec, n: int) -> "Matrix":
        e = [0] * (n * n)
        for i in range(n):
            e[i * n + i] = 1
        return cls(spec, n, n, e)

    @classmethod
    def unit(cls, spec: FieldSpec, n: int, i: int, j: int) -> "Matrix":
        """The matrix unit e_{ij} (1-based indices)."""
        e = [0] * (n * n)
        e[(i - 1) * n + (j - 1)] = 1
        return cls(spec, n, n, e)

    @classmethod
    def scalar(cls, spec: FieldSpec, n: int, value) -> "Matrix":
        v = spec.element(value).val
        e = [0] * (n * n)
        for i in range(n):
            e[i * n + i] = v
        return cls(spec, n, n, e)

    @classmethod
    def from_columns(cls, spec: FieldSpec, columns, nrows: int) -> "Matrix":
        cols = [list(c) for c in columns]
        e = [0] * (nrows * len(cols))
        for j, col in enumerate(cols):
            if len(col) != nrows:
                raise DimensionMismatch("column of wrong height")
            for i, v in enumerate(col):
                e[i * len(cols) + j] = v
        return cls(spec, nrows, len(cols), e)

    # -- access ---------------------------------------------------------

    def at(self, i: int, j: int) -> FieldElement:
        return FieldElement(self.spec, self._e[i * self.cols + j])

    @property
    def entries(self) -> tuple[FieldElement, ...]:
        return tuple(FieldElement(self.spec, v) for v in self._e)

    def row_lists(self):
        return _g_rows(self._e, self.rows, self.cols)

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(self._e[i * self.cols + j] for i in range(self.rows))

    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_zero(self) -> bool:
        return not any(self._e)

    # -- arithmetic -----------------------------------------------------

    def _check_same_shape(self, other: "Matrix"):
        if self.spec != other.spec:
            raise SpecMismatch("matrices over different fields")
        if self.rows != other.rows or self.cols != other.cols:
            raise DimensionMismatch(
                f"{self.rows}x{self.cols} vs {other.rows}x{other.cols}"
            )

    def __add__(self, other: "Matrix") -> "Matrix":
        self._check_same_shape(other)
        add = self.spec._add
        q = self.spec.q
        return Matrix(
            self.spec, self.rows, self.cols,
            [add[a * q + b] for a, b in zip(self._e, other._e)],
        )

    def __sub__(self, other: "Matrix") -> "Matrix":
        self._check_same_shape(other)
        add = self.spec._add
        neg = self.spec._neg
        q = self.spec.q
        return Matrix(
            self.spec, self.rows, self.cols,
            [add[a * q + neg[b]] for a, b in zip(self._e, other._e)],
        )

    def __neg__(self) -> "Matrix":
        neg = self.spec._neg
        return Matrix(self.spec, self.rows, self.cols, [neg[a] for a in self._e])

    def scale(self, value) -> "Matrix":
        s = self.spec.element(value).val
        q = self.spec.q
        sm = self.spec._mul[s * q:(s + 1) * q]
        return Matrix(self.spec, self.rows, self.cols, [sm[a] for a in self._e])

    def __mul__(self, other: "Matrix") -> "Matrix":
        if not isinstance(other, Matrix):
            return NotImplemented
        if self.spec != other.spec:
            raise SpecMismatch("matrices over different fields")
        if self.cols != other.rows:
            raise DimensionMismatch(
                f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}"
            )
        if _use_packed(self.spec):
            arows = _b_pack(self._e, self.rows, self.cols)
            brows = _b_pack(other._e, other.rows, other.cols)
            crows = _b_mul(arows, brows)
            return Matrix(self.spec, self.rows, other.cols,
                          _b_unpack(crows, other.cols))
        arows = self.row_lists()
        brows = other.row_lists()
        crows = _g_mul(arows, brows, self.spec, other.cols)
        return Matrix(self.spec, self.rows, other.cols,
                      [v for row in crows for v in row])

    def __pow__(self, e: int) -> "Matrix":
        if not self.is_square():
            raise DimensionMismatch("powers need a square matrix")
        if e < 0:
            return invert(self) ** (-e)
        out = Matrix.identity(self.spec, self.rows)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base if e > 1 else base
            e >>= 1
        return out

    def transpose(self) -> "Matrix":
        e = self._e
        c = self.cols
        return Matrix(
            self.spec, self.cols, self.rows,
            [e[i * c + j] for j in range(c) for i in range(self.rows)],
        )

    def apply_to_vector(self, vec) -> tuple[int, ...]:
        """Matrix-vector product on raw int encodings."""
        if len(vec) != self.cols:
            raise DimensionMismatch("vector of wrong length")
        q = self.spec.q
        add = self.spec._add
        mul = self.spec._mul
        out = []
        e = self._e
        c = self.cols
        for i in range(self.rows):
            acc = 0
            base = i * c
            for j, v in enumerate(vec):
                if v:
                    acc = add[acc * q + mul[e[base + j] * q + v]]
            out.append(acc)
        return tuple(out)

    def __eq__(self, other):
        return (
            isinstance(other, Matrix)
            and self.spec == other.spec
            and self.rows == other.rows
            and self.cols == other.cols
            and self._e == other._e
        )

    def __hash__(self):
        return hash((self.spec, self.rows, self.cols, self._e))

    def __repr__(self):
        return f"Matrix({self.spec!r}, {self.rows}x{self.cols})"

    def __str__(self):
        return "\n".join(
            " ".join(str(self._e[i * self.cols + j]) for j in range(self.cols))
            for i in range(self.rows)
        )


class Subspace:
    """A subspace of F_q^n held as its canonical reduced echelon basis.

    The basis vectors have strictly increasing pivot positions and each
    pivot column is cleared elsewhere, so two subspaces are equal exactly
    when their stored tuples are equal.
    """

    __slots__ = ("spec", "ambient_dim", "basis")

    def __init__(self, spec: FieldSpec, ambient_dim: int, vectors):
        self.spec = spec
        self.ambient_dim = ambient_dim
        vecs = [list(v) for v in vectors]
        for v in vecs:
            if len(v) != ambient_dim:
                raise DimensionMismatch("vector of wrong length")
        self.basis = tuple(_rref_vectors(vecs, ambient_dim, spec))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def contains(self, vec) -> bool:
        probe = Subspace(self.spec, self.ambient_dim, list(self.basis) + [list(vec)])
        return probe.dim == self.dim

    def basis_matrix(self) -> Matrix:
        """Basis vectors as the columns of an ambient_dim x dim matrix."""
        return Matrix.from_columns(self.spec, self.basis, self.ambient_dim)

    def __eq__(self, other):
        return (
            isinstance(other, Subspace)
            and self.spec == other.spec
            and self.ambient_dim == other.ambient_dim
            and self.basis == other.basis
        )

    def __hash__(self):
        return hash((self.spec, self.ambient_dim, self.basis))

    def __repr__(self):
        return f"Subspace(dim {self.dim} of F^{self.ambient_dim})"


# ---------------------------------------------------------------------------
# rank / distance


def _matrix_rref(m: Matrix):
    if _use_packed(m.spec):
        packed = _b_pack(m._e, m.rows, m.cols)
        pivots, rows = _b_rref(packed, m.cols)
        return pivots, [[(r >> j) & 1 for j in range(m.cols)] for r in rows]
    return _g_rref(m.row_lists(), m.cols, m.spec)


def rank(m: Matrix) -> int:
    """Exact rank by Gaussian elimination with first-nonzero pivots."""
    pivots, _ = _matrix_rref(m)
    return len(pivots)


def rank_distance(x: Matrix, y: Matrix) -> RankDistance:
    """Normalized rank distance rank(x - y) / n on square matrices."""
    if x.spec != y.spec:
        raise SpecMismatch("matrices over different fields")
    if not (x.is_square() and y.is_square() and x.rows == y.rows):
        raise DimensionMismatch("rank distance needs equal square matrices")
    return RankDistance(rank(x - y), x.rows)


def normalized_rank(x: Matrix) -> RankDistance:
    if not x.is_square():
        raise DimensionMismatch("normalized rank needs a square matrix")
    return RankDistance(rank(x), x.rows)


# ---------------------------------------------------------------------------
# structure builders


def kron(x: Matrix, y: Matrix) -> Matrix:
    """Kronecker product; rank is multiplicative."""
    if x.spec != y.spec:
        raise SpecMismatch("matrices over different fields")
    q = x.spec.q
    mul = x.spec._mul
    R, C = x.rows * y.rows, x.cols * y.cols
    out = [0] * (R * C)
    xe, ye = x._e, y._e
    for i1 in range(x.rows):
        for j1 in range(x.cols):
            a = xe[i1 * x.cols + j1]
            if not a:
                continue
            am = mul[a * q:(a + 1) * q]
            for i2 in range(y.rows):
                ib = (i1 * y.rows + i2) * C + j1 * y.cols
                yb = i2 * y.cols
                for j2 in range(y.cols):
                    out[ib + j2] = am[ye[yb + j2]]
    return Matrix(x.spec, R, C, out)


def direct_sum(blocks, pad_zeros: int = 0) -> Matrix:
    """Block-diagonal sum of square blocks plus a trailing zero block."""
    blocks = list(blocks)
    if not blocks:
        raise DimensionMismatch("need at least one block")
    spec = blocks[0].spec
    for b in blocks:
        if b.spec != spec:
            raise SpecMismatch("blocks over different fields")
        if not b.is_square():
            raise DimensionMismatch("blocks must be square")
    n = sum(b.rows for b in blocks) + pad_zeros
    out = [0] * (n * n)
    off = 0
    for b in blocks:
        for i in range(b.rows):
            base = (off + i) * n + off
            bb = i * b.cols
            for j in range(b.cols):
                out[base + j] = b._e[bb + j]
        off += b.rows
    return Matrix(spec, n, n, out)


def kassabov_generators(n: int, spec: FieldSpec) -> tuple[Matrix, Matrix]:
    """The lower/upper shift generator pair of the n x n matrix algebra.

    They satisfy a^n = b^n = 0 and ba + a^(n-1) b^(n-1) = 1 exactly
    (the classical presentation coefficient p+1 reduces to 1 mod p).
    """
    if n < 1:
        raise DimensionMismatch("n must be positive")
    a = [0] * (n * n)
    b = [0] * (n * n)
    for i in range(n - 1):
        a[(i + 1) * n + i] = 1
        b[i * n + (i + 1)] = 1
    return Matrix(spec, n, n, a), Matrix(spec, n, n, b)


def presentation_coefficient(spec: FieldSpec) -> int:
    """The coefficient (p+1) reduced into the field's prime subfield."""
    return (spec.p + 1) % spec.p


def matrix_units(a: Matrix, b: Matrix, n: int) -> list[list[Matrix]]:
    """Full system of matrix units generated by a valid shift pair.

    E[i][j] = b^(n-1-i) (a^(n-1) b^(n-1)) a^(n-1-j) (0-based). Raises
    ``RelationsNotSatisfied`` unless the outputs obey every product
    identity and reassemble the inputs, which certifies that the pair
    generates an exact (possibly padded) copy of the n x n algebra.
    """
    if a.spec != b.spec:
        raise SpecMismatch("generator images over different fields")
    if not (a.is_square() and b.is_square() and a.rows == b.rows):
        raise DimensionMismatch("generator images must be square of equal size")
    amb = a.rows
    apow = [Matrix.identity(a.spec, amb)]
    bpow = [Matrix.identity(a.spec, amb)]
    for _ in range(n):
        apow.append(apow[-1] * a)
        bpow.append(bpow[-1] * b)
    if not apow[n].is_zero() or not bpow[n].is_zero():
        raise RelationsNotSatisfied("images are not n-step nilpotent")
    corner = apow[n - 1] * bpow[n - 1]
    units = [[bpow[n - 1 - i] * corner * apow[n - 1 - j] for j in range(n)]
             for i in range(n)]
    zero = Matrix.zero(a.spec, amb)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    prod = units[i][j] * units[k][l]
                    want = units[i][l] if j == k else zero
                    if prod != want:
                        raise RelationsNotSatisfied(
                            "matrix-unit product identities fail"
                        )
    rebuilt_a = zero
    rebuilt_b = zero
    for i in range(n - 1):
        rebuilt_a = rebuilt_a + units[i + 1][i]
        rebuilt_b = rebuilt_b + units[i][i + 1]
    if rebuilt_a != a or rebuilt_b != b:
        raise RelationsNotSatisfied("units do not reassemble the generators")
    return units


# ---------------------------------------------------------------------------
# subspace calculus


def kernel_basis(m: Matrix) -> Subspace:
    """Canonical basis of the right kernel; dim = cols - rank."""
    pivots, rows = _matrix_rref(m)
    piv_set = set(pivots)
    free = [j for j in range(m.cols) if j not in piv_set]
    neg = m.spec._neg
    vecs = []
    for f in free:
        v = [0] * m.cols
        v[f] = 1
        for r, pc in enumerate(pivots):
            v[pc] = neg[rows[r][f]]
        vecs.append(v)
    return Subspace(m.spec, m.cols, vecs)


def image_basis(m: Matrix) -> Subspace:
    """Canonical basis of the column span."""
    return Subspace(m.spec, m.rows, [list(m.column(j)) for j in range(m.cols)])


def annihilator(s: Subspace) -> Matrix:
    """Constraint matrix whose kernel is exactly s (rows kill every basis vector)."""
    bt = Matrix(s.spec, len(s.basis), s.ambient_dim,
                [v for vec in s.basis for v in vec])
    constraints = kernel_basis(bt)
    return Matrix(s.spec, len(constraints.basis), s.ambient_dim,
                  [v for vec in constraints.basis for v in vec])


def intersect(s1: Subspace, s2: Subspace) -> Subspace:
    """Intersection via the kernel of the stacked constraint rows."""
    if s1.spec != s2.spec:
        raise SpecMismatch("subspaces over different fields")
    if s1.ambient_dim != s2.ambient_dim:
        raise DimensionMismatch("subspaces in different ambient spaces")
    c1 = annihilator(s1)
    c2 = annihilator(s2)
    stacked = Matrix(s1.spec, c1.rows + c2.rows, s1.ambient_dim,
                     list(c1._e) + list(c2._e))
    return kernel_basis(stacked)


def subspace_sum(s1: Subspace, s2: Subspace) -> Subspace:
    """Span of the union: concatenate bases and re-echelon."""
    if s1.spec != s2.spec:
        raise SpecMismatch("subspaces over different fields")
    if s1.ambient_dim != s2.ambient_dim:
        raise DimensionMismatch("subspaces in different ambient spaces")
    return Subspace(s1.spec, s1.ambient_dim, list(s1.basis) + list(s2.basis))


def apply(m: Matrix, s: Subspace) -> Subspace:
    """Image m(s) of a subspace under a linear map."""
    if m.spec != s.spec:
        raise SpecMismatch("matrix and subspace over different fields")
    if m.cols != s.ambient_dim:
        raise DimensionMismatch("map domain does not match ambient space")
    return Subspace(m.spec, m.rows, [m.apply_to_vector(v) for v in s.basis])


def invert(m: Matrix) -> Matrix:
    """Exact inverse; raises ``Singular`` when the matrix has no inverse."""
    if not m.is_square():
        raise DimensionMismatch("only square matrices can be inverted")
    n = m.rows
    if _use_packed(m.spec):
        packed = _b_pack(m._e, n, n)
        aug = [packed[i] | (1 << (n + i)) for i in range(n)]
        pivots, rows = _b_rref(aug, n)
        if len(pivots) != n:
            raise Singular("matrix is singular")
        ent = []
        for r in rows:
            for j in range(n):
                ent.append((r >> (n + j)) & 1)
        return Matrix(m.spec, n, n, ent)
    rowls = m.row_lists()
    aug = []
    for i, row in enumerate(rowls):
        tail = [0] * n
        tail[i] = 1
        aug.append(row + tail)
    pivots, rows = _g_rref(aug, n, m.spec)
    if len(pivots) != n:
        raise Singular("matrix is singular")
    ent = []
    for r in rows:
        ent.extend(r[n:])
    return Matrix(m.spec, n, n, ent)


def solve(m: Matrix, rhs) -> tuple[int, ...] | None:
    """One solution of m v = rhs (raw encodings), or None if inconsistent."""
    if len(rhs) != m.rows:
        raise DimensionMismatch("right-hand side of wrong length")
    aug = Matrix(m.spec, m.rows, m.cols + 1,
                 [v for i in range(m.rows)
                  for v in (*m._e[i * m.cols:(i + 1) * m.cols], rhs[i])])
    pivots, rows = _matrix_rref(aug)
    if m.cols in pivots:
        return None
    sol = [0] * m.cols
    for r, pc in enumerate(pivots):
        sol[pc] = rows[r][m.cols]
    return tuple(sol)


def random_matrix(spec: FieldSpec, rows: int, cols: int, rng) -> Matrix:
    return Matrix(spec, rows, cols,
                  [rng.randrange(spec.q) for _ in range(rows * cols)])


def random_unit(spec: FieldSpec, n: int, rng) -> Matrix:
    """A uniformly sampled invertible matrix (rejection sampling)."""
    while True:
        m = random_matrix(spec, n, n, rng)
        if rank(m) == n:
            return m


# ---------------------------------------------------------------------------
# bit-exact text format


def write_matrix(m: Matrix) -> str:
    """Serialize as 'q rows cols' plus one line of encodings per row."""
    head = f"{m.spec.q} {m.rows} {m.cols}"
    lines = [head]
    for i in range(m.rows):
        lines.append(" ".join(str(v) for v in m._e[i * m.cols:(i + 1) * m.cols]))
    return "\n".join(lines) + "\n"


def _parse_matrix_lines(lines, start: int) -> tuple[Matrix, int]:
    if start >= len(lines):
        raise FormatError("missing matrix header")
    head = lines[start].split()
    if len(head) != 3:
        raise FormatError(f"bad matrix header: {lines[start]!r}")
    try:
        q, rows, cols = (int(t) for t in head)
    except ValueError as exc:
        raise FormatError(f"bad matrix header: {lines[start]!r}") from exc
    spec = field_for_order(q)
    ents = []
    for i in range(rows):
        idx = start + 1 + i
        if idx >= len(lines):
            raise FormatError("matrix block truncated")
        parts = lines[idx].split()
        if len(parts) != cols:
            raise FormatError(f"row {i} has {len(parts)} entries, expected {cols}")
        for t in parts:
            v = int(t)
            if not 0 <= v < q:
                raise FormatError(f"entry {v} out of range [0, {q})")
            ents.append(v)
    return Matrix(spec, rows, cols, ents), start + 1 + rows


def read_matrix(text: str) -> Matrix:
    """Parse exactly one matrix block; trailing garbage is rejected."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    m, nxt = _parse_matrix_lines(lines, 0)
    if nxt != len(lines):
        raise FormatError("trailing garbage after matrix block")
    return m


def read_matrices(text: str, count: int | None = None) -> list[Matrix]:
    """Parse consecutive matrix blocks from one text blob."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    out = []
    pos = 0
    while pos < len(lines):
        m, pos = _parse_matrix_lines(lines, pos)
        out.append(m)
        if count is not None and len(out) == count:
            break
    if pos != len(lines):
        raise FormatError("trailing garbage after matrix blocks")
    if count is not None and len(out) != count:
        raise FormatError(f"expected {count} matrix blocks, found {len(out)}")
    return out
