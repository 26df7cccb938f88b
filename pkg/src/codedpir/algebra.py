"""Exact arithmetic over GF(2^w) and dense linear algebra on top of it.

Field elements are integers in [0, 2^w): bit i holds the coefficient of x^i
in the polynomial basis. Addition is XOR in every binary extension field;
products are carryless multiplications reduced by a validated irreducible
modulus. Matrices keep raw integer entries internally so the elimination
hot paths stay allocation free, and hand out FieldElement wrappers at the
API boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

MAX_WIDTH = 16

# Widths up to this bound get log/antilog multiplication tables; wider
# fields multiply carrylessly and reduce on every call.
_TABLE_WIDTH = 8

# Conventional irreducible polynomials, one per width, so that runs are
# reproducible when no modulus is supplied. Bit i is the coefficient of x^i.
DEFAULT_MODULI = {
    1: 0b11,
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0b100011101,
    9: 0b1000010001,
    10: 0b10000001001,
    11: 0b100000000101,
    12: 0b1000001010011,
    13: 0b10000000011011,
    14: 0b100010001000011,
    15: 0b1000000000000011,
    16: 0b10001000000001011,
}


class ReducibleModulusError(ValueError):
    """The requested field modulus has a nontrivial divisor over GF(2)."""


class FieldMismatchError(ValueError):
    """Two operands belong to different field specs."""


class SingularSystemError(ValueError):
    """The coefficient matrix handed to solve() lacks full column rank."""

    def __init__(self, message: str, rank: int):
        super().__init__(message)
        self.rank = rank


def poly_degree(p: int) -> int:
    return p.bit_length() - 1


def poly_mod(a: int, m: int) -> int:
    """Remainder of a modulo m, both GF(2)[x] coefficient masks."""
    dm = poly_degree(m)
    while a and poly_degree(a) >= dm:
        a ^= m << (poly_degree(a) - dm)
    return a


def poly_str(p: int) -> str:
    """Render a coefficient mask as a polynomial, e.g. 0b1011 -> x^3+x+1."""
    if p == 0:
        return "0"
    terms = []
    for i in range(poly_degree(p), -1, -1):
        if (p >> i) & 1:
            terms.append("1" if i == 0 else ("x" if i == 1 else f"x^{i}"))
    return "+".join(terms)


def smallest_factor(p: int) -> int | None:
    """Smallest-degree nontrivial divisor of p over GF(2), or None.

    Exhaustive trial division; a reducible polynomial of degree w has an
    irreducible factor of degree at most w // 2, and the smallest divisor
    found this way is itself irreducible.
    """
    for d in range(1, poly_degree(p) // 2 + 1):
        for q in range(1 << d, 1 << (d + 1)):
            if poly_mod(p, q) == 0:
                return q
    return None


class FieldSpec:
    """A binary extension field GF(2^width) with a fixed reduction modulus.

    Instances are immutable; two specs compare equal when width and modulus
    agree. Arithmetic methods act on raw integer element values. Use
    element() to get an operator-friendly FieldElement bound to this spec.
    """

    __slots__ = ("width", "modulus", "order", "_exp", "_log", "_mul_fn")

    def __init__(self, width: int, modulus: int | None = None):
        if not isinstance(width, int) or not 1 <= width <= MAX_WIDTH:
            raise ValueError(f"field width must be an integer in 1..{MAX_WIDTH}, got {width!r}")
        if modulus is None:
            modulus = DEFAULT_MODULI[width]
        if poly_degree(modulus) != width:
            raise ValueError(
                f"modulus {poly_str(modulus)} has degree {poly_degree(modulus)}, expected {width}"
            )
        factor = smallest_factor(modulus)
        if factor is not None:
            raise ReducibleModulusError(f"reducible: divisible by {poly_str(factor)}")
        self.width = width
        self.modulus = modulus
        self.order = 1 << width
        self._exp: list[int] | None = None
        self._log: list[int] | None = None
        self._mul_fn: Callable[[int, int], int]
        self._init_mul()

    # -- construction helpers -------------------------------------------------

    def _raw_mul(self, a: int, b: int) -> int:
        acc = 0
        while b:
            if b & 1:
                acc ^= a
            a <<= 1
            b >>= 1
        return poly_mod(acc, self.modulus)

    def _init_mul(self) -> None:
        if self.width == 1:
            self._mul_fn = lambda a, b: a & b
            return
        if self.width > _TABLE_WIDTH:
            self._mul_fn = self._raw_mul
            return
        size = self.order - 1
        for g in range(2, self.order):
            exp = [1]
            v = 1
            for _ in range(size - 1):
                v = self._raw_mul(v, g)
                if v == 1:
                    break
                exp.append(v)
            if len(exp) == size:
                break
        else:  # pragma: no cover - every field has a generator
            raise AssertionError("no multiplicative generator found")
        log = [0] * self.order
        for i, v in enumerate(exp):
            log[v] = i
        exp_doubled = exp + exp
        self._exp = exp_doubled
        self._log = log

        def table_mul(a: int, b: int, _exp=exp_doubled, _log=log) -> int:
            if a == 0 or b == 0:
                return 0
            return _exp[_log[a] + _log[b]]

        self._mul_fn = table_mul

    # -- arithmetic on raw values ---------------------------------------------

    def add(self, a: int, b: int) -> int:
        return a ^ b

    sub = add  # characteristic 2

    def mul(self, a: int, b: int) -> int:
        return self._mul_fn(a, b)

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("zero has no multiplicative inverse")
        if self.width == 1:
            return 1
        if self._log is not None:
            size = self.order - 1
            return self._exp[size - self._log[a]]
        # square and multiply: a^(order - 2)
        result, base, e = 1, a, self.order - 2
        while e:
            if e & 1:
                result = self._raw_mul(result, base)
            base = self._raw_mul(base, base)
            e >>= 1
        return result

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    # -- misc -------------------------------------------------------------------

    def validate(self, value: int) -> int:
        if not isinstance(value, int) or not 0 <= value < self.order:
            raise ValueError(f"value {value!r} outside GF(2^{self.width})")
        return value

    def element(self, value: int) -> "FieldElement":
        return FieldElement(value, self)

    def random_value(self, rng) -> int:
        return rng.randrange(self.order)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, FieldSpec)
            and self.width == other.width
            and self.modulus == other.modulus
        )

    def __hash__(self) -> int:
        return hash((self.width, self.modulus))

    def __repr__(self) -> str:
        return f"FieldSpec(width={self.width}, modulus={poly_str(self.modulus)})"


def field_new(width: int, modulus: int | None = None) -> FieldSpec:
    """Build a field spec; the modulus defaults to a fixed per-width table."""
    return FieldSpec(width, modulus)


@dataclass(frozen=True)
class FieldElement:
    """A single field value bound to its FieldSpec."""

    value: int
    spec: FieldSpec

    def __post_init__(self):
        self.spec.validate(self.value)

    def _coerce(self, other: "FieldElement") -> "FieldElement":
        if not isinstance(other, FieldElement):
            raise TypeError(f"expected FieldElement, got {type(other).__name__}")
        if other.spec != self.spec:
            raise FieldMismatchError(f"mixing {self.spec!r} with {other.spec!r}")
        return other

    def __add__(self, other: "FieldElement") -> "FieldElement":
        other = self._coerce(other)
        return FieldElement(self.value ^ other.value, self.spec)

    __sub__ = __add__

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        other = self._coerce(other)
        return FieldElement(self.spec.mul(self.value, other.value), self.spec)

    def __truediv__(self, other: "FieldElement") -> "FieldElement":
        other = self._coerce(other)
        return FieldElement(self.spec.div(self.value, other.value), self.spec)

    def inverse(self) -> "FieldElement":
        return FieldElement(self.spec.inv(self.value), self.spec)

    def __bool__(self) -> bool:
        return self.value != 0

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"FieldElement({self.value}, GF(2^{self.spec.width}))"


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def inv(a: FieldElement) -> FieldElement:
    return a.inverse()


class FieldMatrix:
    """Dense matrix over one FieldSpec. Treat instances as immutable."""

    __slots__ = ("field", "nrows", "ncols", "_rows")

    def __init__(self, field: FieldSpec, rows: Iterable[Sequence]):
        data = []
        for row in rows:
            vals = []
            for entry in row:
                if isinstance(entry, FieldElement):
                    if entry.spec != field:
                        raise FieldMismatchError("matrix entry from a different field")
                    vals.append(entry.value)
                else:
                    vals.append(field.validate(entry))
            data.append(vals)
        if not data or not data[0]:
            raise ValueError("matrix needs at least one row and one column")
        ncols = len(data[0])
        if any(len(r) != ncols for r in data):
            raise ValueError("ragged rows in matrix input")
        self.field = field
        self.nrows = len(data)
        self.ncols = ncols
        self._rows = data

    @classmethod
    def zeros(cls, field: FieldSpec, nrows: int, ncols: int) -> "FieldMatrix":
        return cls(field, [[0] * ncols for _ in range(nrows)])

    @classmethod
    def identity(cls, field: FieldSpec, n: int) -> "FieldMatrix":
        return cls(field, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    def row(self, i: int) -> tuple[int, ...]:
        return tuple(self._rows[i])

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(r[j] for r in self._rows)

    def values(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(r) for r in self._rows)

    def at(self, i: int, j: int) -> FieldElement:
        return FieldElement(self._rows[i][j], self.field)

    def __add__(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check_mate(other)
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ValueError("shape mismatch in matrix addition")
        return FieldMatrix(
            self.field,
            [[a ^ b for a, b in zip(ra, rb)] for ra, rb in zip(self._rows, other._rows)],
        )

    def __matmul__(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check_mate(other)
        if self.ncols != other.nrows:
            raise ValueError("inner dimensions do not agree")
        mul_fn = self.field.mul
        out = [[0] * other.ncols for _ in range(self.nrows)]
        for i, arow in enumerate(self._rows):
            orow = out[i]
            for t, a in enumerate(arow):
                if a == 0:
                    continue
                brow = other._rows[t]
                if a == 1:
                    for j, b in enumerate(brow):
                        if b:
                            orow[j] ^= b
                else:
                    for j, b in enumerate(brow):
                        if b:
                            orow[j] ^= mul_fn(a, b)
        return FieldMatrix(self.field, out)

    def transpose(self) -> "FieldMatrix":
        return FieldMatrix(self.field, [list(col) for col in zip(*self._rows)])

    def submatrix(self, row_idx: Sequence[int] | None, col_idx: Sequence[int] | None) -> "FieldMatrix":
        rows = range(self.nrows) if row_idx is None else row_idx
        cols = range(self.ncols) if col_idx is None else col_idx
        return FieldMatrix(self.field, [[self._rows[i][j] for j in cols] for i in rows])

    def hstack(self, other: "FieldMatrix") -> "FieldMatrix":
        self._check_mate(other)
        if self.nrows != other.nrows:
            raise ValueError("row counts differ")
        return FieldMatrix(
            self.field, [ra + rb for ra, rb in zip(self._rows, other._rows)]
        )

    def _check_mate(self, other: "FieldMatrix") -> None:
        if not isinstance(other, FieldMatrix):
            raise TypeError("expected a FieldMatrix")
        if other.field != self.field:
            raise FieldMismatchError("matrices over different fields")

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, FieldMatrix)
            and self.field == other.field
            and self._rows == other._rows
        )

    def __repr__(self) -> str:
        return f"FieldMatrix({self.nrows}x{self.ncols} over GF(2^{self.field.width}))"


def rref(M: FieldMatrix) -> tuple[FieldMatrix, int, tuple[int, ...]]:
    """Reduced row echelon form of M.

    Returns (R, rank, pivot_cols) with pivot columns in increasing order,
    one per leading one. Pivoting picks the first row with a nonzero entry
    in the current column; over a field there are no ties to break.
    """
    if M.field.width == 1:
        return _rref_gf2(M)
    a = [list(r) for r in M._rows]
    nrows, ncols = M.nrows, M.ncols
    f = M.field
    mul_fn, inv_fn = f.mul, f.inv
    pivots: list[int] = []
    piv = 0
    for col in range(ncols):
        sel = next((r for r in range(piv, nrows) if a[r][col]), None)
        if sel is None:
            continue
        a[piv], a[sel] = a[sel], a[piv]
        c = a[piv][col]
        if c != 1:
            ic = inv_fn(c)
            a[piv] = [mul_fn(ic, x) for x in a[piv]]
        prow = a[piv]
        for r in range(nrows):
            if r != piv and a[r][col]:
                m = a[r][col]
                if m == 1:
                    a[r] = [x ^ y for x, y in zip(a[r], prow)]
                else:
                    a[r] = [x ^ mul_fn(m, y) for x, y in zip(a[r], prow)]
        pivots.append(col)
        piv += 1
        if piv == nrows:
            break
    return FieldMatrix(f, a), len(pivots), tuple(pivots)


def _rref_gf2(M: FieldMatrix) -> tuple[FieldMatrix, int, tuple[int, ...]]:
    nrows, ncols = M.nrows, M.ncols
    masks = []
    for r in M._rows:
        m = 0
        for j, v in enumerate(r):
            if v:
                m |= 1 << j
        masks.append(m)
    pivots: list[int] = []
    piv = 0
    for col in range(ncols):
        bit = 1 << col
        sel = next((r for r in range(piv, nrows) if masks[r] & bit), None)
        if sel is None:
            continue
        masks[piv], masks[sel] = masks[sel], masks[piv]
        prow = masks[piv]
        for r in range(nrows):
            if r != piv and masks[r] & bit:
                masks[r] ^= prow
        pivots.append(col)
        piv += 1
        if piv == nrows:
            break
    rows = [[(m >> j) & 1 for j in range(ncols)] for m in masks]
    return FieldMatrix(M.field, rows), len(pivots), tuple(pivots)


def matrix_rank(M: FieldMatrix) -> int:
    return rref(M)[1]


def _entry_is_zero(entry) -> bool:
    if isinstance(entry, int):
        return entry == 0
    return entry.is_zero()


def solve(A: FieldMatrix, B):
    """Solve A X = B for X, requiring A to have full column rank.

    A may be square or tall. B is either a FieldMatrix with matching row
    count, or a sequence of rows whose entries support characteristic-2
    addition via ``+`` and scaling by a raw field value via ``.scale()``
    (storage symbols do); solving then happens component-wise over the
    base field. Raises SingularSystemError, carrying the rank found, when
    A is rank-deficient, and ValueError when the system is inconsistent.
    """
    f = A.field
    a = [list(r) for r in A._rows]
    nrows, ncols = A.nrows, A.ncols
    if isinstance(B, FieldMatrix):
        if B.field != f:
            raise FieldMismatchError("right-hand side over a different field")
        if B.nrows != nrows:
            raise ValueError("row counts of A and B differ")
        b = [list(r) for r in B._rows]
        add_e = lambda x, y: x ^ y
        scale_e = f.mul
        wrap = lambda rows: FieldMatrix(f, rows)
    else:
        b = [list(r) for r in B]
        if len(b) != nrows:
            raise ValueError("row counts of A and B differ")
        add_e = lambda x, y: x + y
        scale_e = lambda c, x: x.scale(c)
        wrap = lambda rows: rows

    mul_fn, inv_fn = f.mul, f.inv
    piv = 0
    for col in range(ncols):
        sel = next((r for r in range(piv, nrows) if a[r][col]), None)
        if sel is None:
            continue
        a[piv], a[sel] = a[sel], a[piv]
        b[piv], b[sel] = b[sel], b[piv]
        c = a[piv][col]
        if c != 1:
            ic = inv_fn(c)
            a[piv] = [mul_fn(ic, x) for x in a[piv]]
            b[piv] = [scale_e(ic, x) for x in b[piv]]
        prow_a, prow_b = a[piv], b[piv]
        for r in range(nrows):
            if r != piv and a[r][col]:
                m = a[r][col]
                a[r] = [x ^ mul_fn(m, y) for x, y in zip(a[r], prow_a)]
                b[r] = [add_e(x, scale_e(m, y)) for x, y in zip(b[r], prow_b)]
        piv += 1
        if piv == nrows:
            break
    if piv < ncols:
        raise SingularSystemError(
            f"coefficient matrix has rank {piv}, expected full column rank {ncols}", piv
        )
    for r in range(ncols, nrows):
        if any(not _entry_is_zero(x) for x in b[r]):
            raise ValueError("inconsistent system: no solution exists")
    return wrap([b[r] for r in range(ncols)])


def nullspace(M: FieldMatrix) -> list[tuple[int, ...]]:
    """Basis of the right null space of M, one tuple per free column."""
    R, rank, pivots = rref(M)
    pivot_set = set(pivots)
    basis = []
    for free in range(M.ncols):
        if free in pivot_set:
            continue
        v = [0] * M.ncols
        v[free] = 1
        for i, p in enumerate(pivots):
            v[p] = R._rows[i][free]  # negation is identity in characteristic 2
        basis.append(tuple(v))
    return basis


class BitBasis:
    """Incremental linear independence tracker for GF(2) bitmask vectors."""

    __slots__ = ("_pivots",)

    def __init__(self):
        self._pivots: dict[int, int] = {}

    def insert(self, v: int) -> int | None:
        """Reduce v against the basis; keep it if independent.

        Returns the leading-bit key of the stored vector, or None when v is
        in the span already.
        """
        pivots = self._pivots
        while v:
            lead = v.bit_length() - 1
            row = pivots.get(lead)
            if row is None:
                pivots[lead] = v
                return lead
            v ^= row
        return None

    def discard(self, lead: int) -> None:
        del self._pivots[lead]

    def __len__(self) -> int:
        return len(self._pivots)


class FieldBasis:
    """Independence tracker over GF(2^w) for coefficient-sequence vectors."""

    __slots__ = ("field", "_pivots")

    def __init__(self, field: FieldSpec):
        self.field = field
        self._pivots: dict[int, list[int]] = {}

    def insert(self, vec: Sequence[int]) -> int | None:
        f = self.field
        mul_fn = f.mul
        v = list(vec)
        i = len(v) - 1
        while i >= 0:
            c = v[i]
            if c == 0:
                i -= 1
                continue
            row = self._pivots.get(i)
            if row is None:
                ic = f.inv(c)
                self._pivots[i] = [mul_fn(ic, x) for x in v]
                return i
            v = [x ^ mul_fn(c, y) for x, y in zip(v, row)]
            i -= 1
        return None

    def discard(self, lead: int) -> None:
        del self._pivots[lead]

    def __len__(self) -> int:
        return len(self._pivots)


def new_basis(field: FieldSpec):
    return BitBasis() if field.width == 1 else FieldBasis(field)


def column_vectors(M: FieldMatrix) -> list:
    """Columns of M in the representation new_basis(M.field) consumes.

    GF(2) columns become bitmask integers (bit r = row r); wider fields get
    plain value tuples.
    """
    if M.field.width == 1:
        cols = []
        for j in range(M.ncols):
            m = 0
            for r in range(M.nrows):
                if M._rows[r][j]:
                    m |= 1 << r
            cols.append(m)
        return cols
    return [M.column(j) for j in range(M.ncols)]
