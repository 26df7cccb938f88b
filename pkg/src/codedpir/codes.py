"""Systematic storage codes, the derived erasure code, and symbol types.

A storage code is given by its parity-check matrix H = (P | I). The derived
code on the k message coordinates has parity-check matrix P; its erasure
correction capability decides which sets of message nodes a retrieval
subquery may touch at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from .algebra import (
    FieldMatrix,
    FieldSpec,
    column_vectors,
    new_basis,
)


class NotSystematicError(ValueError):
    """Right block of the parity-check matrix is not the identity."""


class RateError(ValueError):
    """Code rate is not strictly above one half."""


class MinDistanceCapError(ValueError):
    """Exhaustive minimum-distance search would exceed its column cap."""


class StorageSymbol:
    """One stored symbol: a length-ell vector of base-field values.

    Payload symbols conceptually live in the degree-ell extension of the
    base field, but the protocol only ever adds them and scales them by
    base-field values, so a plain coefficient vector carries everything.
    """

    __slots__ = ("spec", "components")

    def __init__(self, spec: FieldSpec, components: Iterable[int]):
        comps = tuple(components)
        if not comps:
            raise ValueError("a storage symbol needs at least one component")
        for c in comps:
            spec.validate(c)
        self.spec = spec
        self.components = comps

    @property
    def ell(self) -> int:
        return len(self.components)

    def __add__(self, other: "StorageSymbol") -> "StorageSymbol":
        if not isinstance(other, StorageSymbol):
            return NotImplemented
        if other.spec != self.spec or other.ell != self.ell:
            raise ValueError("adding symbols of different fields or lengths")
        return StorageSymbol(self.spec, tuple(a ^ b for a, b in zip(self.components, other.components)))

    __sub__ = __add__  # characteristic 2

    def scale(self, value: int) -> "StorageSymbol":
        """Component-wise product with a raw base-field value."""
        self.spec.validate(value)
        if value == 0:
            return StorageSymbol(self.spec, (0,) * self.ell)
        if value == 1:
            return self
        mul = self.spec.mul
        return StorageSymbol(self.spec, tuple(mul(value, c) for c in self.components))

    def is_zero(self) -> bool:
        return not any(self.components)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, StorageSymbol)
            and self.spec == other.spec
            and self.components == other.components
        )

    def __hash__(self) -> int:
        return hash((self.spec, self.components))

    def __repr__(self) -> str:
        return f"StorageSymbol{self.components}"


def zero_symbol(spec: FieldSpec, ell: int) -> StorageSymbol:
    return StorageSymbol(spec, (0,) * ell)


@dataclass(frozen=True)
class ErasurePattern:
    """Length-k binary vector; ones mark erased (accessed) coordinates."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if not self.bits:
            raise ValueError("empty erasure pattern")
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("erasure pattern entries must be 0 or 1")

    @classmethod
    def from_support(cls, length: int, support: Iterable[int]) -> "ErasurePattern":
        bits = [0] * length
        for j in support:
            bits[j] = 1
        return cls(tuple(bits))

    @cached_property
    def weight(self) -> int:
        return sum(self.bits)

    def support(self) -> tuple[int, ...]:
        return tuple(j for j, b in enumerate(self.bits) if b)

    def shifted(self, s: int) -> "ErasurePattern":
        """Cyclic shift moving position j to position (j + s) mod k."""
        k = len(self.bits)
        s %= k
        return ErasurePattern(self.bits[-s:] + self.bits[:-s] if s else self.bits)

    def __len__(self) -> int:
        return len(self.bits)


@dataclass(frozen=True)
class LinearCode:
    """Systematic (n, k) code defined by H = (P | I)."""

    field: FieldSpec
    n: int
    k: int
    h: FieldMatrix
    p: FieldMatrix

    @property
    def rate(self) -> Fraction:
        return Fraction(self.k, self.n)

    @cached_property
    def parity_rank(self) -> int:
        from .algebra import matrix_rank

        return matrix_rank(self.p)


def code_from_parity_check(H: FieldMatrix) -> LinearCode:
    """Validate H = (P | I) and wrap it as a LinearCode.

    Raises NotSystematicError when the right block is not the identity and
    RateError when k/n <= 1/2; the retrieval construction needs strictly
    more message nodes than parity nodes.
    """
    r, n = H.nrows, H.ncols
    k = n - r
    if k < 1:
        raise RateError(f"parity-check matrix leaves no message columns (n={n}, n-k={r})")
    for i in range(r):
        for j in range(r):
            expected = 1 if i == j else 0
            if H._rows[i][k + j] != expected:
                raise NotSystematicError(
                    f"right {r}x{r} block of H is not the identity (entry ({i},{j}))"
                )
    if 2 * k <= n:
        raise RateError(f"code rate {k}/{n} is not above 1/2")
    P = H.submatrix(None, range(k))
    return LinearCode(field=H.field, n=n, k=k, h=H, p=P)


@dataclass(frozen=True)
class DerivedCode:
    """The length-k code whose parity-check matrix is P.

    Its dimension k_tilde is k - rank(P); when P is rank-deficient the
    dimension exceeds 2k - n.
    """

    field: FieldSpec
    n_tilde: int
    k_tilde: int
    h_tilde: FieldMatrix
    d_tilde_min: int | None = None

    @cached_property
    def _column_reps(self):
        return column_vectors(self.h_tilde)

    def column_basis(self):
        """Fresh elimination basis matching _column_reps' representation."""
        return new_basis(self.field)


def derived_code(code: LinearCode, d_tilde_min: int | None = None) -> DerivedCode:
    return DerivedCode(
        field=code.field,
        n_tilde=code.k,
        k_tilde=code.k - code.parity_rank,
        h_tilde=code.p,
        d_tilde_min=d_tilde_min,
    )


def min_distance(H: FieldMatrix, cap: int = 25) -> int:
    """Minimum distance of the code H defines.

    Searches for the smallest set of linearly dependent columns of H by
    depth-first extension of independent column prefixes, pruning against
    the best size found so far. Exact, but exponential in the worst case,
    so matrices wider than `cap` columns are refused.
    """
    if H.ncols > cap:
        raise MinDistanceCapError(
            f"minimum-distance search over {H.ncols} columns exceeds the cap of {cap}; "
            "supply the value externally (dmin/dtmin hints in code files)"
        )
    cols = column_vectors(H)
    ncols = len(cols)
    basis = new_basis(H.field)
    best = ncols + 1

    def walk(start: int, depth: int) -> None:
        nonlocal best
        for j in range(start, ncols):
            if depth + 1 >= best:
                return
            lead = basis.insert(cols[j])
            if lead is None:
                best = depth + 1
            else:
                walk(j + 1, depth + 1)
                basis.discard(lead)

    walk(0, 0)
    if best > ncols:
        raise ValueError("all columns are independent; the code is trivial and has no distance")
    return best


def is_ml_correctable(derived: DerivedCode, pattern: ErasurePattern) -> bool:
    """Whether erasing the pattern's support is uniquely recoverable.

    True exactly when the erased columns of the derived code's parity-check
    matrix are linearly independent, which is the maximum-likelihood
    erasure-decoding criterion on the binary erasure channel.
    """
    if len(pattern) != derived.n_tilde:
        raise ValueError(
            f"pattern length {len(pattern)} does not match code length {derived.n_tilde}"
        )
    cols = derived._column_reps
    basis = derived.column_basis()
    for j in pattern.support():
        if basis.insert(cols[j]) is None:
            return False
    return True


def encode_file(code: LinearCode, X: Sequence[Sequence[StorageSymbol]]) -> list[list[StorageSymbol]]:
    """Encode a beta x k file matrix into beta codeword rows of length n.

    Row i keeps its k message symbols as a systematic prefix; parity symbol
    k + r is the P-row-r weighted sum of the row's message symbols, so every
    output row satisfies H c^T = 0.
    """
    if not X:
        raise ValueError("empty file")
    k = code.k
    field = code.field
    mul = field.mul
    ell = None
    out: list[list[StorageSymbol]] = []
    for row in X:
        if len(row) != k:
            raise ValueError(f"file row has {len(row)} symbols, expected k={k}")
        for sym in row:
            if sym.spec != field:
                raise ValueError("file symbol over a different field than the code")
            if ell is None:
                ell = sym.ell
            elif sym.ell != ell:
                raise ValueError("file symbols have inconsistent payload lengths")
        codeword = list(row)
        for prow in code.p._rows:
            acc = [0] * ell
            for j, c in enumerate(prow):
                if c == 0:
                    continue
                comps = row[j].components
                if c == 1:
                    acc = [a ^ x for a, x in zip(acc, comps)]
                else:
                    acc = [a ^ mul(c, x) for a, x in zip(acc, comps)]
            codeword.append(StorageSymbol(field, acc))
        out.append(codeword)
    return out
