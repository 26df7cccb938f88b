"""The retrieval protocol: storage layout, queries, responses, recovery.

A user who wants file m sends each node a k x (beta*f) query matrix. The
first k nodes (which hold message symbols) get a uniformly random mask U
plus a deterministic 0/1 selection block aimed at file m's columns; parity
nodes get the bare mask. Every node returns its query matrix times its
symbol column, so each of the k subqueries yields one symbol per node.
Recovery reads the random interference directly off the systematic nodes a
subquery did not select, cancels it out of the parity responses, solves
the remaining full-rank system for the interference on selected nodes, and
subtracts that from the selected responses to expose file symbols.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .algebra import FieldMatrix, SingularSystemError, solve
from .codes import LinearCode, StorageSymbol, encode_file
from .optimizer import EMatrix


class ProtocolViolationError(RuntimeError):
    """Responses or query structure are inconsistent with the protocol."""


@dataclass(frozen=True)
class StorageArray:
    """Encoded contents of the whole system: beta*f rows by n columns.

    Rows are grouped file-major, stripe-minor; column j is what node j + 1
    stores (f coded chunks of beta symbols each).
    """

    code: LinearCode
    beta: int
    f: int
    rows: tuple[tuple[StorageSymbol, ...], ...]

    @property
    def ell(self) -> int:
        return self.rows[0][0].ell

    def node_column(self, node: int) -> tuple[StorageSymbol, ...]:
        """Symbols held by one node; `node` is 1-based like the queries."""
        if not 1 <= node <= self.code.n:
            raise ValueError(f"node {node} out of 1..{self.code.n}")
        j = node - 1
        return tuple(row[j] for row in self.rows)


@dataclass(frozen=True)
class QuerySet:
    """Everything the user generated for one retrieval.

    q[l - 1] is the k x (beta*f) query matrix for node l. z[i][l] gives the
    stripe slot (1..beta) that subquery i + 1 draws from node l + 1, or 0
    when that subquery does not select node l + 1; pi permutes the slots
    into actual stripe indices and fixes 0.
    """

    m: int
    f: int
    beta: int
    u: FieldMatrix
    q: tuple[FieldMatrix, ...]
    e: EMatrix
    pi: tuple[int, ...]
    z: tuple[tuple[int, ...], ...]

    def v_block(self, l: int) -> FieldMatrix:
        """The k x beta selection block of node l's query (l in 1..k)."""
        k = len(self.z)
        if not 1 <= l <= k:
            raise ValueError(f"only the first {k} nodes carry a selection block")
        rows = []
        for i in range(k):
            row = [0] * self.beta
            slot = self.z[i][l - 1]
            if slot:
                row[self.pi[slot] - 1] = 1
            rows.append(row)
        return FieldMatrix(self.u.field, rows)


@dataclass(frozen=True)
class ResponseSet:
    """One column vector of d = k symbols per node, in node order."""

    responses: tuple[tuple[StorageSymbol, ...], ...]

    @property
    def d(self) -> int:
        return len(self.responses[0])


def build_storage(code: LinearCode, files: Sequence[Sequence[Sequence[StorageSymbol]]]) -> StorageArray:
    """Encode every stripe of every file and stack the codeword rows."""
    if not files:
        raise ValueError("need at least one file")
    beta = len(files[0])
    k = code.k
    rows: list[tuple[StorageSymbol, ...]] = []
    for idx, file_matrix in enumerate(files):
        if len(file_matrix) != beta or any(len(r) != k for r in file_matrix):
            raise ValueError(f"file {idx + 1} is not a {beta} x {k} matrix")
        for codeword in encode_file(code, file_matrix):
            rows.append(tuple(codeword))
    array = StorageArray(code=code, beta=beta, f=len(files), rows=tuple(rows))
    if len({sym.ell for row in rows for sym in row}) != 1:
        raise ValueError("files have inconsistent payload lengths")
    return array


def _canonical_slots(e: EMatrix) -> list[list[int]]:
    """Default stripe-slot assignment: rank order down each column.

    Column l lists its selected rows in increasing order and hands them
    slots 1..beta. Every column therefore uses each slot exactly once,
    which makes the beta*k recovered coordinates automatically distinct.
    """
    k = e.k
    z = [[0] * k for _ in range(k)]
    for l in range(k):
        slot = 0
        for i in range(k):
            if e.rows[i][l]:
                slot += 1
                z[i][l] = slot
    return z


def _validate_slots(e: EMatrix, z: Sequence[Sequence[int]]) -> list[list[int]]:
    k = e.k
    grid = [list(map(int, row)) for row in z]
    if len(grid) != k or any(len(r) != k for r in grid):
        raise ValueError(f"slot assignment must be {k} x {k}")
    for l in range(k):
        used = []
        for i in range(k):
            slot = grid[i][l]
            if e.rows[i][l]:
                if not 1 <= slot <= e.beta:
                    raise ValueError(f"slot {slot} at ({i}, {l}) outside 1..{e.beta}")
                used.append(slot)
            elif slot != 0:
                raise ValueError(f"slot set at ({i}, {l}) where the access matrix has a zero")
        if sorted(used) != list(range(1, e.beta + 1)):
            raise ValueError(f"column {l} does not use each stripe slot exactly once")
    return grid


def _validate_pi(pi: Sequence[int], beta: int) -> tuple[int, ...]:
    perm = tuple(int(x) for x in pi)
    if len(perm) != beta + 1 or perm[0] != 0 or sorted(perm) != list(range(beta + 1)):
        raise ValueError(f"pi must permute 0..{beta} and fix 0")
    return perm


def _selection_grids(
    k: int, beta: int, f: int, m: int, pi: Sequence[int], z: Sequence[Sequence[int]]
) -> list[list[list[int]] | None]:
    """Per-node deterministic 0/1 offsets; None for parity nodes."""
    width = beta * f
    base = (m - 1) * beta
    grids: list[list[list[int]] | None] = []
    for l in range(k):
        grid = [[0] * width for _ in range(k)]
        for i in range(k):
            slot = z[i][l]
            if slot:
                grid[i][base + pi[slot] - 1] = 1
        grids.append(grid)
    return grids


def build_queries(
    code: LinearCode,
    e: EMatrix,
    m: int,
    f: int,
    seed: int,
    pi: Sequence[int] | None = None,
    z: Sequence[Sequence[int]] | None = None,
) -> QuerySet:
    """Draw the mask and assemble all n query matrices for file m.

    pi may be any permutation of 0..beta fixing 0; z may override the
    canonical stripe-slot assignment as long as each column of the access
    matrix still uses each slot exactly once. Both default to choices that
    tests can reproduce, and recovery works for any valid override.
    """
    k, n = code.k, code.n
    if e.k != k:
        raise ValueError(f"access matrix is {e.k} x {e.k}, code needs {k} x {k}")
    if f < 1:
        raise ValueError("need at least one file")
    if not 1 <= m <= f:
        raise ValueError(f"file index {m} out of 1..{f}")
    beta = e.beta
    perm = _validate_pi(pi, beta) if pi is not None else tuple(range(beta + 1))
    slots = _validate_slots(e, z) if z is not None else _canonical_slots(e)
    field = code.field
    rng = random.Random(seed)
    width = beta * f
    u_rows = [[rng.randrange(field.order) for _ in range(width)] for _ in range(k)]
    grids = _selection_grids(k, beta, f, m, perm, slots)
    queries = []
    for l in range(n):
        if l < k:
            v = grids[l]
            q_rows = [[uv ^ vv for uv, vv in zip(urow, vrow)] for urow, vrow in zip(u_rows, v)]
        else:
            q_rows = [list(urow) for urow in u_rows]
        queries.append(FieldMatrix(field, q_rows))
    return QuerySet(
        m=m,
        f=f,
        beta=beta,
        u=FieldMatrix(field, u_rows),
        q=tuple(queries),
        e=e,
        pi=perm,
        z=tuple(tuple(r) for r in slots),
    )


def node_response(q_j: FieldMatrix, node_column: Sequence[StorageSymbol]) -> list[StorageSymbol]:
    """One node's answer: its query matrix times its symbol column."""
    if q_j.ncols != len(node_column):
        raise ValueError(
            f"query has {q_j.ncols} columns but the node stores {len(node_column)} symbols"
        )
    field = q_j.field
    for sym in node_column:
        if sym.spec != field:
            raise ValueError("stored symbol over a different field than the query")
    ell = node_column[0].ell
    mul = field.mul
    out = []
    for i in range(q_j.nrows):
        acc = [0] * ell
        for s, coeff in enumerate(q_j._rows[i]):
            if coeff == 0:
                continue
            comps = node_column[s].components
            if coeff == 1:
                acc = [a ^ c for a, c in zip(acc, comps)]
            else:
                acc = [a ^ mul(coeff, c) for a, c in zip(acc, comps)]
        out.append(StorageSymbol(field, acc))
    return out


def collect_responses(qs: QuerySet, array: StorageArray) -> ResponseSet:
    """Run every node's response computation against the stored array."""
    if array.beta != qs.beta or array.f != qs.f:
        raise ValueError("query set and storage array disagree on beta or f")
    n = array.code.n
    return ResponseSet(
        responses=tuple(
            tuple(node_response(qs.q[j], array.node_column(j + 1))) for j in range(n)
        )
    )


def recover_file(qs: QuerySet, rs: ResponseSet, code: LinearCode) -> list[list[StorageSymbol]]:
    """Reconstruct the requested beta x k file matrix from the responses.

    For each subquery t: the systematic nodes it did not select return pure
    interference; substituting those into the parity responses leaves, per
    parity node, a linear combination of only the unknown interference on
    selected nodes. That system is full-rank exactly when row t of the
    access matrix is a correctable erasure pattern. Solving it and adding
    the result to the selected responses (subtraction and addition agree in
    characteristic 2) exposes one file symbol per selected node.
    """
    k, n = code.k, code.n
    beta = qs.beta
    if beta >= k:
        raise ProtocolViolationError(
            f"stripe count {beta} must stay below k={k}; no subquery may select every node"
        )
    if len(rs.responses) != n:
        raise ValueError(f"expected {n} responses, got {len(rs.responses)}")
    field = code.field
    p_rows = code.p._rows
    grid: list[list[StorageSymbol | None]] = [[None] * k for _ in range(beta)]
    for t in range(k):
        selected = [l for l in range(k) if qs.e.rows[t][l]]
        selected_set = set(selected)
        known = {l: rs.responses[l][t] for l in range(k) if l not in selected_set}
        rhs = []
        for r in range(n - k):
            acc = rs.responses[k + r][t]
            prow = p_rows[r]
            for l, sym in known.items():
                c = prow[l]
                if c:
                    acc = acc + sym.scale(c)
            rhs.append([acc])
        A = FieldMatrix(field, [[p_rows[r][l] for l in selected] for r in range(n - k)])
        try:
            interference = solve(A, rhs)
        except SingularSystemError as exc:
            raise ProtocolViolationError(
                f"subquery {t + 1}: interference system is singular (rank {exc.rank}); "
                "the access pattern is not correctable or responses are inconsistent"
            ) from exc
        for idx, l in enumerate(selected):
            symbol = rs.responses[l][t] + interference[idx][0]
            stripe = qs.pi[qs.z[t][l]]
            if grid[stripe - 1][l] is not None:
                raise ProtocolViolationError(
                    f"coordinate (stripe {stripe}, column {l + 1}) recovered twice"
                )
            grid[stripe - 1][l] = symbol
    for row in grid:
        if any(sym is None for sym in row):
            raise ProtocolViolationError("recovery left gaps in the file matrix")
    return [list(row) for row in grid]  # type: ignore[arg-type]


def cpop_of_run(qs: QuerySet, code: LinearCode) -> Fraction:
    """Downloaded symbols per retrieved symbol for this run (d = k)."""
    return Fraction(code.n * code.k, qs.beta * code.k)


@dataclass(frozen=True)
class PrivacyReport:
    """Verdicts of the exact and statistical query-privacy checks."""

    exact_performed: bool
    exact_multisets_ok: bool | None
    exact_construction_ok: bool | None
    trials: int
    tests: int
    min_p_value: float
    significance: float
    per_test_threshold: float
    statistical_ok: bool

    @property
    def ok(self) -> bool:
        exact_ok = (
            True
            if not self.exact_performed
            else bool(self.exact_multisets_ok and self.exact_construction_ok)
        )
        return exact_ok and self.statistical_ok


def _flatten(grid: Sequence[Sequence[int]]) -> tuple[int, ...]:
    return tuple(v for row in grid for v in row)


def exact_privacy_check(
    code: LinearCode,
    e: EMatrix,
    f: int,
    pi: Sequence[int] | None = None,
    z: Sequence[Sequence[int]] | None = None,
    limit: int = 1 << 16,
    builder: Callable[[list[list[int]], int], Sequence[Sequence[Sequence[int]]]] | None = None,
) -> tuple[bool, bool]:
    """Enumerate every mask and compare query distributions across files.

    Returns (multisets_ok, construction_ok). The first is the privacy
    statement itself: at every node, the multiset of query matrices over
    all masks is identical no matter which file is requested. The second
    pins the construction: for every mask, node l's query must equal the
    mask plus node l's selection block (bare mask past node k), which
    catches bugs like selection leaking into parity queries. `builder` may
    replace the query assembly under test.
    """
    k, n = code.k, code.n
    beta = e.beta
    order = code.field.order
    width = beta * f
    total = order ** (k * width)
    if total > limit:
        raise ValueError(f"exact check needs {total} mask enumerations, above the limit {limit}")
    perm = _validate_pi(pi, beta) if pi is not None else tuple(range(beta + 1))
    slots = _validate_slots(e, z) if z is not None else _canonical_slots(e)
    grids_per_m = {m: _selection_grids(k, beta, f, m, perm, slots) for m in range(1, f + 1)}

    def assemble(u_rows: list[list[int]], m: int) -> list[list[list[int]]]:
        grids = grids_per_m[m]
        out = []
        for l in range(n):
            if l < k:
                v = grids[l]
                out.append([[uv ^ vv for uv, vv in zip(ur, vr)] for ur, vr in zip(u_rows, v)])
            else:
                out.append([list(ur) for ur in u_rows])
        return out

    build = builder or assemble
    counters: dict[int, list[dict[tuple[int, ...], int]]] = {
        m: [dict() for _ in range(n)] for m in range(1, f + 1)
    }
    construction_ok = True
    for flat in itertools.product(range(order), repeat=k * width):
        u_rows = [list(flat[i * width : (i + 1) * width]) for i in range(k)]
        for m in range(1, f + 1):
            queries = build(u_rows, m)
            if construction_ok:
                expected = assemble(u_rows, m)
                if [list(map(list, q)) for q in queries] != expected:
                    construction_ok = False
            for s in range(n):
                key = _flatten(queries[s])
                bucket = counters[m][s]
                bucket[key] = bucket.get(key, 0) + 1
    first = counters[1]
    multisets_ok = all(counters[m] == first for m in range(2, f + 1))
    return multisets_ok, construction_ok


def verify_privacy(
    code: LinearCode,
    e: EMatrix,
    f: int,
    trials: int,
    seed: int,
    pi: Sequence[int] | None = None,
    significance: float = 0.01,
    exact_limit: int = 1 << 16,
) -> PrivacyReport:
    """Check that queries reveal nothing about the requested file index.

    When the mask space is small enough, the exact enumeration check runs;
    the statistical check always runs: `trials` seeded query draws per file
    index, a chi-square uniformity test on every entry of every node's
    query matrix, and a Bonferroni-corrected verdict so the whole family of
    tests has the stated significance.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    from scipy.stats import chi2 as _chi2

    k, n = code.k, code.n
    beta = e.beta
    order = code.field.order
    width = beta * f
    perm = _validate_pi(pi, beta) if pi is not None else tuple(range(beta + 1))
    slots = _canonical_slots(e)

    exact_performed = order ** (k * width) <= exact_limit
    multisets_ok = construction_ok = None
    if exact_performed:
        multisets_ok, construction_ok = exact_privacy_check(
            code, e, f, pi=perm, limit=exact_limit
        )

    rng = random.Random(seed)
    counts = [
        [[[0] * order for _ in range(width)] for _ in range(k)] for _ in range(f * n)
    ]
    for m in range(1, f + 1):
        grids = _selection_grids(k, beta, f, m, perm, slots)
        base = (m - 1) * n
        for _ in range(trials):
            u_rows = [[rng.randrange(order) for _ in range(width)] for _ in range(k)]
            for s in range(n):
                node_counts = counts[base + s]
                v = grids[s] if s < k else None
                for i in range(k):
                    urow = u_rows[i]
                    crow = node_counts[i]
                    if v is None:
                        for j in range(width):
                            crow[j][urow[j]] += 1
                    else:
                        vrow = v[i]
                        for j in range(width):
                            crow[j][urow[j] ^ vrow[j]] += 1

    expected = trials / order
    tests = f * n * k * width
    min_p = 1.0
    for node_counts in counts:
        for i in range(k):
            for j in range(width):
                cell = node_counts[i][j]
                stat = sum((c - expected) ** 2 for c in cell) / expected
                p = float(_chi2.sf(stat, order - 1))
                if p < min_p:
                    min_p = p
    threshold = significance / tests
    return PrivacyReport(
        exact_performed=exact_performed,
        exact_multisets_ok=multisets_ok,
        exact_construction_ok=construction_ok,
        trials=trials,
        tests=tests,
        min_p_value=min_p,
        significance=significance,
        per_test_threshold=threshold,
        statistical_ok=min_p >= threshold,
    )


def random_file(field, beta: int, k: int, ell: int, rng: random.Random) -> list[list[StorageSymbol]]:
    """A beta x k file matrix of uniformly random symbols."""
    return [
        [StorageSymbol(field, [rng.randrange(field.order) for _ in range(ell)]) for _ in range(k)]
        for _ in range(beta)
    ]
