"""Search for the widest regular, correctable access matrix.

Each retrieval subquery touches one message symbol on each node of an
erasure-correctable set; stacking k such patterns into a k x k binary
matrix E with constant row and column weight beta lets one run of the
protocol pull beta*k distinct symbols while every node still answers k
subqueries. The download price n/beta therefore falls as beta grows, and
the scan below climbs beta from just under the derived code's minimum
distance (where every pattern works) up to the rank of its parity-check
matrix (past which no correctable pattern exists).
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, NamedTuple, Sequence

from .codes import (
    DerivedCode,
    ErasurePattern,
    LinearCode,
    derived_code,
    is_ml_correctable,
    min_distance,
)
from .algebra import rref


@dataclass(frozen=True)
class EMatrix:
    """Square binary access matrix with constant row and column weight."""

    rows: tuple[tuple[int, ...], ...]
    beta: int

    def __post_init__(self):
        k = len(self.rows)
        if any(len(r) != k for r in self.rows):
            raise ValueError("access matrix must be square")
        if any(b not in (0, 1) for r in self.rows for b in r):
            raise ValueError("access matrix entries must be 0 or 1")
        if any(sum(r) != self.beta for r in self.rows):
            raise ValueError(f"every row must have exactly {self.beta} ones")
        if any(sum(col) != self.beta for col in zip(*self.rows)):
            raise ValueError(f"every column must have exactly {self.beta} ones")

    @property
    def k(self) -> int:
        return len(self.rows)

    def row_pattern(self, i: int) -> ErasurePattern:
        return ErasurePattern(self.rows[i])


@dataclass(frozen=True)
class PatternList:
    """Correctable erasure patterns of one weight.

    `exhaustive` is True when the list provably contains every correctable
    pattern of that weight.
    """

    patterns: frozenset[ErasurePattern]
    beta: int
    exhaustive: bool

    def __post_init__(self):
        for p in self.patterns:
            if p.weight != self.beta:
                raise ValueError("pattern list mixes weights")


def compute_erasure_pattern_list(
    derived: DerivedCode,
    beta: int,
    mode: Literal["exhaustive", "randomized"] = "exhaustive",
    budget: int = 64,
    seed: int = 0,
) -> PatternList:
    """Collect weight-beta erasure patterns the derived code can correct.

    Exhaustive mode walks every linearly independent beta-subset of the
    parity-check columns, which equals filtering all C(k, beta) patterns
    through the correctability test. Randomized mode runs up to `budget`
    rounds of: permute the columns at random, row-reduce, pick beta of the
    leading-one columns (an independent set by construction), map them back
    through the permutation, then keep every correctable cyclic shift of
    the resulting pattern. An empty list is a valid result.
    """
    k = derived.n_tilde
    if not 1 <= beta <= k:
        raise ValueError(f"beta must be in 1..{k}, got {beta}")
    rank = k - derived.k_tilde
    if beta > rank:
        # no beta columns can be independent; this emptiness is proven
        return PatternList(frozenset(), beta, exhaustive=True)

    if mode == "exhaustive":
        cols = derived._column_reps
        basis = derived.column_basis()
        found: list[tuple[int, ...]] = []
        chosen: list[int] = []

        def walk(start: int) -> None:
            if len(chosen) == beta:
                found.append(tuple(chosen))
                return
            last = k - (beta - len(chosen))
            for j in range(start, last + 1):
                lead = basis.insert(cols[j])
                if lead is not None:
                    chosen.append(j)
                    walk(j + 1)
                    chosen.pop()
                    basis.discard(lead)

        walk(0)
        patterns = frozenset(ErasurePattern.from_support(k, s) for s in found)
        return PatternList(patterns, beta, exhaustive=True)

    if mode != "randomized":
        raise ValueError(f"unknown mode {mode!r}")

    rng = random.Random(seed)
    h = derived.h_tilde
    found_set: set[ErasurePattern] = set()
    for _ in range(budget):
        perm = list(range(k))
        rng.shuffle(perm)
        permuted = h.submatrix(None, perm)
        _, _, pivots = rref(permuted)
        support = sorted(perm[j] for j in rng.sample(pivots, beta))
        base = ErasurePattern.from_support(k, support)
        for s in range(k):
            cand = base.shifted(s)
            if cand in found_set:
                continue
            if is_ml_correctable(derived, cand):
                found_set.add(cand)
    return PatternList(frozenset(found_set), beta, exhaustive=False)


class _BudgetExhausted(Exception):
    pass


def _exact_regular_subset(
    rows: Sequence[tuple[int, ...]], k: int, beta: int, budget: int
) -> list[tuple[int, ...]] | None:
    """Depth-first search for k distinct rows with every column sum beta.

    Rows are scanned in the given order with a take/skip branch per row.
    Pruning: a column already at beta rejects any further one there, and a
    column that cannot reach beta even if all remaining rows covering it
    are taken cuts the branch. Raises _BudgetExhausted after `budget` node
    expansions.
    """
    n_rows = len(rows)
    if n_rows < k:
        return None
    supports = [tuple(j for j, b in enumerate(r) if b) for r in rows]
    # suffix[i][j] = number of rows from index i on with a one in column j
    suffix = [[0] * k for _ in range(n_rows + 1)]
    for i in range(n_rows - 1, -1, -1):
        nxt = suffix[i + 1]
        cur = suffix[i] = nxt[:]
        for j in supports[i]:
            cur[j] = nxt[j] + 1
    colsum = [0] * k
    chosen: list[int] = []
    nodes = 0

    def dfs(i: int) -> bool:
        # recursion only on the take branch, so the depth stays below k;
        # skipping a row iterates in place
        nonlocal nodes
        while True:
            nodes += 1
            if nodes > budget:
                raise _BudgetExhausted
            need = k - len(chosen)
            if need == 0:
                return True
            if n_rows - i < need:
                return False
            sfx = suffix[i]
            for j in range(k):
                if colsum[j] + sfx[j] < beta:
                    return False
            sup = supports[i]
            if all(colsum[j] < beta for j in sup):
                for j in sup:
                    colsum[j] += 1
                chosen.append(i)
                if dfs(i + 1):
                    return True
                chosen.pop()
                for j in sup:
                    colsum[j] -= 1
            i += 1

    if dfs(0):
        return [rows[i] for i in chosen]
    return None


def _search_matrix(
    patterns: Sequence[tuple[int, ...]],
    k: int,
    beta: int,
    exact_budget: int,
    seed: int,
    subset_threshold: int,
    subset_tries: int,
) -> tuple[EMatrix | None, bool]:
    """Core of compute_matrix; also reports whether the search was complete.

    The second return value is True only when infeasibility (or the found
    solution) is proven: the exact search ran on the full pattern list and
    finished within budget.
    """
    rows = sorted(set(patterns))
    if not rows:
        return None, True
    # circulant shortcut: a pattern whose k cyclic shifts are all distinct
    # and all present yields a regular matrix immediately
    row_set = set(rows)
    for p in rows:
        shifts = [p[-s:] + p[:-s] if s else p for s in range(k)]
        if len(set(shifts)) == k and all(s in row_set for s in shifts):
            return EMatrix(tuple(shifts), beta), True

    if len(rows) <= subset_threshold:
        try:
            sol = _exact_regular_subset(rows, k, beta, exact_budget)
        except _BudgetExhausted:
            return None, False
        if sol is not None:
            return EMatrix(tuple(sol), beta), True
        return None, True

    rng = random.Random(seed)
    per_try = max(1, exact_budget // max(1, subset_tries))
    size = min(len(rows), max(4 * k, 64))
    for _ in range(subset_tries):
        subset = sorted(rng.sample(rows, size))
        try:
            sol = _exact_regular_subset(subset, k, beta, per_try)
        except _BudgetExhausted:
            sol = None
        if sol is not None:
            return EMatrix(tuple(sol), beta), False
    return None, False


def compute_matrix(
    L: PatternList,
    k: int,
    exact_budget: int = 20_000,
    seed: int = 0,
    subset_threshold: int = 4_000,
    subset_tries: int = 6,
) -> EMatrix | None:
    """Assemble a k x k beta-regular matrix from the listed patterns.

    Tries, in order: the circulant shortcut, exact backtracking over the
    whole (deduplicated) list when it is small enough, and otherwise exact
    backtracking over several random subsets. Returns None when nothing is
    found within budget; that is a valid "infeasible or unknown" outcome.
    """
    pats = [p.bits for p in L.patterns]
    if not pats:
        return None
    if any(len(p) != k for p in pats):
        raise ValueError("pattern length does not match k")
    found, _ = _search_matrix(
        pats, k, L.beta, exact_budget, seed, subset_threshold, subset_tries
    )
    return found


@dataclass(frozen=True)
class OptimizerConfig:
    seed: int = 0
    exhaustive_limit: int = 1_000_000
    pattern_budget: int = 48
    exact_budget: int = 20_000
    subset_threshold: int = 4_000
    subset_tries: int = 6
    min_distance_cap: int = 25
    keep_going: bool = False
    d_min: int | None = None
    d_tilde_min: int | None = None


@dataclass(frozen=True)
class OptimizationResult:
    """Outcome of the width scan plus the download-price reference values.

    `extended_e`/`extended_beta` are only set by keep-going runs that found
    a wider matrix after the point where the faithful scan stops; e_opt and
    beta_opt always describe the faithful result.
    """

    e_opt: EMatrix
    beta_opt: int
    theta_opt: Fraction
    theta_non_opt: Fraction
    theta_lb: Fraction
    theta_baseline: Fraction
    iterations: int
    exhaustive: bool
    d_min: int
    d_tilde_min: int
    extended_e: EMatrix | None = None
    extended_beta: int | None = None


def optimize_cpop(code: LinearCode, config: OptimizerConfig | None = None) -> OptimizationResult:
    """Scan widths beta = d_tilde_min - 1 .. rank(P) for the widest matrix.

    Each iteration lists correctable patterns and tries to assemble a
    regular matrix from them; a nonempty list that yields no matrix stops
    the scan (keep_going continues it, reporting any later success
    separately). The first iteration always succeeds: below the derived
    minimum distance every pattern is correctable and any shift-variant
    pattern closes into a circulant.
    """
    cfg = config or OptimizerConfig()
    derived = derived_code(code)
    dtm = cfg.d_tilde_min if cfg.d_tilde_min is not None else min_distance(
        code.p, cfg.min_distance_cap
    )
    dm = cfg.d_min if cfg.d_min is not None else min_distance(code.h, cfg.min_distance_cap)
    if dtm < 2:
        raise ValueError(
            "derived code has minimum distance 1: some message symbol appears in no "
            "parity equation, so no retrieval width is available"
        )
    k = code.k
    rank_p = derived.n_tilde - derived.k_tilde
    beta = dtm - 1
    e_opt: EMatrix | None = None
    beta_opt = beta
    iterations = 0
    exhaustive = True
    stopped = False
    ext_e: EMatrix | None = None
    ext_beta: int | None = None

    while beta <= rank_p:
        if not stopped:
            iterations += 1
        mode = "exhaustive" if math.comb(k, beta) <= cfg.exhaustive_limit else "randomized"
        iter_seed = cfg.seed * 1_000_003 + beta
        L = compute_erasure_pattern_list(derived, beta, mode, cfg.pattern_budget, iter_seed)
        if not L.exhaustive:
            exhaustive = False
        if L.patterns:
            pats = [p.bits for p in L.patterns]
            E, complete = _search_matrix(
                pats, k, beta, cfg.exact_budget, iter_seed, cfg.subset_threshold, cfg.subset_tries
            )
            if not complete:
                exhaustive = False
            if E is not None:
                if stopped:
                    ext_e, ext_beta = E, beta
                else:
                    e_opt, beta_opt = E, beta
            else:
                if not stopped:
                    stopped = True
                    if not cfg.keep_going:
                        break
        beta += 1

    if e_opt is None:
        raise RuntimeError(
            "no access matrix found even at the guaranteed initial width; "
            "raise pattern_budget"
        )
    n = code.n
    return OptimizationResult(
        e_opt=e_opt,
        beta_opt=beta_opt,
        theta_opt=Fraction(n, beta_opt),
        theta_non_opt=Fraction(n, dtm - 1),
        theta_lb=Fraction(n, n - k),
        theta_baseline=Fraction(n, dm - 1),
        iterations=iterations,
        exhaustive=exhaustive,
        d_min=dm,
        d_tilde_min=dtm,
        extended_e=ext_e,
        extended_beta=ext_beta,
    )


def cpop(n: int, d: int, beta: int, k: int) -> Fraction:
    """Downloaded symbols per retrieved symbol: n*d / (beta*k), exact."""
    if min(n, d, beta, k) <= 0:
        raise ValueError("all of n, d, beta, k must be positive")
    return Fraction(n * d, beta * k)


class ThetaBounds(NamedTuple):
    lower_bound: Fraction
    non_optimized: Fraction
    baseline: Fraction


def theta_bounds(code: LinearCode, d_min: int, d_tilde_min: int) -> ThetaBounds:
    """Reference download prices for a code.

    lower_bound is 1/(1 - R); non_optimized is the price at width
    d_tilde_min - 1, available without any search; baseline is the price
    n/(d_min - 1) of the scheme driven by the code's own minimum distance,
    which the width scan never exceeds.
    """
    if d_min < 2 or d_tilde_min < 2:
        raise ValueError("reference prices need d_min >= 2 and d_tilde_min >= 2")
    n, k = code.n, code.k
    return ThetaBounds(
        lower_bound=Fraction(n, n - k),
        non_optimized=Fraction(n, d_tilde_min - 1),
        baseline=Fraction(n, d_min - 1),
    )


def e_matrix_violations(e: EMatrix, derived: DerivedCode) -> list[str]:
    """Independent re-check of the three access-matrix conditions.

    Works from the raw entries only, so it exercises none of the search
    code above: row regularity, column regularity, and per-row erasure
    correctability by the derived code.
    """
    problems = []
    k = len(e.rows)
    if derived.n_tilde != k:
        return [f"matrix size {k} does not match code length {derived.n_tilde}"]
    for i, row in enumerate(e.rows):
        w = sum(1 for b in row if b)
        if w != e.beta:
            problems.append(f"row {i} has weight {w}, expected {e.beta}")
    for j in range(k):
        w = sum(1 for row in e.rows if row[j])
        if w != e.beta:
            problems.append(f"column {j} has weight {w}, expected {e.beta}")
    for i in range(k):
        if not is_ml_correctable(derived, ErasurePattern(e.rows[i])):
            problems.append(f"row {i} is not a correctable erasure pattern")
    return problems


def assert_valid_e_matrix(e: EMatrix, derived: DerivedCode) -> None:
    problems = e_matrix_violations(e, derived)
    if problems:
        raise ValueError("invalid access matrix: " + "; ".join(problems))
