"""Exact equilibrium solvers and search oracles.

Three independent ways of finding (or exhaustively listing) equilibria,
used both as standalone tools and as cross-checks for the reduction
pipeline:

* :func:`support_enumeration_bimatrix` -- exact Nash equilibria of small
  two-player games by trying every support pair in size order and solving
  the indifference/feasibility system in rational arithmetic.
* :func:`grid_enumerate_wsne` -- the complete list of grid profiles that
  a game's well-supported verifier accepts, for brute-force ground truth.
* :func:`brute_force_normal_nash` -- pure-profile search over a k-player
  game with an honest grid fallback; always returns *something* together
  with the tolerance it actually certifies.

All solvers return a :class:`SolverResult` whose profile has been
re-verified at the certified tolerance before being handed back.

:func:`lift_to_bimatrix` is the reverse witness generator: given a
polymatrix profile and the mapping produced by the imitation-game
reduction, it proposes a two-player profile for the big game.  The block
weights are biased so every block's best row earns the same leader payoff,
which makes the witness verify whenever the polymatrix profile was (close
to) exact; for a loose input profile verification may still fail, and the
caller is expected to check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product
from typing import Any, Iterable, Iterator, Sequence

from ._rational import rational
from .errors import (
    CapExceeded,
    DimensionMismatch,
    NoEquilibriumFound,
    ParameterError,
)
from .model import (
    BimatrixGame,
    NormalFormGame,
    PolymatrixGame,
    Rat,
    VerifyResult,
    iter_profiles,
    pure_strategy,
    validate_mixed,
)
from .reductions import GameMapping

EXACT_NASH = "exact-nash"
EPS_WSNE = "eps-wsne"

DEFAULT_SUPPORT_CAP = 12
DEFAULT_GRID_CAP = 200_000

Vector = tuple[Rat, ...]


# ---------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class SolverResult:
    """A profile plus the certificate the solver is willing to sign.

    ``certificate`` is :data:`EXACT_NASH` (``eps`` is zero) or
    :data:`EPS_WSNE` (``eps`` is the realized tolerance).  ``profile`` is a
    list of mixed strategies for normal-form/polymatrix games and an
    ``(x, y)`` pair for bimatrix games.
    """

    profile: Any
    certificate: str
    eps: Rat
    method: str

    def verify(self, game, clamped: Iterable[int] = ()) -> VerifyResult:
        """Re-check this result against ``game`` at the certified eps."""
        return _verify_profile(game, self.profile, self.eps, clamped)


def _verify_profile(game, profile, eps: Rat, clamped: Iterable[int] = ()) -> VerifyResult:
    if isinstance(game, BimatrixGame):
        x, y = profile
        return game.verify_wsne(x, y, eps, clamped=clamped)
    if isinstance(game, PolymatrixGame):
        return game.verify_wsne(profile, eps, clamped=clamped)
    if tuple(clamped):
        raise ParameterError("clamped players require a polymatrix or bimatrix game")
    return game.verify_wsne(profile, eps)


def realized_eps(game, profile, clamped: Iterable[int] = ()) -> Rat:
    """Smallest tolerance at which ``profile`` passes the verifier."""
    result = _verify_profile(game, profile, rational(0), clamped)
    return max((v.gap for v in result.violations), default=rational(0))


# ---------------------------------------------------------------------------
# exact rational linear algebra


def _solve_square(rows: list[list[Rat]], rhs: list[Rat]) -> list[Rat] | None:
    """Solve a square linear system exactly; ``None`` if singular."""
    n = len(rows)
    aug = [list(row) + [b] for row, b in zip(rows, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        prow = aug[col]
        for r in range(n):
            row = aug[r]
            if r != col and row[col] != 0:
                factor = row[col] / prow[col]
                for c in range(col, n + 1):
                    row[c] -= factor * prow[c]
    return [aug[i][n] / aug[i][i] for i in range(n)]


def _phase1_feasible(rows: list[list[Rat]], rhs: list[Rat], num_vars: int) -> list[Rat] | None:
    """Find ``z >= 0`` with ``rows @ z == rhs`` via phase-1 simplex.

    Bland's rule (lowest eligible index enters, lowest basis index breaks
    ratio ties) makes the walk deterministic and cycle-free, so the vertex
    returned is always the same one: the first vertex wins.
    """
    zero, one = rational(0), rational(1)
    m = len(rows)
    width = num_vars + m + 1
    tab: list[list[Rat]] = []
    for row, b in zip(rows, rhs):
        row = list(row)
        if b < 0:
            row = [-v for v in row]
            b = -b
        tab.append(row + [zero] * m + [b])
    for r in range(m):
        tab[r][num_vars + r] = one
    basis = list(range(num_vars, num_vars + m))
    # Phase-1 objective: minimize the sum of the artificial variables.
    cost = [zero] * width
    for row in tab:
        for c in range(num_vars):
            cost[c] -= row[c]
        cost[-1] -= row[-1]
    while True:
        enter = next((c for c in range(width - 1) if cost[c] < 0), None)
        if enter is None:
            break
        leave = None
        best = None
        for r in range(m):
            coeff = tab[r][enter]
            if coeff > 0:
                ratio = tab[r][-1] / coeff
                if best is None or ratio < best or (ratio == best and basis[r] < basis[leave]):
                    best = ratio
                    leave = r
        if leave is None:  # objective is bounded below by zero, so unreachable
            return None
        prow = tab[leave]
        inv = prow[enter]
        tab[leave] = prow = [v / inv for v in prow]
        for row in tab:
            if row is not prow and row[enter] != 0:
                factor = row[enter]
                for c in range(width):
                    row[c] -= factor * prow[c]
        if cost[enter] != 0:
            factor = cost[enter]
            for c in range(width):
                cost[c] -= factor * prow[c]
        basis[leave] = enter
    if cost[-1] != 0:  # leftover artificial mass: the system is infeasible
        return None
    z = [zero] * num_vars
    for r, var in enumerate(basis):
        if var < num_vars:
            z[var] = tab[r][-1]
    return z


# ---------------------------------------------------------------------------
# support enumeration


def _support_solution(
    matrix: Sequence[Sequence[Rat]],
    own: tuple[int, ...],
    opp: tuple[int, ...],
    n: int,
) -> list[Rat] | None:
    """Opponent mix supported inside ``opp`` making every ``own`` row best.

    ``matrix`` holds this player's payoffs (rows = own strategies, columns
    = opponent strategies).  Returns a full-length probability vector, or
    ``None`` when no such mix exists for this support pair.  Square
    indifference systems go through Gaussian elimination; everything else
    (and singular squares) goes through exact phase-1 simplex on the full
    feasibility system, whose inequalities say the shared row value beats
    every off-support row.
    """
    zero, one = rational(0), rational(1)
    own_set = frozenset(own)
    s = len(opp)
    if len(own) == s:
        rows: list[list[Rat]] = [[one] * s]
        rhs = [one]
        base = matrix[own[0]]
        for i in own[1:]:
            rows.append([matrix[i][j] - base[j] for j in opp])
            rhs.append(zero)
        sol = _solve_square(rows, rhs)
        if sol is not None:
            if any(q < 0 for q in sol):
                return None
            value = sum(base[j] * q for j, q in zip(opp, sol))
            for i in range(n):
                if i not in own_set:
                    if sum(matrix[i][j] * q for j, q in zip(opp, sol)) > value:
                        return None
            full = [zero] * n
            for j, q in zip(opp, sol):
                full[j] = q
            return full
    # Non-square support pair, or a singular indifference system: look for
    # any vertex of {q >= 0 on opp, sum q = 1, own rows tied at v, other
    # rows <= v} using slack variables and a free (split) row value v.
    num_slack = n - len(own)
    num_vars = s + 2 + num_slack
    rows = [[one] * s + [zero] * (2 + num_slack)]
    rhs = [one]
    slack = 0
    for i in range(n):
        coeffs = [matrix[i][j] for j in opp] + [-one, one] + [zero] * num_slack
        if i not in own_set:
            coeffs[s + 2 + slack] = one
            slack += 1
        rows.append(coeffs)
        rhs.append(zero)
    z = _phase1_feasible(rows, rhs, num_vars)
    if z is None:
        return None
    full = [zero] * n
    for idx, j in enumerate(opp):
        full[j] = z[idx]
    return full


def support_enumeration_bimatrix(
    game: BimatrixGame, cap: int = DEFAULT_SUPPORT_CAP
) -> SolverResult:
    """Exact Nash equilibrium of a small bimatrix game.

    Tries support pairs in size order (then lexicographically within a
    size) and returns the first pair admitting an exact solution, so the
    answer is deterministic.  Raises :class:`CapExceeded` when the game
    is larger than ``cap`` strategies per side, and
    :class:`NoEquilibriumFound` if the search exhausts -- which existence
    of Nash equilibria rules out, so that exception always means an
    internal error and carries diagnostics.
    """
    n = game.n
    if n > cap:
        raise CapExceeded(f"support enumeration handles at most {cap} strategies, game has {n}")
    dense = game.to_dense()
    a = dense.a
    b_cols = [[dense.b[r][c] for r in range(n)] for c in range(n)]
    pairs_tried = 0
    for size1 in range(1, n + 1):
        for size2 in range(1, n + 1):
            for own in combinations(range(n), size1):
                for opp in combinations(range(n), size2):
                    pairs_tried += 1
                    y = _support_solution(a, own, opp, n)
                    if y is None:
                        continue
                    x = _support_solution(b_cols, opp, own, n)
                    if x is None:
                        continue
                    result = SolverResult(
                        profile=(tuple(x), tuple(y)),
                        certificate=EXACT_NASH,
                        eps=rational(0),
                        method="support-enumeration",
                    )
                    check = result.verify(game)
                    if not check.ok:
                        raise NoEquilibriumFound(
                            "support enumeration produced a profile that fails verification",
                            diagnostics={
                                "supports": (own, opp),
                                "violations": check.violations,
                            },
                        )
                    return result
    raise NoEquilibriumFound(
        "support enumeration exhausted every support pair; since finite games "
        "always have equilibria, this is an internal error",
        diagnostics={"n": n, "pairs_tried": pairs_tried, "encoding": game.encoding},
    )


# ---------------------------------------------------------------------------
# grid enumeration


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _simplex_grid(n: int, denominator: int) -> list[Vector]:
    return [
        tuple(rational(c, denominator) for c in comp)
        for comp in _compositions(denominator, n)
    ]


def _grid_denominator(step) -> int:
    step = rational(step)
    if not 0 < step <= 1 or step.numerator != 1:
        raise ParameterError(f"grid step must be 1/D for a positive integer D, got {step}")
    return int(step.denominator)


def grid_enumerate_wsne(
    game,
    eps: Rat,
    step,
    clamped: Iterable[int] = (),
    cap: int = DEFAULT_GRID_CAP,
):
    """All grid profiles the verifier accepts at tolerance ``eps``.

    ``step`` must be ``1/D``; each player's mixed strategy then ranges over
    the points of its simplex with coordinates in multiples of ``1/D``.
    The stream contains *exactly* the grid profiles passing
    ``verify_wsne(profile, eps, clamped)``, in lexicographic order.
    Raises :class:`CapExceeded` up front when the full grid would have
    more than ``cap`` profiles.
    """
    denominator = _grid_denominator(step)
    eps = rational(eps)
    clamped = tuple(clamped)
    if clamped and not isinstance(game, (BimatrixGame, PolymatrixGame)):
        raise ParameterError("clamped players require a polymatrix or bimatrix game")
    if isinstance(game, BimatrixGame):
        counts: tuple[int, ...] = (game.n, game.n)
    else:
        counts = tuple(game.strategy_counts)
    total = math.prod(math.comb(denominator + n - 1, n - 1) for n in counts)
    if total > cap:
        raise CapExceeded(f"grid has {total} profiles (cap {cap})")
    grids = [_simplex_grid(n, denominator) for n in counts]

    def stream():
        for combo in product(*grids):
            profile = combo if isinstance(game, BimatrixGame) else list(combo)
            if _verify_profile(game, profile, eps, clamped).ok:
                yield profile

    return stream()


# ---------------------------------------------------------------------------
# brute force for k-player games


def brute_force_normal_nash(
    game: NormalFormGame,
    grid_denominator: int = 2,
    cap: int = DEFAULT_GRID_CAP,
) -> SolverResult:
    """Pure-profile search with an honest mixed-grid fallback.

    Returns the first pure Nash equilibrium in lexicographic order when
    one exists.  Otherwise scans the mixed grid with the given denominator
    (skipped if it would exceed ``cap`` profiles) and returns the best
    profile seen anywhere, certified at its *realized* tolerance -- the
    smallest eps the verifier actually accepts.
    """
    counts = tuple(game.strategy_counts)
    best_profile = None
    best_eps = None
    for pures in iter_profiles(counts):
        profile = [pure_strategy(n, j) for n, j in zip(counts, pures)]
        gap = realized_eps(game, profile)
        if gap == 0:
            return SolverResult(profile, EXACT_NASH, rational(0), "pure-search")
        if best_eps is None or gap < best_eps:
            best_profile, best_eps = profile, gap
    total = math.prod(math.comb(grid_denominator + n - 1, n - 1) for n in counts)
    if total <= cap:
        grids = [_simplex_grid(n, grid_denominator) for n in counts]
        for combo in product(*grids):
            profile = list(combo)
            gap = realized_eps(game, profile)
            if gap == 0:
                return SolverResult(profile, EXACT_NASH, rational(0), "grid-search")
            if gap < best_eps:
                best_profile, best_eps = profile, gap
    return SolverResult(best_profile, EPS_WSNE, best_eps, "grid-search")


# ---------------------------------------------------------------------------
# polymatrix profile -> bimatrix witness


def lift_to_bimatrix(
    g2: BimatrixGame,
    profile: Sequence[Sequence[Rat]],
    mapping: GameMapping,
) -> tuple[Vector, Vector]:
    """Propose a two-player profile of ``g2`` encoding a polymatrix profile.

    The follower plays each block ``i`` with weight ``1/m`` corrected by
    ``(u_i - mean(u))/(alpha m)``, where ``u_i`` is block ``i``'s best
    polymatrix payoff against ``profile``: the correction cancels the
    spread in block-best leader payoffs, so every supported row is within
    ``2 eps_2 / m`` of optimal whenever ``profile`` is exact.  The leader
    plays uniformly on the follower's support, which makes imitation
    exactly optimal.  For loose input profiles the witness may fail
    verification; callers are expected to verify at their eps.
    """
    if mapping.stage not in ("bimatrixify", "full"):
        raise ParameterError(f"mapping stage {mapping.stage!r} does not target a bimatrix game")
    if g2.encoding != "structured":
        raise ParameterError("witness generation needs the structured (block) encoding")
    blocks = mapping.block_sizes
    m = len(blocks)
    alpha = mapping.alpha
    if g2.n != sum(blocks):
        raise DimensionMismatch("mapping blocks do not match the bimatrix game size")
    if len(profile) != m:
        raise DimensionMismatch(f"profile has {len(profile)} strategies, expected {m}")
    profile = [
        validate_mixed(p, n, what=f"block {i} strategy")
        for i, (p, n) in enumerate(zip(profile, blocks))
    ]
    zero = rational(0)
    payoff = [[zero] * n for n in blocks]
    for (i, j), mat in g2.edges.items():
        pj = profile[j]
        ui = payoff[i]
        for r in range(blocks[i]):
            ui[r] += sum(mat[r][c] * pj[c] for c in range(blocks[j]))
    block_best = [max(ui) for ui in payoff]
    mean_best = sum(block_best) / m
    weights = [rational(1, m) + (u - mean_best) / (alpha * m) for u in block_best]
    if any(w <= 0 for w in weights):
        raise ParameterError("alpha is too small to rebalance the block weights")
    y: list[Rat] = []
    for w, p in zip(weights, profile):
        y.extend(w * v for v in p)
    support = [r for r, v in enumerate(y) if v > 0]
    share = rational(1, len(support))
    x = [zero] * len(y)
    for r in support:
        x[r] = share
    return tuple(x), tuple(y)
