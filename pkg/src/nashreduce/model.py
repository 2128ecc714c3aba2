"""Game classes and exact equilibrium verification.

Three game classes are modeled, mirroring the reduction pipeline:

* :class:`NormalFormGame` -- k players, payoff tensors stored as one matrix
  per player (rows: own pure strategies, columns: linearized opponent
  profiles), entries in ``[0, 1]``;
* :class:`PolymatrixGame` -- pairwise interactions only; each directed edge
  ``(i, i')`` carries an ``n_i x n_i'`` matrix, entries in ``[-1, 2]``;
* :class:`BimatrixGame` -- two players; either dense ``(A, B)`` matrices or a
  structured block form (very negative diagonal blocks, polymatrix edge
  matrices off the diagonal, identity follower payoff) that avoids
  materializing huge matrices.

All values are exact rationals; comparisons in the verifier are exact.  A
mixed strategy is a tuple of rationals that are nonnegative and sum to one.

A profile is an *epsilon-well-supported Nash equilibrium* (eps-WSNE) when
every pure strategy played with positive probability earns within ``eps`` of
that player's best pure response.  ``verify_*`` methods check this exactly
and return the violations found.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Iterator, Mapping, Sequence

from ._rational import rational
from .errors import DegenerateGame, DimensionMismatch, ParameterError, SizeBudgetExceeded

Rat = Any  # rational of either backend
Vector = tuple  # tuple[Rat, ...]
Matrix = tuple  # tuple[tuple[Rat, ...], ...]

__all__ = [
    "Role",
    "PlayerInfo",
    "Violation",
    "VerifyResult",
    "NormalFormGame",
    "PolymatrixGame",
    "BimatrixGame",
    "make_matrix",
    "mat_vec",
    "validate_mixed",
    "profile_index",
    "profile_unindex",
    "iter_profiles",
    "random_normal_form",
    "random_polymatrix",
    "uniform_strategy",
    "pure_strategy",
]


class Role(str, Enum):
    """What a polymatrix player stands for in a reduction."""

    ORIGINAL = "original"
    MEDIATOR = "mediator"
    GADGET_AUX = "gadget_aux"
    PLAIN = "plain"


@dataclass(frozen=True)
class PlayerInfo:
    """Role plus provenance for one polymatrix player."""

    role: Role = Role.PLAIN
    scope: str = ""


# ---------------------------------------------------------------------------
# vectors, matrices, mixed strategies


def make_matrix(rows: Iterable[Iterable[Rat]]) -> Matrix:
    """Freeze rows into a rectangular tuple-of-tuples matrix."""
    mat = tuple(tuple(row) for row in rows)
    if mat:
        width = len(mat[0])
        if any(len(row) != width for row in mat):
            raise DimensionMismatch("matrix rows have unequal lengths")
    return mat


def mat_vec(matrix: Matrix, vec: Sequence[Rat]) -> Vector:
    """Exact matrix-vector product."""
    if matrix and len(matrix[0]) != len(vec):
        raise DimensionMismatch(
            f"matrix width {len(matrix[0])} != vector length {len(vec)}"
        )
    return tuple(sum(a * x for a, x in zip(row, vec)) for row in matrix)


def _check_range(entries: Iterable[Rat], lo, hi, what: str) -> None:
    for x in entries:
        if x < lo or x > hi:
            raise ParameterError(f"{what} entry {x} outside [{lo}, {hi}]")


def validate_mixed(vec: Sequence[Rat], length: int | None = None, what: str = "mixed strategy") -> Vector:
    """Check nonnegativity and unit sum; return the frozen tuple."""
    v = tuple(vec)
    if length is not None and len(v) != length:
        raise DimensionMismatch(f"{what} has length {len(v)}, expected {length}")
    if any(x < 0 for x in v):
        raise ParameterError(f"{what} has a negative entry")
    if sum(v) != 1:
        raise ParameterError(f"{what} does not sum to 1")
    return v


def uniform_strategy(n: int) -> Vector:
    """The uniform mixed strategy over ``n`` pure strategies."""
    if n < 1:
        raise ParameterError("need at least one pure strategy")
    return tuple(rational(1, n) for _ in range(n))


def pure_strategy(n: int, j: int) -> Vector:
    """The pure strategy ``j`` as a mixed-strategy vector of length ``n``."""
    if not 0 <= j < n:
        raise ParameterError(f"pure strategy {j} outside range(0, {n})")
    return tuple(rational(int(i == j)) for i in range(n))


# ---------------------------------------------------------------------------
# pure-profile linearization: first count is most significant


def profile_index(counts: Sequence[int], strategies: Sequence[int]) -> int:
    """Linearize a pure profile; the first listed player varies slowest."""
    if len(counts) != len(strategies):
        raise DimensionMismatch("profile length != number of players")
    idx = 0
    for n, s in zip(counts, strategies):
        if not 0 <= s < n:
            raise ParameterError(f"pure strategy {s} outside range(0, {n})")
        idx = idx * n + s
    return idx


def profile_unindex(counts: Sequence[int], index: int) -> tuple[int, ...]:
    """Inverse of :func:`profile_index`."""
    out = []
    for n in reversed(counts):
        index, s = divmod(index, n)
        out.append(s)
    if index:
        raise ParameterError("profile index out of range")
    return tuple(reversed(out))


def iter_profiles(counts: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """All pure profiles, in :func:`profile_index` order."""
    return itertools.product(*(range(n) for n in counts))


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class Violation:
    """One supported pure strategy that is more than eps below the best response."""

    player: int
    strategy: int
    payoff: Rat
    best_strategy: int
    best_payoff: Rat

    @property
    def gap(self) -> Rat:
        return self.best_payoff - self.payoff


@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    violations: tuple[Violation, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def _wsne_violations(
    payoff_vectors: Sequence[Vector],
    profile: Sequence[Vector],
    eps: Rat,
    skip: frozenset[int] = frozenset(),
) -> tuple[Violation, ...]:
    found = []
    for i, (u, p) in enumerate(zip(payoff_vectors, profile)):
        if i in skip:
            continue
        best = max(range(len(u)), key=u.__getitem__)
        floor = u[best] - eps
        for j, pj in enumerate(p):
            if pj > 0 and u[j] < floor:
                found.append(Violation(i, j, u[j], best, u[best]))
    return tuple(found)


# ---------------------------------------------------------------------------
# normal-form games


class NormalFormGame:
    """A k-player game in normal form with payoffs in ``[0, 1]``.

    ``payoffs[i]`` is an ``n_i x prod(n_j for j != i)`` matrix; its columns
    enumerate the opponents' pure profiles in :func:`profile_index` order
    over the opponent players listed in increasing player order (so the
    lowest-numbered opponent varies slowest).
    """

    def __init__(self, strategy_counts: Sequence[int], payoffs: Sequence[Matrix]):
        counts = tuple(int(n) for n in strategy_counts)
        if len(counts) < 1:
            raise ParameterError("a normal-form game needs at least one player")
        if any(n < 1 for n in counts):
            raise ParameterError("every player needs at least one pure strategy")
        mats = tuple(make_matrix(m) for m in payoffs)
        if len(mats) != len(counts):
            raise DimensionMismatch("need exactly one payoff matrix per player")
        for i, mat in enumerate(mats):
            rows = counts[i]
            cols = 1
            for j, n in enumerate(counts):
                if j != i:
                    cols *= n
            if len(mat) != rows or (rows and len(mat[0]) != cols):
                raise DimensionMismatch(
                    f"player {i} payoff matrix must be {rows}x{cols}"
                )
            _check_range((x for row in mat for x in row), 0, 1, f"player {i} payoff")
        self.strategy_counts = counts
        self.payoffs = mats

    @property
    def k(self) -> int:
        return len(self.strategy_counts)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, NormalFormGame)
            and self.strategy_counts == other.strategy_counts
            and self.payoffs == other.payoffs
        )

    def __repr__(self) -> str:
        return f"NormalFormGame(counts={self.strategy_counts})"

    def opponent_counts(self, i: int) -> tuple[int, ...]:
        return tuple(n for j, n in enumerate(self.strategy_counts) if j != i)

    def opponent_index(self, i: int, opponent_profile: Sequence[int]) -> int:
        """Column index for a pure profile of everyone except player ``i``."""
        return profile_index(self.opponent_counts(i), opponent_profile)

    def joint_opponent_distribution(self, i: int, profile: Sequence[Vector]) -> Vector:
        """Product distribution of all players except ``i`` over their profiles."""
        others = [p for j, p in enumerate(profile) if j != i]
        out = []
        for combo in itertools.product(*others):
            prod = 1
            for x in combo:
                prod = prod * x
            out.append(prod)
        return tuple(out)

    def expected_payoffs(self, profile: Sequence[Vector]) -> list[Vector]:
        """Expected payoff of each pure strategy of each player, exactly."""
        prof = self._checked_profile(profile)
        return [
            mat_vec(self.payoffs[i], self.joint_opponent_distribution(i, prof))
            for i in range(self.k)
        ]

    def verify_wsne(self, profile: Sequence[Vector], eps: Rat) -> VerifyResult:
        vectors = self.expected_payoffs(profile)
        bad = _wsne_violations(vectors, profile, eps)
        return VerifyResult(not bad, bad)

    def _checked_profile(self, profile: Sequence[Vector]) -> list[Vector]:
        if len(profile) != self.k:
            raise DimensionMismatch("profile length != number of players")
        return [
            validate_mixed(p, n, what=f"player {i} strategy")
            for i, (p, n) in enumerate(zip(profile, self.strategy_counts))
        ]


# ---------------------------------------------------------------------------
# polymatrix games


class PolymatrixGame:
    """A polymatrix game: payoffs are sums of pairwise interactions.

    ``edges[(i, i')]`` is the ``n_i x n_i'`` matrix paying player ``i`` for
    the interaction with player ``i'``.  Entries lie in ``[-1, 2]``.  Edges
    whose matrix is all zeros are never stored (the constructor drops them,
    keeping the representation canonical).  The empty game (zero players) is
    allowed.
    """

    def __init__(
        self,
        strategy_counts: Sequence[int],
        edges: Mapping[tuple[int, int], Matrix],
        players: Sequence[PlayerInfo] | None = None,
    ):
        counts = tuple(int(n) for n in strategy_counts)
        if any(n < 2 for n in counts):
            raise ParameterError("every polymatrix player needs at least two pure strategies")
        m = len(counts)
        infos = tuple(players) if players is not None else tuple(PlayerInfo() for _ in counts)
        if len(infos) != m:
            raise DimensionMismatch("need exactly one PlayerInfo per player")
        kept: dict[tuple[int, int], Matrix] = {}
        for (i, j), mat in edges.items():
            if i == j:
                raise ParameterError(f"self-edge ({i}, {j}) is not allowed")
            if not (0 <= i < m and 0 <= j < m):
                raise ParameterError(f"edge ({i}, {j}) references a missing player")
            frozen = make_matrix(mat)
            if len(frozen) != counts[i] or len(frozen[0]) != counts[j]:
                raise DimensionMismatch(
                    f"edge ({i}, {j}) matrix must be {counts[i]}x{counts[j]}"
                )
            _check_range(
                (x for row in frozen for x in row), -1, 2, f"edge ({i}, {j})"
            )
            if any(x != 0 for row in frozen for x in row):
                kept[(i, j)] = frozen
        self.strategy_counts = counts
        self.edges = kept
        self.players = infos

    @property
    def m(self) -> int:
        return len(self.strategy_counts)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PolymatrixGame)
            and self.strategy_counts == other.strategy_counts
            and self.edges == other.edges
            and self.players == other.players
        )

    def __repr__(self) -> str:
        return f"PolymatrixGame(m={self.m}, edges={len(self.edges)})"

    def out_edges(self, i: int) -> list[tuple[int, Matrix]]:
        return [(j, mat) for (a, j), mat in self.edges.items() if a == i]

    def expected_payoffs(self, profile: Sequence[Vector]) -> list[Vector]:
        prof = self._checked_profile(profile)
        out = []
        for i, n in enumerate(self.strategy_counts):
            u = [0] * n
            for j, mat in self.out_edges(i):
                contrib = mat_vec(mat, prof[j])
                u = [a + b for a, b in zip(u, contrib)]
            out.append(tuple(u))
        return out

    def verify_wsne(
        self,
        profile: Sequence[Vector],
        eps: Rat,
        clamped: Iterable[int] = (),
    ) -> VerifyResult:
        """Check eps-well-supportedness; ``clamped`` players are exempt.

        Clamped players stand for gadget inputs: their strategies still feed
        everyone else's expected payoffs, but they are not required to be
        best-responding themselves.
        """
        vectors = self.expected_payoffs(profile)
        bad = _wsne_violations(vectors, profile, eps, skip=frozenset(clamped))
        return VerifyResult(not bad, bad)

    def payoff_range(self) -> tuple[Rat, Rat]:
        """(min, max) payoff entry over all edges; (0, 0) when there are none."""
        lo, hi = 0, 0
        for mat in self.edges.values():
            for row in mat:
                for x in row:
                    if x < lo:
                        lo = x
                    if x > hi:
                        hi = x
        return lo, hi

    def _checked_profile(self, profile: Sequence[Vector]) -> list[Vector]:
        if len(profile) != self.m:
            raise DimensionMismatch("profile length != number of players")
        return [
            validate_mixed(p, n, what=f"player {i} strategy")
            for i, (p, n) in enumerate(zip(profile, self.strategy_counts))
        ]


# ---------------------------------------------------------------------------
# bimatrix games


class BimatrixGame:
    """A two-player game, stored densely or in structured block form.

    Dense: payoff matrices ``A`` (row player / leader) and ``B`` (column
    player / follower), both ``N x N`` here (square because the reduction
    produces square games).

    Structured: the block imitation form produced by reducing a polymatrix
    game.  The leader's matrix has ``-alpha`` on every entry of each diagonal
    block and the polymatrix edge matrix ``M^{i,i'}`` as block ``(i, i')``;
    the follower's matrix is the identity.  With ``normalized=True`` the game
    instead stands for the affine image ``v -> (v + alpha) / divisor`` of
    both matrices, which maps all payoffs into ``[0, 1]``.

    The structured form never materializes ``N x N`` matrices: expected
    payoffs and single entries are computed from the blocks on demand.
    """

    def __init__(self):
        raise TypeError("use BimatrixGame.dense(...) or BimatrixGame.structured(...)")

    # -- constructors

    @classmethod
    def dense(cls, a: Matrix, b: Matrix) -> "BimatrixGame":
        self = object.__new__(cls)
        a = make_matrix(a)
        b = make_matrix(b)
        if not a or len(a) != len(a[0]):
            raise DimensionMismatch("dense bimatrix games must be square and nonempty")
        if len(b) != len(a) or len(b[0]) != len(a[0]):
            raise DimensionMismatch("A and B must have identical shape")
        self.encoding = "dense"
        self.a = a
        self.b = b
        self.n = len(a)
        self.block_sizes = None
        self.alpha = None
        self.edges = None
        self.normalized = False
        self.divisor = None
        return self

    @classmethod
    def structured(
        cls,
        block_sizes: Sequence[int],
        alpha: Rat,
        edges: Mapping[tuple[int, int], Matrix],
        normalized: bool = False,
        divisor: Rat | None = None,
    ) -> "BimatrixGame":
        self = object.__new__(cls)
        sizes = tuple(int(n) for n in block_sizes)
        if not sizes or any(n < 1 for n in sizes):
            raise ParameterError("block sizes must be positive")
        if alpha <= 0:
            raise ParameterError("alpha must be positive")
        if normalized:
            if divisor is None or divisor <= 0:
                raise ParameterError("normalized games need a positive divisor")
        elif divisor is not None:
            raise ParameterError("divisor is only meaningful for normalized games")
        m = len(sizes)
        kept: dict[tuple[int, int], Matrix] = {}
        for (i, j), mat in edges.items():
            if i == j:
                raise ParameterError("diagonal blocks are implied; do not pass them")
            if not (0 <= i < m and 0 <= j < m):
                raise ParameterError(f"edge ({i}, {j}) references a missing block")
            frozen = make_matrix(mat)
            if len(frozen) != sizes[i] or len(frozen[0]) != sizes[j]:
                raise DimensionMismatch(
                    f"edge ({i}, {j}) matrix must be {sizes[i]}x{sizes[j]}"
                )
            if any(x != 0 for row in frozen for x in row):
                kept[(i, j)] = frozen
        self.encoding = "structured"
        self.a = None
        self.b = None
        self.n = sum(sizes)
        self.block_sizes = sizes
        self.alpha = alpha
        self.edges = kept
        self.normalized = bool(normalized)
        self.divisor = divisor
        return self

    # -- shared interface

    @property
    def num_blocks(self) -> int:
        if self.block_sizes is None:
            raise ParameterError("dense games have no block structure")
        return len(self.block_sizes)

    def block_offset(self, i: int) -> int:
        return sum(self.block_sizes[:i])

    def strategy_index(self, i: int, j: int) -> int:
        """Map pure strategy ``j`` of polymatrix player ``i`` into ``[N]``."""
        if not 0 <= j < self.block_sizes[i]:
            raise ParameterError(f"strategy {j} outside block {i}")
        return self.block_offset(i) + j

    def block_of(self, s: int) -> tuple[int, int]:
        """Inverse of :meth:`strategy_index`."""
        off = 0
        for i, n in enumerate(self.block_sizes):
            if s < off + n:
                return i, s - off
            off += n
        raise ParameterError(f"strategy {s} outside range(0, {self.n})")

    def __eq__(self, other) -> bool:
        if not isinstance(other, BimatrixGame) or self.encoding != other.encoding:
            return False
        if self.encoding == "dense":
            return self.a == other.a and self.b == other.b
        return (
            self.block_sizes == other.block_sizes
            and self.alpha == other.alpha
            and self.edges == other.edges
            and self.normalized == other.normalized
            and self.divisor == other.divisor
        )

    def __repr__(self) -> str:
        return f"BimatrixGame(encoding={self.encoding!r}, n={self.n})"

    def _norm(self, value: Rat) -> Rat:
        if self.normalized:
            return (value + self.alpha) / self.divisor
        return value

    def entry(self, player: int, row: int, col: int) -> Rat:
        """Payoff matrix entry for ``player`` (0 = leader, 1 = follower)."""
        if player not in (0, 1):
            raise ParameterError("player must be 0 (leader) or 1 (follower)")
        if not (0 <= row < self.n and 0 <= col < self.n):
            raise ParameterError("entry indices out of range")
        if self.encoding == "dense":
            return self.a[row][col] if player == 0 else self.b[row][col]
        if player == 1:
            return self._norm(1 if row == col else 0)
        bi, ji = self.block_of(row)
        bj, jj = self.block_of(col)
        if bi == bj:
            return self._norm(-self.alpha)
        mat = self.edges.get((bi, bj))
        return self._norm(mat[ji][jj] if mat is not None else 0)

    def to_dense(self, max_entries: int = 4_000_000) -> "BimatrixGame":
        """Materialize a dense copy (for small games and tests)."""
        if self.encoding == "dense":
            return self
        if self.n * self.n > max_entries:
            raise SizeBudgetExceeded(
                f"dense form would need {self.n * self.n} entries (> {max_entries})"
            )
        a = [[self.entry(0, r, c) for c in range(self.n)] for r in range(self.n)]
        b = [[self.entry(1, r, c) for c in range(self.n)] for r in range(self.n)]
        return BimatrixGame.dense(a, b)

    def expected_payoffs(self, x: Sequence[Rat], y: Sequence[Rat]) -> tuple[Vector, Vector]:
        """(leader payoff vector ``A y``, follower payoff vector ``B^T x``)."""
        x = validate_mixed(x, self.n, what="leader strategy")
        y = validate_mixed(y, self.n, what="follower strategy")
        if self.encoding == "dense":
            u1 = mat_vec(self.a, y)
            u2 = tuple(
                sum(self.b[r][c] * x[r] for r in range(self.n)) for c in range(self.n)
            )
            return u1, u2
        u1: list[Rat] = []
        offsets = [self.block_offset(i) for i in range(self.num_blocks)]
        masses = [
            sum(y[offsets[i] + j] for j in range(n))
            for i, n in enumerate(self.block_sizes)
        ]
        for i, n in enumerate(self.block_sizes):
            base = [-self.alpha * masses[i]] * n
            for (a, b), mat in self.edges.items():
                if a != i:
                    continue
                yb = y[offsets[b] : offsets[b] + self.block_sizes[b]]
                contrib = mat_vec(mat, yb)
                base = [p + q for p, q in zip(base, contrib)]
            u1.extend(base)
        u2 = tuple(x)  # follower payoff is B^T x = x for the identity B
        if self.normalized:
            u1 = [self._norm_payoff(v) for v in u1]
            u2 = tuple(self._norm_payoff(v) for v in u2)
        return tuple(u1), u2

    def _norm_payoff(self, value: Rat) -> Rat:
        # expected payoff of the affine-mapped game: (v + alpha * 1) / divisor
        return (value + self.alpha) / self.divisor

    def verify_wsne(
        self,
        x: Sequence[Rat],
        y: Sequence[Rat],
        eps: Rat,
        clamped: Iterable[int] = (),
    ) -> VerifyResult:
        u1, u2 = self.expected_payoffs(x, y)
        bad = _wsne_violations([u1, u2], [tuple(x), tuple(y)], eps, skip=frozenset(clamped))
        return VerifyResult(not bad, bad)

    def payoff_range(self) -> tuple[Rat, Rat]:
        if self.encoding == "dense":
            entries = [x for row in self.a for x in row] + [
                x for row in self.b for x in row
            ]
            return min(entries), max(entries)
        lo, hi = -self.alpha, 1
        for mat in self.edges.values():
            for row in mat:
                for x in row:
                    if x > hi:
                        hi = x
        return self._norm(lo), self._norm(hi)


# ---------------------------------------------------------------------------
# random instances (for tests and the CLI); deterministic given a seed


def _rng(seed_or_rng) -> random.Random:
    if isinstance(seed_or_rng, random.Random):
        return seed_or_rng
    return random.Random(seed_or_rng)


def random_normal_form(
    seed_or_rng,
    strategy_counts: Sequence[int],
    denominator: int = 100,
) -> NormalFormGame:
    """A normal-form game with independent uniform entries ``j/denominator`` in [0, 1]."""
    rng = _rng(seed_or_rng)
    counts = tuple(strategy_counts)
    payoffs = []
    for i, n in enumerate(counts):
        cols = 1
        for j, c in enumerate(counts):
            if j != i:
                cols *= c
        payoffs.append(
            [
                [rational(rng.randrange(denominator + 1), denominator) for _ in range(cols)]
                for _ in range(n)
            ]
        )
    return NormalFormGame(counts, payoffs)


def random_polymatrix(
    seed_or_rng,
    strategy_counts: Sequence[int],
    denominator: int = 100,
    lo: Rat | int = 0,
    hi: Rat | int = 1,
) -> PolymatrixGame:
    """A complete polymatrix game with uniform entries in ``[lo, hi]`` (within [-1, 2])."""
    rng = _rng(seed_or_rng)
    counts = tuple(strategy_counts)
    if lo < -1 or hi > 2 or lo > hi:
        raise ParameterError("entry range must satisfy -1 <= lo <= hi <= 2")
    span = hi - lo
    edges = {}
    for i in range(len(counts)):
        for j in range(len(counts)):
            if i == j:
                continue
            edges[(i, j)] = [
                [
                    lo + span * rational(rng.randrange(denominator + 1), denominator)
                    for _ in range(counts[j])
                ]
                for _ in range(counts[i])
            ]
    return PolymatrixGame(counts, edges)
