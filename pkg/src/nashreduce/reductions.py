"""Two-stage reduction from k-player games to two-player games.

Stage one (``linearize``) turns a k-player normal-form game into a
polymatrix game: each original player keeps its strategies, and one binary
*mediator* player per (player, opposing pure profile) is forced -- by a
chain of multiplication gadgets -- to carry the probability that those
opponents jointly play that profile.  Paying each original through its
mediators makes every payoff a *sum* of pairwise terms while preserving
well-supported equilibria up to a controlled tolerance loss.

Stage two (``bimatrixify``) folds any polymatrix game into a two-player
*imitation* game: the column player picks a (player, strategy) pair of the
polymatrix game and is paid to imitate the row player, while the row player
earns the polymatrix payoff of the pair it picks, minus a steep penalty
``alpha`` for colliding with the column player's block.  Equilibria spread
the column player across all blocks with near-equal mass, so renormalizing
its block masses recovers a polymatrix profile.

Both stages emit a :class:`GameMapping` (where each source player/strategy
landed, plus what is needed to reverse the trip) and a
:class:`ReductionParams` ledger of the exact tolerances involved.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Any, Sequence

from ._rational import rational, rational_str
from .errors import (
    DegenerateGame,
    DimensionMismatch,
    ParameterError,
    SizeBudgetExceeded,
    ZeroBlockMass,
)
from .gadgets import (
    DEFAULT_PLAYER_BUDGET,
    PLAYER_BUDGET_ENV,
    GadgetCircuit,
    Tap,
)
from .model import (
    BimatrixGame,
    NormalFormGame,
    PolymatrixGame,
    Role,
    profile_unindex,
    validate_mixed,
)
from .multipliers import build_multiplication_chain, get_params, predicted_player_count

Rat = Any

__all__ = [
    "GameMapping",
    "ReductionParams",
    "compute_eps_m",
    "estimate_linearized_players",
    "linearize",
    "lift_to_polymatrix",
    "recover_from_polymatrix",
    "bimatrixify",
    "normalize_bimatrix",
    "recover_from_bimatrix",
    "reduce_full",
    "recover_full",
]

STAGES = ("linearize", "bimatrixify", "full")


@dataclass(frozen=True)
class ReductionParams:
    """Exact tolerances and derived constants of a reduction.

    ``eps_m`` is always present; the k-player fields (``eps_k``,
    ``construction``) are set by :func:`linearize`, the two-player fields
    (``eps_2``, ``m``, ``N``, ``alpha``, ``divisor``) by
    :func:`bimatrixify`, and :func:`reduce_full` sets them all.
    """

    eps_m: Rat
    eps_k: Rat | None = None
    construction: str | None = None
    eps_2: Rat | None = None
    m: int | None = None
    N: int | None = None
    alpha: Rat | None = None
    divisor: Rat | None = None

    @property
    def eps_2_normalized(self) -> Rat | None:
        """Tolerance to verify at in the normalized two-player game."""
        if self.eps_2 is None or self.divisor is None:
            return None
        return self.eps_2 / self.divisor

    def ledger_lines(self) -> list[str]:
        """Human-readable ``name = value`` lines, exact rationals throughout."""
        lines = []
        if self.construction is not None:
            lines.append(f"construction = {self.construction}")
        if self.eps_k is not None:
            lines.append(f"eps_k = {rational_str(self.eps_k)}")
        lines.append(f"eps_m = {rational_str(self.eps_m)}")
        if self.m is not None:
            lines.append(f"m = {self.m}")
        if self.N is not None:
            lines.append(f"N = {self.N}")
        if self.eps_2 is not None:
            lines.append(f"eps_2 = {rational_str(self.eps_2)}")
        if self.alpha is not None:
            lines.append(f"alpha = {rational_str(self.alpha)}")
        if self.divisor is not None:
            lines.append(f"divisor = {rational_str(self.divisor)}")
            lines.append(f"eps_2_normalized = {rational_str(self.eps_2_normalized)}")
        return lines


@dataclass(frozen=True)
class GameMapping:
    """Where each source player and strategy lands in the target game.

    ``g[i]`` is the target player carrying source player ``i`` and ``h[i]``
    its injective strategy map.  Recovery needs nothing else: linearize
    projects the mapped strategies back out, bimatrixify renormalizes the
    follower's ``block_sizes`` blocks.  ``circuit`` (present only on
    mappings built in-process) lets callers lift source profiles forward
    through the gadget circuit; it is never serialized.
    """

    stage: str
    g: tuple[int, ...]
    h: tuple[tuple[int, ...], ...]
    source_counts: tuple[int, ...]
    block_sizes: tuple[int, ...] | None = None
    alpha: Rat | None = None
    divisor: Rat | None = None
    circuit: GadgetCircuit | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.stage not in STAGES:
            raise ParameterError(f"unknown reduction stage {self.stage!r}")
        k = len(self.source_counts)
        if any(n < 1 for n in self.source_counts):
            raise ParameterError("source strategy counts must be positive")
        if len(self.g) != k or len(self.h) != k:
            raise DimensionMismatch("g and h need one entry per source player")
        used_per_target: dict[int, set[int]] = {}
        for i, (target, hi) in enumerate(zip(self.g, self.h)):
            if target < 0:
                raise ParameterError(f"g[{i}] must be a player index, got {target}")
            if len(hi) != self.source_counts[i]:
                raise DimensionMismatch(
                    f"h[{i}] must map all {self.source_counts[i]} strategies"
                )
            image = set(hi)
            if len(image) != len(hi):
                raise ParameterError(f"h[{i}] is not injective")
            if any(s < 0 for s in image):
                raise ParameterError(f"h[{i}] must map into strategy indices")
            used = used_per_target.setdefault(target, set())
            if used & image:
                raise ParameterError(
                    f"strategy images overlap inside target player {target}"
                )
            used |= image
        if self.stage in ("bimatrixify", "full"):
            if self.block_sizes is None or self.alpha is None:
                raise ParameterError(f"{self.stage} mappings need block_sizes and alpha")


def _resolve_budget(explicit: int | None) -> int:
    if explicit is not None:
        return explicit
    raw = os.environ.get(PLAYER_BUDGET_ENV)
    return int(raw) if raw else DEFAULT_PLAYER_BUDGET


# ---------------------------------------------------------------------------
# stage one: k-player -> polymatrix


def compute_eps_m(game: NormalFormGame, eps_k: Rat, construction: str) -> Rat:
    """Gadget tolerance for linearize: min{(eps_k / (3 nmax d k))^(1/c), eps0},
    where nmax is the largest number of opposing pure profiles any player faces."""
    k = game.k
    if k < 2:
        raise DegenerateGame("need at least two players to linearize")
    nmax = max(math.prod(game.opponent_counts(i)) for i in range(k))
    return get_params(construction).eps_m_from(eps_k, nmax, k)


def estimate_linearized_players(
    game: NormalFormGame, eps_m: Rat, construction: str
) -> int:
    """Exact player count :func:`linearize` would build, without building it.

    Each mediator costs 2 players when k = 2 (a copy wire) and
    ``(k - 2) * size(multiplier)`` players otherwise.
    """
    k = game.k
    if k == 2:
        per_mediator = 2
    else:
        per_mediator = (k - 2) * predicted_player_count(construction, eps_m)
    total = k
    for i in range(k):
        total += math.prod(game.opponent_counts(i)) * per_mediator
    return total


def linearize(
    game: NormalFormGame,
    eps_k: Rat,
    construction: str = "unary",
    player_budget: int | None = None,
) -> tuple[PolymatrixGame, GameMapping, ReductionParams]:
    """k-player normal form to polymatrix, preserving well-supported
    equilibria: every eps_m-equilibrium of the output restricts, on the
    first k players, to an eps_k-equilibrium of the input.

    The first k players of the output are the originals, strategy-for-
    strategy.  Mediator q of player i is forced to the probability that
    i's opponents jointly play the q-th opposing pure profile, and player
    i's payoff matrix reappears column-for-column on its mediator edges.
    """
    k = game.k
    if k < 2:
        raise DegenerateGame("need at least two players to linearize")
    if any(n < 2 for n in game.strategy_counts):
        raise DegenerateGame(
            "single-strategy players have no deviations; drop them first"
        )
    if not 0 < eps_k < 1:
        raise ParameterError(f"eps_k must lie in (0, 1), got {eps_k}")
    get_params(construction)
    eps_m = compute_eps_m(game, eps_k, construction)
    if eps_m <= 0:  # unreachable with exact rationals; guards a bad backend
        raise ParameterError("eps_m collapsed to zero")
    budget = _resolve_budget(player_budget)
    predicted = estimate_linearized_players(game, eps_m, construction)
    if predicted > budget:
        raise SizeBudgetExceeded(
            f"linearizing needs {predicted} players, over the budget of {budget}"
        )
    circuit = GadgetCircuit(player_budget=budget)
    originals = [
        circuit.add_input(n=n, label=f"original[{i}]", role=Role.ORIGINAL)
        for i, n in enumerate(game.strategy_counts)
    ]
    zero = rational(0)
    for i in range(k):
        others = [p for p in range(k) if p != i]
        opp_counts = game.opponent_counts(i)
        payoff = game.payoffs[i]
        for q in range(math.prod(opp_counts)):
            mediator = circuit.add_player(
                role=Role.MEDIATOR, scope=f"mediator[{i},{q}]"
            )
            pures = profile_unindex(opp_counts, q)
            factors = [Tap(originals[p].player, s) for p, s in zip(others, pures)]
            build_multiplication_chain(
                circuit, factors, eps_m, construction, out=Tap(mediator, 1)
            )
            circuit.add_edge_matrix(
                originals[i].player,
                mediator,
                [(zero, payoff[j][q]) for j in range(game.strategy_counts[i])],
            )
    gm = circuit.combine()
    mapping = GameMapping(
        stage="linearize",
        g=tuple(range(k)),
        h=tuple(tuple(range(n)) for n in game.strategy_counts),
        source_counts=game.strategy_counts,
        circuit=circuit,
    )
    params = ReductionParams(eps_m=eps_m, eps_k=eps_k, construction=construction)
    return gm, mapping, params


def lift_to_polymatrix(profile: Sequence[Sequence[Rat]], mapping: GameMapping) -> list[tuple]:
    """Complete a source-game profile to a full polymatrix profile by giving
    every mediator and gadget player its forced value."""
    if mapping.stage not in ("linearize", "full"):
        raise ParameterError(f"cannot lift through a {mapping.stage} mapping")
    if mapping.circuit is None:
        raise ParameterError(
            "this mapping has no gadget circuit (it was read from a file); "
            "lifting needs the in-process mapping"
        )
    k = len(mapping.source_counts)
    if len(profile) != k:
        raise DimensionMismatch(f"profile must cover all {k} source players")
    return mapping.circuit.lift({i: tuple(profile[i]) for i in range(k)})


def recover_from_polymatrix(
    gm: PolymatrixGame, profile: Sequence[Sequence[Rat]], mapping: GameMapping
) -> list[tuple]:
    """Project the original players' strategies out of a polymatrix profile
    (they are carried verbatim, so no renormalization is involved)."""
    if mapping.stage != "linearize":
        raise ParameterError(f"expected a linearize mapping, got {mapping.stage!r}")
    if len(profile) != gm.m:
        raise DimensionMismatch(
            f"profile has {len(profile)} strategies for {gm.m} players"
        )
    recovered = []
    for i, target in enumerate(mapping.g):
        strategy = validate_mixed(profile[target], mapping.source_counts[i])
        recovered.append(tuple(strategy[j] for j in mapping.h[i]))
    return recovered


# ---------------------------------------------------------------------------
# stage two: polymatrix -> bimatrix


def bimatrixify(
    gm: PolymatrixGame, eps_m: Rat
) -> tuple[BimatrixGame, GameMapping, ReductionParams]:
    """Polymatrix to a two-player imitation game: every eps_2-equilibrium of
    the output renormalizes to an eps_m-equilibrium of the input, with
    eps_2 = eps_m / N and collision penalty alpha = 8 m^2 / eps_2.

    The row player's matrix has the polymatrix edge blocks off the diagonal
    and -alpha on the diagonal blocks; the column player's is the identity
    (it is paid to match the row player exactly).
    """
    if not 0 < eps_m < 1:
        raise ParameterError(f"eps_m must lie in (0, 1), got {eps_m}")
    m = gm.m
    if m < 1:
        raise DegenerateGame("cannot bimatrixify an empty game")
    counts = gm.strategy_counts
    big_n = sum(counts)
    eps_2 = eps_m / big_n
    alpha = rational(8) * m * m / eps_2
    game = BimatrixGame.structured(block_sizes=counts, alpha=alpha, edges=gm.edges)
    divisor = alpha + (2 if gm.payoff_range()[1] > 1 else 1)
    h = []
    offset = 0
    for n in counts:
        h.append(tuple(range(offset, offset + n)))
        offset += n
    mapping = GameMapping(
        stage="bimatrixify",
        g=(1,) * m,
        h=tuple(h),
        source_counts=counts,
        block_sizes=counts,
        alpha=alpha,
        divisor=divisor,
    )
    params = ReductionParams(
        eps_m=eps_m, eps_2=eps_2, m=m, N=big_n, alpha=alpha, divisor=divisor
    )
    return game, mapping, params


def normalize_bimatrix(game: BimatrixGame, divisor: Rat | None = None) -> BimatrixGame:
    """The same game with every payoff mapped affinely into [0, 1] by
    (v + alpha) / divisor; an eps-equilibrium here is an (eps * divisor)-
    equilibrium of the unnormalized game and vice versa."""
    if game.encoding != "structured":
        raise ParameterError("only structured imitation games can be normalized")
    if game.normalized:
        raise ParameterError("the game is already normalized")
    if divisor is None:
        divisor = game.alpha + (2 if game.payoff_range()[1] > 1 else 1)
    return BimatrixGame.structured(
        game.block_sizes, game.alpha, game.edges, normalized=True, divisor=divisor
    )


def recover_from_bimatrix(
    g2: BimatrixGame,
    profile: tuple[Sequence[Rat], Sequence[Rat]],
    mapping: GameMapping,
) -> list[tuple]:
    """Renormalize the column player's block masses into a polymatrix
    profile, exactly.  Raises ZeroBlockMass for blocks the profile never
    plays (a genuine eps_2-equilibrium gives every block positive mass)."""
    if mapping.stage not in ("bimatrixify", "full"):
        raise ParameterError(f"expected a bimatrixify or full mapping, got {mapping.stage!r}")
    x, y = profile
    blocks = mapping.block_sizes
    big_n = sum(blocks)
    if big_n != g2.n:
        raise DimensionMismatch(
            f"mapping covers {big_n} strategies but the game has {g2.n}"
        )
    validate_mixed(x, big_n)
    y = validate_mixed(y, big_n)
    recovered = []
    offset = 0
    for i, n in enumerate(blocks):
        segment = y[offset : offset + n]
        mass = sum(segment)
        if mass == 0:
            raise ZeroBlockMass(i)
        recovered.append(tuple(v / mass for v in segment))
        offset += n
    return recovered


# ---------------------------------------------------------------------------
# the composed pipeline


def reduce_full(
    game: NormalFormGame,
    eps_k: Rat,
    construction: str = "unary",
    player_budget: int | None = None,
) -> tuple[BimatrixGame, GameMapping, ReductionParams]:
    """linearize then bimatrixify; the mapping composes both stages, so
    original player i's strategy j sits at follower index h[i][j]."""
    gm, lin_map, lin_params = linearize(game, eps_k, construction, player_budget)
    g2, bi_map, bi_params = bimatrixify(gm, lin_params.eps_m)
    k = game.k
    mapping = GameMapping(
        stage="full",
        g=(1,) * k,
        h=bi_map.h[:k],
        source_counts=game.strategy_counts,
        block_sizes=bi_map.block_sizes,
        alpha=bi_map.alpha,
        divisor=bi_map.divisor,
        circuit=lin_map.circuit,
    )
    params = ReductionParams(
        eps_m=lin_params.eps_m,
        eps_k=eps_k,
        construction=construction,
        eps_2=bi_params.eps_2,
        m=bi_params.m,
        N=bi_params.N,
        alpha=bi_params.alpha,
        divisor=bi_params.divisor,
    )
    return g2, mapping, params


def recover_full(
    g2: BimatrixGame,
    profile: tuple[Sequence[Rat], Sequence[Rat]],
    mapping: GameMapping,
) -> list[tuple]:
    """Bimatrix profile back to an original-game profile: renormalize the
    follower's blocks, then keep the original players' blocks."""
    if mapping.stage != "full":
        raise ParameterError(f"expected a full mapping, got {mapping.stage!r}")
    polymatrix_profile = recover_from_bimatrix(g2, profile, mapping)
    return polymatrix_profile[: len(mapping.g)]
