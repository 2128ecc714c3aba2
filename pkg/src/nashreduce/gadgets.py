"""The binary gadget library and the circuit builder that wires gadgets up.

A *gadget* is a tiny polymatrix fragment whose designated binary *output*
player is forced, in any eps-well-supported equilibrium, to represent a
function of the values carried by its *input* players.  The value carried by
a player is the probability it assigns to a designated pure strategy (a
:class:`Tap`); inputs are clamped (they receive no payoffs from the gadget),
so the guarantee holds whatever the inputs do.

Thirteen gadget kinds are provided.  Nine are primitive:

========== ============================ =======================================
kind       output guarantee (±eps)      notes
========== ============================ =======================================
threshold  1 if v1 > z+eps, 0 if < z-eps decision gadget, no error band
and        1 if v1=v2=1; 0 if either =0  needs eps < 1/4
scaled_sum min(z*(v1+...+vm), 1)         one aux player
compare    1 if v1 < v2-eps, 0 if >      decision gadget
minus      max(0, v2 - v1)               one aux player
complement 1 - v1                        one aux player
assign     z (a constant)                no inputs; one aux player
scale      z * v1                        one aux player
mask       v2 if v1=1; 0 if v1=0;        one aux player; also forced to 0+-3eps
                                         whenever v2 <= 2eps
========== ============================ =======================================

and four are composites of those: ``max`` (error 4 eps), ``min`` (8 eps),
``median`` (20 eps), and ``bit_extract`` (beta binary digits of v1, correct
whenever v1 is far enough from a multiple of 2^-beta).

Every builder also has an exact *lift*: given exact values for the clamped
inputs, :meth:`GadgetCircuit.lift` completes them to a profile in which every
non-input player is exactly best-responding (a 0-WSNE relative to the
clamped inputs).  Decision gadgets break payoff ties toward strategy 1.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, NamedTuple, Sequence

from ._rational import rational
from .errors import (
    CycleDetected,
    DuplicateOutput,
    ParameterError,
    SizeBudgetExceeded,
)
from .model import PlayerInfo, PolymatrixGame, Role, validate_mixed

Rat = Any

__all__ = [
    "Tap",
    "GadgetSpec",
    "GadgetCircuit",
    "GADGET_KINDS",
    "GADGET_INFO",
    "GadgetInfo",
    "spec_player_count",
    "DEFAULT_PLAYER_BUDGET",
    "PLAYER_BUDGET_ENV",
]

PLAYER_BUDGET_ENV = "NASHREDUCE_PLAYER_BUDGET"
DEFAULT_PLAYER_BUDGET = 10_000_000


class Tap(NamedTuple):
    """A value carried by a player: the probability of one pure strategy."""

    player: int
    strategy: int = 1


@dataclass(frozen=True)
class GadgetSpec:
    """One recorded gadget: wiring, parameters, and the players it created.

    ``internal`` is empty for primitive gadgets; for composites it lists the
    sub-gadgets in evaluation order and ``created``/``aux`` are empty (the
    sub-gadgets own their players).
    """

    kind: str
    inputs: tuple[Tap, ...]
    outputs: tuple[Tap, ...]
    params: tuple[tuple[str, Any], ...] = ()
    aux: tuple[int, ...] = ()
    created: tuple[int, ...] = ()
    internal: tuple["GadgetSpec", ...] = ()

    @property
    def output(self) -> Tap:
        return self.outputs[0]

    def param(self, name: str):
        for key, value in self.params:
            if key == name:
                return value
        raise KeyError(name)


def spec_player_count(spec: GadgetSpec) -> int:
    """Players created by this gadget, including all composite internals."""
    return len(spec.created) + sum(spec_player_count(s) for s in spec.internal)


@dataclass(frozen=True)
class GadgetInfo:
    kind: str
    arity: int | None  # None: variable (scaled_sum)
    takes_zeta: bool
    aux_players: int | None  # None: depends on parameters
    error_band: str
    summary: str


GADGET_INFO: dict[str, GadgetInfo] = {
    info.kind: info
    for info in [
        GadgetInfo("threshold", 1, True, 0, "decision", "1 if v1 > z, 0 if v1 < z (eps margin)"),
        GadgetInfo("and", 2, False, 0, "decision", "1 if v1 = v2 = 1, 0 if either is 0 (eps < 1/4)"),
        GadgetInfo("scaled_sum", None, True, 1, "1*eps", "min(z*(v1+...+vm), 1)"),
        GadgetInfo("compare", 2, False, 0, "decision", "1 if v1 < v2, 0 if v1 > v2 (eps margin)"),
        GadgetInfo("minus", 2, False, 1, "1*eps", "max(0, v2 - v1)"),
        GadgetInfo("complement", 1, False, 1, "1*eps", "1 - v1"),
        GadgetInfo("assign", 0, True, 1, "1*eps", "the constant z"),
        GadgetInfo("scale", 1, True, 1, "1*eps", "z * v1"),
        GadgetInfo("mask", 2, False, 1, "3*eps", "v2 if v1 = 1; 0 if v1 = 0; near 0 if v2 near 0"),
        GadgetInfo("max", 2, False, None, "4*eps", "max(v1, v2)"),
        GadgetInfo("min", 2, False, None, "8*eps", "min(v1, v2)"),
        GadgetInfo("median", 3, False, None, "20*eps", "median(v1, v2, v3)"),
        GadgetInfo("bit_extract", 1, False, None, "bit decisions", "beta binary digits of v1"),
    ]
}

GADGET_KINDS: tuple[str, ...] = tuple(GADGET_INFO)


def _check_zeta(zeta: Rat) -> Rat:
    if zeta < 0 or zeta > 1:
        raise ParameterError(f"zeta must lie in [0, 1], got {zeta}")
    return zeta


class GadgetCircuit:
    """Accumulates players, payoff edges, and gadget records; freezes to a game.

    Build order doubles as evaluation order: a gadget may only read taps of
    players that already carry a value (declared inputs or outputs of earlier
    gadgets), which keeps the wiring acyclic by construction.  Builders
    create their own output player unless ``out=`` hands them an existing
    undriven binary player to drive (each player can be driven only once).
    """

    def __init__(self, player_budget: int | None = None):
        if player_budget is None:
            player_budget = int(os.environ.get(PLAYER_BUDGET_ENV, DEFAULT_PLAYER_BUDGET))
        if player_budget < 1:
            raise ParameterError("player budget must be positive")
        self.player_budget = player_budget
        self._counts: list[int] = []
        self._players: list[PlayerInfo] = []
        self._edges: dict[tuple[int, int], list[list[Rat]]] = {}
        self._specs: list[GadgetSpec] = []
        self._spec_stack: list[list[GadgetSpec]] = [self._specs]
        self._scope_stack: list[str] = []
        self._inputs: set[int] = set()
        self._driven: set[int] = set()
        self._defined: set[int] = set()

    # -- players and edges ---------------------------------------------------

    @property
    def num_players(self) -> int:
        return len(self._counts)

    @property
    def strategy_counts(self) -> tuple[int, ...]:
        return tuple(self._counts)

    @property
    def specs(self) -> tuple[GadgetSpec, ...]:
        return tuple(self._specs)

    def input_players(self) -> tuple[int, ...]:
        return tuple(sorted(self._inputs))

    def undriven_players(self) -> tuple[int, ...]:
        return tuple(
            i
            for i in range(self.num_players)
            if i not in self._driven and i not in self._inputs
        )

    def add_player(self, n: int = 2, role: Role = Role.PLAIN, scope: str = "") -> int:
        """A raw player with no payoffs yet; drive it later via ``out=``."""
        if n < 2:
            raise ParameterError("players need at least two pure strategies")
        if self.num_players + 1 > self.player_budget:
            raise SizeBudgetExceeded(
                f"player budget of {self.player_budget} players exhausted"
            )
        self._counts.append(n)
        self._players.append(PlayerInfo(role, scope))
        return self.num_players - 1

    def add_input(self, n: int = 2, label: str = "", role: Role = Role.PLAIN) -> Tap:
        """A clamped input player; its value is read at strategy 1."""
        name = label or str(len(self._inputs))
        idx = self.add_player(n, role, f"input:{name}")
        self._inputs.add(idx)
        self._defined.add(idx)
        return Tap(idx, 1)

    def add_edge_matrix(self, i: int, j: int, matrix: Sequence[Sequence[Rat]]) -> None:
        """Accumulate raw payoff entries for player ``i`` against player ``j``."""
        self._check_player(i)
        self._check_player(j)
        if i == j:
            raise ParameterError("self-edges are not allowed")
        acc = self._acc(i, j)
        if len(matrix) != self._counts[i] or any(
            len(row) != self._counts[j] for row in matrix
        ):
            raise ParameterError(
                f"edge ({i}, {j}) matrix must be {self._counts[i]}x{self._counts[j]}"
            )
        for r, row in enumerate(matrix):
            for c, x in enumerate(row):
                acc[r][c] = acc[r][c] + x

    def _check_player(self, i: int) -> None:
        if not 0 <= i < self.num_players:
            raise ParameterError(f"no player {i} in this circuit")

    def _acc(self, i: int, j: int) -> list[list[Rat]]:
        key = (i, j)
        if key not in self._edges:
            self._edges[key] = [[0] * self._counts[j] for _ in range(self._counts[i])]
        return self._edges[key]

    def _add_tap_matrix(self, i: int, tap: Tap, col0: tuple[Rat, Rat], col1: tuple[Rat, Rat]) -> None:
        """Payoffs for binary player ``i`` reading ``tap``: the tap's column
        gets ``col1``, every other column of the source player gets ``col0``
        (so the expected payoff depends on the source only through the tap
        value v: row r earns col0[r]*(1-v) + col1[r]*v)."""
        acc = self._acc(i, tap.player)
        for c in range(self._counts[tap.player]):
            pair = col1 if c == tap.strategy else col0
            acc[0][c] = acc[0][c] + pair[0]
            acc[1][c] = acc[1][c] + pair[1]

    # -- gadget plumbing -------------------------------------------------------

    def _scope(self, kind: str) -> str:
        return "/".join(self._scope_stack + [kind])

    def _resolve_taps(self, taps: Iterable[Tap]) -> tuple[Tap, ...]:
        out = []
        for tap in taps:
            tap = Tap(*tap)
            self._check_player(tap.player)
            if not 0 <= tap.strategy < self._counts[tap.player]:
                raise ParameterError(
                    f"tap strategy {tap.strategy} outside player {tap.player}'s range"
                )
            if tap.player not in self._defined:
                raise CycleDetected(
                    f"player {tap.player} carries no value yet; gadget wiring must "
                    "be acyclic (inputs first, then gadgets in evaluation order)"
                )
            out.append(tap)
        return tuple(out)

    def _claim_output(self, out: Tap | None, kind: str) -> tuple[Tap, tuple[int, ...]]:
        """Return (output tap, created players) for a builder."""
        if out is None:
            idx = self.add_player(2, Role.GADGET_AUX, self._scope(kind))
            self._driven.add(idx)
            self._defined.add(idx)
            return Tap(idx, 1), (idx,)
        out = Tap(*out)
        self._check_player(out.player)
        if out.strategy != 1 or self._counts[out.player] != 2:
            raise ParameterError("gadget outputs must be binary players tapped at strategy 1")
        if out.player in self._driven:
            raise DuplicateOutput(f"player {out.player} is already driven by a gadget")
        if out.player in self._inputs:
            raise ParameterError(f"player {out.player} is a clamped input; it cannot be driven")
        self._driven.add(out.player)
        self._defined.add(out.player)
        return out, ()

    def _aux(self, kind: str) -> int:
        idx = self.add_player(2, Role.GADGET_AUX, self._scope(kind) + ":aux")
        self._driven.add(idx)
        self._defined.add(idx)
        return idx

    def _record(self, spec: GadgetSpec) -> None:
        self._spec_stack[-1].append(spec)

    def _begin_composite(self, kind: str) -> list[GadgetSpec]:
        inner: list[GadgetSpec] = []
        self._spec_stack.append(inner)
        self._scope_stack.append(kind)
        return inner

    def _end_composite(
        self,
        kind: str,
        inputs: tuple[Tap, ...],
        outputs: tuple[Tap, ...],
        params: tuple[tuple[str, Any], ...] = (),
    ) -> GadgetSpec:
        inner = self._spec_stack.pop()
        self._scope_stack.pop()
        spec = GadgetSpec(kind, inputs, outputs, params, internal=tuple(inner))
        self._record(spec)
        return spec

    # -- primitive builders ----------------------------------------------------

    def build_threshold(self, in1: Tap, zeta: Rat, out: Tap | None = None) -> Tap:
        """Output 1 when value(in1) > zeta + eps, 0 when below zeta - eps."""
        zeta = _check_zeta(zeta)
        (in1,) = self._resolve_taps([in1])
        p, created = self._claim_output(out, "threshold")
        self._add_tap_matrix(p.player, in1, (zeta, 0), (zeta, 1))
        self._record(
            GadgetSpec("threshold", (in1,), (p,), (("zeta", zeta),), created=created)
        )
        return p

    def build_and(self, in1: Tap, in2: Tap, out: Tap | None = None) -> Tap:
        """Output 1 when both values are 1, 0 when either is 0 (for eps < 1/4)."""
        in1, in2 = self._resolve_taps([in1, in2])
        p, created = self._claim_output(out, "and")
        for tap in (in1, in2):
            self._add_tap_matrix(
                p.player, tap, (rational(3, 8), 0), (rational(3, 8), rational(1, 2))
            )
        self._record(GadgetSpec("and", (in1, in2), (p,), created=created))
        return p

    def build_compare(self, in1: Tap, in2: Tap, out: Tap | None = None) -> Tap:
        """Output 1 when value(in1) < value(in2) - eps, 0 when > value(in2) + eps."""
        in1, in2 = self._resolve_taps([in1, in2])
        p, created = self._claim_output(out, "compare")
        self._add_tap_matrix(p.player, in1, (0, 0), (1, 0))
        self._add_tap_matrix(p.player, in2, (0, 0), (0, 1))
        self._record(GadgetSpec("compare", (in1, in2), (p,), created=created))
        return p

    def _two_cycle(self, kind: str, p: Tap, w: int) -> None:
        # W strategy 0 earns the output value; P imitates W.
        self._add_tap_matrix(w, p, (0, 0), (1, 0))
        self.add_edge_matrix(p.player, w, [[1, 0], [0, 1]])

    def build_scaled_sum(
        self, inputs: Sequence[Tap], zeta: Rat, out: Tap | None = None
    ) -> Tap:
        """Output min(zeta * sum(values), 1), within eps."""
        zeta = _check_zeta(zeta)
        taps = self._resolve_taps(inputs)
        if not taps:
            raise ParameterError("scaled_sum needs at least one input")
        p, created = self._claim_output(out, "scaled_sum")
        w = self._aux("scaled_sum")
        self._two_cycle("scaled_sum", p, w)
        for tap in taps:
            self._add_tap_matrix(w, tap, (0, 0), (0, zeta))
        self._record(
            GadgetSpec(
                "scaled_sum", taps, (p,), (("zeta", zeta),), aux=(w,), created=created + (w,)
            )
        )
        return p

    def build_minus(self, in1: Tap, in2: Tap, out: Tap | None = None) -> Tap:
        """Output max(0, value(in2) - value(in1)), within eps."""
        in1, in2 = self._resolve_taps([in1, in2])
        p, created = self._claim_output(out, "minus")
        w = self._aux("minus")
        self._two_cycle("minus", p, w)
        self._add_tap_matrix(w, in1, (0, 0), (0, -1))
        self._add_tap_matrix(w, in2, (0, 0), (0, 1))
        self._record(
            GadgetSpec("minus", (in1, in2), (p,), aux=(w,), created=created + (w,))
        )
        return p

    def build_complement(self, in1: Tap, out: Tap | None = None) -> Tap:
        """Output 1 - value(in1), within eps."""
        (in1,) = self._resolve_taps([in1])
        p, created = self._claim_output(out, "complement")
        w = self._aux("complement")
        self._two_cycle("complement", p, w)
        self._add_tap_matrix(w, in1, (0, 1), (0, 0))
        self._record(
            GadgetSpec("complement", (in1,), (p,), aux=(w,), created=created + (w,))
        )
        return p

    def build_assign(self, zeta: Rat, out: Tap | None = None) -> Tap:
        """Output the constant zeta, within eps."""
        zeta = _check_zeta(zeta)
        p, created = self._claim_output(out, "assign")
        w = self._aux("assign")
        self.add_edge_matrix(w, p.player, [[0, 1], [zeta, zeta]])
        self.add_edge_matrix(p.player, w, [[1, 0], [0, 1]])
        self._record(
            GadgetSpec("assign", (), (p,), (("zeta", zeta),), aux=(w,), created=created + (w,))
        )
        return p

    def build_scale(self, in1: Tap, zeta: Rat, out: Tap | None = None) -> Tap:
        """Output zeta * value(in1), within eps."""
        zeta = _check_zeta(zeta)
        (in1,) = self._resolve_taps([in1])
        p, created = self._claim_output(out, "scale")
        w = self._aux("scale")
        self._two_cycle("scale", p, w)
        self._add_tap_matrix(w, in1, (0, 0), (0, zeta))
        self._record(
            GadgetSpec("scale", (in1,), (p,), (("zeta", zeta),), aux=(w,), created=created + (w,))
        )
        return p

    def build_copy(self, in1: Tap, out: Tap | None = None) -> Tap:
        """Output value(in1) itself (a scale by 1), within eps."""
        return self.build_scale(in1, rational(1), out=out)

    def build_mask(self, in1: Tap, in2: Tap, out: Tap | None = None) -> Tap:
        """Output value(in2) when value(in1) = 1 and 0 when value(in1) = 0;
        also forced within 3 eps of 0 whenever value(in2) is within 2 eps of 0."""
        in1, in2 = self._resolve_taps([in1, in2])
        p, created = self._claim_output(out, "mask")
        w = self._aux("mask")
        self._two_cycle("mask", p, w)
        self._add_tap_matrix(w, in1, (2, 0), (0, 0))
        self._add_tap_matrix(w, in2, (0, 0), (0, 1))
        self._record(
            GadgetSpec("mask", (in1, in2), (p,), aux=(w,), created=created + (w,))
        )
        return p

    # -- composite builders ------------------------------------------------------

    def build_max(self, in1: Tap, in2: Tap, out: Tap | None = None) -> Tap:
        """Output max(value(in1), value(in2)), within 4 eps."""
        in1, in2 = self._resolve_taps([in1, in2])
        self._begin_composite("max")
        is_less = self.build_compare(in1, in2)
        excess = self.build_minus(in1, in2)  # max(0, v2 - v1)
        gated = self.build_mask(is_less, excess)
        p = self.build_scaled_sum([gated, in1], rational(1), out=out)
        self._end_composite("max", (in1, in2), (p,))
        return p

    def build_min(self, in1: Tap, in2: Tap, out: Tap | None = None) -> Tap:
        """Output min(value(in1), value(in2)), within 8 eps."""
        in1, in2 = self._resolve_taps([in1, in2])
        self._begin_composite("min")
        not1 = self.build_complement(in1)
        not2 = self.build_complement(in2)
        biggest = self.build_max(not1, not2)
        p = self.build_complement(biggest, out=out)
        self._end_composite("min", (in1, in2), (p,))
        return p

    def build_median(self, in1: Tap, in2: Tap, in3: Tap, out: Tap | None = None) -> Tap:
        """Output the median of the three values, within 20 eps."""
        in1, in2, in3 = self._resolve_taps([in1, in2, in3])
        self._begin_composite("median")
        hi12 = self.build_max(in1, in2)
        lo12 = self.build_min(in1, in2)
        capped = self.build_min(in3, hi12)
        p = self.build_max(lo12, capped, out=out)
        self._end_composite("median", (in1, in2, in3), (p,))
        return p

    def build_bit_extract(self, in1: Tap, beta: int, eps: Rat | None = None) -> tuple[Tap, ...]:
        """The first ``beta`` binary digits of value(in1), most significant first.

        Digit i is reliable when value(in1) is at least 3*beta*eps away from
        every multiple of 2^-beta; pass ``eps`` to enforce the sufficient
        condition eps <= 2^-beta / (48 beta) up front.
        """
        if beta < 1:
            raise ParameterError("beta must be at least 1")
        if eps is not None and eps * 48 * beta * (2**beta) > 1:
            raise ParameterError(
                f"bit extraction with beta={beta} needs eps <= 1/(48*beta*2^beta), got {eps}"
            )
        (in1,) = self._resolve_taps([in1])
        self._begin_composite("bit_extract")
        x = self.build_copy(in1)
        bits: list[Tap] = []
        for i in range(1, beta + 1):
            weight = rational(1, 2**i)
            bit = self.build_threshold(x, weight)
            bits.append(bit)
            if i < beta:
                taken = self.build_scale(bit, weight)
                x = self.build_minus(taken, x)  # max(0, x - taken)
        self._end_composite("bit_extract", (in1,), tuple(bits), (("beta", beta),))
        return tuple(bits)

    # -- freezing and lifting ------------------------------------------------------

    def combine(self) -> PolymatrixGame:
        """Freeze into a polymatrix game (validating the payoff range)."""
        edges = {
            key: mat
            for key, mat in self._edges.items()
            if any(x != 0 for row in mat for x in row)
        }
        return PolymatrixGame(self._counts, edges, self._players)

    def lift(self, inputs: Mapping[int, Any]) -> list[tuple]:
        """Complete exact input values to an exact equilibrium profile.

        ``inputs`` maps each undriven player to either a scalar value in
        [0, 1] (binary players: probability of strategy 1) or a full mixed
        strategy.  Every other player is assigned the value its gadget
        forces; the result is a 0-WSNE when the input players are clamped.
        """
        profile: list[tuple | None] = [None] * self.num_players
        undriven = set(self._inputs) | set(self.undriven_players())
        for player, value in inputs.items():
            self._check_player(player)
            if player not in undriven:
                raise ParameterError(
                    f"player {player} is driven by a gadget; its value cannot be forced"
                )
            if isinstance(value, (tuple, list)):
                profile[player] = validate_mixed(value, self._counts[player])
            else:
                if self._counts[player] != 2:
                    raise ParameterError(
                        f"player {player} is not binary; pass a full mixed strategy"
                    )
                if value < 0 or value > 1:
                    raise ParameterError(f"input value {value} outside [0, 1]")
                profile[player] = (1 - value, value)
        missing = [p for p in sorted(undriven) if profile[p] is None]
        if missing:
            raise ParameterError(f"no input value given for players {missing}")

        def tap_value(tap: Tap) -> Rat:
            vec = profile[tap.player]
            if vec is None:
                raise CycleDetected(f"player {tap.player} evaluated before it was driven")
            return vec[tap.strategy]

        def set_binary(tap: Tap, value: Rat) -> None:
            profile[tap.player] = (1 - value, value)

        def evaluate(spec: GadgetSpec) -> None:
            if spec.internal:
                for sub in spec.internal:
                    evaluate(sub)
                return
            vals = [tap_value(t) for t in spec.inputs]
            kind = spec.kind
            if kind == "threshold":
                set_binary(spec.output, rational(int(vals[0] >= spec.param("zeta"))))
                return
            if kind == "and":
                set_binary(spec.output, rational(int(vals[0] + vals[1] >= rational(3, 2))))
                return
            if kind == "compare":
                set_binary(spec.output, rational(int(vals[0] <= vals[1])))
                return
            # the remaining primitives are two-cycle gadgets: the aux player
            # weighs the output value (plus a constant C) against a target K
            shift = 0
            if kind == "scaled_sum":
                target = spec.param("zeta") * sum(vals)
            elif kind == "minus":
                target = vals[1] - vals[0]
            elif kind == "complement":
                target = 1 - vals[0]
            elif kind == "assign":
                target = spec.param("zeta")
            elif kind == "scale":
                target = spec.param("zeta") * vals[0]
            elif kind == "mask":
                target = vals[1]
                shift = 2 * (1 - vals[0])
            else:  # pragma: no cover - registry and builders stay in sync
                raise ParameterError(f"unknown gadget kind {kind!r}")
            gap = target - shift
            if gap <= 0:
                w = value = rational(0)
            elif gap >= 1:
                w = value = rational(1)
            else:
                w, value = rational(1, 2), gap
            set_binary(Tap(spec.aux[0], 1), w)
            set_binary(spec.output, value)

        for spec in self._specs:
            evaluate(spec)
        assert all(vec is not None for vec in profile)
        return [tuple(vec) for vec in profile]  # type: ignore[arg-type]
