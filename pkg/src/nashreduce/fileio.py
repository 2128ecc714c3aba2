"""Game, profile, and mapping files.

Everything is JSON with one canonical rendering -- sorted keys, no
whitespace, a trailing newline, rationals as ``"numerator/denominator"``
strings -- so equal objects serialize to identical bytes and every
round trip is exact.  No floats ever appear on either side.

Games carry a small header (format tag, class, player count, strategy
counts, payoff range, per-player role tags where applicable) that readers
re-derive from the body and check, so a corrupted file fails loudly as a
:class:`ParseError` rather than loading skewed.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from ._rational import rational, rational_str
from .errors import ParseError
from .model import (
    BimatrixGame,
    NormalFormGame,
    PlayerInfo,
    PolymatrixGame,
    Role,
)
from .reductions import GameMapping, ReductionParams

Rat = Any

GAME_FORMAT = "nashreduce-game/1"
PROFILE_FORMAT = "nashreduce-profile/1"
MAPPING_FORMAT = "nashreduce-mapping/1"

__all__ = [
    "GAME_FORMAT",
    "PROFILE_FORMAT",
    "MAPPING_FORMAT",
    "dumps_canonical",
    "game_to_dict",
    "game_from_dict",
    "profile_to_dict",
    "profile_from_dict",
    "mapping_to_dict",
    "mapping_from_dict",
    "write_game",
    "read_game",
    "write_profile",
    "read_profile",
    "write_mapping",
    "read_mapping",
]


def dumps_canonical(data: Any) -> str:
    """The one true rendering: sorted keys, tight separators, newline-terminated."""
    return json.dumps(data, sort_keys=True, separators=(",", ":")) + "\n"


# ---------------------------------------------------------------------------
# scalar plumbing


def _rat_out(value: Rat) -> str:
    return rational_str(value)


def _rat_in(value: Any) -> Rat:
    if not isinstance(value, str):
        raise ParseError(f"rationals must be strings like '3/4', got {value!r}")
    try:
        return rational(value)
    except (ValueError, TypeError, ZeroDivisionError):
        raise ParseError(f"invalid rational {value!r}") from None


def _opt_rat_out(value: Rat | None) -> str | None:
    return None if value is None else rational_str(value)


def _opt_rat_in(value: Any) -> Rat | None:
    return None if value is None else _rat_in(value)


def _int_in(value: Any, what: str) -> int:
    if type(value) is not int:
        raise ParseError(f"{what} must be an integer, got {value!r}")
    return value


def _ints_in(data: Any, what: str) -> list[int]:
    if not isinstance(data, list):
        raise ParseError(f"{what} must be a list of integers")
    return [_int_in(x, what) for x in data]


def _vector_in(data: Any) -> tuple:
    if not isinstance(data, list):
        raise ParseError("expected a list of rationals")
    return tuple(_rat_in(x) for x in data)


def _matrix_out(mat) -> list[list[str]]:
    return [[_rat_out(x) for x in row] for row in mat]


def _matrix_in(data: Any) -> list[tuple]:
    if not isinstance(data, list) or not data:
        raise ParseError("expected a non-empty matrix")
    return [_vector_in(row) for row in data]


def _edges_out(edges) -> list:
    return [
        [i, j, _matrix_out(mat)] for (i, j), mat in sorted(edges.items())
    ]


def _edges_in(data: Any) -> dict[tuple[int, int], list[tuple]]:
    if not isinstance(data, list):
        raise ParseError("edges must be a list of [i, j, matrix] entries")
    edges: dict[tuple[int, int], list[tuple]] = {}
    for entry in data:
        if not isinstance(entry, list) or len(entry) != 3:
            raise ParseError(f"malformed edge entry {entry!r}")
        i = _int_in(entry[0], "edge endpoint")
        j = _int_in(entry[1], "edge endpoint")
        if (i, j) in edges:
            raise ParseError(f"duplicate edge ({i}, {j})")
        edges[(i, j)] = _matrix_in(entry[2])
    return edges


# ---------------------------------------------------------------------------
# games


def game_to_dict(game) -> dict:
    if isinstance(game, NormalFormGame):
        entries = [x for mat in game.payoffs for row in mat for x in row]
        return {
            "format": GAME_FORMAT,
            "class": "normal_form",
            "players": game.k,
            "strategy_counts": list(game.strategy_counts),
            "payoff_range": [_rat_out(min(entries)), _rat_out(max(entries))],
            "payoffs": [_matrix_out(mat) for mat in game.payoffs],
        }
    if isinstance(game, PolymatrixGame):
        lo, hi = game.payoff_range()
        return {
            "format": GAME_FORMAT,
            "class": "polymatrix",
            "players": game.m,
            "strategy_counts": list(game.strategy_counts),
            "payoff_range": [_rat_out(lo), _rat_out(hi)],
            "roles": [[info.role.value, info.scope] for info in game.players],
            "edges": _edges_out(game.edges),
        }
    if isinstance(game, BimatrixGame):
        lo, hi = game.payoff_range()
        data = {
            "format": GAME_FORMAT,
            "class": "bimatrix",
            "players": 2,
            "strategy_counts": [game.n, game.n],
            "payoff_range": [_rat_out(lo), _rat_out(hi)],
            "encoding": game.encoding,
        }
        if game.encoding == "dense":
            data["a"] = _matrix_out(game.a)
            data["b"] = _matrix_out(game.b)
        else:
            data["block_sizes"] = list(game.block_sizes)
            data["alpha"] = _rat_out(game.alpha)
            data["normalized"] = game.normalized
            data["divisor"] = _opt_rat_out(game.divisor)
            data["edges"] = _edges_out(game.edges)
        return data
    raise TypeError(f"not a serializable game: {type(game).__name__}")


def _normal_form_from(data: dict) -> NormalFormGame:
    counts = _ints_in(data["strategy_counts"], "strategy count")
    payoffs = data["payoffs"]
    if not isinstance(payoffs, list):
        raise ParseError("payoffs must be a list of matrices")
    return NormalFormGame(counts, [_matrix_in(mat) for mat in payoffs])


def _polymatrix_from(data: dict) -> PolymatrixGame:
    counts = _ints_in(data["strategy_counts"], "strategy count")
    roles = data["roles"]
    if not isinstance(roles, list) or len(roles) != len(counts):
        raise ParseError("roles must list [role, scope] once per player")
    players = []
    for entry in roles:
        if not isinstance(entry, list) or len(entry) != 2 or not isinstance(entry[1], str):
            raise ParseError(f"malformed role entry {entry!r}")
        try:
            role = Role(entry[0])
        except ValueError:
            raise ParseError(f"unknown role {entry[0]!r}") from None
        players.append(PlayerInfo(role, entry[1]))
    return PolymatrixGame(counts, _edges_in(data["edges"]), players)


def _bimatrix_from(data: dict) -> BimatrixGame:
    encoding = data["encoding"]
    if encoding == "dense":
        return BimatrixGame.dense(_matrix_in(data["a"]), _matrix_in(data["b"]))
    if encoding == "structured":
        normalized = data["normalized"]
        if not isinstance(normalized, bool):
            raise ParseError("normalized must be a boolean")
        return BimatrixGame.structured(
            _ints_in(data["block_sizes"], "block size"),
            _rat_in(data["alpha"]),
            _edges_in(data["edges"]),
            normalized=normalized,
            divisor=_opt_rat_in(data["divisor"]),
        )
    raise ParseError(f"unknown bimatrix encoding {encoding!r}")


_GAME_BUILDERS = {
    "normal_form": _normal_form_from,
    "polymatrix": _polymatrix_from,
    "bimatrix": _bimatrix_from,
}


def game_from_dict(data: Any):
    if not isinstance(data, dict):
        raise ParseError("a game file must hold a JSON object")
    _check_format(data, GAME_FORMAT)
    builder = _GAME_BUILDERS.get(data.get("class"))
    if builder is None:
        raise ParseError(f"unknown game class {data.get('class')!r}")
    try:
        game = builder(data)
        header = {
            key: data[key] for key in ("players", "strategy_counts", "payoff_range")
        }
    except KeyError as err:
        raise ParseError(f"game file is missing field {err.args[0]!r}") from None
    fresh = game_to_dict(game)
    for key, value in header.items():
        if fresh[key] != value:
            raise ParseError(
                f"header field {key!r} is {value!r} but the body implies {fresh[key]!r}"
            )
    return game


# ---------------------------------------------------------------------------
# profiles


def profile_to_dict(profile) -> dict:
    return {
        "format": PROFILE_FORMAT,
        "strategies": [[_rat_out(x) for x in strategy] for strategy in profile],
    }


def profile_from_dict(data: Any) -> list[tuple]:
    if not isinstance(data, dict):
        raise ParseError("a profile file must hold a JSON object")
    _check_format(data, PROFILE_FORMAT)
    try:
        strategies = data["strategies"]
    except KeyError:
        raise ParseError("profile file is missing field 'strategies'") from None
    if not isinstance(strategies, list):
        raise ParseError("strategies must be a list of vectors")
    return [_vector_in(strategy) for strategy in strategies]


# ---------------------------------------------------------------------------
# mappings


def mapping_to_dict(mapping: GameMapping, params: ReductionParams) -> dict:
    return {
        "format": MAPPING_FORMAT,
        "stage": mapping.stage,
        "g": list(mapping.g),
        "h": [list(hi) for hi in mapping.h],
        "source_counts": list(mapping.source_counts),
        "block_sizes": None if mapping.block_sizes is None else list(mapping.block_sizes),
        "alpha": _opt_rat_out(mapping.alpha),
        "divisor": _opt_rat_out(mapping.divisor),
        "params": {
            "eps_m": _rat_out(params.eps_m),
            "eps_k": _opt_rat_out(params.eps_k),
            "construction": params.construction,
            "eps_2": _opt_rat_out(params.eps_2),
            "m": params.m,
            "N": params.N,
            "alpha": _opt_rat_out(params.alpha),
            "divisor": _opt_rat_out(params.divisor),
        },
    }


def mapping_from_dict(data: Any) -> tuple[GameMapping, ReductionParams]:
    if not isinstance(data, dict):
        raise ParseError("a mapping file must hold a JSON object")
    _check_format(data, MAPPING_FORMAT)
    try:
        stage = data["stage"]
        raw_g = data["g"]
        raw_h = data["h"]
        raw_counts = data["source_counts"]
        raw_blocks = data["block_sizes"]
        raw = data["params"]
        if not isinstance(raw_h, list) or not isinstance(raw, dict):
            raise ParseError("malformed mapping file")
        mapping = GameMapping(
            stage=stage,
            g=tuple(_ints_in(raw_g, "g entry")),
            h=tuple(tuple(_ints_in(hi, "h entry")) for hi in raw_h),
            source_counts=tuple(_ints_in(raw_counts, "source count")),
            block_sizes=None if raw_blocks is None else tuple(_ints_in(raw_blocks, "block size")),
            alpha=_opt_rat_in(data["alpha"]),
            divisor=_opt_rat_in(data["divisor"]),
        )
        construction = raw["construction"]
        if construction is not None and not isinstance(construction, str):
            raise ParseError("construction must be a string or null")
        params = ReductionParams(
            eps_m=_rat_in(raw["eps_m"]),
            eps_k=_opt_rat_in(raw["eps_k"]),
            construction=construction,
            eps_2=_opt_rat_in(raw["eps_2"]),
            m=None if raw["m"] is None else _int_in(raw["m"], "m"),
            N=None if raw["N"] is None else _int_in(raw["N"], "N"),
            alpha=_opt_rat_in(raw["alpha"]),
            divisor=_opt_rat_in(raw["divisor"]),
        )
    except KeyError as err:
        raise ParseError(f"mapping file is missing field {err.args[0]!r}") from None
    return mapping, params


# ---------------------------------------------------------------------------
# file helpers


def _check_format(data: dict, expected: str) -> None:
    tag = data.get("format")
    if tag != expected:
        raise ParseError(f"expected format {expected!r}, got {tag!r}")


def _write(path, data: dict) -> None:
    Path(path).write_text(dumps_canonical(data), encoding="utf-8")


def _read(path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise ParseError(f"cannot read {path}: {err}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(f"{path} is not valid JSON: {err}") from None


def write_game(path, game) -> None:
    _write(path, game_to_dict(game))


def read_game(path):
    return game_from_dict(_read(path))


def write_profile(path, profile) -> None:
    _write(path, profile_to_dict(profile))


def read_profile(path) -> list[tuple]:
    return profile_from_dict(_read(path))


def write_mapping(path, mapping: GameMapping, params: ReductionParams) -> None:
    _write(path, mapping_to_dict(mapping, params))


def read_mapping(path) -> tuple[GameMapping, ReductionParams]:
    return mapping_from_dict(_read(path))
