"""Command-line interface tests.

Every command is driven in-process through click's test runner.  Exit
codes are part of the contract (0 success, 1 verification/no-result,
2 parse, 3 parameter, 4 size budget, 5 zero block mass), as is the
absence of floating-point output without --approx, and byte-identical
reduction outputs across runs.
"""

import json
import re

import pytest
from click.testing import CliRunner

from nashreduce import R
from nashreduce.cli import main
from nashreduce.fileio import (
    read_game,
    read_profile,
    write_game,
    write_mapping,
    write_profile,
)
from nashreduce.gadgets import GADGET_KINDS
from nashreduce.model import BimatrixGame, NormalFormGame, PolymatrixGame
from nashreduce.multipliers import predicted_player_count
from nashreduce.reductions import bimatrixify, linearize, lift_to_polymatrix

FLOAT_RE = re.compile(r"\d\.\d")


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def pennies_file(tmp_path):
    game = BimatrixGame.dense(
        [[R(1), R(0)], [R(0), R(1)]], [[R(0), R(1)], [R(1), R(0)]]
    )
    path = tmp_path / "pennies.json"
    write_game(path, game)
    return str(path)


@pytest.fixture
def dominant_file(tmp_path):
    # three players, two strategies, strategy 0 strictly dominant for all
    payoffs = [[[R(1)] * 4, [R(0)] * 4] for _ in range(3)]
    path = tmp_path / "dominant.json"
    write_game(path, NormalFormGame((2, 2, 2), payoffs))
    return str(path)


def invoke(runner, *args):
    return runner.invoke(main, [str(a) for a in args])


# ---------------------------------------------------------------------------
# solve


def test_solve_support_enum_pennies(runner, pennies_file):
    result = invoke(runner, "solve", pennies_file, "--method", "support-enum")
    assert result.exit_code == 0
    assert "((1/2,1/2),(1/2,1/2))" in result.output
    assert "certificate = exact-nash, eps = 0" in result.output
    assert not FLOAT_RE.search(result.output)


def test_solve_writes_profile(runner, pennies_file, tmp_path):
    out = tmp_path / "sol.json"
    result = invoke(runner, "solve", pennies_file, "--out", out)
    assert result.exit_code == 0
    assert read_profile(out) == [(R(1, 2), R(1, 2)), (R(1, 2), R(1, 2))]


def test_solve_approx_shows_floats(runner, pennies_file):
    result = invoke(runner, "solve", pennies_file, "--approx")
    assert result.exit_code == 0
    assert "(0.5)" in result.output


def test_solve_grid(runner, pennies_file):
    result = invoke(
        runner, "solve", pennies_file, "--method", "grid",
        "--eps", "1/2", "--step", "1/2", "--limit", "3",
    )
    assert result.exit_code == 0
    assert "((1/2,1/2),(1/2,1/2))" in result.output
    assert "1 profile(s) pass at eps = 1/2" in result.output


def test_solve_grid_none_found(runner, pennies_file):
    result = invoke(
        runner, "solve", pennies_file, "--method", "grid", "--eps", "0", "--step", "1/3"
    )
    assert result.exit_code == 1
    assert "no profile" in result.output


def test_solve_grid_needs_eps_and_step(runner, pennies_file):
    result = invoke(runner, "solve", pennies_file, "--method", "grid")
    assert result.exit_code == 3


def test_solve_brute_force(runner, dominant_file):
    result = invoke(runner, "solve", dominant_file, "--method", "brute-force")
    assert result.exit_code == 0
    assert "((1,0),(1,0),(1,0))" in result.output
    assert "method = pure-search" in result.output


def test_solve_wrong_game_class(runner, dominant_file):
    result = invoke(runner, "solve", dominant_file, "--method", "support-enum")
    assert result.exit_code == 3


def test_solve_seed_recorded(runner, pennies_file):
    result = invoke(runner, "solve", pennies_file, "--seed", "7")
    assert result.exit_code == 0
    assert "seed = 7" in result.output


def test_malformed_rational_flag_is_a_usage_error(runner, pennies_file):
    result = invoke(runner, "solve", pennies_file, "--method", "grid", "--eps", "abc")
    assert result.exit_code == 2
    result = invoke(runner, "solve", pennies_file, "--method", "grid", "--eps", "1/0")
    assert result.exit_code == 2


def test_malformed_rational_in_file(runner, pennies_file, tmp_path):
    data = json.loads(open(pennies_file).read())
    data["a"][0][0] = "1/0"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    result = invoke(runner, "solve", bad)
    assert result.exit_code == 2


# ---------------------------------------------------------------------------
# verify


def test_verify_exact_nash_at_eps_zero(runner, pennies_file, tmp_path):
    prof = tmp_path / "prof.json"
    write_profile(prof, [(R(1, 2), R(1, 2)), (R(1, 2), R(1, 2))])
    result = invoke(runner, "verify", pennies_file, prof)
    assert result.exit_code == 0
    assert "PASS at eps = 0" in result.output
    assert "realized eps = 0" in result.output


def test_verify_failure_lists_violations(runner, pennies_file, tmp_path):
    prof = tmp_path / "prof.json"
    write_profile(prof, [(R(1), R(0)), (R(1), R(0))])
    result = invoke(runner, "verify", pennies_file, prof)
    assert result.exit_code == 1
    assert "FAIL at eps = 0" in result.output
    assert "realized eps = 1" in result.output
    assert "player 1" in result.output


def test_verify_normal_form_profile(runner, dominant_file, tmp_path):
    prof = tmp_path / "prof.json"
    write_profile(prof, [(R(1), R(0))] * 3)
    result = invoke(runner, "verify", dominant_file, prof)
    assert result.exit_code == 0


# ---------------------------------------------------------------------------
# reduce


def test_reduce_linearize_log_ledger(runner, dominant_file, tmp_path):
    prefix = tmp_path / "lin"
    result = invoke(
        runner, "reduce", dominant_file,
        "--eps-k", "9/10", "--construction", "log", "--stage", "linearize",
        "--out", prefix,
    )
    assert result.exit_code == 0
    assert "eps_m = 1/100000" in result.output
    assert "polymatrix players = 3603" in result.output
    ledger = (tmp_path / "lin.ledger.txt").read_text()
    assert "construction = log" in ledger
    assert "eps_m = 1/100000" in ledger
    game = read_game(tmp_path / "lin.game.json")
    assert isinstance(game, PolymatrixGame)
    assert game.m == 3603


def test_reduce_full_writes_normalized(runner, tmp_path):
    # 2-player source keeps the full stage small (mediators are 1-chains)
    payoffs = [
        [[R(1), R(1)], [R(0), R(0)]],
        [[R(1), R(1)], [R(0), R(0)]],
    ]
    src = tmp_path / "src.json"
    write_game(src, NormalFormGame((2, 2), payoffs))
    prefix = tmp_path / "full"
    result = invoke(runner, "reduce", src, "--eps-k", "1/2", "--out", prefix)
    assert result.exit_code == 0
    game = read_game(tmp_path / "full.game.json")
    normalized = read_game(tmp_path / "full.normalized.json")
    assert isinstance(game, BimatrixGame) and not game.normalized
    assert normalized.normalized
    assert f"bimatrix size = {game.n} x {game.n}" in result.output


def test_reduce_is_deterministic(runner, dominant_file, tmp_path):
    args = ["--eps-k", "9/10", "--construction", "log", "--stage", "linearize"]
    invoke(runner, "reduce", dominant_file, *args, "--out", tmp_path / "a")
    invoke(runner, "reduce", dominant_file, *args, "--out", tmp_path / "b")
    for suffix in (".game.json", ".mapping.json"):
        assert (tmp_path / f"a{suffix}").read_bytes() == (tmp_path / f"b{suffix}").read_bytes()


def test_reduce_rejects_non_normal_form(runner, pennies_file, tmp_path):
    result = invoke(runner, "reduce", pennies_file, "--eps-k", "1/2", "--out", tmp_path / "x")
    assert result.exit_code == 3


def test_reduce_respects_player_budget_env(runner, dominant_file, tmp_path, monkeypatch):
    monkeypatch.setenv("NASHREDUCE_PLAYER_BUDGET", "10")
    result = invoke(runner, "reduce", dominant_file, "--eps-k", "9/10", "--out", tmp_path / "x")
    assert result.exit_code == 4


def test_reduce_missing_file(runner, tmp_path):
    result = invoke(runner, "reduce", tmp_path / "nope.json", "--eps-k", "1/2", "--out", tmp_path / "x")
    assert result.exit_code == 2


# ---------------------------------------------------------------------------
# recover


@pytest.fixture
def linearized(tmp_path):
    payoffs = [[[R(1)] * 4, [R(0)] * 4] for _ in range(3)]
    src = NormalFormGame((2, 2, 2), payoffs)
    gm, mapping, params = linearize(src, R(9, 10), "log")
    game_path = tmp_path / "lin.game.json"
    mapping_path = tmp_path / "lin.mapping.json"
    write_game(game_path, gm)
    write_mapping(mapping_path, mapping, params)
    profile = lift_to_polymatrix([(R(1), R(0))] * 3, mapping)
    profile_path = tmp_path / "lin.profile.json"
    write_profile(profile_path, profile)
    return str(game_path), str(mapping_path), str(profile_path)


def test_recover_linearize_round_trip(runner, linearized, tmp_path):
    game_path, mapping_path, profile_path = linearized
    out = tmp_path / "rec.json"
    result = invoke(runner, "recover", game_path, mapping_path, profile_path, "--out", out)
    assert result.exit_code == 0
    assert "recovered profile: ((1,0),(1,0),(1,0))" in result.output
    assert "verification at eps = 1/100000: PASS" in result.output
    assert read_profile(out) == [(R(1), R(0))] * 3


@pytest.fixture
def bimatrixified(tmp_path):
    gm = PolymatrixGame(
        (2, 2),
        {
            (0, 1): [[R(1), R(0)], [R(0), R(1)]],
            (1, 0): [[R(0), R(1)], [R(1), R(0)]],
        },
    )
    g2, mapping, params = bimatrixify(gm, R(1, 2))
    game_path = tmp_path / "bi.game.json"
    mapping_path = tmp_path / "bi.mapping.json"
    write_game(game_path, g2)
    write_mapping(mapping_path, mapping, params)
    return str(game_path), str(mapping_path)


def test_recover_zero_block_mass(runner, bimatrixified, tmp_path):
    game_path, mapping_path = bimatrixified
    prof = tmp_path / "prof.json"
    write_profile(prof, [(R(1, 4),) * 4, (R(1, 2), R(1, 2), R(0), R(0))])
    result = invoke(runner, "recover", game_path, mapping_path, prof)
    assert result.exit_code == 5
    assert "block 1" in result.output


BAD_BIMATRIX_PROFILE = [
    (R(1, 2), R(1, 2), R(0), R(0)),  # follower's supported zero-payoff strategies violate
    (R(1, 10), R(2, 5), R(1, 4), R(1, 4)),
]


def test_recover_verification_failure_exits_one(runner, bimatrixified, tmp_path):
    game_path, mapping_path = bimatrixified
    prof = tmp_path / "prof.json"
    # every block alive, but nowhere near an eps_2-equilibrium
    write_profile(prof, BAD_BIMATRIX_PROFILE)
    result = invoke(runner, "recover", game_path, mapping_path, prof)
    assert result.exit_code == 1
    assert "FAIL" in result.output
    assert "recovered profile: ((1/5,4/5),(1/2,1/2))" in result.output


def test_recover_eps_override(runner, bimatrixified, tmp_path):
    game_path, mapping_path = bimatrixified
    prof = tmp_path / "prof.json"
    write_profile(prof, BAD_BIMATRIX_PROFILE)
    result = invoke(runner, "recover", game_path, mapping_path, prof, "--eps", "2000")
    assert result.exit_code == 0
    assert "verification at eps = 2000: PASS" in result.output


# ---------------------------------------------------------------------------
# gadget


def test_gadget_list(runner):
    result = invoke(runner, "gadget", "list")
    assert result.exit_code == 0
    for kind in GADGET_KINDS:
        assert kind in result.output


def test_gadget_list_json(runner):
    result = invoke(runner, "gadget", "list", "--json")
    assert result.exit_code == 0
    data = json.loads(result.output)
    assert set(data) == set(GADGET_KINDS)
    assert data["median"]["error_band"] == "20*eps"


@pytest.mark.parametrize(
    "construction,eps",
    # the log construction needs eps fine enough for reliable digits
    [("unary", R(1, 4)), ("log", R(1, 1000))],
)
def test_gadget_build_mult(runner, tmp_path, construction, eps):
    out = tmp_path / "mult.json"
    result = invoke(
        runner, "gadget", "build-mult",
        "--construction", construction, "--eps", f"{eps.numerator}/{eps.denominator}",
        "--out", out,
    )
    assert result.exit_code == 0
    game = read_game(out)
    assert game.m == predicted_player_count(construction, eps) + 2


def test_gadget_test_threshold(runner):
    result = invoke(
        runner, "gadget", "test", "threshold", "--eps", "1/20", "--grid", "1/100"
    )
    assert result.exit_code == 0
    assert re.search(r"threshold\s+441\s+0\s+0 PASS", result.output)


def test_gadget_test_unknown_kind(runner):
    result = invoke(runner, "gadget", "test", "xor")
    assert result.exit_code == 3


def test_gadget_test_bad_eps(runner):
    result = invoke(runner, "gadget", "test", "threshold", "--eps", "1")
    assert result.exit_code == 3
