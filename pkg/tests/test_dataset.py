import io

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from app.dataset import (
    SlotPolicy,
    build_dataset,
    build_paired_samples,
    feature_index,
    order_roster,
    parse_box_scores,
    read_results,
    split_train_test,
    swap_blocks,
    to_matrix,
    write_box_scores,
)
from app.errors import ParseError, SchemaError
from app.harness import LeagueConfig, generate_league, league_schema
from app.state import StatSchema


def test_ingest_fixture(games):
    assert [g.game_id for g in games] == ["g1", "g2"]
    assert not games[0].home_win
    assert games[1].home_win
    assert {line.player_id for g in games for line, _ in g.lines()} == {
        "a1", "a2", "b1", "b2", "c1", "c2", "d1", "d2"}
    assert games[0].home_roster[0].values == (30.0, 20.0, 5.0)


def test_unknown_stat_column_is_named(schema, box_scores_text):
    text = box_scores_text.replace("REB", "AST", 1)
    with pytest.raises(ParseError, match="AST"):
        parse_box_scores(io.StringIO(text), schema)


def test_non_numeric_cell_reports_line_and_column(schema, box_scores_text):
    text = box_scores_text.replace("g1,S1,home,a2,20,10,8", "g1,S1,home,a2,20,ten,8")
    with pytest.raises(ParseError) as info:
        parse_box_scores(io.StringIO(text), schema)
    assert info.value.line == 3
    assert info.value.column == "PTS"


def test_error_line_counts_blank_lines(schema, box_scores_text):
    lines = box_scores_text.splitlines()
    lines[2] = lines[2].replace(",10,", ",NaN,")
    # blank file line 3, bad row on line 4
    text = "\n".join(lines[:2] + [""] + lines[2:]) + "\n"
    with pytest.raises(ParseError) as info:
        parse_box_scores(io.StringIO(text), schema)
    assert info.value.line == 4
    assert info.value.column == "PTS"


def test_blank_lines_are_skipped(schema, box_scores_text, games):
    text = box_scores_text.replace("\ng2,", "\n\n\ng2,", 1) + "\n"
    assert parse_box_scores(io.StringIO(text), schema) == games


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(order=st.permutations(["g1"] * 5 + ["g2"] * 5))
def test_interleaved_games_ingest_the_same(schema, box_scores_text, games, order):
    header, *rows = box_scores_text.splitlines()
    queues = {gid: [r for r in rows if r.startswith(gid + ",")] for gid in ("g1", "g2")}
    shuffled = [queues[gid].pop(0) for gid in order]
    assert parse_box_scores(io.StringIO("\n".join([header, *shuffled]) + "\n"), schema) == games


def test_duplicate_player_rejected(schema, box_scores_text):
    text = box_scores_text.replace("g1,S1,away,b2", "g1,S1,away,a1")
    with pytest.raises(ParseError, match="duplicate"):
        parse_box_scores(io.StringIO(text), schema)


def test_missing_result_uses_sidecar(schema, box_scores_text):
    text = "\n".join(line for line in box_scores_text.splitlines() if ",result," not in line) + "\n"
    with pytest.raises(ParseError, match="no result"):
        parse_box_scores(io.StringIO(text), schema)
    results = read_results(io.StringIO("game_id,home_win\ng1,1\ng2,0\n"))
    games = parse_box_scores(io.StringIO(text), schema, results)
    assert [g.home_win for g in games] == [True, False]


def test_blank_percentage_reads_as_zero():
    schema = StatSchema(stat_names=("MP", "FG%"), percent_stats=("FG%",))
    text = ("game_id,season,team_side,player_id,MP,FG%\n"
            "g1,S1,home,a,10,\n"
            "g1,S1,away,b,12,0.5\n"
            "g1,S1,result,home_win,1,\n")
    game, = parse_box_scores(io.StringIO(text), schema)
    assert game.home_roster[0].values == (10.0, 0.0)


def test_write_then_ingest_keeps_games(games, schema):
    buffer = io.StringIO()
    write_box_scores(games, schema, buffer)
    assert parse_box_scores(io.StringIO(buffer.getvalue()), schema) == games


def test_schema_rejects_duplicates():
    with pytest.raises(ValueError):
        StatSchema(stat_names=("PTS", "PTS"))


def test_schema_restrict_keeps_canonical_order(schema):
    restricted = schema.restrict(["REB", "MP"])
    assert restricted.stat_names == ("MP", "REB")
    assert restricted.playing_time_stat == "MP"
    with pytest.raises(SchemaError):
        schema.restrict(["BLK"])


def test_fingerprint_depends_on_p(schema):
    assert schema.fingerprint(2) != schema.fingerprint(3)
    assert schema.fingerprint(2) == StatSchema.from_json(schema.to_json()).fingerprint(2)


def test_feature_index_layout():
    assert feature_index(0, 0, False, p=3, q=2) == 0
    assert feature_index(2, 1, False, p=3, q=2) == 5
    assert feature_index(0, 0, True, p=3, q=2) == 6
    assert feature_index(2, 1, True, p=3, q=2) == 11


def test_roster_ordered_by_minutes(games, schema):
    ordered = order_roster(games[1].home_roster, schema)
    assert [line.player_id for line in ordered] == ["c2", "c1"]
    by_id = order_roster(games[1].home_roster, schema, SlotPolicy.PLAYER_ID)
    assert [line.player_id for line in by_id] == ["c1", "c2"]


def test_paired_sample_is_mirrored(games, schema):
    sample = build_paired_samples(games[0], schema, p=3)
    assert sample.x1.shape == (18,)
    np.testing.assert_array_equal(sample.x2, swap_blocks(sample.x1, 3, 3))
    assert (sample.y1, sample.y2) == (0, 1)
    assert sample.home_slots == ("a1", "a2", None)
    assert sample.away_slots == ("b1", "b2", None)
    # the empty third slot is zero padded
    np.testing.assert_array_equal(sample.x1[6:9], np.zeros(3))
    np.testing.assert_array_equal(sample.x1[9:12], [32.0, 25.0, 4.0])


def test_roster_larger_than_p_rejected(games, schema):
    with pytest.raises(SchemaError):
        build_paired_samples(games[0], schema, p=1)


def test_to_matrix_stacks_both_rows(games, schema):
    X, y = to_matrix(build_dataset(games, schema, p=2))
    assert X.shape == (4, 12)
    assert y.tolist() == [0, 1, 1, 0]


def test_split_keeps_mirrored_rows_together():
    config = LeagueConfig(teams=4, players_per_team=2, stats=2, signal_stats=1, games=20)
    league, _ = generate_league(config)
    samples = build_dataset(league, league_schema(config), p=2)
    train, test = split_train_test(samples, 0.9, seed=3)
    assert len(train) == 18 and len(test) == 2
    assert not {s.game_id for s in train} & {s.game_id for s in test}
    again, _ = split_train_test(samples, 0.9, seed=3)
    assert [s.game_id for s in again] == [s.game_id for s in train]
    with pytest.raises(ValueError):
        split_train_test(samples, 1.0, seed=3)
