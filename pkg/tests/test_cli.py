import hashlib
import json

import pytest

from app.cli import main
from app.dataset import read_schema, write_box_scores
from app.harness import LeagueConfig, generate_league, league_schema

FAST = ["--num-trees", "4", "--max-depth", "2"]


@pytest.fixture
def fixture_files(tmp_path, box_scores_text, schema):
    data = tmp_path / "box.csv"
    data.write_text(box_scores_text)
    schema_path = tmp_path / "schema.json"
    schema_path.write_text(schema.to_json())
    return data, schema_path


@pytest.fixture
def league_files(tmp_path):
    out = tmp_path / "league"
    assert main(["synth", "--out", str(out), "--seed", "3", "--teams", "4", "--players", "3",
                 "--stats", "3", "--games", "40"]) == 0
    return out


def _digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_ingest_reports_counts(fixture_files, capsys):
    data, schema_path = fixture_files
    assert main(["ingest", "--seed", "0", "--data", str(data), "--schema", str(schema_path)]) == 0
    assert capsys.readouterr().out.strip() == "games: 2, players: 8, stats: 3"


def test_ingest_missing_file(tmp_path, fixture_files):
    _, schema_path = fixture_files
    assert main(["ingest", "--seed", "0", "--data", str(tmp_path / "nope.csv"), "--schema", str(schema_path)]) == 1


def test_ingest_bad_header_names_column(tmp_path, fixture_files, box_scores_text, caplog):
    _, schema_path = fixture_files
    bad = tmp_path / "bad.csv"
    bad.write_text(box_scores_text.replace("REB", "AST", 1))
    assert main(["ingest", "--seed", "0", "--data", str(bad), "--schema", str(schema_path)]) == 1
    assert "AST" in caplog.text


def test_synth_is_deterministic(tmp_path, league_files, capsys):
    again = tmp_path / "again"
    assert main(["synth", "--out", str(again), "--seed", "3", "--teams", "4", "--players", "3",
                 "--stats", "3", "--games", "40"]) == 0
    for name in ("box_scores.csv", "skills.csv", "truth.csv", "schema.json"):
        assert _digest(league_files / name) == _digest(again / name)
    assert "true_value" in (league_files / "skills.csv").read_text().splitlines()[0]
    capsys.readouterr()
    assert main(["ingest", "--seed", "0", "--data", str(league_files / "box_scores.csv"),
                 "--schema", str(league_files / "schema.json")]) == 0
    assert capsys.readouterr().out.strip() == "games: 40, players: 12, stats: 3"


def _league_args(league_files):
    return ["--data", str(league_files / "box_scores.csv"), "--schema", str(league_files / "schema.json")]


def test_train_writes_reproducible_model(tmp_path, league_files, capsys):
    first, second = tmp_path / "m1.json", tmp_path / "m2.json"
    for path in (first, second):
        assert main(["train", *_league_args(league_files), "--model", str(path), "--seed", "5", *FAST]) == 0
    line = capsys.readouterr().out.strip().splitlines()[-1]
    assert line.startswith("accuracy: ")
    assert 0.0 <= float(line.split(": ")[1]) <= 1.0
    assert _digest(first) == _digest(second)


def test_train_rejects_full_ratio(tmp_path, league_files):
    assert main(["train", *_league_args(league_files), "--model", str(tmp_path / "m.json"),
                 "--seed", "5", "--ratio", "1.0"]) == 1


def test_train_needs_seed(tmp_path, league_files, monkeypatch):
    monkeypatch.delenv("MVPSHAP_SEED", raising=False)
    assert main(["train", *_league_args(league_files), "--model", str(tmp_path / "m.json")]) == 1


@pytest.mark.parametrize("command", ["ingest", "rank", "evaluate"])
def test_every_command_needs_seed(fixture_files, monkeypatch, caplog, command):
    monkeypatch.delenv("MVPSHAP_SEED", raising=False)
    data, schema_path = fixture_files
    assert main([command, "--data", str(data), "--schema", str(schema_path)]) == 1
    assert "--seed" in caplog.text
    monkeypatch.setenv("MVPSHAP_SEED", "4")
    assert main(["ingest", "--data", str(data), "--schema", str(schema_path)]) == 0


def test_rank_m3_and_attribution_dump(tmp_path, league_files):
    model = tmp_path / "model.json"
    assert main(["train", *_league_args(league_files), "--model", str(model), "--seed", "1", *FAST]) == 0
    ranking, attributions = tmp_path / "ranking.csv", tmp_path / "phi.csv"
    assert main(["rank", "--seed", "0", *_league_args(league_files), "--model", str(model), "--method", "m3",
                 "--out", str(ranking), "--attributions", str(attributions)]) == 0
    lines = ranking.read_text().splitlines()
    assert lines[0] == "rank,player_id,score,games,method"
    assert len(lines) == 13
    assert all(line.endswith(",m3") for line in lines[1:])
    phi_lines = attributions.read_text().splitlines()
    assert len(phi_lines) == 1 + 2 * 40
    assert phi_lines[0].split(",")[:3] == ["sample_id", "baseline", "phi_1"]


def test_rank_single_game_gives_one_mvp_line(tmp_path, league_files):
    model = tmp_path / "model.json"
    assert main(["train", *_league_args(league_files), "--model", str(model), "--seed", "1", *FAST]) == 0
    schema = read_schema(league_files / "schema.json")
    config = LeagueConfig(teams=4, players_per_team=3, stats=3, games=40, seed=3)
    games, _ = generate_league(config)
    assert league_schema(config) == schema
    one = tmp_path / "one.csv"
    with open(one, "w", newline="") as f:
        write_box_scores(games[:1], schema, f)
    out = tmp_path / "single.csv"
    assert main(["rank", "--seed", "0", "--data", str(one), "--schema", str(league_files / "schema.json"),
                 "--model", str(model), "--method", "single", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 2
    assert lines[1].startswith(games[0].game_id + ",1,")
    winners = {line.player_id for line in games[0].winners()}
    assert lines[1].split(",")[2] in winners


def test_rank_reuses_the_binning_saved_by_train(tmp_path, league_files):
    model = tmp_path / "model.json"
    assert main(["train", *_league_args(league_files), "--model", str(model), "--seed", "1",
                 "--bins", "signal_1=4", *FAST]) == 0
    saved = tmp_path / "model.binning.json"
    assert [spec["stat"] for spec in json.loads(saved.read_text())] == ["signal_1"]

    config = LeagueConfig(teams=4, players_per_team=3, stats=3, games=40, seed=3)
    games, _ = generate_league(config)
    one = tmp_path / "one.csv"
    with open(one, "w", newline="") as f:
        write_box_scores(games[:1], league_schema(config), f)
    out = tmp_path / "single.csv"
    # one game would fit different cuts; the saved ones are used instead
    assert main(["rank", "--seed", "0", "--data", str(one), "--schema", str(league_files / "schema.json"),
                 "--model", str(model), "--method", "single", "--bins", "signal_1=4", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 2

    other = _write(tmp_path / "other.json", json.dumps([{"stat": "signal_1", "boundaries": [0.5], "t": 2}]))
    assert main(["rank", "--seed", "0", *_league_args(league_files), "--model", str(model),
                 "--binning", str(other), "--out", str(tmp_path / "r.csv")]) == 1
    assert main(["rank", "--seed", "0", *_league_args(league_files), "--model", str(model),
                 "--bins", "signal_2=4", "--out", str(tmp_path / "r.csv")]) == 1

    assert main(["train", *_league_args(league_files), "--model", str(model), "--seed", "1", *FAST]) == 0
    assert not saved.exists()


def test_rank_unknown_method_is_usage_error(league_files):
    with pytest.raises(SystemExit) as info:
        main(["rank", "--seed", "0", *_league_args(league_files), "--method", "m9"])
    assert info.value.code == 2


def test_rank_baseline(tmp_path, fixture_files):
    data, schema_path = fixture_files
    out = tmp_path / "baseline.csv"
    assert main(["rank", "--seed", "0", "--data", str(data), "--schema", str(schema_path), "--method", "baseline",
                 "--weights", "PTS=1", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[1].startswith("1,c2,1,")
    assert main(["rank", "--seed", "0", "--data", str(data), "--schema", str(schema_path), "--method", "baseline"]) == 1


def _write(path, text):
    path.write_text(text)
    return path


def test_evaluate_identical_lists(tmp_path, capsys):
    pred = _write(tmp_path / "pred.csv", "rank,player_id,score,games,method\n1,a,3,1,m3\n2,b,2,1,m3\n3,c,1,1,m3\n")
    truth = _write(tmp_path / "truth.csv", "scope,key,rank,player_id\nSEASON,S1,1,a\nSEASON,S1,2,b\nSEASON,S1,3,c\n")
    assert main(["evaluate", "--seed", "0", "--pred", str(pred), "--truth", str(truth)]) == 0
    rows = dict(line.split(",")[:2] for line in capsys.readouterr().out.strip().splitlines()[1:])
    assert float(rows["ard"]) == 0.0
    assert float(rows["srcc"]) == 1.0
    assert float(rows["recall@3"]) == 1.0


def test_evaluate_per_game_truth(tmp_path, capsys):
    pred = _write(tmp_path / "pred.csv",
                  "game_id,rank,player_id,score,games,method\ng1,1,a,0.5,1,single\ng2,1,c,0.1,1,single\n")
    truth = _write(tmp_path / "truth.csv", "scope,key,rank,player_id\nPER_GAME,g1,1,a\nPER_GAME,g2,1,d\n")
    out = tmp_path / "report.csv"
    assert main(["evaluate", "--seed", "0", "--pred", str(pred), "--truth", str(truth), "--out", str(out)]) == 0
    assert out.read_text().splitlines()[1] == "acc,0.5,single,PER_GAME"


def test_evaluate_missing_truth(tmp_path):
    pred = _write(tmp_path / "pred.csv", "rank,player_id,score,games,method\n1,a,3,1,m3\n")
    assert main(["evaluate", "--seed", "0", "--pred", str(pred), "--truth", str(tmp_path / "missing.csv")]) == 1


def test_refine_subset_scores_every_pattern(tmp_path, league_files, capsys):
    out = tmp_path / "refine"
    assert main(["refine", "subset", *_league_args(league_files), "--truth", str(league_files / "truth.csv"),
                 "--group-spec", "signal_1;signal_2;noise_1", "--out", str(out), "--seed", "2", *FAST]) == 0
    lines = (out / "refinement.csv").read_text().splitlines()
    assert len(lines) == 1 + 7
    assert capsys.readouterr().out.startswith("best: ")
    best = json.loads((out / "schema.json").read_text())
    assert set(best["stat_names"]) <= {"signal_1", "signal_2", "noise_1"}


def test_refine_subset_from_importance(tmp_path, league_files):
    out = tmp_path / "refine"
    assert main(["refine", "subset", *_league_args(league_files), "--truth", str(league_files / "truth.csv"),
                 "--groups", "1", "--out", str(out), "--seed", "2", *FAST]) == 0
    assert (out / "importance.csv").read_text().splitlines()[0] == "stat,importance,rank"
    assert len((out / "refinement.csv").read_text().splitlines()) == 1 + 3


def test_refine_single_bin_removes_stat(tmp_path, fixture_files):
    data, schema_path = fixture_files
    out = tmp_path / "bins"
    assert main(["refine", "bins", "--data", str(data), "--schema", str(schema_path),
                 "--bins", "PTS=1", "--out", str(out), "--seed", "0"]) == 0
    schema = json.loads((out / "schema.json").read_text())
    assert "PTS" in schema["removed_stats"]
    binning = json.loads((out / "binning.json").read_text())
    assert binning == [{"stat": "PTS", "boundaries": [], "t": 1}]


def test_refine_bins_preset(tmp_path, capsys):
    data = _write(tmp_path / "box.csv",
                  "game_id,season,team_side,player_id,MP,+/-\n"
                  "g1,S1,home,a,30,-4\ng1,S1,home,b,28,-2\ng1,S1,away,c,31,3\ng1,S1,away,d,20,1\n"
                  "g1,S1,result,home_win,0,\n"
                  "g2,S1,home,e,25,6\ng2,S1,home,f,22,0\ng2,S1,away,g,33,-5\ng2,S1,away,h,18,-1\n"
                  "g2,S1,result,home_win,1,\n")
    schema = _write(tmp_path / "schema.json", json.dumps({"stat_names": ["MP", "+/-"]}))
    out = tmp_path / "bins"
    assert main(["refine", "bins", "--data", str(data), "--schema", str(schema),
                 "--bins", "+/-", "--out", str(out), "--seed", "0"]) == 0
    assert capsys.readouterr().out.strip() == "+/-: 3 bins"
    assert json.loads((out / "binning.json").read_text())[0]["t"] == 3


def test_config_file_is_overridden_by_flags(tmp_path, fixture_files, capsys):
    data, schema_path = fixture_files
    config = _write(tmp_path / "run.json", json.dumps({"data": str(tmp_path / "missing.csv"),
                                                       "schema_path": str(schema_path), "seed": 0}))
    assert main(["ingest", "--config", str(config)]) == 1
    assert main(["ingest", "--config", str(config), "--data", str(data)]) == 0
    assert "games: 2" in capsys.readouterr().out
