"""
Command-line front end. Each subcommand loads a RunConfig (optional JSON
file, then flags), runs one pipeline stage and writes its CSV/JSON output.
Diagnostics go to stderr; exit status is 0 on success, 1 on a data or
domain error and 2 on a usage error.
"""

import argparse
import io
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, TextIO, Tuple

from app.attribution import batch_attribute, write_attributions
from app.causal import (
    BinCountSelection,
    BinningSpec,
    apply_variant,
    feature_importance,
    fit_and_fuzzify,
    group_features,
    parse_bins,
    parse_groups,
    read_binning,
    subset_search,
    write_bin_report,
    write_binning,
    write_importance,
    write_refinement_report,
)
from app.config import RunConfig, TrainConfig, load_run_config, log_level_default
from app.dataset import BoxScoreIngestor, build_dataset, read_results, read_schema, write_box_scores
from app.errors import MVPShapleyError, RefinementError
from app.eval import (
    WeightSpec,
    baseline_rank,
    evaluate_ranking,
    read_ground_truth,
    write_ground_truth,
    write_report,
)
from app.harness import LeagueConfig, generate_league, league_schema, planted_ground_truth, stat_names, write_skills
from app.model import check_fingerprint, load_model, save_model
from app.mvp import read_ranking, read_single_predictions, write_ranking, write_single_rankings
from app.pipeline import MVPShapleyPipeline
from app.state import GameRecord, GroundTruth, Metric, RankMethod, StatSchema, TruthScope

logger = logging.getLogger(__name__)


def _run_config(args: argparse.Namespace) -> RunConfig:
    overrides = {
        "data": args.data,
        "results": getattr(args, "results", None),
        "schema_path": args.schema,
        "model": getattr(args, "model", None),
        "truth": getattr(args, "truth", None),
        "predictions": getattr(args, "pred", None),
        "binning": getattr(args, "binning", None),
        "out": args.out,
        "attributions": getattr(args, "attributions", None),
        "seed": args.seed,
        "p": getattr(args, "p", None),
        "ratio": getattr(args, "ratio", None),
        "method": getattr(args, "method", None),
        "metric": getattr(args, "metric", None),
        "top_k": getattr(args, "top_k", None),
        "min_games": getattr(args, "min_games", None),
        "groups": getattr(args, "groups", None),
        "group_spec": getattr(args, "group_spec", None),
        "stat": getattr(args, "stat", None),
        "weights": getattr(args, "weights", None),
        "normalization": getattr(args, "normalization", None),
        "bins": parse_bins(args.bins) if getattr(args, "bins", None) else None,
        "bin_candidates": getattr(args, "bin_candidates", None),
        "drop": getattr(args, "drop", None),
        "slot_policy": getattr(args, "slot_policy", None),
        "workers": getattr(args, "workers", None),
        "strict": True if getattr(args, "strict", False) else None,
        "train": {
            "num_trees": getattr(args, "num_trees", None),
            "max_depth": getattr(args, "max_depth", None),
            "learning_rate": getattr(args, "learning_rate", None),
            "min_samples_leaf": getattr(args, "min_samples_leaf", None),
        },
    }
    cfg = load_run_config(args.config, overrides)
    # seed is mandatory for every command
    _require(cfg, "seed")
    return cfg


def _require(cfg: RunConfig, *names: str) -> None:
    missing = [name for name in names if getattr(cfg, name) is None]
    if missing:
        flags = ", ".join("--" + ("schema" if n == "schema_path" else n.replace("_", "-")) for n in missing)
        raise MVPShapleyError(f"missing required setting(s): {flags}")


def _train_config(cfg: RunConfig) -> TrainConfig:
    return cfg.train.model_copy(update={"seed": cfg.seed})


def _load_games(cfg: RunConfig) -> Tuple[List[GameRecord], StatSchema]:
    _require(cfg, "data", "schema_path")
    schema = read_schema(cfg.schema_path)
    results = None
    if cfg.results is not None:
        with open(cfg.results, encoding="utf-8") as f:
            results = read_results(f)
    return BoxScoreIngestor(schema, results).ingest_file(cfg.data), schema


def _max_roster(games: Sequence[GameRecord]) -> int:
    return max(max(len(g.home_roster), len(g.away_roster)) for g in games)


def _truth_for(truths: Sequence[GroundTruth], metric: Metric, games: Sequence[GameRecord]) -> GroundTruth:
    wanted = TruthScope.PER_GAME if metric is Metric.ACC else TruthScope.SEASON
    matching = [t for t in truths if t.scope is wanted]
    if not matching:
        raise RefinementError(f"metric {metric.value} needs a {wanted.value} ground truth")
    seasons = {g.season for g in games}
    return next((t for t in matching if t.key in seasons), matching[0])


def _open_out(path: Optional[Path]) -> TextIO:
    if path is None:
        return sys.stdout
    return open(path, "w", encoding="utf-8", newline="")


def _emit(path: Optional[Path], write) -> None:
    stream = _open_out(path)
    try:
        write(stream)
    finally:
        if stream is not sys.stdout:
            stream.close()


def _binning_path(cfg: RunConfig) -> Optional[Path]:
    """`--binning`, else the `<model>.binning.json` file train writes next to the model."""
    if cfg.binning is not None:
        return Path(cfg.binning)
    if cfg.model is not None:
        return Path(cfg.model).with_suffix(".binning.json")
    return None


def _pipeline(cfg: RunConfig, schema: StatSchema, p: int, bins: Optional[Dict[str, Optional[int]]] = None,
              specs: Sequence[BinningSpec] = ()) -> MVPShapleyPipeline:
    return MVPShapleyPipeline(schema, p, _train_config(cfg), cfg.slot_policy, cfg.drop, bins, specs, cfg.workers)


def cmd_ingest(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    games, schema = _load_games(cfg)
    players = {line.player_id for g in games for line, _ in g.lines()}
    print(f"games: {len(games)}, players: {len(players)}, stats: {schema.q}")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    _require(cfg, "model")
    games, schema = _load_games(cfg)
    specs = ()
    if not cfg.bins and cfg.binning is not None and Path(cfg.binning).exists():
        specs = read_binning(cfg.binning)
    pipeline = _pipeline(cfg, schema, cfg.p or _max_roster(games), cfg.bins, specs)
    prepared = pipeline.prepare(games)
    outcome = pipeline.train(prepared, cfg.ratio, cfg.seed)
    save_model(outcome.model, cfg.model)
    binning = _binning_path(cfg)
    if pipeline.binning:
        write_binning(pipeline.binning, binning)
        logger.info("Wrote %d binning spec(s) to %s", len(pipeline.binning), binning)
    elif cfg.binning is None and binning.exists():
        # a stale sidecar from an earlier binned model at this path
        binning.unlink()
    print(f"accuracy: {outcome.accuracy:.4f}")
    return 0


def cmd_rank(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    method = RankMethod(cfg.method)
    games, schema = _load_games(cfg)

    if method is RankMethod.BASELINE:
        _require(cfg, "weights")
        weights = WeightSpec.parse(cfg.weights, cfg.normalization)
        ranking = baseline_rank(games, schema, weights, cfg.min_games)
        _emit(cfg.out, lambda s: write_ranking(ranking, s))
        return 0

    _require(cfg, "model")
    model = load_model(cfg.model)
    # bins are never refitted here: the cuts train saved are reapplied
    binning = _binning_path(cfg)
    specs = read_binning(binning) if binning.exists() else []
    missing = sorted(set(cfg.bins or {}) - {spec.stat for spec in specs})
    if missing:
        raise RefinementError(f"no saved binning for {missing} at {binning}; train with --bins writes it")
    pipeline = _pipeline(cfg, schema, cfg.p or 0, specs=specs)
    prepared = pipeline.prepare(games)
    if not cfg.p:
        pipeline.p = model.feature_count // (2 * pipeline.schema.q)
    check_fingerprint(model, pipeline.fingerprint, cfg.strict)

    if cfg.attributions is not None:
        samples = build_dataset(prepared, pipeline.schema, pipeline.p, pipeline.slot_policy)
        vectors = batch_attribute(model, samples, cfg.workers)
        _emit(cfg.attributions, lambda s: write_attributions(vectors, s))

    contributions = pipeline.contributions(model, prepared)
    if method is RankMethod.SINGLE:
        rankings = pipeline.rank_single(contributions)
        _emit(cfg.out, lambda s: write_single_rankings(rankings, s))
    else:
        ranking = pipeline.rank(contributions, method, cfg.min_games)
        _emit(cfg.out, lambda s: write_ranking(ranking, s))
    return 0


def cmd_refine(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    _require(cfg, "out")
    games, schema = _load_games(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    p = cfg.p or _max_roster(games)
    metric = Metric(cfg.metric)

    if args.mode == "bins":
        return _refine_bins(cfg, games, schema, p, metric, out)

    _require(cfg, "truth")
    games, schema, _ = apply_variant(games, schema, cfg.drop, cfg.bins)
    with open(cfg.truth, encoding="utf-8") as f:
        truth = _truth_for(read_ground_truth(f), metric, games)

    if cfg.group_spec:
        groups = parse_groups(cfg.group_spec, schema)
    else:
        pipeline = MVPShapleyPipeline(schema, p, _train_config(cfg), cfg.slot_policy, workers=cfg.workers)
        model = load_model(cfg.model, schema.fingerprint(p), True) if cfg.model else pipeline.train(games).model
        vectors = batch_attribute(model, build_dataset(games, schema, p, pipeline.slot_policy), cfg.workers)
        report = feature_importance(vectors, schema, p)
        _emit(out / "importance.csv", lambda s: write_importance(report, s))
        groups = group_features(report, cfg.groups)

    candidates = subset_search(games, schema, groups, truth, metric, _train_config(cfg), p,
                               cfg.slot_policy, cfg.top_k, cfg.min_games, cfg.workers)
    _emit(out / "refinement.csv", lambda s: write_refinement_report(candidates, groups, s))
    best = candidates[0]
    if best.failed:
        raise RefinementError("every subset candidate failed")
    (out / "schema.json").write_text(schema.restrict(best.stats).to_json() + "\n", encoding="utf-8")
    print(f"best: {'+'.join(best.stats)} ({metric.value}={best.score:.4f})")
    return 0


def _refine_bins(cfg: RunConfig, games, schema: StatSchema, p: int, metric: Metric, out: Path) -> int:
    if cfg.bins:
        _, fuzzified, specs = apply_variant(games, schema, cfg.drop, cfg.bins)
    else:
        _require(cfg, "stat", "truth")
        games, schema, _ = apply_variant(games, schema, cfg.drop)
        with open(cfg.truth, encoding="utf-8") as f:
            truth = _truth_for(read_ground_truth(f), metric, games)
        selection = BinCountSelection(cfg.stat, truth, p, metric, _train_config(cfg), cfg.slot_policy,
                                      cfg.top_k, cfg.min_games, cfg.workers)
        scores = selection.search(games, schema, cfg.bin_candidates)
        _emit(out / "bins.csv", lambda s: write_bin_report(scores, s))
        _, fuzzified, spec = fit_and_fuzzify(games, schema, cfg.stat, selection.best(scores))
        specs = [spec]
    write_binning(specs, out / "binning.json")
    (out / "schema.json").write_text(fuzzified.to_json() + "\n", encoding="utf-8")
    for spec in specs:
        print(f"{spec.stat}: {spec.t} bins")
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    _require(cfg, "predictions", "truth")
    text = Path(cfg.predictions).read_text(encoding="utf-8")
    with open(cfg.truth, encoding="utf-8") as f:
        truths = read_ground_truth(f)
    header = text.split("\n", 1)[0].split(",")
    if header and header[0] == "game_id":
        rows = evaluate_ranking(None, truths, cfg.top_k, read_single_predictions(io.StringIO(text)), "single")
    else:
        rows = evaluate_ranking(read_ranking(io.StringIO(text)), truths, cfg.top_k)
    _emit(cfg.out, lambda s: write_report(rows, s))
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    _require(cfg, "out")
    league = LeagueConfig(teams=args.teams, players_per_team=args.players, stats=args.stats, games=args.games,
                          signal_stats=args.signal_stats, noise_scale=args.noise_scale,
                          skill_scale=args.skill_scale, star_boost=args.star_boost,
                          fixed_teams=args.fixed_teams, seed=cfg.seed)
    games, skills = generate_league(league)
    schema = league_schema(league)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    _emit(out / "box_scores.csv", lambda s: write_box_scores(games, schema, s))
    _emit(out / "skills.csv", lambda s: write_skills(skills, stat_names(league), s))
    _emit(out / "truth.csv", lambda s: write_ground_truth([planted_ground_truth(skills, league.teams)], s))
    (out / "schema.json").write_text(schema.to_json() + "\n", encoding="utf-8")
    print(f"games: {len(games)}, players: {len(skills)}")
    return 0


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON run config; flags override it")
    parser.add_argument("--data", type=Path, help="box-score CSV")
    parser.add_argument("--results", type=Path, help="sidecar results CSV game_id,home_win")
    parser.add_argument("--schema", type=Path, help="schema JSON listing stats in order")
    parser.add_argument("--out", type=Path)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--log-level", default=None)


def _variant(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--p", type=int, help="slots per team")
    parser.add_argument("--slot-policy", choices=["minutes_desc", "player_id", "roster_order"])
    parser.add_argument("--drop", nargs="+", metavar="STAT")
    parser.add_argument("--bins", action="append", metavar="STAT=T", help="fuzzify STAT into T buckets")
    parser.add_argument("--binning", type=Path, help="binning spec file")
    parser.add_argument("--num-trees", type=int)
    parser.add_argument("--max-depth", type=int)
    parser.add_argument("--learning-rate", type=float)
    parser.add_argument("--min-samples-leaf", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mvp-shapley", description="Shapley-value MVP rankings from box scores.")
    sub = parser.add_subparsers(dest="command", required=True)

    ingest = sub.add_parser("ingest", help="validate box scores")
    _common(ingest)
    ingest.set_defaults(func=cmd_ingest)

    train = sub.add_parser("train", help="train the win-loss model")
    _common(train)
    _variant(train)
    train.add_argument("--model", type=Path, help="model file to write")
    train.add_argument("--ratio", type=float, help="train share of games (default 0.9)")
    train.set_defaults(func=cmd_train)

    rank = sub.add_parser("rank", help="rank players")
    _common(rank)
    _variant(rank)
    rank.add_argument("--model", type=Path)
    rank.add_argument("--method", choices=[m.value for m in RankMethod])
    rank.add_argument("--min-games", type=int)
    rank.add_argument("--attributions", type=Path, help="also dump per-sample attributions")
    rank.add_argument("--weights", help="baseline weights stat=w,stat=w")
    rank.add_argument("--normalization", choices=["minmax", "zscore"])
    rank.add_argument("--strict", action="store_true", help="fail on schema fingerprint mismatch")
    rank.set_defaults(func=cmd_rank)

    refine = sub.add_parser("refine", help="subset search or fuzzification")
    refine.add_argument("mode", choices=["subset", "bins"])
    _common(refine)
    _variant(refine)
    refine.add_argument("--model", type=Path, help="model used for importance grouping")
    refine.add_argument("--truth", type=Path)
    refine.add_argument("--metric", choices=[m.value for m in Metric])
    refine.add_argument("--top-k", type=int)
    refine.add_argument("--min-games", type=int)
    refine.add_argument("--groups", type=int, help="stats kept as singleton groups")
    refine.add_argument("--group-spec", help="explicit groups, e.g. 'a+b;c;d'")
    refine.add_argument("--stat", help="stat whose bin count is selected")
    refine.add_argument("--bin-candidates", type=int, nargs="+")
    refine.set_defaults(func=cmd_refine)

    evaluate = sub.add_parser("evaluate", help="score a ranking against ground truth")
    _common(evaluate)
    evaluate.add_argument("--pred", type=Path)
    evaluate.add_argument("--truth", type=Path)
    evaluate.add_argument("--top-k", type=int)
    evaluate.set_defaults(func=cmd_evaluate)

    synth = sub.add_parser("synth", help="generate a planted synthetic league")
    _common(synth)
    synth.add_argument("--teams", type=int, default=8)
    synth.add_argument("--players", type=int, default=5)
    synth.add_argument("--stats", type=int, default=4)
    synth.add_argument("--games", type=int, default=240)
    synth.add_argument("--signal-stats", type=int, default=2)
    synth.add_argument("--noise-scale", type=float, default=1.0)
    synth.add_argument("--skill-scale", type=float, default=1.0)
    synth.add_argument("--star-boost", type=float, default=0.0)
    synth.add_argument("--fixed-teams", action="store_true", help="teams keep the same players every game")
    synth.set_defaults(func=cmd_synth)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=(args.log_level or log_level_default()).upper(), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError) as e:
        logger.error("%s", e)
        return 1
