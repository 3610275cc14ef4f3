import logging
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from app.errors import SchemaError
from app.state import GameRecord, PairedSample, PlayerStatLine, StatSchema

logger = logging.getLogger(__name__)


class SlotPolicy(str, Enum):
    MINUTES_DESC = "minutes_desc"  # descending playing time, ties by player_id
    PLAYER_ID = "player_id"
    ROSTER_ORDER = "roster_order"


def order_roster(roster: Sequence[PlayerStatLine], schema: StatSchema,
                 policy: SlotPolicy = SlotPolicy.MINUTES_DESC) -> List[PlayerStatLine]:
    policy = SlotPolicy(policy)
    if policy is SlotPolicy.ROSTER_ORDER:
        return list(roster)
    if policy is SlotPolicy.MINUTES_DESC and schema.playing_time_stat is not None:
        k = schema.index(schema.playing_time_stat)
        return sorted(roster, key=lambda line: (-line.values[k], line.player_id))
    return sorted(roster, key=lambda line: line.player_id)


def feature_index(slot: int, stat: int, away: bool, p: int, q: int) -> int:
    """Zero-based feature index of (slot, stat); both arguments are zero-based."""
    return (p * q if away else 0) + slot * q + stat


def swap_blocks(x: np.ndarray, p: int, q: int) -> np.ndarray:
    half = p * q
    if x.shape[-1] != 2 * half:
        raise SchemaError(f"expected {2 * half} features, got {x.shape[-1]}")
    return np.concatenate([x[..., half:], x[..., :half]], axis=-1)


def _team_block(roster: Sequence[PlayerStatLine], p: int, q: int) -> Tuple[np.ndarray, Tuple[Optional[str], ...]]:
    block = np.zeros(p * q, dtype=np.float64)
    slots: List[Optional[str]] = [None] * p
    for s, line in enumerate(roster):
        if len(line.values) != q:
            raise SchemaError(f"player {line.player_id} has {len(line.values)} stats, schema has {q}")
        block[s * q:(s + 1) * q] = line.values
        slots[s] = line.player_id
    return block, tuple(slots)


def build_paired_samples(game: GameRecord, schema: StatSchema, p: int,
                         slot_policy: SlotPolicy = SlotPolicy.MINUTES_DESC) -> PairedSample:
    """
    x1 = home slots 1..p then away slots 1..p, each slot holding q stats in
    schema order; empty slots stay zero. x2 is x1 with the two blocks swapped.
    """
    if len(game.home_roster) > p or len(game.away_roster) > p:
        raise SchemaError(
            f"game {game.game_id}: roster of {max(len(game.home_roster), len(game.away_roster))} exceeds p={p}")
    q = schema.q
    home, home_slots = _team_block(order_roster(game.home_roster, schema, slot_policy), p, q)
    away, away_slots = _team_block(order_roster(game.away_roster, schema, slot_policy), p, q)
    y1 = 1 if game.home_win else 0
    return PairedSample(
        game_id=game.game_id,
        x1=np.concatenate([home, away]),
        x2=np.concatenate([away, home]),
        y1=y1,
        y2=1 - y1,
        home_slots=home_slots,
        away_slots=away_slots,
    )


def build_dataset(games: Sequence[GameRecord], schema: StatSchema, p: int,
                  slot_policy: SlotPolicy = SlotPolicy.MINUTES_DESC) -> List[PairedSample]:
    return [build_paired_samples(game, schema, p, slot_policy) for game in games]


def to_matrix(samples: Sequence[PairedSample]) -> Tuple[np.ndarray, np.ndarray]:
    """Stacks both mirrored rows of every sample into (X, y)."""
    if not samples:
        return np.zeros((0, 0)), np.zeros(0, dtype=np.int64)
    X = np.vstack([row for s in samples for row in (s.x1, s.x2)])
    y = np.array([label for s in samples for label in (s.y1, s.y2)], dtype=np.int64)
    return X, y


def split_train_test(samples: Sequence[PairedSample], ratio: float,
                     seed: int) -> Tuple[List[PairedSample], List[PairedSample]]:
    """Partition by game so both mirrored rows of a game land on the same side."""
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must lie in (0, 1), got {ratio}")
    game_ids = sorted({s.game_id for s in samples})
    if len(game_ids) < 2:
        raise ValueError("need at least 2 games to split")
    n_train = int(round(ratio * len(game_ids)))
    n_train = min(max(n_train, 1), len(game_ids) - 1)
    order = np.random.default_rng(seed).permutation(len(game_ids))
    train_ids = {game_ids[i] for i in order[:n_train]}
    train = [s for s in samples if s.game_id in train_ids]
    test = [s for s in samples if s.game_id not in train_ids]
    logger.info("Split %d games into %d train / %d test", len(game_ids), n_train, len(game_ids) - n_train)
    return train, test
