import concurrent.futures
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.attribution import Explainer, TreeShapExplainer
from app.dataset import SlotPolicy, build_paired_samples
from app.errors import FingerprintMismatchError
from app.model import TreeEnsemble
from app.state import AttributionVector, GameRecord, PairedSample, PlayerContribution, StatSchema

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GameContributions:
    """
    Per-player contributions of one game plus what is needed to check them:
    the margins of both mirrored samples and the attribution mass that fell
    on empty (padded) slots.
    """
    game_id: str
    contributions: Tuple[PlayerContribution, ...]
    margin_home: float
    margin_away: float
    padding: float = 0.0

    def by_player(self) -> Dict[str, float]:
        return {c.player_id: c.phi_total for c in self.contributions}

    def team_total(self, home: bool) -> float:
        return float(sum(c.phi_total for c in self.contributions if c.is_home == home))

    def net_advantage(self) -> float:
        """Home team's summed contribution minus the away team's."""
        return self.team_total(True) - self.team_total(False)

    def identity_gap(self) -> float:
        """Zero up to rounding: net advantage plus padding equals margin(x1) - margin(x2)."""
        return self.net_advantage() + self.padding - (self.margin_home - self.margin_away)


def _slot_sums(phi: np.ndarray, p: int) -> np.ndarray:
    """Rows: home block, away block; columns: slots."""
    return phi.reshape(2, p, -1).sum(axis=2)


def contributions_from_attributions(sample: PairedSample, home_win: bool,
                                    first: AttributionVector, second: AttributionVector) -> GameContributions:
    """
    A home player in slot s gets phi(x1) over home slot s minus phi(x2) over
    away slot s; an away player uses phi(x2) home slot s minus phi(x1) away
    slot s.
    """
    p = len(sample.home_slots)
    s1, s2 = _slot_sums(first.phi, p), _slot_sums(second.phi, p)
    home_phi = s1[0] - s2[1]
    away_phi = s2[0] - s1[1]
    contributions: List[PlayerContribution] = []
    padding = 0.0
    for slot, player in enumerate(sample.home_slots):
        if player is None:
            padding += float(home_phi[slot])
        else:
            contributions.append(PlayerContribution(
                game_id=sample.game_id, player_id=player, phi_total=float(home_phi[slot]),
                on_winning_team=home_win, is_home=True))
    for slot, player in enumerate(sample.away_slots):
        if player is None:
            padding -= float(away_phi[slot])
        else:
            contributions.append(PlayerContribution(
                game_id=sample.game_id, player_id=player, phi_total=float(away_phi[slot]),
                on_winning_team=not home_win, is_home=False))
    return GameContributions(
        game_id=sample.game_id,
        contributions=tuple(contributions),
        margin_home=first.total(),
        margin_away=second.total(),
        padding=padding,
    )


def check_model_schema(model: TreeEnsemble, schema: StatSchema, p: int) -> None:
    if model.schema_fingerprint and model.schema_fingerprint != schema.fingerprint(p):
        raise FingerprintMismatchError(
            "model was trained on a different stat schema or slot count than the data")


def game_contributions(model: TreeEnsemble, game: GameRecord, schema: StatSchema, p: int,
                       slot_policy: SlotPolicy = SlotPolicy.MINUTES_DESC,
                       explainer: Optional[Explainer] = None) -> GameContributions:
    check_model_schema(model, schema, p)
    explainer = explainer or TreeShapExplainer(model)
    sample = build_paired_samples(game, schema, p, slot_policy)
    id1, id2 = sample.sample_ids
    return contributions_from_attributions(
        sample, game.home_win, explainer.explain(sample.x1, id1), explainer.explain(sample.x2, id2))


def player_contribution(model: TreeEnsemble, game: GameRecord, schema: StatSchema, p: int,
                        slot_policy: SlotPolicy = SlotPolicy.MINUTES_DESC) -> List[PlayerContribution]:
    return list(game_contributions(model, game, schema, p, slot_policy).contributions)


def season_contributions(model: TreeEnsemble, games: Sequence[GameRecord], schema: StatSchema, p: int,
                         slot_policy: SlotPolicy = SlotPolicy.MINUTES_DESC,
                         workers: int = 1) -> List[GameContributions]:
    """Contributions for every game, in input order; games are attributed independently."""
    check_model_schema(model, schema, p)
    explainer = TreeShapExplainer(model)

    def one(game: GameRecord) -> GameContributions:
        return game_contributions(model, game, schema, p, slot_policy, explainer)

    if workers <= 1:
        out = [one(game) for game in games]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
            out = list(executor.map(one, games))
    logger.info("Computed player contributions for %d games", len(out))
    return out
