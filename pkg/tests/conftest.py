import io

import numpy as np
import pytest

from app.dataset import parse_box_scores
from app.model import LEAF, Tree, TreeEnsemble
from app.state import StatSchema

BOX_SCORES = """game_id,season,team_side,player_id,MP,PTS,REB
g1,S1,home,a1,30,20,5
g1,S1,home,a2,20,10,8
g1,S1,away,b1,32,25,4
g1,S1,away,b2,18,6,9
g1,S1,result,home_win,0,,
g2,S1,home,c1,28,12,11
g2,S1,home,c2,35,31,3
g2,S1,away,d1,25,8,7
g2,S1,away,d2,22,9,2
g2,S1,result,home_win,1,,
"""


@pytest.fixture
def schema():
    return StatSchema(stat_names=("MP", "PTS", "REB"), playing_time_stat="MP")


@pytest.fixture
def box_scores_text():
    return BOX_SCORES


@pytest.fixture
def games(schema):
    return parse_box_scores(io.StringIO(BOX_SCORES), schema)


def _stump(feature=0, threshold=0.5, low=0.0, high=1.0, low_cover=1.0, high_cover=1.0,
           feature_count=1, base_margin=0.0):
    tree = Tree.from_nodes([
        (feature, threshold, 1, 2, low_cover + high_cover, 0.0),
        (LEAF, 0.0, -1, -1, low_cover, low),
        (LEAF, 0.0, -1, -1, high_cover, high),
    ])
    return TreeEnsemble((tree,), base_margin, feature_count)


def _random_tree(rng, features, max_depth):
    nodes = []

    def grow(depth, cover):
        i = len(nodes)
        nodes.append(None)
        if depth < max_depth and cover >= 2 and rng.random() < 0.8:
            left_cover = int(rng.integers(1, cover))
            left = grow(depth + 1, left_cover)
            right = grow(depth + 1, cover - left_cover)
            nodes[i] = (int(rng.choice(features)), float(rng.normal()), left, right, float(cover), 0.0)
        else:
            nodes[i] = (LEAF, 0.0, -1, -1, float(cover), float(rng.normal()))
        return i

    grow(0, int(rng.integers(20, 200)))
    return Tree.from_nodes(nodes)


def _random_ensemble(rng, feature_count, n_trees=5, max_depth=4, features=None):
    """Trees with integer covers; splits only use `features` when given."""
    features = list(range(feature_count)) if features is None else list(features)
    trees = tuple(_random_tree(rng, features, max_depth) for _ in range(n_trees))
    return TreeEnsemble(trees, float(rng.normal()), feature_count)


@pytest.fixture(scope="session")
def stump():
    return _stump


@pytest.fixture(scope="session")
def random_ensemble():
    return _random_ensemble


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
