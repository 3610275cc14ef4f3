import json
import logging
from pathlib import Path
from typing import List, Optional, Union

from pydantic import BaseModel, ValidationError

from app.errors import FingerprintMismatchError, ModelFormatError
from .ensemble import Tree, TreeEnsemble

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


class NodeModel(BaseModel):
    feature: int
    threshold: float
    left: int
    right: int
    cover: float
    leaf_value: float


class TreeModel(BaseModel):
    nodes: List[NodeModel]


class EnsembleFile(BaseModel):
    version: int
    base_margin: float
    feature_count: int
    schema_fingerprint: str = ""
    trees: List[TreeModel]


def _tree_to_model(tree: Tree) -> TreeModel:
    features, thresholds, left, right, cover, values = tree.lists
    return TreeModel(nodes=[
        NodeModel(feature=f, threshold=t, left=l, right=r, cover=c, leaf_value=v)
        for f, t, l, r, c, v in zip(features, thresholds, left, right, cover, values)
    ])


def _tree_from_model(tree: TreeModel) -> Tree:
    return Tree.from_nodes([
        (n.feature, n.threshold, n.left, n.right, n.cover, n.leaf_value) for n in tree.nodes
    ])


def serialize(model: TreeEnsemble) -> str:
    """Model file text. Floats are written with repr, so a round-trip is exact."""
    document = EnsembleFile(
        version=FORMAT_VERSION,
        base_margin=model.base_margin,
        feature_count=model.feature_count,
        schema_fingerprint=model.schema_fingerprint,
        trees=[_tree_to_model(tree) for tree in model.trees],
    )
    return json.dumps(document.model_dump(), indent=1) + "\n"


def deserialize(text: str, expected_fingerprint: Optional[str] = None,
                strict: bool = False) -> TreeEnsemble:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"model file is not valid JSON: {e}") from e
    if not isinstance(raw, dict):
        raise ModelFormatError("model file must hold an object")
    version = raw.get("version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model file version {version!r} (expected {FORMAT_VERSION})")
    try:
        document = EnsembleFile.model_validate(raw)
    except ValidationError as e:
        raise ModelFormatError(f"malformed model file: {e}") from e

    trees = tuple(_tree_from_model(tree) for tree in document.trees)
    model = TreeEnsemble(trees, document.base_margin, document.feature_count, document.schema_fingerprint)
    check_fingerprint(model, expected_fingerprint, strict)
    return model


def check_fingerprint(model: TreeEnsemble, expected: Optional[str], strict: bool) -> bool:
    """
    False when both fingerprints are known and differ. A model without a
    fingerprint is accepted as-is. In strict mode a mismatch raises.
    """
    if not expected or not model.schema_fingerprint or model.schema_fingerprint == expected:
        return True
    message = (f"model was trained on schema {model.schema_fingerprint[:12]}, "
               f"data uses {expected[:12]}")
    if strict:
        raise FingerprintMismatchError(message)
    logger.warning(message)
    return False


def save_model(model: TreeEnsemble, path: Union[str, Path]) -> None:
    Path(path).write_text(serialize(model), encoding="utf-8")
    logger.info("Wrote model with %d trees to %s", len(model.trees), path)


def load_model(path: Union[str, Path], expected_fingerprint: Optional[str] = None,
               strict: bool = False) -> TreeEnsemble:
    return deserialize(Path(path).read_text(encoding="utf-8"), expected_fingerprint, strict)
