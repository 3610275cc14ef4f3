from .base import Explainer
from .batch import batch_attribute
from .brute_force import BruteForceExplainer, brute_force_shapley, shapley_weights
from .expectation import (
    MAX_BRUTE_FORCE_FEATURES,
    CoalitionMask,
    coalition_values,
    expvalue,
)
from .export import attribution_frame, write_attributions
from .tree_shap import TreeShapExplainer, tree_shap
