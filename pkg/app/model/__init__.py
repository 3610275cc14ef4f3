from .base import Trainer
from .booster import GradientBoostedTrainer, binary_log_loss, train
from .ensemble import (
    LEAF,
    Tree,
    TreeEnsemble,
    evaluate_accuracy,
    labelled_rows,
    predict_margin,
    predict_proba,
    proba_from_margin,
)
from .serialization import (
    FORMAT_VERSION,
    check_fingerprint,
    deserialize,
    load_model,
    save_model,
    serialize,
)
