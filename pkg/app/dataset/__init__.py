from .box_score_ingestor import (
    BoxScoreIngestor,
    parse_box_scores,
    read_results,
    read_schema,
    write_box_scores,
)
from .samples import (
    SlotPolicy,
    build_dataset,
    build_paired_samples,
    feature_index,
    order_roster,
    split_train_test,
    swap_blocks,
    to_matrix,
)
from .transform import map_stat, project_games, stat_values
