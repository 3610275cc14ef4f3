from .baseline import Normalization, WeightSpec, baseline_rank, stat_lines_frame
from .metrics import accuracy, alignment_score, ard, mvp_rank, recall_at_k, srcc
from .report import MetricRow, evaluate_ranking, read_ground_truth, write_ground_truth, write_report
