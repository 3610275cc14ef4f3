from .base import Refiner
from .bin_selection import (
    BinCountScore,
    BinCountSelection,
    score_bin_counts,
    select_bin_count,
    write_bin_report,
)
from .binning import (
    BinningSpec,
    apply_bins,
    apply_bins_array,
    fit_and_fuzzify,
    fit_bins,
    fuzzify_games,
    read_binning,
    write_binning,
)
from .grouping import StatGroup, check_partition, group_features, parse_groups
from .importance import ImportanceReport, feature_importance, write_importance
from .information import coarsen_joint, mutual_information
from .subset_search import (
    SubsetCandidate,
    SubsetSearch,
    describe_groups,
    subset_search,
    write_refinement_report,
)
from .variants import apply_variant, drop_stats, parse_bins
