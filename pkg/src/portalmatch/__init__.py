"""portalmatch: find and rank integration candidates across published tables.

The pipeline loads a corpus of independently published CSV datasets, builds
a content graph by brute-force matching of attribute names, value sets, and
metadata properties, detects six classes of integration candidates by
pattern matching, and orders them by verification probability, verification
cost, and integration benefit.
"""

from .corpus import (
    Attribute,
    Corpus,
    Dataset,
    Exclusion,
    FilterConfig,
    PropertyMap,
    ValueSet,
    load_corpus,
    parse_dataset,
)
from .graph import ContentGraph, PairBundle, build_graph, neighbors
from .hypotheses import (
    CountsReport,
    DetectConfig,
    Hypothesis,
    HypothesisClass,
    detect_all,
    detect_duplicates,
    detect_join_partners,
    detect_partitioned,
    detect_similar_domains,
    detect_simple_relations,
    detect_versioned,
    summarize,
)
from .matching import (
    IdfTable,
    Match,
    MatchConfig,
    MatchKind,
    MatchRun,
    build_idf,
    containment,
    generate_matches,
    jaccard,
    lev_sim,
    match_dataset_pair,
    name_similarity,
    property_similarity,
    value_set_similarity,
)
from .ranking import (
    DistReport,
    RankedHypothesis,
    RankingConfig,
    Strategy,
    UsageStats,
    benefit,
    cost,
    distribution_report,
    probability,
    rank,
    strategy_transform,
)
from .synth import (
    EvaluationReport,
    GroundTruth,
    GroundTruthRecord,
    SynthConfig,
    evaluate_detection,
    generate_corpus,
)

__version__ = "0.1.0"
