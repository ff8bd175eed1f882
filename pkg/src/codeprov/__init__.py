"""codeprov: code provenance toolkit.

Classifies source files as AI-generated or human-written with a two-stage
cascade over base detectors, builds labeled corpora from git histories, and
computes ecosystem and security analytics over verdicts and vulnerability
records.
"""

from .analytics import (
    AdoptionRow,
    CweProfileRow,
    LanguageImpactRow,
    RiskCategory,
    TopBottomRow,
    adoption_by,
    attack_vector_distribution,
    cwe_profile,
    load_cwe_categories,
    net_impact,
    pair_verdicts,
    quarterly_series,
    quarterly_vuln_series,
    severity_compare,
    topn_bottomn,
)
from .cascade import (
    BatchResult,
    CascadeEnsemble,
    DecisionPath,
    EnsembleConfig,
    EnsembleMode,
    Verdict,
    aggregate_scores,
    read_verdicts,
    write_verdicts,
)
from .corpus import (
    GeneratorResponse,
    HarvestSpec,
    PurityViolationError,
    TaskMatrix,
    build_ai_subset,
    build_human_subset,
    build_wild_corpus,
    dedup,
    filter_code_files,
    harvest_repo,
    import_vuln_records,
    load_task_matrix,
)
from .detectors import (
    ConstantDetector,
    Detector,
    DetectorGroup,
    DetectorProfile,
    DetectorScore,
    ExternalScoreDetector,
    MissingScoreError,
    NgramModel,
    NgramPerplexityDetector,
    StyleDetector,
    SubprocessScoreDetector,
    TokenEntropyDetector,
    load_external_scores,
    profile_detectors,
    train_ngram,
)
from .evaluation import evaluate_ensemble, threshold_sweep
from .lexical import (
    LcsRuleSet,
    LexicalProfile,
    classify_app_domain,
    classify_file_function,
    classify_tech_stack,
    detect_language,
    lexical_profile,
    load_rules,
)
from .metrics import ConfusionCounts, MetricsReport, confusion, metrics, split
from .records import (
    AppDomain,
    AttackVector,
    ChangeKind,
    CodeProvError,
    CodeSample,
    CommitFileChange,
    DataError,
    Diagnostic,
    FileFunction,
    InvalidRecordError,
    LanguageId,
    OriginMeta,
    ProvenanceLabel,
    TechStack,
    VulnRecord,
    read_records,
    write_records,
)
from .stats import RankTestResult, mann_whitney_u

__version__ = "0.1.0"
