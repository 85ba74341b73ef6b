"""Zero-shot toolkit for socially unacceptable discourse analysis.

Classifies text by scoring premise/hypothesis entailment with pluggable
NLI backends, sweeps hypothesis templates, masks class-correlated tokens
via static-embedding similarity, and benchmarks everything against a
supervised shallow baseline.
"""

from .backends import (
    BackendConfig,
    CachedBackend,
    OracleBackend,
    RemoteBackend,
    StubBackend,
    TransformersBackend,
    create_backend,
    load_backend_configs,
    stub_backend,
)
from .baseline import LrBaselineConfig, train_lr_baseline, vectorize
from .cache import ScoreCache
from .corpus import (
    Corpus,
    CorpusError,
    DatasetManifest,
    DatasetSchema,
    TextRecord,
    bundled_manifests,
    load_dataset,
    load_dataset_with_report,
    load_jsonl,
    load_manifest,
    normalize_labels,
    save_jsonl,
    split,
    stats,
    subsample,
)
from .entailment import (
    BackendError,
    ClassDistribution,
    EntailmentError,
    NliScore,
    classify,
    classify_batch,
    score_pair,
    softmax,
)
from .experiments import (
    ExperimentRunner,
    ExperimentSpec,
    MaskingSpec,
    ResultTable,
    SubsampleSpec,
    load_spec,
    run_benchmark,
    run_masking_ablation,
    run_sweep,
)
from .masking import (
    EmbeddingTable,
    MaskingPolicy,
    MaskResult,
    load_embeddings,
    mask_text,
    similarity,
    tokenize,
)
from .metrics import (
    ConfusionCounts,
    EvalReport,
    evaluate,
    f1,
    macro_f1,
    precision,
    recall,
)
from .templates import (
    CandidateLabelSet,
    HypothesisTemplate,
    TemplateError,
    builtin_templates,
    instantiate,
    load_templates,
    resolve_template,
    validate_template,
)

__version__ = "0.1.0"
