"""Dependency-aware embedding training and few-shot rare-word inference.

The package splits into corpus handling (CoNLL-U parsing, vocabularies,
tuple extraction), negative-sampling trainers for three background models,
embedding-space containers with serialization, few-shot inference methods
that weight context words by parse structure, and rank/correlation
evaluation protocols.
"""

from .corpus import (
    ConlluError,
    NoiseDistribution,
    ParsedSentence,
    Token,
    TrainingTuple,
    Vocabulary,
    build_context_vocabulary,
    build_vocabulary,
    conllu_to_string,
    dependency_context,
    extract_dependency_tuples,
    extract_window_tuples,
    invert_label,
    load_conllu,
    load_vocabulary,
    noise_distribution,
    parse_conllu,
    save_conllu,
    save_vocabulary,
    subsample_weight,
    window_weight,
    write_conllu,
)
from .evaluation import (
    ChimeraItem,
    CRWItem,
    DatasetError,
    DNItem,
    EvalReport,
    EvaluationError,
    eval_chimera,
    eval_crw,
    eval_dn,
    load_chimera_dataset,
    load_crw_dataset,
    load_dn_dataset,
    median_rank,
    mrr,
    spearman,
    write_report_human,
    write_report_machine,
)
from .fewshot import (
    ContextWordRecord,
    EmptyContextError,
    FewShotContext,
    FSLConfig,
    Inferencer,
    NegSamplingVector,
    TARGET_PLACEHOLDER,
    UNREACHABLE,
    context_term,
    dep_weight,
    dependency_distance,
    dependency_path,
    infer_additive,
    infer_dep_additive,
    infer_dm_additive,
    negative_sampling_vector,
    write_diagnostics,
)
from .spaces import (
    DependencyMatrixSet,
    EmbeddingSpace,
    FormatError,
    VersionError,
    cosine,
    cosines_to_all,
    load_matrices,
    load_space,
    load_vectors_text,
    nearest_neighbors,
    rank_of_gold,
    save_matrices,
    save_space,
    save_space_text,
    write_vectors_text,
)
from .stopwords import ENGLISH_STOPWORDS, load_stopwords
from .training import (
    AdagradState,
    AliasTable,
    TrainerConfig,
    TrainingError,
    TrainResult,
    adagrad_update,
    batch_loss_and_grads,
    dm_score,
    sample_negatives,
    train,
    tuple_loss_and_grads,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
