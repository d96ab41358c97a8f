"""offlang: offensive-language detection pipeline toolkit.

Dataset ingestion and label conversion, tweet preprocessing, WordPiece
tokenization, the TF-IDF/GBDT baseline stack, a compact transformer
classifier with its fine-tuning protocol, metrics and an experiment-matrix
runner, plus a synthetic-corpus generator for end-to-end testing.
"""
from .corpus import (
    Dataset,
    DatasetSummary,
    LabelHeuristic,
    Sample,
    SplitSpec,
    combine_summaries,
    concat_datasets,
    dataset_stats,
    parse_labeled_tsv,
    score_to_label,
    stratified_split,
    summarize,
)
from .experiments import ExperimentSpec, run_experiment_matrix
from .features import (
    BaselineFeaturizer,
    FeatureMatrix,
    FeatureVector,
    PosLexicon,
    SentimentLexicon,
    TfIdfModel,
    count_syllables,
    fit_tfidf,
    flesch_kincaid,
    pos_tag,
    sentiment_scores,
    transform_tfidf,
)
from .gbdt import GbdtModel, GbdtParams, predict_gbdt, train_gbdt
from .metrics import (
    ConfusionMatrix,
    MetricsReport,
    confusion,
    metrics,
    render_report,
    select_best,
)
from .preprocess import (
    EmojiTable,
    SegmenterLexicon,
    normalize_hashtags,
    preprocess,
    replace_emojis,
)
from .serialize import GbdtPipeline, load_model, save_model
from .synth import SynthSpec, generate
from .tokenization import (
    NGramSpec,
    WordPieceVocab,
    basic_tokenize,
    extract_ngrams,
    wordpiece_tokenize,
)
from .transformer import (
    TrainingConfig,
    TransformerClassifier,
    TransformerConfig,
    grad_check,
    train_transformer,
)

__version__ = "0.1.0"
