"""Experiment-matrix runner: (model config x fine-tuning combination) grids.

Each cell concatenates its fine-tuning datasets, trains the configured
model, evaluates on the named validation set and records a metrics row;
rows come out in spec order and every cell is reproducible from its seed.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .corpus import Dataset, concat_datasets
from .features import BaselineFeaturizer
from .gbdt import GbdtParams, train_gbdt
from .metrics import confusion, metrics
from .preprocess import preprocess
from .resources import PipelineResources, load_default_resources
from .serialize import GbdtPipeline
from .tokenization import build_vocab_from_texts
from .transformer import TrainingConfig, TransformerConfig, train_transformer

MODEL_KINDS = ("gbdt", "transformer")


class ExperimentError(ValueError):
    pass


@dataclass
class ExperimentSpec:
    name: str
    model: str  # gbdt | transformer
    fine_tuning: list[str]
    validation: str
    seed: int = 0
    gbdt_params: GbdtParams = field(default_factory=GbdtParams)
    transformer_config: TransformerConfig = field(default_factory=TransformerConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    vocab_size: int = 4000
    min_df_word: int = 2
    min_df_pos: int = 2
    min_df_char: int = 5

    def __post_init__(self):
        if self.model not in MODEL_KINDS:
            raise ExperimentError("unknown model kind %r" % self.model)
        if not self.fine_tuning:
            raise ExperimentError("experiment %r names no fine-tuning datasets" % self.name)


def _train_cell(spec: ExperimentSpec, train_set: Dataset, res: PipelineResources, progress=None):
    """Returns (model object, predict_fn: texts -> 0/1 array)."""
    texts = [s.text for s in train_set.samples]
    if spec.model == "gbdt":
        featurizer = BaselineFeaturizer(
            res.emoji_table, res.seg_lexicon, res.pos_lexicon, res.sent_lexicon,
            min_df_word=spec.min_df_word, min_df_pos=spec.min_df_pos,
            min_df_char=spec.min_df_char,
        ).fit(texts)
        x = featurizer.transform(texts)
        model = train_gbdt(
            x, train_set.labels(), spec.gbdt_params,
            progress=(lambda r, loss: progress("round", r, loss)) if progress else None,
        )
        pipe = GbdtPipeline(featurizer, model)
        return pipe, lambda ts: (pipe.predict_proba(ts) >= 0.5).astype(np.int64)

    clean = lambda t: preprocess(t, res.emoji_table, res.seg_lexicon)  # noqa: E731
    vocab = build_vocab_from_texts([clean(t) for t in texts], max_words=spec.vocab_size)
    training = replace(spec.training, seed=spec.seed)  # the cell seed governs
    clf = train_transformer(
        train_set, vocab, spec.transformer_config, training,
        preprocess_fn=clean,
        progress=(lambda e, loss: progress("epoch", e, loss)) if progress else None,
    )
    return clf, lambda ts: clf.predict([clean(t) for t in ts])


def _run_cell(spec: ExperimentSpec, registry, res, progress):
    try:
        train_set = concat_datasets(
            [registry[i] for i in spec.fine_tuning], "+".join(spec.fine_tuning)
        )
        val_set = registry[spec.validation]
        cell_progress = None
        if progress:
            cell_progress = lambda kind, i, loss: progress(spec.name, kind, i, loss)  # noqa: E731
        model, predict = _train_cell(spec, train_set, res, cell_progress)
        preds = predict([s.text for s in val_set.samples])
        return model, metrics(confusion(list(preds), val_set.labels()))
    except ExperimentError:
        raise
    except ValueError as e:
        raise ExperimentError("experiment %r failed: %s" % (spec.name, e)) from e


def run_experiment_matrix(
    specs: list[ExperimentSpec],
    registry: dict[str, Dataset],
    resources: PipelineResources | None = None,
    progress=None,
    return_models: bool = False,
    max_parallel: int = 1,
):
    """Run every cell and return [(spec, MetricsReport), ...] in spec order.

    Unresolvable dataset ids fail fast, before any training starts. Cells
    share no mutable state and are seeded individually, so ``max_parallel``
    only changes wall-clock behavior: results are identical regardless and
    come out in spec order, not completion order.
    """
    if not specs:
        raise ExperimentError("empty experiment matrix")
    for spec in specs:
        for ds_id in list(spec.fine_tuning) + [spec.validation]:
            if ds_id not in registry:
                raise ExperimentError(
                    "experiment %r references unknown dataset %r" % (spec.name, ds_id)
                )
    res = resources or load_default_resources()
    if max_parallel > 1 and len(specs) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=max_parallel) as pool:
            cells = list(pool.map(lambda s: _run_cell(s, registry, res, progress), specs))
    else:
        cells = [_run_cell(spec, registry, res, progress) for spec in specs]
    results = [(spec, report) for spec, (_, report) in zip(specs, cells)]
    if return_models:
        return results, [model for model, _ in cells]
    return results
