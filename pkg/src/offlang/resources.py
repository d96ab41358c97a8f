"""Bundled lexicon/table resources and their loaders.

Files live in ``offlang/data/`` and can be overridden by pointing the
``OFFLANG_RESOURCES`` environment variable at a directory holding files with
the same names:

    emoji_table.tsv        codepoints (space-joined hex) <TAB> :name:
    segmenter_words.txt    ranked word list, rank = line number
    pos_lexicon.tsv        word <TAB> tag
    sentiment_lexicon.tsv  word <TAB> valence
    negators.txt           one word per line
    intensifiers.tsv       word <TAB> boost
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from importlib import resources as _ir

from .features import PosLexicon, SentimentLexicon
from .preprocess import EmojiTable, SegmenterLexicon

ENV_VAR = "OFFLANG_RESOURCES"


def _read(name: str) -> str:
    override = os.environ.get(ENV_VAR)
    if override:
        path = os.path.join(override, name)
        with open(path, "r", encoding="utf-8") as f:
            return f.read()
    return _ir.files("offlang").joinpath("data", name).read_text(encoding="utf-8")


@dataclass
class PipelineResources:
    emoji_table: EmojiTable
    seg_lexicon: SegmenterLexicon
    pos_lexicon: PosLexicon
    sent_lexicon: SentimentLexicon


def load_default_resources() -> PipelineResources:
    return PipelineResources(
        emoji_table=EmojiTable.from_tsv(_read("emoji_table.tsv")),
        seg_lexicon=SegmenterLexicon.from_wordlist(_read("segmenter_words.txt")),
        pos_lexicon=PosLexicon.from_tsv(_read("pos_lexicon.tsv")),
        sent_lexicon=SentimentLexicon.from_tsv(
            _read("sentiment_lexicon.tsv"), _read("negators.txt"), _read("intensifiers.tsv")
        ),
    )
