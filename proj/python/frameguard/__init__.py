"""Frame-aware comment health analysis and moderation."""

import json

from ._core import (
    Error,
    FitError,
    IoError,
    ParseError,
    RemoteError,
    ValidationError,
    assess_risk,
    cohen_kappa,
    ingest,
    parse_guidance,
    ptukey,
    qtukey,
    rebalance_counts,
    score_health,
    spearman,
    split_sentences,
)
from . import _core


def analyze_article(text):
    return json.loads(_core.analyze_article_json(text))


def moderate(article, comment):
    return json.loads(_core.moderate_json(article, comment))


def analyze_store(store, seed=42):
    return json.loads(_core.analyze_store_json(str(store), seed))


__all__ = [
    "Error",
    "FitError",
    "IoError",
    "ParseError",
    "RemoteError",
    "ValidationError",
    "analyze_article",
    "analyze_store",
    "assess_risk",
    "cohen_kappa",
    "ingest",
    "moderate",
    "parse_guidance",
    "ptukey",
    "qtukey",
    "rebalance_counts",
    "score_health",
    "spearman",
    "split_sentences",
]
