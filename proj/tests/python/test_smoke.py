import importlib.util
import json
import os
from pathlib import Path

import pytest

import frameguard as fg

FIXTURES = Path(os.environ.get("FRAMEGUARD_FIXTURES", Path(__file__).parent.parent / "fixtures"))
LEXICON_ORACLE = Path(__file__).parent.parent / "oracles" / "lexicon_oracle.py"


def test_risk_table_corners():
    assert fg.assess_risk(0.29, "Match")[0] == "high"
    assert fg.assess_risk(0.45, "Complete")[:3] == ("high", "suggest_and_flag", False)
    assert fg.assess_risk(0.45, "Selective")[0] == "medium"
    assert fg.assess_risk(0.6, "Match")[0] == "low"
    assert fg.assess_risk(0.6, "Selective")[0] == "medium"
    with pytest.raises(fg.ValidationError):
        fg.assess_risk(1.5, "Match")
    with pytest.raises(fg.ValidationError):
        fg.assess_risk(0.5, "Sideways")


def test_health_scores_match_the_lexicon_oracle():
    texts = [
        "",
        "You are an idiot and this is stupid.",
        "Thanks, good point. I think the evidence supports it.",
    ]
    spec = importlib.util.spec_from_file_location("lexicon_oracle", LEXICON_ORACLE)
    oracle = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(oracle)
    for text in texts:
        assert fg.score_health(text) == pytest.approx(oracle.score(text), rel=1e-12)


def test_article_and_moderation_round_trip():
    article = "The tax plan will raise costs. Budget experts warn about wages."
    a = fg.analyze_article(article)
    assert a["analysis_id"] == fg.analyze_article(article)["analysis_id"]
    assert len(a["sentences"]) == 2
    m = fg.moderate(article, "You are an idiot and this is stupid.")
    assert m["risk_level"] == "high"
    assert m["allow_post"] is False
    assert len(m["suggestions"]) > 0


def test_guidance_parser():
    raw = '{"risk_level": "medium", "suggestions": ["a"], "allow_post": true}'
    assert fg.parse_guidance("```json\n" + raw + "\n```") == ("medium", ["a"], True)
    with pytest.raises(fg.ParseError):
        fg.parse_guidance("nothing here")


def test_statistics():
    assert fg.cohen_kappa([1, 0, 1, 0], [1, 0, 1, 0]) == 1.0
    assert fg.spearman([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
    assert fg.ptukey(fg.qtukey(0.95, 3), 3) == pytest.approx(0.95)


def test_rebalance_counts():
    labels = [True] * 900 + [False] * 100
    conf = [0.9] * 1000
    assert fg.rebalance_counts(labels, conf) == (200, 100)


def test_ingest_and_analyze(tmp_path):
    n_articles, n_comments, n_diag = fg.ingest(
        str(FIXTURES / "articles.jsonl"), str(FIXTURES / "comments.jsonl"), "jsonl", str(tmp_path / "store")
    )
    assert n_articles == 6
    assert n_diag == 0
    report = fg.analyze_store(tmp_path / "store")
    assert report["metadata"]["n_comments"] == n_comments
    assert set(report["outlets"]) == {"NYT", "SOCC"}
    assert json.dumps(report) == json.dumps(fg.analyze_store(tmp_path / "store"))
