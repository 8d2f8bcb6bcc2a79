"""Independent computation of baseline health scores.

Reads the phrase table from src/scoring.cpp, tokenizes with a regular
expression and counts phrase occurrences with a sliding window. The printed
values are frozen into tests/unit/test_scoring.cpp.
"""
import math
import pathlib
import re
import sys

root = pathlib.Path(__file__).resolve().parents[2]
src = (root / "src" / "scoring.cpp").read_text()
table = src[src.index("kHealthLexicon"):]
table = table[: table.index("}};")]
lexicon = [(p, float(w)) for p, w in re.findall(r'\{"([^"]+)",\s*(-?[0-9.]+)\}', table)]


def tokens(text):
    text = text.replace("’", "'").replace("‘", "'").lower()
    out = []
    for t in re.findall(r"[a-z0-9']+", text):
        t = t.strip("'")
        if t:
            out.append(t)
    return out


def score(text):
    toks = tokens(text)
    logit = math.log(0.75 / 0.25)
    for phrase, w in lexicon:
        p = tokens(phrase)
        n = sum(1 for i in range(len(toks) - len(p) + 1) if toks[i : i + len(p)] == p)
        logit += w * n
    return 1.0 / (1.0 + math.exp(-logit))


TEXTS = [
    "",
    "The bill passed on Tuesday.",
    "You are an idiot and this is stupid.",
    "Thanks, good point. I think the evidence supports it.",
    "Yeah right, you people never learn. Shut up.",
    "I respectfully disagree; perhaps consider the data. Thank you!",
    "Typical liberal nonsense — what a joke.",
    "Idiot idiot idiot",
]

if __name__ == "__main__":
    print(len(lexicon), "phrases", file=sys.stderr)
    for t in TEXTS:
        print(repr(t), "%.15f" % score(t))
