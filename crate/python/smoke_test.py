"""Smoke test for the xqual Python extension.

Build and run from the repository root:

    cargo build -p xqual-py --release
    cp target/release/libxqual.so python/xqual.so
    python3 python/smoke_test.py
"""
import json
import math
import os
import random
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
import xqual  # noqa: E402


def corpus(n, seed=0):
    rng = random.Random(seed)
    pos = ["good", "great", "fine", "nice"]
    neg = ["bad", "poor", "awful", "sad"]
    filler = ["the", "a", "day", "film", "plot", "cast", "scene", "time"]
    texts, labels = [], []
    for _ in range(n):
        y = rng.randint(0, 1)
        cues = pos if y else neg
        words = [rng.choice(cues) if rng.random() < 0.3 else rng.choice(filler) for _ in range(20)]
        texts.append(" ".join(words))
        labels.append(y)
    return texts, labels


def main():
    assert xqual.tokenize("Ate 42 apples!") == ["ate", "numbertoken", "apples"]

    texts, labels = corpus(300)
    tfidf = xqual.TfidfModel.fit(texts)
    xs = [tfidf.transform(t) for t in texts]
    assert all(abs(x.norm() - 1.0) < 1e-12 for x in xs)

    lr = xqual.Model.train_linear(xs, labels, seed=1)
    scores = [lr.proba(x) for x in xs]
    train_auc = xqual.auc(scores, labels)
    assert train_auc > 0.95, train_auc

    x = xs[0]
    truth = lr.truth(x)
    shap = lr.kernel_shap(x, n_samples=2048)
    exact = lr.exact_shapley(x)
    assert max(abs(a - b) for a, b in zip(shap.scores, exact.scores)) < 1e-8
    zero = xqual.SparseVector([0.0] * tfidf.dim)
    assert abs(sum(shap.scores) - (lr.logit(x) - lr.logit(zero))) < 1e-10
    assert max(abs(a - b) for a, b in zip(truth.scores, shap.scores)) < 1e-8

    lime = lr.lime(x, seed=3)
    assert lime.method == "lime" and len(lime) == tfidf.dim
    assert "surrogate_r2" in json.loads(lime.metadata_json())

    value, se = lr.infidelity(truth, x, [1.0] * tfidf.dim, n_draws=200, seed=5)
    assert math.isfinite(value) and value >= 0 and se >= 0

    additive = xqual.Model.train_additive(xs, labels, rounds=50)
    a = additive.truth(x)
    assert abs(sum(a.scores) + json.loads(a.metadata_json())["intercept"] - additive.logit(x)) < 1e-9

    forest = xqual.Model.train_forest(xs, labels, n_trees=10, seed=2)
    assert 0.0 <= forest.proba(x) <= 1.0
    try:
        forest.truth(x)
    except ValueError:
        pass
    else:
        raise AssertionError("forest has no truth attribution")
    restored = xqual.Model.from_json(lr.to_json())
    assert restored.logit(x) == lr.logit(x)

    table = xqual.EmbeddingTable.train(texts, dim=8, window=2, k=3)
    tokens = xqual.tokenize(texts[0])
    copies = table.perturb(tokens, m=4, pi=0.0)
    assert all(t == tokens and not pos for t, pos in copies)
    for t, positions in table.perturb(tokens, m=5, pi=0.5, seed=9):
        for p in positions:
            assert t[p] in table.neighbors(tokens[p])

    attribute = lambda toks: lr.truth(tfidf.transform_tokens(toks)).scores  # noqa: E731
    tripled = lambda toks: [3.7 * v for v in attribute(toks)]  # noqa: E731
    base = table.local_lipschitz(attribute, tfidf, tokens, pi=0.2, eps=1.0, seed=4)
    scaled = table.local_lipschitz(tripled, tfidf, tokens, pi=0.2, eps=1.0, seed=4)
    assert base is not None and abs(scaled - 3.7 * base) <= 1e-9 * scaled

    rows = [
        ("LR", "SHAP", 0.8107, 0.001838, 0.41027),
        ("LR", "Truth", 0.8107, 0.001918, 1.838809),
        ("RF", "SHAP", 0.7930, 0.000613, 0.105773),
        ("BigBird", "IG", 0.8359, 0.034362, 21.500845),
    ]
    front = xqual.pareto_frontier(rows)
    assert sorted(front["optimal"]) == ["BigBird IG", "LR SHAP", "RF SHAP"]
    assert front["dominated"]["LR Truth"] == "LR SHAP"

    print(f"xqual python smoke test passed (train AUC {train_auc:.3f})")


if __name__ == "__main__":
    main()
