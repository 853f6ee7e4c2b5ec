"""Reference adapter: a fixed logistic model over sparse vectors.

Usage: adapter.py [--mode normal|garbage|slow|tokens|wrong-count]
"""
import json
import math
import sys
import time

mode = sys.argv[sys.argv.index("--mode") + 1] if "--mode" in sys.argv else "normal"
WEIGHTS = [1.5, -2.0, 0.5]


def prob(x):
    z = sum(WEIGHTS[i] * v for i, v in zip(x["idx"], x["val"]) if i < len(WEIGHTS))
    return 1.0 / (1.0 + math.exp(-z))


slow_done = False
for line in sys.stdin:
    msg = json.loads(line)
    op = msg["op"]
    if op == "hello":
        rep = "token-sequence" if mode == "tokens" else "sparse-vector"
        out = {"op": "hello", "representation": rep, "name": "ref-logistic"}
    elif op == "predict":
        if mode == "garbage":
            print("this is not json", flush=True)
            continue
        if mode == "slow" and not slow_done:
            slow_done = True
            time.sleep(1.0)
        if mode == "tokens":
            probs = [min(1.0, len(t) / 10.0) for t in msg["inputs"]]
        else:
            probs = [prob(x) for x in msg["inputs"]]
        if mode == "wrong-count":
            probs = probs[:-1]
        out = {"op": "predict", "probs": probs}
    elif op == "bye":
        sys.exit(0)
    else:
        out = {"op": "error"}
    print(json.dumps(out), flush=True)
