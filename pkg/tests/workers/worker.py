"""Self-contained protocol-v1 test worker (no package imports on purpose).

Modes exercise both the happy path and the client's failure handling:

    identity          echo inputs back (classification_logits, K outputs)
    linear            regression: intercept + betas . x
    garbage-hello     prints a non-JSON first line
    wrong-features    hello declares n_features + 1
    die-on-request    valid hello, then crashes on the first request
    error-on-negative answers rows containing negatives with an error object
    bad-id            responds with a mismatched request id
"""

import argparse
import json
import sys


def serve(args):
    mode = args.mode
    n_features = args.n_features
    if mode == "garbage-hello":
        print("this is not json")
        sys.stdout.flush()
        return 0
    betas = [float(b) for b in args.betas.split(",")] if args.betas else None
    if mode == "linear":
        task, n_outputs = "regression", 1
        if betas is None:
            raise SystemExit("linear mode needs --betas")
        n_features = len(betas)
    else:
        task, n_outputs = "classification_logits", n_features
    declared = n_features + 1 if mode == "wrong-features" else n_features
    print(json.dumps({
        "preddiff_bridge": 1,
        "task": task,
        "n_features": declared,
        "n_outputs": n_outputs,
    }, separators=(",", ":")))
    sys.stdout.flush()

    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        if mode == "die-on-request":
            print("worker crashed on purpose", file=sys.stderr)
            sys.stderr.flush()
            return 3
        try:
            request = json.loads(line)
            request_id = request["id"]
            inputs = request["inputs"]
        except (json.JSONDecodeError, KeyError, TypeError):
            print(json.dumps({"id": -1, "error": f"malformed request: {line[:80]}"}),
                  flush=True)
            continue
        if mode == "error-on-negative" and any(v < 0 for row in inputs for v in row):
            print(json.dumps({"id": request_id, "error": "negative input rejected"}),
                  flush=True)
            continue
        if mode == "linear":
            outputs = [[args.intercept + sum(b * v for b, v in zip(betas, row))]
                       for row in inputs]
        else:
            outputs = inputs
        reply_id = request_id + 1 if mode == "bad-id" else request_id
        print(json.dumps({"id": reply_id, "outputs": outputs},
                         separators=(",", ":")), flush=True)
    return 0


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("mode")
    parser.add_argument("--n-features", type=int, default=2)
    parser.add_argument("--betas", default=None)
    parser.add_argument("--intercept", type=float, default=0.0)
    sys.exit(serve(parser.parse_args()))
