"""Explaining an external process over the line-oriented bridge protocol.

Any executable that speaks newline-delimited JSON on its standard streams can
serve predictions: one hello line declaring task and shapes, then one
response per request. This demo writes a minimal worker to a temp file,
spawns it, and runs the same relevance computation against the in-process
model to show the numbers agree bit-for-bit.

Run: python demos/05_external_model_bridge.py
"""

import sys
import tempfile
import textwrap
from pathlib import Path

import numpy as np

import preddiff as pd

WORKER_SOURCE = textwrap.dedent('''
    import json, sys
    BETAS = [2.0, 3.0, -1.0]
    print(json.dumps({"preddiff_bridge": 1, "task": "regression",
                      "n_features": 3, "n_outputs": 1}), flush=True)
    for line in sys.stdin:
        request = json.loads(line)
        outputs = [[sum(b * v for b, v in zip(BETAS, row))]
                   for row in request["inputs"]]
        print(json.dumps({"id": request["id"], "outputs": outputs}), flush=True)
''')

with tempfile.TemporaryDirectory() as tmp:
    worker_path = Path(tmp) / "linear_worker.py"
    worker_path.write_text(WORKER_SOURCE)

    rng = np.random.default_rng(3)
    data = pd.Dataset(rng.standard_normal((200, 3)))
    imputer = pd.ExhaustiveConditionalImputer(data, "marginal")
    task = pd.TaskKind.regression()

    remote = pd.bridge_model([sys.executable, str(worker_path)],
                             expected_features=data.n_cols)
    local = pd.linear_model([2.0, 3.0, -1.0])
    print(f"worker hello: {remote.connection.hello}")

    try:
        print(f"\n{'feature':>8} {'bridge':>12} {'in-process':>12}")
        for j in range(3):
            a = pd.relevance(remote, task, data.row(0), pd.FeatureSet([j]),
                             imputer, None)
            b = pd.relevance(local, task, data.row(0), pd.FeatureSet([j]),
                             imputer, None)
            match = "==" if a.scalar() == b.scalar() else "!="
            print(f"{j:>8} {a.scalar():12.6f} {match:^4} {b.scalar():12.6f}")
        print(f"\nrows sent over the wire: {remote.call_count}")
    finally:
        remote.close()

print("""
The JSON floats use shortest round-trip formatting, so the bridge is exact:
the two columns match to the last bit, not just to a tolerance.
""")
