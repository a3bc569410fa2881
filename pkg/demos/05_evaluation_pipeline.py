"""
From synthetic scenes to an evaluation report
=============================================

The command line tool chains generation, clustering, target encoding and
evaluation through JSON-lines files.  Here the same steps run in-process.
"""

# %%
import json
import tempfile
from pathlib import Path

from rboxkit.cli import main

work = Path(tempfile.mkdtemp())
spec = {
    "width": 640, "height": 480, "images": 5, "seed": 1,
    "classes": [
        {"name": "label", "count": 6, "family": "square"},
        {"name": "tape", "count": 2, "family": "elongated"},
        {"name": "rust", "count": 2, "family": "blob"},
    ],
}
(work / "spec.json").write_text(json.dumps(spec))


def run(*args):
    code = main([str(a) for a in args])
    assert code == 0, code


# %%
run("generate", work / "spec.json", work / "ann.jsonl")
run("cluster", work / "ann.jsonl", "--k", 4, "--k", 6, "--baseline", "ssd", "--out", work / "centroids.json")

# %%
run("encode", work / "ann.jsonl", work / "centroids.json", work / "targets.jsonl", "--k", 6, "--mode", "B", "--grids", "19x19,10x10,5x5")

# %%
# A noisy simulated detector: some misses, jittered boxes, scores in [0.5, 1].
# Detections under the default 0.7 confidence threshold are dropped before NMS,
# which is most of the recall loss below.
run("simulate", work / "ann.jsonl", work / "pred.jsonl", "--drop", 0.1, "--jitter", 0.05, "--score", 0.5, 1.0, "--seed", 2)
run("evaluate", work / "ann.jsonl", work / "pred.jsonl", "--rbox", "--report", work / "report.json")

# %%
report = json.loads((work / "report.json").read_text())
print("post-NMS mAP:", round(report["post_nms"]["map"], 4), " mRIOU:", round(report["post_nms"]["mriou"], 4))
