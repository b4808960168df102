"""Cross-component check: the TypeScript trainer served over solsent-clf/1.

Skipped when node or the built trainer is absent; the primary suite never
depends on the secondary component.
"""
import shutil
import subprocess
from pathlib import Path

import pytest

from solsent.classify import ExternalBackend, score_batch
from solsent.textprep import NormalizedText

TRAINER_CLI = Path(__file__).parent.parent / "trainer" / "dist" / "src" / "cli.js"

pytestmark = pytest.mark.skipif(
    shutil.which("node") is None or not TRAINER_CLI.exists(),
    reason="trainer not built (run `npm test` in trainer/)",
)


@pytest.fixture(scope="module")
def trained_model_dir(tmp_path_factory, demo_dir):
    out = tmp_path_factory.mktemp("trainer-model")
    subprocess.run(
        [
            "node", str(TRAINER_CLI), "train",
            "--annotations", str(demo_dir / "annotations.tsv"),
            "--out", str(out),
            "--profile", "tiny", "--lr", "3e-3", "--max-seq", "32", "--seed", "4",
        ],
        check=True,
        capture_output=True,
    )
    return out


def test_trainer_backend_roundtrip(trained_model_dir):
    backend = ExternalBackend.spawn(
        ["node", str(TRAINER_CLI), "serve", "--model", str(trained_model_dir), "--stdio"]
    )
    try:
        assert backend.backend_id == "transformer-trainer"
        texts = [
            NormalizedText("solar energy is the future and I love it", "pos1"),
            NormalizedText("my solar panel broke again, terrible build quality", "neg1"),
        ]
        preds = score_batch(backend, texts)
        assert [p.post_id for p in preds] == ["pos1", "neg1"]
        assert preds[0].label == "positive"
        assert preds[1].label == "negative"
        assert all(0.0 <= p.p_positive <= 1.0 for p in preds)
        # a second batch on the same connection
        again = score_batch(backend, texts)
        assert [p.p_positive for p in again] == [p.p_positive for p in preds]
    finally:
        backend.close()
