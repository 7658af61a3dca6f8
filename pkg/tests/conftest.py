import shutil

import pytest

from csgen.config import load_config
from csgen.corpus_io import LabeledSentence, ParallelPair
from csgen.pipeline import run_pipeline
from csgen.toy import bundled_fixture_dir


def make_pair(src, tgt, sid="p", label=1):
    return ParallelPair(LabeledSentence(sid, tuple(src), label), tuple(tgt))


@pytest.fixture(scope="session")
def toy_dir(tmp_path_factory):
    """A private copy of the bundled toy fixture."""
    dest = tmp_path_factory.mktemp("toy") / "fixture"
    shutil.copytree(bundled_fixture_dir(), dest)
    return dest


@pytest.fixture(scope="session")
def toy_run(toy_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("toy_run")
    cfg = load_config(toy_dir / "config.yaml", {"out_dir": str(out)})
    summary = run_pipeline(cfg)
    return out, summary, cfg
