import json

import pytest

from nlcurv.corpus import (
    BLOB_SEEDS, CorpusEntry, counterexample_blob, counterexample_corpus, load_corpus, symmetric_corpus, write_corpus,
)
from nlcurv.fibers import check_ordered_curvature
from nlcurv.kernel import RadialKernel
from nlcurv.setrep import rasterize


def test_shipped_corpus_matches_regeneration(tmp_path):
    write_corpus(tmp_path)
    fresh = sorted((p.name, json.loads(p.read_text())) for p in tmp_path.glob("*.json"))
    shipped = sorted((e.name + ".json", e.to_dict()) for e in load_corpus())
    assert fresh == shipped


def test_corpus_kinds():
    assert {e.name for e in load_corpus("symmetric")} == {e.name for e in symmetric_corpus()}
    assert [e.seed for e in load_corpus("counterexample")] == list(BLOB_SEEDS)
    assert load_corpus("nothing") == []


def test_entry_roundtrip():
    for e in symmetric_corpus() + counterexample_corpus():
        back = CorpusEntry.from_dict(json.loads(json.dumps(e.to_dict())))
        assert back.to_dict() == e.to_dict()


def _numbers(obj):
    if isinstance(obj, dict):
        for v in obj.values():
            yield from _numbers(v)
    elif isinstance(obj, list):
        for v in obj:
            yield from _numbers(v)
    elif isinstance(obj, float):
        yield obj


def test_blob_seed_is_deterministic_and_dyadic():
    for s in BLOB_SEEDS:
        d = counterexample_blob(s).to_dict()
        assert d == counterexample_blob(s).to_dict()
        vals = list(_numbers(d))
        assert vals and all((v * 64).is_integer() for v in vals)


def test_symmetric_entries_are_mirror_symmetric():
    for e in symmetric_corpus():
        A = rasterize(e.shape, 1 / 64, padding=0.5)
        assert A.reflect(e.plane).equals(A), e.name


@pytest.mark.parametrize("seed", BLOB_SEEDS)
def test_blobs_violate_ordered_curvature(seed):
    A = rasterize(counterexample_blob(seed), 1 / 64, padding=0.5)
    assert not check_ordered_curvature(A, RadialKernel.charball(0.4)).passed
