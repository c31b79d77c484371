"""Corpus serialization, truth sidecars, and reports."""

import json

import numpy as np
import pytest

from unshuffle.corpus_io import (
    CorpusSpec,
    EmptyCorpusError,
    MalformedCorpusError,
    Report,
    load_corpus,
    load_truth,
    word_bytes_for,
    write_corpus,
    write_report,
    write_truth,
)
from unshuffle.model import ModelParams, ShuffledCorpus, generate
from unshuffle.perms import BlockStructure


def test_spec_validation(tmp_path):
    with pytest.raises(ValueError):
        CorpusSpec(source=tmp_path / "x", record_len=0)
    with pytest.raises(ValueError):
        CorpusSpec(source=tmp_path / "x", record_len=4, word_bytes=3)
    spec = CorpusSpec(source=tmp_path / "x", record_len=4, word_bytes=2)
    assert spec.q == 65536
    assert spec.record_bytes == 8


def test_single_file_byte_layout(tmp_path):
    # [DERIVED] 3 records of 4 bytes: columns are records, rows positions.
    path = tmp_path / "c.bin"
    path.write_bytes(bytes([1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12]))
    corpus = load_corpus(CorpusSpec(source=path, record_len=4))
    assert corpus.q == 256
    assert corpus.values.shape == (4, 3)
    assert corpus.values[:, 0].tolist() == [1, 2, 3, 4]
    assert corpus.values[:, 2].tolist() == [9, 10, 11, 12]


def test_two_byte_words_little_endian(tmp_path):
    path = tmp_path / "c.bin"
    path.write_bytes(bytes([1, 0, 0, 1, 2, 0, 0, 2]))
    corpus = load_corpus(CorpusSpec(source=path, record_len=2, word_bytes=2))
    assert corpus.q == 65536
    assert corpus.values.shape == (2, 2)
    assert corpus.values[:, 0].tolist() == [1, 256]
    assert corpus.values[:, 1].tolist() == [2, 512]


def test_directory_layout_sorted(tmp_path):
    d = tmp_path / "records"
    d.mkdir()
    (d / "b.bin").write_bytes(bytes([4, 5, 6]))
    (d / "a.bin").write_bytes(bytes([1, 2, 3]))
    corpus = load_corpus(CorpusSpec(source=d, record_len=3))
    assert corpus.values[:, 0].tolist() == [1, 2, 3]
    assert corpus.values[:, 1].tolist() == [4, 5, 6]


def test_malformed_and_empty(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(bytes([1, 2, 3]))
    with pytest.raises(MalformedCorpusError):
        load_corpus(CorpusSpec(source=path, record_len=2))
    empty = tmp_path / "empty.bin"
    empty.write_bytes(b"")
    with pytest.raises(EmptyCorpusError):
        load_corpus(CorpusSpec(source=empty, record_len=2))
    d = tmp_path / "nodir"
    d.mkdir()
    with pytest.raises(EmptyCorpusError):
        load_corpus(CorpusSpec(source=d, record_len=2))
    multi = tmp_path / "recs"
    multi.mkdir()
    (multi / "r.bin").write_bytes(bytes([1, 2, 3, 4]))
    with pytest.raises(MalformedCorpusError):
        load_corpus(CorpusSpec(source=multi, record_len=2))


def test_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    corpus = ShuffledCorpus(values=rng.integers(0, 256, size=(7, 5)), q=256)
    spec = CorpusSpec(source=tmp_path / "c.bin", record_len=7)
    write_corpus(corpus, spec)
    assert load_corpus(spec).same_as(corpus)


def test_round_trip_wide_alphabet(tmp_path):
    rng = np.random.default_rng(1)
    corpus = ShuffledCorpus(values=rng.integers(0, 70_000, size=(3, 4)), q=70_000)
    spec = CorpusSpec(source=tmp_path / "c.bin", record_len=3,
                      word_bytes=word_bytes_for(70_000))
    write_corpus(corpus, spec)
    loaded = load_corpus(spec)
    assert np.array_equal(loaded.values, corpus.values)


def test_write_rejects_oversized_alphabet(tmp_path):
    corpus = ShuffledCorpus(values=np.array([[300]]), q=512)
    with pytest.raises(ValueError):
        write_corpus(corpus, CorpusSpec(source=tmp_path / "c.bin", record_len=1))


def test_word_bytes_for():
    assert word_bytes_for(2) == 1
    assert word_bytes_for(256) == 1
    assert word_bytes_for(257) == 2
    assert word_bytes_for(65537) == 4
    with pytest.raises(ValueError):
        word_bytes_for(2 ** 33)


def test_truth_round_trip(tmp_path):
    params = ModelParams(q=5, blocks=BlockStructure((2, 3)), num_messages=4,
                         noise_fraction=0.4, shuffle=0.5, seed=13)
    _, truth = generate(params)
    path = tmp_path / "truth.json"
    write_truth(truth, 5, path)
    loaded, q = load_truth(path)
    assert q == 5
    assert np.array_equal(loaded.template, truth.template)
    assert loaded.noise_loci == truth.noise_loci
    assert loaded.column_perms == truth.column_perms
    assert loaded.blocks == truth.blocks
    # sidecar is 1-based on disk
    doc = json.loads(path.read_text())
    assert min(min(p) for p in doc["column_perms"]) == 1
    assert all(l >= 1 for l in doc["noise_loci"])


def test_report_round_trip(tmp_path):
    report = Report(command="unshuffle", params={"q": 3},
                    result={"lengths": [2, 3]}, diagnostics={"score": 1},
                    success=True, seed=7)
    path = tmp_path / "report.json"
    write_report(report, path)
    assert Report.from_json(path.read_text()) == report
