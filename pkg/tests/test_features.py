"""Tests for vocabulary construction and BoW / TF-IDF featurization."""
import math

import numpy as np
import pytest

from app.errors import ConfigError, DataError
from app.features import (
    Featurizer,
    SparseVector,
    Vocabulary,
    bow_vector,
    build_vocabulary,
    dump_vocabulary,
    rows,
    tfidf_fit,
    tfidf_transform,
    to_csr,
    tokenize_terms,
    validate_feature_kind,
)

TWO_DOCS = ["covid cases", "covid vaccine"]


def test_tokenize_terms():
    assert tokenize_terms("covid cases rise") == ["covid", "cases", "rise"]
    assert tokenize_terms("a i u") == []
    assert tokenize_terms("covid-19") == ["covid", "19"]
    assert tokenize_terms("new_cases x2") == ["new_cases", "x2"]


def test_build_vocabulary_lexicographic():
    vocab = build_vocabulary(TWO_DOCS)
    assert vocab.term_to_index == {"cases": 0, "covid": 1, "vaccine": 2}
    assert vocab.index_to_term == ("cases", "covid", "vaccine")
    assert build_vocabulary(["aa aa"]).term_to_index == {"aa": 0}


def test_build_vocabulary_empty_corpus():
    with pytest.raises(DataError, match="empty corpus"):
        build_vocabulary([])


def test_vocabulary_terms_unique():
    with pytest.raises(DataError):
        Vocabulary(index_to_term=("a", "a"))


def test_bow_vector_counts():
    vocab = build_vocabulary(TWO_DOCS)
    vector = bow_vector("covid covid cases", vocab)
    assert vector.as_dict() == {0: 1.0, 1: 2.0}
    assert vector.dim == 3


def test_bow_vector_all_oov_is_zero():
    vector = bow_vector("lockdown masks", build_vocabulary(TWO_DOCS))
    assert len(vector.indices) == 0
    assert vector.norm() == 0.0


def test_tfidf_idf_values():
    model = tfidf_fit(TWO_DOCS)
    idf = dict(zip(model.vocab.index_to_term, model.idf))
    assert idf["covid"] == 1.0
    assert idf["cases"] == pytest.approx(1.405465, abs=1e-6)
    assert idf["vaccine"] == pytest.approx(math.log(1.5) + 1, abs=1e-15)
    assert model.n_docs == 2


def test_tfidf_transform_hand_evaluation():
    model = tfidf_fit(TWO_DOCS)
    vector = tfidf_transform("covid cases", model)
    raw = np.array([math.log(1.5) + 1, 1.0])
    expected = raw / np.linalg.norm(raw)
    assert vector.indices.tolist() == [0, 1]
    np.testing.assert_allclose(vector.values, expected, atol=1e-12)
    assert vector.norm() == pytest.approx(1.0, abs=1e-9)


def test_tfidf_all_oov_is_zero():
    vector = tfidf_transform("lockdown", tfidf_fit(TWO_DOCS))
    assert len(vector.indices) == 0


def test_idf_unchanged_by_document_order():
    corpus = ["covid cases ohio", "vaccine trial news", "covid deaths", "stay home"]
    forward = tfidf_fit(corpus)
    backward = tfidf_fit(corpus[::-1])
    assert forward.vocab.index_to_term == backward.vocab.index_to_term
    np.testing.assert_array_equal(forward.idf, backward.idf)


_POOL = ["covid", "cases", "vaccine", "ohio", "deaths", "mask", "home", "news", "trial", "icu"]


def _brute_force_tfidf(corpus, text):
    terms = sorted({t for doc in corpus for t in doc.split()})
    n = len(corpus)
    out = {}
    for term in terms:
        df = sum(1 for doc in corpus if term in doc.split())
        count = text.split().count(term)
        if count:
            out[term] = count * (math.log((1 + n) / (1 + df)) + 1)
    norm = math.sqrt(sum(v * v for v in out.values()))
    return {t: v / norm for t, v in out.items()} if norm else {}


def test_tfidf_matches_brute_force_on_random_corpora():
    rng = np.random.default_rng(0)
    for _ in range(100):
        n_docs = int(rng.integers(1, 11))
        corpus = [
            " ".join(_POOL[int(i)] for i in rng.integers(0, len(_POOL), int(rng.integers(1, 9))))
            for _ in range(n_docs)
        ]
        model = tfidf_fit(corpus)
        for doc in corpus:
            expected = _brute_force_tfidf(corpus, doc)
            got = tfidf_transform(doc, model).as_dict()
            assert set(got) == {model.vocab.get(t) for t in expected}
            for term, value in expected.items():
                assert abs(got[model.vocab.get(term)] - value) < 1e-12
        assert np.all(model.idf >= 1.0)


def test_bow_sum_equals_in_vocab_occurrences():
    rng = np.random.default_rng(1)
    vocab = build_vocabulary(_POOL[:6])
    for _ in range(200):
        words = [_POOL[int(i)] for i in rng.integers(0, len(_POOL), int(rng.integers(0, 12)))]
        vector = bow_vector(" ".join(words), vocab)
        assert vector.values.sum() == sum(1 for w in words if w in vocab)
        assert np.all(vector.values > 0)


def test_sparse_vector_validates_order():
    with pytest.raises(DataError):
        SparseVector(indices=np.array([2, 1]), values=np.array([1.0, 1.0]), dim=3)
    with pytest.raises(DataError):
        SparseVector(indices=np.array([3]), values=np.array([1.0]), dim=3)
    with pytest.raises(DataError):
        SparseVector(indices=np.array([0, 1]), values=np.array([1.0]), dim=3)


def test_csr_rows_roundtrip():
    featurizer = Featurizer.fit("bow", TWO_DOCS)
    X = featurizer.transform(["covid covid cases", "nothing here", "vaccine"])
    assert X.shape == (3, 3)
    back = list(rows(X))
    assert back[0].as_dict() == {0: 1.0, 1: 2.0}
    assert back[1].as_dict() == {}
    assert to_csr(back).toarray().tolist() == X.toarray().tolist()


def test_to_csr_dimension_mismatch():
    a = SparseVector.from_counts({0: 1.0}, 2)
    b = SparseVector.from_counts({0: 1.0}, 3)
    with pytest.raises(DataError, match="mismatch"):
        to_csr([a, b])


def test_featurizer_tfidf_rows_are_unit_norm(synthetic_corpus, lexicons):
    from app.preprocess import preprocess_texts

    cleaned = preprocess_texts(synthetic_corpus.texts, lexicons)
    featurizer = Featurizer.fit("tfidf", cleaned)
    X = featurizer.transform(cleaned)
    norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
    nonzero = norms > 0
    np.testing.assert_allclose(norms[nonzero], 1.0, atol=1e-9)
    assert featurizer.vector(cleaned[0]).as_dict() == next(rows(X[0])).as_dict()


def test_featurizer_vocab_is_frozen():
    featurizer = Featurizer.fit("bow", TWO_DOCS)
    X = featurizer.transform(["brand new terms only"])
    assert X.shape == (1, 3)
    assert X.nnz == 0


def test_bow_featurizer_has_no_idf():
    with pytest.raises(ConfigError):
        Featurizer.fit("bow", TWO_DOCS).tfidf_model


def test_validate_feature_kind():
    assert validate_feature_kind("tfidf") == "tfidf"
    with pytest.raises(ConfigError, match="bow, tfidf"):
        validate_feature_kind("word2vec")


def test_dump_vocabulary(tmp_path):
    path = tmp_path / "vocab" / "vocabulary.tsv"
    dump_vocabulary(tfidf_fit(TWO_DOCS), path)
    lines = path.read_text(encoding="utf-8").splitlines()
    term, index, idf = lines[0].split("\t")
    assert (term, index) == ("cases", "0")
    assert float(idf) == pytest.approx(math.log(1.5) + 1, abs=1e-15)
    assert lines[1].startswith("covid\t1\t1.0")
    assert len(lines) == 3
