"""Tests for subword vocabulary learning and fixed-length encoding."""
import numpy as np
import pytest

from app.encoder import CLS_ID, MAX_LEN, PAD_ID, SEP_ID, UNK_ID, SubwordVocab, encode
from app.encoder.bpe import (
    SPECIAL_TOKENS,
    TokenizedInput,
    base_alphabet,
    bpe_train,
    encode_batch,
    word_symbols,
)
from app.errors import ArtifactError, ConfigError, DataError


@pytest.fixture(scope="module")
def corpus_vocab(synthetic_corpus, lexicons):
    from app.preprocess import preprocess_texts

    cleaned = preprocess_texts(synthetic_corpus.texts, lexicons)
    return cleaned, bpe_train(cleaned, vocab_size=300)


def test_word_symbols_mark_word_end():
    assert word_symbols("covid") == ("c", "o", "v", "i", "d</w>")
    assert word_symbols("a") == ("a</w>",)
    assert word_symbols("") == ()


def test_first_merge_is_most_frequent_pair():
    corpus = ["aaab", "aaab"]
    alphabet = base_alphabet(corpus)
    assert alphabet == ["a", "b</w>"]
    vocab = bpe_train(corpus, vocab_size=len(SPECIAL_TOKENS) + len(alphabet) + 1)
    assert vocab.merges == (("a", "a"),)
    assert vocab.tokens[-1] == "aa"


def test_equal_counts_break_lexicographically():
    vocab = bpe_train(["cd cd ab ab"], vocab_size=len(SPECIAL_TOKENS) + 4 + 1)
    assert vocab.merges[0] == ("a", "b</w>")


def test_vocab_size_of_alphabet_means_no_merges():
    corpus = ["covid cases", "new cases"]
    size = len(SPECIAL_TOKENS) + len(base_alphabet(corpus))
    vocab = bpe_train(corpus, vocab_size=size)
    assert vocab.merges == ()
    assert len(vocab) == size
    assert vocab.segment("cases") == ("c", "a", "s", "e", "s</w>")


def test_training_is_deterministic(corpus_vocab):
    cleaned, vocab = corpus_vocab
    again = bpe_train(cleaned, vocab_size=300)
    assert again.merges == vocab.merges
    assert again.tokens == vocab.tokens
    assert len(vocab) <= 300


def test_min_frequency_stops_learning():
    vocab = bpe_train(["unique words only"], vocab_size=500)
    assert vocab.merges == ()


def test_vocab_size_too_small():
    with pytest.raises(ConfigError):
        bpe_train(["covid"], vocab_size=4)
    with pytest.raises(ConfigError, match="base alphabet"):
        bpe_train(["covid"], vocab_size=6)


def test_specials_have_fixed_ids(corpus_vocab):
    _, vocab = corpus_vocab
    assert vocab.tokens[:4] == SPECIAL_TOKENS
    assert (PAD_ID, CLS_ID, SEP_ID, UNK_ID) == (0, 1, 2, 3)
    assert all(token not in vocab.token_to_id for token in SPECIAL_TOKENS)
    assert min(vocab.token_to_id.values()) == len(SPECIAL_TOKENS)


def test_unknown_characters_map_to_unk(corpus_vocab):
    _, vocab = corpus_vocab
    assert UNK_ID in vocab.subword_ids("zzzqqq~~~")


def test_special_token_text_is_not_a_special_id(corpus_vocab):
    _, vocab = corpus_vocab
    ids = vocab.subword_ids("[cls] [sep] [pad]")
    assert CLS_ID not in ids and SEP_ID not in ids and PAD_ID not in ids


def test_encode_short_text(corpus_vocab):
    _, vocab = corpus_vocab
    encoded = encode("cases rise", vocab)
    body = vocab.subword_ids("cases rise")
    n = len(body) + 2
    assert encoded.ids[:n] == (CLS_ID, *body, SEP_ID)
    assert encoded.mask == (1,) * n + (0,) * (MAX_LEN - n)
    assert len(encoded.ids) == MAX_LEN


def test_encode_empty_text(corpus_vocab):
    _, vocab = corpus_vocab
    encoded = encode("", vocab)
    assert encoded.ids == (CLS_ID, SEP_ID) + (PAD_ID,) * (MAX_LEN - 2)
    assert encoded.mask == (1, 1) + (0,) * (MAX_LEN - 2)


def test_encode_truncates_long_text(corpus_vocab):
    _, vocab = corpus_vocab
    text = " ".join(["zq"] * 250)
    assert len(vocab.subword_ids(text)) >= 500
    encoded = encode(text, vocab)
    assert len(encoded.ids) == MAX_LEN
    assert encoded.ids[0] == CLS_ID
    assert encoded.ids[-1] == SEP_ID
    assert all(m == 1 for m in encoded.mask)


def test_mask_rule_on_random_texts(corpus_vocab):
    cleaned, vocab = corpus_vocab
    words = sorted({w for text in cleaned for w in text.split()}) + ["zq", "x", "covid19"]
    rng = np.random.default_rng(0)
    for _ in range(1000):
        size = int(rng.integers(0, 120))
        text = " ".join(words[int(i)] for i in rng.integers(0, len(words), size=size))
        encoded = encode(text, vocab)
        assert len(encoded.ids) == len(encoded.mask) == MAX_LEN
        assert all((m == 0) == (i == PAD_ID) for i, m in zip(encoded.ids, encoded.mask))
        assert encoded.ids[0] == CLS_ID
        live = [i for i in encoded.ids if i != PAD_ID]
        assert live.count(SEP_ID) == 1
        assert live[-1] == SEP_ID


def test_encode_batch_shapes(corpus_vocab):
    cleaned, vocab = corpus_vocab
    ids, mask = encode_batch(cleaned[:5], vocab, max_len=20)
    assert ids.shape == mask.shape == (5, 20)
    assert ids.dtype == np.int64
    np.testing.assert_array_equal(mask, (ids != PAD_ID).astype(np.int64))
    empty_ids, _ = encode_batch([], vocab, max_len=20)
    assert empty_ids.shape == (0, 20)


def test_tokenized_input_checks_mask_rule():
    with pytest.raises(DataError):
        TokenizedInput(ids=(1, 0), mask=(1, 1))
    with pytest.raises(DataError):
        TokenizedInput(ids=(1, 2), mask=(1,))


def test_encode_needs_room_for_specials(corpus_vocab):
    with pytest.raises(ConfigError):
        encode("covid", corpus_vocab[1], max_len=1)


def test_vocab_file_restores_segmentation(corpus_vocab, tmp_path):
    cleaned, vocab = corpus_vocab
    restored = SubwordVocab.load(vocab.save(tmp_path / "subword_vocab.txt"))
    assert restored.tokens == vocab.tokens
    assert restored.merges == vocab.merges
    assert restored.subword_ids(cleaned[0]) == vocab.subword_ids(cleaned[0])


def test_vocab_file_errors(tmp_path):
    with pytest.raises(ArtifactError, match="Missing"):
        SubwordVocab.load(tmp_path / "nope.txt")
    bad = tmp_path / "bad.txt"
    bad.write_text("#version 9\n", encoding="utf-8")
    with pytest.raises(ArtifactError):
        SubwordVocab.load(bad)
    truncated = tmp_path / "truncated.txt"
    truncated.write_text("#version 1\n#tokens 6\n[PAD]\n[CLS]\n", encoding="utf-8")
    with pytest.raises(ArtifactError):
        SubwordVocab.load(truncated)


def test_vocab_must_start_with_specials():
    with pytest.raises(ArtifactError):
        SubwordVocab(tokens=("a", "b"), merges=())
