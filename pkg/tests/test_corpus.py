"""Tests for TSV ingestion, statistics and the train/dev split."""
import pytest

from app.corpus import (
    Dataset,
    Label,
    Tweet,
    class_counts,
    load_tsv,
    split_train_dev,
    word_count_stats,
)
from app.errors import DataError
from tests.conftest import official_data


def _write(tmp_path, body: str, name: str = "data.tsv"):
    path = tmp_path / name
    path.write_text("Id\tText\tLabel\n" + body, encoding="utf-8")
    return path


def _dataset(texts, labels=None):
    labels = labels or [Label.INFORMATIVE] * len(texts)
    return Dataset(
        name="d",
        tweets=tuple(
            Tweet(id=f"id{i}", text=text, label=label)
            for i, (text, label) in enumerate(zip(texts, labels))
        ),
    )


def test_load_single_line(tmp_path):
    dataset = load_tsv(_write(tmp_path, "x1\thello covid\tINFORMATIVE\n"))
    assert len(dataset) == 1
    tweet = dataset.tweets[0]
    assert tweet.id == "x1"
    assert tweet.text == "hello covid"
    assert tweet.label is Label.INFORMATIVE


def test_load_keeps_file_order_and_parses_labels_case_insensitively(tmp_path):
    dataset = load_tsv(
        _write(
            tmp_path,
            "b\tsecond tweet\tuninformative\n"
            "a\tfirst tweet\tInformative\n"
            "c\tthird tweet\tUNINFORMATIVE\n",
        )
    )
    assert [t.id for t in dataset] == ["b", "a", "c"]
    assert dataset.labels == [Label.UNINFORMATIVE, Label.INFORMATIVE, Label.UNINFORMATIVE]


def test_header_only_file_is_empty_dataset(tmp_path):
    dataset = load_tsv(_write(tmp_path, ""))
    assert len(dataset) == 0
    assert class_counts(dataset) == (0, 0)


def test_wrong_field_count_names_line(tmp_path):
    path = _write(tmp_path, "a\tok tweet\tINFORMATIVE\nb\tmissing label\n")
    with pytest.raises(DataError) as exc_info:
        load_tsv(path)
    assert exc_info.value.line == 3
    assert "line 3" in str(exc_info.value)


def test_unknown_label_rejected(tmp_path):
    path = _write(tmp_path, "a\tsome tweet\tMAYBE\n")
    with pytest.raises(DataError, match="Invalid label"):
        load_tsv(path)


def test_duplicate_ids_rejected(tmp_path):
    path = _write(tmp_path, "a\tone\tINFORMATIVE\na\ttwo\tUNINFORMATIVE\n")
    with pytest.raises(DataError, match="Duplicate"):
        load_tsv(path)


def test_missing_file(tmp_path):
    with pytest.raises(DataError, match="Missing dataset file"):
        load_tsv(tmp_path / "nope.tsv")


def test_unlabeled_file(tmp_path):
    path = tmp_path / "test.tsv"
    path.write_text("Id\tText\nq1\tcases rising in ohio\n", encoding="utf-8")
    dataset = load_tsv(path, labeled=False)
    assert dataset.tweets[0].label is None
    with pytest.raises(DataError, match="no label"):
        class_counts(dataset)


def test_label_parse():
    assert Label.parse(" informative ") is Label.INFORMATIVE
    assert Label.INFORMATIVE.positive
    assert not Label.UNINFORMATIVE.positive
    with pytest.raises(DataError):
        Label.parse("neutral")


def test_class_counts_sum_to_size(tiny_dataset):
    informative, uninformative = class_counts(tiny_dataset)
    assert (informative, uninformative) == (3, 3)
    assert informative + uninformative == len(tiny_dataset)


def test_word_count_single_tweet():
    stats = word_count_stats(_dataset(["a b c"]))
    assert stats.wc_max == stats.wc_min == 3
    assert stats.wc_avg == 3.0


def test_word_count_uses_whitespace_runs():
    stats = word_count_stats(_dataset(["a  b\tc\n d", "x"]))
    assert stats.wc_max == 4
    assert stats.wc_min == 1
    assert stats.wc_avg == 2.5


def test_word_count_identical_tweets():
    stats = word_count_stats(_dataset(["one two three four five six seven"] * 3))
    assert stats.wc_max == stats.wc_min == stats.wc_avg == 7


def test_word_count_average_rounded():
    stats = word_count_stats(_dataset(["a", "a b", "a b"]))
    assert stats.wc_avg == 1.667


def test_word_count_empty_dataset():
    with pytest.raises(DataError, match="empty"):
        word_count_stats(Dataset(name="empty"))


def test_word_count_counts_sum_to_size():
    labels = [Label.INFORMATIVE, Label.UNINFORMATIVE, Label.UNINFORMATIVE]
    stats = word_count_stats(_dataset(["a", "b c", "d e f"], labels))
    assert (stats.count_informative, stats.count_uninformative) == (1, 2)


def test_word_count_needs_labels(tmp_path):
    path = tmp_path / "test.tsv"
    path.write_text("Id\tText\nq1\tcases rising in ohio\n", encoding="utf-8")
    with pytest.raises(DataError, match="no label"):
        word_count_stats(load_tsv(path, labeled=False))


def test_split_ten_tweets():
    dataset = _dataset([f"tweet {i}" for i in range(10)])
    train, dev = split_train_dev(dataset, seed=0)
    assert (len(train), len(dev)) == (9, 1)
    train_ids = {t.id for t in train}
    dev_ids = {t.id for t in dev}
    assert not train_ids & dev_ids
    assert train_ids | dev_ids == {t.id for t in dataset}


@pytest.mark.parametrize("n,expected", [(11, (10, 1)), (19, (18, 1)), (7000, (6300, 700))])
def test_split_sizes(n, expected):
    dataset = _dataset([f"tweet {i}" for i in range(n)])
    train, dev = split_train_dev(dataset, seed=3)
    assert (len(train), len(dev)) == expected


def test_split_is_repeatable(synthetic_corpus):
    first = split_train_dev(synthetic_corpus, seed=42)
    second = split_train_dev(synthetic_corpus, seed=42)
    assert [t.id for t in first[0]] == [t.id for t in second[0]]
    assert [t.id for t in first[1]] == [t.id for t in second[1]]

    other = split_train_dev(synthetic_corpus, seed=43)
    assert [t.id for t in other[0]] != [t.id for t in first[0]]


def test_split_too_small():
    with pytest.raises(DataError, match="at least 10"):
        split_train_dev(_dataset([f"t {i}" for i in range(9)]), seed=0)


def test_write_tsv_reloads(tiny_dataset, write_dataset):
    reloaded = load_tsv(write_dataset(tiny_dataset))
    assert [t.id for t in reloaded] == [t.id for t in tiny_dataset]
    assert reloaded.labels == tiny_dataset.labels


@pytest.mark.official
@official_data
def test_official_class_counts_and_word_counts():
    from app.config import settings

    train = load_tsv(settings.train_path)
    valid = load_tsv(settings.valid_path)
    assert len(train) == 7000
    assert len(valid) == 1000
    assert class_counts(train) == (3303, 3697)
    assert class_counts(valid) == (472, 528)

    stats = word_count_stats(train)
    assert stats.wc_max == pytest.approx(76, abs=3)
    assert stats.wc_min == pytest.approx(8, abs=2)
    assert stats.wc_avg == pytest.approx(35.87, abs=1.0)
