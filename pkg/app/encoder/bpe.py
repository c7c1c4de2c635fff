"""
Byte-pair subword vocabulary and fixed-length input encoding.

Words are whitespace tokens of cleaned text; the last character of a
word carries an end-of-word marker so merges never cross word
boundaries. Ids 0..3 are reserved for PAD, CLS, SEP and UNK.
"""
import heapq
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np

from app.errors import ArtifactError, ConfigError, DataError

logger = logging.getLogger("tweetinfo.encoder.bpe")

PAD_ID, CLS_ID, SEP_ID, UNK_ID = 0, 1, 2, 3
SPECIAL_TOKENS = ("[PAD]", "[CLS]", "[SEP]", "[UNK]")
END_OF_WORD = "</w>"
MAX_LEN = 100
VOCAB_FILE_VERSION = 1

Pair = Tuple[str, str]


def word_symbols(word: str) -> Tuple[str, ...]:
    if not word:
        return ()
    return tuple(word[:-1]) + (word[-1] + END_OF_WORD,)


def base_alphabet(corpus: Iterable[str]) -> List[str]:
    """Sorted initial symbols of a corpus (characters, end-of-word variants included)."""
    symbols = set()
    for text in corpus:
        for word in text.split():
            symbols.update(word_symbols(word))
    return sorted(symbols)


@dataclass(frozen=True)
class SubwordVocab:
    """Tokens in id order (specials first) and the ordered merge list."""

    tokens: Tuple[str, ...]
    merges: Tuple[Pair, ...]
    token_to_id: Dict[str, int] = field(init=False, repr=False, compare=False)
    merge_ranks: Dict[Pair, int] = field(init=False, repr=False, compare=False)
    _cache: Dict[str, Tuple[int, ...]] = field(
        init=False, repr=False, compare=False, default_factory=dict
    )

    def __post_init__(self):
        if tuple(self.tokens[: len(SPECIAL_TOKENS)]) != SPECIAL_TOKENS:
            raise ArtifactError("Subword vocabulary must start with the special tokens")
        # specials are addressed by id only, so merges can never produce one
        lookup: Dict[str, int] = {}
        first = len(SPECIAL_TOKENS)
        for index, token in enumerate(self.tokens[first:], start=first):
            if token in lookup:
                raise ArtifactError(f"Duplicate subword token {token!r}")
            lookup[token] = index
        object.__setattr__(self, "token_to_id", lookup)
        object.__setattr__(self, "merge_ranks", {pair: r for r, pair in enumerate(self.merges)})

    def __len__(self) -> int:
        return len(self.tokens)

    def segment(self, word: str) -> Tuple[str, ...]:
        """Apply merges in learned order to one word."""
        symbols = list(word_symbols(word))
        while len(symbols) > 1:
            ranked = [
                (self.merge_ranks.get((symbols[i], symbols[i + 1]), -1), i)
                for i in range(len(symbols) - 1)
            ]
            ranked = [(r, i) for r, i in ranked if r >= 0]
            if not ranked:
                break
            best_rank = min(r for r, _ in ranked)
            pair = self.merges[best_rank]
            merged: List[str] = []
            i = 0
            while i < len(symbols):
                if i < len(symbols) - 1 and (symbols[i], symbols[i + 1]) == pair:
                    merged.append(symbols[i] + symbols[i + 1])
                    i += 2
                else:
                    merged.append(symbols[i])
                    i += 1
            symbols = merged
        return tuple(symbols)

    def word_ids(self, word: str) -> Tuple[int, ...]:
        cached = self._cache.get(word)
        if cached is None:
            cached = tuple(self.token_to_id.get(s, UNK_ID) for s in self.segment(word))
            self._cache[word] = cached
        return cached

    def subword_ids(self, text: str) -> List[int]:
        ids: List[int] = []
        for word in text.split():
            ids.extend(self.word_ids(word))
        return ids

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [f"#version {VOCAB_FILE_VERSION}", f"#tokens {len(self.tokens)}"]
        lines.extend(self.tokens)
        lines.append(f"#merges {len(self.merges)}")
        lines.extend(f"{a} {b}" for a, b in self.merges)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "SubwordVocab":
        path = Path(path)
        if not path.exists():
            raise ArtifactError(f"Missing subword vocabulary: {path}")
        lines = path.read_text(encoding="utf-8").splitlines()
        try:
            if lines[0] != f"#version {VOCAB_FILE_VERSION}":
                raise ArtifactError(f"Unsupported subword vocabulary header: {lines[0]!r}")
            n_tokens = int(lines[1].split()[1])
            tokens = tuple(lines[2 : 2 + n_tokens])
            merge_header = lines[2 + n_tokens]
            n_merges = int(merge_header.split()[1])
            merges = tuple(
                tuple(line.split(" ")) for line in lines[3 + n_tokens : 3 + n_tokens + n_merges]
            )
        except (IndexError, ValueError) as exc:
            raise ArtifactError(f"Malformed subword vocabulary {path}: {exc}") from None
        if len(tokens) != n_tokens or len(merges) != n_merges or any(len(m) != 2 for m in merges):
            raise ArtifactError(f"Truncated subword vocabulary {path}")
        return cls(tokens=tokens, merges=merges)


def bpe_train(corpus: Sequence[str], vocab_size: int, min_frequency: int = 2) -> SubwordVocab:
    """
    Learn merges until the vocabulary holds `vocab_size` tokens.

    The most frequent adjacent pair is merged first; equal counts go to
    the lexicographically smallest pair. Learning also stops when no
    pair occurs at least `min_frequency` times.

    Raises:
        ConfigError: vocab_size cannot hold the specials plus the base alphabet.
    """
    alphabet = base_alphabet(corpus)
    floor = len(SPECIAL_TOKENS) + len(alphabet)
    if vocab_size <= len(SPECIAL_TOKENS) or vocab_size < floor:
        raise ConfigError(
            f"vocab_size {vocab_size} is smaller than specials plus base alphabet ({floor})"
        )

    word_freq = Counter(word for text in corpus for word in text.split())
    words: List[List[str]] = [list(word_symbols(w)) for w in word_freq]
    freqs: List[int] = list(word_freq.values())

    pair_counts: Dict[Pair, int] = defaultdict(int)
    pair_words: Dict[Pair, set] = defaultdict(set)
    for index, symbols in enumerate(words):
        for pair in zip(symbols, symbols[1:]):
            pair_counts[pair] += freqs[index]
            pair_words[pair].add(index)

    heap = [(-count, pair) for pair, count in pair_counts.items()]
    heapq.heapify(heap)

    tokens: List[str] = list(SPECIAL_TOKENS) + alphabet
    known = set(tokens[len(SPECIAL_TOKENS) :])
    merges: List[Pair] = []

    while len(tokens) < vocab_size and heap:
        neg_count, pair = heapq.heappop(heap)
        if pair_counts.get(pair, 0) != -neg_count:
            continue
        if -neg_count < min_frequency:
            break
        merges.append(pair)
        new_symbol = pair[0] + pair[1]
        if new_symbol not in known:
            known.add(new_symbol)
            tokens.append(new_symbol)

        touched: Dict[Pair, int] = {}
        for index in sorted(pair_words.pop(pair, ())):
            symbols, freq = words[index], freqs[index]
            for old in zip(symbols, symbols[1:]):
                pair_counts[old] -= freq
                touched[old] = pair_counts[old]
            merged: List[str] = []
            i = 0
            while i < len(symbols):
                if i < len(symbols) - 1 and (symbols[i], symbols[i + 1]) == pair:
                    merged.append(new_symbol)
                    i += 2
                else:
                    merged.append(symbols[i])
                    i += 1
            words[index] = merged
            for new in zip(merged, merged[1:]):
                pair_counts[new] += freq
                touched[new] = pair_counts[new]
                pair_words[new].add(index)

        pair_counts.pop(pair, None)
        touched.pop(pair, None)
        for changed, count in touched.items():
            if count > 0:
                heapq.heappush(heap, (-count, changed))
            else:
                pair_counts.pop(changed, None)

    vocab = SubwordVocab(tokens=tuple(tokens), merges=tuple(merges))
    logger.info("Trained subword vocabulary: %d tokens, %d merges", len(vocab), len(merges))
    return vocab


@dataclass(frozen=True)
class TokenizedInput:
    """Exactly `MAX_LEN` ids with the mask rule mask[i] = 1 iff ids[i] != 0."""

    ids: Tuple[int, ...]
    mask: Tuple[int, ...]

    def __post_init__(self):
        if len(self.ids) != len(self.mask):
            raise DataError("ids and mask differ in length")
        if any((m == 1) != (i != PAD_ID) for i, m in zip(self.ids, self.mask)):
            raise DataError("mask must be 1 exactly where the id is not PAD")


def encode(text: str, vocab: SubwordVocab, max_len: int = MAX_LEN) -> TokenizedInput:
    """[CLS] + subwords (right-truncated) + [SEP], padded with PAD to `max_len`."""
    if max_len < 2:
        raise ConfigError("max_len must leave room for CLS and SEP")
    body = vocab.subword_ids(text)[: max_len - 2]
    ids = [CLS_ID] + body + [SEP_ID]
    ids += [PAD_ID] * (max_len - len(ids))
    return TokenizedInput(ids=tuple(ids), mask=tuple(int(i != PAD_ID) for i in ids))


def encode_batch(
    texts: Sequence[str], vocab: SubwordVocab, max_len: int = MAX_LEN
) -> Tuple[np.ndarray, np.ndarray]:
    """(ids, mask) int64 arrays of shape (len(texts), max_len)."""
    encoded = [encode(text, vocab, max_len) for text in texts]
    ids = np.array([e.ids for e in encoded], dtype=np.int64).reshape(len(texts), max_len)
    return ids, (ids != PAD_ID).astype(np.int64)
