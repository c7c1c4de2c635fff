"""Tweet cleaning pipeline: lowercase, emoji to text, contractions, URLs, non-ASCII."""
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

from pydantic import BaseModel, Field

from app.config import settings
from app.errors import DataError

logger = logging.getLogger("tweetinfo.preprocess")

STEPS = (
    "lowercase",
    "replace_emojis",
    "expand_contractions",
    "strip_urls",
    "strip_non_ascii",
)

EMOJI_FILE = "emoji.tsv"
CONTRACTIONS_FILE = "contractions.tsv"

_APOSTROPHES = "'’"
_URL_PREFIXES = ("http://", "https://", "www.")
# leading non-ASCII is tolerated so "🦠https://..." cannot turn into a URL later
_URL_RE = re.compile(r"(?<!\S)[^\x00-\x7f\s]*(?:https?://|www\.)\S*")
_NON_ASCII_RE = re.compile(r"[^\x00-\x7f]")
_WS_RE = re.compile(r"\s+")


def _read_table(path: Path) -> Dict[str, str]:
    if not path.exists():
        raise DataError(f"Missing lexicon file: {path}")
    table: Dict[str, str] = {}
    with path.open("r", encoding="utf-8") as handle:
        for lineno, raw_line in enumerate(handle, start=1):
            line = raw_line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise DataError(f"{path.name}: expected key<TAB>value", line=lineno)
            table[fields[0]] = fields[1]
    return table


def _is_clean_value(value: str) -> bool:
    return (
        value.isascii()
        and value == value.lower()
        and not any(a in value for a in _APOSTROPHES)
        and not any(p in value for p in _URL_PREFIXES)
    )


@dataclass(frozen=True)
class Lexicons:
    """
    Emoji and contraction tables.

    Values are lowercase ASCII without apostrophes or URLs, emoji keys
    carry at least one non-ASCII codepoint and contraction keys carry an
    apostrophe; together this makes `preprocess` idempotent.
    """

    emoji_map: Dict[str, str]
    contraction_map: Dict[str, str]
    _emoji_re: Optional[re.Pattern] = field(default=None, init=False, repr=False, compare=False)
    _contraction_re: Optional[re.Pattern] = field(
        default=None, init=False, repr=False, compare=False
    )

    def __post_init__(self):
        for key, value in self.emoji_map.items():
            if key.isascii() or not _is_clean_value(value):
                raise DataError(f"Invalid emoji lexicon entry: {key!r} -> {value!r}")
        for key, value in self.contraction_map.items():
            if key != key.lower() or not any(a in key for a in _APOSTROPHES):
                raise DataError(f"Invalid contraction key: {key!r}")
            if not _is_clean_value(value):
                raise DataError(f"Invalid contraction expansion: {key!r} -> {value!r}")

        object.__setattr__(self, "_emoji_re", _alternation(self.emoji_map, re.escape))
        object.__setattr__(
            self,
            "_contraction_re",
            _alternation(
                self.contraction_map,
                lambda k: re.escape(k).replace("'", "['’]"),
                boundary=True,
            ),
        )

    @property
    def emoji_pattern(self) -> Optional[re.Pattern]:
        return self._emoji_re

    @property
    def contraction_pattern(self) -> Optional[re.Pattern]:
        return self._contraction_re

    def merged(self, emoji_map: Dict[str, str]) -> "Lexicons":
        """Return new lexicons with extra emoji entries (shipped entries win)."""
        combined = dict(emoji_map)
        combined.update(self.emoji_map)
        return Lexicons(emoji_map=combined, contraction_map=dict(self.contraction_map))


def _alternation(table: Dict[str, str], escape, boundary: bool = False) -> Optional[re.Pattern]:
    if not table:
        return None
    # longest keys first so the longest match wins at every position
    keys = sorted(table, key=lambda k: (-len(k), k))
    body = "|".join(escape(k) for k in keys)
    if boundary:
        return re.compile(rf"(?<![\w'’])(?:{body})(?![\w'’])")
    return re.compile(f"(?:{body})")


def emoji_map_from_package() -> Dict[str, str]:
    """Build an emoji table from the `emoji` package's names (":folded_hands:")."""
    import emoji

    table: Dict[str, str] = {}
    for symbol, data in emoji.EMOJI_DATA.items():
        name = data.get("en", "")
        description = name.strip(":").replace("_", " ").lower()
        description = _NON_ASCII_RE.sub("", description)
        description = " ".join(description.replace("'", " ").split())
        if description and not symbol.isascii() and _is_clean_value(description):
            table[symbol] = description
    return table


def load_lexicons(
    directory: Union[str, Path, None] = None,
    *,
    emoji_source: Optional[str] = None,
) -> Lexicons:
    """Load `emoji.tsv` and `contractions.tsv` from a lexicon directory."""
    directory = Path(directory) if directory is not None else settings.LEXICON_DIR
    emoji_source = emoji_source or settings.EMOJI_SOURCE
    if emoji_source not in ("file", "package"):
        raise DataError(f"Invalid emoji source: {emoji_source}. Must be one of: file, package")

    lexicons = Lexicons(
        emoji_map=_read_table(directory / EMOJI_FILE),
        contraction_map=_read_table(directory / CONTRACTIONS_FILE),
    )
    if emoji_source == "package":
        lexicons = lexicons.merged(emoji_map_from_package())
    logger.info(
        "Loaded lexicons: %d emoji, %d contractions",
        len(lexicons.emoji_map),
        len(lexicons.contraction_map),
    )
    return lexicons


class PreprocessReport(BaseModel):
    """Cleaned text plus which steps produced it."""

    original: str
    cleaned: str
    steps_applied: List[str] = Field(default_factory=lambda: list(STEPS))


def lowercase(text: str) -> str:
    return text.lower()


def replace_emojis(text: str, lex: Lexicons) -> str:
    """Replace every known emoji with ` description `; unknown ones stay."""
    pattern = lex.emoji_pattern
    if pattern is None:
        return text
    return pattern.sub(lambda m: f" {lex.emoji_map[m.group(0)]} ", text)


def expand_contractions(text: str, lex: Lexicons) -> str:
    """Expand whole-token contractions; straight and curly apostrophes both match."""
    pattern = lex.contraction_pattern
    if pattern is None:
        return text
    return pattern.sub(
        lambda m: lex.contraction_map[m.group(0).replace("’", "'")], text
    )


def strip_urls(text: str) -> str:
    """Drop tokens starting with http://, https:// or www. and close the gap."""
    pieces = []
    last = 0
    for match in _URL_RE.finditer(text):
        start, end = match.span()
        pieces.append(text[last:start])
        last = end
    if not pieces:
        return text
    pieces.append(text[last:])

    # the whitespace on both sides of a removed token collapses to one space
    out = pieces[0]
    for piece in pieces[1:]:
        left, right = out.rstrip(), piece.lstrip()
        if left and right:
            out = f"{left} {right}"
        else:
            out = left + right
    return out


def strip_non_ascii(text: str) -> str:
    return _NON_ASCII_RE.sub("", text)


def _apply_steps(text: str, lex: Lexicons) -> str:
    text = lowercase(text)
    text = replace_emojis(text, lex)
    text = expand_contractions(text, lex)
    text = strip_urls(text)
    text = strip_non_ascii(text)
    return _WS_RE.sub(" ", text).strip()


def preprocess(text: str, lex: Lexicons) -> PreprocessReport:
    """Run the full cleaning pipeline on one tweet."""
    cleaned = _apply_steps(text, lex)
    # deleting non-ASCII can splice a URL or contraction back together
    while True:
        again = _apply_steps(cleaned, lex)
        if again == cleaned:
            break
        cleaned = again
    return PreprocessReport(original=text, cleaned=cleaned)


def preprocess_texts(texts: List[str], lex: Lexicons) -> List[str]:
    return [preprocess(t, lex).cleaned for t in texts]
