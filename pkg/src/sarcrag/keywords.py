"""Keyword extraction: a proper-noun tagging heuristic and the two-call model procedure.

Token tagging keeps entities and proper nouns found by a tagger; the model-based
path first asks which words the model does not understand, then asks it to
reformat that answer as CSV.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Protocol

import requests

from .core import ExtractionMethod, Sample
from .errors import MalformedCSV, TaggerError
from .gateway import ChatMessage, ChatRequest, Gateway, Purpose, Role
from .templates import PromptTemplateSet, load_templates

MAX_KEYWORD_TOKENS = 5
MAX_KEYWORD_CHARS = 64
MAX_KEYWORDS_PER_SAMPLE = 8

NO_UNKNOWN_SENTINEL = "NO UNKNOWN"

# Case-folded words that never count as proper nouns even when capitalized.
STOPWORDS = frozenset(
    """
    a an the i you he she it we they me him her us them my your his its our
    their mine yours this that these those there here what which who whom
    whose why how when where am is are was were be been being do does did
    done have has had having will would shall should can could may might
    must not no yes and or but if then else while for to of in on at by
    with from as into over under about after before between during again
    once all any both each few more most other some such only own same so
    than too very just now also oh ok okay well
    yang dan di ke dari ini itu dengan untuk pada adalah atau juga tidak
    bukan tak saya aku kamu anda dia ia kami kita mereka ada akan sudah
    telah belum bisa dapat harus karena jika kalau tapi tetapi namun seperti
    lebih paling sangat banget sekali saat ketika apa siapa mengapa kenapa
    bagaimana dimana mana lagi masih pas kok sih deh dong nih tuh ya iya
    yah nya pun para oleh agar supaya hingga sampai
    """.split()
)


class PartOfSpeech(enum.Enum):
    PROPER_NOUN = "proper_noun"
    OTHER = "other"


class EntityType(enum.Enum):
    PERSON = "person"
    LOCATION = "location"
    ORGANIZATION = "organization"
    OTHER = "other"


@dataclass(frozen=True)
class TaggedToken:
    surface: str
    pos: PartOfSpeech
    entity: EntityType | None
    char_span: tuple[int, int]


class TaggerPort(Protocol):
    def tag(self, text: str) -> list[TaggedToken]: ...


@dataclass(frozen=True)
class KeywordSet:
    keywords: tuple[str, ...]
    source: ExtractionMethod
    sample_id: str

    def __post_init__(self) -> None:
        folded = [k.casefold() for k in self.keywords]
        if len(set(folded)) != len(folded):
            raise ValueError("keywords must be unique after case-folding")
        if any(not k or not _has_word_char(k) for k in self.keywords):
            raise ValueError("keywords must contain at least one word character")

    def __bool__(self) -> bool:
        return bool(self.keywords)


def _has_word_char(token: str) -> bool:
    return re.search(r"[^\W_]", token) is not None


def is_sentence_initial(text: str, start: int) -> bool:
    """True when only whitespace, or a sentence terminator plus whitespace, precedes start."""
    prefix = text[:start]
    trimmed = prefix.rstrip(" \t\r\f\v")
    if not trimmed or trimmed.endswith(("\n", ".", "!", "?")):
        return True
    return False


def _word_spans(text: str) -> list[tuple[str, int, int]]:
    """Whitespace tokens with leading/trailing punctuation stripped, plus their spans."""
    spans = []
    for match in re.finditer(r"\S+", text):
        raw = match.group()
        head = len(raw) - len(raw.lstrip("\"'([{¡¿«„“‘"))
        tail = len(raw) - len(raw.rstrip("\"')]},.;:!?«»”’…"))
        core = raw[head : len(raw) - tail] if tail else raw[head:]
        if not core:
            continue
        spans.append((core, match.start() + head, match.start() + head + len(core)))
    return spans


class HeuristicTagger:
    """Marks capitalized non-stopword tokens as proper nouns, merging adjacent runs.

    A run never crosses a sentence boundary and never spans intervening
    punctuation, so "loves Paris. Monica said" yields two separate tokens.
    """

    def tag(self, text: str) -> list[TaggedToken]:
        tokens: list[TaggedToken] = []
        run: list[tuple[str, int, int]] = []

        def flush() -> None:
            if not run:
                return
            start, end = run[0][1], run[-1][2]
            tokens.append(
                TaggedToken(
                    surface=text[start:end],
                    pos=PartOfSpeech.PROPER_NOUN,
                    entity=None,
                    char_span=(start, end),
                )
            )
            run.clear()

        for core, start, end in _word_spans(text):
            qualifies = core[0].isupper() and core.casefold() not in STOPWORDS
            if not qualifies:
                flush()
                continue
            if run:
                between = text[run[-1][2] : start]
                adjacent = between.strip() == "" and not is_sentence_initial(text, start)
                if not adjacent:
                    flush()
            run.append((core, start, end))
        flush()
        return tokens


class HttpTagger:
    """Delegates tagging to an external service: POST raw text, receive token JSON."""

    def __init__(self, url: str, *, timeout: float = 10.0, session: requests.Session | None = None) -> None:
        self.url = url
        self.timeout = timeout
        self.session = session or requests.Session()

    def tag(self, text: str) -> list[TaggedToken]:
        try:
            response = self.session.post(
                self.url, data=text.encode("utf-8"), timeout=self.timeout
            )
            response.raise_for_status()
            payload = response.json()
            return [
                TaggedToken(
                    surface=item["surface"],
                    pos=PartOfSpeech(item.get("pos", "other")),
                    entity=EntityType(item["entity"]) if item.get("entity") else None,
                    char_span=(item["start"], item["end"]),
                )
                for item in payload
            ]
        except (requests.RequestException, ValueError, KeyError, TypeError) as exc:
            raise TaggerError(f"external tagger failed: {exc}") from exc


def tag_tokens(text: str, tagger: TaggerPort) -> list[TaggedToken]:
    """Tagger output restricted to entity-typed or proper-noun tokens with valid spans."""
    if not text:
        raise ValueError("text must be non-empty")
    kept: list[TaggedToken] = []
    previous_end = -1
    for token in sorted(tagger.tag(text), key=lambda t: t.char_span):
        start, end = token.char_span
        if not (0 <= start < end <= len(text)):
            raise TaggerError(f"span {token.char_span} outside text bounds")
        if start < previous_end:
            raise TaggerError(f"span {token.char_span} overlaps a previous token")
        if token.pos is PartOfSpeech.PROPER_NOUN or token.entity is not None:
            kept.append(token)
            previous_end = end
    return kept


def _cap_keywords(candidates: list[str]) -> tuple[str, ...]:
    """Dedup case-insensitively in order, drop degenerate entries, bound the set size."""
    seen: set[str] = set()
    kept: list[str] = []
    for candidate in candidates:
        candidate = candidate.strip()
        if not candidate or not _has_word_char(candidate):
            continue
        if len(candidate.split()) > MAX_KEYWORD_TOKENS or len(candidate) > MAX_KEYWORD_CHARS:
            continue
        folded = candidate.casefold()
        if folded in seen:
            continue
        seen.add(folded)
        kept.append(candidate)
        if len(kept) == MAX_KEYWORDS_PER_SAMPLE:
            break
    return tuple(kept)


def extract_token_tagging(sample: Sample, tagger: TaggerPort) -> KeywordSet:
    surfaces = [token.surface for token in tag_tokens(sample.text, tagger)]
    return KeywordSet(
        keywords=_cap_keywords(surfaces),
        source=ExtractionMethod.TOKEN_TAGGING,
        sample_id=sample.id,
    )


def extract_llm_based(
    sample: Sample, gateway: Gateway, templates: PromptTemplateSet | None = None
) -> KeywordSet:
    """Ask the model which words it does not understand, then reformat the answer as CSV."""
    templates = templates or load_templates(sample.language)
    identify = gateway.chat(
        ChatRequest(
            messages=(
                ChatMessage(Role.SYSTEM, templates.keyword_identify),
                ChatMessage(Role.USER, sample.text),
            ),
            purpose=Purpose.KEYWORD_IDENTIFY,
        )
    )
    cleaned = gateway.chat(
        ChatRequest(
            messages=(
                ChatMessage(Role.SYSTEM, templates.keyword_csv),
                ChatMessage(Role.USER, identify.response_text),
            ),
            purpose=Purpose.KEYWORD_CLEAN,
        )
    )
    return KeywordSet(
        keywords=_cap_keywords(parse_csv_keywords(cleaned.response_text)),
        source=ExtractionMethod.LLM_BASED,
        sample_id=sample.id,
    )


def parse_csv_keywords(raw: str) -> list[str]:
    """Split comma-separated keywords; the NO UNKNOWN sentinel means an empty list."""
    stripped = raw.strip()
    if stripped.casefold() == NO_UNKNOWN_SENTINEL.casefold():
        return []
    if "," in stripped:
        items = [item.strip() for item in stripped.split(",")]
    elif _word_like_count(stripped) > 1:
        raise MalformedCSV(f"expected comma-separated values, got: {stripped[:80]!r}")
    else:
        items = [stripped]
    seen: set[str] = set()
    out: list[str] = []
    for item in items:
        if not item:
            continue
        folded = item.casefold()
        if folded in seen:
            continue
        seen.add(folded)
        out.append(item)
    return out


def _word_like_count(text: str) -> int:
    return sum(1 for token in text.split() if _has_word_char(token))
