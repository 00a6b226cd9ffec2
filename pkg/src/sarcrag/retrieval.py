"""Word-information retrieval: search, chunking, BM25 ranking, and short definitions.

Two paths produce a WordInfo per keyword: the web path searches, chunks and
ranks page text before asking the model to refine it into a definition; the
internal path asks the model directly. Both are cached on disk.
"""

from __future__ import annotations

import html.parser
import json
import math
import re
import threading
import urllib.parse
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Protocol, Sequence

import requests

from .core import LanguageTag, RetrievalSource
from .errors import (
    DefinitionUnavailable,
    DomainError,
    SearchQuotaExceeded,
    SearchTransportError,
    StoreWriteError,
)
from .gateway import ChatMessage, ChatRequest, Gateway, Purpose, Role

DEFAULT_CHUNK_SIZE = 120
DEFAULT_OVERLAP = 20
DEFAULT_TOP_K = 3
DEFAULT_MAX_RESULTS = 5
MIN_SNIPPET_WORDS = 20
MAX_FETCHED_CHARS = 20_000
MAX_DEFINITION_SENTENCES = 2

USER_AGENT = "sarcrag/0.1 (text-retrieval client for sarcasm-detection experiments)"

DEFINE_SYSTEM = {
    LanguageTag.ENGLISH: (
        "You will be given a word or phrase. Give a short contextual definition "
        "of it in one or two sentences, based on what you know."
    ),
    LanguageTag.INDONESIAN: (
        "Anda akan diberikan sebuah kata atau frasa. Berikan definisi kontekstual "
        "singkat dalam satu atau dua kalimat berdasarkan pengetahuan Anda."
    ),
}

REFINE_SYSTEM = {
    LanguageTag.ENGLISH: (
        "You will be given a word or phrase and several text passages about it. "
        "Summarize the passages, ignore irrelevant content, and give a short "
        "definition of the word or phrase in one or two sentences."
    ),
    LanguageTag.INDONESIAN: (
        "Anda akan diberikan sebuah kata atau frasa beserta beberapa potongan "
        "teks tentangnya. Ringkas potongan teks tersebut, abaikan konten yang "
        "tidak relevan, dan berikan definisi singkat kata atau frasa tersebut "
        "dalam satu atau dua kalimat."
    ),
}

_REFINE_USER_LABELS = {
    LanguageTag.ENGLISH: ("Word", "Passages"),
    LanguageTag.INDONESIAN: ("Kata", "Kutipan"),
}

_REASK_USER = {
    LanguageTag.ENGLISH: "Answer in at most two sentences.",
    LanguageTag.INDONESIAN: "Jawab dalam maksimal dua kalimat.",
}


@dataclass(frozen=True)
class SearchResult:
    keyword: str
    url: str
    snippet: str
    rank: int

    def __post_init__(self) -> None:
        if self.rank < 1:
            raise ValueError("rank starts at 1")


@dataclass(frozen=True)
class Chunk:
    text: str
    source_url: str
    index: int
    token_count: int

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValueError("chunk index must be >= 0")
        if self.token_count < 1:
            raise ValueError("chunk must contain at least one token")


@dataclass(frozen=True)
class CorpusStats:
    n_docs: int
    avg_doc_len: float
    df: Mapping[str, int]

    def __post_init__(self) -> None:
        if self.n_docs < 1:
            raise ValueError("corpus must contain at least one document")
        if self.avg_doc_len <= 0:
            raise ValueError("average document length must be positive")
        for term, count in self.df.items():
            if not 0 <= count <= self.n_docs:
                raise ValueError(f"df[{term!r}] = {count} outside [0, {self.n_docs}]")


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 1.2
    b: float = 0.75

    def __post_init__(self) -> None:
        if self.k1 <= 0:
            raise ValueError("k1 must be positive")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError("b must lie in [0, 1]")


@dataclass(frozen=True)
class WordInfo:
    keyword: str
    definition: str
    source: RetrievalSource
    evidence: tuple[tuple[str, int], ...] | None = None

    def __post_init__(self) -> None:
        if not self.definition.strip():
            raise ValueError("definition must be non-empty")
        if len(split_sentences(self.definition)) > MAX_DEFINITION_SENTENCES:
            raise ValueError("definition longer than two sentences")
        if (self.evidence is not None) != (self.source is RetrievalSource.GOOGLE_SEARCH):
            raise ValueError("evidence is carried exactly by web-sourced definitions")


def bm25_tokenize(text: str) -> list[str]:
    """Case-fold and split on whitespace and punctuation; no stemming or stopwords."""
    return re.findall(r"[^\W_]+", text.casefold(), re.UNICODE)


def split_sentences(text: str) -> list[str]:
    """Split on {. ! ?} runs followed by whitespace or end of text."""
    text = text.strip()
    if not text:
        return []
    out: list[str] = []
    start = 0
    for match in re.finditer(r"[.!?]+(?=\s|$)", text):
        out.append(text[start : match.end()].strip())
        start = match.end()
    rest = text[start:].strip()
    if rest:
        out.append(rest)
    return [s for s in out if s]


def trim_to_sentences(text: str, limit: int = MAX_DEFINITION_SENTENCES) -> str:
    return " ".join(split_sentences(text)[:limit])


def chunk_document(
    text: str, chunk_size: int, overlap: int, *, source_url: str = ""
) -> list[Chunk]:
    """Sliding word windows of chunk_size stepping by (chunk_size - overlap)."""
    if not text.strip():
        raise ValueError("text must be non-empty")
    if overlap < 0 or chunk_size <= overlap:
        raise ValueError("require chunk_size > overlap >= 0")
    words = text.split()
    step = chunk_size - overlap
    chunks: list[Chunk] = []
    for ordinal, offset in enumerate(range(0, len(words), step)):
        window = " ".join(words[offset : offset + chunk_size])
        tokens = bm25_tokenize(window)
        # Windows of pure punctuation carry nothing rankable; drop them.
        if not tokens:
            continue
        chunks.append(
            Chunk(text=window, source_url=source_url, index=ordinal, token_count=len(tokens))
        )
    return chunks


def corpus_stats(chunks: Sequence[Chunk]) -> CorpusStats:
    if not chunks:
        raise ValueError("corpus must contain at least one chunk")
    df: dict[str, int] = {}
    total_len = 0
    for chunk in chunks:
        total_len += chunk.token_count
        for term in set(bm25_tokenize(chunk.text)):
            df[term] = df.get(term, 0) + 1
    return CorpusStats(n_docs=len(chunks), avg_doc_len=total_len / len(chunks), df=df)


def bm25_idf(n_docs: int, df_term: int) -> float:
    if n_docs < 1 or df_term < 0 or df_term > n_docs:
        raise DomainError(f"df={df_term} outside [0, N={n_docs}]")
    return math.log((n_docs - df_term + 0.5) / (df_term + 0.5) + 1.0)


def bm25_score(
    query: Sequence[str], doc: Chunk, stats: CorpusStats, params: Bm25Params
) -> float:
    doc_terms = bm25_tokenize(doc.text)
    score = 0.0
    for term in query:
        freq = doc_terms.count(term)
        if freq == 0:
            continue
        idf = bm25_idf(stats.n_docs, stats.df.get(term, 0))
        norm = params.k1 * (1.0 - params.b + params.b * doc.token_count / stats.avg_doc_len)
        score += idf * freq * (params.k1 + 1.0) / (freq + norm)
    return score


def rank_chunks(
    keyword: str, chunks: Sequence[Chunk], params: Bm25Params, top_k: int
) -> list[Chunk]:
    """Chunks by descending score for the tokenized keyword; ties by (url, index)."""
    if not chunks:
        raise ValueError("chunks must be non-empty")
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    query = bm25_tokenize(keyword)
    stats = corpus_stats(chunks)
    scored = sorted(
        chunks,
        key=lambda c: (-bm25_score(query, c, stats, params), c.source_url, c.index),
    )
    return scored[: min(top_k, len(scored))]


class SearchPort(Protocol):
    def search(self, query: str, max_results: int) -> list[SearchResult]: ...


class GoogleSearchClient:
    """Programmable-search JSON API client returning ranked (url, snippet) pairs."""

    endpoint = "https://www.googleapis.com/customsearch/v1"

    def __init__(
        self,
        api_key: str,
        engine_id: str,
        *,
        timeout: float = 10.0,
        session: requests.Session | None = None,
    ) -> None:
        self.api_key = api_key
        self.engine_id = engine_id
        self.timeout = timeout
        self.session = session or requests.Session()

    def search(self, query: str, max_results: int) -> list[SearchResult]:
        params = {
            "key": self.api_key,
            "cx": self.engine_id,
            "q": query,
            "num": min(max_results, 10),
        }
        try:
            response = self.session.get(self.endpoint, params=params, timeout=self.timeout)
            if response.status_code in (403, 429):
                raise SearchQuotaExceeded(f"search quota rejected ({response.status_code})")
            response.raise_for_status()
            items = response.json().get("items", [])
        except SearchQuotaExceeded:
            raise
        except (requests.RequestException, ValueError) as exc:
            raise SearchTransportError(f"search failed: {exc}") from exc
        return [
            SearchResult(
                keyword=query,
                url=item.get("link", ""),
                snippet=item.get("snippet", ""),
                rank=rank,
            )
            for rank, item in enumerate(items[:max_results], start=1)
        ]


def search_web(
    keyword: str, client: SearchPort, max_results: int = DEFAULT_MAX_RESULTS
) -> list[SearchResult]:
    if not keyword.strip():
        raise ValueError("keyword must be non-empty")
    if max_results < 1:
        raise ValueError("max_results must be >= 1")
    return client.search(keyword, max_results)[:max_results]


class _TextExtractor(html.parser.HTMLParser):
    _SKIP = {"script", "style", "noscript"}

    def __init__(self) -> None:
        super().__init__()
        self.parts: list[str] = []
        self._skip_depth = 0

    def handle_starttag(self, tag: str, attrs) -> None:
        if tag in self._SKIP:
            self._skip_depth += 1

    def handle_endtag(self, tag: str) -> None:
        if tag in self._SKIP and self._skip_depth:
            self._skip_depth -= 1

    def handle_data(self, data: str) -> None:
        if not self._skip_depth and data.strip():
            self.parts.append(data.strip())


def strip_markup(markup: str) -> str:
    extractor = _TextExtractor()
    extractor.feed(markup)
    return " ".join(extractor.parts)


def fetch_page(url: str, *, timeout: float = 10.0, session: requests.Session | None = None) -> str:
    session = session or requests.Session()
    response = session.get(url, timeout=timeout, headers={"User-Agent": USER_AGENT})
    response.raise_for_status()
    return strip_markup(response.text[:MAX_FETCHED_CHARS])


PageFetcher = Callable[[str], str]


def gather_corpus(
    results: Sequence[SearchResult],
    fetcher: PageFetcher | None = None,
    *,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    overlap: int = DEFAULT_OVERLAP,
) -> list[Chunk]:
    """One document per result: the snippet, or the page body when the snippet is thin."""
    chunks: list[Chunk] = []
    for result in results:
        text = result.snippet
        if len(text.split()) < MIN_SNIPPET_WORDS and fetcher is not None:
            try:
                fetched = fetcher(result.url)
            except requests.RequestException:
                fetched = ""
            if fetched.strip():
                text = fetched
        if not text.strip():
            continue
        chunks.extend(
            chunk_document(text, chunk_size, overlap, source_url=result.url)
        )
    return chunks


def _definition_request(
    system: str, user: str, purpose: Purpose, history: tuple[ChatMessage, ...] = ()
) -> ChatRequest:
    return ChatRequest(
        messages=(ChatMessage(Role.SYSTEM, system), ChatMessage(Role.USER, user)) + history,
        purpose=purpose,
    )


def refine_definition(
    keyword: str,
    top_chunks: Sequence[Chunk],
    gateway: Gateway,
    language: LanguageTag,
) -> WordInfo:
    """Summarize ranked chunks into a definition of at most two sentences."""
    top_chunks = [c for c in top_chunks if c.text.strip()]
    if not top_chunks:
        raise DefinitionUnavailable(f"no text evidence for {keyword!r}")
    word_label, passages_label = _REFINE_USER_LABELS[language]
    user = f"{word_label}: {keyword}\n{passages_label}:\n" + "\n".join(
        f"- {chunk.text}" for chunk in top_chunks
    )
    first = gateway.chat(
        _definition_request(REFINE_SYSTEM[language], user, Purpose.REFINE_CHUNKS)
    )
    definition = first.response_text.strip()
    if len(split_sentences(definition)) > MAX_DEFINITION_SENTENCES:
        retry = gateway.chat(
            _definition_request(
                REFINE_SYSTEM[language],
                user,
                Purpose.REFINE_CHUNKS,
                history=(
                    ChatMessage(Role.ASSISTANT, definition),
                    ChatMessage(Role.USER, _REASK_USER[language]),
                ),
            )
        )
        definition = trim_to_sentences(retry.response_text.strip())
    return WordInfo(
        keyword=keyword,
        definition=definition,
        source=RetrievalSource.GOOGLE_SEARCH,
        evidence=tuple((c.source_url, c.index) for c in top_chunks),
    )


def define_llm_only(keyword: str, gateway: Gateway, language: LanguageTag) -> WordInfo:
    """One model call defining the keyword from parametric knowledge alone."""
    if not keyword.strip():
        raise ValueError("keyword must be non-empty")
    exchange = gateway.chat(
        _definition_request(DEFINE_SYSTEM[language], keyword, Purpose.DEFINE_WORD)
    )
    return WordInfo(
        keyword=keyword,
        definition=trim_to_sentences(exchange.response_text.strip()),
        source=RetrievalSource.LLM_ONLY,
        evidence=None,
    )


class WordInfoCache:
    """Directory of per-keyword definition files, keyed by (source, case-folded keyword)."""

    def __init__(self, root: Path | str) -> None:
        self.root = Path(root)
        self._lock = threading.Lock()

    def path_for(self, keyword: str, source: RetrievalSource) -> Path:
        name = urllib.parse.quote(keyword.casefold(), safe="")
        return self.root / source.value / f"{name}.json"

    def lookup(self, keyword: str, source: RetrievalSource) -> WordInfo | None:
        path = self.path_for(keyword, source)
        if not path.exists():
            return None
        record = json.loads(path.read_text(encoding="utf-8"))
        evidence = record.get("evidence")
        return WordInfo(
            keyword=record["keyword"],
            definition=record["definition"],
            source=RetrievalSource(record["source"]),
            evidence=tuple((url, idx) for url, idx in evidence) if evidence is not None else None,
        )

    def store(self, info: WordInfo) -> None:
        record = {
            "keyword": info.keyword,
            "definition": info.definition,
            "source": info.source.value,
            "evidence": [list(pair) for pair in info.evidence] if info.evidence is not None else None,
        }
        path = self.path_for(info.keyword, info.source)
        try:
            with self._lock:
                path.parent.mkdir(parents=True, exist_ok=True)
                tmp = path.with_suffix(".json.tmp")
                tmp.write_text(
                    json.dumps(record, ensure_ascii=False, indent=1), encoding="utf-8"
                )
                tmp.replace(path)
        except OSError as exc:
            raise StoreWriteError(f"cache write failed for {info.keyword!r}: {exc}") from exc

    def entries(self, source: RetrievalSource | None = None) -> list[WordInfo]:
        sources = [source] if source else list(RetrievalSource)
        found: list[WordInfo] = []
        for src in sources:
            directory = self.root / src.value
            if not directory.is_dir():
                continue
            for path in sorted(directory.glob("*.json")):
                record = json.loads(path.read_text(encoding="utf-8"))
                evidence = record.get("evidence")
                found.append(
                    WordInfo(
                        keyword=record["keyword"],
                        definition=record["definition"],
                        source=RetrievalSource(record["source"]),
                        evidence=tuple((url, idx) for url, idx in evidence)
                        if evidence is not None
                        else None,
                    )
                )
        return found

    def purge(self, source: RetrievalSource | None = None) -> int:
        removed = 0
        sources = [source] if source else list(RetrievalSource)
        for src in sources:
            directory = self.root / src.value
            if not directory.is_dir():
                continue
            for path in directory.glob("*.json"):
                path.unlink()
                removed += 1
        return removed


def get_word_info(
    keyword: str,
    source: RetrievalSource,
    gateway: Gateway,
    language: LanguageTag,
    *,
    cache: WordInfoCache | None = None,
    search: SearchPort | None = None,
    fetcher: PageFetcher | None = None,
    params: Bm25Params = Bm25Params(),
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    overlap: int = DEFAULT_OVERLAP,
    top_k: int = DEFAULT_TOP_K,
    max_results: int = DEFAULT_MAX_RESULTS,
) -> WordInfo:
    """Cache-first definition lookup for one keyword via the requested path."""
    if cache is not None:
        cached = cache.lookup(keyword, source)
        if cached is not None:
            return cached
    if source is RetrievalSource.LLM_ONLY:
        info = define_llm_only(keyword, gateway, language)
    else:
        if search is None:
            raise DefinitionUnavailable(
                f"no cached definition for {keyword!r} and no search client configured"
            )
        results = search_web(keyword, search, max_results)
        corpus = gather_corpus(results, fetcher, chunk_size=chunk_size, overlap=overlap)
        if not corpus:
            raise DefinitionUnavailable(f"search produced no usable text for {keyword!r}")
        top = rank_chunks(keyword, corpus, params, top_k)
        info = refine_definition(keyword, top, gateway, language)
    if cache is not None:
        cache.store(info)
    return info
