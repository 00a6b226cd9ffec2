"""Two-call analysis pipelines: prompt assembly, execution, and verdict parsing.

The first call (P1) produces a preliminary pragmatic analysis of the input
text, optionally grounded by keyword definitions. The second call (P2) reflects
on that analysis, optionally guided by worked examples, and ends with a YES/NO
verdict.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass, field

from .core import (
    ExtractionMethod,
    Label,
    PipelineVariant,
    RetrievalSource,
    Sample,
    variant_plan,
)
from .errors import (
    DefinitionUnavailable,
    EmptyResponse,
    MalformedCSV,
    MissingTranscript,
    SampleSkipped,
    SearchTransportError,
    TaggerError,
    TemplateLanguageMismatch,
    TransportError,
    VerdictNotFound,
)
from .gateway import ChatExchange, ChatMessage, ChatRequest, Gateway, Purpose, Role
from .keywords import (
    KeywordSet,
    TaggerPort,
    extract_llm_based,
    extract_token_tagging,
)
from .retrieval import (
    Bm25Params,
    DEFAULT_CHUNK_SIZE,
    DEFAULT_MAX_RESULTS,
    DEFAULT_OVERLAP,
    DEFAULT_TOP_K,
    PageFetcher,
    SearchPort,
    WordInfo,
    WordInfoCache,
    get_word_info,
)
from .templates import PromptTemplateSet, load_templates

# Connective between a keyword and its definition in the word-info block.
_CONNECTIVE = {"en": "is", "id": "adalah"}

_DECISION_PREFIXES = ("Final decision:", "Keputusan akhir:")


@dataclass(frozen=True)
class FewShotBlock:
    """Worked reflection examples appended to the P2 system prompt."""

    examples: tuple[str, ...]
    header: str = ""

    def __post_init__(self) -> None:
        if not self.examples:
            raise ValueError("few-shot block needs at least one example")
        for example in self.examples:
            last = example.rstrip().splitlines()[-1].strip()
            if not (
                last.startswith(_DECISION_PREFIXES)
                and last.split(":", 1)[1].strip() in ("YES", "NO")
            ):
                raise ValueError(f"example must end with a decision line, got {last!r}")

    @property
    def k(self) -> int:
        return len(self.examples)

    def render(self) -> str:
        body = "\n".join(self.examples)
        return f"{self.header}\n{body}" if self.header else body

    @classmethod
    def from_template(cls, text: str) -> "FewShotBlock":
        lines = text.split("\n")
        starts = [i for i, line in enumerate(lines) if line.startswith("Tweet: ")]
        if not starts:
            raise ValueError("template contains no examples")
        header = "\n".join(lines[: starts[0]])
        bounds = starts + [len(lines)]
        examples = tuple(
            "\n".join(lines[a:b]).rstrip("\n") for a, b in zip(bounds, bounds[1:])
        )
        return cls(examples=examples, header=header)


def default_few_shot(templates: PromptTemplateSet) -> FewShotBlock:
    return FewShotBlock.from_template(templates.fewshot_header_and_examples)


def render_word_info_block(
    word_infos: list[WordInfo] | tuple[WordInfo, ...], templates: PromptTemplateSet
) -> str:
    connective = _CONNECTIVE[templates.language.value]
    lines = [f"{info.keyword} {connective} {info.definition}" for info in word_infos]
    return templates.wordinfo_user_header + "\n" + "\n".join(lines)


def build_p1(
    sample: Sample,
    word_infos: list[WordInfo] | tuple[WordInfo, ...],
    templates: PromptTemplateSet,
) -> ChatRequest:
    """P1 request: analysis instructions, plus keyword definitions when available."""
    if templates.language is not sample.language:
        raise TemplateLanguageMismatch(
            f"sample is {sample.language.value}, templates are {templates.language.value}"
        )
    system = templates.p1_system
    user = sample.text
    if word_infos:
        system = system + "\n" + templates.wordinfo_system_suffix
        user = user + "\n" + render_word_info_block(word_infos, templates)
    return ChatRequest(
        messages=(ChatMessage(Role.SYSTEM, system), ChatMessage(Role.USER, user)),
        purpose=Purpose.P1,
    )


def build_p2(
    a1: str, few_shot: FewShotBlock | None, templates: PromptTemplateSet
) -> ChatRequest:
    """P2 request: reflection instructions over the raw preliminary analysis."""
    if not a1:
        raise ValueError("preliminary analysis must be non-empty")
    system = templates.p2_system
    if few_shot is not None:
        system = system + "\n" + few_shot.render()
    return ChatRequest(
        messages=(ChatMessage(Role.SYSTEM, system), ChatMessage(Role.USER, a1)),
        purpose=Purpose.P2,
    )


_VERDICT = re.compile(r"\b(yes|no)\b", re.IGNORECASE)


def parse_verdict(a2: str) -> Label:
    """Label of the last standalone YES/NO token in the reflection."""
    matches = _VERDICT.findall(a2)
    if not matches:
        raise VerdictNotFound("no standalone YES or NO in reflection")
    return Label.from_verdict(matches[-1])


@dataclass
class PipelineDeps:
    """Everything run_pipeline may need; which parts are used depends on the variant."""

    gateway: Gateway
    tagger: TaggerPort | None = None
    search: SearchPort | None = None
    cache: WordInfoCache | None = None
    fetcher: PageFetcher | None = None
    bm25: Bm25Params = field(default_factory=Bm25Params)
    chunk_size: int = DEFAULT_CHUNK_SIZE
    overlap: int = DEFAULT_OVERLAP
    top_k: int = DEFAULT_TOP_K
    max_results: int = DEFAULT_MAX_RESULTS


@dataclass(frozen=True)
class PipelineTrace:
    sample_id: str
    variant: PipelineVariant
    keywords: KeywordSet | None
    word_infos: tuple[WordInfo, ...]
    p1_exchange: ChatExchange
    p2_exchange: ChatExchange
    a1: str
    a2: str
    verdict: Label
    wall_time: float


_SKIP_ERRORS = (
    TransportError,
    EmptyResponse,
    MissingTranscript,
    MalformedCSV,
    TaggerError,
    SearchTransportError,
    VerdictNotFound,
)


def run_pipeline(
    sample: Sample, variant: PipelineVariant, deps: PipelineDeps
) -> PipelineTrace:
    """Execute one sample through the chosen variant; failures skip the sample only."""
    started = time.monotonic()
    plan = variant_plan(variant)
    templates = load_templates(sample.language)
    try:
        keywords: KeywordSet | None = None
        if plan.extraction is ExtractionMethod.TOKEN_TAGGING:
            if deps.tagger is None:
                raise TaggerError("variant needs a tagger but none was configured")
            keywords = extract_token_tagging(sample, deps.tagger)
        elif plan.extraction is ExtractionMethod.LLM_BASED:
            keywords = extract_llm_based(sample, deps.gateway, templates)

        word_infos: list[WordInfo] = []
        if plan.retrieval is not None and keywords:
            for keyword in keywords.keywords:
                try:
                    word_infos.append(
                        get_word_info(
                            keyword,
                            plan.retrieval,
                            deps.gateway,
                            sample.language,
                            cache=deps.cache,
                            search=deps.search,
                            fetcher=deps.fetcher,
                            params=deps.bm25,
                            chunk_size=deps.chunk_size,
                            overlap=deps.overlap,
                            top_k=deps.top_k,
                            max_results=deps.max_results,
                        )
                    )
                except DefinitionUnavailable:
                    continue

        p1_request = build_p1(sample, word_infos, templates)
        p1_exchange = deps.gateway.chat(p1_request)
        few_shot = default_few_shot(templates) if plan.few_shot else None
        p2_request = build_p2(p1_exchange.response_text, few_shot, templates)
        p2_exchange = deps.gateway.chat(p2_request)
        verdict = parse_verdict(p2_exchange.response_text)
    except _SKIP_ERRORS as exc:
        raise SampleSkipped(sample.id, f"{type(exc).__name__}: {exc}") from exc
    return PipelineTrace(
        sample_id=sample.id,
        variant=variant,
        keywords=keywords,
        word_infos=tuple(word_infos),
        p1_exchange=p1_exchange,
        p2_exchange=p2_exchange,
        a1=p1_exchange.response_text,
        a2=p2_exchange.response_text,
        verdict=verdict,
        wall_time=time.monotonic() - started,
    )
