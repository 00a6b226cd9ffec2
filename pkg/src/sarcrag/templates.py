"""Per-language prompt templates, loaded from packaged text files."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .core import LanguageTag


@dataclass(frozen=True)
class PromptTemplateSet:
    language: LanguageTag
    p1_system: str
    p2_system: str
    wordinfo_user_header: str
    wordinfo_system_suffix: str
    fewshot_header_and_examples: str
    keyword_identify: str
    keyword_csv: str


def _read(language: LanguageTag, name: str) -> str:
    path = resources.files("sarcrag") / "templates" / language.value / f"{name}.txt"
    # Files carry one trailing newline for editor friendliness; templates do not.
    return path.read_text(encoding="utf-8").removesuffix("\n")


@lru_cache(maxsize=None)
def load_templates(language: LanguageTag) -> PromptTemplateSet:
    return PromptTemplateSet(
        language=language,
        p1_system=_read(language, "p1_system"),
        p2_system=_read(language, "p2_system"),
        wordinfo_user_header=_read(language, "wordinfo_user_header"),
        wordinfo_system_suffix=_read(language, "wordinfo_system_suffix"),
        fewshot_header_and_examples=_read(language, "fewshot"),
        keyword_identify=_read(language, "keyword_identify"),
        keyword_csv=_read(language, "keyword_csv"),
    )
