"""Prompt template loading."""

import pytest

from sarcrag.core import LanguageTag
from sarcrag.templates import load_templates


class TestLoadTemplates:
    @pytest.mark.parametrize("language", list(LanguageTag))
    def test_all_fields_populated(self, language):
        templates = load_templates(language)
        assert templates.language is language
        for name in (
            "p1_system",
            "p2_system",
            "wordinfo_user_header",
            "wordinfo_system_suffix",
            "fewshot_header_and_examples",
            "keyword_identify",
            "keyword_csv",
        ):
            value = getattr(templates, name)
            assert isinstance(value, str) and value.strip(), name

    def test_no_trailing_newlines(self):
        templates = load_templates(LanguageTag.ENGLISH)
        assert not templates.p1_system.endswith("\n")
        assert not templates.fewshot_header_and_examples.endswith("\n")

    def test_cached_instances(self):
        assert load_templates(LanguageTag.ENGLISH) is load_templates(LanguageTag.ENGLISH)

    def test_languages_differ(self):
        en = load_templates(LanguageTag.ENGLISH)
        id_ = load_templates(LanguageTag.INDONESIAN)
        assert en.p1_system != id_.p1_system
        assert en.wordinfo_user_header == "Entity facts:"
        assert id_.wordinfo_user_header == "Definisi kata-kata penting:"
