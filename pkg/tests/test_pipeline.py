"""Pipeline: few-shot blocks, prompt assembly, verdict parsing, variant orchestration."""

import pytest

from sarcrag.core import (
    DatasetKind,
    ExtractionMethod,
    Label,
    LanguageTag,
    PipelineVariant,
    RetrievalSource,
    Sample,
)
from sarcrag.errors import (
    SampleSkipped,
    TemplateLanguageMismatch,
    TransportError,
    VerdictNotFound,
)
from sarcrag.gateway import Purpose
from sarcrag.keywords import HeuristicTagger
from sarcrag.pipeline import (
    FewShotBlock,
    PipelineDeps,
    build_p1,
    build_p2,
    default_few_shot,
    parse_verdict,
    render_word_info_block,
    run_pipeline,
)
from sarcrag.retrieval import SearchResult, WordInfo
from sarcrag.templates import load_templates

EN = load_templates(LanguageTag.ENGLISH)
ID = load_templates(LanguageTag.INDONESIAN)


def en_sample(text="i saw Paris yesterday"):
    return Sample(
        id="semeval:9",
        text=text,
        gold=Label.SARCASTIC,
        dataset=DatasetKind.SEMEVAL_2018_T3,
        language=LanguageTag.ENGLISH,
    )


def word_info(keyword="Paris", definition="The capital of France."):
    return WordInfo(keyword=keyword, definition=definition, source=RetrievalSource.LLM_ONLY)


EXAMPLE = "Tweet: something\nObservation: fine\nFinal decision: YES"
EXAMPLE_NO = "Tweet: other\nObservation: fine\nFinal decision: NO"


class TestFewShotBlock:
    def test_requires_examples(self):
        with pytest.raises(ValueError):
            FewShotBlock(examples=())

    def test_requires_decision_line(self):
        with pytest.raises(ValueError):
            FewShotBlock(examples=("Tweet: x\nObservation: y",))
        with pytest.raises(ValueError):
            FewShotBlock(examples=("Tweet: x\nFinal decision: MAYBE",))

    def test_indonesian_decision_line_accepted(self):
        block = FewShotBlock(examples=("Tweet: x\nKeputusan akhir: NO",))
        assert block.k == 1

    def test_render_with_header(self):
        block = FewShotBlock(examples=(EXAMPLE,), header="Examples:")
        assert block.render() == "Examples:\n" + EXAMPLE

    def test_render_without_header(self):
        block = FewShotBlock(examples=(EXAMPLE, EXAMPLE_NO))
        assert block.render() == EXAMPLE + "\n" + EXAMPLE_NO

    def test_from_template_splits_on_tweet_lines(self):
        text = "Header line\n" + EXAMPLE + "\n" + EXAMPLE_NO
        block = FewShotBlock.from_template(text)
        assert block.header == "Header line"
        assert block.k == 2
        assert block.examples[0] == EXAMPLE
        assert block.examples[1] == EXAMPLE_NO

    def test_from_template_without_header(self):
        block = FewShotBlock.from_template(EXAMPLE)
        assert block.header == ""
        assert block.k == 1

    def test_from_template_rejects_headerless_prose(self):
        with pytest.raises(ValueError):
            FewShotBlock.from_template("no examples at all")

    def test_default_blocks_parse_for_both_languages(self):
        en_block = default_few_shot(EN)
        id_block = default_few_shot(ID)
        assert en_block.k == 2
        assert id_block.k == 2
        assert en_block.header == "Here are example reflections:"
        assert id_block.header == ""
        decisions = [e.rstrip().splitlines()[-1] for e in en_block.examples]
        assert decisions == ["Final decision: YES", "Final decision: NO"]


class TestWordInfoBlock:
    def test_english_connective(self):
        block = render_word_info_block([word_info()], EN)
        assert block == "Entity facts:\nParis is The capital of France."

    def test_indonesian_connective(self):
        info = word_info("kw", "barang tiruan berkualitas rendah.")
        block = render_word_info_block([info], ID)
        assert block == "Definisi kata-kata penting:\nkw adalah barang tiruan berkualitas rendah."

    def test_one_line_per_keyword_in_order(self):
        infos = [word_info("A", "First."), word_info("B", "Second.")]
        lines = render_word_info_block(infos, EN).splitlines()
        assert lines[1:] == ["A is First.", "B is Second."]


class TestBuildP1:
    def test_plain_request(self):
        sample = en_sample()
        request = build_p1(sample, [], EN)
        assert request.purpose is Purpose.P1
        assert request.messages[0].content == EN.p1_system
        assert request.messages[1].content == sample.text

    def test_word_infos_extend_system_and_user(self):
        sample = en_sample()
        request = build_p1(sample, [word_info()], EN)
        assert request.messages[0].content == EN.p1_system + "\n" + EN.wordinfo_system_suffix
        assert request.messages[1].content == (
            sample.text + "\n" + render_word_info_block([word_info()], EN)
        )

    def test_language_mismatch_rejected(self):
        with pytest.raises(TemplateLanguageMismatch):
            build_p1(en_sample(), [], ID)


class TestBuildP2:
    def test_plain_request(self):
        request = build_p2("the analysis", None, EN)
        assert request.purpose is Purpose.P2
        assert request.messages[0].content == EN.p2_system
        assert request.messages[1].content == "the analysis"

    def test_few_shot_appended_to_system(self):
        block = FewShotBlock(examples=(EXAMPLE,))
        request = build_p2("a1", block, EN)
        assert request.messages[0].content == EN.p2_system + "\n" + EXAMPLE

    def test_rejects_empty_analysis(self):
        with pytest.raises(ValueError):
            build_p2("", None, EN)


class TestParseVerdict:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("Final decision: YES", Label.SARCASTIC),
            ("Final decision: NO", Label.NOT_SARCASTIC),
            ("maybe yes, maybe no", Label.NOT_SARCASTIC),
            ("no at first, but ultimately yes", Label.SARCASTIC),
            ("Yes.", Label.SARCASTIC),
            ("Keputusan akhir: NO", Label.NOT_SARCASTIC),
        ],
    )
    def test_last_standalone_token_wins(self, text, expected):
        assert parse_verdict(text) is expected

    @pytest.mark.parametrize("text", ["", "yesterday at noon", "nothing to say", "not sure"])
    def test_embedded_tokens_do_not_count(self, text):
        with pytest.raises(VerdictNotFound):
            parse_verdict(text)


class PurposeGateway:
    """Scripted stand-in for Gateway: answers by request purpose, records every call."""

    def __init__(self, script):
        self.script = {purpose: list(texts) for purpose, texts in script.items()}
        self.requests = []

    def chat(self, request):
        self.requests.append(request)
        queue = self.script[request.purpose]
        text = queue.pop(0) if len(queue) > 1 else queue[0]

        class Exchange:
            response_text = text

        return Exchange()

    @property
    def purposes(self):
        return [r.purpose for r in self.requests]


class RaisingGateway:
    def chat(self, request):
        raise TransportError("backend unreachable")


LONG_SNIPPET = " ".join(f"word{i}" for i in range(25))


class FakeSearch:
    def search(self, query, max_results):
        return [SearchResult(keyword=query, url="https://a.com", snippet=LONG_SNIPPET, rank=1)]


class TestRunPipeline:
    def test_plain_variant_two_calls(self):
        gateway = PurposeGateway({Purpose.P1: ["an analysis"], Purpose.P2: ["Final decision: YES"]})
        trace = run_pipeline(en_sample(), PipelineVariant.PMP, PipelineDeps(gateway=gateway))
        assert gateway.purposes == [Purpose.P1, Purpose.P2]
        assert trace.keywords is None
        assert trace.word_infos == ()
        assert trace.a1 == "an analysis"
        assert trace.verdict is Label.SARCASTIC
        assert trace.wall_time >= 0

    def test_p2_reads_a1_verbatim(self):
        gateway = PurposeGateway({Purpose.P1: ["an analysis"], Purpose.P2: ["Final decision: NO"]})
        run_pipeline(en_sample(), PipelineVariant.PMP, PipelineDeps(gateway=gateway))
        p2 = gateway.requests[-1]
        assert p2.messages[1].content == "an analysis"

    def test_tagging_variant_defines_each_keyword(self):
        gateway = PurposeGateway(
            {
                Purpose.DEFINE_WORD: ["The capital of France."],
                Purpose.P1: ["analysis"],
                Purpose.P2: ["Final decision: NO"],
            }
        )
        deps = PipelineDeps(gateway=gateway, tagger=HeuristicTagger())
        trace = run_pipeline(en_sample(), PipelineVariant.PMP_WL, deps)
        assert gateway.purposes == [Purpose.DEFINE_WORD, Purpose.P1, Purpose.P2]
        assert trace.keywords.source is ExtractionMethod.TOKEN_TAGGING
        assert trace.keywords.keywords == ("Paris",)
        assert [w.keyword for w in trace.word_infos] == ["Paris"]
        p1_user = gateway.requests[1].messages[1].content
        assert "Paris is The capital of France." in p1_user

    def test_tagging_variant_without_tagger_skips(self):
        gateway = PurposeGateway({Purpose.P1: ["x"], Purpose.P2: ["yes"]})
        with pytest.raises(SampleSkipped) as info:
            run_pipeline(en_sample(), PipelineVariant.PMP_WL, PipelineDeps(gateway=gateway))
        assert "TaggerError" in info.value.reason

    def test_no_keywords_means_plain_p1(self):
        gateway = PurposeGateway({Purpose.P1: ["analysis"], Purpose.P2: ["Final decision: NO"]})
        deps = PipelineDeps(gateway=gateway, tagger=HeuristicTagger())
        trace = run_pipeline(en_sample("nothing notable here"), PipelineVariant.PMP_WL, deps)
        assert gateway.purposes == [Purpose.P1, Purpose.P2]
        assert trace.word_infos == ()
        assert gateway.requests[0].messages[1].content == "nothing notable here"

    def test_web_variant_full_call_sequence(self):
        gateway = PurposeGateway(
            {
                Purpose.KEYWORD_IDENTIFY: ["i do not know Paris"],
                Purpose.KEYWORD_CLEAN: ["Paris"],
                Purpose.REFINE_CHUNKS: ["A city in France."],
                Purpose.P1: ["analysis"],
                Purpose.P2: ["Final decision: YES"],
            }
        )
        deps = PipelineDeps(gateway=gateway, search=FakeSearch())
        trace = run_pipeline(en_sample(), PipelineVariant.PMP_WG, deps)
        assert gateway.purposes == [
            Purpose.KEYWORD_IDENTIFY,
            Purpose.KEYWORD_CLEAN,
            Purpose.REFINE_CHUNKS,
            Purpose.P1,
            Purpose.P2,
        ]
        assert trace.keywords.source is ExtractionMethod.LLM_BASED
        assert trace.word_infos[0].source is RetrievalSource.GOOGLE_SEARCH
        assert trace.word_infos[0].evidence

    def test_web_variant_sentinel_means_no_retrieval(self):
        gateway = PurposeGateway(
            {
                Purpose.KEYWORD_IDENTIFY: ["all clear"],
                Purpose.KEYWORD_CLEAN: ["NO UNKNOWN"],
                Purpose.P1: ["analysis"],
                Purpose.P2: ["Final decision: NO"],
            }
        )
        deps = PipelineDeps(gateway=gateway, search=FakeSearch())
        trace = run_pipeline(en_sample(), PipelineVariant.PMP_WG, deps)
        assert trace.keywords.keywords == ()
        assert trace.word_infos == ()
        assert Purpose.REFINE_CHUNKS not in gateway.purposes

    def test_few_shot_variant_alters_only_p2_system(self):
        script = {
            Purpose.DEFINE_WORD: ["The capital of France."],
            Purpose.P1: ["analysis"],
            Purpose.P2: ["Final decision: NO"],
        }
        plain = PurposeGateway(script)
        shot = PurposeGateway(script)
        tagger = HeuristicTagger()
        run_pipeline(en_sample(), PipelineVariant.PMP_WL, PipelineDeps(gateway=plain, tagger=tagger))
        run_pipeline(
            en_sample(), PipelineVariant.PMP_WL_FS, PipelineDeps(gateway=shot, tagger=tagger)
        )
        assert plain.purposes == shot.purposes
        plain_p2, shot_p2 = plain.requests[-1], shot.requests[-1]
        assert plain_p2.messages[1].content == shot_p2.messages[1].content
        assert shot_p2.messages[0].content == (
            EN.p2_system + "\n" + default_few_shot(EN).render()
        )

    def test_unavailable_definition_drops_keyword_only(self):
        # no search client and no cache: every web lookup is unavailable
        gateway = PurposeGateway(
            {
                Purpose.KEYWORD_IDENTIFY: ["i do not know Paris"],
                Purpose.KEYWORD_CLEAN: ["Paris"],
                Purpose.P1: ["analysis"],
                Purpose.P2: ["Final decision: NO"],
            }
        )
        trace = run_pipeline(en_sample(), PipelineVariant.PMP_WG, PipelineDeps(gateway=gateway))
        assert trace.word_infos == ()
        assert trace.verdict is Label.NOT_SARCASTIC
        assert gateway.requests[-2].messages[1].content == en_sample().text

    def test_missing_verdict_skips_sample(self):
        gateway = PurposeGateway(
            {Purpose.P1: ["analysis"], Purpose.P2: ["the reading does not converge."]}
        )
        with pytest.raises(SampleSkipped) as info:
            run_pipeline(en_sample(), PipelineVariant.PMP, PipelineDeps(gateway=gateway))
        assert info.value.sample_id == "semeval:9"
        assert "VerdictNotFound" in info.value.reason

    def test_transport_failure_skips_sample(self):
        with pytest.raises(SampleSkipped) as info:
            run_pipeline(en_sample(), PipelineVariant.PMP, PipelineDeps(gateway=RaisingGateway()))
        assert "TransportError" in info.value.reason
