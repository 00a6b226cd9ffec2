"""Command-line experiment runner: run a dataset through a pipeline variant, report metrics, manage the definition cache."""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import yaml

from .core import DatasetKind, Label, PipelineVariant, RetrievalSource, variant_plan
from .datasets import load_dataset
from .errors import ConfigError, EmptyEvaluation, LogParseError, SampleSkipped, SarcragError
from .evaluation import confusion, macro_metrics, report_to_json, report_to_table
from .gateway import Gateway, LiveBackend, ReplayBackend, TranscriptStore
from .keywords import HeuristicTagger
from .pipeline import PipelineDeps, run_pipeline
from .retrieval import GoogleSearchClient, WordInfoCache, fetch_page


@dataclass
class RunConfig:
    dataset: DatasetKind
    data_path: Path
    variant: PipelineVariant
    model: str
    backend: str
    endpoint: str | None
    concurrency: int
    limit: int | None
    out_dir: Path
    transcripts_dir: Path
    cache_dir: Path
    search_api_key: str | None
    search_engine_id: str | None

    @property
    def run_dir(self) -> Path:
        return self.out_dir / self.dataset.value / self.model / self.variant.value


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a mapping of keys to values")
    return data


def _resolve(flag, env_name: str | None, file_values: dict, key: str, default=None):
    """Flags win over environment variables, which win over the config file."""
    if flag is not None:
        return flag
    if env_name:
        env_value = os.environ.get(env_name)
        if env_value:
            return env_value
    if file_values.get(key) is not None:
        return file_values[key]
    return default


def build_run_config(args: argparse.Namespace) -> RunConfig:
    file_values = _load_config_file(args.config)

    def pick(flag, key, default=None, env=None):
        return _resolve(flag, env, file_values, key, default)

    dataset = pick(args.dataset, "dataset")
    data_path = pick(args.data_path, "data_path")
    variant = pick(args.variant, "variant")
    model = pick(args.model, "model")
    if not dataset or not data_path or not variant or not model:
        raise ConfigError("dataset, data-path, variant and model are all required")
    try:
        config = RunConfig(
            dataset=DatasetKind(dataset),
            data_path=Path(data_path),
            variant=PipelineVariant(variant),
            model=model,
            backend=pick(args.backend, "backend", "live"),
            endpoint=pick(args.endpoint, "endpoint", env="LLM_ENDPOINT"),
            concurrency=int(pick(args.concurrency, "concurrency", 4)),
            limit=(lambda v: int(v) if v is not None else None)(pick(args.limit, "limit")),
            out_dir=Path(pick(args.out, "out", "runs")),
            transcripts_dir=Path(pick(args.transcripts, "transcripts", "transcripts")),
            cache_dir=Path(pick(args.cache, "cache", "cache")),
            search_api_key=pick(None, "search_api_key", env="SEARCH_API_KEY"),
            search_engine_id=pick(None, "search_engine_id", env="SEARCH_ENGINE_ID"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    validate_config(config)
    return config


def validate_config(config: RunConfig) -> None:
    if config.backend not in ("live", "replay"):
        raise ConfigError(f"backend must be live or replay, got {config.backend!r}")
    if config.concurrency < 1:
        raise ConfigError("concurrency must be >= 1")
    if config.limit is not None and config.limit <= 0:
        raise ConfigError("limit must be a positive sample count")
    if not config.data_path.exists():
        raise ConfigError(f"data path does not exist: {config.data_path}")
    if config.backend == "replay" and not config.transcripts_dir.is_dir():
        raise ConfigError(f"replay needs an existing transcript store: {config.transcripts_dir}")
    if config.backend == "live" and not config.endpoint:
        raise ConfigError("live backend needs an endpoint (flag, LLM_ENDPOINT, or config file)")
    needs_search = variant_plan(config.variant).retrieval is RetrievalSource.GOOGLE_SEARCH
    if needs_search and config.backend == "live":
        if not (config.search_api_key and config.search_engine_id):
            raise ConfigError(
                "this variant searches the web: set SEARCH_API_KEY and SEARCH_ENGINE_ID"
            )


def build_deps(config: RunConfig, run_dir: Path) -> PipelineDeps:
    store = TranscriptStore(config.transcripts_dir)
    if config.backend == "replay":
        gateway = Gateway(ReplayBackend(store))
        search = None
        fetcher = None
    else:
        backend = LiveBackend(config.endpoint, config.model)
        gateway = Gateway(backend, store=store, exchange_log=run_dir / "exchanges.jsonl")
        needs_search = variant_plan(config.variant).retrieval is RetrievalSource.GOOGLE_SEARCH
        search = (
            GoogleSearchClient(config.search_api_key, config.search_engine_id)
            if needs_search
            else None
        )
        fetcher = fetch_page
    return PipelineDeps(
        gateway=gateway,
        tagger=HeuristicTagger(),
        search=search,
        cache=WordInfoCache(config.cache_dir),
        fetcher=fetcher,
    )


def cmd_run(args: argparse.Namespace) -> int:
    config = build_run_config(args)
    samples = load_dataset(config.dataset, config.data_path)
    if config.limit is not None:
        samples = samples[: config.limit]
    run_dir = config.run_dir
    run_dir.mkdir(parents=True, exist_ok=True)
    deps = build_deps(config, run_dir)

    def run_one(sample) -> dict:
        started = time.monotonic()
        try:
            trace = run_pipeline(sample, config.variant, deps)
            return {
                "sample_id": sample.id,
                "variant": config.variant.value,
                "gold": sample.gold.value,
                "verdict": trace.verdict.value,
                "skipped_reason": None,
                "keywords": list(trace.keywords.keywords) if trace.keywords else [],
                "word_info_sources": [info.source.value for info in trace.word_infos],
                "p1_digest": trace.p1_exchange.request_digest,
                "p2_digest": trace.p2_exchange.request_digest,
                "wall_time": trace.wall_time,
            }
        except SampleSkipped as skip:
            return {
                "sample_id": sample.id,
                "variant": config.variant.value,
                "gold": sample.gold.value,
                "verdict": None,
                "skipped_reason": skip.reason,
                "keywords": [],
                "word_info_sources": [],
                "p1_digest": None,
                "p2_digest": None,
                "wall_time": time.monotonic() - started,
            }

    with ThreadPoolExecutor(max_workers=config.concurrency) as pool:
        records = list(pool.map(run_one, samples))

    log_path = run_dir / "run.jsonl"
    with log_path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")

    try:
        report = _report_from_records(records)
    except EmptyEvaluation:
        print(f"run finished but every sample was skipped; no report written ({log_path})")
        return 0
    (run_dir / "report.json").write_text(report_to_json(report) + "\n", encoding="utf-8")
    (run_dir / "report.txt").write_text(report_to_table(report), encoding="utf-8")
    print(
        f"{config.dataset.value}/{config.model}/{config.variant.value}: "
        f"scored {report.n_scored}, skipped {report.n_skipped}, "
        f"f1_macro {report.f1_macro:.4f} -> {run_dir}"
    )
    return 0


def read_run_log(path: Path | str) -> list[dict]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise LogParseError(f"cannot read run log: {exc}") from exc
    records: list[dict] = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise LogParseError(f"invalid JSON: {exc.msg}", line=line_no) from exc
        for key in ("sample_id", "gold", "verdict", "skipped_reason"):
            if key not in record:
                raise LogParseError(f"missing key {key!r}", line=line_no)
        records.append(record)
    return records


def _report_from_records(records: list[dict]):
    golds = {r["sample_id"]: Label(r["gold"]) for r in records}
    preds = [
        (r["sample_id"], Label(r["verdict"]) if r["verdict"] is not None else None)
        for r in records
    ]
    return macro_metrics(confusion(preds, golds))


def report_from_log(path: Path | str):
    """Recompute the metrics report from a run log, with no model access."""
    return _report_from_records(read_run_log(path))


def cmd_report(args: argparse.Namespace) -> int:
    report = report_from_log(args.run_log)
    if args.json:
        print(report_to_json(report))
    else:
        print(report_to_table(report), end="")
    return 0


def cmd_cache(args: argparse.Namespace) -> int:
    cache = WordInfoCache(Path(args.cache))
    source = RetrievalSource(args.source) if args.source else None
    if args.action == "list":
        for info in cache.entries(source):
            first_line = info.definition.splitlines()[0]
            print(f"{info.keyword}\t{info.source.value}\t{first_line}")
        return 0
    removed = cache.purge(source)
    print(f"removed {removed} cached definitions")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sarcrag",
        description="Run sarcasm-detection prompting pipelines and score the results.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one dataset through one pipeline variant")
    run.add_argument("--dataset", choices=[k.value for k in DatasetKind])
    run.add_argument("--data-path", dest="data_path")
    run.add_argument("--variant", choices=[v.value for v in PipelineVariant])
    run.add_argument("--model")
    run.add_argument("--backend", choices=["live", "replay"])
    run.add_argument("--endpoint")
    run.add_argument("--concurrency", type=int)
    run.add_argument("--limit", type=int)
    run.add_argument("--out")
    run.add_argument("--transcripts", help="transcript store directory")
    run.add_argument("--cache", help="definition cache directory")
    run.add_argument("--config", help="YAML file with the same keys as the flags")
    run.set_defaults(func=cmd_run)

    report = sub.add_parser("report", help="recompute metrics from a run log")
    report.add_argument("run_log")
    report.add_argument("--json", action="store_true")
    report.set_defaults(func=cmd_report)

    cache = sub.add_parser("cache", help="inspect or clear the definition cache")
    cache.add_argument("action", choices=["list", "purge"])
    cache.add_argument("--source", choices=[s.value for s in RetrievalSource])
    cache.add_argument("--cache", default="cache")
    cache.set_defaults(func=cmd_cache)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SarcragError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
