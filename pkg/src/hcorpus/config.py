"""Pipeline configuration: one JSON file, strict keys, env overrides.

Unknown keys are rejected so typos fail loudly rather than silently
running with defaults. Two environment variables override the file:
``HCORPUS_WORK_DIR`` (relocates all stores) and
``HCORPUS_ANNOTATOR_ENDPOINT`` (switches the annotator from the bundled
mock to a remote endpoint).
"""

from __future__ import annotations

import dataclasses
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

from .enrich import DEFAULT_LANGUAGES
from .normalize import NormalizationProfile
from .segment import DEFAULT_MAX_UNIT_CHARS, DEFAULT_OVERLAP_UNITS, DEFAULT_WINDOW_UNITS
from .similarity import DEFAULT_GROUP_THRESHOLD

logger = logging.getLogger(__name__)

ENV_WORK_DIR = "HCORPUS_WORK_DIR"
ENV_ANNOTATOR_ENDPOINT = "HCORPUS_ANNOTATOR_ENDPOINT"

DEFAULT_TAG_VOCABULARY = (
    "ethics", "prayer", "charity", "faith", "knowledge", "family",
    "trade", "purity", "intention", "community", "patience", "justice",
)


class ConfigError(ValueError):
    pass


def _build(cls, data: dict, context: str):
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError("unknown %s keys: %s" % (context, ", ".join(sorted(unknown))))
    return cls(**data)


@dataclass
class SegmentConfig:
    window_units: int = DEFAULT_WINDOW_UNITS
    overlap_units: int = DEFAULT_OVERLAP_UNITS
    max_unit_chars: int = DEFAULT_MAX_UNIT_CHARS
    backend: str = "rule"  # "rule" | "annotator"

    def validate(self):
        if self.backend not in ("rule", "annotator"):
            raise ConfigError("segment.backend must be 'rule' or 'annotator'")
        if not (0 < self.overlap_units < self.window_units):
            raise ConfigError("segment windows need 0 < overlap_units < window_units")
        if self.max_unit_chars < 1:
            raise ConfigError("segment.max_unit_chars must be positive")


@dataclass
class AlignConfig:
    min_fidelity: float = 0.80
    slack_ratio: float = 0.15

    def validate(self):
        if not (0.0 < self.min_fidelity <= 1.0):
            raise ConfigError("align.min_fidelity must lie in (0, 1]")
        if self.slack_ratio < 0:
            raise ConfigError("align.slack_ratio must be non-negative")


@dataclass
class AnnotatorConfig:
    endpoint: str = ""  # empty: use the deterministic mock
    timeout: float = 30.0
    max_attempts: int = 3
    backoff_initial: float = 0.5
    rate_per_second: float = 0.0  # 0: unlimited

    def validate(self):
        if self.max_attempts < 1:
            raise ConfigError("annotator.max_attempts must be at least 1")
        if self.timeout <= 0:
            raise ConfigError("annotator.timeout must be positive")


@dataclass
class EnrichConfig:
    languages: list[str] = field(default_factory=lambda: list(DEFAULT_LANGUAGES))
    tag_vocabulary: list[str] = field(default_factory=lambda: list(DEFAULT_TAG_VOCABULARY))

    def validate(self):
        if not self.languages:
            raise ConfigError("enrich.languages must not be empty")
        if len(set(self.languages)) != len(self.languages):
            raise ConfigError("enrich.languages must not repeat")
        if not self.tag_vocabulary:
            raise ConfigError("enrich.tag_vocabulary must not be empty")


@dataclass
class GroupConfig:
    threshold: float = DEFAULT_GROUP_THRESHOLD

    def validate(self):
        if not (0.0 < self.threshold <= 1.0):
            raise ConfigError("group.threshold must lie in (0, 1]")


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8799
    static_dir: str = ""

    def validate(self):
        if not (0 < self.port < 65536):
            raise ConfigError("service.port must be a valid TCP port")


@dataclass
class PipelineConfig:
    work_dir: str = "work"
    manifest_path: str = ""
    sources_path: str = ""  # CSV of source files to ingest
    reclassification_path: str = ""
    seed: int = 0
    stages: list[str] = field(
        default_factory=lambda: ["ingest", "segment", "align", "enrich", "group"]
    )
    normalization: NormalizationProfile = field(default_factory=NormalizationProfile)
    segment: SegmentConfig = field(default_factory=SegmentConfig)
    align: AlignConfig = field(default_factory=AlignConfig)
    annotator: AnnotatorConfig = field(default_factory=AnnotatorConfig)
    enrich: EnrichConfig = field(default_factory=EnrichConfig)
    group: GroupConfig = field(default_factory=GroupConfig)
    service: ServiceConfig = field(default_factory=ServiceConfig)

    KNOWN_STAGES = ("ingest", "segment", "align", "enrich", "group")

    def validate(self):
        if not self.work_dir:
            raise ConfigError("work_dir must be set")
        unknown = [s for s in self.stages if s not in self.KNOWN_STAGES]
        if unknown:
            raise ConfigError("unknown stages: %s" % ", ".join(unknown))
        # stages must keep pipeline order
        order = [s for s in self.KNOWN_STAGES if s in self.stages]
        if order != self.stages:
            raise ConfigError("stages must appear in pipeline order %s" % (self.KNOWN_STAGES,))
        for section in (self.segment, self.align, self.annotator,
                        self.enrich, self.group, self.service):
            section.validate()

    # -- store paths -----------------------------------------------------

    def path(self, name: str) -> Path:
        return Path(self.work_dir) / name

    @property
    def books_store(self) -> Path:
        return self.path("books.jsonl")

    @property
    def narrations_store(self) -> Path:
        return self.path("narrations.jsonl")

    @property
    def bundles_store(self) -> Path:
        return self.path("bundles.jsonl")

    @property
    def evaluations_store(self) -> Path:
        return self.path("evaluations.jsonl")

    @property
    def unresolved_store(self) -> Path:
        return self.path("unresolved.jsonl")


def load_config(path: str | Path | None = None, env: dict | None = None) -> PipelineConfig:
    """Build a config from an optional JSON file plus env overrides."""
    env = os.environ if env is None else env
    data = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError("cannot read config %s: %s" % (path, exc)) from exc
        except json.JSONDecodeError as exc:
            raise ConfigError("config %s is not valid JSON: %s" % (path, exc)) from exc
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")

    sections = {
        "normalization": NormalizationProfile,
        "segment": SegmentConfig,
        "align": AlignConfig,
        "annotator": AnnotatorConfig,
        "enrich": EnrichConfig,
        "group": GroupConfig,
        "service": ServiceConfig,
    }
    kwargs = {}
    for key, value in data.items():
        if key in sections:
            if not isinstance(value, dict):
                raise ConfigError("config section %r must be an object" % key)
            if key == "normalization":
                kwargs[key] = NormalizationProfile.from_dict(value)
            else:
                kwargs[key] = _build(sections[key], value, key)
        else:
            kwargs[key] = value
    config = _build(PipelineConfig, kwargs, "config")

    if env.get(ENV_WORK_DIR):
        config.work_dir = env[ENV_WORK_DIR]
    if env.get(ENV_ANNOTATOR_ENDPOINT):
        config.annotator.endpoint = env[ENV_ANNOTATOR_ENDPOINT]
    config.validate()
    return config


def save_config(config: PipelineConfig, path: str | Path) -> None:
    data = dataclasses.asdict(config)
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
