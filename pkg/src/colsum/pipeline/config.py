"""Run configuration: loading, path resolution, validation.

Config files are TOML or JSON, picked by extension. Every stage that
draws random numbers must have its seed written in the file; defaults
exist only for the non-random knobs. API keys never appear in a config,
only the names of environment variables that hold them.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from ..cluster import PROJECTION_METHODS, SELECTION_MODES
from ..embed_index import METRICS
from ..errors import ConfigError
from ..sentiment import WEIGHTINGS
from ..summarize import CompletionParams

CORPUS_FORMATS = ("jsonl", "csv", "plain-dir")
EMBEDDING_BACKENDS = ("local", "remote")
COMPLETION_BACKENDS = ("stub", "remote")

# Key names that look like inline credentials; configs must use *_env names.
_SECRET_KEYS = {"api_key", "apikey", "secret", "token", "password", "bearer"}


@dataclass(frozen=True)
class CorpusSettings:
    source: str
    format: str = "jsonl"


@dataclass(frozen=True)
class QuerySettings:
    text: str
    u: int = 10
    max_tokens: int = 512
    metric: str = "cosine"


@dataclass(frozen=True)
class EmbeddingSettings:
    backend: str = "local"
    dim: int = 64
    seed: int = 0
    endpoint: str = ""
    model: str = ""
    api_key_env: str = "EMBEDDING_API_KEY"
    batch_size: int = 64
    max_concurrency: int = 1
    timeout: float = 30.0


@dataclass(frozen=True)
class ProjectionSettings:
    method: str = "pca"
    dim: int = 5
    seed: int = 0


@dataclass(frozen=True)
class ClusteringSettings:
    min_cluster_size: int = 5
    min_samples: Optional[int] = None
    selection: str = "excess-of-mass"
    k: Optional[int] = None


@dataclass(frozen=True)
class LdaSettings:
    n_topics: int = 10
    alpha: Optional[float] = None
    beta: float = 0.01
    iterations: int = 150
    seed: int = 0


@dataclass(frozen=True)
class TermSetSettings:
    t: int = 10
    epsilon: Optional[float] = None
    freq_threshold: int = 2
    synonym_lexicon: Optional[str] = None


@dataclass(frozen=True)
class ChunkerSettings:
    token_limit: int = 3000
    invert_activation: bool = False


@dataclass(frozen=True)
class CompletionSettings:
    backend: str = "stub"
    endpoint: str = ""
    api_key_env: str = "COMPLETION_API_KEY"
    context_window: int = 4096
    timeout: float = 60.0
    max_concurrency: int = 1
    params: CompletionParams = field(default_factory=CompletionParams)


@dataclass(frozen=True)
class SentimentSettings:
    lexicon: Optional[str] = None
    weights: str = "uniform"


@dataclass(frozen=True)
class PipelineConfig:
    corpus: CorpusSettings
    output_dir: str
    query: Optional[QuerySettings] = None
    embedding: EmbeddingSettings = field(default_factory=EmbeddingSettings)
    projection: ProjectionSettings = field(default_factory=ProjectionSettings)
    clustering: ClusteringSettings = field(default_factory=ClusteringSettings)
    lda: LdaSettings = field(default_factory=LdaSettings)
    term_set: TermSetSettings = field(default_factory=TermSetSettings)
    chunker: ChunkerSettings = field(default_factory=ChunkerSettings)
    completion: CompletionSettings = field(default_factory=CompletionSettings)
    sentiment: SentimentSettings = field(default_factory=SentimentSettings)


def _check_no_secrets(data: Any, trail: str = "") -> None:
    if isinstance(data, dict):
        for key, value in data.items():
            where = f"{trail}.{key}" if trail else key
            if key.lower() in _SECRET_KEYS:
                raise ConfigError(
                    f"{where}: credentials may not be stored in config files; "
                    "set an environment variable and point the *_env field at it"
                )
            _check_no_secrets(value, where)
    elif isinstance(data, list):
        for item in data:
            _check_no_secrets(item, trail)


def _take(table: dict, section: str, cls, path_fields: tuple[str, ...] = (), base: Path | None = None):
    """Build a settings dataclass from one config table, rejecting typos."""
    allowed = {f.name for f in dataclasses.fields(cls)}
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"[{section}] unknown keys: {', '.join(sorted(unknown))}")
    values = dict(table)
    for name in path_fields:
        if values.get(name) and base is not None:
            values[name] = str((base / str(values[name])).resolve())
    try:
        return cls(**values)
    except TypeError as exc:
        raise ConfigError(f"[{section}]: {exc}") from exc


def _require_seeds(raw: dict, config: PipelineConfig) -> None:
    """Every stage that draws random numbers must state its seed in the file."""
    missing = []
    if config.embedding.backend == "local" and "seed" not in raw.get("embedding", {}):
        missing.append("embedding.seed")
    if "seed" not in raw.get("projection", {}):
        missing.append("projection.seed")
    if "seed" not in raw.get("lda", {}):
        missing.append("lda.seed")
    if missing:
        raise ConfigError(
            "seeds must be explicit in the config file, missing: " + ", ".join(missing)
        )


def config_from_dict(raw: dict, base_dir: str | Path = ".") -> PipelineConfig:
    """Build and validate a PipelineConfig from a parsed mapping.

    Relative paths are resolved against ``base_dir`` (the config file's
    directory when loaded from disk).
    """
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a table/object")
    _check_no_secrets(raw)
    base = Path(base_dir)

    known_sections = {
        "corpus", "output_dir", "query", "embedding", "projection",
        "clustering", "lda", "term_set", "chunker", "completion", "sentiment",
    }
    unknown = set(raw) - known_sections
    if unknown:
        raise ConfigError(f"unknown config sections: {', '.join(sorted(unknown))}")

    if "corpus" not in raw:
        raise ConfigError("missing [corpus] section")
    if "output_dir" not in raw or not str(raw["output_dir"]).strip():
        raise ConfigError("output_dir is required")

    corpus = _take(raw["corpus"], "corpus", CorpusSettings, ("source",), base)
    query = None
    if "query" in raw:
        query = _take(raw["query"], "query", QuerySettings)

    completion_table = dict(raw.get("completion", {}))
    params_table = completion_table.pop("params", {})
    if not isinstance(params_table, dict):
        raise ConfigError("[completion.params] must be a table")
    try:
        params = CompletionParams(**params_table)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[completion.params]: {exc}") from exc
    completion_table["params"] = params

    config = PipelineConfig(
        corpus=corpus,
        output_dir=str((base / str(raw["output_dir"])).resolve()),
        query=query,
        embedding=_take(raw.get("embedding", {}), "embedding", EmbeddingSettings),
        projection=_take(raw.get("projection", {}), "projection", ProjectionSettings),
        clustering=_take(raw.get("clustering", {}), "clustering", ClusteringSettings),
        lda=_take(raw.get("lda", {}), "lda", LdaSettings),
        term_set=_take(
            raw.get("term_set", {}), "term_set", TermSetSettings, ("synonym_lexicon",), base
        ),
        chunker=_take(raw.get("chunker", {}), "chunker", ChunkerSettings),
        completion=_take(completion_table, "completion", CompletionSettings),
        sentiment=_take(
            raw.get("sentiment", {}), "sentiment", SentimentSettings, ("lexicon",), base
        ),
    )
    _require_seeds(raw, config)
    validate_config(config)
    return config


def load_config(path: str | Path) -> PipelineConfig:
    """Load a TOML or JSON config file, picked by extension."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file does not exist: {path}")
    suffix = path.suffix.lower()
    text = path.read_text(encoding="utf-8")
    if suffix == ".toml":
        try:
            raw = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    elif suffix == ".json":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    else:
        raise ConfigError(f"config must be .toml or .json, got {path.suffix!r}")
    return config_from_dict(raw, base_dir=path.parent)


def validate_config(config: PipelineConfig) -> None:
    """Reject invalid settings before any stage runs."""
    def bad(message: str) -> ConfigError:
        return ConfigError(message)

    if config.corpus.format not in CORPUS_FORMATS:
        raise bad(f"corpus.format must be one of {CORPUS_FORMATS}")
    if not config.corpus.source:
        raise bad("corpus.source is required")

    if config.query is not None:
        if not config.query.text.strip():
            raise bad("query.text must be non-empty")
        if config.query.u < 1:
            raise bad("query.u must be >= 1")
        if config.query.max_tokens < 1:
            raise bad("query.max_tokens must be >= 1")
        if config.query.metric not in METRICS:
            raise bad(f"query.metric must be one of {METRICS}")

    emb = config.embedding
    if emb.backend not in EMBEDDING_BACKENDS:
        raise bad(f"embedding.backend must be one of {EMBEDDING_BACKENDS}")
    if emb.backend == "remote" and not emb.endpoint:
        raise bad("embedding.endpoint is required for the remote backend")
    if emb.dim < 1:
        raise bad("embedding.dim must be >= 1")
    if emb.batch_size < 1 or emb.max_concurrency < 1:
        raise bad("embedding.batch_size and max_concurrency must be >= 1")

    if config.projection.method not in PROJECTION_METHODS:
        raise bad(f"projection.method must be one of {PROJECTION_METHODS}")
    if config.projection.dim < 1:
        raise bad("projection.dim must be >= 1")

    clu = config.clustering
    if clu.min_cluster_size < 2:
        raise bad("clustering.min_cluster_size must be >= 2")
    if clu.min_samples is not None and clu.min_samples < 1:
        raise bad("clustering.min_samples must be >= 1")
    if clu.selection not in SELECTION_MODES:
        raise bad(f"clustering.selection must be one of {SELECTION_MODES}")
    if clu.selection == "top-k" and (clu.k is None or clu.k < 1):
        raise bad("clustering.k must be >= 1 when selection is top-k")
    if clu.selection != "top-k" and clu.k is not None:
        raise bad("clustering.k is only valid with selection = top-k")

    lda = config.lda
    if lda.n_topics < 1:
        raise bad("lda.n_topics must be >= 1")
    if lda.alpha is not None and lda.alpha <= 0:
        raise bad("lda.alpha must be > 0")
    if lda.beta <= 0:
        raise bad("lda.beta must be > 0")
    if lda.iterations < 1:
        raise bad("lda.iterations must be >= 1")

    ts = config.term_set
    if ts.t < 1:
        raise bad("term_set.t must be >= 1")
    if ts.freq_threshold < 1:
        raise bad("term_set.freq_threshold must be >= 1")
    if ts.epsilon is not None and ts.epsilon < 0:
        raise bad("term_set.epsilon must be >= 0")

    if config.chunker.token_limit < 1:
        raise bad("chunker.token_limit must be >= 1")

    comp = config.completion
    if comp.backend not in COMPLETION_BACKENDS:
        raise bad(f"completion.backend must be one of {COMPLETION_BACKENDS}")
    if comp.backend == "remote" and not comp.endpoint:
        raise bad("completion.endpoint is required for the remote backend")
    if comp.context_window < 1:
        raise bad("completion.context_window must be >= 1")
    if comp.max_concurrency < 1:
        raise bad("completion.max_concurrency must be >= 1")

    if config.sentiment.weights not in WEIGHTINGS:
        raise bad(f"sentiment.weights must be one of {WEIGHTINGS}")


def config_snapshot(config: PipelineConfig) -> dict:
    """Plain-dict form of the config, suitable for the run manifest."""
    return dataclasses.asdict(config)
