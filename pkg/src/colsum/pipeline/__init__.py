"""Pipeline orchestration: config, staged execution, export, CLI."""

from .config import (
    ChunkerSettings,
    ClusteringSettings,
    CompletionSettings,
    CorpusSettings,
    EmbeddingSettings,
    LdaSettings,
    PipelineConfig,
    ProjectionSettings,
    QuerySettings,
    SentimentSettings,
    TermSetSettings,
    load_config,
    validate_config,
)
from .export import build_collection_index, build_topic_document, validate_viz_document
from .stages import RunManifest, run_pipeline, run_single_stage

__all__ = [
    "ChunkerSettings",
    "ClusteringSettings",
    "CompletionSettings",
    "CorpusSettings",
    "EmbeddingSettings",
    "LdaSettings",
    "PipelineConfig",
    "ProjectionSettings",
    "QuerySettings",
    "RunManifest",
    "SentimentSettings",
    "TermSetSettings",
    "build_collection_index",
    "build_topic_document",
    "load_config",
    "run_pipeline",
    "run_single_stage",
    "validate_config",
]
