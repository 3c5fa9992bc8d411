"""Retrieval-augmented automation agent for a simulated mobile device.

The package wires three retrieval surfaces around an agent state machine:
a local app index with threshold rejection, an external web-knowledge
fetcher, and an experience memory that replays past successes. A
deterministic device simulator and a five-metric benchmark harness make
every run reproducible end to end.
"""

from .agent import AgentConfig, TaskRun, run_task, select_and_open_app
from .app_index import (
    AppIndex,
    AppMatch,
    AppRecord,
    AppSeed,
    RetrievalOutcome,
    TrainingExample,
    generate_training_corpus,
)
from .bench import (
    BenchmarkTask,
    BenchStats,
    Pack,
    load_benchmark,
    load_pack,
    run_benchmark,
    validate_pack,
)
from .embedding import (
    EmbedderBackend,
    EmbeddingVector,
    HashedTokenEmbedder,
    cosine_similarity,
    embed,
    resolve_backend,
)
from .metrics import GroundTruth, MetricsReport, compute_metrics
from .planning import (
    EffectReflector,
    HttpChatPlanner,
    Planner,
    PlannerContext,
    PlannerDecision,
    ReflectionVerdict,
    Reflector,
    ScriptedPlanner,
)
from .simulator import Action, ActionStep, ActionTrace, Device, Scenario, ScreenState, UiElement
from .task_memory import MemoryMatch, MemoryRecord, MemoryStore, ReplayOutcome, replay
from .web_search import (
    FixtureSearchBackend,
    HttpSearchBackend,
    KnowledgeContext,
    SearchBackend,
    SearchQuery,
    SearchResult,
    formulate_query,
    search,
)

__version__ = "0.1.0"

__all__ = [
    "Action",
    "ActionStep",
    "ActionTrace",
    "AgentConfig",
    "AppIndex",
    "AppMatch",
    "AppRecord",
    "AppSeed",
    "BenchStats",
    "BenchmarkTask",
    "Device",
    "EffectReflector",
    "EmbedderBackend",
    "EmbeddingVector",
    "FixtureSearchBackend",
    "GroundTruth",
    "HashedTokenEmbedder",
    "HttpChatPlanner",
    "HttpSearchBackend",
    "KnowledgeContext",
    "MemoryMatch",
    "MemoryRecord",
    "MemoryStore",
    "MetricsReport",
    "Pack",
    "Planner",
    "PlannerContext",
    "PlannerDecision",
    "ReflectionVerdict",
    "Reflector",
    "ReplayOutcome",
    "RetrievalOutcome",
    "Scenario",
    "ScreenState",
    "ScriptedPlanner",
    "SearchBackend",
    "SearchQuery",
    "SearchResult",
    "TaskRun",
    "TrainingExample",
    "UiElement",
    "compute_metrics",
    "cosine_similarity",
    "embed",
    "formulate_query",
    "generate_training_corpus",
    "load_benchmark",
    "load_pack",
    "replay",
    "resolve_backend",
    "run_benchmark",
    "run_task",
    "search",
    "select_and_open_app",
    "validate_pack",
]
