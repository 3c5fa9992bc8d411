"""Local app knowledge base: build, query with rejection, extend, persist.

The index embeds every app description once and answers queries with the
top-k scored matches, or an explicit no-match outcome when even the best
score sits below the configured threshold. It also generates the
contrastive training corpus (query, positive, negatives) used to fine-tune
a real retrieval model offline.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence

import numpy as np

from .embedding import (
    EmbedderBackend,
    EmbeddingVector,
    embed,
    resolve_backend,
    tokenize,
)
from .errors import (
    ConflictingRecordError,
    DuplicatePackageIdError,
    EmptyDescriptionError,
    EmptyQueryError,
    QuerySourceFailureError,
)

NONE_SENTINEL = "NONE"

SOURCE_PREINSTALLED = "preinstalled"
SOURCE_STORE = "store_installed"


@dataclass(frozen=True)
class AppSeed:
    """Unembedded app metadata, as it appears in catalogs and scenarios."""

    app_name: str
    package_id: str
    description: str

    @classmethod
    def from_dict(cls, data: Mapping) -> "AppSeed":
        return cls(
            app_name=str(data.get("name") or data.get("app_name") or ""),
            package_id=str(data["package_id"]),
            description=str(data["description"]),
        )


@dataclass(frozen=True)
class AppRecord:
    """An indexed app: metadata plus the embedding of its description."""

    app_name: str
    package_id: str
    description: str
    embedding: EmbeddingVector
    installed: bool = True
    source: str = SOURCE_PREINSTALLED


@dataclass(frozen=True)
class AppMatch:
    """One scored retrieval hit."""

    package_id: str
    app_name: str
    description: str
    score: float


@dataclass(frozen=True)
class RetrievalOutcome:
    """Top-k matches, or rejection with the best (sub-threshold) score.

    ``matches`` is empty when no local app clears the threshold;
    ``best_score`` is then the rejected best score, or None on an empty
    index. When matches exist, ``best_score`` equals the top match's score.
    """

    matches: tuple[AppMatch, ...]
    best_score: float | None

    @property
    def found(self) -> bool:
        return bool(self.matches)


class AppIndex:
    """Exhaustive-scan cosine index over app descriptions.

    Supports many concurrent readers; ``register`` requires exclusive
    access (single-writer contract). The threshold is fixed at
    construction.
    """

    def __init__(
        self,
        backend: EmbedderBackend,
        threshold: float,
        records: Iterable[AppRecord] = (),
    ) -> None:
        if not 0.0 < threshold < 1.0:
            raise ValueError(f"threshold must be in (0, 1), got {threshold}")
        self.backend = backend
        self.threshold = float(threshold)
        self._records: dict[str, AppRecord] = {}
        for record in records:
            self._insert(record)
        self._rebuild()

    @classmethod
    def build(
        cls,
        catalog: Iterable[AppSeed | Mapping],
        backend: EmbedderBackend,
        threshold: float = 0.5,
        installed: bool = True,
        source: str = SOURCE_PREINSTALLED,
    ) -> "AppIndex":
        """Embed a catalog of seeds into a fresh index."""
        index = cls(backend, threshold)
        for entry in catalog:
            seed = entry if isinstance(entry, AppSeed) else AppSeed.from_dict(entry)
            if seed.package_id in index._records:
                raise DuplicatePackageIdError(seed.package_id)
            index._insert(index._embed_seed(seed, installed, source))
        index._rebuild()
        return index

    def _embed_seed(self, seed: AppSeed, installed: bool, source: str) -> AppRecord:
        if not seed.package_id:
            raise ValueError("catalog entry has an empty package_id")
        if not seed.description.strip():
            raise EmptyDescriptionError(seed.package_id)
        vector = embed(self.backend, seed.description)
        return AppRecord(
            app_name=seed.app_name,
            package_id=seed.package_id,
            description=seed.description,
            embedding=vector,
            installed=installed,
            source=source,
        )

    def _insert(self, record: AppRecord) -> None:
        if record.embedding.dimension != self.backend.dimension:
            raise ValueError(
                f"record {record.package_id} has dimension "
                f"{record.embedding.dimension}, index uses {self.backend.dimension}"
            )
        self._records[record.package_id] = record

    def _rebuild(self) -> None:
        self._order = sorted(self._records)
        if self._order:
            self._matrix = np.stack(
                [self._records[pid].embedding.values for pid in self._order]
            )
        else:
            self._matrix = np.zeros((0, self.backend.dimension))

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, package_id: str) -> bool:
        return package_id in self._records

    def get(self, package_id: str) -> AppRecord | None:
        return self._records.get(package_id)

    def records(self) -> list[AppRecord]:
        return [self._records[pid] for pid in self._order]

    def retrieve(self, query: str, k: int = 3) -> RetrievalOutcome:
        """Score every record against ``query`` and return the top ``k``.

        Returns a rejection outcome when the best score is below the
        threshold (or the index is empty). Ranking compares scores rounded
        to 9 decimals, so mathematically tied scores fall through to the
        ascending package-id tie-break no matter how the floating-point
        sums were ordered; results are stable across BLAS implementations.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        if not query.strip():
            raise EmptyQueryError("query is empty")
        if not self._order:
            return RetrievalOutcome(matches=(), best_score=None)
        qvec = embed(self.backend, query)
        scores = self._matrix @ qvec.values
        best = float(scores.max())
        if best < self.threshold:
            return RetrievalOutcome(matches=(), best_score=best)
        ranked = sorted(
            range(len(self._order)),
            key=lambda i: (-round(float(scores[i]), 9), self._order[i]),
        )
        matches = tuple(
            AppMatch(
                package_id=self._order[i],
                app_name=self._records[self._order[i]].app_name,
                description=self._records[self._order[i]].description,
                score=float(scores[i]),
            )
            for i in ranked[:k]
        )
        return RetrievalOutcome(matches=matches, best_score=best)

    def register(
        self,
        seed: AppSeed,
        installed: bool = True,
        source: str = SOURCE_STORE,
    ) -> AppRecord:
        """Add a new app; idempotent for an identical record.

        Raises ConflictingRecordError when the package id exists with a
        different description. Never changes scores of existing records.
        """
        existing = self._records.get(seed.package_id)
        if existing is not None:
            if existing.description != seed.description:
                raise ConflictingRecordError(
                    f"{seed.package_id} already indexed with a different description"
                )
            return existing
        record = self._embed_seed(seed, installed, source)
        self._insert(record)
        self._rebuild()
        return record

    # --- persistence ---

    def to_dict(self) -> dict:
        return {
            "backend": self.backend.name,
            "dimension": self.backend.dimension,
            "threshold": self.threshold,
            "apps": [
                {
                    "name": r.app_name,
                    "package_id": r.package_id,
                    "description": r.description,
                    "embedding": r.embedding.to_list(),
                    "installed": r.installed,
                    "source": r.source,
                }
                for r in self.records()
            ],
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path, backend: EmbedderBackend | None = None) -> "AppIndex":
        """Load an index file; resolves the backend by name if not given."""
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if backend is None:
            backend = resolve_backend(data["backend"])
        if backend.dimension != data["dimension"]:
            raise ValueError(
                f"index file has dimension {data['dimension']}, "
                f"backend {backend.name!r} produces {backend.dimension}"
            )
        records = [
            AppRecord(
                app_name=entry["name"],
                package_id=entry["package_id"],
                description=entry["description"],
                embedding=EmbeddingVector(entry["embedding"]),
                installed=bool(entry.get("installed", True)),
                source=entry.get("source", SOURCE_PREINSTALLED),
            )
            for entry in data["apps"]
        ]
        seen: set[str] = set()
        for record in records:
            if record.package_id in seen:
                raise DuplicatePackageIdError(record.package_id)
            seen.add(record.package_id)
        return cls(backend, data["threshold"], records)


# --- training corpus --------------------------------------------------------


@dataclass(frozen=True)
class TrainingExample:
    """One contrastive example: a query, its positive app, sampled negatives."""

    query: str
    positive: str
    negatives: tuple[str, ...]
    is_none_case: bool = False

    def __post_init__(self) -> None:
        if self.is_none_case != (self.positive == NONE_SENTINEL):
            raise ValueError("is_none_case must mirror the NONE sentinel")
        if self.positive in self.negatives:
            raise ValueError("positive appears among negatives")


class QuerySource(Protocol):
    """Produces candidate user queries for corpus generation.

    Production wires a text-generation model here; tests use the keyword
    template source below.
    """

    def queries_for_app(self, seed: AppSeed, count: int) -> Sequence[str]:
        ...

    def none_queries(self, count: int) -> Sequence[str]:
        ...


class KeywordQuerySource:
    """Deterministic template source deriving queries from description tokens."""

    _NONE_TOPICS = (
        "recalibrate the orbital telescope",
        "book a llama grooming session",
        "renew my maritime fishing licence",
        "tune the harpsichord in the attic",
        "schedule volcanic ash removal",
        "translate ancient cuneiform tablets",
        "audit the beekeeping cooperative",
        "reserve a glacier camping permit",
    )

    def queries_for_app(self, seed: AppSeed, count: int) -> list[str]:
        tokens = [t for t in tokenize(seed.description) if len(t) > 2]
        if not tokens:
            tokens = tokenize(seed.app_name) or ["app"]
        queries = []
        for i in range(count):
            start = (2 * i) % len(tokens)
            window = tokens[start : start + 3]
            if len(window) < 3:
                window = (tokens + tokens)[start : start + 3]
            queries.append(" ".join(window))
        return queries

    def none_queries(self, count: int) -> list[str]:
        topics = self._NONE_TOPICS
        return [f"{topics[i % len(topics)]} {i // len(topics) + 1}" for i in range(count)]


def generate_training_corpus(
    catalog: Sequence[AppSeed | Mapping],
    queries_per_app: int,
    none_fraction: float,
    query_source: QuerySource,
    negatives_per_example: int = 3,
    seed: int = 0,
) -> list[TrainingExample]:
    """Emit positives per app plus none-cases at the requested fraction.

    With P positives, the number of none-cases is round(P * f / (1 - f)),
    which keeps the none share of the whole corpus at ``none_fraction``
    within one example.
    """
    seeds = [s if isinstance(s, AppSeed) else AppSeed.from_dict(s) for s in catalog]
    if not seeds:
        raise ValueError("catalog is empty")
    if len(seeds) < 2:
        raise ValueError("corpus generation needs >= 2 apps to sample negatives")
    if queries_per_app < 1:
        raise ValueError("queries_per_app must be >= 1")
    if not 0.0 <= none_fraction < 1.0:
        raise ValueError("none_fraction must be in [0, 1)")

    rng = random.Random(seed)
    package_ids = [s.package_id for s in seeds]
    examples: list[TrainingExample] = []

    for app in seeds:
        try:
            queries = list(query_source.queries_for_app(app, queries_per_app))
        except Exception as exc:
            raise QuerySourceFailureError(str(exc)) from exc
        if len(queries) < queries_per_app:
            raise QuerySourceFailureError(
                f"query source yielded {len(queries)} queries for "
                f"{app.package_id}, wanted {queries_per_app}"
            )
        others = [pid for pid in package_ids if pid != app.package_id]
        for query in queries[:queries_per_app]:
            negatives = rng.sample(others, min(negatives_per_example, len(others)))
            examples.append(
                TrainingExample(
                    query=query,
                    positive=app.package_id,
                    negatives=tuple(negatives),
                )
            )

    positives = len(examples)
    none_count = round(positives * none_fraction / (1.0 - none_fraction))
    if none_count:
        try:
            none_qs = list(query_source.none_queries(none_count))
        except Exception as exc:
            raise QuerySourceFailureError(str(exc)) from exc
        for query in none_qs[:none_count]:
            negatives = rng.sample(
                package_ids, min(negatives_per_example, len(package_ids))
            )
            examples.append(
                TrainingExample(
                    query=query,
                    positive=NONE_SENTINEL,
                    negatives=tuple(negatives),
                    is_none_case=True,
                )
            )
    return examples


def write_corpus(examples: Iterable[TrainingExample], path: str | Path) -> None:
    """Serialize examples as one JSON object per line."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(
                json.dumps(
                    {
                        "query": ex.query,
                        "positive": ex.positive,
                        "negatives": list(ex.negatives),
                        "is_none_case": ex.is_none_case,
                    }
                )
            )
            fh.write("\n")


def load_corpus(path: str | Path) -> list[TrainingExample]:
    examples = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            data = json.loads(line)
            examples.append(
                TrainingExample(
                    query=data["query"],
                    positive=data["positive"],
                    negatives=tuple(data["negatives"]),
                    is_none_case=data["is_none_case"],
                )
            )
    return examples
