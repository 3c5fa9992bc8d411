"""Text embedding backends and the cosine-similarity kernel.

Every retrieval module in the package works on unit-norm vectors produced
here, so similarity is always a plain dot product. Backends are pluggable;
the shipped reference backend is a deterministic signed-hash bag-of-tokens
embedder that needs no model weights.
"""

from __future__ import annotations

import hashlib
import re
from typing import Callable, Protocol, Sequence, runtime_checkable

import numpy as np

from .errors import BackendFailureError, DimensionMismatchError, EmptyTextError

DEFAULT_DIMENSION = 384

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_TERMINAL_PUNCTUATION = ".!?…"


def tokenize(text: str) -> list[str]:
    """Split case-folded text on non-alphanumeric boundaries."""
    return _TOKEN_RE.findall(text.casefold())


def normalize_text(text: str) -> str:
    """Canonical query form: case-fold, collapse whitespace, drop terminal punctuation."""
    collapsed = " ".join(text.casefold().split())
    return collapsed.rstrip(_TERMINAL_PUNCTUATION).rstrip()


class EmbeddingVector:
    """A fixed-dimension, L2-normalized dense vector.

    Instances are immutable; the wrapped array is marked read-only. Use
    :meth:`from_raw` to build one from an unnormalized vector.
    """

    __slots__ = ("_values",)

    def __init__(self, values: Sequence[float] | np.ndarray) -> None:
        array = np.asarray(values, dtype=np.float64)
        if array.ndim != 1 or array.size == 0:
            raise ValueError("embedding must be a non-empty 1-D vector")
        if not np.all(np.isfinite(array)):
            raise ValueError("embedding contains non-finite values")
        norm = float(np.linalg.norm(array))
        if abs(norm - 1.0) > 1e-6:
            raise ValueError(f"embedding is not unit-norm (|v| = {norm!r})")
        array = array.copy()
        array.flags.writeable = False
        self._values = array

    @classmethod
    def from_raw(cls, values: Sequence[float] | np.ndarray) -> "EmbeddingVector":
        """Normalize an arbitrary vector. Raises ValueError on a zero vector."""
        array = np.asarray(values, dtype=np.float64)
        norm = float(np.linalg.norm(array))
        if norm == 0.0 or not np.isfinite(norm):
            raise ValueError("cannot normalize a zero or non-finite vector")
        return cls(array / norm)

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def dimension(self) -> int:
        return int(self._values.shape[0])

    def to_list(self) -> list[float]:
        return [float(x) for x in self._values]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EmbeddingVector):
            return NotImplemented
        return bool(np.array_equal(self._values, other._values))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        head = ", ".join(f"{x:.4f}" for x in self._values[:3])
        return f"EmbeddingVector(dim={self.dimension}, [{head}, ...])"


@runtime_checkable
class EmbedderBackend(Protocol):
    """Interface every embedding backend implements.

    ``encode`` returns a raw (possibly unnormalized) vector of length
    ``dimension``; it must be deterministic for a given input text.
    """

    name: str
    dimension: int

    def encode(self, text: str) -> Sequence[float]:
        ...


class HashedTokenEmbedder:
    """Reference backend: signed-hash bag of tokens, L2-normalized downstream.

    Each token is hashed (blake2b, stable across processes and platforms)
    into one of ``dimension`` buckets with a +/-1 sign, so lexical overlap
    between texts translates directly into cosine similarity.
    """

    def __init__(self, dimension: int = DEFAULT_DIMENSION) -> None:
        if dimension <= 0:
            raise ValueError("dimension must be positive")
        self.dimension = dimension
        self.name = f"hashed-token-{dimension}"

    def encode(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dimension, dtype=np.float64)
        for token in tokenize(text):
            digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
            value = int.from_bytes(digest, "little")
            sign = 1.0 if (value >> 63) & 1 == 0 else -1.0
            vec[value % self.dimension] += sign
        return vec


class HttpEmbedderBackend:
    """Remote embedding endpoint speaking a minimal JSON contract.

    POSTs ``{"text": ...}`` and expects ``{"embedding": [...]}`` back.
    Network or shape failures surface as BackendFailureError via embed().
    """

    def __init__(
        self,
        endpoint: str,
        dimension: int,
        name: str = "http",
        api_key: str | None = None,
        timeout: float = 10.0,
        session=None,
    ) -> None:
        self.endpoint = endpoint
        self.dimension = dimension
        self.name = name
        self._api_key = api_key
        self._timeout = timeout
        if session is None:
            import requests

            session = requests.Session()
        self._session = session

    def encode(self, text: str) -> Sequence[float]:
        headers = {}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        response = self._session.post(
            self.endpoint, json={"text": text}, headers=headers, timeout=self._timeout
        )
        response.raise_for_status()
        return response.json()["embedding"]


def embed(backend: EmbedderBackend, text: str) -> EmbeddingVector:
    """Embed ``text`` with ``backend`` and normalize the result.

    Raises EmptyTextError when the text trims to nothing or embeds to a
    zero vector, and BackendFailureError when the backend raises or
    returns a vector of the wrong shape.
    """
    trimmed = text.strip()
    if not trimmed:
        raise EmptyTextError("cannot embed empty text")
    try:
        raw = np.asarray(backend.encode(trimmed), dtype=np.float64)
    except (EmptyTextError, BackendFailureError):
        raise
    except Exception as exc:
        raise BackendFailureError(f"backend {backend.name!r} failed: {exc}") from exc
    if raw.ndim != 1 or raw.shape[0] != backend.dimension:
        raise BackendFailureError(
            f"backend {backend.name!r} returned shape {raw.shape}, "
            f"expected ({backend.dimension},)"
        )
    try:
        return EmbeddingVector.from_raw(raw)
    except ValueError as exc:
        raise EmptyTextError(f"text {trimmed!r} has no embeddable content") from exc


def cosine_similarity(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Dot product of two unit vectors, clamped to [-1, 1]."""
    if a.dimension != b.dimension:
        raise DimensionMismatchError(
            f"dimension mismatch: {a.dimension} vs {b.dimension}"
        )
    score = float(np.dot(a.values, b.values))
    return min(1.0, max(-1.0, score))


# --- backend registry -----------------------------------------------------

_BACKEND_FACTORIES: dict[str, Callable[[], EmbedderBackend]] = {
    f"hashed-token-{DEFAULT_DIMENSION}": lambda: HashedTokenEmbedder(DEFAULT_DIMENSION),
}


def register_backend(name: str, factory: Callable[[], EmbedderBackend]) -> None:
    _BACKEND_FACTORIES[name] = factory


def resolve_backend(name: str) -> EmbedderBackend:
    """Instantiate a registered backend by name."""
    try:
        factory = _BACKEND_FACTORIES[name]
    except KeyError:
        raise BackendFailureError(f"no registered embedder backend named {name!r}") from None
    return factory()
