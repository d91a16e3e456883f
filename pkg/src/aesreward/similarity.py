"""Text-similarity primitives: embeddings, cosine, and ROUGE-L.

Vectors are plain sequences of floats; no numerics library is needed at these
sizes and pure Python keeps batch outputs byte-deterministic.

Embedding providers share one contract: ``embed(texts)`` returns one vector
per text, all of a common dimension, and equal texts always get bit-equal
vectors within a provider's lifetime.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
import urllib.error
import urllib.request
from pathlib import Path
from typing import Sequence

from .errors import EmbeddingMissError, EmbeddingUnavailableError, EmptyPoolError, ZeroNormError

Vector = Sequence[float]

_TOKEN_RE = re.compile(r"\w+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lower-cased word tokens, split on whitespace and punctuation."""
    return _TOKEN_RE.findall(text.lower())


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    """Longest-common-subsequence length via bottom-up tabulation."""
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            if x == y:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: str, reference: str) -> float:
    """LCS-based F1 over word tokens, in [0, 1].

    By convention an empty text scores 0 against any nonempty text and 1
    against another empty text.
    """
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand and not ref:
        return 1.0
    if not cand or not ref:
        return 0.0
    lcs = lcs_length(cand, ref)
    if lcs == 0:
        return 0.0
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    return 2.0 * precision * recall / (precision + recall)


def norm(v: Vector) -> float:
    return math.sqrt(math.fsum(x * x for x in v))


def cosine(a: Vector, b: Vector) -> float:
    """Standard cosine similarity; raises ``ZeroNormError`` on zero-norm input.

    The result is clamped into [-1, 1] to absorb floating-point overshoot.
    """
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")
    na, nb = norm(a), norm(b)
    if na == 0.0 or nb == 0.0:
        raise ZeroNormError("cosine is undefined for zero-norm vectors")
    dot = math.fsum(x * y for x, y in zip(a, b))
    return max(-1.0, min(1.0, dot / (na * nb)))


def mean_vector(vs: Sequence[Vector]) -> list[float]:
    """Coordinate-wise arithmetic mean; raises ``EmptyPoolError`` on []."""
    if not vs:
        raise EmptyPoolError("cannot average an empty list of vectors")
    dim = len(vs[0])
    for v in vs[1:]:
        if len(v) != dim:
            raise ValueError(f"dimension mismatch: {len(v)} vs {dim}")
    n = len(vs)
    return [math.fsum(v[k] for v in vs) / n for k in range(dim)]


class EmbeddingProvider:
    """Deterministic text -> vector mapping."""

    dim: int

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        raise NotImplementedError


class FallbackEmbedder(EmbeddingProvider):
    """Hashed bag-of-tokens embedding: dependency-free and fully deterministic.

    Each lower-cased token is bucketed by a SHA-256-derived index; the count
    vector is L2-normalized.  Texts with no tokens map to the zero vector,
    which downstream cosine calls reject as ``ZERO_NORM``.
    """

    def __init__(self, dim: int = 256):
        self.dim = dim
        self._bucket_cache: dict[str, int] = {}

    def _bucket(self, token: str) -> int:
        idx = self._bucket_cache.get(token)
        if idx is None:
            digest = hashlib.sha256(token.encode("utf-8")).digest()
            idx = int.from_bytes(digest[:8], "big") % self.dim
            self._bucket_cache[token] = idx
        return idx

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        out = []
        for text in texts:
            counts = [0.0] * self.dim
            for token in tokenize(text):
                counts[self._bucket(token)] += 1.0
            n = norm(counts)
            if n > 0.0:
                counts = [c / n for c in counts]
            out.append(counts)
        return out


def text_key(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class StoreEmbedder(EmbeddingProvider):
    """Read-only store of precomputed vectors keyed by text SHA-256.

    The store file is JSONL of ``{"text_sha256": hex, "vector": [floats]}``.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._vectors: dict[str, list[float]] = {}
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                self._vectors[obj["text_sha256"]] = [float(x) for x in obj["vector"]]
        if not self._vectors:
            raise EmbeddingMissError(f"embedding store {self.path} is empty")
        self.dim = len(next(iter(self._vectors.values())))

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        out = []
        for text in texts:
            key = text_key(text)
            vec = self._vectors.get(key)
            if vec is None:
                raise EmbeddingMissError(
                    f"no stored vector for text with sha256 {key[:12]}..."
                )
            out.append(list(vec))
        return out


class RemoteEmbedder(EmbeddingProvider):
    """HTTP embedding service client: ``POST <base>/embed {"texts": [...]}``.

    Responses are cached per text so repeated calls within a run are
    deterministic even if the service is not.
    """

    def __init__(self, base_url: str, timeout: float = 30.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.dim = 0
        self._cache: dict[str, list[float]] = {}

    def embed(self, texts: Sequence[str]) -> list[list[float]]:
        missing = [t for t in texts if t not in self._cache]
        if missing:
            body = json.dumps({"texts": missing}).encode("utf-8")
            request = urllib.request.Request(
                self.base_url + "/embed",
                data=body,
                headers={"Content-Type": "application/json"},
            )
            try:
                with urllib.request.urlopen(request, timeout=self.timeout) as resp:
                    payload = json.loads(resp.read().decode("utf-8"))
                vectors = payload["vectors"]
            except (urllib.error.URLError, OSError, ValueError, KeyError) as exc:
                raise EmbeddingUnavailableError(
                    f"embedding service at {self.base_url} failed: {exc}"
                ) from exc
            if len(vectors) != len(missing):
                raise EmbeddingUnavailableError(
                    f"embedding service returned {len(vectors)} vectors "
                    f"for {len(missing)} texts"
                )
            for text, vec in zip(missing, vectors):
                self._cache[text] = [float(x) for x in vec]
        out = [list(self._cache[t]) for t in texts]
        if out and not self.dim:
            self.dim = len(out[0])
        return out


def provider_from_spec(spec: str) -> EmbeddingProvider:
    """Build a provider from a config string.

    Accepted forms: ``"fallback"``, ``"store:<path>"``, ``"http(s)://..."``,
    or a bare path to a store file.
    """
    if spec == "fallback":
        return FallbackEmbedder()
    if spec.startswith("store:"):
        return StoreEmbedder(spec[len("store:"):])
    if spec.startswith(("http://", "https://")):
        return RemoteEmbedder(spec)
    return StoreEmbedder(spec)


def embed(provider: EmbeddingProvider, texts: Sequence[str]) -> list[list[float]]:
    """One vector per text, common dimension; see provider classes for errors."""
    if not texts:
        raise ValueError("texts must be nonempty")
    vectors = provider.embed(texts)
    dims = {len(v) for v in vectors}
    if len(dims) != 1:
        raise ValueError(f"provider returned mixed dimensions: {sorted(dims)}")
    return vectors
