"""Embedding and title providers.

Model inference is external to this toolkit. When ``RECAPIT_EMBED_URL`` /
``RECAPIT_TITLE_URL`` are set, chunks are sent to those HTTP endpoints
(JSON bodies, optional bearer key from ``RECAPIT_API_KEY``). Without
configuration, deterministic offline fallbacks are used so the whole
pipeline runs with zero network:

* embeddings: case-folded tokens hashed into 256 buckets, L2-normalized
* titles: top-3 TF-IDF terms of the segment against the segment corpus
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import re
import urllib.request
from collections import Counter
from typing import Optional, Sequence

import numpy as np

from .errors import ProviderError

EMBED_URL_VAR = "RECAPIT_EMBED_URL"
TITLE_URL_VAR = "RECAPIT_TITLE_URL"
API_KEY_VAR = "RECAPIT_API_KEY"

HASH_BUCKETS = 256
MAX_TITLE_WORDS = 12

_TOKEN = re.compile(r"[a-z0-9']+")


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


# ---------------------------------------------------------------------------
# Embeddings
# ---------------------------------------------------------------------------

class HashedBagOfWordsEmbedder:
    """Deterministic offline embedding: hashed token counts, unit L2 norm."""

    dimension = HASH_BUCKETS

    @staticmethod
    def _bucket(token: str) -> int:
        digest = hashlib.sha1(token.encode("utf-8")).digest()
        return int.from_bytes(digest[:4], "big") % HASH_BUCKETS

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        out = []
        for text in texts:
            vec = np.zeros(HASH_BUCKETS)
            for token in tokenize(text):
                vec[self._bucket(token)] += 1.0
            norm = float(np.linalg.norm(vec))
            if norm > 0:
                vec /= norm
            out.append(vec)
        return out


class HttpEmbeddingProvider:
    """POSTs {"texts": [...]} and expects {"embeddings": [[...], ...]}."""

    def __init__(self, url: str, api_key: Optional[str] = None, timeout: float = 30.0):
        self.url = url
        self.api_key = api_key
        self.timeout = timeout

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        body = json.dumps({"texts": list(texts)}).encode("utf-8")
        req = urllib.request.Request(self.url, data=body,
                                     headers=_headers(self.api_key), method="POST")
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except Exception as e:
            raise ProviderError(f"embedding provider failed: {e}")
        vectors = payload.get("embeddings")
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            raise ProviderError("embedding provider returned a malformed payload")
        return [np.asarray(v, dtype=float) for v in vectors]


class FileEmbeddingProvider:
    """Precomputed embeddings from a line-delimited file ``chunk_id,v1,v2,...``.

    Lookup is by chunk id, so callers must pass ids via ``embed_by_id``.
    """

    def __init__(self, path):
        self.vectors: dict[str, np.ndarray] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                cols = line.split(",")
                if len(cols) < 2:
                    raise ProviderError(f"embeddings file line {lineno}: too few columns")
                try:
                    self.vectors[cols[0]] = np.asarray([float(c) for c in cols[1:]])
                except ValueError:
                    raise ProviderError(f"embeddings file line {lineno}: bad component")

    def embed_by_id(self, chunk_ids: Sequence[str]) -> list[np.ndarray]:
        missing = [c for c in chunk_ids if c not in self.vectors]
        if missing:
            raise ProviderError(f"no embedding for chunk id(s): {', '.join(missing)}")
        return [self.vectors[c] for c in chunk_ids]


# ---------------------------------------------------------------------------
# Titles
# ---------------------------------------------------------------------------

class TfidfTitleProvider:
    """Offline titles: top-3 TF-IDF terms per segment, title-cased.

    IDF is computed over all segments' dialogue texts. When no token scores
    positive (e.g. a single-segment corpus), the most frequent tokens are
    used instead so a title always exists.
    """

    def titles(self, segment_texts: Sequence[str]) -> list[str]:
        docs = [tokenize(t) for t in segment_texts]
        n_docs = len(docs)
        df: Counter = Counter()
        for tokens in docs:
            df.update(set(tokens))
        out = []
        for tokens in docs:
            if not tokens:
                out.append("Untitled Segment")
                continue
            tf = Counter(tokens)
            scored = [(tf[tok] * math.log(n_docs / df[tok]), tok) for tok in tf]
            positive = [(s, tok) for s, tok in scored if s > 0]
            if positive:
                ranked = sorted(positive, key=lambda st: (-st[0], st[1]))
            else:
                ranked = sorted(((tf[tok], tok) for tok in tf),
                                key=lambda st: (-st[0], st[1]))
            top = [tok for _, tok in ranked[:3]]
            out.append(" · ".join(t.title() for t in top))
        return out


class HttpTitleProvider:
    """POSTs {"text": ...} per segment and expects {"title": ...}."""

    def __init__(self, url: str, api_key: Optional[str] = None, timeout: float = 30.0):
        self.url = url
        self.api_key = api_key
        self.timeout = timeout

    def titles(self, segment_texts: Sequence[str]) -> list[str]:
        out = []
        for text in segment_texts:
            body = json.dumps({"text": text}).encode("utf-8")
            req = urllib.request.Request(self.url, data=body,
                                         headers=_headers(self.api_key), method="POST")
            try:
                with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                    payload = json.loads(resp.read().decode("utf-8"))
            except Exception as e:
                raise ProviderError(f"title provider failed: {e}")
            title = payload.get("title")
            if not isinstance(title, str) or not title.strip():
                raise ProviderError("title provider returned a malformed payload")
            words = title.strip().split()
            out.append(" ".join(words[:MAX_TITLE_WORDS]))
        return out


def _headers(api_key: Optional[str]) -> dict:
    headers = {"Content-Type": "application/json"}
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    return headers


# ---------------------------------------------------------------------------
# Environment-based selection
# ---------------------------------------------------------------------------

def embedding_provider_from_env(env=os.environ):
    url = env.get(EMBED_URL_VAR)
    if url:
        return HttpEmbeddingProvider(url, env.get(API_KEY_VAR))
    return HashedBagOfWordsEmbedder()


def title_provider_from_env(env=os.environ):
    url = env.get(TITLE_URL_VAR)
    if url:
        return HttpTitleProvider(url, env.get(API_KEY_VAR))
    return TfidfTitleProvider()
