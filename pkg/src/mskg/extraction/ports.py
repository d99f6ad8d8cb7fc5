"""Classifier ports: external HTTP service, lexical fallback, chaining.

Wire contract for the external service: POST a JSON object
{"text": ..., "labels": [...]} and receive {"scores": [...]} aligned to
the labels. Any transport failure, malformed payload, or out-of-range
score surfaces as ClassifierUnavailable after the configured retries.
"""

from __future__ import annotations

import json
import urllib.error
import urllib.request
from typing import Mapping, Optional, Protocol, Sequence

from ..errors import ClassifierUnavailable
from .lexicon import stemmed_token_set, term_variants


class ClassifierPort(Protocol):
    def score(self, text: str, labels: Sequence[str]) -> list[float]:
        """One score in [0, 1] per label, aligned to the input order."""
        ...


class HttpClassifier:
    def __init__(self, url: str, timeout: float = 5.0, max_retries: int = 2):
        self.url = url
        self.timeout = timeout
        self.max_retries = max_retries

    def score(self, text: str, labels: Sequence[str]) -> list[float]:
        payload = json.dumps({"text": text, "labels": list(labels)}).encode("utf-8")
        last_error: Optional[Exception] = None
        for _ in range(self.max_retries + 1):
            request = urllib.request.Request(
                self.url, data=payload, headers={"Content-Type": "application/json"}
            )
            try:
                with urllib.request.urlopen(request, timeout=self.timeout) as resp:
                    body = json.loads(resp.read().decode("utf-8"))
                return self._validate(body, len(labels))
            except (urllib.error.URLError, OSError, ValueError) as exc:
                last_error = exc
        raise ClassifierUnavailable(f"classifier at {self.url} failed: {last_error}")

    @staticmethod
    def _validate(body, n_labels: int) -> list[float]:
        scores = body.get("scores") if isinstance(body, dict) else None
        if not isinstance(scores, list) or len(scores) != n_labels:
            raise ValueError(f"malformed classifier response: {body!r}")
        out = []
        for s in scores:
            value = float(s)
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"classifier score {value} outside [0, 1]")
            out.append(value)
        return out


class LexicalClassifier:
    """Deterministic fallback: max over label aliases of the Jaccard
    similarity between stemmed token sets of text and alias."""

    def __init__(self, alias_map: Optional[Mapping[str, set[str]]] = None):
        self.alias_map = dict(alias_map) if alias_map else {}

    def _aliases(self, label: str) -> set[str]:
        return self.alias_map.get(label) or term_variants(label)

    def score(self, text: str, labels: Sequence[str]) -> list[float]:
        text_tokens = stemmed_token_set(text)
        out = []
        for label in labels:
            best = 0.0
            for alias in sorted(self._aliases(label)):
                alias_tokens = stemmed_token_set(alias)
                union = text_tokens | alias_tokens
                if not union:
                    continue
                best = max(best, len(text_tokens & alias_tokens) / len(union))
            out.append(best)
        return out


class ChainClassifier:
    """Try the primary port; on ClassifierUnavailable use the fallback."""

    def __init__(self, primary: ClassifierPort, fallback: ClassifierPort):
        self.primary = primary
        self.fallback = fallback

    def score(self, text: str, labels: Sequence[str]) -> list[float]:
        try:
            return self.primary.score(text, labels)
        except ClassifierUnavailable:
            return self.fallback.score(text, labels)
