"""Normalize post text into classifier-ready form.

Strips URLs and media links, leading retweet markers, and @mentions;
keeps hashtag words without the '#'; collapses whitespace.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from sklearn.base import BaseEstimator, TransformerMixin

# Order matters for idempotence: '#' stripping may expose a URL or RT
# marker, so it runs first; mention removal runs after RT stripping so
# "RT @user:" is consumed as one marker.
_URL_RE = re.compile(r"(?:https?://\S+|\bt\.co/\S+|\bpic\.twitter\.com/\S+|\bwww\.\S+)")
_RT_RE = re.compile(r"^(?:\s*RT\s*@\w+\s*:)+", re.IGNORECASE)
_MENTION_RE = re.compile(r"@\w+")
_WS_RE = re.compile(r"\s+")


@dataclass(frozen=True)
class NormalizedText:
    """Cleaned text tied back to the post it came from."""

    value: str
    source_id: str


def normalize(text: str) -> str:
    """Clean one raw post text. Total: any str in, possibly empty str out.

    Pure removal plus whitespace collapse, so output length never exceeds
    input length; Unicode content (emoji included) passes through as is.
    """
    text = text.replace("#", "")
    text = _URL_RE.sub(" ", text)
    text = _RT_RE.sub(" ", text)
    text = _MENTION_RE.sub(" ", text)
    return _WS_RE.sub(" ", text).strip()


def normalize_post(post) -> NormalizedText:
    """Normalize an ingested post's display text (text field only)."""
    return NormalizedText(value=normalize(post.text), source_id=post.id)


class TextNormalizer(BaseEstimator, TransformerMixin):
    """Stateless transformer wrapping :func:`normalize` for pipelines."""

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        return [normalize(t) for t in X]
