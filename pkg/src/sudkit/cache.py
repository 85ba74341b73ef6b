"""Persistent content-addressed cache for pair scores.

Template sweeps rescore identical premises up to once per template, so
scores are cached on disk keyed by (backend id, premise, hypothesis).

Layout (stable, so implementations in other languages interoperate):

    <root>/<backend_id>/<pp>/<premise_sha256>/<hypothesis_sha256>.json

where ``premise_sha256``/``hypothesis_sha256`` are lowercase hex SHA-256
digests of the UTF-8 text, and ``pp`` is the first two hex chars of the
premise digest. Each file holds one JSON object with keys ``entailment``,
``neutral``, ``contradiction`` and ``entail_logit`` (number or null).
Writes go to a temp file in the destination directory followed by an
atomic rename, so concurrent readers never observe partial files.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path

from .entailment import NliScore


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class ScoreCache:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, backend_id: str, premise: str, hypothesis: str) -> Path:
        p = _digest(premise)
        return self.root / backend_id / p[:2] / p / f"{_digest(hypothesis)}.json"

    def get(self, backend_id: str, premise: str, hypothesis: str) -> NliScore | None:
        path = self._path(backend_id, premise, hypothesis)
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
            return NliScore.from_dict(payload)
        except FileNotFoundError:
            return None
        except (ValueError, KeyError):
            # Corrupt entry: treat as a miss, it will be rewritten.
            return None

    def put(
        self, backend_id: str, premise: str, hypothesis: str, score: NliScore
    ) -> None:
        path = self._path(backend_id, premise, hypothesis)
        path.parent.mkdir(parents=True, exist_ok=True)
        body = json.dumps(score.to_dict(), ensure_ascii=False)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(body)
            os.replace(tmp, path)
        except BaseException:
            try:
                os.unlink(tmp)
            except FileNotFoundError:
                pass
            raise
