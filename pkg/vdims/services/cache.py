"""
On-disk result cache.

One JSON file per (case, degree, space, prime set, conventions version),
named by the sha256 of that key. Writes go through a temporary file and an
atomic rename under a lock.
"""

import hashlib
import json
import logging
import os
import tempfile
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

from pydantic import ValidationError

from vdims import __version__
from vdims.schemas.models import SpaceRecord
from vdims.services.moves import CONVENTIONS_VERSION
from vdims.services.weight_relations import CaseSpec

logger = logging.getLogger(__name__)

_write_lock = threading.Lock()


class ResultCache:
    """Cache of SpaceRecords keyed by content hash."""

    def __init__(self, directory: str | Path, enabled: bool = True):
        self.directory = Path(directory)
        self.enabled = enabled

    @staticmethod
    def key_fields(case: CaseSpec, n: int, space: str, primes: Sequence[int], mode: str | None = None) -> dict:
        return {
            "case": case.label,
            "degree": n,
            "space": space,
            "mode": mode,
            "primes": sorted(int(p) for p in primes),
            "conventions": CONVENTIONS_VERSION,
            "code": __version__,
        }

    def key(self, case: CaseSpec, n: int, space: str, primes: Sequence[int], mode: str | None = None) -> str:
        payload = json.dumps(self.key_fields(case, n, space, primes, mode), sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(
        self,
        case: CaseSpec,
        n: int,
        space: str,
        primes: Sequence[int],
        mode: str | None = None,
    ) -> SpaceRecord | None:
        if not self.enabled:
            return None
        path = self._path(self.key(case, n, space, primes, mode))
        if not path.exists():
            return None
        try:
            entry = json.loads(path.read_text(encoding="utf-8"))
            record = SpaceRecord.model_validate(entry["value"])
        except (OSError, ValueError, KeyError, ValidationError) as e:
            logger.warning(f"Ignoring unreadable cache entry {path.name}: {e}")
            return None
        logger.info(f"Cache hit: {case.label} n={n} {space}")
        return record

    def put(
        self,
        case: CaseSpec,
        n: int,
        space: str,
        primes: Sequence[int],
        record: SpaceRecord,
        mode: str | None = None,
    ) -> None:
        if not self.enabled:
            return
        entry = {
            "key": self.key_fields(case, n, space, primes, mode),
            "value": record.model_dump(mode="json"),
            "timestamp": datetime.now(timezone.utc).isoformat(),
        }
        path = self._path(self.key(case, n, space, primes, mode))
        with _write_lock:
            self.directory.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
            try:
                with os.fdopen(fd, "w", encoding="utf-8") as f:
                    json.dump(entry, f, indent=2, sort_keys=True)
                os.replace(tmp, path)
            except BaseException:
                Path(tmp).unlink(missing_ok=True)
                raise
