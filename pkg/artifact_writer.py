"""
Atomic artifact writes.

Payloads go to a temp file in the target directory, are flushed and
fsynced, swapped into place with os.replace and re-read to check the
SHA-256. Each write returns a receipt dict.
"""

from __future__ import annotations

import errno
import hashlib
import json
import logging
import os
import shutil
import tempfile
import time
from pathlib import Path
from typing import Any, Dict, Optional

from errors import InputError, ReasonCode

logger = logging.getLogger("hdds.artifact")


def sha256_of(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


def verify_artifact(path: Path, expected_hash: Optional[str] = None) -> bool:
    """True when the file exists and, if given, matches the expected hash."""
    path = Path(path)
    if not path.is_file():
        return False
    if expected_hash is None:
        return True
    return sha256_of(path.read_bytes()) == expected_hash


def make_receipt(op: str, path: Path, ok: bool, **details: Any) -> Dict[str, Any]:
    receipt = {"op": op, "path": str(path), "ok": ok, "ts": int(time.time())}
    receipt.update(details)
    return receipt


def write_artifact(path: str | Path, payload: bytes) -> Dict[str, Any]:
    path = Path(path)
    expected = sha256_of(payload)
    tmp_path: Optional[str] = None
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_path = tempfile.mkstemp(dir=str(path.parent), prefix=".hdds-tmp-")
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
            f.flush()
            try:
                os.fsync(f.fileno())
            except OSError:
                pass
        try:
            os.replace(tmp_path, path)
        except OSError as exc:
            if exc.errno != errno.EXDEV:
                raise
            shutil.move(tmp_path, path)
        tmp_path = None
    except OSError as exc:
        if tmp_path and os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise InputError(f"cannot write {path}: {exc}", ReasonCode.WRITE_FAILED) from exc

    if not verify_artifact(path, expected):
        raise InputError(f"verification failed for {path}: hash mismatch", ReasonCode.WRITE_FAILED)

    receipt = make_receipt("write", path, True, bytes=len(payload), sha256=expected)
    logger.info("receipt %s", json.dumps(receipt, sort_keys=True))
    return receipt
