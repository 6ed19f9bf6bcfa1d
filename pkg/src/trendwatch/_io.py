"""Canonical JSON and atomic file writes shared by every persisted artifact."""

import json
import os
import tempfile
from pathlib import Path


def dumps(obj) -> str:
    # sorted keys + fixed separators: equal objects give equal bytes
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, indent=1) + "\n"


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> None:
    atomic_write_text(path, dumps(obj))


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
