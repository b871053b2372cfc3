# Small helpers shared by the config, cache and report layers.

import hashlib
import json
import os
import tempfile
from contextlib import contextmanager

import numpy as np

SIZE_UNITS = ("B", "KB", "MB", "GB", "TB", "PB")


#------------------------------------------------------------------------------
# Return sha256 of a file
#------------------------------------------------------------------------------
def file_digest(filename):
    hash_sha = hashlib.sha256()
    with open(filename, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            hash_sha.update(chunk)
    return hash_sha.hexdigest()


#------------------------------------------------------------------------------
# Canonical JSON text of plain data (numpy scalars/arrays and tuples included)
#------------------------------------------------------------------------------
def to_plain(value):
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_plain(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return value.item()
    if hasattr(value, "value") and hasattr(value, "name"):  # Enum
        return value.value
    return value


def canonical_json(value):
    return json.dumps(to_plain(value), sort_keys=True, separators=(",", ":"))


#------------------------------------------------------------------------------
# Content key of any JSON-able value
#------------------------------------------------------------------------------
def content_key(*parts):
    hash_sha = hashlib.sha256()
    for part in parts:
        hash_sha.update(canonical_json(part).encode("utf8"))
        hash_sha.update(b"\x00")
    return hash_sha.hexdigest()


#------------------------------------------------------------------------------
# Write a file atomically: temp file in the same directory, then rename
#------------------------------------------------------------------------------
@contextmanager
def atomic_open(path, mode="wb"):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, mode) as f:
            yield f
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def atomic_write_text(path, text):
    with atomic_open(path, "w") as f:
        f.write(text)


#------------------------------------------------------------------------------
# Readable byte counts for log lines
#------------------------------------------------------------------------------
def humansize(nbytes):
    """1536 -> '1.5 KB'; PB is the largest unit."""
    size = float(nbytes)
    for unit in SIZE_UNITS[:-1]:
        if size < 1024:
            break
        size /= 1024
    else:
        unit = SIZE_UNITS[-1]
    return f"{size:.2f}".rstrip("0").rstrip(".") + f" {unit}"


#------------------------------------------------------------------------------
# convert from config value to typed value
#------------------------------------------------------------------------------
def from_config(type, value):
    if type == 'bool':
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in ("true", "1", "yes"):
            return True
        if isinstance(value, str) and value.lower() in ("false", "0", "no"):
            return False
        raise ValueError(f"expected a boolean, got {value!r}")
    elif type == 'int':
        if isinstance(value, bool) or float(value) != int(float(value)):
            raise ValueError(f"expected an integer, got {value!r}")
        return int(float(value))
    elif type == 'numeric':
        if isinstance(value, bool):
            raise ValueError(f"expected a number, got {value!r}")
        return float(value)
    elif type == 'string':
        if not isinstance(value, str):
            raise ValueError(f"expected a string, got {value!r}")
        return value
    elif type == 'list':
        if isinstance(value, str):
            value = json.loads(value)
        if not isinstance(value, (list, tuple)):
            raise ValueError(f"expected a list, got {value!r}")
        return list(value)
    elif type == 'mapping':
        if isinstance(value, str):
            value = json.loads(value)
        if not isinstance(value, dict):
            raise ValueError(f"expected a mapping, got {value!r}")
        return dict(value)
    else:
        return value
