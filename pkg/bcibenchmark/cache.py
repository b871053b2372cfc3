"""Binary stage caches.

Layout::

    b"BCIB" | version (1 byte) | header length (>I) | JSON header
    | { compressed length (>I) | quicklz block } ... | byte sum (>H)

The payload is one float64 array, row-major little-endian, cut into
BLOCK_SIZE chunks before compression. The trailing checksum is the sum of
the uncompressed payload bytes modulo 2**16.
"""
from __future__ import annotations

import json
import logging
import os
import struct

import numpy as np
import quicklz

from . import Utils
from .errors import CacheVersionError
from .features import FeatureDescriptor, FeatureMatrix
from .signals import Trial

logger = logging.getLogger(__name__)

MAGIC = b"BCIB"
CACHE_VERSION = 1
BLOCK_SIZE = 65536
BLOCK_HEADER_SIZE = 4
DTYPE = "<f8"


def _checksum(data):
    return int(np.frombuffer(data, dtype=np.uint8).sum(dtype=np.uint64)) & 0xffff


def write_cache(path, header, array):
    """Write ``array`` with ``header`` (a JSON-able dict) atomically."""
    payload = np.ascontiguousarray(array, dtype=DTYPE).tobytes()
    header = dict(header, shape=list(np.shape(array)), dtype=DTYPE)
    header_bytes = Utils.canonical_json(header).encode("utf8")
    total = 0
    with Utils.atomic_open(path, "wb") as f_out:
        f_out.write(MAGIC)
        f_out.write(struct.pack(">B", CACHE_VERSION))
        f_out.write(struct.pack(">I", len(header_bytes)))
        f_out.write(header_bytes)
        for start in range(0, len(payload), BLOCK_SIZE):
            block = payload[start:start + BLOCK_SIZE]
            total += _checksum(block)
            compressed_block = quicklz.compress(block)
            f_out.write(struct.pack(">I", len(compressed_block)))
            f_out.write(compressed_block)
        f_out.write(struct.pack(">H", total & 0xffff))
    logger.debug("Wrote %s (%s payload)", path, Utils.humansize(len(payload)))
    return path


def _read_prefix(f_in, path):
    if f_in.read(len(MAGIC)) != MAGIC:
        raise CacheVersionError(path, "not a bcibench cache file")
    version = f_in.read(1)
    if len(version) != 1 or version[0] != CACHE_VERSION:
        found = version[0] if version else None
        raise CacheVersionError(path, f"cache format version {found}, expected {CACHE_VERSION}")
    raw = f_in.read(BLOCK_HEADER_SIZE)
    if len(raw) != BLOCK_HEADER_SIZE:
        raise CacheVersionError(path, "truncated header")
    length = struct.unpack(">I", raw)[0]
    try:
        header = json.loads(f_in.read(length).decode("utf8"))
    except (UnicodeDecodeError, ValueError) as err:
        raise CacheVersionError(path, f"unreadable header ({err})") from err
    if not isinstance(header, dict) or "shape" not in header or "kind" not in header:
        raise CacheVersionError(path, "header lacks kind or shape")
    return header


def read_header(path):
    with open(path, "rb") as f_in:
        return _read_prefix(f_in, path)


def read_cache(path, kind=None, key=None):
    """Return (header, array); CacheVersionError on any mismatch or damage."""
    file_size = os.path.getsize(path)
    with open(path, "rb") as f_in:
        header = _read_prefix(f_in, path)
        if kind is not None and header["kind"] != kind:
            raise CacheVersionError(path, f"holds a {header['kind']} cache, expected {kind}")
        if key is not None and header.get("key") != key:
            raise CacheVersionError(path, "content key does not match the current inputs")
        chunks = []
        total = 0
        while f_in.tell() < file_size - 2:
            raw = f_in.read(BLOCK_HEADER_SIZE)
            if len(raw) != BLOCK_HEADER_SIZE:
                raise CacheVersionError(path, "truncated block header")
            blocksize = struct.unpack(">I", raw)[0]
            block = f_in.read(blocksize)
            if len(block) != blocksize:
                raise CacheVersionError(path, "truncated block")
            try:
                decompressed_block = quicklz.decompress(block)
            except Exception as err:
                raise CacheVersionError(path, f"corrupt block ({err})") from err
            total += _checksum(decompressed_block)
            chunks.append(decompressed_block)
        stored = f_in.read(2)
    if len(stored) != 2 or struct.unpack(">H", stored)[0] != total & 0xffff:
        raise CacheVersionError(path, "checksum mismatch")
    payload = b"".join(chunks)
    shape = tuple(header["shape"])
    expected = int(np.prod(shape, dtype=np.int64)) * np.dtype(DTYPE).itemsize
    if len(payload) != expected:
        raise CacheVersionError(path, f"payload holds {len(payload)} bytes, shape {shape} needs {expected}")
    return header, np.frombuffer(payload, dtype=DTYPE).reshape(shape).astype(float)


def is_current(path, kind, key):
    """True when ``path`` exists and its header carries ``kind`` and ``key``."""
    if not os.path.exists(path):
        return False
    try:
        header = read_header(path)
    except (CacheVersionError, OSError):
        return False
    return header.get("kind") == kind and header.get("key") == key


#------------------------------------------------------------------------------
# Feature matrices
#------------------------------------------------------------------------------
def write_feature_cache(path, matrix: FeatureMatrix, key, extra=None):
    header = {
        "kind": "features",
        "key": key,
        "descriptors": [d.to_dict() for d in matrix.descriptors],
        "labels": matrix.labels.tolist(),
        "degenerate_counts": matrix.degenerate_counts,
        "normalization": matrix.normalization,
        "extra": extra or {},
    }
    return write_cache(path, header, matrix.values)


def read_feature_cache(path, key=None) -> FeatureMatrix:
    header, values = read_cache(path, kind="features", key=key)
    return FeatureMatrix(
        values=values,
        descriptors=tuple(FeatureDescriptor.from_dict(d) for d in header["descriptors"]),
        labels=np.array(header["labels"], dtype=np.int64),
        normalization=header.get("normalization", "raw"),
        degenerate_counts=dict(header.get("degenerate_counts", {})),
    )


#------------------------------------------------------------------------------
# Trials
#------------------------------------------------------------------------------
def write_trial_cache(path, trials, key):
    trials = list(trials)
    header = {
        "kind": "trials",
        "key": key,
        "trials": [{"label": int(t.label), "fs": t.fs, "origin": list(t.origin)} for t in trials],
    }
    array = np.stack([t.samples for t in trials]) if trials else np.zeros((0, 0, 0))
    return write_cache(path, header, array)


def read_trial_cache(path, key=None) -> list:
    header, array = read_cache(path, kind="trials", key=key)
    return [
        Trial(samples=array[i], label=entry["label"], fs=entry["fs"], origin=tuple(entry["origin"]))
        for i, entry in enumerate(header["trials"])
    ]
