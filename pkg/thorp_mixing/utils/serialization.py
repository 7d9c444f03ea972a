"""
Persistence helpers for result documents and distributions.

Responsibilities:
- Load/save JSON documents (UTF-8, LF, 4-space indentation).
- Export/import PermDistribution as JSON or as a flat binary file with a
  header carrying d, the vector length and the convention tags.

Binary layout (little-endian):
    8 bytes   magic b"THORPDST"
    uint32    d
    uint64    length (= n!)
    16 bytes  L1 convention tag, NUL padded
    16 bytes  log convention tag, NUL padded
    length x float64 probabilities in Lehmer rank order
"""
import json
import os
import struct

import numpy as np

from thorp_mixing.constants import L1_CONVENTION, LOG_CONVENTION
from thorp_mixing.exceptions import DomainError
from thorp_mixing.services.distributions import PermDistribution

MAGIC = b"THORPDST"
_HEADER = struct.Struct("<8sIQ16s16s")


def load_document(file_path):
    """
    Load a JSON document.

    Returns:
        dict | list: Parsed content.

    Raises:
        FileNotFoundError: If the file does not exist.
    """
    with open(file_path, "r", encoding="utf-8") as file:
        return json.load(file)


def dump_document(data):
    """Serialise to the canonical text form (sorted keys, 4-space indent, trailing LF)."""
    return json.dumps(data, indent=4, sort_keys=True, ensure_ascii=False) + "\n"


def save_document(file_path, data):
    """
    Persist a document as JSON, creating parent directories as needed.

    Args:
        file_path (str): Target path.
        data (dict | list): JSON-serialisable content.
    """
    parent = os.path.dirname(os.path.abspath(file_path))
    os.makedirs(parent, exist_ok=True)
    with open(file_path, "w", encoding="utf-8", newline="\n") as file:
        file.write(dump_document(data))


def distribution_to_dict(dist):
    """JSON form of a PermDistribution: header plus flat probability array."""
    return {
        "header": {
            "d": dist.d,
            "length": int(dist.probs.size),
            "conventions": [L1_CONVENTION, LOG_CONVENTION],
        },
        "probs": [float(p) for p in dist.probs],
    }


def distribution_from_dict(data):
    """
    Rebuild a PermDistribution from its JSON form.

    Raises:
        DomainError: On a malformed header, wrong length or wrong conventions.
    """
    header = data.get("header") if isinstance(data, dict) else None
    if not header or "d" not in header or "length" not in header:
        raise DomainError("Distribution document is missing its header.")
    if list(header.get("conventions", [])) != [L1_CONVENTION, LOG_CONVENTION]:
        raise DomainError(f"Unsupported conventions: {header.get('conventions')}.")
    probs = np.asarray(data.get("probs", []), dtype=np.float64)
    if probs.size != header["length"]:
        raise DomainError(f"Header length {header['length']} does not match {probs.size} values.")
    return PermDistribution(int(header["d"]), probs)


def distribution_to_bytes(dist):
    header = _HEADER.pack(
        MAGIC, dist.d, dist.probs.size,
        L1_CONVENTION.encode("ascii"), LOG_CONVENTION.encode("ascii"),
    )
    return header + dist.probs.astype("<f8").tobytes()


def distribution_from_bytes(payload):
    """
    Parse the binary form.

    Raises:
        DomainError: On bad magic, conventions, or truncated payload.
    """
    if len(payload) < _HEADER.size:
        raise DomainError("Binary distribution shorter than its header.")
    magic, d, length, l1_tag, log_tag = _HEADER.unpack_from(payload)
    if magic != MAGIC:
        raise DomainError("Not a thorp_mixing distribution file (bad magic).")
    tags = (l1_tag.rstrip(b"\0").decode("ascii"), log_tag.rstrip(b"\0").decode("ascii"))
    if tags != (L1_CONVENTION, LOG_CONVENTION):
        raise DomainError(f"Unsupported conventions: {tags}.")
    body = payload[_HEADER.size:]
    if len(body) != 8 * length:
        raise DomainError(f"Expected {length} float64 values, found {len(body) / 8:g}.")
    return PermDistribution(d, np.frombuffer(body, dtype="<f8").astype(np.float64))


def save_distribution(file_path, dist, fmt="json"):
    """Write a distribution as 'json' or 'binary'."""
    if fmt == "json":
        save_document(file_path, distribution_to_dict(dist))
    elif fmt == "binary":
        with open(file_path, "wb") as file:
            file.write(distribution_to_bytes(dist))
    else:
        raise DomainError(f"Unknown distribution format {fmt!r} (use 'json' or 'binary').")


def load_distribution(file_path):
    """Read a distribution, detecting the binary form by its magic bytes."""
    with open(file_path, "rb") as file:
        payload = file.read()
    if payload.startswith(MAGIC):
        return distribution_from_bytes(payload)
    return distribution_from_dict(json.loads(payload.decode("utf-8")))
