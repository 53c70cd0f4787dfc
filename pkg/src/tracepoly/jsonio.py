"""Deterministic serialization helpers shared by reports and the CLI."""
from __future__ import annotations

import csv
import hashlib
import io
import json


def canonical_json_bytes(obj) -> bytes:
    """Stable JSON encoding: sorted keys, fixed separators, trailing newline."""
    return (
        json.dumps(obj, sort_keys=True, indent=2, separators=(",", ": ")) + "\n"
    ).encode("utf-8")


def canonical_json_text(obj) -> str:
    return canonical_json_bytes(obj).decode("utf-8")


def csv_text(header, rows) -> str:
    """CSV with a fixed newline convention, independent of platform."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def short_hash(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:12]
