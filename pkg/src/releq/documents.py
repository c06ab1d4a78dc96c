"""JSON problem documents: the single on-disk input format.

A document carries the problem description (dimension, exponent, masses,
frequencies), optional candidate positions, and free-form metadata.
Numbers round-trip bit-faithfully (shortest repr). Writes are atomic:
temp file in the target directory, then rename.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .errors import DocumentError
from .model import Configuration, Problem

SCHEMA_VERSION = "1"

_KEY_ORDER = ("schema_version", "dimension", "exponent", "masses",
              "frequencies", "positions", "metadata")


@dataclass
class ProblemDocument:
    """Parsed, validated document contents."""

    schema_version: str
    dimension: int
    exponent: float
    masses: list
    frequencies: list
    positions: list | None = None
    metadata: dict = field(default_factory=dict)

    def problem(self):
        return Problem(self.dimension, self.masses, self.frequencies,
                       self.exponent)

    def configuration(self):
        if self.positions is None:
            return None
        return Configuration(np.array(self.positions, dtype=float))


def _number_list(value, name, length=None):
    if not isinstance(value, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in value
    ):
        raise DocumentError(f"field '{name}' must be an array of numbers",
                            field=name)
    if length is not None and len(value) != length:
        raise DocumentError(
            f"field '{name}' must have length {length}, got {len(value)}",
            field=name,
        )
    return [float(x) for x in value]


def parse_document(text):
    """Parse and validate a JSON document string into a ProblemDocument."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(
            f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(raw, dict):
        raise DocumentError("document must be a JSON object")

    unknown = set(raw) - set(_KEY_ORDER)
    if unknown:
        raise DocumentError(
            f"unknown field(s): {', '.join(sorted(unknown))}",
            field=sorted(unknown)[0],
        )
    for required in ("schema_version", "dimension", "exponent", "masses",
                     "frequencies"):
        if required not in raw:
            raise DocumentError(f"missing required field '{required}'",
                                field=required)

    version = raw["schema_version"]
    if not isinstance(version, str) or version != SCHEMA_VERSION:
        raise DocumentError(
            f"field 'schema_version' must be the string '{SCHEMA_VERSION}'",
            field="schema_version",
        )
    dimension = raw["dimension"]
    if not isinstance(dimension, int) or isinstance(dimension, bool):
        raise DocumentError("field 'dimension' must be an integer",
                            field="dimension")
    if dimension < 2:
        raise DocumentError("field 'dimension' must be >= 2", field="dimension")
    exponent = raw["exponent"]
    if not isinstance(exponent, (int, float)) or isinstance(exponent, bool):
        raise DocumentError("field 'exponent' must be a number",
                            field="exponent")
    if not float(exponent) < -0.5:
        raise DocumentError(
            f"field 'exponent' must satisfy a < -1/2, got {exponent}",
            field="exponent",
        )
    masses = _number_list(raw["masses"], "masses")
    if len(masses) < 2:
        raise DocumentError("field 'masses' needs at least 2 entries",
                            field="masses")
    if any(m <= 0.0 for m in masses):
        raise DocumentError("field 'masses' must be strictly positive",
                            field="masses")
    frequencies = _number_list(raw["frequencies"], "frequencies",
                               length=dimension // 2)
    if any(w <= 0.0 for w in frequencies):
        raise DocumentError("field 'frequencies' must be strictly positive",
                            field="frequencies")

    positions = raw.get("positions")
    if positions is not None:
        if not isinstance(positions, list) or len(positions) != len(masses):
            raise DocumentError(
                f"field 'positions' must be an array of {len(masses)} points",
                field="positions",
            )
        positions = [
            _number_list(row, f"positions[{i}]", length=dimension)
            for i, row in enumerate(positions)
        ]

    metadata = raw.get("metadata", {})
    if not isinstance(metadata, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in metadata.items()
    ):
        raise DocumentError(
            "field 'metadata' must be a string-to-string map", field="metadata"
        )

    doc = ProblemDocument(version, dimension, float(exponent), masses,
                          frequencies, positions, dict(metadata))
    try:
        doc.problem()
        doc.configuration()
    except ValueError as exc:
        raise DocumentError(str(exc)) from exc
    return doc


def load_document(path):
    with open(path, "r", encoding="utf-8") as handle:
        return parse_document(handle.read())


def document_from(problem, config=None, metadata=None):
    positions = None if config is None else config.points.tolist()
    return ProblemDocument(
        SCHEMA_VERSION, problem.k, problem.a, problem.masses.tolist(),
        problem.frequencies.tolist(), positions, dict(metadata or {}),
    )


def dumps_document(doc):
    """Canonical serialization: fixed key order, 2-space indent."""
    payload = {
        "schema_version": doc.schema_version,
        "dimension": doc.dimension,
        "exponent": doc.exponent,
        "masses": doc.masses,
        "frequencies": doc.frequencies,
    }
    if doc.positions is not None:
        payload["positions"] = doc.positions
    if doc.metadata:
        payload["metadata"] = doc.metadata
    return json.dumps(payload, indent=2) + "\n"


def write_text_atomic(path, text):
    """Write via a temp file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def save_document(path, doc):
    write_text_atomic(path, dumps_document(doc))
