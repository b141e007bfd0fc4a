"""Versioned JSON matrix files and CSV writers."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import InvalidInput

VERSION = 1


def _load(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise InvalidInput(f"{path}: expected a JSON object")
    if data.get("version") != VERSION:
        raise InvalidInput(f"{path}: unsupported or missing version (expected {VERSION})")
    return data


def _matrix(data: dict, key: str, path) -> tuple[list, np.ndarray]:
    if key not in data or "labels" not in data:
        raise InvalidInput(f"{path}: missing 'labels' or '{key}'")
    labels = data["labels"]
    try:
        m = np.array(data[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"{path}: '{key}' is not a numeric matrix") from exc
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] != len(labels):
        raise InvalidInput(f"{path}: '{key}' must be a square matrix matching the labels")
    if not all(isinstance(u, str) for u in labels):
        raise InvalidInput(f"{path}: labels must be strings")
    return labels, m


def read_gram(path) -> tuple[list, np.ndarray]:
    """``{"version": 1, "labels": [...], "gram": [[...], ...]}``"""
    return _matrix(_load(path), "gram", path)


def read_metric(path) -> tuple[list, np.ndarray]:
    """``{"version": 1, "labels": [...], "dist": [[...], ...]}``"""
    return _matrix(_load(path), "dist", path)


def gram_document(labels, matrix) -> dict:
    return {"version": VERSION, "labels": list(labels), "gram": np.asarray(matrix).tolist()}


def metric_document(labels, matrix) -> dict:
    return {"version": VERSION, "labels": list(labels), "dist": np.asarray(matrix).tolist()}


def write_json(doc: dict, path) -> None:
    Path(path).write_text(dumps(doc))


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def csv_text(header, rows) -> str:
    lines = [",".join(str(h) for h in header)]
    lines.extend(",".join(repr(float(v)) for v in row) for row in rows)
    return "\n".join(lines) + "\n"
