"""Builds image-conditioned caption correction training data.

Thin wrappers over the native core; results come back as plain Python
objects.
"""

import json
import os

from . import _core
from ._core import (ConfigError, DuplicateRecordError, Error, ParseError,
                    SchemaError, ValidationError, iccc_quota)

__all__ = [
    "ConfigError", "DuplicateRecordError", "Error", "ParseError",
    "SchemaError", "ValidationError", "build_base", "compute_stats",
    "construct", "detokenize", "extract", "iccc_quota", "ingest",
]


def _lines(text):
    return [json.loads(line) for line in text.splitlines() if line]


def ingest(path, fmt="coco"):
    """Reads a COCO caption file or a caption JSONL file into records."""
    if fmt == "coco":
        return _lines(_core.ingest_coco(os.fspath(path)))
    if fmt == "jsonl":
        return _lines(_core.ingest_jsonl(os.fspath(path)))
    raise ValueError(f"unknown format {fmt!r}")


def extract(conllu_text, types="noun,verb,ent,pred,attr"):
    """Linguistic units of every sentence in a CoNLL-U string."""
    if not isinstance(types, str):
        types = ",".join(types)
    return _lines(_core.extract(conllu_text, types))


def detokenize(conllu_text):
    return _core.detokenize(conllu_text)


def build_base(conllu, out, records="", min_count=5, top_drop=0.001):
    """Writes the filtered concept base and returns its rows as
    (type, surface, count) tuples."""
    text = _core.build_base(os.fspath(conllu), os.fspath(records), min_count,
                            top_drop, os.fspath(out))
    rows = []
    for line in text.splitlines():
        if line and not line.startswith("#"):
            kind, surface, count = line.split("\t")
            rows.append((kind, surface, int(count)))
    return rows


def construct(conllu, records, out, **options):
    """Runs construction end to end; returns the summary statistics."""
    if "types" in options and not isinstance(options["types"], str):
        options["types"] = ",".join(options["types"])
    if "base" in options:
        options["base"] = os.fspath(options["base"])
    return json.loads(_core.construct(os.fspath(conllu), os.fspath(records),
                                      os.fspath(out), **options))


def compute_stats(path):
    return json.loads(_core.compute_stats(os.fspath(path)))
