"""
Plain-text document I/O: JSON-shaped documents for meshes, patterns and
reports, CSV tables for sweeps. Floats are written with the shortest repr
that round-trips at double precision (at most 17 significant digits).
"""

import csv
import json
import os

import numpy as np

from Torus.Errors import InvalidArgument
from Utilities.Log import Log


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


def complex_pair(z):
    return [float(np.real(z)), float(np.imag(z))]


def dumps(document):
    return json.dumps(_plain(document), indent=2, sort_keys=True) + "\n"


def write_json(document, path):
    text = dumps(document)
    try:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as err:
        raise InvalidArgument(f"cannot write {path}: {err.strerror}") from err
    Log.logger.info(f"Wrote document: {path}")
    return path


def read_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            document = json.load(fh)
    except OSError as err:
        raise InvalidArgument(f"cannot read {path}: {err.strerror}") from err
    except ValueError as err:
        raise InvalidArgument(f"{path} is not a JSON document: {err}") from err
    Log.logger.info(f"Read document: {path}")
    return document


def write_csv(rows, columns, path):
    """Writes dict rows in the given column order."""
    try:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([repr(float(row[c])) if isinstance(row[c], (float, np.floating)) else row[c]
                                 for c in columns])
    except OSError as err:
        raise InvalidArgument(f"cannot write {path}: {err.strerror}") from err
    Log.logger.info(f"Wrote table with {len(rows)} rows: {path}")
    return path
