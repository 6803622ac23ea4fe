# -*- coding: utf-8 -*-
"""
Report Serialization

Saves and loads JSON reports. Infinities are stored as the strings
"inf" / "-inf" so every file is strict JSON, and numpy scalars and arrays
are converted to plain Python values.
"""

import json
import logging
import math

import numpy as np

import config

_INFINITIES = {'inf': math.inf, '-inf': -math.inf}


def to_jsonable(obj):
    """
    Recursively converts a report into strict-JSON-compatible values.
    """
    if isinstance(obj, dict):
        return {str(key): to_jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [to_jsonable(value) for value in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        if math.isnan(value):
            return None
        return value
    return obj


def from_jsonable(obj):
    """
    Inverse of to_jsonable for the infinity strings.
    """
    if isinstance(obj, dict):
        return {key: from_jsonable(value) for key, value in obj.items()}
    if isinstance(obj, list):
        return [from_jsonable(value) for value in obj]
    if isinstance(obj, str) and obj in _INFINITIES:
        return _INFINITIES[obj]
    return obj


def dumps(report):
    payload = dict(report)
    payload.setdefault('schema_version', config.SCHEMA_VERSION)
    return json.dumps(to_jsonable(payload), indent=2, sort_keys=True, allow_nan=False)


def save_report(report, path):
    """
    Writes a report dictionary, adding schema_version if missing.

    :param path: Output file, or None / "-" for standard output.
    """
    text = dumps(report)
    if path in (None, '-'):
        print(text)
        return
    with open(path, 'w') as f:
        f.write(text + '\n')
    logging.info(f"Report saved to {path}")


def load_report(path):
    """
    Reads a report written by save_report.
    """
    with open(path, 'r') as f:
        return from_jsonable(json.load(f))
