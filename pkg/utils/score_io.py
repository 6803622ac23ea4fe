# -*- coding: utf-8 -*-
"""
Score File Ingest

Reads nonconformity scores for one source domain, either from a CSV file
with a `score` column or from a JSON array. Errors name the file and the
offending line.
"""

import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd

import config
from core.exceptions import ScoreFileError

SCORE_COLUMN = 'score'


def _read_json(path):
    try:
        with open(path, 'r') as f:
            values = json.load(f)
    except json.JSONDecodeError as e:
        raise ScoreFileError(path, f"invalid JSON: {e.msg}", line=e.lineno) from None
    if not isinstance(values, list):
        raise ScoreFileError(path, "expected a JSON array of numbers")
    scores = np.empty(len(values))
    for i, value in enumerate(values):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not np.isfinite(value):
            raise ScoreFileError(path, f"element {i} is not a finite number: {value!r}")
        scores[i] = value
    return scores


def _read_csv(path):
    try:
        frame = pd.read_csv(path, skip_blank_lines=False, dtype=str)
    except pd.errors.EmptyDataError:
        raise ScoreFileError(path, "file is empty") from None
    if SCORE_COLUMN not in frame.columns:
        raise ScoreFileError(path, f"missing '{SCORE_COLUMN}' header", line=1)
    raw = frame[SCORE_COLUMN]
    scores = pd.to_numeric(raw, errors='coerce').to_numpy(dtype=float)
    bad = np.flatnonzero(~np.isfinite(scores))
    if bad.size:
        row = int(bad[0])
        # +2: one for the header, one for 1-based numbering
        raise ScoreFileError(path, f"not a finite number: {raw.iloc[row]!r}", line=row + 2)
    return scores


def read_scores(path):
    """
    Loads one score vector.

    :param path: A .json file holding an array, or a CSV file with a `score` header.
    :return: numpy array of finite scores.
    :raises ScoreFileError: on a missing, empty or malformed file.
    """
    path = Path(path)
    if not path.exists():
        raise ScoreFileError(path, "file not found")
    scores = _read_json(path) if path.suffix.lower() == '.json' else _read_csv(path)
    if scores.size == 0:
        raise ScoreFileError(path, "no scores found")
    logging.info(f"Loaded {scores.size} scores from {path}")
    return scores


def write_scores(scores, path):
    """
    Writes scores as a one-column CSV with a `score` header.
    """
    pd.DataFrame({SCORE_COLUMN: np.asarray(scores, dtype=float)}).to_csv(
        path, index=False, float_format=config.CSV_FLOAT_FORMAT, lineterminator='\n')
