# -*- coding: utf-8 -*-
"""
Logger Utility

This module provides a CSV logger for recording long-format simulation
results (one row per trial, alpha and method).
"""

import csv
import logging
import math
import os

import config


def format_value(value):
    """
    Renders floats with 17 significant digits and '.' decimals; infinities
    are written as inf / -inf.
    """
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float) or hasattr(value, 'dtype'):
        value = float(value)
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return config.CSV_FLOAT_FORMAT % value
    return str(value)


class CsvLogger:
    """
    Writes rows of result data to a CSV file.
    """
    def __init__(self, file_path, header, overwrite=True):
        """
        Initializes the logger.

        :param file_path: Path to the CSV file.
        :param header: A list of strings representing the CSV header.
        :param overwrite: Start a fresh file even if one exists, so reruns
                          produce identical output.
        """
        self.file_path = file_path
        self.header = list(header)
        self._initialize_file(overwrite)

    def _initialize_file(self, overwrite):
        """
        Creates the file and writes the header.
        """
        if overwrite or not os.path.exists(self.file_path):
            with open(self.file_path, 'w', newline='') as f:
                writer = csv.writer(f, lineterminator='\n')
                writer.writerow(self.header)
            logging.info(f"Results file created at {self.file_path}")

    def log(self, data_dict):
        """
        Appends one row; keys must match the header.
        """
        self.log_many([data_dict])

    def log_many(self, rows):
        """
        Appends several rows in one write.
        """
        with open(self.file_path, 'a', newline='') as f:
            writer = csv.DictWriter(f, fieldnames=self.header, lineterminator='\n')
            for row in rows:
                writer.writerow({key: format_value(value) for key, value in row.items()})
