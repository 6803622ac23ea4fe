import json
import math

import numpy as np
import pytest

from core.exceptions import ScoreFileError
from utils.logger import CsvLogger, format_value
from utils.report_io import dumps, load_report, save_report
from utils.score_io import read_scores, write_scores


def test_read_scores_csv_and_json(tmp_path):
    csv_file = tmp_path / 'scores.csv'
    csv_file.write_text("score\n0.5\n1.25\n3\n")
    np.testing.assert_array_equal(read_scores(csv_file), [0.5, 1.25, 3.0])

    json_file = tmp_path / 'scores.json'
    json_file.write_text("[0.5, 2, 1e-3]")
    np.testing.assert_array_equal(read_scores(json_file), [0.5, 2.0, 0.001])


def test_write_scores_is_read_back_exactly(tmp_path):
    scores = np.random.default_rng(0).exponential(size=20)
    path = tmp_path / 'out.csv'
    write_scores(scores, path)
    np.testing.assert_array_equal(read_scores(path), scores)


@pytest.mark.parametrize("content,line", [
    ("score\n0.5\nabc\n", 3),
    ("score\n0.5\n\n1.0\n", 3),
    ("value\n0.5\n", 1),
])
def test_read_scores_reports_the_offending_line(tmp_path, content, line):
    path = tmp_path / 'bad.csv'
    path.write_text(content)
    with pytest.raises(ScoreFileError) as excinfo:
        read_scores(path)
    assert excinfo.value.line == line
    assert f"bad.csv:{line}" in str(excinfo.value)


def test_read_scores_rejects_empty_and_missing(tmp_path):
    empty = tmp_path / 'empty.csv'
    empty.write_text("")
    header_only = tmp_path / 'header.csv'
    header_only.write_text("score\n")
    for path in (empty, header_only, tmp_path / 'missing.csv'):
        with pytest.raises(ScoreFileError):
            read_scores(path)

    bad_json = tmp_path / 'bad.json'
    bad_json.write_text('[1.0, "x"]')
    with pytest.raises(ScoreFileError):
        read_scores(bad_json)


def test_reports_are_strict_json_with_infinities(tmp_path):
    report = {'threshold': math.inf, 'ms': (10, 20), 'level': np.float64(0.5), 'feasible': np.bool_(False)}
    text = dumps(report)
    parsed = json.loads(text)
    assert parsed['threshold'] == 'inf'
    assert parsed['schema_version'] == 1
    assert parsed['ms'] == [10, 20]

    path = tmp_path / 'report.json'
    save_report(report, path)
    loaded = load_report(path)
    assert loaded['threshold'] == math.inf
    assert loaded['level'] == 0.5
    assert loaded['feasible'] is False


def test_save_report_to_stdout(capsys):
    save_report({'value': -math.inf}, None)
    assert json.loads(capsys.readouterr().out)['value'] == '-inf'


def test_format_value():
    assert format_value(0.1) == '0.10000000000000001'
    assert format_value(math.inf) == 'inf'
    assert format_value(-math.inf) == '-inf'
    assert format_value(3) == '3'
    assert format_value('scp') == 'scp'


def test_csv_logger_overwrites_and_appends(tmp_path):
    path = tmp_path / 'results.csv'
    header = ['trial', 'alpha', 'method', 'coverage', 'length']
    for _ in range(2):
        logger = CsvLogger(file_path=str(path), header=header)
        logger.log({'trial': 0, 'alpha': 0.1, 'method': 'scp', 'coverage': 0.9, 'length': 3.5})
        logger.log_many([{'trial': 0, 'alpha': 0.1, 'method': 'ood_scp', 'coverage': 1.0, 'length': math.inf}])
    lines = path.read_text().splitlines()
    assert lines[0] == ','.join(header)
    assert len(lines) == 3
    assert lines[2].endswith(',1,inf')
