import json
import os

import numpy as np
import pytest

from pyspl.partition import build_radial_partition
from pyspl.report import ReportWriter, format_value, partition_svg, polyline_rows, to_json


@pytest.mark.parametrize("value, expected", [
    (True, "true"),
    (np.bool_(False), "false"),
    (3, "3"),
    (np.int64(7), "7"),
    (1 / 3, "0.333333333333"),
    (2.0, "2"),
    ("a", "a"),
])
def test_format_value(value, expected):
    assert format_value(value) == expected


def test_to_json_sorts_keys():
    text = to_json({"b": np.float64(1.5), "a": np.arange(2)})
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [0, 1], "b": 1.5}


def test_csv_and_manifest(tmp_path):
    writer = ReportWriter(str(tmp_path), "plap-eig", {"n": 12}, {"residual": 1e-8})
    path = writer.write_csv("spectrum.csv", ["index", "value"], [[1, 2.0], [2, 5.0]])
    with open(path, "rb") as stream:
        raw = stream.read()
    assert raw == b"index,value\r\n1,2\r\n2,5\r\n"
    manifest = writer.close()
    with open(manifest) as stream:
        data = json.load(stream)
    assert data["command"] == "plap-eig"
    assert data["outputs"] == ["spectrum.csv", "manifest.json"]
    assert data["config"] == {"n": 12}
    assert data["schema_version"] == 1
    assert "numpy" in data["versions"]


def test_partition_svg(square_cross):
    markup = partition_svg(square_cross, [np.array([[0.0, 1.0], [1.0, 1.0]])])
    assert markup.startswith("<svg")
    assert 'width="1000"' in markup
    assert markup.count("<polyline") == 1 + len(square_cross.interfaces) + 1


def test_partition_svg_disk_arc_signs():
    p = build_radial_partition(4)
    markup = partition_svg(p, arc_signs={0: [1.0, 1.0, -1.0, -1.0]})
    assert "<circle" in markup
    assert "#ff7f0e" in markup


def test_polyline_rows():
    lines = [np.array([[0.0, 0.0], [1.0, 0.5]]), np.array([[2.0, 2.0]])]
    assert polyline_rows(lines) == [[0, 0, 0.0, 0.0], [0, 1, 1.0, 0.5], [1, 0, 2.0, 2.0]]


def test_write_nodal(tmp_path, square):
    writer = ReportWriter(str(tmp_path), "plap-eig")
    writer.write_nodal("plap", square, [np.array([[0.5, 0.5], [1.0, 1.0]])])
    assert writer.manifest.outputs == ["plap_nodal.csv", "plap_nodal.svg"]
    assert os.path.exists(os.path.join(str(tmp_path), "plap_nodal.svg"))
