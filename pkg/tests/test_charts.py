"""SVG output sanity: well-formed XML, deterministic bytes."""

from __future__ import annotations

import xml.etree.ElementTree as ET

from codeprov.charts import bar_chart, line_chart, write_svg


def test_bar_chart_is_valid_xml_and_deterministic():
    svg = bar_chart(["a", "b"], {"rate": [0.25, 0.75]}, "Example <title>")
    assert svg == bar_chart(["a", "b"], {"rate": [0.25, 0.75]}, "Example <title>")
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")
    assert "&lt;title&gt;" in svg


def test_grouped_bars_render_one_rect_per_value():
    svg = bar_chart(["x", "y", "z"], {"ai": [1, 2, 3], "human": [3, 2, 1]}, "t")
    assert svg.count("<rect") == 1 + 6 + 2  # background + bars + legend swatches


def test_line_chart_polylines():
    svg = line_chart(["q1", "q2", "q3"], {"a": [0.1, 0.5, 0.2], "b": [0.0, 0.3, 0.9]}, "t")
    assert svg.count("<polyline") == 2
    ET.fromstring(svg)


def test_zero_values_render():
    svg = bar_chart(["only"], {"v": [0.0]}, "flat")
    ET.fromstring(svg)


def test_write_svg(tmp_path):
    path = tmp_path / "chart.svg"
    write_svg(path, bar_chart(["a"], {"v": [1.0]}, "t"))
    assert path.read_text().startswith("<svg")
