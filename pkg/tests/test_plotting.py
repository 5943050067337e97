"""SVG rendering: byte determinism, element structure, clamping, and
input validation. Assertions work on the emitted text, never on a
rasterizer, so they hold on any platform.
"""

import random
import warnings

import pytest

from rmkit.bench import RunRecord
from rmkit.plotting import CLAMP_EPS, PALETTE, emit_plot


def rec(label, seed, iteration, value, metric="nash_gap", wall=None):
    if wall is None:
        wall = 1_000_000 * iteration + 1
    return RunRecord(f"{label}-s{seed}", label, seed, iteration, wall,
                     metric, value, 1.0)


def sample_records():
    out = []
    for label, scale in (("greedy", 0.01), ("uniform", 0.1)):
        for seed in (0, 1, 2):
            for it in (1, 10, 100):
                out.append(rec(label, seed, it,
                               scale / it * (1 + 0.05 * seed)))
    return out


def test_identical_input_identical_bytes():
    records = sample_records()
    first = emit_plot(records, title="demo")
    second = emit_plot(list(records), title="demo")
    assert first == second

    shuffled = list(records)
    random.Random(3).shuffle(shuffled)
    assert emit_plot(shuffled, title="demo") == first


def test_svg_structure():
    svg = emit_plot(sample_records(), title="demo")
    assert svg.startswith('<svg xmlns="http://www.w3.org/2000/svg" '
                          'width="720" height="480"')
    assert svg.endswith("</svg>\n")
    assert svg.count("<polyline ") == 2  # one mean line per label
    assert svg.count('fill-opacity="0.15"') == 2  # one band per label
    # Bands draw before lines, so lines sit on top.
    assert svg.index("<path d=") < svg.index("<polyline ")
    # Labels sort, so "greedy" takes the first palette slot.
    g_line = next(ln for ln in svg.splitlines()
                  if ln.startswith("<polyline "))
    assert PALETTE[0] in g_line
    assert ">greedy</text>" in svg and ">uniform</text>" in svg
    assert ">demo</text>" in svg
    assert ">iteration</text>" in svg
    assert ">nash_gap</text>" in svg


def test_no_title_omits_title_text():
    svg = emit_plot(sample_records())
    assert ">demo</text>" not in svg
    assert 'y="14"' not in svg


def test_coordinates_use_two_decimal_places():
    svg = emit_plot(sample_records())
    line = next(ln for ln in svg.splitlines() if ln.startswith("<polyline "))
    pts = line.split('points="')[1].split('"')[0]
    for pair in pts.split(" "):
        x, y = pair.split(",")
        assert len(x.split(".")[1]) == 2
        assert len(y.split(".")[1]) == 2


def test_nonpositive_values_clamped_with_single_warning():
    records = [rec("a", 0, 1, 1.0), rec("a", 0, 10, 0.0),
               rec("a", 0, 100, -2.0)]
    with pytest.warns(RuntimeWarning) as caught:
        svg = emit_plot(records)
    assert len(caught) == 1
    assert str(CLAMP_EPS) in str(caught[0].message)
    # The y range now reaches the clamp floor's decade.
    assert ">1e-16</text>" in svg

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        emit_plot([rec("a", 0, 1, 1.0), rec("a", 0, 10, 0.5)])


def test_empty_and_filtered_out_series_rejected():
    with pytest.raises(ValueError, match="empty series"):
        emit_plot([])
    with pytest.raises(ValueError, match="empty series"):
        emit_plot([rec("a", 0, 1, 1.0)], metric="welfare")


def test_metric_inference():
    two = [rec("a", 0, 1, 1.0), rec("a", 0, 1, 2.0, metric="welfare")]
    with pytest.raises(ValueError, match="metric must be named"):
        emit_plot(two)
    svg = emit_plot(two, metric="welfare")
    assert ">welfare</text>" in svg
    assert svg.count("<polyline ") == 1


def test_time_axis():
    records = [rec("a", 0, it, 1.0 / it, wall=int(it * 2e9))
               for it in (1, 10, 100)]
    svg = emit_plot(records, x_axis="time")
    assert ">wall time (s)</text>" in svg
    # Walls of 2, 20, 200 seconds span the decades 1e0..1e3.
    assert ">1e0</text>" in svg and ">1e3</text>" in svg
    assert svg != emit_plot(records, x_axis="iteration")
    with pytest.raises(ValueError, match="x_axis"):
        emit_plot(records, x_axis="wall")


def test_single_point_series_renders():
    svg = emit_plot([rec("a", 0, 1, 0.5)])
    assert svg.count("<polyline ") == 1
    assert "</svg>" in svg


def test_labels_escaped():
    records = [rec("a<b&c", 0, it, 1.0 / it) for it in (1, 10)]
    svg = emit_plot(records, title="t>u")
    assert "a&lt;b&amp;c" in svg
    assert "a<b&c" not in svg
    assert "t&gt;u" in svg
