"""CSV/SVG/JSON export and returns input."""

from __future__ import annotations

import io
import json

import pytest

from kellyloop import FeedbackMap, MarketParams, simulate, sweep
from kellyloop._export import (
    dumps_json,
    read_returns,
    render_map_svg,
    render_phase_svg,
    round_sig,
    write_phase_csv,
    write_trajectory_csv,
)
from kellyloop.exceptions import ConfigurationException


def test_round_sig():
    assert round_sig(1.0 / 3.0) == 0.333333333333
    assert round_sig(2.0) == 2.0
    assert round_sig(float("inf")) == float("inf")


def test_dumps_json_is_compact_and_rounded():
    text = dumps_json({"a": 2.0 / 3.0, "b": [1, None, True], "c": {"d": 0.5}})
    assert text == '{"a":0.666666666667,"b":[1,null,true],"c":{"d":0.5}}'
    assert json.loads(text)["c"]["d"] == 0.5


def test_trajectory_csv(sqrt_map):
    buffer = io.StringIO()
    write_trajectory_csv(simulate(sqrt_map(2.0), 0.5, 100), buffer)
    lines = buffer.getvalue().splitlines()
    assert lines[0] == "step,x,dtheta,S,V,halt_reason"
    assert lines[1] == "0,0.5,0.5,1,1,"
    assert lines[2] == "1,0.25,0.25,1,1,"
    assert lines[-1].endswith(",underflow")
    assert len(lines) == 8


def test_phase_csv_order():
    buffer = io.StringIO()
    write_phase_csv(sweep((0.5, 2.0), (0.4, 0.6), 2.0, resolution=(2, 2)), buffer)
    assert buffer.getvalue().splitlines() == [
        "lambda,gamma,phase",
        "0.5,0.4,I",
        "2,0.4,III",
        "0.5,0.6,I",
        "2,0.6,III",
    ]


def test_svg_is_deterministic():
    grid = sweep((0.0, 3.0), (0.3, 0.9), 0.01, resolution=9)
    first = render_phase_svg(grid)
    second = render_phase_svg(grid)
    assert first == second
    assert first.lstrip().startswith(b"<?xml")
    assert b"<svg" in first


def test_map_svg_is_deterministic(sqrt_map):
    fmap = sqrt_map(2.0)
    first = render_map_svg(fmap, 0.9, 12)
    assert first == render_map_svg(fmap, 0.9, 12)
    assert first.lstrip().startswith(b"<?xml")
    assert b"x* = 1 (unstable)" in first
    assert b"cobweb" in first
    assert first != render_map_svg(fmap, 1.1, 12)


@pytest.mark.parametrize(
    "leverage,gamma,x0",
    [(2.0, 0.5, 2.0), (0.5, 0.5, 0.5), (1.0, 0.5, 0.3), (2.0, 1.0, 0.3), (3.0, 1.5, 0.1)],
)
def test_map_svg_covers_every_regime(sqrt_map, leverage, gamma, x0):
    svg = render_map_svg(sqrt_map(leverage, gamma=gamma), x0, 30)
    assert b"<svg" in svg


def test_map_svg_needs_frozen_map():
    fmap = FeedbackMap.full(MarketParams(lam=0.4, sigma=0.2), gamma=0.5)
    with pytest.raises(ConfigurationException):
        render_map_svg(fmap, 0.01)


def test_read_returns_named_column():
    text = "step,x,dtheta\n0,0.5,0.5\n1,0.25,0.25\n"
    assert read_returns(io.StringIO(text)) == [0.5, 0.25]


def test_read_returns_single_column_with_and_without_header():
    assert read_returns(io.StringIO("0.1\n0.2\n")) == [0.1, 0.2]
    assert read_returns(io.StringIO("ret\n0.1\n0.2\n"), column="x") == [0.1, 0.2]


def test_read_returns_ignores_trailing_halt_row():
    text = "step,x,halt_reason\n0,0.5,\n1,0.25,underflow\n"
    assert read_returns(io.StringIO(text)) == [0.5, 0.25]


def test_read_returns_empty():
    assert read_returns(io.StringIO("")) == []


def test_read_returns_missing_column():
    with pytest.raises(ConfigurationException, match="no column"):
        read_returns(io.StringIO("a,b\n1,2\n"))


def test_read_returns_non_numeric():
    with pytest.raises(ConfigurationException, match="non-numeric"):
        read_returns(io.StringIO("x\n0.1\nabc\n"))


def test_read_returns_missing_file(tmp_path):
    with pytest.raises(ConfigurationException):
        read_returns(tmp_path / "nope.csv")
