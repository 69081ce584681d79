from __future__ import annotations

import csv
import json
import math

import pytest

from classes.exceptions import InvalidParameter
from utils import checks
from utils.cache import cache
from utils.helpers import load_json, save_csv, save_json
from utils.time import Stopwatch, human_duration, human_join


@pytest.mark.parametrize(
    "check, value",
    [
        (checks.positive, 0.0),
        (checks.positive, math.inf),
        (checks.non_negative, -1e-300),
        (checks.in_unit_interval, 0.0),
        (checks.in_unit_interval, 1.5),
        (checks.non_negative, math.nan),
    ],
)
def test_checks_reject(check, value):
    with pytest.raises(InvalidParameter) as excinfo:
        check("x", value)
    assert "`x`" in str(excinfo.value)


def test_checks_accept():
    assert checks.positive("x", 2) == 2.0
    assert checks.in_unit_interval("tau", 1) == 1.0
    assert checks.greater_than("gamma", 1.5, 1.0) == 1.5
    assert checks.at_least("t", 1.0, 1.0) == 1.0
    assert checks.one_of("solver", "direct", ("fuchsian", "direct")) == "direct"


@pytest.mark.parametrize("n, ok", [(8, True), (64, True), (4, False), (12, False), (0, False)])
def test_power_of_two(n, ok):
    if ok:
        assert checks.power_of_two("n", n) == n
    else:
        with pytest.raises(InvalidParameter):
            checks.power_of_two("n", n)


def test_cache_memoises():
    calls = []

    @cache(maxsize=2)
    def square(x):
        calls.append(x)
        return x * x

    assert square(3) == 9 and square(3) == 9
    assert calls == [3]
    assert square.invalidate(3)
    assert not square.invalidate(3)
    square(3)
    assert calls == [3, 3]


def test_cache_evicts_least_recent():
    calls = []

    @cache(maxsize=2)
    def ident(x):
        calls.append(x)
        return x

    for x in (1, 2, 3, 1):
        ident(x)
    assert calls == [1, 2, 3, 1]


def test_cache_keys_and_stats():
    @cache()
    def pair(a, b=0):
        return (a, b)

    pair(1, b=2)
    pair(1, b=2)
    pair(1, 2)
    assert len(pair.cache) == 2
    assert pair.get_stats() == (1, 2)
    pair.clear()
    assert len(pair.cache) == 0


@pytest.mark.parametrize(
    "seconds, brief, expected",
    [
        (0.25, False, "250 milliseconds"),
        (0.25, True, "250ms"),
        (1, False, "1 second"),
        (65, False, "1 minute and 5 seconds"),
        (65, True, "1m 5s"),
        (3725, False, "1 hour and 2 minutes"),
        (90061, True, "1d 1h"),
    ],
)
def test_human_duration(seconds, brief, expected):
    assert human_duration(seconds, brief=brief) == expected


def test_human_join():
    assert human_join([]) == ""
    assert human_join(["a", "b"], final="and") == "a and b"
    assert human_join(["a", "b", "c"]) == "a, b and c"
    assert human_join(["a", "b", "c"], final="or") == "a, b or c"


def test_save_json_is_sorted_and_atomic(tmp_path):
    path = save_json(tmp_path / "out" / "record.json", {"b": 1, "a": [1.5, math.nan]})
    text = path.read_text(encoding="utf-8")
    assert text.index('"a"') < text.index('"b"')
    assert text.endswith("\n")
    assert "NaN" in text
    assert [p.name for p in path.parent.iterdir()] == ["record.json"]
    assert load_json(path)["b"] == 1


def test_save_json_replaces_existing(tmp_path):
    path = tmp_path / "record.json"
    save_json(path, {"run": 1})
    save_json(path, {"run": 2})
    assert json.loads(path.read_text(encoding="utf-8")) == {"run": 2}


def test_save_csv(tmp_path):
    rows = [{"lam": 0.0, "classification": "Growing"}, {"lam": -0.1}]
    path = save_csv(tmp_path / "modes.csv", ["lam", "classification"], rows)
    with open(path, newline="", encoding="utf-8") as fp:
        table = list(csv.reader(fp))
    assert table == [["lam", "classification"], ["0.0", "Growing"], ["-0.1", ""]]


def test_save_csv_header_only(tmp_path):
    path = save_csv(tmp_path / "empty.csv", ["axis", "value"], [])
    assert path.read_text(encoding="utf-8") == "axis,value\n"


def test_save_csv_keeps_full_precision(tmp_path):
    path = save_csv(tmp_path / "x.csv", ["x"], [{"x": 1 / 3}])
    assert float(path.read_text(encoding="utf-8").splitlines()[1]) == 1 / 3


def test_stopwatch_freezes_on_exit():
    with Stopwatch() as watch:
        pass
    elapsed = watch.elapsed
    assert elapsed >= 0
    assert watch.elapsed == elapsed
    assert str(watch).endswith("milliseconds")
