import json
import math

import numpy as np
import pytest

from regsub.errors import MalformedInputError, RegsubError
from regsub.report import StatReport, column_specs, load_schema, read_report, write_report


def moment_rows():
    return [
        {"n": 6, "d": 3, "k": 1, "source": "oracle-exact", "samples": 0, "factorial_moment": 12 / 7,
         "factorial_moment_exact": "12/7", "factorial_moment_se": 0.0, "mu_hat": 1.3580246913580247,
         "ratio": 1.2623, "ratio_se": 0.0, "high_variance": np.bool_(False)},
        {"n": 500, "d": 10, "k": 2, "source": "monte-carlo", "samples": np.int64(40), "factorial_moment": 0.1,
         "factorial_moment_se": float("nan"), "mu_hat": 1.0, "ratio": 0.1, "ratio_se": 0.01,
         "high_variance": False},
    ]


def test_schema_covers_every_kind():
    kinds = set(load_schema()["experiments"])
    assert kinds == {"error-scaling", "triangle-normality", "switching-validation", "moment-profile", "hole-census"}
    allowed = set(load_schema()["provenance_values"])
    for kind in kinds:
        for col in column_specs(kind):
            assert col["provenance"] in allowed
            assert col["type"] in {"int", "float", "str", "bool"}


def test_empty_report_is_header_only():
    rep = StatReport("hole-census")
    lines = rep.to_csv().splitlines()
    assert len(lines) == 1
    assert lines[0].split(",")[:3] == ["n", "d", "k"]
    assert "runtime_s" not in lines[0]


def test_cleaning():
    rep = StatReport("moment-profile", moment_rows())
    assert rep.rows[0]["high_variance"] is False
    assert type(rep.rows[1]["samples"]) is int
    assert "factorial_moment_se" not in rep.rows[1]  # NaN dropped


def test_unknown_column():
    with pytest.raises(MalformedInputError):
        StatReport("moment-profile", [{"n": 6, "bogus": 1}])
    with pytest.raises(MalformedInputError):
        StatReport("no-such-kind")


def test_json_roundtrip(tmp_path):
    rep = StatReport("moment-profile", moment_rows(), {"seed": 1, "passed": True})
    path = write_report(rep, "json", tmp_path / "r.json")
    back = read_report(path)
    assert back.rows == rep.rows and back.metadata == rep.metadata
    doc = json.loads(path.read_text())
    assert doc["schema_version"] == 1
    assert {c["name"]: c["provenance"] for c in doc["columns"]}["factorial_moment"] == "mixed"


def test_csv_roundtrip(tmp_path):
    rep = StatReport("moment-profile", moment_rows())
    path = write_report(rep, "csv", tmp_path / "sub" / "r.csv")
    text = path.read_text()
    assert "1.7142857142857142" in text  # repr keeps every digit
    back = read_report(path, kind="moment-profile")
    assert back.rows == rep.rows
    with pytest.raises(MalformedInputError):
        read_report(path)


def test_float_repr_exact():
    rep = StatReport("moment-profile", moment_rows())
    back = float(rep.to_csv().splitlines()[1].split(",")[rep.columns.index("mu_hat")])
    assert back == 1.3580246913580247 and not math.isnan(back)


def test_io_error_has_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(RegsubError, match="file"):
        write_report(StatReport("hole-census"), "csv", blocker / "r.csv")
    with pytest.raises(RegsubError, match="missing.json"):
        read_report(tmp_path / "missing.json")


def test_bad_format(tmp_path):
    with pytest.raises(MalformedInputError):
        write_report(StatReport("hole-census"), "xml", tmp_path / "r.xml")
