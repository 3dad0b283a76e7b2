import csv
import io
import json

import pytest

from subweyl.errors import SchemeValidationError
from subweyl.optimizer import SearchConfig, build_scheme
from subweyl.schemefile import (CSV_HEADER, doc_to_scheme, dumps, plot_csv, read_params, read_scheme,
                                scheme_csv, scheme_to_dict, write_scheme)


@pytest.fixture(scope="module")
def small_scheme():
    return build_scheme(800, [875], SearchConfig(budget=80, seed=1))


def test_round_trip_is_byte_identical(tmp_path, small_scheme):
    p = tmp_path / "s.json"
    text = write_scheme(p, small_scheme, {"seed": 1, "budget": 80})
    scheme, doc = read_scheme(p)
    assert dumps(scheme_to_dict(scheme, doc["meta"])) == text == p.read_text()


def test_csv_shape(small_scheme):
    doc = scheme_to_dict(small_scheme)
    rows = list(csv.reader(io.StringIO(scheme_csv(doc))))
    assert tuple(rows[0]) == CSV_HEADER and len(CSV_HEADER) == 12
    assert len(rows) == 1 + len(small_scheme.rows)
    assert all(len(r) == 12 and r[-1] == "UP" for r in rows[1:])


def test_plot_csv_has_all_comparators(small_scheme):
    rows = list(csv.reader(io.StringIO(plot_csv(small_scheme))))
    assert rows[0][:2] == ["log_t", "log_bound"] and len(rows[0]) == 5
    assert len(rows) > 10


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(version=2),
    lambda d: d.update(rows=[]),
    lambda d: d["rows"][0].pop("h1"),
    lambda d: d["rows"][0].update(h1=1.5),
    lambda d: d["rows"][0].update(eta1="abc"),
    lambda d: d["rows"][-1].update(log_t1="900"),
])
def test_malformed_documents(small_scheme, mutate):
    doc = json.loads(dumps(scheme_to_dict(small_scheme)))
    mutate(doc)
    with pytest.raises(SchemeValidationError):
        doc_to_scheme(doc)


def test_read_params_rejects_json_numbers(tmp_path):
    p = tmp_path / "p.json"
    p.write_text(json.dumps({"log_t0": "875", "log_t1": "inf", "h1": 1.01563, "h2": "1.0027", "eta1": "1.59875",
                             "eta2": "0.828895", "theta1": "1.14283", "theta2": "261658",
                             "theta3": "2.53087e-11"}))
    with pytest.raises(SchemeValidationError):
        read_params(p)


def test_read_params_not_json(tmp_path):
    p = tmp_path / "p.json"
    p.write_text("{")
    with pytest.raises(SchemeValidationError):
        read_params(p)
