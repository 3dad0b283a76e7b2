"""Scheme files (JSON) and CSV exports.

Parameters and A values are stored as decimal strings and never pass
through binary floats, so a file can be re-certified bit for bit.
"""

from __future__ import annotations

import csv
import io
import json
from decimal import Decimal, InvalidOperation

from mpmath import mp, mpf

from . import __version__
from .errors import SchemeValidationError
from .optimizer import Scheme, SchemeRow
from .pipeline import INF, ParamSet, _dec
from .rigor import Direction, UpperScalar

VERSION = 1
ROW_KEYS = ("log_t0", "log_t1", "h1", "h2", "eta1", "eta2", "theta1", "theta2", "theta3", "A")
META_KEYS = ("seed", "budget", "precision", "h3_convention", "h0_convention", "variant", "tool_version")
CSV_HEADER = ("row",) + ROW_KEYS + ("A_direction",)
A_DIGITS = 6


def a_string(A):
    """UP-rounded 6-significant-digit decimal string for an UpperScalar."""
    return str(A.rounded(A_DIGITS))


def _row_dict(row):
    d = row.params.to_dict()
    d["A"] = a_string(row.A)
    return {k: d[k] for k in ROW_KEYS}


def scheme_to_dict(scheme, meta=None):
    meta = dict(meta or {})
    meta.setdefault("tool_version", __version__)
    return {
        "version": VERSION,
        "rows": [_row_dict(r) for r in scheme.rows],
        "meta": {k: meta.get(k) for k in META_KEYS},
    }


def dumps(doc):
    return json.dumps(doc, indent=2) + "\n"


def write_scheme(path, scheme, meta=None):
    text = dumps(scheme_to_dict(scheme, meta))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return text


def _parse_decimal(where, key, value):
    if not isinstance(value, str):
        raise SchemeValidationError(f"{where}: {key} must be a decimal string, got {type(value).__name__}")
    try:
        d = _dec(value)
    except InvalidOperation:
        raise SchemeValidationError(f"{where}: {key} = {value!r} is not a decimal") from None
    if d.is_nan() or (d.is_infinite() and key != "log_t1"):
        raise SchemeValidationError(f"{where}: {key} = {value!r} is not finite")
    return d


def doc_to_scheme(doc):
    """Validate a parsed scheme document and build a Scheme from it."""
    if not isinstance(doc, dict) or doc.get("version") != VERSION:
        raise SchemeValidationError(f"scheme file must be an object with version {VERSION}")
    rows = doc.get("rows")
    if not isinstance(rows, list) or not rows:
        raise SchemeValidationError("scheme file has no rows")
    out = []
    for i, r in enumerate(rows):
        if not isinstance(r, dict):
            raise SchemeValidationError(f"row {i} is not an object")
        missing = [k for k in ROW_KEYS if k not in r]
        if missing:
            raise SchemeValidationError(f"row {i} is missing {', '.join(missing)}")
        vals = {k: _parse_decimal(f"row {i}", k, r[k]) for k in ROW_KEYS}
        A = vals.pop("A")
        with mp.workdps(40):
            a_val = mpf(str(A))
        out.append(SchemeRow(ParamSet(**vals), UpperScalar(a_val, Direction.UP, 30)))
    meta = doc.get("meta") or {}
    return Scheme(out, out[0].log_t0, dict(meta))


def read_scheme(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemeValidationError(f"{path}: not valid JSON ({exc})") from None
    return doc_to_scheme(doc), doc


def scheme_csv(doc):
    """One CSV line per row with a header; A is the UP-rounded printed value."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(CSV_HEADER)
    for i, r in enumerate(doc["rows"]):
        w.writerow([i] + [r[k] for k in ROW_KEYS] + ["UP"])
    return buf.getvalue()


def plot_csv(scheme, step=Decimal("0.5"), beyond=Decimal(50)):
    """log t against the log of this scheme's bound and of every comparator."""
    from .crossover import COMPARATORS, THETA

    finite = [r.log_t1 for r in scheme.rows if not r.log_t1.is_infinite()]
    end = (max(finite) if finite else scheme.t_start) + beyond
    grid = set()
    L = scheme.t_start
    while L <= end:
        grid.add(L)
        L += step
    grid.update(r.log_t0 for r in scheme.rows)
    names = list(COMPARATORS)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["log_t", "log_bound"] + [f"log_{n}" for n in names])
    with mp.workdps(30):
        for L in sorted(grid):
            row = scheme.row_at(L)
            Lm = mpf(str(L))
            cells = [str(L), mp.nstr(mp.log(row.A.value) + THETA * Lm, 15)]
            for n in names:
                fn, start = COMPARATORS[n]
                cells.append(mp.nstr(fn(Lm), 15) if Lm >= start() else "")
            w.writerow(cells)
    return buf.getvalue()


def read_params(path):
    """A ParamSet from a JSON file holding the nine fields (optionally under "params")."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemeValidationError(f"{path}: not valid JSON ({exc})") from None
    if isinstance(doc, dict) and "params" in doc:
        doc = doc["params"]
    if not isinstance(doc, dict):
        raise SchemeValidationError(f"{path}: expected a JSON object")
    try:
        for k, v in doc.items():
            if isinstance(v, float):
                raise SchemeValidationError(f"{path}: {k} must be a decimal string, not a JSON number")
        return ParamSet.from_dict(doc)
    except (ValueError, InvalidOperation) as exc:
        raise SchemeValidationError(f"{path}: {exc}") from None
