"""
Reading and writing sequences, coefficients, tables and reports.

Sequences are CSV files with header ``t,theta`` (log-modulus and argument in
radians), coefficient vectors have header ``n,re,im``.  Reports are JSON
with sorted keys; non-finite floats are written as the strings ``"inf"``,
``"-inf"`` and ``"nan"``.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from pathlib import Path

import numpy as np

from .exceptions import SequenceError
from .geometry import PointSequence
from .product import CoefficientVector
from .reference import ReferenceSequence, log_evaluation_norm, log_monomial_norm
from .weight import RadialWeight, SpaceParams

__all__ = [
    "read_sequence",
    "write_sequence",
    "read_coefficients",
    "write_coefficients",
    "reference_csv",
    "norm_table_csv",
    "gram_csv",
    "table_csv",
    "to_jsonable",
    "dumps_json",
    "write_text",
]


def _rows(path, header):
    """Yield ``(line_number, row)`` after checking the header."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise SequenceError(f"{path}: empty file") from None
        got = [c.strip() for c in first]
        if got != list(header):
            raise SequenceError(f"{path}:1: expected header {','.join(header)}, got {','.join(got)}")
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            yield reader.line_num, row


def _floats(path, line, row, n):
    if len(row) != n:
        raise SequenceError(f"{path}:{line}: expected {n} fields, got {len(row)}")
    try:
        return [float(c) for c in row]
    except ValueError:
        raise SequenceError(f"{path}:{line}: non-numeric field in {row!r}") from None


def read_sequence(path) -> PointSequence:
    """Load a ``t,theta`` CSV; rows may come in any order."""
    t, th = [], []
    for line, row in _rows(path, ("t", "theta")):
        a, b = _floats(path, line, row, 2)
        if math.isnan(a) or math.isnan(b) or a == math.inf or not math.isfinite(b):
            raise SequenceError(f"{path}:{line}: invalid point ({a}, {b})")
        t.append(a)
        th.append(b)
    if not t:
        raise SequenceError(f"{path}: no points")
    return PointSequence(t, th)


def _csv_text(header, rows) -> str:
    buf = _io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for r in rows:
        wr.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


def write_sequence(path, g: PointSequence) -> None:
    write_text(path, _csv_text(("t", "theta"), zip(g.t, g.theta)))


def read_coefficients(path, p: float = 2.0) -> CoefficientVector:
    """Load an ``n,re,im`` CSV."""
    idx, vals = [], []
    for line, row in _rows(path, ("n", "re", "im")):
        n, re, im = _floats(path, line, row, 3)
        if n != int(n) or n < 0:
            raise SequenceError(f"{path}:{line}: index must be a non-negative integer")
        if int(n) in idx:
            raise SequenceError(f"{path}:{line}: repeated index {int(n)}")
        idx.append(int(n))
        vals.append(complex(re, im))
    return CoefficientVector(np.array(idx, dtype=int), np.array(vals, dtype=complex), p)


def write_coefficients(path, v: CoefficientVector) -> None:
    rows = [(int(n), float(c.real), float(c.imag)) for n, c in zip(v.index, v.values)]
    write_text(path, _csv_text(("n", "re", "im"), rows))


def reference_csv(ref: ReferenceSequence, w: RadialWeight, sp: SpaceParams) -> str:
    """``n,y,log_sigma_norm`` with the log-norm of the evaluation at each reference point."""
    rows = [(n + ref.offset, float(y), log_evaluation_norm(w, sp, float(y), ref=ref).log_mag)
            for n, y in enumerate(ref.y)]
    return _csv_text(("n", "y", "log_sigma_norm"), rows)


def norm_table_csv(w: RadialWeight, sp: SpaceParams, n_max: int) -> str:
    """``n,log_norm`` with :math:`\\log\\|z^n\\|_{\\varphi,p}`."""
    rows = [(n, log_monomial_norm(w, sp, n).log_mag) for n in range(int(n_max) + 1)]
    return _csv_text(("n", "log_norm"), rows)


def gram_csv(G: np.ndarray) -> str:
    """Rows of a complex matrix with real and imaginary parts interleaved."""
    M = G.shape[1]
    header = [f"{part}_{k}" for k in range(M) for part in ("re", "im")]
    rows = [[x for z in row for x in (float(z.real), float(z.imag))] for row in G]
    return _csv_text(header, rows)


def table_csv(header, rows) -> str:
    return _csv_text(header, rows)


def to_jsonable(obj):
    """Plain JSON types; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, complex):
        return {"re": to_jsonable(obj.real), "im": to_jsonable(obj.imag)}
    return obj


def dumps_json(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_text(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")
