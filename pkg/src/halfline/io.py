"""JSON and CSV file formats.

Every float is written with 17 significant digits so that reading a file
back reproduces the in-memory values bit for bit.  The writer is a small
deterministic serializer: identical objects always give identical bytes.

Schemas
-------
potential  ``{label, x_max, n, values[], support_radius?}``; CSV ``x,q``
jost       ``{k_grid: {x_min, x_max, n}, f_re[], f_im[], fp_re[], fp_im[], s_re[], s_im[], bound_states: [{k, s}]}``
scattering ``{k_max, n_k, s_re[], s_im[], bound_states: [{k, s}], kappa?}``
F          ``{x_min, x_max, n, values[], f_s[], f_d[]}``
kernel     ``{x_max, n, rows: [[A(x_i, x_j), j >= i], ...]}``; CSV ``x,y,A``
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any

import numpy as np

from .errors import HalflineError, ValidationError
from .forward import JostData, TransformKernel
from .numerics import Grid, SampledFunction
from .potential import Potential
from .scattering import FFunction, ScatteringData

__all__ = [
    "DataIOError",
    "SchemaError",
    "dumps",
    "write_json",
    "read_json",
    "potential_to_dict",
    "potential_from_dict",
    "read_potential",
    "write_potential",
    "read_potential_csv",
    "jost_to_dict",
    "scattering_to_dict",
    "scattering_from_dict",
    "read_scattering",
    "F_to_dict",
    "F_from_dict",
    "read_F",
    "kernel_to_dict",
    "kernel_from_dict",
    "read_kernel",
    "write_kernel_csv",
]


class DataIOError(HalflineError):
    """File missing, unreadable or not parseable."""


class SchemaError(ValidationError):
    """Parsed document lacks a field or holds an invalid value."""

    def __init__(self, source: str, field: str, message: str):
        super().__init__(f"{source}: field '{field}': {message}")
        self.source = source
        self.field = field


# --- serializer -------------------------------------------------------------

def _float(v: float) -> str:
    if math.isnan(v):
        return "NaN"
    if math.isinf(v):
        return "Infinity" if v > 0 else "-Infinity"
    s = format(v, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def _encode(obj: Any, level: int, out: list) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, np.ndarray):
        _encode(obj.tolist(), level, out)
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        pad = "  " * (level + 1)
        out.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            out.append(f"{pad}{json.dumps(str(k))}: ")
            _encode(v, level + 1, out)
            out.append(",\n" if i < len(obj) - 1 else "\n")
        out.append("  " * level + "}")
    elif isinstance(obj, (list, tuple)):
        if obj and all(isinstance(v, (dict, list, tuple)) for v in obj):
            pad = "  " * (level + 1)
            out.append("[\n")
            for i, v in enumerate(obj):
                out.append(pad)
                _encode(v, level + 1, out)
                out.append(",\n" if i < len(obj) - 1 else "\n")
            out.append("  " * level + "]")
        else:
            out.append("[")
            for i, v in enumerate(obj):
                if i:
                    out.append(", ")
                _encode(v, level + 1, out)
            out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    out: list = []
    _encode(obj, 0, out)
    out.append("\n")
    return "".join(out)


def write_json(obj: Any, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(dumps(obj))
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc
    return path


def read_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataIOError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise SchemaError(str(path), "<root>", "expected a JSON object")
    return doc


def _field(doc: dict, name: str, source: str, kind=float, optional: bool = False):
    if name not in doc or doc[name] is None:
        if optional:
            return None
        raise SchemaError(source, name, "missing")
    v = doc[name]
    try:
        if kind is list:
            arr = np.asarray(v, dtype=float)
            if arr.ndim != 1:
                raise ValueError("expected a flat array")
            return arr
        if kind is int:
            if isinstance(v, bool) or int(v) != v:
                raise ValueError("expected an integer")
            return int(v)
        return kind(v)
    except (TypeError, ValueError) as exc:
        raise SchemaError(source, name, str(exc)) from exc


def _pairs(doc: dict, source: str) -> tuple:
    raw = doc.get("bound_states", [])
    if not isinstance(raw, list):
        raise SchemaError(source, "bound_states", "expected a list")
    out = []
    for j, item in enumerate(raw):
        if not isinstance(item, dict):
            raise SchemaError(source, f"bound_states[{j}]", "expected {k, s}")
        out.append((_field(item, "k", f"{source}: bound_states[{j}]"), _field(item, "s", f"{source}: bound_states[{j}]")))
    return tuple(out)


def _build(source: str, field: str, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except HalflineError:
        raise
    except (TypeError, ValueError) as exc:
        raise SchemaError(source, field, str(exc)) from exc


# --- potential ---------------------------------------------------------------

def potential_to_dict(p: Potential) -> dict:
    d = {"label": p.label, "x_max": p.x_max, "n": p.grid.n, "values": p.values}
    if p.support_radius is not None:
        d["support_radius"] = p.support_radius
    return d


def potential_from_dict(doc: dict, source: str = "<potential>") -> Potential:
    x_max = _field(doc, "x_max", source)
    n = _field(doc, "n", source, int)
    values = _field(doc, "values", source, list)
    if values.size != n + 1:
        raise SchemaError(source, "values", f"expected n+1 = {n + 1} samples, got {values.size}")
    a = _field(doc, "support_radius", source, optional=True)
    label = str(doc.get("label", ""))
    grid = _build(source, "n", Grid, 0.0, x_max, n)
    q = _build(source, "values", SampledFunction, grid, values)
    return _build(source, "support_radius", Potential, q, a, label)


def read_potential_csv(path, rel_tol: float = 1e-9) -> Potential:
    """Two columns ``x, q`` on a uniform grid starting at 0 (a header row is allowed)."""
    path = Path(path)
    source = str(path)
    try:
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
    except OSError as exc:
        raise DataIOError(f"cannot read {path}: {exc}") from exc
    if rows and not _is_number(rows[0][0]):
        rows = rows[1:]
    try:
        data = np.array([[float(r[0]), float(r[1])] for r in rows])
    except (ValueError, IndexError) as exc:
        raise SchemaError(source, "x,q", f"rows must hold two numbers ({exc})") from exc
    if data.shape[0] < 9:
        raise SchemaError(source, "x", "need at least 9 samples")
    x, q = data[:, 0], data[:, 1]
    n = x.size - 1
    h = (x[-1] - x[0]) / n
    if abs(x[0]) > rel_tol * max(1.0, abs(x[-1])):
        raise SchemaError(source, "x", "grid must start at x = 0")
    if np.max(np.abs(x - (x[0] + h * np.arange(n + 1)))) > rel_tol * max(1.0, abs(x[-1])):
        raise SchemaError(source, "x", "grid is not uniform")
    return _build(source, "q", Potential.from_samples, q, float(x[-1]), None, path.stem)


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def read_potential(path) -> Potential:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return read_potential_csv(path)
    return potential_from_dict(read_json(path), str(path))


def write_potential(p: Potential, path) -> Path:
    return write_json(potential_to_dict(p), path)


# --- Jost / scattering ------------------------------------------------------------

def _grid_dict(g: Grid) -> dict:
    return {"x_min": g.x_min, "x_max": g.x_max, "n": g.n}


def jost_to_dict(jd: JostData) -> dict:
    return {
        "k_grid": _grid_dict(jd.k_grid),
        "f_re": jd.f.real, "f_im": jd.f.imag,
        "fp_re": jd.fprime0.real, "fp_im": jd.fprime0.imag,
        "s_re": jd.S.real, "s_im": jd.S.imag,
        "f0_vanishes": jd.f0_vanishes,
        "bound_states": [{"k": b.k, "s": b.s} for b in jd.bound_states],
    }


def scattering_to_dict(sd: ScatteringData) -> dict:
    d = {"k_max": sd.k_max, "n_k": sd.k_grid.n, "s_re": sd.s_values.real, "s_im": sd.s_values.imag,
         "bound_states": [{"k": k, "s": s} for k, s in sd.bound_states]}
    if sd.index_kappa is not None:
        d["kappa"] = sd.index_kappa
    return d


def scattering_from_dict(doc: dict, source: str = "<scattering>") -> ScatteringData:
    k_max = _field(doc, "k_max", source)
    n_k = _field(doc, "n_k", source, int)
    re = _field(doc, "s_re", source, list)
    im = _field(doc, "s_im", source, list)
    if re.size != n_k + 1 or im.size != n_k + 1:
        raise SchemaError(source, "s_re/s_im", f"expected n_k+1 = {n_k + 1} samples")
    kappa = _field(doc, "kappa", source, int, optional=True)
    grid = _build(source, "n_k", Grid, -k_max, k_max, n_k)
    return _build(source, "s_re", ScatteringData, grid, re + 1j * im, _pairs(doc, source), kappa)


def read_scattering(path) -> ScatteringData:
    return scattering_from_dict(read_json(path), str(path))


# --- F ---------------------------------------------------------------------------

def F_to_dict(F: FFunction) -> dict:
    return {"x_min": F.grid.x_min, "x_max": F.grid.x_max, "n": F.grid.n,
            "values": F.values, "f_s": F.f_s, "f_d": F.f_d}


def F_from_dict(doc: dict, source: str = "<F>") -> FFunction:
    x_min = _field(doc, "x_min", source)
    x_max = _field(doc, "x_max", source)
    n = _field(doc, "n", source, int)
    vals = _field(doc, "values", source, list)
    fs = _field(doc, "f_s", source, list)
    fd = _field(doc, "f_d", source, list)
    grid = _build(source, "n", Grid, x_min, x_max, n)
    return _build(source, "values", FFunction, grid, vals, fs, fd)


def read_F(path) -> FFunction:
    return F_from_dict(read_json(path), str(path))


# --- kernel ------------------------------------------------------------------------

def kernel_to_dict(A: TransformKernel) -> dict:
    n = A.grid.n
    doc = {"x_max": A.grid.x_max, "n": n, "rows": [A.row(i) for i in range(n + 1)]}
    if A.beyond is not None:
        # A(x_i, X + m h) for m = 1..n-i; the last row is empty
        doc["beyond_rows"] = [A.beyond[i, 1:n - i + 1] for i in range(n + 1)]
    return doc


def kernel_from_dict(doc: dict, source: str = "<kernel>") -> TransformKernel:
    x_max = _field(doc, "x_max", source)
    n = _field(doc, "n", source, int)
    rows = doc.get("rows")
    if not isinstance(rows, list) or len(rows) != n + 1:
        raise SchemaError(source, "rows", f"expected {n + 1} rows")
    V = np.zeros((n + 1, n + 1))
    for i, r in enumerate(rows):
        r = np.asarray(r, dtype=float)
        if r.shape != (n + 1 - i,):
            raise SchemaError(source, f"rows[{i}]", f"expected {n + 1 - i} values")
        V[i, i:] = r
    beyond = None
    if "beyond_rows" in doc:
        brows = doc["beyond_rows"]
        if not isinstance(brows, list) or len(brows) != n + 1:
            raise SchemaError(source, "beyond_rows", f"expected {n + 1} rows")
        beyond = np.zeros((n + 1, n + 1))
        beyond[:, 0] = V[:, n]
        for i, r in enumerate(brows):
            r = np.asarray(r, dtype=float)
            if r.shape != (n - i,):
                raise SchemaError(source, f"beyond_rows[{i}]", f"expected {n - i} values")
            beyond[i, 1:n - i + 1] = r
    grid = _build(source, "n", Grid, 0.0, x_max, n)
    return _build(source, "rows", TransformKernel, grid, V, beyond=beyond)


def read_kernel(path) -> TransformKernel:
    return kernel_from_dict(read_json(path), str(path))


def write_kernel_csv(A: TransformKernel, path) -> Path:
    """Triples ``x, y, A(x, y)`` for ``y >= x``."""
    path = Path(path)
    x = A.x
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            fh.write("x,y,A\n")
            for i in range(A.grid.n + 1):
                xi = _float(float(x[i]))
                for j in range(i, A.grid.n + 1):
                    fh.write(f"{xi},{_float(float(x[j]))},{_float(float(A.values[i, j]))}\n")
    except OSError as exc:
        raise DataIOError(f"cannot write {path}: {exc}") from exc
    return path
