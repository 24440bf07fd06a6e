"""JSON emission and parsing helpers.

All floats are written as decimal literals with 17 significant digits so
that binary64 values survive a write/read round trip bit for bit.
"""

import hashlib
import json
import math

import numpy as np

from .errors import InvalidArgumentError


def format_float(x):
    """Decimal text for a finite binary64 with 17 significant digits."""
    x = float(x)
    if not math.isfinite(x):
        raise InvalidArgumentError("cannot serialize non-finite float %r" % x)
    text = format(x, ".17g")
    # ".17g" may produce bare integers like "1"; keep them valid JSON numbers.
    return text


def dumps(obj, indent=None):
    """Serialize to JSON text, routing floats through format_float."""
    out = []
    _emit(obj, out, indent, 0)
    return "".join(out)


def _emit(obj, out, indent, level):
    if isinstance(obj, dict):
        _emit_container(obj.items(), out, indent, level, "{", "}", True)
    elif isinstance(obj, (list, tuple)):
        _emit_container(obj, out, indent, level, "[", "]", False)
    elif isinstance(obj, bool) or obj is None:
        out.append(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    else:
        raise InvalidArgumentError("cannot serialize %r" % type(obj))


def _emit_container(items, out, indent, level, open_ch, close_ch, is_map):
    items = list(items)
    if not items:
        out.append(open_ch + close_ch)
        return
    if indent is None:
        pre, joiner, post = "", ",", ""
    else:
        pad = " " * (indent * (level + 1))
        pre, joiner, post = "\n" + pad, ",\n" + pad, "\n" + " " * (indent * level)
    out.append(open_ch + pre)
    for i, item in enumerate(items):
        if i:
            out.append(joiner)
        if is_map:
            key, value = item
            if not isinstance(key, str):
                raise InvalidArgumentError("JSON object keys must be strings")
            out.append(json.dumps(key) + (": " if indent else ":"))
            _emit(value, out, indent, level + 1)
        else:
            _emit(item, out, indent, level + 1)
    out.append(post + close_ch)


def sha256_text(text):
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_json(path, obj, indent=2):
    """Write obj as JSON, return the sha256 digest of the file text."""
    text = dumps(obj, indent=indent) + "\n"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return sha256_text(text)


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _real_grid(arr):
    return [[float(v) for v in row] for row in np.asarray(arr, dtype=float)]


def matrix_to_obj(data, kind="generic"):
    """Schema for a complex matrix: kind, shape, and re/im grids."""
    a = np.asarray(data, dtype=complex)
    if a.ndim != 2:
        raise InvalidArgumentError("matrix payload must be 2-D")
    return {
        "kind": str(kind),
        "rows": int(a.shape[0]),
        "cols": int(a.shape[1]),
        "re": _real_grid(a.real),
        "im": _real_grid(a.imag),
    }


def matrix_from_obj(obj):
    """Inverse of matrix_to_obj; returns (ndarray, kind)."""
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float)
        kind = str(obj.get("kind", "generic"))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidArgumentError("malformed matrix JSON: %s" % exc) from exc
    if re.shape != (rows, cols) or im.shape != (rows, cols):
        raise InvalidArgumentError("matrix JSON shape mismatch")
    return re + 1j * im, kind


def pair_to_obj(d, x, y):
    """Schema for a pair of circulant generators of a d x 2d frame."""
    x = np.asarray(x, dtype=complex).ravel()
    y = np.asarray(y, dtype=complex).ravel()
    if x.shape != (d,) or y.shape != (d,):
        raise InvalidArgumentError("generator length disagrees with d")
    return {
        "kind": "circulant-generators",
        "d": int(d),
        "t": 2,
        "x_re": [float(v) for v in x.real],
        "x_im": [float(v) for v in x.imag],
        "y_re": [float(v) for v in y.real],
        "y_im": [float(v) for v in y.imag],
    }


def pair_from_obj(obj):
    """Inverse of pair_to_obj; returns (d, x, y)."""
    try:
        if obj.get("kind") != "circulant-generators":
            raise InvalidArgumentError("not a circulant-generators document")
        d = int(obj["d"])
        if int(obj.get("t", 2)) != 2:
            raise InvalidArgumentError("only 2-generator documents supported")
        x = np.asarray(obj["x_re"], dtype=float) + 1j * np.asarray(obj["x_im"], dtype=float)
        y = np.asarray(obj["y_re"], dtype=float) + 1j * np.asarray(obj["y_im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidArgumentError("malformed generator JSON: %s" % exc) from exc
    if x.shape != (d,) or y.shape != (d,):
        raise InvalidArgumentError("generator length disagrees with d")
    return d, x, y


def witness_to_obj(sigma, c, m, t):
    c = np.asarray(c, dtype=complex).ravel()
    return {
        "sigma": [int(v) for v in sigma],
        "c_re": [float(v) for v in c.real],
        "c_im": [float(v) for v in c.imag],
        "m": int(m),
        "t": int(t),
    }


def witness_from_obj(obj):
    """Returns (sigma, c, m, t)."""
    try:
        sigma = [int(v) for v in obj["sigma"]]
        c_re = np.asarray(obj["c_re"], dtype=float)
        c_im = np.asarray(obj["c_im"], dtype=float)
        m, t = int(obj["m"]), int(obj["t"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidArgumentError("malformed witness JSON: %s" % exc) from exc
    if c_re.shape != c_im.shape:
        raise InvalidArgumentError("witness scalar parts disagree in length")
    c = c_re + 1j * c_im
    if len(sigma) != len(c):
        raise InvalidArgumentError("witness length mismatch")
    return sigma, c, m, t
