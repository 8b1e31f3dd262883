"""JSON model documents and numeric output formatting."""

import hashlib
import json
import math

import numpy as np

from .errors import ModelFormatError
from .model import LatticeModel, MmbmModel, validate, with_killing

LATTICE_KEYS = {"type", "phases", "blocks", "extra_killing"}
MMBM_KEYS = {"type", "phases", "drift", "sigma2", "Q", "extra_killing"}


def _matrix(x, n, name):
    a = np.asarray(x, dtype=float)
    if a.shape != (n, n):
        raise ModelFormatError(f"{name} must be a {n}x{n} array of arrays")
    if not np.all(np.isfinite(a)):
        raise ModelFormatError(f"{name} has non-finite entries")
    return a


def _vector(x, n, name):
    a = np.asarray(x, dtype=float)
    if a.shape != (n,):
        raise ModelFormatError(f"{name} must have length {n}")
    if not np.all(np.isfinite(a)):
        raise ModelFormatError(f"{name} has non-finite entries")
    return a


def model_from_dict(doc, strict=True):
    if not isinstance(doc, dict) or "type" not in doc:
        raise ModelFormatError("model document must be an object with a 'type' key")
    kind = doc["type"]
    keys = {"lattice": LATTICE_KEYS, "mmbm": MMBM_KEYS}.get(kind)
    if keys is None:
        raise ModelFormatError(f"unknown model type {kind!r}")
    unknown = set(doc) - keys
    if unknown:
        raise ModelFormatError(f"unknown keys: {sorted(unknown)}")
    try:
        n = int(doc["phases"])
    except (KeyError, TypeError, ValueError):
        raise ModelFormatError("'phases' must be a positive integer") from None
    if n < 1:
        raise ModelFormatError("'phases' must be a positive integer")
    if kind == "lattice":
        raw = doc.get("blocks")
        if not isinstance(raw, dict):
            raise ModelFormatError("'blocks' must map level changes to matrices")
        blocks = {}
        for k, v in raw.items():
            try:
                m = int(k)
            except ValueError:
                raise ModelFormatError(f"bad block key {k!r}") from None
            blocks[m] = _matrix(v, n, f"block {k}")
        model = LatticeModel.from_dict(blocks)
    else:
        for k in ("drift", "sigma2", "Q"):
            if k not in doc:
                raise ModelFormatError(f"missing key {k!r}")
        model = MmbmModel(_vector(doc["drift"], n, "drift"),
                          _vector(doc["sigma2"], n, "sigma2"),
                          _matrix(doc["Q"], n, "Q"))
    if doc.get("extra_killing") is not None:
        model = with_killing(model, _vector(doc["extra_killing"], n, "extra_killing"))
    return validate(model, strict=strict)


def model_to_dict(model):
    if isinstance(model, LatticeModel):
        return {"type": "lattice", "phases": model.n_phases,
                "blocks": {str(m): model.A(m).tolist()
                           for m in range(-1, model.max_jump + 1)}}
    return {"type": "mmbm", "phases": model.n_phases, "drift": model.drift.tolist(),
            "sigma2": model.variance.tolist(), "Q": model.Q.tolist()}


def load_model(path, strict=True):
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"cannot parse model file: {exc}") from None
    return model_from_dict(doc, strict=strict), hashlib.sha256(data).hexdigest()


def fmt_float(x):
    """17 significant digits: exact round trip through text."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError("non-finite value in output")
    s = format(x, ".17g")
    if "e" not in s and "." not in s and "n" not in s:
        s += ".0"
    return s


def to_jsonable(obj):
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def dumps(obj, indent=2):
    """JSON with every float printed to 17 significant digits."""
    return _dump(to_jsonable(obj), indent, 0)


def _dump(obj, indent, depth):
    pad = " " * (indent * (depth + 1))
    end = " " * (indent * depth)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_dump(v, indent, depth + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (list, dict)) for v in obj):
            return "[" + ", ".join(_dump(v, indent, depth + 1) for v in obj) + "]"
        items = [pad + _dump(v, indent, depth + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")
