"""Strict JSON readers for families, datasets, covers and grids; byte-stable CSV writer."""

from __future__ import annotations

import io
import json
import math
from numbers import Integral, Real
from pathlib import Path

from .complexity import FamilyCover
from .core import ModelFamily, as_dataset, validate_family
from .errors import InputFormatError

REPORT_COLUMNS = (
    "bound_id",
    "mode",
    "n",
    "lambda",
    "rho",
    "gamma",
    "alpha",
    "t",
    "delta",
    "lhs",
    "lhs_se",
    "rhs",
    "slack",
    "verdict",
)


def _reject_constant(name):
    raise InputFormatError(f"non-finite JSON constant {name} is not allowed")


def _no_duplicates(pairs):
    obj = {}
    for k, v in pairs:
        if k in obj:
            raise InputFormatError(f"duplicate key {k!r}")
        obj[k] = v
    return obj


def load_json(path) -> object:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh, parse_constant=_reject_constant, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _check_keys(obj, required: set[str], optional: set[str], where: str):
    if not isinstance(obj, dict):
        raise InputFormatError(f"{where} must be a JSON object")
    unknown = set(obj) - required - optional
    if unknown:
        raise InputFormatError(f"{where}: unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise InputFormatError(f"{where}: missing keys {sorted(missing)}")


def _is_int(x) -> bool:
    return isinstance(x, Integral) and not isinstance(x, bool)


def _real_list(x, where: str) -> list[float]:
    if not isinstance(x, list) or not all(isinstance(v, Real) and not isinstance(v, bool) for v in x):
        raise InputFormatError(f"{where} must be an array of numbers")
    return [float(v) for v in x]


def parse_family(obj, where: str = "family") -> ModelFamily:
    _check_keys(obj, {"space_size", "models"}, {"truth"}, where)
    M = obj["space_size"]
    if not _is_int(M) or M < 1:
        raise InputFormatError(f"{where}: space_size must be a positive integer")
    models = obj["models"]
    if not isinstance(models, list) or not models:
        raise InputFormatError(f"{where}: models must be a nonempty array")
    ids, priors, probs = [], [], []
    for i, m in enumerate(models):
        _check_keys(m, {"id", "prior", "probs"}, set(), f"{where}.models[{i}]")
        if not isinstance(m["id"], str):
            raise InputFormatError(f"{where}.models[{i}].id must be a string")
        if not isinstance(m["prior"], Real) or isinstance(m["prior"], bool):
            raise InputFormatError(f"{where}.models[{i}].prior must be a number")
        p = _real_list(m["probs"], f"{where}.models[{i}].probs")
        if len(p) != M:
            raise InputFormatError(f"{where}.models[{i}].probs has {len(p)} entries, space_size is {M}")
        ids.append(m["id"])
        priors.append(float(m["prior"]))
        probs.append(p)
    truth = None
    if "truth" in obj:
        truth = _real_list(obj["truth"], f"{where}.truth")
        if len(truth) != M:
            raise InputFormatError(f"{where}.truth has {len(truth)} entries, space_size is {M}")
    return validate_family(probs, priors, ids=ids, truth=truth)


def read_family(path) -> ModelFamily:
    return parse_family(load_json(path), str(path))


def family_to_json(family: ModelFamily) -> dict:
    obj = {"space_size": family.space_size}
    if family.truth is not None:
        obj["truth"] = [float(v) for v in family.truth]
    obj["models"] = [
        {"id": i, "prior": float(pi), "probs": [float(v) for v in p]}
        for i, pi, p in zip(family.ids, family.prior, family.probs)
    ]
    return obj


def write_family(family: ModelFamily, path):
    Path(path).write_text(json.dumps(family_to_json(family), indent=1) + "\n", encoding="utf-8")


def read_dataset(path, space_size: int):
    obj = load_json(path)
    _check_keys(obj, {"samples"}, set(), str(path))
    s = obj["samples"]
    if not isinstance(s, list) or not all(_is_int(v) for v in s):
        raise InputFormatError(f"{path}: samples must be an array of integers")
    return as_dataset(s, space_size)


def read_cover(path, family: ModelFamily) -> FamilyCover:
    """Cover file ``{"blocks": [[model ids], ...]}``."""
    obj = load_json(path)
    _check_keys(obj, {"blocks"}, set(), str(path))
    blocks = obj["blocks"]
    if not isinstance(blocks, list) or not all(isinstance(b, list) for b in blocks):
        raise InputFormatError(f"{path}: blocks must be an array of arrays of model ids")
    try:
        idx = [[family.index(i) for i in b] for b in blocks]
    except (KeyError, ValueError) as exc:
        raise InputFormatError(f"{path}: {exc}") from None
    return FamilyCover.of(idx, family.size)


def read_grid(path) -> dict:
    obj = load_json(path)
    if not isinstance(obj, dict):
        raise InputFormatError(f"{path}: grid must be a JSON object of parameter arrays")
    for k, v in obj.items():
        vals = v if isinstance(v, list) else [v]
        if not all(isinstance(x, Real) and not isinstance(x, bool) for x in vals):
            raise InputFormatError(f"{path}: grid entry {k!r} must hold numbers")
    return obj


def format_value(x) -> str:
    """17 significant digits; ``inf``/``-inf`` tokens; empty cell for a missing value."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool,)):
        return "true" if x else "false"
    if _is_int(x):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def emit_rows(header, rows) -> bytes:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(format_value(v) for v in r) + "\n")
    return buf.getvalue().encode("utf-8")


def report_row(rep) -> tuple:
    return (rep.bound, rep.mode, rep.n, rep.lam, rep.rho, rep.gamma, rep.alpha, rep.t, rep.delta,
            rep.lhs, rep.lhs_se, rep.rhs, rep.slack, rep.verdict)


def emit_report(reports) -> bytes:
    """Bound reports as CSV in the fixed column order, LF line endings."""
    return emit_rows(REPORT_COLUMNS, (report_row(r) for r in reports))
