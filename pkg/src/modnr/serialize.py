"""JSON interchange for algebra elements, frames, states and operators.

Complex numbers are ``[re, im]`` pairs; matrices are lists of rows.  Operator
blocks may also be given as a flat row-major list of ``(k n_j)^2`` entries.
Python floats serialize with ``repr``, so a dump/load round trip is exact.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .calg import AlgebraElement, AlgebraSignature, State
from .hmodule import Frame
from .oprep import ModuleOperator


class ParseError(ValueError):
    """Malformed input; the message names the offending field."""


def complex_to_json(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def matrix_to_json(m) -> list:
    return [[complex_to_json(z) for z in row] for row in np.asarray(m)]


def _parse_complex(v, where: str) -> complex:
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        z = complex(v)
    elif isinstance(v, (list, tuple)) and len(v) == 2 and all(
        isinstance(c, (int, float)) and not isinstance(c, bool) for c in v
    ):
        z = complex(v[0], v[1])
    else:
        raise ParseError(f"{where}: expected [re, im], got {v!r}")
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ParseError(f"{where}: non-finite entry")
    return z


def _parse_matrix(v, rows: int, cols: int, where: str) -> np.ndarray:
    if not isinstance(v, list):
        raise ParseError(f"{where}: expected a list")
    if len(v) == rows * cols and (rows * cols == 0 or not (
        isinstance(v[0], list) and len(v[0]) == cols and isinstance(v[0][0], list)
    )):
        flat = v
    else:
        if len(v) != rows:
            raise ParseError(f"{where}: expected {rows} rows, got {len(v)}")
        flat = []
        for i, row in enumerate(v):
            if not isinstance(row, list) or len(row) != cols:
                raise ParseError(f"{where}[{i}]: expected a row of {cols} entries")
            flat.extend(row)
    out = np.array([_parse_complex(z, f"{where}[{i // cols}][{i % cols}]") for i, z in enumerate(flat)],
                   dtype=complex)
    return out.reshape(rows, cols)


def _parse_sig(obj, where="sig") -> AlgebraSignature:
    if "sig" not in obj:
        raise ParseError("missing field 'sig'")
    sig = obj["sig"]
    if not isinstance(sig, list) or not sig or not all(isinstance(n, int) and n >= 1 for n in sig):
        raise ParseError(f"{where}: expected a non-empty list of positive integers, got {sig!r}")
    return AlgebraSignature(tuple(sig))


def _parse_k(obj) -> int:
    k = obj.get("k", 1)
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise ParseError(f"k: expected a positive integer, got {k!r}")
    return k


def _blocks(obj, sig, count_name="blocks"):
    if count_name not in obj:
        raise ParseError(f"missing field '{count_name}'")
    blocks = obj[count_name]
    if not isinstance(blocks, list) or len(blocks) != len(sig):
        raise ParseError(f"{count_name}: expected {len(sig)} blocks")
    return blocks


def element_to_json(a: AlgebraElement) -> dict:
    return {"sig": a.signature.to_list(), "blocks": [matrix_to_json(b) for b in a.blocks]}


def element_from_json(obj) -> AlgebraElement:
    _require_object(obj)
    sig = _parse_sig(obj)
    blocks = _blocks(obj, sig)
    return AlgebraElement(sig, tuple(_parse_matrix(b, n, n, f"blocks[{j}]")
                                     for j, (n, b) in enumerate(zip(sig, blocks))))


def frame_to_json(x: Frame) -> dict:
    return {"sig": x.signature.to_list(), "k": x.k, "blocks": [matrix_to_json(b) for b in x.blocks]}


def frame_from_json(obj) -> Frame:
    _require_object(obj)
    sig, k = _parse_sig(obj), _parse_k(obj)
    blocks = _blocks(obj, sig)
    return Frame(sig, k, tuple(_parse_matrix(b, k * n, n, f"blocks[{j}]")
                               for j, (n, b) in enumerate(zip(sig, blocks))))


def state_to_json(rho: State) -> dict:
    return {"sig": rho.signature.to_list(), "densities": [matrix_to_json(d) for d in rho.densities]}


def state_from_json(obj) -> State:
    _require_object(obj)
    sig = _parse_sig(obj)
    dens = _blocks(obj, sig, "densities")
    try:
        return State(sig, tuple(_parse_matrix(d, n, n, f"densities[{j}]")
                                for j, (n, d) in enumerate(zip(sig, dens))), tol=1e-9)
    except ParseError:
        raise
    except ValueError as exc:
        raise ParseError(f"densities: {exc}") from None


def operator_to_json(t: ModuleOperator) -> dict:
    return {"sig": t.signature.to_list(), "k": t.k, "blocks": [matrix_to_json(b) for b in t.blocks]}


def operator_from_json(obj) -> ModuleOperator:
    _require_object(obj)
    sig, k = _parse_sig(obj), _parse_k(obj)
    blocks = _blocks(obj, sig)
    return ModuleOperator(sig, k, tuple(_parse_matrix(b, k * n, k * n, f"blocks[{j}]")
                                        for j, (n, b) in enumerate(zip(sig, blocks))))


def _require_object(obj):
    if not isinstance(obj, dict):
        raise ParseError(f"expected a JSON object, got {type(obj).__name__}")


def load_operator(path) -> ModuleOperator:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    return operator_from_json(obj)


def dump_operator(t: ModuleOperator, path):
    with open(path, "w") as fh:
        json.dump(operator_to_json(t), fh)


def dumps(obj) -> str:
    """Stable-keyed JSON text used for every report."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"
