"""JSON file formats with bit-exact floats.

Every document embeds a schema string.  Floats are written as binary64 hex
(`float.hex()`), which round-trips exactly and keeps golden files diffable;
readers also accept plain JSON numbers.  Large coefficient grids switch to a
base64 payload of little-endian binary64 (re, im) pairs in C order.
"""

from __future__ import annotations

import base64
import json
from typing import Any

import numpy as np

from .basis import BasisSpec, PartitionReport
from .errors import FormatError
from .filterbank import FilterBank, SampledBank, SplittingReport
from .frames import FrameReport
from .lattice import DigitSet, DilationMatrix
from .packets import CoefficientGrid, PacketTree

__all__ = [
    "FILTERBANK_SCHEMA",
    "GRID_SCHEMA",
    "BASIS_SCHEMA",
    "TREE_SCHEMA",
    "SPLITTING_SCHEMA",
    "PARTITION_SCHEMA",
    "FRAME_SCHEMA",
    "SAMPLED_SCHEMA",
    "canonical_json",
    "read_doc",
    "write_doc",
    "format_float",
    "parse_float",
    "filterbank_to_doc",
    "filterbank_from_doc",
    "grid_to_doc",
    "grid_from_doc",
    "basis_to_doc",
    "basis_from_doc",
    "tree_to_doc",
    "tree_from_doc",
    "splitting_report_to_doc",
    "partition_report_to_doc",
    "frame_report_to_doc",
    "sampled_bank_to_doc",
]

FILTERBANK_SCHEMA = "packetlab-filterbank-v1"
GRID_SCHEMA = "packetlab-grid-v1"
BASIS_SCHEMA = "packetlab-basis-v1"
TREE_SCHEMA = "packetlab-tree-v1"
SPLITTING_SCHEMA = "packetlab-splitting-report-v1"
PARTITION_SCHEMA = "packetlab-partition-report-v1"
FRAME_SCHEMA = "packetlab-frame-report-v1"
SAMPLED_SCHEMA = "packetlab-sampled-bank-v1"

# grids at or below this many complex entries stay human-readable JSON
_INLINE_LIMIT = 64


def format_float(x: float) -> str:
    return float(x).hex()


def parse_float(value: Any, where: str = "float") -> float:
    """Accept a plain JSON number or a binary64 hex string."""
    if isinstance(value, bool):
        raise FormatError(f"{where}: expected a number, got a bool")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float.fromhex(value)
        except ValueError:
            raise FormatError(f"{where}: bad float literal {value!r}") from None
    raise FormatError(f"{where}: expected a number or hex string")


def _complex_to_doc(z: complex) -> dict:
    return {"re": format_float(z.real), "im": format_float(z.imag)}


def _complex_from_doc(doc: Any, where: str) -> complex:
    if not isinstance(doc, dict) or "re" not in doc or "im" not in doc:
        raise FormatError(f"{where}: expected an object with re/im")
    return complex(parse_float(doc["re"], where), parse_float(doc["im"], where))


def _require(doc: Any, key: str, schema: str) -> Any:
    if not isinstance(doc, dict):
        raise FormatError(f"{schema}: document is not a JSON object")
    if key not in doc:
        raise FormatError(f"{schema}: missing key {key!r}")
    return doc[key]


def _int_field(doc: dict, key: str, schema: str) -> int:
    v = _require(doc, key, schema)
    if isinstance(v, bool) or not isinstance(v, int):
        raise FormatError(f"{schema}: {key} must be an integer")
    return v


def _check_schema(doc: Any, schema: str):
    got = _require(doc, "schema", schema)
    if got != schema:
        raise FormatError(f"expected schema {schema!r}, got {got!r}")


def _int_rows(value: Any, schema: str, key: str) -> list[list[int]]:
    if not isinstance(value, list) or not all(isinstance(r, list) for r in value):
        raise FormatError(f"{schema}: {key} must be a list of lists")
    out = []
    for row in value:
        if not all(isinstance(x, int) and not isinstance(x, bool) for x in row):
            raise FormatError(f"{schema}: {key} entries must be integers")
        out.append([int(x) for x in row])
    return out


def _matrix_from_doc(doc: dict, schema: str) -> DilationMatrix:
    rows = _int_rows(_require(doc, "matrix", schema), schema, "matrix")
    try:
        return DilationMatrix(rows)
    except Exception as exc:
        raise FormatError(f"{schema}: bad dilation matrix: {exc}") from exc


def canonical_json(doc: dict) -> str:
    """Deterministic text for a document built in fixed key order."""
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write_doc(doc: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(doc))


def read_doc(path, schema: str | None = None) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON: {exc}") from exc
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: top level must be a JSON object")
    if schema is not None:
        _check_schema(doc, schema)
    return doc


# -- filter banks -----------------------------------------------------------

def filterbank_to_doc(fb: FilterBank) -> dict:
    channels = []
    for r in fb.present_channels:
        entries = []
        for (row, col), (keys, vals) in sorted(fb.entries(r)):
            taps = [{"k": list(k), **_complex_to_doc(complex(v))}
                    for k, v in zip(keys.tolist(), vals)]
            entries.append({"l": row, "j": col, "taps": taps})
        channels.append({"r": r, "entries": entries})
    return {
        "schema": FILTERBANK_SCHEMA,
        "dim": fb.dim,
        "L": fb.L,
        "det_abs": fb.a,
        "matrix": fb.matrix.A.tolist(),
        "digits_A": [list(d) for d in fb.digits_a.digits],
        "digits_B": [list(d) for d in fb.digits_b.digits],
        "channels": channels,
    }


def filterbank_from_doc(doc: dict) -> FilterBank:
    _check_schema(doc, FILTERBANK_SCHEMA)
    s = FILTERBANK_SCHEMA
    matrix = _matrix_from_doc(doc, s)
    if _int_field(doc, "dim", s) != matrix.dim:
        raise FormatError(f"{s}: dim does not match the matrix")
    if _int_field(doc, "det_abs", s) != matrix.det_abs:
        raise FormatError(f"{s}: det_abs does not match the matrix")
    L = _int_field(doc, "L", s)
    try:
        digits_a = DigitSet.from_vectors(
            matrix, False, _int_rows(_require(doc, "digits_A", s), s, "digits_A"))
        digits_b = DigitSet.from_vectors(
            matrix, True, _int_rows(_require(doc, "digits_B", s), s, "digits_B"))
    except ValueError as exc:
        raise FormatError(f"{s}: bad digit set: {exc}") from exc
    chan_docs = _require(doc, "channels", s)
    if not isinstance(chan_docs, list):
        raise FormatError(f"{s}: channels must be a list")
    channels: dict[int, dict] = {}
    for cdoc in chan_docs:
        r = _int_field(cdoc, "r", s)
        if r in channels:
            raise FormatError(f"{s}: duplicate channel {r}")
        per: dict[tuple[int, int], dict] = {}
        entry_docs = _require(cdoc, "entries", s)
        if not isinstance(entry_docs, list):
            raise FormatError(f"{s}: entries must be a list")
        for edoc in entry_docs:
            row, col = _int_field(edoc, "l", s), _int_field(edoc, "j", s)
            taps = {}
            for tdoc in _require(edoc, "taps", s):
                k = tuple(_int_rows([_require(tdoc, "k", s)], s, "k")[0])
                if k in taps:
                    raise FormatError(f"{s}: duplicate tap {k}")
                taps[k] = _complex_from_doc(tdoc, f"{s}: tap {k}")
            per[(row, col)] = taps
        channels[r] = per
    try:
        return FilterBank(matrix, L, channels, digits_a=digits_a, digits_b=digits_b)
    except (ValueError, IndexError) as exc:
        raise FormatError(f"{s}: {exc}") from exc


# -- coefficient payloads ---------------------------------------------------

def _values_to_doc(values: np.ndarray, inline: bool | None = None) -> dict:
    vals = np.ascontiguousarray(values, dtype=np.complex128)
    if inline is None:
        inline = vals.size <= _INLINE_LIMIT
    if inline:
        rows = [[_complex_to_doc(complex(z)) for z in row] for row in vals]
        return {"encoding": "json", "values": rows}
    payload = base64.b64encode(vals.astype("<c16").tobytes()).decode("ascii")
    return {"encoding": "base64", "data": payload}


def _values_from_doc(doc: Any, L: int, cells: int, schema: str) -> np.ndarray:
    enc = _require(doc, "encoding", schema)
    if enc == "json":
        rows = _require(doc, "values", schema)
        if not isinstance(rows, list) or len(rows) != L:
            raise FormatError(f"{schema}: expected {L} coefficient rows")
        out = np.zeros((L, cells), dtype=np.complex128)
        for i, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != cells:
                raise FormatError(f"{schema}: row {i} must have {cells} entries")
            for j, z in enumerate(row):
                out[i, j] = _complex_from_doc(z, f"{schema}: value ({i},{j})")
        return out
    if enc == "base64":
        try:
            raw = base64.b64decode(_require(doc, "data", schema), validate=True)
        except Exception as exc:
            raise FormatError(f"{schema}: bad base64 payload") from exc
        if len(raw) != 16 * L * cells:
            raise FormatError(
                f"{schema}: payload holds {len(raw)} bytes, expected {16 * L * cells}")
        return np.frombuffer(raw, dtype="<c16").astype(np.complex128).reshape(L, cells)
    raise FormatError(f"{schema}: unknown encoding {enc!r}")


def grid_to_doc(grid: CoefficientGrid, inline: bool | None = None) -> dict:
    return {
        "schema": GRID_SCHEMA,
        "dim": grid.matrix.dim,
        "level": grid.level,
        "L": grid.L,
        "matrix": grid.matrix.A.tolist(),
        "digit_order": [list(d) for d in grid.digits.digits],
        "data": _values_to_doc(grid.values, inline),
    }


def grid_from_doc(doc: dict) -> CoefficientGrid:
    _check_schema(doc, GRID_SCHEMA)
    s = GRID_SCHEMA
    matrix = _matrix_from_doc(doc, s)
    if _int_field(doc, "dim", s) != matrix.dim:
        raise FormatError(f"{s}: dim does not match the matrix")
    level = _int_field(doc, "level", s)
    L = _int_field(doc, "L", s)
    if level < 0 or L < 1:
        raise FormatError(f"{s}: need level >= 0 and L >= 1")
    try:
        digits = DigitSet.from_vectors(
            matrix, False, _int_rows(_require(doc, "digit_order", s), s, "digit_order"))
    except ValueError as exc:
        raise FormatError(f"{s}: bad digit order: {exc}") from exc
    values = _values_from_doc(_require(doc, "data", s), L, matrix.det_abs**level, s)
    return CoefficientGrid(matrix, digits, level, values)


# -- bases and trees --------------------------------------------------------

def basis_to_doc(spec: BasisSpec) -> dict:
    return {
        "schema": BASIS_SCHEMA,
        "a": spec.a,
        "J": spec.J,
        "nodes": [[n, j] for n, j in spec.nodes],
        "provenance": spec.provenance,
    }


def basis_from_doc(doc: dict) -> BasisSpec:
    _check_schema(doc, BASIS_SCHEMA)
    s = BASIS_SCHEMA
    nodes = _int_rows(_require(doc, "nodes", s), s, "nodes")
    if any(len(nj) != 2 for nj in nodes):
        raise FormatError(f"{s}: nodes must be [n, j] pairs")
    prov = doc.get("provenance", "")
    if not isinstance(prov, str):
        raise FormatError(f"{s}: provenance must be a string")
    try:
        return BasisSpec(a=_int_field(doc, "a", s), J=_int_field(doc, "J", s),
                         nodes=tuple((n, j) for n, j in nodes), provenance=prov)
    except (ValueError, OverflowError) as exc:
        raise FormatError(f"{s}: {exc}") from exc


def tree_to_doc(tree: PacketTree, inline: bool | None = None) -> dict:
    nodes = []
    for (n, dep) in sorted(tree.nodes):
        nodes.append({"n": n, "depth": dep,
                      "data": _values_to_doc(tree.nodes[(n, dep)].values, inline)})
    return {
        "schema": TREE_SCHEMA,
        "dim": tree.bank.dim,
        "L": tree.L,
        "root_level": tree.root_level,
        "depth": tree.depth,
        "matrix": tree.bank.matrix.A.tolist(),
        "digit_order": [list(d) for d in tree.bank.digits_a.digits],
        "nodes": nodes,
    }


def tree_from_doc(doc: dict, fb: FilterBank) -> PacketTree:
    """Rebuild a tree against the bank used to produce it."""
    _check_schema(doc, TREE_SCHEMA)
    s = TREE_SCHEMA
    matrix = _matrix_from_doc(doc, s)
    if matrix != fb.matrix:
        raise FormatError(f"{s}: tree and bank use different dilation matrices")
    L = _int_field(doc, "L", s)
    if L != fb.L:
        raise FormatError(f"{s}: tree multiplicity {L} != bank multiplicity {fb.L}")
    root_level = _int_field(doc, "root_level", s)
    depth = _int_field(doc, "depth", s)
    if not 0 <= depth <= root_level:
        raise FormatError(f"{s}: need 0 <= depth <= root_level")
    order = _int_rows(_require(doc, "digit_order", s), s, "digit_order")
    if [list(d) for d in fb.digits_a.digits] != order:
        raise FormatError(f"{s}: tree digit order does not match the bank")
    a = matrix.det_abs
    nodes: dict[tuple[int, int], CoefficientGrid] = {}
    node_docs = _require(doc, "nodes", s)
    if not isinstance(node_docs, list):
        raise FormatError(f"{s}: nodes must be a list")
    for ndoc in node_docs:
        n, dep = _int_field(ndoc, "n", s), _int_field(ndoc, "depth", s)
        if not (0 <= dep <= depth and 0 <= n < a**dep):
            raise FormatError(f"{s}: node ({n}, {dep}) out of range")
        if (n, dep) in nodes:
            raise FormatError(f"{s}: duplicate node ({n}, {dep})")
        cells = a**(root_level - dep)
        values = _values_from_doc(_require(ndoc, "data", s), L, cells, s)
        nodes[(n, dep)] = CoefficientGrid(matrix, fb.digits_a, root_level - dep, values)
    return PacketTree(fb, root_level, depth, nodes)


# -- reports ----------------------------------------------------------------

def _opt_float(x: float | None) -> str | None:
    return None if x is None else format_float(x)


def splitting_report_to_doc(report: SplittingReport) -> dict:
    def opt_bool(x):
        return None if x is None else bool(x)

    return {
        "schema": SPLITTING_SCHEMA,
        "exact_pass": opt_bool(report.exact_pass),
        "max_defect_exact": _opt_float(report.max_defect_exact),
        "grid_pass": opt_bool(report.grid_pass),
        "max_defect_grid": _opt_float(report.max_defect_grid),
        "grid_size": None if report.grid_size is None else int(report.grid_size),
    }


def partition_report_to_doc(report: PartitionReport) -> dict:
    return {
        "schema": PARTITION_SCHEMA,
        "admissible": report.admissible,
        "exact_cover": report.exact_cover,
        "overlaps": [[list(p), list(q)] for p, q in report.overlaps],
        "gaps": [list(g) for g in report.gaps],
        "out_of_range": [list(n) for n in report.out_of_range],
        "covered": report.covered,
        "expected": report.expected,
    }


def frame_report_to_doc(report: FrameReport) -> dict:
    return {
        "schema": FRAME_SCHEMA,
        "grid_n": report.grid_n,
        "lambda_min": format_float(report.lambda_min),
        "lambda_max": format_float(report.lambda_max),
        "lipschitz_slack": format_float(report.lipschitz_slack),
        "unitary": report.unitary,
        "c1": format_float(report.c1),
        "c2": format_float(report.c2),
        "per_level": [[j, format_float(lo), format_float(hi)]
                      for j, lo, hi in report.per_level],
    }


def sampled_bank_to_doc(bank: SampledBank) -> dict:
    return {
        "schema": SAMPLED_SCHEMA,
        "dim": bank.matrix.dim,
        "L": bank.L,
        "grid_n": bank.grid_n,
        "matrix": bank.matrix.A.tolist(),
        "digits_A": [list(d) for d in bank.digits_a.digits],
        "digits_B": [list(d) for d in bank.digits_b.digits],
        "unitarity_defect": format_float(bank.unitarity_defect()),
        "points": _values_to_doc(bank.points.astype(np.complex128), inline=False),
        "h": _values_to_doc(bank.h.reshape(bank.h.shape[0], -1), inline=False),
    }
