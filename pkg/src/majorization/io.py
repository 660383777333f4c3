"""JSON and CSV formats for every artifact the CLI reads or writes.

Parsers raise :class:`InputError` naming the offending field.  The writer
prints floats with 17 significant digits so that round trips are lossless
and output is byte-for-byte deterministic.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .classical import StochasticMap
from .errors import DomainError, InputError
from .itpfi import ExperimentConfig
from .locc import BipartitePureState, LoccProtocol, Round, schmidt_decompose
from .quantum import Density, FactorModel, KrausChannel
from .stepfn import StepFunction, WeightedVector, weighted

# ---------------------------------------------------------------- writing


def _fmt(x: float) -> str:
    if math.isnan(x):
        raise DomainError("refusing to serialize NaN")
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _scalar(v) -> bool:
    return not isinstance(v, (list, tuple, dict, np.ndarray))


def _encode(obj, indent: int, level: int) -> str:
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," if indent else ", "
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{json.dumps(str(k), ensure_ascii=False)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{" + pad + (sep + pad).join(items) + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        # keep numeric rows (including rows of [re, im] pairs) on one line
        if all(_scalar(v) or (isinstance(v, (list, tuple)) and len(v) <= 2 and all(map(_scalar, v)))
               for v in obj):
            return "[" + ", ".join(_encode(v, 0, 0) for v in obj) + "]"
        items = [_encode(v, indent, level + 1) for v in obj]
        return "[" + pad + (sep + pad).join(items) + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 1) -> str:
    """Deterministic JSON with 17-significant-digit floats."""
    return _encode(obj, indent, 0) + "\n"


def write_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(["" if v is None else (_fmt(float(v)) if isinstance(v, (float, np.floating)) else v) for v in row])
    return buf.getvalue()


def complex_entry(z: complex):
    z = complex(z)
    return [z.real, z.imag]


def complex_matrix(M) -> list:
    return [[complex_entry(z) for z in row] for row in np.asarray(M)]


# ---------------------------------------------------------------- reading

def read_json(path) -> object:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(str(path), f"cannot read file ({exc.strerror})") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(str(path), f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _number(x, field: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float, str)):
        raise InputError(field, "expected a number")
    try:
        v = float(x)
    except ValueError:
        raise InputError(field, f"expected a number, got {x!r}") from None
    if math.isnan(v):
        raise InputError(field, "NaN is not allowed")
    return v


def _complex(x, field: str) -> complex:
    if isinstance(x, list):
        if len(x) != 2:
            raise InputError(field, "complex entries are [re, im]")
        return complex(_number(x[0], field + "[0]"), _number(x[1], field + "[1]"))
    return complex(_number(x, field))


def _require(d, key: str, where: str):
    if not isinstance(d, dict):
        raise InputError(where or "<root>", "expected a JSON object")
    if key not in d:
        raise InputError(f"{where}.{key}" if where else key, "missing")
    return d[key]


def _list(x, field: str) -> list:
    if not isinstance(x, list):
        raise InputError(field, "expected a list")
    return x


def _pairs(x, field: str) -> list[tuple[float, float]]:
    out = []
    for i, p in enumerate(_list(x, field)):
        f = f"{field}[{i}]"
        if not isinstance(p, list) or len(p) != 2:
            raise InputError(f, "expected a [value, width] pair")
        out.append((_number(p[0], f + "[0]"), _number(p[1], f + "[1]")))
    return out


def _wrap(field: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except InputError:
        raise
    except DomainError as exc:
        raise InputError(field, str(exc)) from None


def parse_step_function(d, field: str = "pieces") -> StepFunction:
    pieces = d["pieces"] if isinstance(d, dict) and "pieces" in d else d
    return _wrap(field, StepFunction.from_pieces, _pairs(pieces, field))


def step_function_to_dict(f: StepFunction) -> dict:
    return {"pieces": [[v, w] for v, w in f.pieces]}


def parse_weighted(d, field: str = "values") -> WeightedVector:
    if isinstance(d, list):
        return _wrap(field, weighted, [_number(v, f"{field}[{i}]") for i, v in enumerate(d)])
    vals = [_number(v, f"values[{i}]") for i, v in enumerate(_list(_require(d, "values", ""), "values"))]
    masses = d.get("masses")
    if masses is not None:
        masses = [_number(v, f"masses[{i}]") for i, v in enumerate(_list(masses, "masses"))]
        if len(masses) != len(vals):
            raise InputError("masses", "need one mass per value")
    tail = d.get("infinite_tail", False)
    if not isinstance(tail, bool):
        raise InputError("infinite_tail", "expected true or false")
    return _wrap("values", weighted, vals, masses, tail)


def weighted_to_dict(f: WeightedVector) -> dict:
    return {"values": f.values.tolist(), "masses": f.masses.tolist(), "infinite_tail": f.space.infinite_tail}


def parse_factor(d, field: str = "factor") -> FactorModel:
    kind = _require(d, "kind", field)
    aliases = {"TypeI": "I_n", "TypeIinf": "I_inf", "TypeII1": "II_1", "TypeIIinf": "II_inf"}
    kind = aliases.get(kind, kind)
    kw = {"trace_unit": _number(d.get("trace_unit", 1.0), field + ".trace_unit")}
    if "n" in d:
        kw["n"] = int(_number(d["n"], field + ".n"))
    if "trace_of_identity" in d and kind == "II_1":
        kw["trace_of_identity"] = _number(d["trace_of_identity"], field + ".trace_of_identity")
    return _wrap(field, FactorModel, kind, kw.get("n"), kw["trace_unit"], kw.get("trace_of_identity"))


def parse_matrix(x, field: str) -> np.ndarray:
    rows = _list(x, field)
    M = [[_complex(z, f"{field}[{i}][{j}]") for j, z in enumerate(_list(r, f"{field}[{i}]"))]
         for i, r in enumerate(rows)]
    if rows and len({len(r) for r in M}) != 1:
        raise InputError(field, "rows have different lengths")
    return np.array(M, dtype=complex).reshape(len(M), len(M[0]) if M else 0)


def parse_density(d) -> Density:
    factor = parse_factor(d["factor"]) if isinstance(d, dict) and "factor" in d else None
    if isinstance(d, dict) and "scale" in d:
        return _wrap("scale", Density.from_scale, parse_step_function(d["scale"], "scale"), factor)
    M = parse_matrix(_require(d, "matrix", ""), "matrix")
    unit = d.get("trace_unit")
    if unit is not None:
        unit = _number(unit, "trace_unit")
    return _wrap("matrix", lambda: Density(matrix=M, factor=factor, trace_unit=unit))


def density_to_dict(rho: Density) -> dict:
    if rho.is_matrix:
        return {"matrix": complex_matrix(rho.matrix), "trace_unit": rho.trace_unit, "factor": rho.factor.to_dict()}
    return {"scale": [[v, w] for v, w in rho.scale.pieces], "factor": rho.factor.to_dict()}


def _dims(d) -> tuple[int, int]:
    dims = _list(_require(d, "dims", ""), "dims")
    if len(dims) != 2:
        raise InputError("dims", "expected [d_A, d_B]")
    out = tuple(int(_number(x, f"dims[{i}]")) for i, x in enumerate(dims))
    if min(out) < 1:
        raise InputError("dims", "dimensions must be positive")
    return out


def parse_state(d) -> BipartitePureState:
    if not isinstance(d, dict):
        raise InputError("<root>", "a state is a JSON object with 'schmidt' or 'vector'")
    dims = _dims(d)
    if "schmidt" in d:
        triples = []
        for k, t in enumerate(_list(d["schmidt"], "schmidt")):
            f = f"schmidt[{k}]"
            if not isinstance(t, list) or len(t) != 3:
                raise InputError(f, "expected [coefficient, a_index, b_index]")
            triples.append((_number(t[0], f + "[0]"), int(_number(t[1], f + "[1]")), int(_number(t[2], f + "[2]"))))
        return _wrap("schmidt", BipartitePureState.from_schmidt, triples, dims)
    vec = [_complex(z, f"vector[{i}]") for i, z in enumerate(_list(_require(d, "vector", ""), "vector"))]
    return _wrap("vector", schmidt_decompose, np.array(vec), *dims)


def state_to_dict(psi: BipartitePureState) -> dict:
    return {"vector": [complex_entry(z) for z in psi.vector], "dims": list(psi.dims)}


def parse_stochastic_map(d) -> StochasticMap:
    M = parse_matrix(_require(d, "matrix", ""), "matrix")
    if np.abs(M.imag).max(initial=0) > 0:
        raise InputError("matrix", "stochastic maps are real")
    mu = [_number(x, f"source_masses[{i}]") for i, x in enumerate(_list(_require(d, "source_masses", ""), "source_masses"))]
    nu = [_number(x, f"target_masses[{i}]") for i, x in enumerate(_list(_require(d, "target_masses", ""), "target_masses"))]
    return _wrap("matrix", StochasticMap, M.real, mu, nu)


def parse_channel(d) -> KrausChannel:
    ks = _list(_require(d, "kraus", ""), "kraus")
    return _wrap("kraus", KrausChannel, tuple(parse_matrix(k, f"kraus[{i}]") for i, k in enumerate(ks)))


def channel_to_dict(ch: KrausChannel) -> dict:
    return {"kraus": [complex_matrix(k) for k in ch.kraus]}


def protocol_to_dict(P: LoccProtocol) -> dict:
    rounds = []
    for rnd in P.rounds:
        insts = []
        for prefix, inst in rnd.instruments.items():
            insts.append({"transcript": None if prefix is None else list(prefix),
                          "outcomes": {str(k): complex_matrix(K) for k, K in inst.items()}})
        rounds.append({"party": rnd.party, "instruments": insts})
    return {"dims": list(P.dims), "rounds": rounds}


def parse_protocol(d) -> LoccProtocol:
    dims = _dims(d)
    rounds = []
    for r, rd in enumerate(_list(_require(d, "rounds", ""), "rounds")):
        f = f"rounds[{r}]"
        party = _require(rd, "party", f)
        insts = {}
        for k, inst in enumerate(_list(_require(rd, "instruments", f), f + ".instruments")):
            g = f"{f}.instruments[{k}]"
            tr = inst.get("transcript") if isinstance(inst, dict) else None
            key = None if tr is None else tuple(str(x) for x in _list(tr, g + ".transcript"))
            outs = _require(inst, "outcomes", g)
            if not isinstance(outs, dict):
                raise InputError(g + ".outcomes", "expected an object mapping labels to matrices")
            insts[key] = {lab: parse_matrix(K, f"{g}.outcomes.{lab}") for lab, K in outs.items()}
        rounds.append(Round(party, insts))
    return _wrap("rounds", LoccProtocol, rounds, dims)


def parse_config(d) -> ExperimentConfig:
    if not isinstance(d, dict):
        raise InputError("<root>", "experiment config is a JSON object")
    known = {"lambda", "n_list", "targets", "seed", "restarts", "catalyst"}
    for k in d:
        if k not in known:
            raise InputError(k, "unknown config key")
    kw = {}
    if "lambda" in d:
        kw["lam"] = _number(d["lambda"], "lambda")
    if "n_list" in d:
        kw["n_list"] = [int(_number(x, f"n_list[{i}]")) for i, x in enumerate(_list(d["n_list"], "n_list"))]
    if "targets" in d:
        kw["targets"] = [str(t) for t in _list(d["targets"], "targets")]
    for k in ("seed", "restarts"):
        if k in d:
            kw[k] = int(_number(d[k], k))
    if "catalyst" in d:
        kw["catalyst"] = str(d["catalyst"])
    return _wrap("config", ExperimentConfig, **kw)


def config_to_dict(c: ExperimentConfig) -> dict:
    return {"lambda": c.lam, "n_list": list(c.n_list), "targets": list(c.targets), "seed": c.seed,
            "restarts": c.restarts, "catalyst": c.catalyst}


def parse_any(d):
    """Dispatch on the JSON shape: state, density, step function, or weighted vector."""
    if isinstance(d, list):
        if d and all(isinstance(p, list) for p in d):
            return parse_step_function(d)
        return parse_weighted(d)
    if not isinstance(d, dict):
        raise InputError("<root>", "expected a JSON object or list")
    if "schmidt" in d or "vector" in d:
        return parse_state(d)
    if "source_masses" in d:
        return parse_stochastic_map(d)
    if "kraus" in d:
        return parse_channel(d)
    if "rounds" in d:
        return parse_protocol(d)
    if "matrix" in d or "scale" in d:
        return parse_density(d)
    if "pieces" in d:
        return parse_step_function(d)
    if "values" in d:
        return parse_weighted(d)
    raise InputError("<root>", "unrecognized object; expected one of schmidt, vector, matrix, scale, pieces, values")
