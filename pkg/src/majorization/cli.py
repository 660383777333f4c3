"""Command-line front end.

Exit codes: 0 success, 1 negative decision, 2 input error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import classical, io, itpfi, locc, quantum
from .errors import (
    DomainError,
    InputError,
    MajorizationError,
    NotConvertible,
    NotExtendable,
    NotMajorized,
    NotSubmajorized,
    NumericalError,
)
from .stepfn import DOMINANCE_TOL, StepFunction, WeightedVector, dominates, lorenz, rearrange, weighted

EXIT_OK, EXIT_NO, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class _Output:
    def __init__(self, path):
        self.path = path
        self.parts: list[str] = []

    def write(self, text: str):
        self.parts.append(text if text.endswith("\n") else text + "\n")

    def flush(self):
        text = "".join(self.parts)
        if self.path:
            Path(self.path).write_text(text)
        else:
            sys.stdout.write(text)


def _load(path: str):
    try:
        return io.parse_any(io.read_json(path))
    except InputError as exc:
        if exc.field == path:
            raise
        raise InputError(f"{path}:{exc.field}", str(exc).split(": ", 1)[-1]) from None


def _scale(obj) -> StepFunction:
    if isinstance(obj, StepFunction):
        return obj
    if isinstance(obj, WeightedVector):
        return rearrange(obj)
    if isinstance(obj, quantum.Density):
        return quantum.spectral_scale(obj)
    if isinstance(obj, locc.BipartitePureState):
        return obj.schmidt_scale()
    raise InputError("<root>", f"a {type(obj).__name__} has no spectral scale")


def _state(obj, path) -> locc.BipartitePureState:
    if not isinstance(obj, locc.BipartitePureState):
        raise InputError(path, "expected a bipartite pure state ('schmidt' or 'vector')")
    return obj


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


# ---------------------------------------------------------------- commands

def cmd_lorenz(args, out: _Output) -> int:
    L = lorenz(_scale(_load(args.input)))
    if args.format == "csv":
        out.write(io.write_csv(["t", "L"], L.knots))
    else:
        out.write(io.dumps({"knots": [list(k) for k in L.knots]}))
    return EXIT_OK


def cmd_majorize(args, out: _Output) -> int:
    a, b = _scale(_load(args.a)), _scale(_load(args.b))
    na, nb = Path(args.a).stem, Path(args.b).stem
    La, Lb = lorenz(a), lorenz(b)
    if args.weak:
        ab, ba = dominates(La, Lb, args.tol), dominates(Lb, La, args.tol)
        sym = "≻_w"
    else:
        same = abs(a.total - b.total) <= args.tol * max(a.total, b.total, 1.0)
        ab = same and dominates(La, Lb, args.tol)
        ba = same and dominates(Lb, La, args.tol)
        sym = "≻"
    if ab:
        verdict = f"{na} {sym} {nb}"
    elif ba:
        verdict = f"{nb} {sym} {na}"
    else:
        verdict = f"{na} and {nb} are incomparable"
    if args.format == "json":
        out.write(io.dumps({"relation": sym, "a_over_b": ab, "b_over_a": ba, "verdict": verdict}))
    elif args.format == "csv":
        out.write(io.write_csv(["a", "b", "relation", "a_over_b", "b_over_a"], [[na, nb, sym, ab, ba]]))
    else:
        out.write(verdict)
    return EXIT_OK if ab else EXIT_NO


def _atoms(f) -> WeightedVector:
    return weighted(f.values, f.widths) if isinstance(f, StepFunction) else f


def _synth(args, out: _Output, unital: bool) -> int:
    a, b = _load(args.a), _load(args.b)
    try:
        if isinstance(a, quantum.Density) and isinstance(b, quantum.Density):
            fn = quantum.synthesize_ds_channel if unital else quantum.synthesize_dss_channel
            out.write(io.dumps(io.channel_to_dict(fn(a, b, args.tol))))
        elif isinstance(a, (WeightedVector, StepFunction)) and isinstance(b, (WeightedVector, StepFunction)):
            fn = classical.synthesize_ds if unital else classical.synthesize_dss
            out.write(io.dumps(fn(_atoms(a), _atoms(b), args.tol).to_dict()))
        else:
            raise InputError("<root>", "synthesis needs two weighted vectors or two matrix densities")
    except (NotMajorized, NotSubmajorized, NotExtendable) as exc:
        print(f"no map: {exc}", file=sys.stderr)
        return EXIT_NO
    return EXIT_OK


def cmd_synth_ds(args, out):
    return _synth(args, out, unital=True)


def cmd_synth_dss(args, out):
    return _synth(args, out, unital=False)


def cmd_convert(args, out: _Output) -> int:
    psi, phi = _state(_load(args.source), args.source), _state(_load(args.target), args.target)
    ok = locc.locc_convertible(psi, phi, args.tol)
    fid = 1.0 if ok else locc.locc_conversion_fidelity(psi, phi)
    if args.format == "json":
        out.write(io.dumps({"convertible": ok, "fidelity": fid}))
    elif args.format == "csv":
        out.write(io.write_csv(["convertible", "fidelity"], [[ok, fid]]))
    else:
        out.write(("convertible" if ok else "not convertible") + f" (optimal fidelity {_fmt(fid)})")
    if ok and args.protocol:
        P = locc.synthesize_nielsen_protocol(psi, phi, args.tol)
        Path(args.protocol).write_text(io.dumps(io.protocol_to_dict(P)))
    return EXIT_OK if ok else EXIT_NO


def cmd_simulate(args, out: _Output) -> int:
    psi = _state(_load(args.state), args.state)
    P = _load(args.protocol)
    if not isinstance(P, locc.LoccProtocol):
        raise InputError(args.protocol, "expected a protocol with 'rounds'")
    target = _state(_load(args.target), args.target) if args.target else None
    res = locc.simulate_protocol(psi, P)
    fids = res.fidelities(target) if target else [None] * len(res.branches)
    rows = [["/".join(b.transcript), b.probability, f] for b, f in zip(res.branches, fids)]
    if args.format == "json":
        out.write(io.dumps({"branches": [{"transcript": list(b.transcript), "probability": b.probability,
                                          "fidelity": f, "vector": [io.complex_entry(z) for z in b.vector]}
                                         for b, f in zip(res.branches, fids)],
                            "pruned_mass": res.pruned_mass, "total_probability": res.total_probability}))
    elif args.format == "csv":
        out.write(io.write_csv(["transcript", "probability", "fidelity"], rows))
    else:
        for t, p, f in rows:
            out.write(f"{t}\tp={_fmt(p)}" + ("" if f is None else f"\tfidelity={_fmt(f)}"))
        out.write(f"total\tp={_fmt(res.total_probability)}\tpruned={_fmt(res.pruned_mass)}")
    return EXIT_OK


def cmd_monotones(args, out: _Output) -> int:
    psi = _state(_load(args.state), args.state)
    m = locc.monotones(psi, tuple(args.alpha))
    if args.format == "json":
        out.write(io.dumps(m.to_dict()))
    else:
        rows = [[repr(a), v] for a, v in m.renyi.items()]
        if args.format == "csv":
            out.write(io.write_csv(["alpha", "S_alpha"], rows + [["rank", m.schmidt_rank]]))
        else:
            for a, v in rows:
                out.write(f"S_{a}\t{_fmt(v)}")
            out.write(f"rank\t{_fmt(m.schmidt_rank)}")
    return EXIT_OK


def cmd_slocc(args, out: _Output) -> int:
    psi, phi = _state(_load(args.source), args.source), _state(_load(args.target), args.target)
    ok = locc.slocc_convertible(psi, phi)
    f2 = locc.slocc_fidelity(psi, phi)
    if args.format == "json":
        out.write(io.dumps({"convertible": ok, "fidelity_squared": f2}))
    elif args.format == "csv":
        out.write(io.write_csv(["convertible", "fidelity_squared"], [[ok, f2]]))
    else:
        out.write(("convertible" if ok else "not convertible") + f" (F^2 = {_fmt(f2)})")
    return EXIT_OK if ok else EXIT_NO


_NAMED_TARGETS = {"bell": StepFunction.flat(0.5, 2.0), "product": StepFunction.flat(1.0, 1.0)}


def _target_scale(spec: str) -> StepFunction:
    if spec in _NAMED_TARGETS:
        return _NAMED_TARGETS[spec]
    return _scale(_load(spec))


def parse_n_list(text: str) -> list[int]:
    """``"1..8"``, ``"1,2,5"`` or ``"4"``."""
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError("--n", f"expected a range like 1..8 or a list like 1,2,5 (got {text!r})") from None


def cmd_powers(args, out: _Output) -> int:
    cfg = io.parse_config(io.read_json(args.config)) if args.config else itpfi.ExperimentConfig()
    lam = args.lam if args.lam is not None else cfg.lam
    n_list = parse_n_list(args.n) if args.n else cfg.n_list
    targets = [args.target] if args.target else cfg.targets
    catalyst = args.catalyst or cfg.catalyst
    restarts = args.restarts if args.restarts is not None else cfg.restarts
    seed = args.seed if args.seed is not None else cfg.seed
    cfg = itpfi.ExperimentConfig(lam, n_list, targets, seed, restarts, catalyst)
    src = _target_scale(args.source)
    rows = []
    for target in cfg.targets:
        pts = itpfi.trivialization_trend(cfg.lam, src, _target_scale(target), cfg.n_list, cfg.catalyst)
        for p in pts:
            beta = None
            if p.n <= args.beta_max_n:
                state = itpfi.powers_state(itpfi.PowersModel(cfg.lam, p.n))
                beta = itpfi.chsh_seesaw_pure(state, restarts=cfg.restarts, seed=cfg.seed).beta
            rows.append((target, p, beta))
    if args.format == "json":
        out.write(io.dumps({"config": io.config_to_dict(cfg), "points": [
            {"target": t, "n": p.n, "fidelity": p.fidelity, "fixed": p.fixed, "distilled": p.distilled, "beta": b}
            for t, p, b in rows]}))
    else:
        multi = len(cfg.targets) > 1
        header = (["target"] if multi else []) + ["n", "fidelity", "beta"]
        out.write(io.write_csv(header, [([t] if multi else []) + [p.n, p.fidelity, b] for t, p, b in rows]))
    return EXIT_OK


def cmd_bell(args, out: _Output) -> int:
    obj = _load(args.input)
    if isinstance(obj, locc.BipartitePureState):
        res = itpfi.chsh_seesaw_pure(obj, args.restarts, args.iters, args.seed or 0)
    elif isinstance(obj, quantum.Density) and obj.is_matrix:
        if not args.dims:
            raise InputError("--dims", "a density needs local dimensions, e.g. --dims 2 2")
        res = itpfi.chsh_seesaw(obj.matrix, tuple(args.dims), args.restarts, args.iters, args.seed or 0)
    else:
        raise InputError(args.input, "expected a state or a density matrix")
    if args.format == "json":
        out.write(io.dumps({"beta": res.beta, "restarts": res.restarts}))
    elif args.format == "csv":
        out.write(io.write_csv(["beta"], [[res.beta]]))
    else:
        out.write(_fmt(res.beta))
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive, default=DOMINANCE_TOL, help="Lorenz slack (default 1e-9)")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--format", choices=("text", "json", "csv"), default=None)
    common.add_argument("--out", default=None, help="write output here instead of stdout")

    p = argparse.ArgumentParser(prog="majorization", description="Majorization, entanglement conversion and Powers-state experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("lorenz", parents=[common], help="Lorenz curve of a vector, density or state")
    s.add_argument("input")
    s.set_defaults(fn=cmd_lorenz, default_format="json")

    s = sub.add_parser("majorize", parents=[common], help="decide a ≻ b (or ≻_w with --weak)")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--weak", action="store_true")
    s.set_defaults(fn=cmd_majorize, default_format="text")

    for name, fn in (("synth-ds", cmd_synth_ds), ("synth-dss", cmd_synth_dss)):
        s = sub.add_parser(name, parents=[common], help="synthesize a map taking a to b")
        s.add_argument("a")
        s.add_argument("b")
        s.set_defaults(fn=fn, default_format="json")

    s = sub.add_parser("convert", parents=[common], help="LOCC (Nielsen) decision")
    s.add_argument("source")
    s.add_argument("target")
    s.add_argument("--protocol", help="write the LOCC protocol here when convertible")
    s.set_defaults(fn=cmd_convert, default_format="text")

    s = sub.add_parser("simulate", parents=[common], help="enumerate protocol branches")
    s.add_argument("state")
    s.add_argument("protocol")
    s.add_argument("--target", help="state to report per-branch fidelity against")
    s.set_defaults(fn=cmd_simulate, default_format="text")

    s = sub.add_parser("monotones", parents=[common], help="Renyi entropies and Schmidt rank")
    s.add_argument("state")
    s.add_argument("--alpha", type=float, nargs="+", default=list(locc.DEFAULT_ALPHAS))
    s.set_defaults(fn=cmd_monotones, default_format="text")

    s = sub.add_parser("slocc", parents=[common], help="SLOCC decision and fidelity")
    s.add_argument("source")
    s.add_argument("target")
    s.set_defaults(fn=cmd_slocc, default_format="text")

    s = sub.add_parser("powers", parents=[common], help="trivialization trend on Powers truncations")
    s.add_argument("--lambda", dest="lam", type=float, default=None)
    s.add_argument("--n", default=None, help="copies, e.g. 1..8 or 1,2,5")
    s.add_argument("--target", default=None, help="bell, product, or a state/scale file")
    s.add_argument("--source", default="product", help="bell, product, or a state/scale file")
    s.add_argument("--catalyst", choices=itpfi.CATALYST_MODES, default=None)
    s.add_argument("--restarts", type=int, default=None)
    s.add_argument("--beta-max-n", type=int, default=4, help="largest n for the CHSH column")
    s.add_argument("--config", default=None, help="experiment config JSON")
    s.set_defaults(fn=cmd_powers, default_format="csv")

    s = sub.add_parser("bell", parents=[common], help="CHSH value by seesaw")
    s.add_argument("input")
    s.add_argument("--dims", type=int, nargs=2, default=None)
    s.add_argument("--restarts", type=int, default=16)
    s.add_argument("--iters", type=int, default=200)
    s.set_defaults(fn=cmd_bell, default_format="text")
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.format is None:
        args.format = args.default_format
    out = _Output(args.out)
    try:
        code = args.fn(args, out)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NotConvertible as exc:
        print(f"not convertible: {exc}", file=sys.stderr)
        return EXIT_NO
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DomainError, NotMajorized, NotSubmajorized, NotExtendable) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MajorizationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    out.flush()
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
