"""Command-line front end.

Exit codes: 0 success, 1 regression failure, 2 input error, 3 dimension error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import subprocess
import sys
from pathlib import Path
from typing import Any

import numpy as np

from realmaps import __version__, chanrep, cones, ebreak, gallery, posit
from realmaps.chanrep import LinearMapRep
from realmaps.errors import DimensionError, NotIPTError, ParamRangeError, UnknownEntryError
from realmaps.matkit import BipartiteOperator, Field, bipartite_from_json, bipartite_to_json
from realmaps.posit import SolverConfig

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_DIM = 0, 1, 2, 3

DEFAULT_SEED = SolverConfig().seed


class InputError(Exception):
    pass


def build_id() -> str:
    """Short commit hash of the source checkout, or the package version outside git."""
    here = Path(__file__).resolve().parent
    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"], cwd=here, capture_output=True, text=True, timeout=5
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _clean(obj: Any) -> Any:
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def _emit(obj, out_path=None):
    text = json.dumps(_clean(obj), indent=2, allow_nan=False)
    if out_path:
        Path(out_path).write_text(text + "\n")
    else:
        print(text)


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _load_map(path: str) -> LinearMapRep:
    obj = _load_json(path)
    try:
        return chanrep.map_from_json(obj)
    except DimensionError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _load_state(path: str) -> BipartiteOperator:
    obj = _load_json(path)
    try:
        return bipartite_from_json(obj)
    except DimensionError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _config(args) -> SolverConfig:
    seed = args.seed
    if seed is None:
        env = os.environ.get("REALMAP_SEED")
        if env is not None:
            try:
                seed = int(env)
            except ValueError as exc:
                raise InputError(f"REALMAP_SEED must be an integer, got {env!r}") from exc
        else:
            seed = DEFAULT_SEED
    kw = {"seed": seed}
    if args.restarts is not None:
        kw["restarts"] = args.restarts
    if args.max_iters is not None:
        kw["max_iters"] = args.max_iters
    try:
        return SolverConfig(**kw)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _header(cfg: SolverConfig, command: str) -> dict:
    return {"command": command, "build": build_id(), "config": cfg.to_json()}


def _parse_params(pairs) -> dict:
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise InputError(f"--param expects name=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = float(v) if any(c in v for c in ".eE") else int(v)
        except ValueError as exc:
            raise InputError(f"--param {k}: {v!r} is not a number") from exc
    return out


# -- commands -------------------------------------------------------------------------


def cmd_classify_map(args) -> int:
    cfg = _config(args)
    phi = _load_map(args.inp)
    levels = sorted(set(args.p or [1]))
    adj = posit.commutes_with_adjoint(phi)
    report = _header(cfg, "classify-map")
    report["map"] = {"dimIn": phi.dim_in, "dimOut": phi.dim_out, "field": phi.field.value}
    report["diagnostics"] = chanrep.diagnostics(phi).to_json()
    report["adjointCommutation"] = {
        "commutes": adj.commutes,
        "choiDefect": adj.choi_defect,
        "worstBasisViolation": adj.worst_basis_violation,
    }
    report["completelyPositive"] = posit.is_completely_positive(phi, cfg).to_json()
    report["pPositive"] = [{"p": p, "verdict": posit.check_p_positive(phi, p, cfg).to_json()} for p in levels]
    if phi.field is Field.REAL:
        report["complexificationPPositive"] = [
            {"p": p, "verdict": posit.check_complexification_p_positive(phi, p, cfg).to_json()} for p in levels
        ]
    report["pptIpt"] = ebreak.classify_map_ppt_ipt(phi, cfg.psd_tol).to_json()
    fields = [Field.REAL, Field.COMPLEX] if phi.field is Field.REAL else [Field.COMPLEX]
    report["entanglementBreaking"] = [
        ebreak.check_eb_p(phi, p, f, cfg).to_json() for f in fields for p in levels
    ]
    _emit(report, args.out)
    return EXIT_OK


def cmd_classify_state(args) -> int:
    cfg = _config(args)
    state = _load_state(args.inp)
    field = Field.parse(args.field)
    levels = sorted(set(args.p or [1]))
    cls = cones.classify_state(state, [(field, p) for p in levels], cfg)
    report = _header(cfg, "classify-state")
    report["classification"] = cls.to_json()
    report["decompositions"] = [
        {"field": f.value, "p": p, "decomposition": dec.to_json()} for (f, p), dec in cls.decompositions.items()
    ]
    _emit(report, args.out)
    return EXIT_OK


def cmd_witness(args) -> int:
    cfg = _config(args)
    phi = _load_map(args.map)
    state = _load_state(args.state)
    value = cones.witness_value(phi, state)
    report = _header(cfg, "witness")
    report["value"] = value
    report["negative"] = value < -cfg.psd_tol * max(1.0, float(np.linalg.norm(state.matrix, 2)))
    _emit(report, args.out)
    return EXIT_OK


def cmd_gallery(args) -> int:
    cfg = _config(args)
    if args.action == "list":
        _emit(gallery.manifest(), args.out)
        return EXIT_OK
    if args.action == "export":
        if not args.id or len(args.id) != 1:
            raise InputError("gallery export needs exactly one --id")
        obj = gallery.build(args.id[0], **_parse_params(args.param))
        _emit(chanrep.map_to_json(obj) if isinstance(obj, LinearMapRep) else bipartite_to_json(obj), args.out)
        return EXIT_OK
    # run
    if args.all:
        ids = gallery.list_ids(include_disabled=False)
    elif args.id:
        ids = args.id
    else:
        raise InputError("gallery run needs --id or --all")
    params = _parse_params(args.param)
    for i in ids:  # validate before computing
        gallery.ENTRIES.get(i) or gallery.build(i)
        if params:
            gallery.ENTRIES[i].resolve(params)
    reports = [gallery.run_entry(i, cfg, **params) for i in ids]
    failures = sum(r.failures for r in reports)
    for r in reports:
        for f in r.results:
            mark = "PASS" if f.passed else "FAIL"
            print(f"[{mark}] {r.id}: {f.name}", file=sys.stderr)
    summary = _header(cfg, "gallery run")
    summary["entries"] = [r.to_json() for r in reports]
    summary["failures"] = failures
    _emit(summary, args.out)
    return EXIT_OK if failures == 0 else EXIT_FAIL


def cmd_iterate(args) -> int:
    cfg = _config(args)
    phi = _load_map(args.inp)
    if args.kmax < 1:
        raise InputError("--kmax must be >= 1")
    if phi.dim_in != phi.dim_out:
        raise DimensionError("iterate needs a map M_n -> M_n")
    trace = ebreak.iterate_and_track(phi, args.kmax, cfg, keep_maps=True)
    lines = []
    for step, power in zip(trace.steps, trace.maps):
        row = step.to_json()
        row.update({"surrogates": ebreak.distance_to_eb_surrogates(power, cfg)})
        lines.append(json.dumps(_clean(row), allow_nan=False, sort_keys=True))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_probe_ipt2(args) -> int:
    cfg = _config(args)
    phi = _load_map(args.inp)
    try:
        rep = ebreak.run_ipt_squared_probe(phi, cfg)
    except NotIPTError as exc:
        raise InputError(str(exc)) from exc
    report = _header(cfg, "probe-ipt2")
    report["probe"] = rep.to_json()
    _emit(report, args.out)
    return EXIT_FAIL if rep.potential_counterexample else EXIT_OK


# -- parser ---------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, default=None, help="master RNG seed (falls back to $REALMAP_SEED)")
    p.add_argument("--restarts", type=int, default=None, help="seesaw restarts")
    p.add_argument("--max-iters", type=int, default=None, help="seesaw iteration cap")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="realmaps", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"realmaps {build_id()}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify-map", help="positivity, PPT/IPT and EB verdicts for a map")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--p", type=int, action="append", help="positivity level (repeatable)")
    _common(p)
    p.set_defaults(func=cmd_classify_map)

    p = sub.add_parser("classify-state", help="separability verdicts for a bipartite PSD matrix")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--field", default="R", choices=["R", "C", "REAL", "COMPLEX"])
    p.add_argument("--p", type=int, action="append", help="Schmidt-rank bound (repeatable)")
    _common(p)
    p.set_defaults(func=cmd_classify_state)

    p = sub.add_parser("witness", help="Tr(C_map P) for a map and a state")
    p.add_argument("--map", required=True)
    p.add_argument("--state", required=True)
    _common(p)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("gallery", help="list, run or export gallery entries")
    p.add_argument("action", choices=["list", "run", "export"])
    p.add_argument("--id", action="append")
    p.add_argument("--all", action="store_true")
    p.add_argument("--param", action="append", help="name=value override (repeatable)")
    _common(p)
    p.set_defaults(func=cmd_gallery)

    p = sub.add_parser("iterate", help="JSON-lines trace of the powers of a map")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--kmax", type=int, required=True)
    _common(p)
    p.set_defaults(func=cmd_iterate)

    p = sub.add_parser("probe-ipt2", help="test whether the square of a CP IPT map breaks entanglement")
    p.add_argument("--in", dest="inp", required=True)
    _common(p)
    p.set_defaults(func=cmd_probe_ipt2)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except DimensionError as exc:
        print(f"dimension error: {exc}", file=sys.stderr)
        return EXIT_DIM
    except (InputError, UnknownEntryError, ParamRangeError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
