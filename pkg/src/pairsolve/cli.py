"""Command-line front end: build | ed | dmrg | compare | sweep.

Every command is deterministic for fixed inputs and seed; --no-timestamp
additionally suppresses generation times (and zeroes wall-clock fields) so
output files are byte-identical across runs.  Each output file gets a
sibling <out>.manifest.json recording the command, inputs and seeds.

Exit codes: 0 success, 2 validation failure, 3 problem too large,
4 unsupported shape (odd N, infeasible pair target, empty sector),
5 solver failure.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import dataclasses
import json
import math
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .basis import enumerate_basis, sector_dimension
from .dmrg import DmrgConfig, history_csv, run_infinite, summary_dict
from .errors import (
    DegenerateEta,
    DimensionMismatch,
    EmptySector,
    InfeasibleTarget,
    InvariantViolation,
    NoConvergence,
    NotNormalized,
    OddN,
    PatternMismatch,
    SchemaError,
    SingularKernel,
    TooLarge,
)
from .exactdiag import DENSE_THRESHOLD, dense_spectrum, iterative_ground
from .model import (
    FamilyKind,
    IntegrableSpec,
    PairingModel,
    build_integrable,
    build_reduced_bcs,
    load_model,
    param_count,
    save_model,
)


@dataclasses.dataclass(frozen=True)
class RunManifest:
    """What a command ran with: inputs, resolved flags, output target."""

    command: str
    model_path: str
    overrides: dict
    output_path: str
    format: str

    def to_json_dict(self) -> dict:
        return {
            "command": self.command,
            "model_path": self.model_path,
            "overrides": self.overrides,
            "output_path": self.output_path,
            "format": self.format,
        }


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _write_json(path: str, payload: dict, no_timestamp: bool):
    if not no_timestamp:
        payload = {**payload, "generated_at": _timestamp()}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_manifest(args, out_path: str, fmt: str):
    skip = {"func", "model", "input", "out", "history", "format", "no_timestamp"}
    overrides = {
        k: v for k, v in vars(args).items() if k not in skip and v is not None
    }
    manifest = RunManifest(
        command=args.func.__name__.removeprefix("cmd_"),
        model_path=getattr(args, "model", None) or getattr(args, "input", None) or "",
        overrides=overrides,
        output_path=out_path,
        format=fmt,
    )
    _write_json(out_path + ".manifest.json", manifest.to_json_dict(), args.no_timestamp)


def _load_model_file(path: str) -> PairingModel:
    text = Path(path).read_text()
    parsed = load_model(text)
    if isinstance(parsed, IntegrableSpec):
        return build_integrable(parsed)
    return parsed


def _csv_floats(text: str):
    return [float(x) for x in text.split(",")]


def _fmt(x: float) -> str:
    return f"{x:.17g}"


# --- build -----------------------------------------------------------------


def cmd_build(args) -> int:
    single_family = False
    if args.input:
        parsed = load_model(Path(args.input).read_text())
        if isinstance(parsed, IntegrableSpec):
            single_family = True
            model = build_integrable(parsed)
        else:
            model = parsed
    elif args.family:
        if args.g is None or args.epsilon is None or args.eta is None:
            raise SchemaError("--family needs --g, --epsilon and --eta")
        spec = IntegrableSpec(
            g=args.g,
            epsilon=np.array(_csv_floats(args.epsilon)),
            eta=np.array(_csv_floats(args.eta)),
            family=FamilyKind(args.family),
        )
        single_family = True
        model = build_integrable(spec)
    elif args.bcs_g is not None:
        if args.epsilon is None:
            raise SchemaError("--bcs-g needs --epsilon")
        model = build_reduced_bcs(_csv_floats(args.epsilon), args.bcs_g)
    else:
        raise SchemaError("give --input, or --family flags, or --bcs-g")
    n = model.n_levels
    print(f"levels: {n}")
    print(f"free parameters (general): {param_count('general', n)}")
    if single_family:
        print(
            f"free parameters (integrable family): "
            f"{param_count('integrable_single', n)}"
        )
    print("invariants: ok")
    if not np.any(model.v1) and not np.any(model.v2):
        print("warning: non-interacting model")
    _write_json(args.out, save_model(model), args.no_timestamp)
    _write_manifest(args, args.out, "json")
    print(f"wrote {args.out}")
    return 0


# --- ed --------------------------------------------------------------------


def cmd_ed(args) -> int:
    model = _load_model_file(args.model)
    start = time.perf_counter()
    try:
        basis = enumerate_basis(model.n_levels, args.pairs)
        if args.method == "dense" or (
            args.method == "auto" and basis.dim <= args.dense_threshold
        ):
            result = dense_spectrum(model, basis, dense_threshold=args.dense_threshold)
            if args.k is not None:
                result = dataclasses.replace(
                    result, energies=result.energies[: args.k]
                )
        else:
            result = iterative_ground(
                model, basis, k=args.k or 1, tol=args.tol, seed=args.seed
            )
    except TooLarge:
        print(
            "hint: this sector is too large for the dense path; "
            "the iterative solver handles larger bases",
            file=sys.stderr,
        )
        raise
    elapsed = time.perf_counter() - start
    print(f"sector dimension: {basis.dim}")
    print(f"method: {result.method}")
    print(f"ground energy: {float(result.energies[0])!r}")
    if not args.no_timestamp:
        print(f"wall seconds: {elapsed:.3f}")
    _write_json(args.out, result.to_json_dict(), args.no_timestamp)
    _write_manifest(args, args.out, "json")
    print(f"wrote {args.out}")
    return 0


# --- dmrg ------------------------------------------------------------------


def _run_dmrg(model, args, m):
    config = DmrgConfig(
        m=m,
        total_pairs=args.pairs,
        superblock_tol=args.tol,
        seed=args.seed,
    )
    result = run_infinite(model, config)
    if args.no_timestamp:
        result = dataclasses.replace(result, wall_seconds=0.0)
    return result


def cmd_dmrg(args) -> int:
    model = _load_model_file(args.model)
    result = _run_dmrg(model, args, args.m)
    history_path = args.history or str(
        Path(args.out).with_name(Path(args.out).stem + ".history.csv")
    )
    Path(history_path).write_text(history_csv(result))
    _write_json(args.out, summary_dict(result), args.no_timestamp)
    _write_manifest(args, args.out, "json")
    print(f"final energy: {result.final_energy!r}")
    print(f"iterations: {len(result.iterations)}")
    print(f"wrote {args.out}")
    print(f"wrote {history_path}")
    return 0


# --- compare ---------------------------------------------------------------


def cmd_compare(args) -> int:
    model = _load_model_file(args.model)
    basis = enumerate_basis(model.n_levels, args.pairs)
    if basis.dim <= args.dense_threshold:
        ed = dense_spectrum(model, basis, dense_threshold=args.dense_threshold)
    else:
        ed = iterative_ground(model, basis, k=1, tol=args.tol, seed=args.seed)
    dm = _run_dmrg(model, args, args.m)
    e_ed = float(ed.energies[0])
    e_dm = float(dm.final_energy)
    abs_err = abs(e_dm - e_ed)
    if abs_err == 0.0:
        rel_err = 0.0
    elif e_ed != 0.0:
        rel_err = abs_err / abs(e_ed)
    else:
        rel_err = math.inf
    # floor(-log10(rel)) capped: 16 significant figures is the practical
    # agreement ceiling in double precision
    sig_figs = 16 if rel_err == 0.0 else max(0, min(16, math.floor(-math.log10(rel_err))))
    report = {
        "e_ed": e_ed,
        "e_dmrg": e_dm,
        "abs_error": abs_err,
        "rel_error": rel_err,
        "sig_figs": sig_figs,
        "ed_method": ed.method,
        "m": args.m,
        "n_levels": model.n_levels,
        "total_pairs": args.pairs,
    }
    if args.format == "json":
        _write_json(args.out, report, args.no_timestamp)
    else:
        header = "m,e_ed,e_dmrg,abs_error,rel_error,sig_figs"
        row = (
            f"{args.m},{_fmt(e_ed)},{_fmt(e_dm)},{_fmt(abs_err)},"
            f"{_fmt(rel_err)},{sig_figs}"
        )
        Path(args.out).write_text(header + "\n" + row + "\n")
    _write_manifest(args, args.out, args.format)
    print(f"e_ed: {e_ed!r}")
    print(f"e_dmrg: {e_dm!r}")
    print(f"agreement: {sig_figs} significant figures")
    print(f"wrote {args.out}")
    return 0


# --- sweep -----------------------------------------------------------------


def _worker_count(n_jobs: int) -> int:
    raw = os.environ.get("PAIRSOLVE_THREADS", "")
    if raw:
        try:
            cap = int(raw)
        except ValueError:
            raise SchemaError(f"PAIRSOLVE_THREADS must be an integer, got {raw!r}")
        if cap < 1:
            raise SchemaError(f"PAIRSOLVE_THREADS must be positive, got {cap}")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_jobs))


def _sweep_point(model, args, m):
    result = _run_dmrg(model, args, m)
    worst = max(
        (max(r.trunc_weight_hole, r.trunc_weight_particle) for r in result.iterations),
        default=0.0,
    )
    return result, worst


def cmd_sweep(args) -> int:
    model = _load_model_file(args.model)
    ms = [int(x) for x in args.m_list.split(",")]
    if not ms or any(b <= a for a, b in zip(ms, ms[1:])):
        raise SchemaError(f"--m-list must be strictly ascending, got {args.m_list}")
    workers = _worker_count(len(ms))
    if workers > 1 and len(ms) > 1:
        # separate processes: the ARPACK core is not reentrant
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            points = list(pool.map(_sweep_point_pickled, [(model, args, m) for m in ms]))
    else:
        points = [_sweep_point(model, args, m) for m in ms]
    e_best = points[-1][0].final_energy
    rows = []
    for (result, worst), m in zip(points, ms):
        diff = abs(result.final_energy - e_best)
        if diff == 0.0:
            conv = 0.0
        elif e_best != 0.0:
            conv = diff / abs(e_best)
        else:
            conv = math.inf
        rows.append(
            {
                "m": m,
                "E0": result.final_energy,
                "error_vs_best": diff,
                "trunc_weight": worst,
                "wall_seconds": result.wall_seconds,
                "peak_memory_entries": result.memory_peak_entries,
                "self_convergence": conv,
            }
        )
    if args.format == "json":
        _write_json(args.out, {"rows": rows}, args.no_timestamp)
    else:
        lines = [
            "m,E0,error_vs_best,trunc_weight,wall_seconds,"
            "peak_memory_entries,self_convergence"
        ]
        for r in rows:
            lines.append(
                f"{r['m']},{_fmt(r['E0'])},{_fmt(r['error_vs_best'])},"
                f"{_fmt(r['trunc_weight'])},{_fmt(r['wall_seconds'])},"
                f"{r['peak_memory_entries']},{_fmt(r['self_convergence'])}"
            )
        Path(args.out).write_text("\n".join(lines) + "\n")
    _write_manifest(args, args.out, args.format)
    print(f"swept m = {ms}")
    print(f"wrote {args.out}")
    return 0


def _sweep_point_pickled(job):
    return _sweep_point(*job)


# --- parser ----------------------------------------------------------------


def _add_common(p, model_required=True):
    p.add_argument("--model", required=model_required, help="model JSON file")
    p.add_argument("--pairs", type=int, required=True, help="total pair number M")
    p.add_argument("--out", required=True, help="output file path")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument(
        "--no-timestamp",
        action="store_true",
        help="omit generation times and zero wall-clock fields",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pairsolve",
        description="Solvers for pairing Hamiltonians: model building, "
        "exact diagonalization and infinite-algorithm DMRG.",
    )
    sub = parser.add_subparsers(required=True)

    b = sub.add_parser("build", help="build and validate a model file")
    b.add_argument("--input", help="existing model JSON to validate/expand")
    b.add_argument(
        "--family", choices=[f.value for f in FamilyKind], help="solvable family"
    )
    b.add_argument("--g", type=float, help="family coupling constant")
    b.add_argument("--epsilon", help="comma-separated level energies")
    b.add_argument("--eta", help="comma-separated family parameters")
    b.add_argument("--bcs-g", type=float, help="constant pairing strength G")
    b.add_argument("--out", required=True)
    b.add_argument("--no-timestamp", action="store_true")
    b.set_defaults(func=cmd_build)

    e = sub.add_parser("ed", help="exact diagonalization of one pair sector")
    _add_common(e)
    e.add_argument("--k", type=int, help="number of lowest states (default 1)")
    e.add_argument("--dense-threshold", type=int, default=DENSE_THRESHOLD)
    e.add_argument(
        "--method", choices=["auto", "dense", "iterative"], default="auto"
    )
    e.set_defaults(func=cmd_ed)

    d = sub.add_parser("dmrg", help="infinite-algorithm DMRG run")
    _add_common(d)
    d.add_argument("--m", type=int, required=True, help="kept states per block")
    d.add_argument("--history", help="history CSV path (default <out>.history.csv)")
    d.set_defaults(func=cmd_dmrg)

    c = sub.add_parser("compare", help="DMRG vs exact diagonalization")
    _add_common(c)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--dense-threshold", type=int, default=DENSE_THRESHOLD)
    c.add_argument("--format", choices=["json", "csv"], default="json")
    c.set_defaults(func=cmd_compare)

    s = sub.add_parser("sweep", help="DMRG convergence sweep over m")
    _add_common(s)
    s.add_argument("--m-list", required=True, help="comma-separated ascending m values")
    s.add_argument("--format", choices=["csv", "json"], default="csv")
    s.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (
        SchemaError,
        InvariantViolation,
        DegenerateEta,
        SingularKernel,
        PatternMismatch,
        DimensionMismatch,
        NotNormalized,
        FileNotFoundError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (OddN, InfeasibleTarget, EmptySector) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except NoConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5


def entry_point():
    raise SystemExit(main())


if __name__ == "__main__":
    entry_point()
