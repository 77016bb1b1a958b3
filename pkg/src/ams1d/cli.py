"""Command-line front end.

    ams1d convergence --problem ex1 --nh 1024 --NH 2,4,8,16,32,64 --mesh uniform
    ams1d solve --problem ex2 --NH 16 --seed 7 --dump-solution --dump-basis 1

Exit codes: 0 on success, 2 for configuration errors, 3 for numerical
failures (the message names the failing stage).
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .error_norms import convergence_study, energy_norm, l2_error
from .errors import AmsError, ConfigurationError, NumericalError, stage
from .meshing import build_coarsening
from .micro_assembly import build_micro, micro_reference_solve
from .pipeline import homogenized_curve, solve_multiscale
from .problems import ProblemKind, resolve_problem

DEFAULT_NH = 1024
DEFAULT_COARSE = (2, 4, 8, 16, 32, 64)
SEED_ENV = "AMS1D_SEED"

_FILE_KEYS = {
    "problem", "nh", "NH", "mesh", "seed", "out",
    "dump_solution", "dump_basis", "dump_macro", "no_timestamp",
}


class UsageError(ConfigurationError):
    pass


@dataclass
class RunConfig:
    problem: str = "ex1"
    nh: int = DEFAULT_NH
    coarse: list = field(default_factory=lambda: list(DEFAULT_COARSE))
    mesh: str = "uniform"
    seed: int = 0
    out: Path = Path("results")
    dump_solution: bool = False
    dump_basis: Optional[int] = None
    dump_macro: bool = False
    timestamp: bool = True

    def validate(self, n_micro: Optional[int] = None) -> None:
        n_micro = self.nh if n_micro is None else n_micro
        if n_micro < 1:
            raise UsageError(f"--nh must be positive, got {n_micro}")
        if self.mesh not in ("uniform", "random"):
            raise UsageError(f"--mesh must be uniform or random, got {self.mesh!r}")
        if not self.coarse:
            raise UsageError("--NH needs at least one value")
        if any(n < 1 for n in self.coarse):
            raise UsageError(f"--NH values must be positive: {self.coarse}")
        if any(b <= a for a, b in zip(self.coarse, self.coarse[1:])):
            raise UsageError(f"--NH must be strictly ascending: {self.coarse}")
        if any(b % a for a, b in zip(self.coarse, self.coarse[1:])):
            raise UsageError(f"each --NH value must divide the next: {self.coarse}")
        if self.coarse[-1] > n_micro:
            raise UsageError(f"--NH {self.coarse[-1]} exceeds the {n_micro} micro intervals")


def _parse_coarse(value) -> list:
    if isinstance(value, (list, tuple)):
        return [int(v) for v in value]
    try:
        return [int(v) for v in str(value).split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --NH list {value!r}") from exc


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--problem", help="ex1..ex5 or external:<path> (default ex1)")
    common.add_argument("--nh", type=int, help=f"micro interval count (default {DEFAULT_NH})")
    common.add_argument("--NH", dest="coarse", help="comma-separated macro interval counts")
    common.add_argument("--mesh", choices=("uniform", "random"), help="micro mesh for ex1")
    common.add_argument("--seed", type=int, help=f"PRNG seed (fallback: ${SEED_ENV}, then 0)")
    common.add_argument("--out", help="output directory (default ./results)")
    common.add_argument("--no-timestamp", action="store_true", default=None,
                        help="omit the timestamp from JSON metadata")
    common.add_argument("--config", help="JSON file with defaults; flags override it")

    parser = argparse.ArgumentParser(prog="ams1d", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("convergence", parents=[common], help="error table over a list of N_H")
    solve = sub.add_parser("solve", parents=[common], help="solve and dump data for plotting")
    solve.add_argument("--dump-solution", action="store_true", default=None,
                       help="CSV of x, u_ref, u_ms[, u_hom]")
    solve.add_argument("--dump-basis", type=int, metavar="K", help="CSV of the macro basis Psi^K")
    solve.add_argument("--dump-macro", action="store_true", default=None,
                       help="macro system as tridiag JSON")
    return parser


def _load_config_file(path) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    unknown = set(data) - _FILE_KEYS
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def make_config(args: argparse.Namespace, environ=os.environ) -> RunConfig:
    merged = _load_config_file(args.config) if args.config else {}
    flags = {
        "problem": args.problem, "nh": args.nh, "NH": args.coarse, "mesh": args.mesh,
        "seed": args.seed, "out": args.out, "no_timestamp": args.no_timestamp,
        "dump_solution": getattr(args, "dump_solution", None),
        "dump_basis": getattr(args, "dump_basis", None),
        "dump_macro": getattr(args, "dump_macro", None),
    }
    merged.update({k: v for k, v in flags.items() if v is not None})

    cfg = RunConfig()
    cfg.problem = str(merged.get("problem", cfg.problem))
    cfg.nh = int(merged.get("nh", cfg.nh))
    if "NH" in merged:
        cfg.coarse = _parse_coarse(merged["NH"])
    cfg.mesh = str(merged.get("mesh", cfg.mesh))
    if "seed" in merged:
        cfg.seed = int(merged["seed"])
    elif environ.get(SEED_ENV):
        try:
            cfg.seed = int(environ[SEED_ENV])
        except ValueError as exc:
            raise UsageError(f"${SEED_ENV} is not an integer: {environ[SEED_ENV]!r}") from exc
    cfg.out = Path(merged.get("out", cfg.out))
    cfg.dump_solution = bool(merged.get("dump_solution", False))
    cfg.dump_basis = None if merged.get("dump_basis") is None else int(merged["dump_basis"])
    cfg.dump_macro = bool(merged.get("dump_macro", False))
    cfg.timestamp = not bool(merged.get("no_timestamp", False))
    return cfg


def _tag(cfg: RunConfig, spec_kind: ProblemKind) -> str:
    if cfg.problem.startswith("external:"):
        stem = Path(cfg.problem[len("external:"):]).stem
        name = "external_" + re.sub(r"[^A-Za-z0-9_.-]", "_", stem)
    else:
        name = cfg.problem
    mesh = cfg.mesh if spec_kind is ProblemKind.ANALYTIC else "uniform"
    return f"{name}_{mesh}_nh{cfg.nh}_seed{cfg.seed}"


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _write_csv(path: Path, header: str, columns) -> None:
    data = np.column_stack(columns)
    lines = [header] + [",".join(f"{v:.17g}" for v in row) for row in data]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _prepare(cfg: RunConfig):
    with stage("problem setup"):
        spec = resolve_problem(cfg.problem, cfg.nh, cfg.seed)
    if spec.kind is ProblemKind.EXTERNAL:
        cfg.nh = spec.system.size - 1
    cfg.validate()
    return spec


def cmd_convergence(cfg: RunConfig) -> list[Path]:
    spec = _prepare(cfg)
    report = convergence_study(spec, cfg.nh, cfg.coarse, seed=cfg.seed, mesh_kind=cfg.mesh)
    if spec.kind is ProblemKind.EXTERNAL:
        report.metadata["problem"] = cfg.problem
    cfg.out.mkdir(parents=True, exist_ok=True)
    stem = cfg.out / f"convergence_{_tag(cfg, spec.kind)}"
    csv_path, json_path = stem.with_suffix(".csv"), stem.with_suffix(".json")
    csv_path.write_text(report.to_csv(), encoding="utf-8")
    json_path.write_text(report.to_json(_now() if cfg.timestamp else None), encoding="utf-8")
    print(report.format_table())
    return [csv_path, json_path]


def cmd_solve(cfg: RunConfig) -> list[Path]:
    spec = _prepare(cfg)
    with stage("micro assembly"):
        micro = build_micro(spec, cfg.nh, cfg.mesh, cfg.seed)
    with stage("micro reference solve"):
        u_ref = micro_reference_solve(micro)
    u_hom = None
    if spec.homogenized is not None:
        u_hom = homogenized_curve(spec, micro.mesh)

    cfg.out.mkdir(parents=True, exist_ok=True)
    tag = _tag(cfg, spec.kind)
    written = []
    runs = []
    x = micro.mesh.nodes
    e_ref = energy_norm(u_ref, micro)
    for n in cfg.coarse:
        with stage(f"coarsening (N_H={n})"):
            coarsening = build_coarsening(micro.mesh, n)
        sol = solve_multiscale(micro, coarsening, u_ref=u_ref)
        diff = sol.u_ms - u_ref
        runs.append({
            "N_H": n,
            "e_energy": energy_norm(diff, micro) / e_ref if e_ref > 0 else 0.0,
            "e_L2": l2_error(u_ref, sol.u_ms, micro.mesh) if np.any(sol.u_ms) else 0.0,
            "macro_node_indices": coarsening.macro_node_indices.tolist(),
        })
        if cfg.dump_solution:
            path = cfg.out / f"solution_{tag}_NH{n}.csv"
            cols, header = [x, u_ref, sol.u_ms], "x,u_ref,u_ms"
            if u_hom is not None:
                cols.append(u_hom)
                header += ",u_hom"
            _write_csv(path, header, cols)
            written.append(path)
        if cfg.dump_basis is not None:
            k = cfg.dump_basis
            if not 0 <= k <= n:
                raise UsageError(f"--dump-basis {k} outside 0..{n}")
            path = cfg.out / f"basis_{tag}_NH{n}_K{k}.csv"
            _write_csv(path, "x,psi", [x, sol.basis.hat(k)])
            written.append(path)
        if cfg.dump_macro:
            path = cfg.out / f"macro_{tag}_NH{n}.json"
            sol.macro.system.save(path)
            written.append(path)

    meta = {"problem": cfg.problem, "n_micro": cfg.nh, "mesh": cfg.mesh, "seed": cfg.seed}
    if cfg.timestamp:
        meta["timestamp"] = _now()
    summary = cfg.out / f"solve_{tag}.json"
    summary.write_text(json.dumps({"metadata": meta, "runs": runs}, indent=2, sort_keys=True) + "\n",
                       encoding="utf-8")
    written.append(summary)
    for run in runs:
        print(f"N_H={run['N_H']:>5}  e_energy={run['e_energy']:.3E}  e_L2={run['e_L2']:.3E}")
    return written


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        if args.command == "convergence":
            cmd_convergence(cfg)
        else:
            cmd_solve(cfg)
    except NumericalError as exc:
        where = exc.stage or "unknown stage"
        print(f"ams1d: numerical failure in {where}: {exc}", file=sys.stderr)
        return 3
    except (AmsError, ValueError) as exc:
        where = f" ({exc.stage})" if getattr(exc, "stage", None) else ""
        print(f"ams1d: configuration error{where}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
