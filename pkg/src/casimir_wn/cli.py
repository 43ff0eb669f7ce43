"""Command-line driver: ``casimir-wn {simulate,compare,validate-algebra,sweep}``.

Exit codes: 0 success, 1 comparison outside tolerance, 2 bad config,
3 integration failure, 4 oracle divergence, 5 algebra validation failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import algebra, oracle
from .errors import (CasimirError, IntegrationFailure, InvalidArgument, OracleDivergence,
                     SingularStructureMatrix)
from .model import CavityParams
from .pipeline import run_compare, run_exact
from .weinorman import assemble_M

log = logging.getLogger("casimir_wn")

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_CONFIG = 2
EXIT_INTEGRATION = 3
EXIT_ORACLE = 4
EXIT_ALGEBRA = 5

CSV_COLUMNS = (
    "t", "n1", "n2", "dQ1", "dP1", "dQ2", "dP2", "prod1", "prod2",
    "mandel_q1", "mandel_q2", "invariant", "unitarity_residual", "ccr_residual",
)
TRANSFER_COLUMNS = tuple(
    f"t{i}{j}_{part}" for i in range(1, 5) for j in range(1, 5) for part in ("re", "im")
)
SWEEP_PARAMS = ("omega_d", "q0", "phi")


@dataclass
class RunConfig:
    cavity: CavityParams = field(default_factory=CavityParams)
    t_start: float = 0.0
    t_end: float = 20.0
    samples: int = 2001
    rtol: float = 1e-10
    atol: float = 1e-12
    oracle_cutoff: int = oracle.DEFAULT_CUTOFF
    emit_transfer_matrix: bool = False
    output_path: str | None = None

    def __post_init__(self):
        if int(self.samples) != self.samples or self.samples < 2:
            raise InvalidArgument("samples must be an integer >= 2")
        self.samples = int(self.samples)
        if not self.t_end > self.t_start:
            raise InvalidArgument("t_end must exceed t_start")
        if self.rtol <= 0 or self.atol <= 0:
            raise InvalidArgument("tolerances must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        known = {"cavity", "t_start", "t_end", "samples", "rtol", "atol",
                 "oracle_cutoff", "emit_transfer_matrix", "output_path", "trajectory"}
        unknown = set(d) - known
        if unknown:
            raise InvalidArgument(f"unknown config keys: {sorted(unknown)}")
        # only the exponential-sinusoid mirror law is provided
        if d.pop("trajectory", "exp_sine") != "exp_sine":
            raise InvalidArgument("trajectory must be 'exp_sine'")
        if "cavity" in d:
            d["cavity"] = CavityParams.from_dict(d["cavity"])
        return cls(**d)

    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.samples)


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    with open(path) as fh:
        return RunConfig.from_dict(json.load(fh))


def fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return format(float(x), ".17g")


def atomic_write(path: str | os.PathLike, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        atomic_write(path, text)


def exact_csv(run, emit_transfer: bool = False) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS + (TRANSFER_COLUMNS if emit_transfer else ()))
    for row in run.rows:
        r = row.record
        values = [r.t, r.n1, r.n2, r.dQ1, r.dP1, r.dQ2, r.dP2, r.prod1, r.prod2,
                  r.mandel_q1, r.mandel_q2, r.invariant,
                  row.unitarity_residual, row.ccr_residual]
        if emit_transfer:
            for z in row.transfer.ravel():
                values += [z.real, z.imag]
        w.writerow([fmt(v) for v in values])
    return buf.getvalue()


def oracle_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS + ("source",))
    for r in records:
        values = [r.t, r.n1, r.n2, r.dQ1, r.dP1, r.dQ2, r.dP2, r.prod1, r.prod2,
                  r.mandel_q1, r.mandel_q2, r.invariant, None, None]
        w.writerow([fmt(v) for v in values] + ["oracle"])
    return buf.getvalue()


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    changes = {}
    if getattr(args, "rtol", None) is not None:
        changes["rtol"] = args.rtol
    if getattr(args, "atol", None) is not None:
        changes["atol"] = args.atol
    if getattr(args, "cutoff", None) is not None:
        changes["oracle_cutoff"] = args.cutoff
    if getattr(args, "out", None) is not None:
        changes["output_path"] = args.out
    return replace(cfg, **changes) if changes else cfg


# --- subcommands -------------------------------------------------------------------


def cmd_simulate(cfg: RunConfig) -> int:
    try:
        run = run_exact(cfg.cavity, cfg.times(), cfg.rtol, cfg.atol)
    except (IntegrationFailure, SingularStructureMatrix) as exc:
        t_last = getattr(exc, "t_last", getattr(exc, "t", None))
        diag = {"error": type(exc).__name__, "message": str(exc), "last_good_t": t_last}
        sys.stderr.write(json.dumps(diag) + "\n")
        if cfg.output_path not in (None, "-"):
            atomic_write(str(cfg.output_path) + ".diagnostics.json", json.dumps(diag, indent=2))
        return EXIT_INTEGRATION
    emit(cfg.output_path, exact_csv(run, cfg.emit_transfer_matrix))
    log.info("simulate: %d samples, %d steps, max cond %.3g",
             len(run.rows), len(run.trajectory.step_sizes), run.trajectory.max_condition)
    return EXIT_OK


def cmd_compare(cfg: RunConfig, oracle_csv_path: str | None = None) -> int:
    if cfg.oracle_cutoff < 4:
        raise InvalidArgument("oracle cutoff must be >= 4")
    try:
        cmp, ref, ref_records, _ = run_compare(cfg.cavity, cfg.times(), cfg.oracle_cutoff,
                                               cfg.rtol, cfg.atol)
    except OracleDivergence as exc:
        sys.stderr.write(json.dumps({"error": "OracleDivergence", "message": str(exc)}) + "\n")
        return EXIT_ORACLE
    except (IntegrationFailure, SingularStructureMatrix) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return EXIT_INTEGRATION
    report = cmp.to_dict()
    report["oracle"] = ref.diagnostics.to_dict()
    emit(cfg.output_path, json.dumps(report, indent=2) + "\n")
    if oracle_csv_path:
        atomic_write(oracle_csv_path, oracle_csv(ref_records))
        atomic_write(oracle_csv_path + ".diagnostics.json",
                     json.dumps(ref.diagnostics.to_dict(), indent=2) + "\n")
    return EXIT_OK if cmp.ok else EXIT_MISMATCH


def validate_algebra(n_draws: int = 100, seed: int = 20240101, radius: float = 0.3) -> dict:
    t0 = time.perf_counter()
    closure = algebra.verify_closure()
    numeric = algebra.verify_closure_numeric(12, 4)
    rng = np.random.default_rng(seed)
    worst, worst_entry = 0.0, None
    for _ in range(n_draws):
        alpha = random_disk(rng, radius)
        dev = np.abs(assemble_M(alpha) - algebra.adjoint_chain_fock(alpha).matrix)
        if dev.max() > worst:
            worst = float(dev.max())
            n, j = np.unravel_index(dev.argmax(), dev.shape)
            worst_entry = [int(n) + 1, int(j) + 1]
    m_ok = worst <= 1e-9
    return {
        "ok": closure.ok and numeric.ok and m_ok,
        "closure": closure.to_dict(),
        "numeric_closure": numeric.to_dict(),
        "m_oracle": {"draws": n_draws, "seed": seed, "radius": radius,
                     "max_deviation": worst, "worst_entry": worst_entry, "ok": m_ok},
        "elapsed_s": time.perf_counter() - t0,
    }


def random_disk(rng: np.random.Generator, radius: float, size: int = 11) -> np.ndarray:
    """Points uniform in the complex disk |z| <= radius."""
    r = radius * np.sqrt(rng.uniform(size=size))
    return r * np.exp(2j * np.pi * rng.uniform(size=size))


def cmd_validate_algebra(out: str | None = None) -> int:
    report = validate_algebra()
    emit(out, json.dumps(report, indent=2) + "\n")
    if not report["ok"]:
        sys.stderr.write("algebra validation failed\n")
        return EXIT_ALGEBRA
    return EXIT_OK


def _sweep_one(args):
    cfg, param, value = args
    try:
        cav = replace(cfg.cavity, **{param: value})
        run = run_exact(cav, cfg.times(), cfg.rtol, cfg.atol)
    except CasimirError as exc:
        return {"value": value, "error": f"{type(exc).__name__}: {exc}"}
    last = run.rows[-1]
    return {
        "value": value,
        "n1_end": last.record.n1,
        "n2_end": last.record.n2,
        "max_invariant_deviation": float(np.max(np.abs(run.column("invariant") - 0.5))),
        "max_ccr_residual": max(r.ccr_residual for r in run.rows),
        "error": "",
    }


def sweep(cfg: RunConfig, param: str, values, workers: int = 1) -> list[dict]:
    if param not in SWEEP_PARAMS:
        raise InvalidArgument(f"sweep parameter must be one of {SWEEP_PARAMS}")
    values = [float(v) for v in values]
    if not all(math.isfinite(v) for v in values):
        raise InvalidArgument("sweep values must be finite")
    jobs = [(cfg, param, v) for v in values]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_one, jobs))
    return [_sweep_one(j) for j in jobs]


def sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = ("value", "n1_end", "n2_end", "max_invariant_deviation", "max_ccr_residual")
    w.writerow(cols + ("error",))
    for r in rows:
        w.writerow([fmt(r.get(c)) for c in cols] + [r.get("error", "")])
    return buf.getvalue()


def cmd_sweep(cfg: RunConfig, param: str, values, workers: int = 1) -> int:
    rows = sweep(cfg, param, values, workers)
    emit(cfg.output_path, sweep_csv(rows))
    return EXIT_OK if any(not r["error"] for r in rows) else EXIT_INTEGRATION


# --- entry point -----------------------------------------------------------------------


def _parse_values(text: str) -> list[float]:
    out = []
    for tok in text.replace(",", " ").split():
        # accept multiples of pi, e.g. "2pi", "0.5*pi"
        t = tok.lower().replace("*", "")
        if t.endswith("pi"):
            coef = t[:-2]
            out.append((float(coef) if coef else 1.0) * math.pi)
        else:
            out.append(float(t))
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="casimir-wn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, oracle_flags=False):
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out", help="output path ('-' for stdout)")
        p.add_argument("--rtol", type=float)
        p.add_argument("--atol", type=float)
        if oracle_flags:
            p.add_argument("--cutoff", type=int, help="oracle Fock cutoff per mode")

    common(sub.add_parser("simulate", help="run the Wei-Norman pipeline, write CSV"))
    cmp = sub.add_parser("compare", help="compare against the Fock-space oracle")
    common(cmp, oracle_flags=True)
    cmp.add_argument("--oracle-csv", help="also write oracle observables to this CSV")
    va = sub.add_parser("validate-algebra", help="closure, Jacobi and M-matrix checks")
    va.add_argument("--out")
    sw = sub.add_parser("sweep", help="scan one cavity parameter")
    common(sw)
    sw.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    sw.add_argument("--values", required=True, nargs="+",
                    help="values, comma or space separated; 'pi' multiples allowed (e.g. 2pi)")
    sw.add_argument("--workers", type=int, default=1)
    return parser


def configure_logging() -> None:
    level = os.environ.get("CASIMIR_WN_LOG", "warn").lower()
    levels = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING,
              "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv=None) -> int:
    configure_logging()
    args = build_parser().parse_args(argv)
    if args.command == "validate-algebra":
        return cmd_validate_algebra(args.out)
    try:
        cfg = _apply_overrides(load_config(args.config), args)
    except (OSError, ValueError, TypeError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    if args.command == "simulate":
        return cmd_simulate(cfg)
    if args.command == "compare":
        try:
            return cmd_compare(cfg, args.oracle_csv)
        except InvalidArgument as exc:
            sys.stderr.write(f"config error: {exc}\n")
            return EXIT_CONFIG
    if args.command == "sweep":
        try:
            values = _parse_values(" ".join(args.values))
            return cmd_sweep(cfg, args.param, values, args.workers)
        except (ValueError, InvalidArgument) as exc:
            sys.stderr.write(f"config error: {exc}\n")
            return EXIT_CONFIG
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
