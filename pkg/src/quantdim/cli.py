"""Command-line interface: ``python -m quantdim <command> ...``.

Exit codes: 0 success, 1 invalid input (bad system or arguments the system
cannot satisfy), 2 budget exceeded, 3 file I/O failure.  CSV goes to
standard output unless ``--out`` names a directory.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analysis, geometry, io, model, quantizer, spectral, words
from .errors import BudgetExceeded, InvalidSystem, QuantDimError

log = logging.getLogger("quantdim")

EXIT_OK, EXIT_INVALID, EXIT_BUDGET, EXIT_IO = 0, 1, 2, 3


@dataclass(frozen=True)
class RunConfig:
    system_path: str | None
    command: str
    j_max: int
    k_max: int
    n_max: int
    tol: float
    budget: int
    seed: int
    out_dir: str | None
    renormalize: bool
    threads: int = 1

    def __post_init__(self):
        for name in ("j_max", "k_max", "n_max", "budget"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.tol < 1:
            raise ValueError("tol must lie in (0, 1)")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jmax", type=int, default=6, help="largest stopping level j")
    common.add_argument("--kmax", type=int, default=40, help="largest word length k")
    common.add_argument("--nmax", type=int, default=40, help="largest n for spread tables")
    common.add_argument("--tol", type=float, default=1e-3, help="quadrature tolerance")
    common.add_argument("--budget", type=int, default=words.DEFAULT_BUDGET,
                        help="maximum number of words enumerated per stopping set")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized steps")
    common.add_argument("--threads", type=int, default=1,
                        help="worker cap (computations are currently single-threaded)")
    common.add_argument("--out", default=None, help="directory for CSV/JSON outputs")
    common.add_argument("--renormalize", action="store_true",
                        help="rescale rows of P and the vector q to sum to one")

    p = argparse.ArgumentParser(prog="quantdim",
                                description="Quantization dimension of Markov-type measures")
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (("validate", "check the standing assumptions"),
                           ("spectral", "v, s0, s_k and spread tables"),
                           ("lambda", "stopping-set summaries"),
                           ("quantize", "stopping-cut codebooks, improvement and Q values"),
                           ("report", "full convergence report")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("system", help="system description (JSON)")
        if name == "lambda":
            sp.add_argument("--j", type=int, default=None, help="a single level j")
        if name == "quantize":
            sp.add_argument("--iterations", type=int, default=20)
            sp.add_argument("--a", type=float, default=None, help="exponent a (default s0)")
    mx = sub.add_parser("mixture", parents=[common], help="mixture dimension and bracket check")
    mx.add_argument("system", nargs="?", default=None,
                    help="block system whose closed classes are the components")
    mx.add_argument("--dims", type=float, nargs="+", help="component dimensions")
    mx.add_argument("--weights", type=float, nargs="+", help="component weights")
    mx.add_argument("--n", type=int, nargs="+", default=[4, 8, 16], help="codebook sizes")
    ex = sub.add_parser("example-reducible", parents=[common],
                        help="two-block reducible example (default: ratios 1/3 and 1/4)")
    ex.add_argument("--c1", type=float, default=1 / 3)
    ex.add_argument("--c2", type=float, default=1 / 4)
    return p


def _config(ns) -> RunConfig:
    return RunConfig(getattr(ns, "system", None), ns.command, ns.jmax, ns.kmax, ns.nmax, ns.tol,
                     ns.budget, ns.seed, ns.out, ns.renormalize, ns.threads)


class _Output:
    """Collects named text outputs, writing them to ``--out`` or stdout."""

    def __init__(self, out_dir, stdout):
        self.out_dir = out_dir
        self.stdout = stdout

    def emit(self, name: str, text: str):
        if self.out_dir is None:
            self.stdout.write(f"# {name}\n" if name else "")
            self.stdout.write(text)
        else:
            io.write_text(Path(self.out_dir) / name, text)


def _load(cfg: RunConfig):
    parsed = io.load_system(cfg.system_path)
    system = parsed.system
    if cfg.renormalize:
        system = model.renormalized(system)
    return system, parsed.geometry


def _fail_fast(system, j_max, budget, state=None):
    lo, _ = words.psi_bounds(system, j_max, state)
    if lo > budget:
        raise BudgetExceeded(f"Lambda_{j_max} has at least {lo:.3g} words, "
                             f"over the budget of {budget}", estimate=lo, budget=budget)


def _cmd_validate(cfg, ns, out):
    parsed = io.load_system(cfg.system_path)
    system = model.renormalized(parsed.system) if cfg.renormalize else parsed.system
    violations = model.validate(system)
    if not violations and parsed.geometry:
        geometry.realization_from_config(system, parsed.geometry)
    rows = [(v.kind, v.row, v.col, v.message) for v in violations]
    out.emit("violations.csv", io.csv_text(["kind", "row", "col", "message"], rows))
    return EXIT_INVALID if violations else EXIT_OK


def _cmd_spectral(cfg, ns, out):
    system, _ = _load(cfg)
    table = spectral.sequence_table(system, cfg.k_max)
    s0 = table.s0
    x = table.x if table.x is not None else [None] * table.k.size
    y = table.y if table.y is not None else [None] * table.k.size
    rows = zip(table.k, table.u, table.l, table.s, [s0] * table.k.size, x, y)
    out.emit("spectral.csv", io.csv_text(["k", "u_k", "l_k", "s_k", "s0", "x_k", "y_k"], rows))
    d = spectral.delta_table(system, cfg.n_max)
    out.emit("delta.csv", io.csv_text(["n", "max_delta", "max_delta_tilde"],
                                      zip(d.n, d.max_delta, d.max_delta_tilde)))
    if s0 is not None:
        sv = spectral.stationary_vector(system)
        out.emit("stationary.csv", io.csv_text(["state", "v"],
                                               zip(range(1, system.N + 1), sv.v)))
    return EXIT_OK


def _cmd_lambda(cfg, ns, out):
    system, _ = _load(cfg)
    levels = [ns.j] if ns.j is not None else list(range(1, cfg.j_max + 1))
    model.require_valid(system)
    _fail_fast(system, max(levels), cfg.budget)
    rows = []
    for j in levels:
        s = words.lambda_summary(system, j, budget=cfg.budget)
        rows.append((s.j, s.psi, s.k1, s.k2, s.t_j, s.sum_m_log_c))
    out.emit("lambda.csv", io.csv_text(["j", "psi", "k1", "k2", "t_j", "sum_m_log_c"], rows))
    return EXIT_OK


def _realize(system, block):
    return geometry.realization_from_config(system, block)


def _cmd_quantize(cfg, ns, out):
    system, block = _load(cfg)
    model.require_valid(system)
    _fail_fast(system, cfg.j_max, cfg.budget)
    real = _realize(system, block)
    a = ns.a if ns.a is not None else spectral.s0(system).s0
    rows = []
    try:
        for j in range(1, cfg.j_max + 1):
            g = quantizer.gamma_upper(real, system, j, tol=cfg.tol, a=a, budget=cfg.budget)
            res = quantizer.improve(real, system, g.codebook, iterations=ns.iterations,
                                    seed=cfg.seed + j, tol=cfg.tol, start=g, a=a)
            rows.append((j, g.n, res.objective.hi, res.objective.mid, res.q(a)))
            if cfg.out_dir is not None:
                out.emit(f"codebook_j{j}.txt", io.points_text(res.codebook.points))
    finally:
        out.emit("quantize.csv", io.csv_text(["j", "psi", "ehat_hi", "ehat_bestfound", "Q"],
                                             rows))
    return EXIT_OK


def _slope(x, y):
    if len(x) < 2:
        return math.nan
    return float(np.polyfit(np.asarray(x, float), np.asarray(y, float), 1)[0])


def _cmd_report(cfg, ns, out):
    system, block = _load(cfg)
    model.require_valid(system)
    _fail_fast(system, cfg.j_max, cfg.budget)
    real = _realize(system, block)
    rep = analysis.convergence_report(system, real, cfg.j_max, cfg.k_max, tol=cfg.tol,
                                      seed=cfg.seed, budget=cfg.budget)
    out.emit("report_j.csv", io.csv_text(
        ["j", "psi", "t_j", "s0", "scaled_error", "sum_m_log_c", "ehat_hi", "Q", "empirical"],
        [(r.j, r.psi, r.t_j, r.s0, r.scaled_error, r.sum_m_log_c, r.ehat_hi, r.Q, True)
         for r in rep.j_rows]))
    out.emit("report_k.csv", io.csv_text(
        ["k", "s_k", "scaled_error", "x_k", "y_k"],
        [(r.k, r.s_k, r.scaled_error, r.x_k, r.y_k) for r in rep.k_rows]))
    tail = [r for r in rep.j_rows if r.j >= 4 and r.ehat_hi is not None]
    slope = _slope([math.log(r.psi) for r in tail], [r.ehat_hi for r in tail])
    s0 = rep.j_rows[0].s0 if rep.j_rows else spectral.s0(system).s0
    summary = {
        "system": rep.metadata["system"],
        "s0": s0,
        "slope": slope,
        "slope_dimension": -1.0 / slope if slope and math.isfinite(slope) else None,
        "complete": rep.complete,
        "empirical_C_t": rep.empirical_C_t,
        "empirical_C_s": rep.empirical_C_s,
        "t_stabilizes": analysis.stabilizes(rep.column("scaled_error", "j")),
        "s_stabilizes": analysis.stabilizes(rep.column("scaled_error", "k")),
        "x_stabilizes": analysis.stabilizes(rep.column("x_k", "k"), factor=1.1),
        "y_stabilizes": analysis.stabilizes(rep.column("y_k", "k"), factor=1.1),
    }
    out.emit("summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return EXIT_OK if rep.complete else EXIT_BUDGET


def _cmd_mixture(cfg, ns, out):
    lines = []
    if ns.dims is not None:
        weights = ns.weights if ns.weights is not None else [1 / len(ns.dims)] * len(ns.dims)
        t0 = analysis.mixture_dimension(ns.dims, weights)
        out.emit("mixture.csv", io.csv_text(["t0"], [(t0,)]))
    if cfg.system_path is not None:
        system, block = _load(cfg)
        model.require_valid(system)
        real = _realize(system, block)
        comps = model.closed_classes(system)
        dims = [spectral.s0(model.restrict(system, c)).s0 for c in comps]
        wts = [math.fsum(system.q[np.asarray(c) - 1]) for c in comps]
        t0 = analysis.mixture_dimension(dims, wts)
        for n in ns.n:
            chk = analysis.mixture_bracket_check(real, system, n, comps, seed=cfg.seed,
                                                 tol=cfg.tol)
            lines.append((n, t0, chk.passed, chk.lower_ok, chk.upper_ok, chk.lower_margin,
                          chk.upper_margin, True))
        out.emit("bracket.csv", io.csv_text(
            ["n", "t0", "passed", "lower_ok", "upper_ok", "lower_margin", "upper_margin",
             "heuristic"], lines))
        if not all(row[2] for row in lines):
            return EXIT_INVALID
    if ns.dims is None and cfg.system_path is None:
        raise ValueError("give --dims (and --weights) or a system file")
    return EXIT_OK


def _cmd_example(cfg, ns, out):
    U = np.full((2, 2), 0.5)
    C = np.zeros((4, 4))
    C[:2, :2] = ns.c1
    C[2:, 2:] = ns.c2
    t1, t2, t0 = analysis.reducible_example(U, U, C, np.full(4, 0.25))
    out.emit("example_reducible.csv", io.csv_text(["t1", "t2", "t0"], [(t1, t2, t0)]))
    return EXIT_OK


_COMMANDS = {"validate": _cmd_validate, "spectral": _cmd_spectral, "lambda": _cmd_lambda,
             "quantize": _cmd_quantize, "report": _cmd_report, "mixture": _cmd_mixture,
             "example-reducible": _cmd_example}


def _setup_logging():
    level = os.environ.get("QUANTDIM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    _setup_logging()
    parser = _parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        cfg = _config(ns)
        if cfg.threads > 1:
            log.info("--threads=%d accepted; running single-threaded", cfg.threads)
        return _COMMANDS[ns.command](cfg, ns, _Output(cfg.out_dir, stdout))
    except BudgetExceeded as exc:
        print(f"quantdim: budget exceeded: {exc}", file=stderr)
        return EXIT_BUDGET
    except InvalidSystem as exc:
        print("quantdim: invalid system:", file=stderr)
        for v in exc.violations:
            print(f"  {v}", file=stderr)
        return EXIT_INVALID
    except (io.SystemFileError, QuantDimError, ValueError) as exc:
        print(f"quantdim: {exc}", file=stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"quantdim: I/O error: {exc}", file=stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(run())
