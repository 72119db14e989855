"""Configuration-driven experiment runner.

Commands: ``run <config>`` executes one experiment and writes CSV reports
whose headers echo the resolved configuration; ``validate`` runs the
verification battery; ``list-experiments`` prints the known kinds.
Environment overrides use the ``QEUCLID_`` prefix (``QEUCLID_OUT``,
``QEUCLID_SEED``, ``QEUCLID_THREADS``).

Exit codes: 0 success, 2 configuration error, 3 precondition violation,
4 numeric failure, 5 divergence, 1 unexpected error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import (EXPERIMENT_KINDS, ExperimentConfig, build_multiplier,
                     build_profile, build_symbol, parse_config)
from .errors import (AccuracyError, AssumptionError, CalibrationError,
                     ConfigurationError, DivergenceError, DomainError,
                     NumericError, SectorError, ShapeError)
from .grids import GridSpec, SymbolGrid, ThetaForm
from .lebesgue import lp_norm, singular_profile
from .multipliers import hormander_bound
from .evolution import EvolutionProblem, decay_sweep
from .nonlinear import PicardProblem, picard_heat, picard_wave
from .validation import run_validation_suite
from .weyl import RepSpace, quantize

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_PRECONDITION = 3
EXIT_NUMERIC = 4
EXIT_DIVERGENCE = 5


def _theta_and_grid(cfg: ExperimentConfig):
    theta = ThetaForm(cfg["theta.d"], cfg["theta.theta0"])
    grid = GridSpec(cfg["theta.d"], cfg["grid.half_width"], cfg["grid.n"])
    return theta, grid


def _run_sweep(cfg: ExperimentConfig, outdir: str) -> int:
    kind = {"heat_sweep": "heat", "schrodinger_sweep": "schrodinger",
            "wave_sweep": "wave"}[cfg.kind]
    theta, grid = _theta_and_grid(cfg)
    sigma = build_multiplier(cfg["problem.sigma"])
    u0 = build_symbol(cfg["data.u0"], grid)
    u1 = build_symbol(cfg["data.u1"], grid) if kind == "wave" else None
    times = np.logspace(np.log10(cfg["problem.t_min"]),
                        np.log10(cfg["problem.t_max"]),
                        cfg["problem.t_samples"])
    prob = EvolutionProblem(kind, cfg["problem.alpha"], sigma, u0, theta,
                            times, u1=u1, p=cfg["problem.p"],
                            q=cfg["problem.q"])
    report = decay_sweep(prob, mt_method=cfg["mt.method"])
    path = os.path.join(outdir, cfg["output.prefix"] + ".csv")
    report.to_csv(path, cfg.header_lines())
    summary = os.path.join(outdir, cfg["output.prefix"] + "_summary.txt")
    with open(summary, "w") as fh:
        for line in cfg.header_lines():
            fh.write(f"# {line}\n")
        fh.write(f"experiment: {cfg.kind}\n")
        fh.write(f"fitted_slope = {report.fitted_slope!r}\n")
        fh.write(f"theoretical_exponent = {report.theoretical_exponent!r}\n")
        fh.write(f"measured_constant = {report.measured_constant!r}\n")
        fh.write(f"assumption_violated = {report.assumption_violated}\n")
    print(f"wrote {path}")
    return EXIT_OK


def _run_multiplier_bound(cfg: ExperimentConfig, outdir: str,
                          seed: int) -> int:
    theta, grid = _theta_and_grid(cfg)
    rep = RepSpace.matched(theta, grid)
    g = build_multiplier(cfg["bound.g"])
    p, q = cfg["bound.p"], cfg["bound.q"]
    bound = hormander_bound(g, p, q, spec=grid)
    rng = np.random.default_rng(seed)
    gv = g.sample(grid)
    coords = grid.coords()
    rows = []
    for i in range(cfg["bound.samples"]):
        width = rng.uniform(0.6, 2.0)
        center = rng.uniform(-1.5, 1.5, size=grid.d)
        wave = rng.uniform(-2.0, 2.0, size=grid.d)
        shift = sum((c - c0) ** 2 for c, c0 in zip(coords, center))
        phase = sum(w * c for w, c in zip(wave, coords))
        f = SymbolGrid(grid, np.exp(-shift / (2 * width ** 2))
                       * np.exp(1j * phase))
        nq = lp_norm(singular_profile(quantize(SymbolGrid(grid, gv * f.values),
                                               theta, rep)), q)
        npn = lp_norm(singular_profile(quantize(f, theta, rep)), p)
        rows.append((i, nq / npn, bound))
    path = os.path.join(outdir, cfg["output.prefix"] + ".csv")
    with open(path, "w", newline="\n") as fh:
        for line in cfg.header_lines():
            fh.write(f"# {line}\n")
        fh.write("sample,ratio,bound\n")
        for row in rows:
            fh.write(f"{row[0]},{row[1]!r},{row[2]!r}\n")
    print(f"wrote {path}: max ratio {max(r[1] for r in rows):.4g} "
          f"vs bound {bound:.4g}")
    return EXIT_OK


def _run_nonlinear(cfg: ExperimentConfig, outdir: str) -> int:
    kind = "heat" if cfg.kind == "nonlinear_heat" else "wave"
    theta, grid = _theta_and_grid(cfg)
    u0 = build_symbol(cfg["data.u0"], grid)
    u1 = build_symbol(cfg["data.u1"], grid) if kind == "wave" else None
    prob = PicardProblem(kind, cfg["problem.p"],
                         build_profile(cfg["problem.h"]),
                         build_multiplier(cfg["problem.A"]),
                         u0, theta, cfg["problem.T"], u1=u1,
                         c=cfg["constants.c"], c1=cfg["constants.c1"],
                         delta=cfg["constants.delta"], c2=cfg["constants.c2"],
                         n_steps=cfg["picard.steps"], tol=cfg["picard.tol"])
    runner = picard_heat if kind == "heat" else picard_wave
    result = runner(prob, override_window=cfg["run.override_window"])
    path = os.path.join(outdir, cfg["output.prefix"] + "_certificate.csv")
    result.certificate_csv(path, cfg.header_lines())
    summary = os.path.join(outdir, cfg["output.prefix"] + "_summary.txt")
    with open(summary, "w") as fh:
        for line in cfg.header_lines():
            fh.write(f"# {line}\n")
        fh.write(f"experiment: {cfg.kind}\n")
        fh.write(f"converged = {result.converged}\n")
        fh.write(f"iterates = {len(result.sup_diffs)}\n")
        fh.write(f"contraction_factor = {result.contraction_factor!r}\n")
        fh.write(f"t_star = {result.t_star!r}\n")
        fh.write(f"window_override = {result.window_override}\n")
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = parse_config(args.config)
    outdir = args.out or os.environ.get("QEUCLID_OUT", ".")
    os.makedirs(outdir, exist_ok=True)
    seed = args.seed if args.seed is not None else \
        int(os.environ.get("QEUCLID_SEED", cfg["seed"]))
    if cfg.kind.endswith("_sweep"):
        return _run_sweep(cfg, outdir)
    if cfg.kind == "multiplier_bound":
        return _run_multiplier_bound(cfg, outdir, seed)
    return _run_nonlinear(cfg, outdir)


def _cmd_validate(args) -> int:
    selection = args.only.split(",") if args.only is not None else None
    if selection is not None:
        selection = [s for s in selection if s]
        if not selection:
            raise ConfigurationError("empty suite selection")
    records = run_validation_suite(selection=selection,
                                   ml_seam_radius=args.ml_seam_radius)
    for rec in records:
        print(rec.row())
    failed = [r for r in records if not r.passed]
    print(f"{len(records) - len(failed)}/{len(records)} criteria passed")
    return EXIT_OK if not failed else EXIT_NUMERIC


def _cmd_list(_args) -> int:
    for kind in EXPERIMENT_KINDS:
        print(kind)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qeuclid", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run one experiment from a config file")
    runp.add_argument("config")
    runp.add_argument("--out", default=None, help="output directory")
    runp.add_argument("--seed", type=int, default=None)
    runp.add_argument("--threads", type=int, default=None,
                      help="worker-thread cap (advisory)")
    runp.set_defaults(fn=_cmd_run)

    val = sub.add_parser("validate", help="run the verification battery")
    val.add_argument("--only", default=None,
                     help="comma-separated criterion names")
    val.add_argument("--ml-seam-radius", type=float, default=None,
                     help="override the Mittag-Leffler regime switch "
                          "(fault-injection hook)")
    val.set_defaults(fn=_cmd_validate)

    lst = sub.add_parser("list-experiments", help="list experiment kinds")
    lst.set_defaults(fn=_cmd_list)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, ShapeError, SectorError, AssumptionError) as exc:
        print(f"precondition violation: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (NumericError, AccuracyError, CalibrationError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DivergenceError as exc:
        print(f"divergence: {exc} (ratios {exc.ratio_history})",
              file=sys.stderr)
        return EXIT_DIVERGENCE
    except Exception as exc:  # pragma: no cover
        print(f"unexpected error: {exc}", file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
