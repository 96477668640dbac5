"""free-stein command line.

  free-stein irregularity --model specs/semicircular2.json --dxi 3
  free-stein closed-form one-var --model specs/twopoint.json
  free-stein sweep-radius --model specs/semicircular1.json --radii 0.25,0.5,1,2 --csv out.csv
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from pydantic import ValidationError

from . import SCHEMA_VERSION, closedform, config, stein
from .errors import FreeSteinError, ModelSpecError, NumericalDiagnostic
from .parser import parse_poly
from .schemas import (Command, FreeProductModelSpec, GraphSpec, MatrixModelSpec, RadulescuSpec,
                      RunConfig, SweepPoint, load_model_spec)
from .trace import MatrixModel, MeasureModel, TraceModel, check_tracial

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

CLOSED_FORMS = ("one-var", "eigenvalues", "fd", "group", "finite-group", "radulescu", "graph",
                "eps-kernel", "log-energy")


def _floats(text: str) -> list[float]:
    return [float(Fraction(x)) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="free-stein",
                                 description="Free Stein discrepancy, irregularity and dimension.")
    ap.add_argument("--verbose", action="store_true")
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--cap", type=int, default=None, help="degree cap (letters); FREE_STEIN_CAP otherwise")
    ap.add_argument("--max-condition", type=float, default=None)
    ap.add_argument("--cutoff", type=float, default=config.EIGEN_CUTOFF)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, model=True):
        if model:
            p.add_argument("--model", type=Path, required=False)
        p.add_argument("--out", type=Path, default=None, help="JSON report path (stdout otherwise)")
        p.add_argument("--csv", type=Path, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--self-check", action="store_true", help="check the trace property first")

    def degrees(p):
        p.add_argument("--dxi", type=int, default=1)
        p.add_argument("--dproj", type=int, default=None)

    p = sub.add_parser("discrepancy")
    common(p)
    degrees(p)
    p.add_argument("--xi", required=True, help="polynomial tuple, or @file")

    p = sub.add_parser("irregularity")
    common(p)
    degrees(p)

    p = sub.add_parser("bounded")
    common(p)
    degrees(p)
    p.add_argument("--radii", type=_floats, required=True)

    p = sub.add_parser("sigma-exact")
    common(p)
    p.add_argument("--degree", type=int, default=2)
    p.add_argument("--free", action="store_true", help="free product of matrix factors")

    p = sub.add_parser("closed-form")
    common(p)
    p.add_argument("which", choices=CLOSED_FORMS)
    p.add_argument("--values", type=_floats, default=None, help="eigenvalues")
    p.add_argument("--beta0", type=Fraction, default=None)
    p.add_argument("--beta1", type=Fraction, default=None)
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--spec", type=Path, default=None, help="graph or radulescu JSON")
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--level", type=int, default=None)

    p = sub.add_parser("sweep-degree")
    common(p)
    p.add_argument("--quantity", choices=[q.value for q in stein.SweepQuantity], default="irregularity")
    p.add_argument("--degrees", type=_ints, required=True)
    p.add_argument("--xi", default=None)
    degrees(p)

    p = sub.add_parser("sweep-radius")
    common(p)
    degrees(p)
    p.add_argument("--radii", type=_floats, required=True)

    p = sub.add_parser("alpha")
    common(p)
    degrees(p)
    p.add_argument("--sweep-csv", type=Path, default=None)
    p.add_argument("--radii", type=_floats, default=None)
    return ap


def _run_config(args) -> RunConfig:
    fields = {"command": args.command, "model": getattr(args, "model", None), "out": args.out,
              "csv": args.csv, "seed": args.seed, "cutoff": args.cutoff}
    if getattr(args, "xi", None) is not None:
        fields["xi"] = args.xi
    if hasattr(args, "dxi"):
        fields["d_xi"] = args.dxi
        fields["d_proj"] = args.dproj
    if hasattr(args, "degree"):
        fields["degree"] = args.degree
    if getattr(args, "degrees", None):
        fields["degrees"] = args.degrees
    if getattr(args, "radii", None):
        fields["radii"] = args.radii
    for name in ("threads", "cap", "max_condition"):
        if getattr(args, name) is not None:
            fields[name] = getattr(args, name)
    return RunConfig(**fields)


def _load_spec(cfg: RunConfig):
    if cfg.model is None:
        raise ModelSpecError("model", "this command needs --model")
    spec = load_model_spec(cfg.model)
    if spec.cap is None:
        spec = spec.model_copy(update={"cap": cfg.cap})
    return spec


def _load_model(cfg: RunConfig) -> TraceModel:
    return _load_spec(cfg).build()


def _xi(cfg: RunConfig, model: TraceModel):
    text = cfg.xi
    if text is None:
        raise ModelSpecError("xi", "this command needs --xi")
    if text.startswith("@"):
        text = Path(text[1:]).read_text()
    return parse_poly(text, model.system)


def _plain(value):
    """Dataclass results with exact Fractions reported as floats plus their exact text."""
    out, exact = {}, {}
    for f in dataclasses.fields(value):
        v = getattr(value, f.name)
        if isinstance(v, Fraction):
            exact[f.name] = str(v)
            v = float(v)
        out[f.name] = v
    if exact:
        out["exact"] = exact
    return out


@dataclasses.dataclass
class Outcome:
    report: dict
    rows: Optional[list[SweepPoint]] = None
    condition: float = 1.0


def cmd_discrepancy(cfg, args) -> Outcome:
    model = _load_model(cfg)
    _self_check(model, args)
    report = stein.discrepancy(model, _xi(cfg, model), cfg.scheme(), cfg.cutoff, cfg.threads)
    return Outcome(report.model_dump(), condition=report.gram_condition)


def cmd_irregularity(cfg, args) -> Outcome:
    model = _load_model(cfg)
    _self_check(model, args)
    report = stein.irregularity_estimate(model, cfg.scheme(), cfg.cutoff, cfg.threads)
    rows = [SweepPoint(parameter=d, value=v) for d, v in report.trail]
    return Outcome(report.model_dump(), rows, report.gram_condition)


def cmd_bounded(cfg, args) -> Outcome:
    model = _load_model(cfg)
    _self_check(model, args)
    reports = [stein.irregularity_bounded(model, cfg.scheme(), R, cfg.cutoff, threads=cfg.threads)
               for R in cfg.radii]
    rows = [SweepPoint(parameter=r.radius, value=r.value) for r in reports]
    return Outcome({"reports": [r.model_dump() for r in reports]}, rows,
                   max(r.gram_condition for r in reports))


def cmd_sigma_exact(cfg, args) -> Outcome:
    spec = _load_spec(cfg)
    if args.free:
        if not isinstance(spec, FreeProductModelSpec):
            raise ModelSpecError("type", "--free needs a free_product spec")
        factors = []
        for k, f in enumerate(spec.factors):
            if not isinstance(f, MatrixModelSpec):
                raise ModelSpecError(f"factors[{k}].type", "every factor must be a matrix model")
            factors.append(f.build())
        report = stein.sigma_exact_fd_free(factors, cfg.degree)
    else:
        model = spec.build()
        if not isinstance(model, MatrixModel):
            raise ModelSpecError("type", "sigma-exact needs a matrix model")
        _self_check(model, args)
        report = stein.sigma_exact_fd(model, cfg.degree)
    rows = [SweepPoint(parameter=d, value=v) for d, v in report.trail]
    return Outcome(report.model_dump(), rows)


def _measure(cfg) -> MeasureModel:
    model = _load_model(cfg)
    if not isinstance(model, MeasureModel):
        raise ModelSpecError("type", "this closed form needs a measure model")
    return model


def cmd_closed_form(cfg, args) -> Outcome:
    which = args.which
    if which == "one-var":
        model = _load_model(cfg)
        if isinstance(model, MatrixModel) and model.n == 1:
            eigenvalues = np.concatenate([np.linalg.eigvalsh(b) for b in model.matrices[0]])
            if len(set(model.sizes)) == 1 and len(set(model.weights)) == 1:
                return Outcome(_plain(closedform.eigenvalue_sigma(eigenvalues)))
            raise ModelSpecError("blocks", "one-var on a matrix model needs equal blocks and weights")
        if not isinstance(model, MeasureModel):
            raise ModelSpecError("type", "one-var needs a measure or a single-generator matrix model")
        return Outcome(_plain(closedform.one_var_sigma(model)))
    if which == "eigenvalues":
        if not args.values:
            raise ModelSpecError("values", "eigenvalues needs --values")
        return Outcome(_plain(closedform.eigenvalue_sigma(args.values)))
    if which == "fd":
        spec = _load_spec(cfg)
        if not isinstance(spec, MatrixModelSpec):
            raise ModelSpecError("type", "fd needs a matrix spec")
        sigma = closedform.fd_sigma([(b.size, b.weight) for b in spec.blocks])
        return Outcome({"sigma": float(sigma), "exact": {"sigma": str(sigma)}})
    if which == "group":
        if args.beta0 is None or args.beta1 is None:
            raise ModelSpecError("beta0", "group needs --beta0 and --beta1")
        sigma = closedform.group_sigma(args.beta0, args.beta1)
        return Outcome({"sigma": float(sigma), "exact": {"sigma": str(sigma)}})
    if which == "finite-group":
        if args.order is None:
            raise ModelSpecError("order", "finite-group needs --order")
        sigma = closedform.finite_group_sigma(args.order)
        return Outcome({"sigma": float(sigma), "exact": {"sigma": str(sigma)}})
    if which in ("radulescu", "graph"):
        if args.spec is None:
            raise ModelSpecError("spec", f"{which} needs --spec")
        text = args.spec.read_text()
        if which == "radulescu":
            return Outcome(_plain(closedform.radulescu(RadulescuSpec.model_validate_json(text))))
        return Outcome(_plain(closedform.graph_sigma(GraphSpec.model_validate_json(text))))
    if which == "eps-kernel":
        result = closedform.eps_kernel(_measure(cfg), args.eps)
        return Outcome(_plain(result))
    result = closedform.log_energy(_measure(cfg), args.level)
    rows = [SweepPoint(parameter=k, value=v) for k, v in enumerate(result.partial_sums, start=1)]
    return Outcome(_plain(result), rows or None)


def cmd_sweep_degree(cfg, args) -> Outcome:
    model = _load_model(cfg)
    _self_check(model, args)
    quantity = stein.SweepQuantity(args.quantity)
    Xi = _xi(cfg, model) if quantity is stein.SweepQuantity.DISCREPANCY else None
    if quantity is stein.SweepQuantity.SIGMA_EXACT and not isinstance(model, MatrixModel):
        raise ModelSpecError("type", "an exact sweep needs a matrix model")
    points = stein.degree_sweep(model, quantity, cfg.degrees, Xi=Xi, d_proj=cfg.d_proj, d_xi=cfg.d_xi,
                                cutoff=cfg.cutoff, threads=cfg.threads)
    return Outcome({"quantity": quantity.value, "points": [p.model_dump() for p in points]}, points)


def cmd_sweep_radius(cfg, args) -> Outcome:
    model = _load_model(cfg)
    _self_check(model, args)
    report = stein.radius_sweep(model, cfg.scheme(), cfg.radii, cfg.cutoff, threads=cfg.threads)
    return Outcome(report.model_dump(), report.points)


def cmd_alpha(cfg, args) -> Outcome:
    if args.sweep_csv is not None:
        table = pd.read_csv(args.sweep_csv)
        sweep = list(zip(table["parameter"].astype(float), table["value"].astype(float)))
        rows = None
    else:
        if not cfg.radii:
            raise ModelSpecError("radii", "alpha needs --sweep-csv or --model with --radii")
        model = _load_model(cfg)
        _self_check(model, args)
        swept = stein.radius_sweep(model, cfg.scheme(), cfg.radii, cfg.cutoff, threads=cfg.threads)
        sweep = [(p.parameter, p.value) for p in swept.points]
        rows = swept.points
    report = stein.alpha_estimate(sweep)
    return Outcome(report.model_dump(), rows)


HANDLERS = {
    Command.DISCREPANCY: cmd_discrepancy,
    Command.IRREGULARITY: cmd_irregularity,
    Command.BOUNDED: cmd_bounded,
    Command.SIGMA_EXACT: cmd_sigma_exact,
    Command.CLOSED_FORM: cmd_closed_form,
    Command.SWEEP_DEGREE: cmd_sweep_degree,
    Command.SWEEP_RADIUS: cmd_sweep_radius,
    Command.ALPHA: cmd_alpha,
}


def _self_check(model: TraceModel, args) -> None:
    if getattr(args, "self_check", False):
        worst = check_tracial(model, np.random.default_rng(args.seed))
        logger.info("trace property holds to %.3e", worst)


def write_report(report: dict, out: Optional[Path]) -> None:
    text = json.dumps({"schema": SCHEMA_VERSION, **report}, sort_keys=True, indent=2, default=str)
    if out is None:
        sys.stdout.write(text + "\n")
    else:
        out.write_text(text + "\n", encoding="utf-8")


def write_csv(rows: list[SweepPoint], path: Path) -> None:
    frame = pd.DataFrame([r.model_dump() for r in rows], columns=["parameter", "value", "diagnostics"])
    frame.to_csv(path, index=False)


def main(argv: Optional[list[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _run_config(args)
        outcome = HANDLERS[cfg.command](cfg, args)
    except NumericalDiagnostic as exc:
        logger.error("numerical diagnostic: %s", exc)
        if exc.partial is not None:
            write_report({"partial": exc.partial, "diagnostic": str(exc)}, args.out)
        return EXIT_NUMERICAL
    except ValidationError as exc:
        logger.error("invalid input: %s", exc)
        return EXIT_INVALID
    except (FreeSteinError, OSError, ValueError) as exc:
        logger.error("%s", exc)
        return EXIT_INVALID

    write_report(outcome.report, cfg.out)
    if cfg.csv is not None and outcome.rows:
        write_csv(outcome.rows, cfg.csv)
    if outcome.condition > cfg.max_condition:
        logger.error("Gram condition %.3e exceeds %.3e", outcome.condition, cfg.max_condition)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
