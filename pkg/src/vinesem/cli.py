"""Command-line interface.

Subcommands::

    vinesem fit           fit a D-vine SEM and write model + fit tables
    vinesem fit-lgbn      fit the linear Gaussian network
    vinesem simulate      forward-sample a fitted model
    vinesem cond-sample   sample nodes given fixed parent values
    vinesem quantile-path conditional-median path from a root quantile
    vinesem joint-density joint log-density of data rows

Exit codes: 0 success, 1 numerical failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from scipy import stats

from . import __version__
from ._util import NumericError, UsageError, VinesemError
from .graph import read_dag
from .lgbn import LgbnModel, fit_lgbn
from .sem import SemConfig, SemModel, copula_table, fit_sem, gof_table, joint_logdensity, margins_table, pruned_edges
from .simulate import cond_median_path, sample_lgbn, sample_node_given_parents, sample_sem

log = logging.getLogger("vinesem")


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    return f"{float(x):.6g}"


def read_table(path, log_transform: bool = False) -> dict:
    """Read a headed numeric CSV into named float columns."""
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"{path}: no such file")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise UsageError(f"{path}: empty file") from None
        if len(set(header)) != len(header):
            raise UsageError(f"{path}: duplicate column names in header")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise UsageError(f"{path}, line {lineno}: expected {len(header)} fields, got {len(row)}")
            vals = []
            for name, field in zip(header, row):
                try:
                    vals.append(float(field))
                except ValueError:
                    raise UsageError(f"{path}, line {lineno}, column {name!r}: not a number: {field!r}") from None
            rows.append(vals)
    if not rows:
        raise UsageError(f"{path}: no data rows")
    arr = np.array(rows)
    if log_transform:
        bad = np.argwhere(arr <= 0)
        if bad.size:
            r, c = bad[0]
            raise UsageError(f"{path}, line {r + 2}, column {header[c]!r}: --log needs positive values")
        arr = np.log(arr)
    return {h: arr[:, k] for k, h in enumerate(header)}


def write_rows(path, header, rows) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(x) for x in r])


def write_sidecar(out: Path, command: str, args: argparse.Namespace) -> None:
    info = {k: v for k, v in vars(args).items() if k != "func"}
    info.update(command=command, version=__version__, timestamp=datetime.now(timezone.utc).isoformat())
    (out / f"{command}.run.json").write_text(json.dumps(info, indent=2, default=str) + "\n")


def load_model(path):
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"{path}: no such file")
    try:
        d = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    kind = d.get("kind")
    if kind == "sem":
        return SemModel.from_dict(d)
    if kind == "lgbn":
        return LgbnModel.from_dict(d)
    raise UsageError(f"{path}: field 'kind' must be 'sem' or 'lgbn', got {kind!r}")


def check_dag(model, dag_path) -> None:
    if dag_path is None:
        return
    dag = read_dag(dag_path)
    if set(dag.nodes) != set(model.dag.nodes) or set(dag.edges) != set(model.dag.edges):
        raise UsageError(f"{dag_path}: graph does not match the one the model was fitted on")


def outdir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _gof_rows(rows):
    return [(r.node, r.loglik, r.aic, r.bic, r.edf) for r in rows]


# -- commands -----------------------------------------------------------------


def cmd_fit(args) -> int:
    dag = read_dag(args.dag)
    data = read_table(args.data, args.log)
    config = SemConfig(args.margins, args.copulas, args.criterion)
    model = fit_sem(data, dag, config, threads=args.threads)
    out = outdir(args.out)
    (out / "model.json").write_text(json.dumps(model.to_dict()) + "\n")
    write_rows(out / "margins_gof.csv", ["node", "loglik", "aic", "bic", "edf"], _gof_rows(margins_table(model)))
    write_rows(
        out / "copulas_gof.csv",
        ["node", "order", "loglik", "aic", "bic", "edf"],
        [(v, " ".join(order), r.loglik, r.aic, r.bic, r.edf) for v, order, r in copula_table(model)],
    )
    write_rows(out / "sem_gof.csv", ["node", "loglik", "aic", "bic", "edf"], _gof_rows(gof_table(model)))
    (out / "pruned_edges.txt").write_text("".join(f"{p}->{c}\n" for p, c in pruned_edges(model)))
    write_sidecar(out, "fit", args)
    return 0


def cmd_fit_lgbn(args) -> int:
    dag = read_dag(args.dag)
    data = read_table(args.data, args.log)
    model = fit_lgbn(data, dag)
    out = outdir(args.out)
    (out / "lgbn.json").write_text(json.dumps(model.to_dict()) + "\n")
    rows = model.gof_rows()
    ll, edf = model.loglik, model.edf
    rows.append(("total", ll, -2 * ll + 2 * edf, -2 * ll + math.log(model.n) * edf, edf))
    write_rows(out / "lgbn_gof.csv", ["node", "loglik", "aic", "bic", "edf"], rows)
    write_sidecar(out, "fit-lgbn", args)
    return 0


def cmd_simulate(args) -> int:
    model = load_model(args.model)
    check_dag(model, args.dag)
    if isinstance(model, SemModel):
        sim = sample_sem(model, args.n, args.seed)
    else:
        sim = sample_lgbn(model, args.n, args.seed)
    out = outdir(args.out)
    names = list(model.dag.nodes)
    write_rows(out / "simulated.csv", names, zip(*(sim[v] for v in names)))
    write_sidecar(out, "simulate", args)
    return 0


def read_cond_values(path) -> dict:
    """Conditioning points keyed by (node, point) -> {parent: value}."""
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"{path}: no such file")
    points: dict = {}
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"node", "point", "parent", "value"}
        if reader.fieldnames is None or not need <= set(reader.fieldnames):
            raise UsageError(f"{path}: header must contain {sorted(need)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                value = float(row["value"])
            except (TypeError, ValueError):
                raise UsageError(f"{path}, line {lineno}, column 'value': not a number: {row['value']!r}") from None
            points.setdefault((row["node"], row["point"]), {})[row["parent"]] = value
    return points


def cmd_cond_sample(args) -> int:
    model = load_model(args.model)
    if not isinstance(model, SemModel):
        raise UsageError("cond-sample needs a fitted SEM model")
    check_dag(model, args.dag)
    points = read_cond_values(args.cond_values)
    if args.node:
        points = {k: v for k, v in points.items() if k[0] == args.node}
    if args.point:
        points = {k: v for k, v in points.items() if k[1] == args.point}
    if not points:
        raise UsageError("no conditioning points left after filtering")
    out = outdir(args.out)
    samples, dens = [], []
    for (node, point), parents in points.items():
        if node not in model.regs:
            raise UsageError(f"conditioning file names unknown node {node!r}")
        draws = sample_node_given_parents(model, node, parents, args.n, args.seed)
        samples.extend((node, point, x) for x in draws)
        grid = np.linspace(draws.min(), draws.max(), 200)
        if np.ptp(draws) > 0:
            kd = stats.gaussian_kde(draws)(grid)
            dens.extend((node, point, g, f) for g, f in zip(grid, kd))
    write_rows(out / "cond_samples.csv", ["node", "point", "value"], samples)
    write_rows(out / "cond_density.csv", ["node", "point", "x", "density"], dens)
    write_sidecar(out, "cond-sample", args)
    return 0


def cmd_quantile_path(args) -> int:
    model = load_model(args.model)
    if not isinstance(model, SemModel):
        raise UsageError("quantile-path needs a fitted SEM model")
    check_dag(model, args.dag)
    path = cond_median_path(model, args.alpha)
    out = outdir(args.out)
    write_rows(out / "quantile_path.csv", ["node", "value"], path.items())
    write_sidecar(out, "quantile-path", args)
    return 0


def cmd_joint_density(args) -> int:
    model = load_model(args.model)
    check_dag(model, args.dag)
    data = read_table(args.data, args.log)
    missing = [v for v in model.dag.nodes if v not in data]
    if missing:
        raise UsageError(f"{args.data}: missing column(s) {missing}")
    if isinstance(model, SemModel):
        ld = joint_logdensity(model, data)
    else:
        ld = model.logdensity(data)
    out = outdir(args.out)
    write_rows(out / "joint_density.csv", ["row", "logdensity"], zip(range(1, ld.size + 1), ld))
    write_sidecar(out, "joint-density", args)
    return 0


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vinesem", description="D-vine copula structural equation models")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, data=False, dag_required=False, model=False):
        if data:
            sp.add_argument("--data", required=True, help="CSV with a header row")
            sp.add_argument("--log", action="store_true", help="natural log of all columns before use")
        sp.add_argument("--dag", required=dag_required, help="graph JSON")
        if model:
            sp.add_argument("--model", required=True, help="model JSON from fit or fit-lgbn")
        sp.add_argument("--out", default=".", help="output directory")

    sp = sub.add_parser("fit", help="fit a D-vine SEM")
    common(sp, data=True, dag_required=True)
    sp.add_argument("--margins", choices=("gaussian", "mixture", "kde"), default="gaussian")
    sp.add_argument("--copulas", choices=("gaussian", "parametric", "pnp"), default="gaussian")
    sp.add_argument("--criterion", choices=("cll", "caic", "cbic"), default="caic")
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0, help="recorded in the sidecar; fitting is deterministic")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("fit-lgbn", help="fit the linear Gaussian network")
    common(sp, data=True, dag_required=True)
    sp.set_defaults(func=cmd_fit_lgbn)

    sp = sub.add_parser("simulate", help="forward-sample a fitted model")
    common(sp, model=True)
    sp.add_argument("--n", type=int, default=845)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("cond-sample", help="sample nodes given parent values")
    common(sp, model=True)
    sp.add_argument("--cond-values", required=True, help="CSV with columns node,point,parent,value")
    sp.add_argument("--node", help="only this node")
    sp.add_argument("--point", help="only this conditioning point label")
    sp.add_argument("--n", type=int, default=845)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_cond_sample)

    sp = sub.add_parser("quantile-path", help="conditional-median path")
    common(sp, model=True)
    sp.add_argument("--alpha", type=float, default=0.5)
    sp.set_defaults(func=cmd_quantile_path)

    sp = sub.add_parser("joint-density", help="joint log-density of data rows")
    common(sp, data=True, model=True)
    sp.set_defaults(func=cmd_joint_density)
    return p


def main(argv=None) -> int:
    level = os.environ.get("VINESEM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (NumericError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"vinesem: numerical failure: {exc}", file=sys.stderr)
        return 1
    except (UsageError, VinesemError, OSError) as exc:
        print(f"vinesem: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
