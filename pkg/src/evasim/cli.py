"""Command line interface: ``attack run|sweep|serve|metrics``.

Exit codes: 0 success, 2 configuration error, 3 seed search failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .attack_ap import SeedSearchError
from .core import load_vectors_csv
from .harness import (
    ConfigError,
    emit_report,
    emit_sweep_csv,
    load_config,
    run_experiment,
    run_sweep,
)
from .metrics import EffectiveAttackSet, diversity_report
from .models import load_model
from .service import DefenderService

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SEED_FAILURE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="attack",
        description="Probing-based evasion attack simulation on binary classifiers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a configured experiment")
    run.add_argument("--config", required=True, help="JSON experiment config")
    run.add_argument("--seed", type=int, default=None, help="override master_seed")
    run.add_argument("--workers", type=int, default=None,
                     help="parallel run workers (local oracle only)")
    run.add_argument("--out", default=".", help="output directory")

    sweep = sub.add_parser("sweep", help="run a parameter sweep")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--param", default=None,
                       help="R_Exploit, B_Explore, or epsilon")
    sweep.add_argument("--values", default=None,
                       help="comma-separated sweep values")
    sweep.add_argument("--seed", type=int, default=None)
    sweep.add_argument("--out", default=".")

    serve = sub.add_parser("serve", help="serve a saved model as a defender")
    serve.add_argument("--model", required=True, help="model JSON file")
    serve.add_argument("--bind", default="127.0.0.1:8030", help="HOST:PORT")
    serve.add_argument("--budget", type=int, default=None,
                       help="probe budget per api key")

    metrics = sub.add_parser("metrics", help="metrics over an attack CSV")
    metrics.add_argument("--ea", required=True,
                         help="CSV of effective attacks, one vector per row")
    metrics.add_argument("--total", type=int, default=None,
                         help="total attack count behind the effective set")
    metrics.add_argument("--k", type=int, default=5)
    return parser


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    report = run_experiment(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    emit_report(report, "json", out / "report.json")
    emit_report(report, "csv", out / "runs.csv")
    print(f"runs: {cfg.runs}  attack: {cfg.attack}  seed: {cfg.master_seed}")
    for key in ("ear", "sigma", "knn_dist", "mst_dist"):
        print(f"  {key}: {report.mean(key):.4f} +/- {report.std(key):.4f}")
    print(f"wrote {out / 'report.json'} and {out / 'runs.csv'}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, master_seed=args.seed)
    if args.param is not None or args.values is not None:
        if args.param is None or args.values is None:
            raise ConfigError("--param and --values must be given together")
        try:
            values = [float(v) for v in args.values.split(",") if v.strip()]
        except ValueError:
            raise ConfigError(f"bad --values list: {args.values!r}") from None
        cfg = replace(cfg, sweep={"param": args.param, "values": values})
    results = run_sweep(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    emit_sweep_csv(results, out / "sweep.csv")
    for value, report in results:
        emit_report(report, "json", out / f"sweep_{value:g}.json")
        print(f"  value {value:g}: ear {report.mean('ear'):.4f}")
    print(f"wrote {out / 'sweep.csv'}")
    return EXIT_OK


def _cmd_serve(args) -> int:
    try:
        model = load_model(args.model)
    except (OSError, ValueError, KeyError) as err:
        raise ConfigError(f"cannot load model {args.model}: {err}") from None
    try:
        host, port_text = args.bind.rsplit(":", 1)
        port = int(port_text)
    except ValueError:
        raise ConfigError(f"bad --bind value {args.bind!r}") from None
    service = DefenderService(model, host=host, port=port,
                              budget_per_key=args.budget)
    print(f"serving on {service.url} (Ctrl-C to stop)")
    try:
        service.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        service.stop()
    return EXIT_OK


def _cmd_metrics(args) -> int:
    try:
        vectors = load_vectors_csv(args.ea)
    except (OSError, ValueError) as err:
        raise ConfigError(f"cannot read {args.ea}: {err}") from None
    if vectors.size == 0:
        raise ConfigError(f"{args.ea}: no vectors found")
    total = args.total if args.total is not None else vectors.shape[0]
    if total < vectors.shape[0]:
        raise ConfigError("--total is smaller than the number of rows")
    ea = EffectiveAttackSet(members=vectors, total_attacks=total)
    report = diversity_report(ea, k=args.k)
    doc = report.to_dict()
    if args.total is None:
        doc["ear"] = None  # unknown without the total attack count
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "serve": _cmd_serve,
        "metrics": _cmd_metrics,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except SeedSearchError as err:
        print(f"seed search failed: {err}", file=sys.stderr)
        return EXIT_SEED_FAILURE


if __name__ == "__main__":
    raise SystemExit(main())
