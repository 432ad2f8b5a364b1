"""Command-line entry point.

Every subcommand reads JSON/JSONL, calls the library, and writes JSON or CSV
to ``-o`` (atomically) or to standard output. Diagnostics go to standard
error as JSON. Exit codes: 0 success, 1 validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import asdict

from . import nn, pipeline
from .errors import CapacityError, DecompositionError, InputError
from .graph import dumps_jsonl, graph_to_dict, loads_graph, read_jsonl
from .htree import build_htree, htree_stats, param_bound_corollary, param_bound_theorem
from .pgm import check_model, compatible_from_dict
from .subsample import sample_bounded_treewidth
from .treedecomp import junction_tree, validate_decomposition, width

log = logging.getLogger("neuraltree")


class UsageError(Exception):
    pass


class ValidationFailure(Exception):
    def __init__(self, payload: dict):
        super().__init__(payload.get("message", "validation failed"))
        self.payload = payload


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _write(path: str | None, text: str):
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    target = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(target), prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_text(path: str) -> str:
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _read_json(path: str):
    try:
        return json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}") from exc


def _need_seed(args):
    if args.seed is None:
        raise UsageError(f"'{args.command}' is stochastic and requires --seed")


# -- subcommands --------------------------------------------------------------

def cmd_decompose(args) -> str:
    g = loads_graph(_read_text(args.graph))
    td = junction_tree(g)
    report = validate_decomposition(g, td)
    if not report.ok:
        raise ValidationFailure({"message": "invalid decomposition",
                                 "violations": [v.to_dict() for v in report.violations]})
    log.info("decomposition: %d bags, width %d", len(td.bags), width(td))
    return _dump(td.to_dict())


def cmd_htree(args) -> str:
    g = loads_graph(_read_text(args.graph))
    h = build_htree(g)
    out = h.to_dict()
    out["stats"] = htree_stats(h)
    return _dump(out)


def cmd_bound(args) -> str:
    g = loads_graph(_read_text(args.graph))
    h = build_htree(g)
    tw = width(junction_tree(g))
    out = {"eps": args.eps, "n": g.n, "treewidth": tw,
           "theorem": param_bound_theorem(h, args.eps),
           "corollary": param_bound_corollary(g.n, tw, args.eps) if args.eps <= 1 else None}
    return _dump(out)


def cmd_sample(args) -> str:
    _need_seed(args)
    g = loads_graph(_read_text(args.graph))
    res = sample_bounded_treewidth(g, args.k, args.seed)
    return _dump({"graph": graph_to_dict(res.subgraph),
                  "decomposition": res.decomposition.to_dict(),
                  "dropped_edges": [list(e) for e in res.dropped_edges]})


def cmd_pgm_check(args) -> str:
    model = compatible_from_dict(_read_json(args.model))
    report = check_model(model).to_dict()
    if report["status"] != "PASS":
        raise ValidationFailure({"message": "model check failed", **report})
    return _dump(report)


def cmd_generate(args) -> str:
    _need_seed(args)
    params = json.loads(args.params) if args.params else {}
    if not isinstance(params, dict):
        raise UsageError("--params must be a JSON object")
    ds = pipeline.generate_synthetic(args.kind, params, args.seed)
    log.info("generated %d graphs (%d nodes)", len(ds.graphs), ds.num_outputs)
    return dumps_jsonl(ds.graphs)


def _train_config(obj, seed: int) -> pipeline.TrainConfig:
    if not isinstance(obj, dict):
        raise UsageError("train config must be a JSON object")
    obj = dict(obj)
    obj["seed"] = seed
    model = dict(obj.get("model", {}))
    model.setdefault("seed", seed)
    obj["model"] = model
    return pipeline.TrainConfig.from_dict(obj)


def cmd_train(args) -> str:
    _need_seed(args)
    cfg = _train_config(_read_json(args.config), args.seed)
    try:
        graphs = read_jsonl(args.dataset)
    except OSError as exc:
        raise UsageError(f"cannot read {args.dataset}: {exc.strerror}") from exc
    ds = pipeline.dataset_from_graphs(graphs)
    report = pipeline.train(ds, cfg)
    log.info("test %s %.4f at epoch %d", report.metric, report.test_metric, report.best_epoch)
    if args.checkpoint:
        _write(args.checkpoint, report.params.dumps() + "\n")
    return _dump(report.to_dict())


EXPERIMENT_KEYS = {"kind", "params", "axis", "grid", "repeats", "train"}


def cmd_experiment(args) -> str:
    _need_seed(args)
    cfg = _read_json(args.config)
    if not isinstance(cfg, dict):
        raise UsageError("experiment config must be a JSON object")
    unknown = set(cfg) - EXPERIMENT_KEYS
    if unknown:
        raise UsageError(f"unknown experiment config field(s): {sorted(unknown)}")
    for key in ("kind", "axis", "grid"):
        if key not in cfg:
            raise UsageError(f"experiment config is missing field {key!r}")
    ds = pipeline.generate_synthetic(cfg["kind"], cfg.get("params", {}), args.seed)
    base = _train_config(cfg.get("train", {}), args.seed)
    rows = pipeline.experiment_curves(ds, cfg["axis"], cfg["grid"], int(cfg.get("repeats", 1)),
                                      args.seed, base, jobs=args.jobs)
    return pipeline.curves_to_csv(rows)


COMMANDS = {
    "decompose": cmd_decompose, "htree": cmd_htree, "bound": cmd_bound,
    "sample": cmd_sample, "pgm-check": cmd_pgm_check, "generate": cmd_generate,
    "train": cmd_train, "experiment": cmd_experiment,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="neuraltree", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_, *, graph=False, seed=False):
        sp = sub.add_parser(name, help=help_)
        if graph:
            sp.add_argument("graph", help="graph JSON file")
        if seed:
            sp.add_argument("--seed", type=int, default=None, help="random seed (required)")
        sp.add_argument("-o", "--output", default=None, help="output file (default: stdout)")
        return sp

    add("decompose", "junction tree of a graph", graph=True)
    add("htree", "H-tree of a graph", graph=True)
    add("bound", "parameter-count bounds", graph=True).add_argument(
        "--eps", type=float, required=True)
    add("sample", "bounded-treewidth subgraph", graph=True, seed=True).add_argument(
        "--k", type=int, required=True)
    add("pgm-check", "self-check a discrete model file").add_argument("model")
    gen = add("generate", "synthetic dataset as JSONL", seed=True)
    gen.add_argument("--kind", required=True, choices=pipeline.KINDS)
    gen.add_argument("--params", default=None, help="generator parameters as a JSON object")
    tr = add("train", "train one model", seed=True)
    tr.add_argument("--config", required=True)
    tr.add_argument("--checkpoint", default=None, help="write the best parameters here")
    tr.add_argument("dataset")
    ex = add("experiment", "paired accuracy curves as CSV", seed=True)
    ex.add_argument("--config", required=True)
    ex.add_argument("--jobs", type=int, default=1, help="worker processes")
    return p


def _diag(kind: str, message: str, **extra):
    sys.stderr.write(_dump({"error": kind, "message": message, **extra}))


def _setup_logging():
    level = os.environ.get("NT_LOG", "error").lower()
    levels = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
    if level not in levels:
        level = "error"
    logging.basicConfig(level=levels[level], stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    try:
        args = build_parser().parse_args(argv)
        text = COMMANDS[args.command](args)
        _write(args.output, text)
        return 0
    except UsageError as exc:
        _diag("usage", str(exc))
        return 2
    except (InputError, TypeError, KeyError, json.JSONDecodeError) as exc:
        _diag("input", str(exc))
        return 2
    except ValidationFailure as exc:
        _diag("validation", str(exc), **{k: v for k, v in exc.payload.items() if k != "message"})
        return 1
    except (CapacityError, DecompositionError) as exc:
        _diag("validation", str(exc))
        return 1


run = main
