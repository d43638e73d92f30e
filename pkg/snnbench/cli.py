"""
snnbench - Command Line Interface

Subcommands: train, convert, run, sweep, hil, nas, report, fetch, health,
presets. Result directories hold spec.json, results.csv, results.json and
table.txt; the exit code is non-zero when any cell failed unless
``--keep-going`` is given.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from .ann.model import evaluate
from .ann.serialization import save_model
from .bench.harness import ExperimentResult, run_experiment
from .bench.networks import NETWORK_PRESETS, load_network, pool_splits
from .bench.report import load_results, report
from .bench.spec import ExperimentSpec
from .config import config
from .conversion.convert import classify, convert
from .core.database import close, init
from .core.loader import load
from .data.fetch import MnistDownloader
from .data.mnist import load_mnist
from .exceptions import SnnBenchError
from .hardware.device import instantiate
from .hardware.profiles import list_presets, load_profile
from .health import health_check
from .hil.retrain import HilConfig, hil_train
from .logging_config import setup_logging
from .metrics import metrics
from .nas.config import NasConfig
from .nas.evaluators import MockEvaluator, TrainingEvaluator
from .nas.search import evolve

logger = logging.getLogger("snnbench")


def _spec(args) -> ExperimentSpec:
    spec = ExperimentSpec.from_file(args.config) if args.config else ExperimentSpec()
    update = {}
    if args.profile:
        update["platform"] = args.profile
    if args.seed is not None:
        update["seed"] = args.seed
    if getattr(args, "network", None):
        update["network"] = args.network
    return spec.model_copy(update=update) if update else spec


def _splits(args):
    return load_mnist(args.data_dir or config.data.dir, eval_size=config.data.eval_size)


def _out(args) -> Path:
    out = Path(args.out or config.runtime.results_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _store(args, files: List[Path]) -> None:
    if not args.store:
        return
    init(args.store)
    try:
        load([str(f) for f in files])
    finally:
        close()


def cmd_train(args) -> int:
    spec = _spec(args)
    bundle = load_network(spec.network, _splits(args), cache_dir=args.cache_dir)
    path = save_model(_out(args) / f"{Path(spec.network).stem}.snnb", bundle.model)
    eval_acc = 100.0 * evaluate(bundle.model, bundle.splits.eval)
    print(
        f"✓ {spec.network}: test {bundle.ann_accuracy:.2f}%, "
        f"eval {eval_acc:.2f}% -> {path}"
    )
    return 0


def cmd_convert(args) -> int:
    spec = _spec(args)
    bundle = load_network(spec.network, _splits(args), cache_dir=args.cache_dir)
    test = bundle.splits.test
    if spec.n_samples:
        test = test.subset(0, min(spec.n_samples, len(test)))
    net = convert(bundle.model, spec.lif, spec.conversion)
    result = classify(net, test, spec.conversion)
    out = _out(args) / "classified.csv"
    result.to_csv(out)
    ann = 100.0 * evaluate(bundle.model, test)
    snn = 100.0 * result.accuracy
    print(
        f"✓ ANN {ann:.2f}%, SNN {snn:.2f}%, "
        f"conversion loss {ann - snn:.2f}% -> {out}"
    )
    return 0


def _experiment(args, sweep: bool) -> int:
    spec = _spec(args)
    if not sweep:
        spec = spec.model_copy(update={"sweep": []})
    bundle = load_network(spec.network, _splits(args), cache_dir=args.cache_dir)
    result: ExperimentResult = run_experiment(spec, bundle, workers=args.workers)
    out = _out(args)
    artefacts = report(result, out)
    print(artefacts["table.txt"], end="")
    _store(args, [out / "results.json"])
    if result.failed:
        print(f"✗ {len(result.failed)} of {len(result.results)} cells failed")
        return 0 if args.keep_going else 1
    return 0


def cmd_run(args) -> int:
    return _experiment(args, sweep=False)


def cmd_sweep(args) -> int:
    return _experiment(args, sweep=True)


def cmd_hil(args) -> int:
    spec = _spec(args)
    hconf = spec.hil or HilConfig()
    bundle = load_network(spec.network, _splits(args), cache_dir=args.cache_dir)
    profile = load_profile(spec.platform, spec.profile_overrides or None)
    dev = instantiate(profile, spec.seed)
    result = hil_train(
        bundle.model,
        dev,
        spec.lif,
        spec.conversion,
        hconf,
        bundle.splits.train,
        bundle.splits.eval,
    )
    out = _out(args)
    trace = out / "hil_trace.json"
    trace.write_text(json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n")
    result.trace_to_csv(out / "hil_trace.csv")
    save_model(out / "hil_model.snnb", result.model)
    for row in result.trace:
        accuracy = 100.0 * row.device_accuracy
        print(f"  epoch {row.epoch:3d}: device accuracy {accuracy:.2f}%")
    _store(args, [trace])
    return 0


def cmd_nas(args) -> int:
    base = NasConfig.full() if args.scale == "full" else NasConfig.desk()
    update = {}
    if args.generations:
        update["generations"] = args.generations
    if args.seed is not None:
        update["seed"] = args.seed
    cfg = base.model_copy(update=update)
    if args.evaluator == "mock":
        evaluator, input_dim = MockEvaluator(), 784
    else:
        splits = _splits(args)
        if args.scale == "desk":
            splits = pool_splits(splits)
        evaluator = TrainingEvaluator(splits.train, splits.eval)
        input_dim = splits.train.input_dim
    out = _out(args)
    result = evolve(
        cfg,
        evaluator,
        input_dim,
        out / "nas_trace.jsonl",
        out / "pareto.csv",
        workers=args.workers,
    )
    best = json.dumps(result.best.to_dict(), indent=2, sort_keys=True)
    (out / "best_genome.json").write_text(best + "\n")
    for g in result.front:
        ev = g.evaluation
        accuracy = 100.0 * ev.accuracy
        print(f"  {g.structure_hash}: {accuracy:.2f}% with {ev.neurons} neurons")
    _store(args, [out / "nas_trace.jsonl"])
    return 0


def cmd_report(args) -> int:
    results = []
    for path in args.results:
        results.extend(load_results(path))
    artefacts = report(results, args.out)
    print(artefacts["table.txt"], end="")
    return 0


def cmd_fetch(args) -> int:
    data_dir = args.data_dir or config.data.dir
    paths = MnistDownloader().download(data_dir, force=args.force)
    for p in paths:
        print(f"✓ {p}")
    return 0


def cmd_health(args) -> int:
    if args.store:
        init(args.store)
    status = health_check(args.data_dir)
    print(json.dumps(status, indent=2, sort_keys=True))
    return 0 if status["overall"] == "healthy" else 1


def cmd_presets(args) -> int:
    print("Hardware profiles:")
    for name in list_presets():
        print(f"  {name:12s} {load_profile(name).description}")
    print("Networks:")
    for name, preset in NETWORK_PRESETS.items():
        inputs = "89" if preset.pooled else "784"
        dims = "x".join(str(d) for d in [inputs, *preset.hidden, 10])
        print(f"  {name:16s} {dims} ({preset.output_head} head, {preset.loss})")
    return 0


COMMANDS = {
    "train": (cmd_train, "train (or load) a network and save it"),
    "convert": (cmd_convert, "convert a network and classify on the ideal simulator"),
    "run": (cmd_run, "run an experiment without its sweep"),
    "sweep": (cmd_sweep, "run an experiment's full sweep grid"),
    "hil": (cmd_hil, "retrain a network for one device instance"),
    "nas": (cmd_nas, "genetic architecture search"),
    "report": (cmd_report, "re-render tables from results.json files"),
    "fetch": (cmd_fetch, "download MNIST"),
    "health": (cmd_health, "check dataset, presets and ledger"),
    "presets": (cmd_presets, "list hardware and network presets"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment JSON file")
    common.add_argument("--profile", help="hardware preset name or profile JSON")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", help="result directory")
    common.add_argument(
        "--keep-going", action="store_true", help="exit 0 even if cells failed"
    )
    common.add_argument(
        "--store", help="ledger database URL, e.g. sqlite:///snnbench.db"
    )
    common.add_argument("--data-dir", help="MNIST directory")
    common.add_argument("--cache-dir", help="trained preset cache")
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--log-level", default=None)

    parser = argparse.ArgumentParser(
        prog="snnbench",
        description="Convert perceptrons to spiking networks and benchmark them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    parsers = {}
    for name, (_, help_text) in COMMANDS.items():
        parsers[name] = sub.add_parser(name, parents=[common], help=help_text)
    for name in ("train", "convert", "run", "sweep", "hil"):
        parsers[name].add_argument(
            "--network", help="network preset, model file or genome JSON"
        )
    parsers["nas"].add_argument("--scale", choices=("desk", "full"), default="desk")
    parsers["nas"].add_argument(
        "--evaluator", choices=("train", "mock"), default="train"
    )
    parsers["nas"].add_argument("--generations", type=int, default=None)
    parsers["report"].add_argument("results", nargs="+", help="results.json files")
    parsers["fetch"].add_argument("--force", action="store_true")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    handler = COMMANDS[args.command][0]
    try:
        code = handler(args)
    except (SnnBenchError, FileNotFoundError) as e:
        print(f"✗ {e}", file=sys.stderr)
        code = 1
    logger.info(f"Metrics: {json.dumps(metrics.get_metrics(), sort_keys=True)}")
    return code


if __name__ == "__main__":
    sys.exit(main())
