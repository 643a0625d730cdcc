"""Command-line surface tying the pipeline together.

Subcommands: simulate, train, generate, validate, wdist, gradcheck. Every
command is deterministic given (flags, config file, seed); reruns produce
byte-identical primary outputs. Exit codes are a stable scripting contract:
0 success, 2 usage or configuration error, 3 runtime or numeric error.

The optional --config file is a JSON mirror of the pipeline configuration:

    {
      "system": "smib", "seed": 0, "out": ".", "samples": 500,
      "data": "data/dataset.csv", "checkpoint": "runs/checkpoint.json",
      "threshold": 0.09,
      "simulation": {"dt": 0.0166667, "steps": 200,
                     "coefficients": {"alpha": 0.5, "beta": 5.0, "gamma": -1.0},
                     "circuit": {"e_internal": 1.05, "v_inf": 1.0, "x_line": 0.5},
                     "ranges": {"delta0_min": 0.2, "delta0_max": 1.0,
                                "omega0_min": -1.0, "omega0_max": 1.0}},
      "train": {"batch_size": 64, "critic_steps": 5, "clip": 0.01,
                "learning_rate": 1e-4, "iterations": 20000, "noise_dim": 32},
      "filter": {"cutoff_hz": 5.0, "sample_rate_hz": 60.0, "order": 2}
    }

Explicit flags override config-file values, which override built-in defaults.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from . import io
from .datasets import (
    InitialConditionRanges,
    SimulationConfig,
    build_dataset,
    records_to_matrix,
)
from .errors import ConfigurationError, PmuGanError
from .gan import TrainConfig, generate, train, wasserstein_1d
from .identify import DEFAULT_THRESHOLD, validate_dataset
from .network import NetworkSpec, gradient_check_layers, init_network
from .signals import FilterSpec, filter_records
from .swing import SmibCircuit, SwingCoefficients

GRADCHECK_THRESHOLD = 1e-4

_TOP_LEVEL_KEYS = {
    "system", "seed", "out", "samples", "data", "checkpoint",
    "threshold", "simulation", "train", "filter",
}


def _load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigurationError(f"config {path} must hold a JSON object")
    unknown = sorted(set(doc) - _TOP_LEVEL_KEYS)
    if unknown:
        raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")
    return doc


def _section(cls, data, name: str):
    """Strict dict -> dataclass: unknown keys are configuration errors."""
    if not isinstance(data, dict):
        raise ConfigurationError(f"config section {name!r} must be an object")
    allowed = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigurationError(f"unknown keys in {name!r}: {', '.join(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigurationError(f"bad section {name!r}: {exc}") from None


def _simulation_config(section) -> SimulationConfig:
    if not isinstance(section, dict):
        raise ConfigurationError("config section 'simulation' must be an object")
    data = dict(section)
    for key, cls in (
        ("coefficients", SwingCoefficients),
        ("circuit", SmibCircuit),
        ("ranges", InitialConditionRanges),
    ):
        if key in data:
            data[key] = _section(cls, data[key], f"simulation.{key}")
    return _section(SimulationConfig, data, "simulation")


def _train_config(section) -> TrainConfig:
    if not isinstance(section, dict):
        raise ConfigurationError("config section 'train' must be an object")
    data = dict(section)
    for key in ("generator_hidden", "critic_hidden"):
        if key in data:
            data[key] = tuple(data[key])
    return _section(TrainConfig, data, "train")


def _setup(args):
    """Resolve the shared plumbing: config file, master seed, output directory."""
    cfg = _load_config(args.config) if args.config else {}
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigurationError(f"seed must be a nonnegative integer, got {seed!r}")
    out_dir = args.out if args.out is not None else cfg.get("out", ".")
    if not out_dir:
        raise ConfigurationError("output path must be nonempty")
    os.makedirs(out_dir, exist_ok=True)
    return cfg, seed, out_dir


def _require(value, flag: str, key: str):
    if not value:
        raise ConfigurationError(f"missing {flag} (or config key {key!r})")
    return value


def cmd_simulate(args) -> int:
    cfg, seed, out_dir = _setup(args)
    system = args.system or cfg.get("system", "smib")
    n = args.samples if args.samples is not None else cfg.get("samples", 500)
    if not isinstance(n, int) or n < 1:
        raise ConfigurationError(f"--samples must be a positive integer, got {n!r}")
    sim = _simulation_config(cfg.get("simulation", {}))

    records = build_dataset(system, n, sim, np.random.default_rng(seed))
    resolved = {
        "system": system,
        "seed": seed,
        "samples": n,
        "simulation": dataclasses.asdict(sim),
    }
    path = os.path.join(out_dir, "dataset.csv")
    io.write_dataset(
        path,
        records,
        {
            "system": system,
            "seed": seed,
            "config_digest": io.config_digest(resolved),
            "filter": None,
        },
    )
    print(f"wrote {n} samples to {path}")
    return 0


def cmd_train(args) -> int:
    cfg, seed, out_dir = _setup(args)
    data_path = _require(args.data or cfg.get("data"), "--data", "data")
    records, _ = io.read_dataset(data_path)

    train_section = dict(cfg.get("train", {}))
    resume_ckpt = None
    history = None
    if args.resume:
        resume_ckpt = io.load_checkpoint(args.resume)
        width = 2 * records[0].n_steps
        expect = resume_ckpt.config.n_channels * resume_ckpt.generator.seq_len
        if width != expect:
            raise ConfigurationError(
                f"dataset row width {width} does not match checkpoint width {expect}"
            )
        # Resume inherits the checkpoint's config; explicit keys may override
        # but anything beyond iterations must match or train() rejects it.
        base = dataclasses.asdict(resume_ckpt.config)
        base.update(train_section)
        train_section = base
        # Loss tables sitting next to the checkpoint are extended in place so
        # a resumed run reproduces the uninterrupted run's files.
        resume_dir = os.path.dirname(os.path.abspath(args.resume))
        try:
            history = io.read_loss_history(resume_dir)
        except OSError:
            history = None
    elif args.seed is not None or "seed" not in train_section:
        train_section["seed"] = seed
    if args.iterations is not None:
        train_section["iterations"] = args.iterations
    config = _train_config(train_section)

    log_every = max(1, config.iterations // 20) if args.verbose else 0
    ckpt, history = train(
        records, config, resume=resume_ckpt, history=history, log_every=log_every
    )
    ckpt_path = os.path.join(out_dir, "checkpoint.json")
    io.save_checkpoint(ckpt_path, ckpt)
    io.write_loss_history(out_dir, history)
    print(f"trained to iteration {ckpt.iteration}, checkpoint at {ckpt_path}")
    return 0


def cmd_generate(args) -> int:
    cfg, seed, out_dir = _setup(args)
    ckpt_path = _require(args.checkpoint or cfg.get("checkpoint"), "--checkpoint", "checkpoint")
    ckpt = io.load_checkpoint(ckpt_path)
    n = args.samples if args.samples is not None else cfg.get("samples", 500)
    if not isinstance(n, int) or n < 1:
        raise ConfigurationError(f"--samples must be a positive integer, got {n!r}")

    records = generate(ckpt, n, np.random.default_rng(seed))
    spec = None
    if not args.no_filter:
        section = dict(cfg.get("filter", {}))
        section.setdefault("sample_rate_hz", 1.0 / ckpt.dt)
        if args.filter_cutoff is not None:
            section["cutoff_hz"] = args.filter_cutoff
        if args.filter_order is not None:
            section["order"] = args.filter_order
        spec = _section(FilterSpec, section, "filter")
        records = filter_records(records, spec)

    resolved = {
        "seed": seed,
        "samples": n,
        "train": dataclasses.asdict(ckpt.config),
        "filter": None if spec is None else spec.to_dict(),
    }
    path = os.path.join(out_dir, "synthetic.csv")
    io.write_dataset(
        path,
        records,
        {
            "seed": seed,
            "config_digest": io.config_digest(resolved),
            "filter": None if spec is None else spec.to_dict(),
            "checkpoint_iteration": ckpt.iteration,
        },
    )
    print(f"wrote {n} synthetic samples to {path}")
    return 0


def cmd_validate(args) -> int:
    cfg, seed, out_dir = _setup(args)
    del seed  # validation is deterministic; the flag is accepted for uniformity
    data_path = _require(args.data or cfg.get("data"), "--data", "data")
    records, meta = io.read_dataset(data_path)
    threshold = args.threshold if args.threshold is not None else cfg.get(
        "threshold", DEFAULT_THRESHOLD
    )
    sim_section = cfg.get("simulation", {})
    circuit = _section(SmibCircuit, sim_section.get("circuit", {}), "simulation.circuit")

    report = validate_dataset(records, circuit, threshold)
    report_path = os.path.join(out_dir, "report.json")
    io.write_report(
        report_path,
        report,
        extra={
            "data_digest": meta.get("config_digest"),
            "source_tag": meta.get("source_tag"),
        },
    )
    io.write_histogram_csv(os.path.join(out_dir, "error_histogram.csv"), report)
    print(f"realistic_fraction {report.realistic_fraction!r}")
    if args.verbose:
        print(f"n_samples {report.n_samples} n_failed {report.n_failed}")
    print(f"report at {report_path}")
    return 0


def cmd_wdist(args) -> int:
    cfg, seed, out_dir = _setup(args)
    del cfg, seed
    records_a, _ = io.read_dataset(args.data_a)
    records_b, _ = io.read_dataset(args.data_b)
    a = records_to_matrix(records_a)
    b = records_to_matrix(records_b)
    if a.shape != b.shape:
        raise ConfigurationError(f"dataset shape mismatch: {a.shape} vs {b.shape}")

    per_column = np.array(
        [wasserstein_1d(a[:, j], b[:, j]) for j in range(a.shape[1])]
    )
    seq_len = records_a[0].n_steps
    channels = ["i_mag_pu", "i_phase_rad"]
    blocks = per_column.reshape(len(channels), seq_len)
    mean_w1 = float(per_column.mean())
    max_w1 = float(per_column.max())
    print(f"mean_w1 {mean_w1!r}")
    print(f"max_w1 {max_w1!r}")

    doc = {
        "mean_w1": mean_w1,
        "max_w1": max_w1,
        "n_samples": a.shape[0],
        "channels": {
            name: {
                "mean_w1": float(block.mean()),
                "max_w1": float(block.max()),
                "per_timestep": block.tolist(),
            }
            for name, block in zip(channels, blocks)
        },
    }
    io.dump_json(os.path.join(out_dir, "wdist.json"), doc)
    return 0


def _default_specs(cfg: dict) -> dict:
    config = _train_config(cfg.get("train", {}))
    sim = _simulation_config(cfg.get("simulation", {}))
    n_act = "sigmoid" if config.critic_output == "sigmoid" else "linear"
    return {
        "generator": NetworkSpec(
            layer_sizes=(config.noise_dim, *config.generator_hidden, sim.steps),
            activations=("relu",) * len(config.generator_hidden) + ("sigmoid",),
        ),
        "critic": NetworkSpec(
            layer_sizes=(config.n_channels * sim.steps, *config.critic_hidden, 1),
            activations=("relu",) * len(config.critic_hidden) + (n_act,),
        ),
    }


def _specs_from_file(path: str) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"spec file {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or not doc:
        raise ConfigurationError("spec file must map names to layer specs")
    specs = {}
    for name, entry in doc.items():
        if not isinstance(entry, dict) or set(entry) != {"layer_sizes", "activations"}:
            raise ConfigurationError(
                f"spec {name!r} needs exactly 'layer_sizes' and 'activations'"
            )
        specs[name] = NetworkSpec(
            layer_sizes=tuple(entry["layer_sizes"]),
            activations=tuple(entry["activations"]),
        )
    return specs


def cmd_gradcheck(args) -> int:
    cfg, seed, out_dir = _setup(args)
    specs = _specs_from_file(args.spec) if args.spec else _default_specs(cfg)
    rng = np.random.default_rng(seed)

    results = {}
    worst = 0.0
    for name, spec in specs.items():
        params = init_network(spec, rng)
        batch = rng.standard_normal((4, spec.layer_sizes[0]))
        per_layer = [float(e) for e in gradient_check_layers(spec, params, batch)]
        results[name] = per_layer
        for i, err in enumerate(per_layer):
            print(f"{name} layer {i + 1} worst_rel_err {err:.3e}")
        worst = max(worst, max(per_layer))

    passed = bool(worst < GRADCHECK_THRESHOLD)
    print(f"max_rel_err {worst:.3e}")
    print("PASS" if passed else "FAIL")
    io.dump_json(
        os.path.join(out_dir, "gradcheck.json"),
        {
            "per_layer": results,
            "max_rel_err": worst,
            "threshold": GRADCHECK_THRESHOLD,
            "pass": passed,
        },
    )
    return 0 if passed else 3


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON pipeline config; flags override it")
    common.add_argument("--seed", type=int, metavar="U64", help="master seed (default 0)")
    common.add_argument("--out", metavar="PATH", help="output directory (default '.')")
    common.add_argument("--verbose", action="store_true", help="extra progress output")

    parser = argparse.ArgumentParser(
        prog="pmugan",
        description="Simulate, train on, synthesize, and validate PMU phasor time series.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("simulate", parents=[common], help="write a simulated dataset")
    p.add_argument("--system", choices=("smib", "ninebus"), help="plant model (default smib)")
    p.add_argument("--samples", type=int, help="number of samples (default 500)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("train", parents=[common], help="train the adversarial pair")
    p.add_argument("--data", metavar="CSV", help="training dataset")
    p.add_argument("--iterations", type=int, help="total generator iterations")
    p.add_argument("--resume", metavar="CKPT", help="continue from a checkpoint")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", parents=[common], help="sample the trained generator")
    p.add_argument("--checkpoint", metavar="CKPT", help="trained checkpoint")
    p.add_argument("--samples", type=int, help="number of samples (default 500)")
    p.add_argument("--filter-cutoff", type=float, metavar="HZ", help="low-pass cutoff (default 5)")
    p.add_argument("--filter-order", type=int, metavar="N", help="filter order (default 2)")
    p.add_argument("--no-filter", action="store_true", help="emit raw generator output")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("validate", parents=[common], help="physics-validate a dataset")
    p.add_argument("--data", metavar="CSV", help="dataset to score")
    p.add_argument("--threshold", type=float, help="realism threshold (default 0.09)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("wdist", parents=[common], help="marginal W1 between two datasets")
    p.add_argument("--data-a", required=True, metavar="CSV")
    p.add_argument("--data-b", required=True, metavar="CSV")
    p.set_defaults(func=cmd_wdist)

    p = sub.add_parser("gradcheck", parents=[common], help="finite-difference gradient audit")
    p.add_argument("--spec", metavar="JSON", help="layer spec file (default: configured stacks)")
    p.set_defaults(func=cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits itself on usage errors (code 2) and --help (code 0)
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PmuGanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
