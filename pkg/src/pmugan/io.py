"""File formats: dataset CSV + sidecar JSON, checkpoint JSON, reports, loss tables.

Everything is written with round-trip float precision (repr) and sorted JSON
keys, no timestamps, so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

from .errors import ConfigurationError
from .gan import ChannelScaler, Checkpoint, CriticModel, GeneratorModel, LossHistory, TrainConfig
from .identify import ValidationReport
from .network import NetworkParameters, NetworkSpec, OptimizerState
from .swing import PmuRecord

DATASET_HEADER = "sample_id,step,time_s,i_mag_pu,i_phase_rad"


def config_digest(config: dict) -> str:
    """Stable hex digest of a JSON-serializable config."""
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def dump_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1)
        fh.write("\n")


def meta_path(dataset_path: str) -> str:
    base, _ = os.path.splitext(dataset_path)
    return base + ".meta.json"


def write_dataset(path: str, records: list, meta: dict) -> None:
    """CSV ordered by (sample_id, step) plus a sidecar metadata JSON."""
    if not records:
        raise ConfigurationError("refusing to write an empty dataset")
    dt = float(records[0].dt)
    lines = [DATASET_HEADER]
    for sid, rec in enumerate(records):
        if rec.dt != dt:
            raise ConfigurationError(f"sample {sid} has dt {rec.dt}, expected {dt}")
        mags, phases = rec.i_mag.tolist(), rec.i_phase.tolist()
        for step, (mag, phase) in enumerate(zip(mags, phases)):
            lines.append(f"{sid},{step},{step * dt!r},{mag!r},{phase!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")

    sidecar = {
        "dt": dt,
        "channels": ["i_mag_pu", "i_phase_rad"],
        "n_samples": len(records),
        "steps_per_sample": records[0].n_steps,
        "source_tag": records[0].source_tag,
    }
    sidecar.update(meta)
    dump_json(meta_path(path), sidecar)


def read_dataset(path: str) -> tuple[list, dict]:
    """Inverse of write_dataset; validates header, ordering, and row counts."""
    with open(meta_path(path)) as fh:
        meta = json.load(fh)
    with open(path) as fh:
        header = fh.readline().rstrip("\n")
        if header != DATASET_HEADER:
            raise ConfigurationError(f"unexpected dataset header: {header!r}")
        rows = np.loadtxt(fh, delimiter=",", ndmin=2)
    if rows.size == 0:
        raise ConfigurationError("dataset has no rows")

    sample_ids = rows[:, 0].astype(int)
    steps = rows[:, 1].astype(int)
    n_samples = int(meta["n_samples"])
    per = int(meta["steps_per_sample"])
    if rows.shape[0] != n_samples * per:
        raise ConfigurationError(
            f"row count {rows.shape[0]} != {n_samples} samples x {per} steps"
        )
    expected_sid = np.repeat(np.arange(n_samples), per)
    expected_step = np.tile(np.arange(per), n_samples)
    if not (np.array_equal(sample_ids, expected_sid) and np.array_equal(steps, expected_step)):
        raise ConfigurationError("dataset rows are not ordered by (sample_id, step)")

    dt = float(meta["dt"])
    tag = meta.get("source_tag", "simulated")
    records = [
        PmuRecord(
            dt=dt,
            i_mag=rows[i * per : (i + 1) * per, 3],
            i_phase=rows[i * per : (i + 1) * per, 4],
            source_tag=tag,
        )
        for i in range(n_samples)
    ]
    return records, meta


def _spec_to_dict(spec: NetworkSpec) -> dict:
    return {"layer_sizes": list(spec.layer_sizes), "activations": list(spec.activations)}


def _spec_from_dict(d: dict) -> NetworkSpec:
    return NetworkSpec(tuple(d["layer_sizes"]), tuple(d["activations"]))


def _opt_to_dict(opt: OptimizerState) -> dict:
    return {
        "sq_weights": [a.ravel().tolist() for a in opt.sq_weights],
        "sq_biases": [a.tolist() for a in opt.sq_biases],
        "shapes": [list(a.shape) for a in opt.sq_weights],
        "decay": opt.decay,
        "eps": opt.eps,
    }


def _opt_from_dict(d: dict) -> OptimizerState:
    return OptimizerState(
        sq_weights=[
            np.asarray(flat, dtype=float).reshape(shape)
            for flat, shape in zip(d["sq_weights"], d["shapes"])
        ],
        sq_biases=[np.asarray(b, dtype=float) for b in d["sq_biases"]],
        decay=float(d["decay"]),
        eps=float(d["eps"]),
    )


def save_checkpoint(path: str, ckpt: Checkpoint) -> None:
    doc = {
        "format": "pmugan-checkpoint-v1",
        "config": {
            "batch_size": ckpt.config.batch_size,
            "critic_steps": ckpt.config.critic_steps,
            "clip": ckpt.config.clip,
            "learning_rate": ckpt.config.learning_rate,
            "iterations": ckpt.config.iterations,
            "noise_dim": ckpt.config.noise_dim,
            "seed": ckpt.config.seed,
            "n_channels": ckpt.config.n_channels,
            "generator_hidden": list(ckpt.config.generator_hidden),
            "critic_hidden": list(ckpt.config.critic_hidden),
            "critic_output": ckpt.config.critic_output,
        },
        "iteration": ckpt.iteration,
        "dt": ckpt.dt,
        "generator": {
            "spec": _spec_to_dict(ckpt.generator.head_spec),
            "heads": [p.to_manifest() for p in ckpt.generator.heads],
        },
        "critic": {
            "spec": _spec_to_dict(ckpt.critic.spec),
            "params": ckpt.critic.params.to_manifest(),
        },
        "gen_opt": [_opt_to_dict(o) for o in ckpt.gen_opt],
        "critic_opt": _opt_to_dict(ckpt.critic_opt),
        "rng_state": ckpt.rng_state,
        "scaler": {
            "mins": list(ckpt.scaler.mins),
            "maxs": list(ckpt.scaler.maxs),
            "seq_len": ckpt.scaler.seq_len,
            "lo": ckpt.scaler.lo,
            "hi": ckpt.scaler.hi,
        },
    }
    dump_json(path, doc)


def load_checkpoint(path: str) -> Checkpoint:
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format") != "pmugan-checkpoint-v1":
        raise ConfigurationError(f"not a checkpoint file: {path}")
    cfg = doc["config"]
    config = TrainConfig(
        batch_size=cfg["batch_size"],
        critic_steps=cfg["critic_steps"],
        clip=cfg["clip"],
        learning_rate=cfg["learning_rate"],
        iterations=cfg["iterations"],
        noise_dim=cfg["noise_dim"],
        seed=cfg["seed"],
        n_channels=cfg["n_channels"],
        generator_hidden=tuple(cfg["generator_hidden"]),
        critic_hidden=tuple(cfg["critic_hidden"]),
        critic_output=cfg["critic_output"],
    )
    generator = GeneratorModel(
        head_spec=_spec_from_dict(doc["generator"]["spec"]),
        heads=[NetworkParameters.from_manifest(m) for m in doc["generator"]["heads"]],
    )
    critic = CriticModel(
        spec=_spec_from_dict(doc["critic"]["spec"]),
        params=NetworkParameters.from_manifest(doc["critic"]["params"]),
    )
    scaler = ChannelScaler(
        mins=tuple(doc["scaler"]["mins"]),
        maxs=tuple(doc["scaler"]["maxs"]),
        seq_len=int(doc["scaler"]["seq_len"]),
        lo=float(doc["scaler"]["lo"]),
        hi=float(doc["scaler"]["hi"]),
    )
    return Checkpoint(
        config=config,
        generator=generator,
        critic=critic,
        gen_opt=[_opt_from_dict(o) for o in doc["gen_opt"]],
        critic_opt=_opt_from_dict(doc["critic_opt"]),
        iteration=int(doc["iteration"]),
        rng_state=doc["rng_state"],
        scaler=scaler,
        dt=float(doc["dt"]),
    )


def write_loss_history(out_dir: str, history: LossHistory, prefix: str = "loss") -> list[str]:
    """One two-column CSV per model: (iteration, value)."""
    paths = []
    for name, series in (("critic", history.critic), ("generator", history.generator)):
        path = os.path.join(out_dir, f"{prefix}_{name}.csv")
        lines = ["iteration,value"]
        lines += [f"{i + 1},{v!r}" for i, v in enumerate(series)]
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        paths.append(path)
    return paths


def read_loss_history(out_dir: str, prefix: str = "loss") -> LossHistory:
    history = LossHistory()
    series = {}
    for name in ("critic", "generator"):
        path = os.path.join(out_dir, f"{prefix}_{name}.csv")
        with open(path) as fh:
            header = fh.readline().rstrip("\n")
            if header != "iteration,value":
                raise ConfigurationError(f"unexpected loss header in {path}: {header!r}")
            values = [float(line.split(",")[1]) for line in fh if line.strip()]
        series[name] = values
    if len(series["critic"]) != len(series["generator"]):
        raise ConfigurationError("loss tables disagree on length")
    history.critic = series["critic"]
    history.generator = series["generator"]
    return history


def write_report(path: str, report: ValidationReport, extra: dict | None = None) -> None:
    doc = {
        "threshold": report.threshold,
        "n_samples": report.n_samples,
        "n_failed": report.n_failed,
        "realistic_fraction": report.realistic_fraction,
        "errors": [e if np.isfinite(e) else None for e in report.errors],
        "realistic": list(report.realistic),
        "failures": [{"sample": i, "reason": msg} for i, msg in report.failures],
        "fitted": [
            None if f is None else {"alpha": f.alpha, "beta": f.beta, "gamma": f.gamma}
            for f in report.fitted
        ],
        "histogram": {
            "bin_edges": report.bin_edges.tolist(),
            "counts": report.bin_counts.tolist(),
        },
    }
    if extra:
        doc.update(extra)
    dump_json(path, doc)


def write_histogram_csv(path: str, report: ValidationReport) -> None:
    lines = ["bin_lo,bin_hi,count"]
    edges = report.bin_edges.tolist()
    for lo, hi, count in zip(edges[:-1], edges[1:], report.bin_counts):
        lines.append(f"{lo!r},{hi!r},{int(count)}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
