"""Seeded training loop with accuracy-milestone checkpointing.

A run walks the dataset in seeded epoch permutations, steps one optimizer,
and snapshots the model at accuracy milestones: the untrained model is
always milestone 0, each first crossing of a 5% train-accuracy threshold
saves, past 99% every strict improvement saves, and the final epoch always
saves.  The archived sequence is the raw material for every analysis here.

Non-finite loss does not raise: the run stops, the archive keeps everything
up to the failing epoch, and the `diverged` flag is set.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import net as mlp
from .datasets import LabeledDataset, epoch_permutation
from .errors import BadSpecError, EmptyDatasetError, NonFiniteGradientError, ShapeMismatchError
from .optim import OPTIMIZERS, LrSchedule, Optimizer, make_optimizer, schedule_lr
from .store import read_checkpoint, write_checkpoint, write_csv

MILESTONE_STEP = 0.05
HIGH_ACCURACY = 0.99
# Guards float dust when an accuracy like 1900/2000 lands a hair under 0.95.
_LADDER_EPS = 1e-12


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    recalls: tuple[float, ...]
    loss: float


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    lr: float
    loss: float
    accuracy: float
    recalls: tuple[float, ...]


@dataclass
class Milestone:
    index: int
    epoch: int
    train_accuracy: float
    params: mlp.NetParams


@dataclass
class RunArchive:
    run_id: str
    config_snapshot: dict
    milestones: list[Milestone]
    records: list[EpochRecord]
    diverged: bool = False

    @property
    def final(self) -> Milestone:
        return self.milestones[-1]


@dataclass
class TrainConfig:
    dataset: LabeledDataset
    net: mlp.NetConfig
    optimizer: str
    schedule: LrSchedule
    epochs: int
    batch_size: int = 128
    seed: int = 0
    optimizer_kwargs: dict = field(default_factory=dict)
    run_id: str = "run"

    def validate(self) -> None:
        self.net.validate()
        self.schedule.validate()
        if self.optimizer not in OPTIMIZERS:
            raise BadSpecError(f"unknown optimizer {self.optimizer!r}")
        if self.epochs < 0:
            raise BadSpecError("epochs must be >= 0")
        if self.batch_size < 1:
            raise BadSpecError("batch_size must be >= 1")
        if self.dataset.features.shape[0] == 0:
            raise EmptyDatasetError("training set is empty")
        if self.dataset.features.shape[1] != self.net.input_dim:
            raise ShapeMismatchError(
                f"dataset dim {self.dataset.features.shape[1]} vs net input {self.net.input_dim}"
            )
        if self.dataset.num_classes != self.net.num_classes:
            raise ShapeMismatchError(
                f"dataset classes {self.dataset.num_classes} vs net {self.net.num_classes}"
            )


def _threshold_index(accuracy: float) -> int:
    return math.floor((accuracy + _LADDER_EPS) / MILESTONE_STEP)


def milestone_policy(best_so_far: float, current: float) -> bool:
    """Save on first crossing of a new 5% threshold, or any improvement past 99%."""
    if not (0.0 <= best_so_far <= 1.0 and 0.0 <= current <= 1.0):
        raise BadSpecError("accuracies must lie in [0, 1]")
    if current > HIGH_ACCURACY and current > best_so_far:
        return True
    return _threshold_index(current) > _threshold_index(best_so_far)


def evaluate(params: mlp.NetParams, dataset: LabeledDataset) -> Metrics:
    """Accuracy, per-class recall, and mean cross-entropy on the full set."""
    n = dataset.features.shape[0]
    if n == 0:
        raise EmptyDatasetError("cannot evaluate on an empty dataset")
    if dataset.num_classes != params.config.num_classes:
        raise ShapeMismatchError(
            f"dataset classes {dataset.num_classes} vs net {params.config.num_classes}"
        )
    _, logits = mlp.forward(params, dataset.features)
    y = dataset.labels
    predictions = np.argmax(logits, axis=1)
    correct = predictions == y
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    loss = float(np.mean(log_norm - shifted[np.arange(n), y]))
    recalls = []
    for c in range(params.config.num_classes):
        mask = y == c
        size = int(mask.sum())
        recalls.append(float(correct[mask].sum() / size) if size else 0.0)
    return Metrics(accuracy=float(correct.mean()), recalls=tuple(recalls), loss=loss)


def config_snapshot(config: TrainConfig) -> dict:
    ds = config.dataset
    return {
        "batch_size": config.batch_size,
        "dataset": {
            "class_names": list(ds.class_names),
            "dim": int(ds.features.shape[1]),
            "num_classes": ds.num_classes,
            "samples": int(ds.features.shape[0]),
            "seed": ds.seed,
        },
        "epochs": config.epochs,
        "net": {
            "hidden_widths": list(config.net.hidden_widths),
            "input_dim": config.net.input_dim,
            "num_classes": config.net.num_classes,
            "seed": config.net.seed,
            "variant": config.net.variant,
        },
        "optimizer": config.optimizer,
        "optimizer_kwargs": dict(sorted(config.optimizer_kwargs.items())),
        "run_id": config.run_id,
        "schedule": {
            "kind": config.schedule.kind,
            "lr_max": config.schedule.lr_max,
            "lr_min": config.schedule.lr_min,
            "total_steps": config.schedule.total_steps,
        },
        "seed": config.seed,
    }


def _reported_params(template: mlp.NetParams, optimizer: Optimizer, arrays) -> mlp.NetParams:
    return mlp.clone_params(mlp.params_from_list(template, optimizer.reported(arrays)))


def train(config: TrainConfig) -> RunArchive:
    config.validate()
    dataset = config.dataset
    n = dataset.features.shape[0]
    params = mlp.init_params(config.net, class_names=dataset.class_names)
    optimizer = make_optimizer(config.optimizer, **config.optimizer_kwargs)
    arrays = mlp.params_to_list(params)

    milestones: list[Milestone] = []
    records: list[EpochRecord] = []
    diverged = False

    initial = evaluate(params, dataset)
    milestones.append(
        Milestone(index=0, epoch=0, train_accuracy=initial.accuracy, params=mlp.clone_params(params))
    )
    best = initial.accuracy

    for epoch in range(1, config.epochs + 1):
        lr = schedule_lr(config.schedule, epoch - 1)
        order = epoch_permutation(n, config.seed, epoch)
        stop = False
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            current = mlp.params_from_list(params, arrays)
            loss, grads = mlp.loss_and_grads(current, dataset.features[idx], dataset.labels[idx])
            if not math.isfinite(loss):
                diverged = True
                stop = True
                break
            try:
                arrays = optimizer.step(arrays, mlp.params_to_list(grads), lr)
            except NonFiniteGradientError:
                diverged = True
                stop = True
                break

        snapshot = _reported_params(params, optimizer, arrays)
        metrics = evaluate(snapshot, dataset)
        records.append(
            EpochRecord(
                epoch=epoch,
                lr=lr,
                loss=metrics.loss,
                accuracy=metrics.accuracy,
                recalls=metrics.recalls,
            )
        )
        is_final = stop or epoch == config.epochs
        if milestone_policy(best, metrics.accuracy) or is_final:
            milestones.append(
                Milestone(
                    index=len(milestones),
                    epoch=epoch,
                    train_accuracy=metrics.accuracy,
                    params=snapshot,
                )
            )
        best = max(best, metrics.accuracy)
        if stop:
            break

    return RunArchive(
        run_id=config.run_id,
        config_snapshot=config_snapshot(config),
        milestones=milestones,
        records=records,
        diverged=diverged,
    )


def _checkpoint_name(index: int) -> str:
    return f"m{index:04d}.ckp"


def save_run(archive: RunArchive, directory) -> None:
    """Persist as manifest.json + metrics.csv + one checkpoint per milestone.

    Writers are deterministic and carry no timestamps: two identical runs
    produce byte-identical directories.
    """
    os.makedirs(directory, exist_ok=True)
    ckpt_dir = os.path.join(directory, "checkpoints")
    os.makedirs(ckpt_dir, exist_ok=True)
    manifest = {
        "config": archive.config_snapshot,
        "diverged": archive.diverged,
        "format": 1,
        "milestones": [
            {
                "epoch": m.epoch,
                "file": _checkpoint_name(m.index),
                "index": m.index,
                "train_accuracy": m.train_accuracy,
            }
            for m in archive.milestones
        ],
        "run_id": archive.run_id,
    }
    with open(os.path.join(directory, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
    for m in archive.milestones:
        write_checkpoint(
            os.path.join(ckpt_dir, _checkpoint_name(m.index)), m.params, m.epoch, m.train_accuracy
        )
    class_names = archive.config_snapshot["dataset"]["class_names"]
    header = ["epoch", "lr", "train_loss", "train_accuracy"]
    header += [f"recall_{name}" for name in class_names]
    rows = [
        (r.epoch, r.lr, r.loss, r.accuracy, *r.recalls)
        for r in archive.records
    ]
    write_csv(os.path.join(directory, "metrics.csv"), header, rows)


def load_run(directory) -> RunArchive:
    with open(os.path.join(directory, "manifest.json"), "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    milestones = []
    for entry in manifest["milestones"]:
        params, epoch, acc = read_checkpoint(
            os.path.join(directory, "checkpoints", entry["file"])
        )
        if epoch != entry["epoch"]:
            raise BadSpecError(
                f"manifest epoch {entry['epoch']} disagrees with checkpoint {epoch}"
            )
        milestones.append(
            Milestone(index=entry["index"], epoch=epoch, train_accuracy=acc, params=params)
        )
    records = []
    metrics_path = os.path.join(directory, "metrics.csv")
    with open(metrics_path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().split("\n") if ln]
    for line in lines[1:]:
        cells = line.split(",")
        records.append(
            EpochRecord(
                epoch=int(cells[0]),
                lr=float(cells[1]),
                loss=float(cells[2]),
                accuracy=float(cells[3]),
                recalls=tuple(float(x) for x in cells[4:]),
            )
        )
    return RunArchive(
        run_id=manifest["run_id"],
        config_snapshot=manifest["config"],
        milestones=milestones,
        records=records,
        diverged=manifest["diverged"],
    )
