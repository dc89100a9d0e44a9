"""Training loop: ADAM at default parameters, cross-entropy, mini-batches of 128.

The 128-sample optimizer step is realized by accumulating sum-reduced loss
over micro-batches (gradient values match a monolithic batch up to float
ordering); this keeps peak memory well under a gigabyte on the full 400x64
input. The best-validation-accuracy weights are what training returns.
"""

import time
from dataclasses import dataclass, field

import numpy as np
import torch
import torch.nn.functional as F

from .features import load_manifest, load_split
from .model import ConvClassifier, build_model, mels_to_batch


class TrainingDivergedError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    arch: str = "cnn-cnp"
    num_classes: int = 6
    batch_size: int = 128
    micro_batch: int = 16
    epochs: int = 12
    seed: int = 0
    early_stop_at: float = 0.96  # stop after 2 consecutive epochs at/above this val accuracy


@dataclass
class TrainResult:
    model: ConvClassifier
    history: list = field(default_factory=list)
    best_val_accuracy: float = 0.0
    best_epoch: int = -1


def _accuracy(model: ConvClassifier, x: torch.Tensor, y: torch.Tensor, micro: int) -> tuple[float, float]:
    """(mean loss, accuracy) without building one huge activation set."""
    model.eval()
    losses, hits = 0.0, 0
    with torch.inference_mode():
        for i in range(0, len(x), micro):
            logits = model(x[i : i + micro])
            losses += F.cross_entropy(logits, y[i : i + micro], reduction="sum").item()
            hits += (logits.argmax(dim=1) == y[i : i + micro]).sum().item()
    return losses / len(x), hits / len(x)


def train(dataset_root, cfg: TrainConfig = TrainConfig(), log=print) -> TrainResult:
    manifest = load_manifest(dataset_root)
    if len(manifest.classes) != cfg.num_classes:
        raise ValueError(f"dataset has {len(manifest.classes)} classes, config says {cfg.num_classes}")
    x_train, y_train = load_split(manifest, dataset_root, "train")
    x_val, y_val = load_split(manifest, dataset_root, "validation")
    xt = mels_to_batch(x_train)
    yt = torch.as_tensor(y_train)
    xv = mels_to_batch(x_val)
    yv = torch.as_tensor(y_val)

    torch.manual_seed(cfg.seed)
    model = build_model(cfg.arch, cfg.num_classes, seed=cfg.seed)
    optimizer = torch.optim.Adam(model.parameters())  # defaults throughout
    rng = np.random.default_rng(cfg.seed)

    result = TrainResult(model=model)
    best_state = {k: v.clone() for k, v in model.state_dict().items()}
    saturated = 0
    for epoch in range(cfg.epochs):
        t0 = time.perf_counter()
        model.train()
        order = rng.permutation(len(xt))
        epoch_loss, epoch_hits = 0.0, 0
        for start in range(0, len(order), cfg.batch_size):
            batch_idx = order[start : start + cfg.batch_size]
            optimizer.zero_grad()
            for mstart in range(0, len(batch_idx), cfg.micro_batch):
                idx = batch_idx[mstart : mstart + cfg.micro_batch]
                xb, yb = xt[idx], yt[idx]
                logits = model(xb)
                loss = F.cross_entropy(logits, yb, reduction="sum") / len(batch_idx)
                if not torch.isfinite(loss):
                    raise TrainingDivergedError(
                        f"non-finite loss at epoch {epoch}, sample offset {start + mstart}"
                    )
                loss.backward()
                epoch_loss += loss.item() * len(batch_idx)
                epoch_hits += (logits.argmax(dim=1) == yb).sum().item()
            optimizer.step()
        val_loss, val_acc = _accuracy(model, xv, yv, cfg.micro_batch)
        entry = {
            "epoch": epoch,
            "train_loss": epoch_loss / len(xt),
            "train_accuracy": epoch_hits / len(xt),
            "val_loss": val_loss,
            "val_accuracy": val_acc,
            "seconds": time.perf_counter() - t0,
        }
        result.history.append(entry)
        log(
            f"epoch {epoch:2d}  train loss {entry['train_loss']:.4f} "
            f"acc {entry['train_accuracy']:.3f}  val loss {val_loss:.4f} "
            f"acc {val_acc:.3f}  ({entry['seconds']:.1f}s)"
        )
        if val_acc > result.best_val_accuracy:
            result.best_val_accuracy = val_acc
            result.best_epoch = epoch
            best_state = {k: v.clone() for k, v in model.state_dict().items()}
        saturated = saturated + 1 if val_acc >= cfg.early_stop_at else 0
        if saturated >= 2:
            log(f"early stop: validation accuracy at {val_acc:.3f} twice")
            break
    model.load_state_dict(best_state)
    return result


def evaluate(result: TrainResult, dataset_root, split: str = "test", micro: int = 16) -> float:
    manifest = load_manifest(dataset_root)
    x, y = load_split(manifest, dataset_root, split)
    _, acc = _accuracy(result.model, mels_to_batch(x), torch.as_tensor(y), micro)
    return acc
