"""Training, evaluation and replication."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import autodiff as ad
from .features import FeatureKind, augment_dataset
from .generators import LabeledDataset, rng_for
from .graph import NUM_CLASSES
from .layers import Batch
from .models import Model, ModelConfig, build

log = logging.getLogger(__name__)


def nll_loss(logp, labels):
    """Mean negative log-likelihood of the true labels."""
    return ad.nll(logp, labels)


@dataclass(frozen=True)
class TrainConfig:
    model: ModelConfig
    epochs: int = 100
    batch_size: int = 100
    lr: float = 0.01
    weight_decay: float = 1e-3
    replications: int = 5
    selection: str = "best_val"  # or "last"

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1 or self.replications < 1:
            raise ValueError("epochs >= 0, batch_size >= 1 and replications >= 1 required")
        if self.lr < 0:
            raise ValueError("lr must be non-negative")
        if self.selection not in ("best_val", "last"):
            raise ValueError(f"unknown selection rule {self.selection!r}")


@dataclass
class RunResult:
    config: ModelConfig
    seed: int
    train_loss: list[float] = field(default_factory=list)
    val_acc: list[float] = field(default_factory=list)
    epoch_best: int = 0
    acc_small_test: float = math.nan
    acc_medium: float = math.nan
    wall_s: float = 0.0
    failed: bool = False
    model: Model | None = field(default=None, repr=False, compare=False)

    def record(self, identity_k: int | None = None) -> dict:
        """Flat row for the results store."""
        cfg = self.config
        return {"arch": cfg.arch, "feature": cfg.feature.name, "H": cfg.hidden, "K": cfg.layers,
                "r": cfg.ratio,
                "identity_k": identity_k if identity_k is not None else cfg.feature.k,
                "seed": self.seed, "epoch_best": self.epoch_best,
                "acc_small_test": self.acc_small_test, "acc_medium": self.acc_medium,
                "wall_s": self.wall_s, "failed": int(self.failed)}


class FeatureSet:
    """Features for one dataset under one feature kind, computed once."""

    def __init__(self, ds: LabeledDataset, kind: FeatureKind):
        self.dataset = ds
        self.kind = kind
        self.features = augment_dataset(ds.graphs, kind, ds.max_degree or None,
                                        ds.spec.master_seed)

    def batch(self, idx) -> tuple[Batch, np.ndarray, np.ndarray]:
        idx = np.asarray(idx, dtype=np.int64)
        graphs = [self.dataset.graphs[i] for i in idx]
        x = np.vstack([self.features[i] for i in idx]) if len(idx) else np.zeros((0, self.kind.dim))
        return Batch.from_graphs(graphs), x, self.dataset.labels[idx]


def predict(model: Model, batch: Batch, x: np.ndarray) -> np.ndarray:
    return model(batch, x, train=False).data.argmax(axis=1)


def evaluate(model: Model, fs: FeatureSet, idx=None, chunk: int = 200) -> float:
    """Argmax accuracy in eval mode over the graphs ``idx`` (default: all)."""
    if fs.kind.dim != model.config.feature.dim:
        raise ValueError(f"features {fs.kind} do not match model input {model.config.feature}")
    idx = np.arange(len(fs.dataset)) if idx is None else np.asarray(idx)
    if len(idx) == 0:
        raise ValueError("nothing to evaluate")
    correct = 0
    for s in range(0, len(idx), chunk):
        b, x, y = fs.batch(idx[s:s + chunk])
        correct += int((predict(model, b, x) == y).sum())
    return correct / len(idx)


def train_once(cfg: TrainConfig, fs: FeatureSet, seed: int,
               medium: FeatureSet | None = None) -> RunResult:
    """One training run with model seed ``seed``."""
    t0 = time.perf_counter()
    mcfg = replace(cfg.model, seed=seed)
    model = build(mcfg)
    res = RunResult(mcfg, seed, model=model)
    ds = fs.dataset
    train_idx, val_idx, test_idx = (ds.indices(s) for s in ("train", "val", "test"))
    if len(train_idx) == 0 or len(test_idx) == 0:
        raise ValueError("dataset needs non-empty train and test splits")
    opt = ad.AdamState(lr=cfg.lr, weight_decay=cfg.weight_decay)
    params = model.parameters()
    eval_idx = val_idx if len(val_idx) else train_idx
    best_acc, best_state = evaluate(model, fs, eval_idx), model.state()
    res.val_acc.append(best_acc)
    for epoch in range(1, cfg.epochs + 1):
        rng = rng_for(seed, epoch)
        order = rng.permutation(train_idx)
        losses = []
        for s in range(0, len(order), cfg.batch_size):
            b, x, y = fs.batch(order[s:s + cfg.batch_size])
            with ad.Tape() as tape:
                loss = nll_loss(model(b, x, train=True, rng=rng), y)
            if not np.isfinite(loss.item()):
                res.failed = True
                break
            tape.backward(loss)
            ad.adam_step(opt, params)
            losses.append(loss.item())
        if res.failed:
            log.warning("run %s seed %d diverged at epoch %d", mcfg.arch, seed, epoch)
            break
        res.train_loss.append(float(np.mean(losses)))
        acc = evaluate(model, fs, eval_idx)
        res.val_acc.append(acc)
        if cfg.selection == "last" or acc >= best_acc:
            best_acc, best_state, res.epoch_best = acc, model.state(), epoch
    model.load_state(best_state)
    if not res.failed:
        res.acc_small_test = evaluate(model, fs, test_idx)
        if medium is not None:
            res.acc_medium = evaluate(model, medium, medium.dataset.indices("test"))
    res.wall_s = time.perf_counter() - t0
    return res


def train(cfg: TrainConfig, dataset: LabeledDataset, medium: LabeledDataset | None = None,
          seeds=None) -> list[RunResult]:
    """``cfg.replications`` runs (seeds 0..n-1 unless given)."""
    fs = FeatureSet(dataset, cfg.model.feature)
    mfs = FeatureSet(medium, cfg.model.feature) if medium is not None else None
    seeds = range(cfg.replications) if seeds is None else seeds
    return [train_once(cfg, fs, s, mfs) for s in seeds]


def mean_accuracy(results: list[RunResult], which: str = "acc_small_test") -> float:
    """Average over runs that did not diverge."""
    vals = [getattr(r, which) for r in results if not r.failed]
    return float(np.mean(vals)) if vals else math.nan


def chance_level() -> float:
    return 1.0 / NUM_CLASSES
