import math

import numpy as np
import pytest

from graphclf.features import Degree, Identity, Ones
from graphclf.models import ModelConfig, build
from graphclf.training import (FeatureSet, TrainConfig, chance_level, evaluate, mean_accuracy,
                               nll_loss, train, train_once)


def test_train_config_validation():
    m = ModelConfig("gin", Ones)
    with pytest.raises(ValueError):
        TrainConfig(m, batch_size=0)
    with pytest.raises(ValueError):
        TrainConfig(m, selection="first")


def test_untrained_loss_near_log8(small_dataset):
    fs = FeatureSet(small_dataset, Degree)
    model = build(ModelConfig("gin", Degree, 8, 2))
    b, x, y = fs.batch(np.arange(len(small_dataset)))
    # train mode: batch statistics, so the fresh BN layers act as whitening
    loss = nll_loss(model(b, x, train=True, rng=np.random.default_rng(0)), y).item()
    assert abs(loss - math.log(8)) < 0.5


def test_zero_epochs_evaluates_initial_model(small_dataset):
    fs = FeatureSet(small_dataset, Ones)
    res = train_once(TrainConfig(ModelConfig("gin", Ones, 4, 2), epochs=0), fs, 0)
    assert res.epoch_best == 0 and res.train_loss == []
    assert res.acc_small_test == evaluate(build(res.config), fs, small_dataset.indices("test"))


def test_training_reduces_loss(small_dataset):
    fs = FeatureSet(small_dataset, Identity(3))
    res = train_once(TrainConfig(ModelConfig("gin", Identity(3), 8, 2), epochs=15, batch_size=20), fs, 0)
    assert res.train_loss[-1] < res.train_loss[0]
    assert len(res.val_acc) == 16
    assert 0 <= res.epoch_best <= 15
    assert res.val_acc[res.epoch_best] == max(res.val_acc)
    # ties resolve to the later epoch
    best = max(res.val_acc)
    assert res.epoch_best == max(i for i, a in enumerate(res.val_acc) if a == best)


def test_last_selection(small_dataset):
    fs = FeatureSet(small_dataset, Degree)
    res = train_once(TrainConfig(ModelConfig("global", Degree, 4, 2), epochs=3, selection="last"), fs, 1)
    assert res.epoch_best == 3


@pytest.mark.parametrize("arch", ["gatv2", "hierarchical"])
def test_runs_are_reproducible(small_dataset, arch):
    fs = FeatureSet(small_dataset, Degree)
    cfg = TrainConfig(ModelConfig(arch, Degree, 4, 2), epochs=3, batch_size=16)
    a, b = train_once(cfg, fs, 3), train_once(cfg, fs, 3)
    ra, rb = a.record(), b.record()
    ra.pop("wall_s"), rb.pop("wall_s")
    assert ra == rb
    assert a.train_loss == b.train_loss


def test_train_replications_and_medium(small_dataset):
    cfg = TrainConfig(ModelConfig("gin", Ones, 2, 1), epochs=1, replications=2)
    runs = train(cfg, small_dataset, medium=small_dataset)
    assert [r.seed for r in runs] == [0, 1]
    assert all(0 <= r.acc_medium <= 1 for r in runs)
    assert 0 <= mean_accuracy(runs) <= 1
    assert chance_level() == 0.125


def test_record_fields(small_dataset):
    fs = FeatureSet(small_dataset, Identity(5))
    rec = train_once(TrainConfig(ModelConfig("gin", Identity(5), 2, 1), epochs=1), fs, 0).record()
    assert rec["feature"] == "identity" and rec["identity_k"] == 5
    assert math.isnan(rec["acc_medium"])


def test_feature_mismatch(small_dataset):
    with pytest.raises(ValueError):
        evaluate(build(ModelConfig("gin", Identity(4))), FeatureSet(small_dataset, Ones))
