"""End-to-end graph classifiers: an embedding architecture plus the shared head."""
from __future__ import annotations

import io
import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import autodiff as ad
from .autodiff import BatchNormState, Tensor
from .features import FeatureKind
from .generators import rng_for
from .graph import NUM_CLASSES
from .layers import (Batch, gatv2_layer, gcn_layer, gin_layer, init_gatv2, init_gcn,
                     init_gin, init_linear, linear, readout_sum_linear, sagpool)

ARCHITECTURES = ("gin", "gatv2", "hierarchical", "global")
CHECKPOINT_VERSION = 1
INPUT_TRANSFORMS = ("none", "log1p", "batchnorm")


@dataclass(frozen=True)
class ModelConfig:
    """Architecture, input feature kind and widths of one model.

    Knobs beyond the basic (arch, feature, H, K, r, dropout, seed):

    ``embed_norm``
        batch-normalise the graph embedding before the head. Sum-pooled
        embeddings of graphs with hundreds of nodes are far too large for the
        head otherwise, and training stalls at the uniform prediction.
    ``dropout_after``
        head hidden layers (0, 1, 2) followed by dropout; -1 means dropout on
        the embedding itself. The default drops only before the output layer.
    ``input_transform``
        ``"none"``, ``"log1p"`` (signed log of the raw features) or
        ``"batchnorm"`` (a learned batch norm over node features).
    ``gin_mlp_norm``
        GIN's MLP is Linear-BN-ReLU-Linear rather than Linear-ReLU-Linear.
    """

    arch: str
    feature: FeatureKind
    hidden: int = 8
    layers: int = 4
    ratio: float = 0.5
    dropout: float = 0.5
    seed: int = 0
    embed_norm: bool = True
    dropout_after: tuple[int, ...] = (2,)
    input_transform: str = "none"
    gin_mlp_norm: bool = True

    def __post_init__(self):
        if self.arch not in ARCHITECTURES:
            raise ValueError(f"unknown architecture {self.arch!r}; expected one of {ARCHITECTURES}")
        if self.hidden < 1 or self.layers < 1:
            raise ValueError("hidden width and layer count must be positive")
        if not 0.0 < self.ratio <= 1.0:
            raise ValueError(f"pool ratio {self.ratio} outside (0, 1]")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout {self.dropout} outside [0, 1)")
        if not set(self.dropout_after) <= {-1, 0, 1, 2}:
            raise ValueError(f"dropout_after {self.dropout_after} must index head layers -1..2")
        if self.input_transform not in INPUT_TRANSFORMS:
            raise ValueError(f"input_transform {self.input_transform!r} not in {INPUT_TRANSFORMS}")

    @property
    def embedding_dim(self) -> int:
        h, k = self.hidden, self.layers
        return {"gin": h, "gatv2": (k + 1) * h, "hierarchical": 2 * h, "global": 2 * k * h}[self.arch]

    def to_dict(self) -> dict:
        return {"arch": self.arch, "feature": str(self.feature), "hidden": self.hidden,
                "layers": self.layers, "ratio": self.ratio, "dropout": self.dropout,
                "seed": self.seed, "embed_norm": self.embed_norm,
                "dropout_after": list(self.dropout_after), "input_transform": self.input_transform,
                "gin_mlp_norm": self.gin_mlp_norm}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        d["feature"] = FeatureKind.parse(d["feature"])
        if "dropout_after" in d:
            d["dropout_after"] = tuple(d["dropout_after"])
        return cls(**d)


def expected_param_count(cfg: ModelConfig) -> int:
    """Closed-form trainable parameter count; batch-norm running stats excluded."""
    f, h, k = cfg.feature.dim, cfg.hidden, cfg.layers
    e = cfg.embedding_dim
    head = e * h + h + 2 * (h * h + h) + h * NUM_CLASSES + NUM_CLASSES
    readouts = (f * h + h) + k * (h * h + h)
    if cfg.arch == "gin":
        body = (f * h + h) + (h * h + h) + (k - 1) * 2 * (h * h + h) + k * 2 * h + readouts
    elif cfg.arch == "gatv2":
        body = (2 * f * h + h) + (k - 1) * (2 * h * h + h) + k * 2 * h + readouts
    elif cfg.arch == "hierarchical":
        body = (f * h + h) + (k - 1) * (h * h + h) + k * (h + 1)
    else:
        body = (f * h + h) + (k - 1) * (h * h + h) + (k * h + 1)
    norm = 2 * e if cfg.embed_norm else 0
    if cfg.input_transform == "batchnorm":
        norm += 2 * f
    if cfg.arch == "gin" and cfg.gin_mlp_norm:
        norm += 2 * k * h
    return body + norm + head


@dataclass
class Model:
    config: ModelConfig
    params: dict[str, Tensor]
    bn: dict[str, BatchNormState] = field(default_factory=dict)

    def parameters(self) -> list[Tensor]:
        return list(self.params.values())

    def num_parameters(self) -> int:
        return sum(p.data.size for p in self.params.values())

    def state(self) -> dict[str, np.ndarray]:
        out = {k: p.data.copy() for k, p in self.params.items()}
        for k, s in self.bn.items():
            out[f"{k}.running_mean"] = s.running_mean.copy()
            out[f"{k}.running_var"] = s.running_var.copy()
        return out

    def load_state(self, state: dict[str, np.ndarray]) -> None:
        for k, p in self.params.items():
            if state[k].shape != p.shape:
                raise ValueError(f"shape mismatch for {k}: {state[k].shape} vs {p.shape}")
            p.data = state[k].copy()
        for k, s in self.bn.items():
            s.running_mean = state[f"{k}.running_mean"].copy()
            s.running_var = state[f"{k}.running_var"].copy()

    def __call__(self, batch: Batch, x, train: bool = False, rng=None) -> Tensor:
        return forward(self, batch, x, train, rng)


def _add_bn(params, bn, name, dim):
    params[f"{name}.gamma"] = ad.Parameter(np.ones((1, dim)))
    params[f"{name}.beta"] = ad.Parameter(np.zeros((1, dim)))
    bn[name] = BatchNormState.create(dim)


def build(config: ModelConfig) -> Model:
    """Initialise a model: Glorot weights, zero biases, seeded by ``config.seed``."""
    rng = rng_for(config.seed, 0x1417)
    f, h, k = config.feature.dim, config.hidden, config.layers
    params: dict[str, Tensor] = {}
    bn: dict[str, BatchNormState] = {}
    dims = [f] + [h] * k
    if config.arch in ("gin", "gatv2"):
        init = init_gin if config.arch == "gin" else init_gatv2
        for i in range(k):
            params.update(init(rng, dims[i], h, f"conv{i}"))
            if config.arch == "gin" and config.gin_mlp_norm:
                _add_bn(params, bn, f"conv{i}.mlp_bn", h)
            _add_bn(params, bn, f"bn{i}", h)
        for i in range(k + 1):
            params.update(init_linear(rng, dims[i], h, f"readout{i}"))
    else:
        for i in range(k):
            params.update(init_gcn(rng, dims[i], h, f"conv{i}"))
        if config.arch == "hierarchical":
            for i in range(k):
                params.update(init_gcn(rng, h, 1, f"pool{i}"))
        else:
            params.update(init_gcn(rng, k * h, 1, "pool"))
    if config.input_transform == "batchnorm":
        _add_bn(params, bn, "input_bn", f)
    if config.embed_norm:
        _add_bn(params, bn, "embed_bn", config.embedding_dim)
    widths = [config.embedding_dim, h, h, h]
    for i in range(3):
        params.update(init_linear(rng, widths[i], widths[i + 1], f"head{i}"))
    params.update(init_linear(rng, h, NUM_CLASSES, "out"))
    for name, p in params.items():
        p.name = name
    return Model(config, params, bn)


def embed(model: Model, batch: Batch, x: Tensor, train: bool) -> Tensor:
    cfg, p = model.config, model.params
    k, g = cfg.layers, batch.num_graphs
    if cfg.arch in ("gin", "gatv2"):
        reads = [readout_sum_linear(x, batch.seg, g, p, "readout0")]
        h = x
        for i in range(k):
            if cfg.arch == "gin":
                h = gin_layer(batch, h, p, f"conv{i}", bn=model.bn.get(f"conv{i}.mlp_bn"), train=train)
            else:
                h = gatv2_layer(batch, h, p, f"conv{i}")
            h = ad.batch_norm(h, p[f"bn{i}.gamma"], p[f"bn{i}.beta"], model.bn[f"bn{i}"], train)
            if cfg.arch == "gin":
                h = ad.relu(h)
            reads.append(readout_sum_linear(h, batch.seg, g, p, f"readout{i + 1}"))
        if cfg.arch == "gatv2":
            return ad.concat_cols(reads)
        out = reads[0]
        for r in reads[1:]:
            out = ad.add(out, r)
        return out
    if cfg.arch == "hierarchical":
        out = None
        h, b = x, batch
        for i in range(k):
            h = ad.relu(gcn_layer(b, h, p, f"conv{i}"))
            b, h, r = sagpool(b, h, p, cfg.ratio, f"pool{i}")
            out = r if out is None else ad.add(out, r)
        return out
    hs = []
    h = x
    for i in range(k):
        h = ad.relu(gcn_layer(batch, h, p, f"conv{i}"))
        hs.append(h)
    _, _, r = sagpool(batch, ad.concat_cols(hs), p, cfg.ratio, "pool")
    return r


def forward(model: Model, batch: Batch, x, train: bool = False, rng=None) -> Tensor:
    """Per-graph log-probabilities over the 8 classes, shape (num_graphs, 8)."""
    x = x if isinstance(x, Tensor) else Tensor(x)
    if x.shape[1] != model.config.feature.dim:
        raise ValueError(f"features have width {x.shape[1]}, model expects "
                         f"{model.config.feature.dim} ({model.config.feature})")
    if model.config.input_transform == "log1p":
        x = Tensor(np.sign(x.data) * np.log1p(np.abs(x.data)))
    elif model.config.input_transform == "batchnorm":
        x = ad.batch_norm(x, model.params["input_bn.gamma"], model.params["input_bn.beta"],
                          model.bn["input_bn"], train)
    h = embed(model, batch, x, train)
    if model.config.embed_norm:
        h = ad.batch_norm(h, model.params["embed_bn.gamma"], model.params["embed_bn.beta"],
                          model.bn["embed_bn"], train)
    if -1 in model.config.dropout_after:
        h = ad.dropout(h, model.config.dropout, train, rng)
    for i in range(3):
        h = ad.relu(linear(h, model.params, f"head{i}"))
        if i in model.config.dropout_after:
            h = ad.dropout(h, model.config.dropout, train, rng)
    return ad.log_softmax_rows(linear(h, model.params, "out"))


def save_checkpoint(model: Model, path) -> None:
    """npz container: named arrays plus a JSON config echo under ``__meta__``."""
    meta = json.dumps({"version": CHECKPOINT_VERSION, "config": model.config.to_dict()},
                      sort_keys=True)
    arrays = model.state()
    arrays["__meta__"] = np.frombuffer(meta.encode(), dtype=np.uint8)
    with open(path, "wb") as fh:
        np.savez(fh, **arrays)


def load_checkpoint(path) -> Model:
    with np.load(path) as z:
        meta = json.loads(bytes(z["__meta__"]).decode())
        if meta["version"] != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta['version']}")
        model = build(ModelConfig.from_dict(meta["config"]))
        model.load_state({k: z[k] for k in z.files if k != "__meta__"})
    return model


def with_seed(cfg: ModelConfig, seed: int) -> ModelConfig:
    return replace(cfg, seed=seed)
