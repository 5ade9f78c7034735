"""Multi-input multi-output wavelet networks.

A network is one hidden layer of Beta wavelet atoms shared across S
scalar channels plus an output weight matrix.  Output channel i sees
only input channel i:

    y_i = sum_j weights[j, i] * psi_j(x_i)

so the S-channel forward pass is S independent single-channel wavelet
networks evaluated with the same atoms.
"""

from __future__ import annotations

import enum
import json
import os
from dataclasses import dataclass

import numpy as np

from .wavelets import BetaParams, WaveletSpec, psi_eval


class WeightMode(enum.Enum):
    """How output weights are stored.

    SHARED mirrors the single weight vector feeding every channel;
    MATRIX gives each channel its own column and subsumes SHARED.
    """

    SHARED = "shared"
    MATRIX = "matrix"


@dataclass(frozen=True)
class WaveletNode:
    spec: WaveletSpec


@dataclass(frozen=True)
class ChannelScaler:
    """Per-channel affine map onto [-1, 1], fitted on training vectors."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise ValueError("scaler bounds must be 1-d arrays of equal length")
        if np.any(hi < lo):
            raise ValueError("scaler upper bound below lower bound")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def identity(cls, s_dim: int) -> "ChannelScaler":
        return cls(lo=-np.ones(s_dim), hi=np.ones(s_dim))

    @classmethod
    def fit(cls, rows: np.ndarray) -> "ChannelScaler":
        rows = np.asarray(rows, dtype=float)
        if rows.ndim != 2 or rows.shape[0] < 1:
            raise ValueError("fit expects a non-empty (examples, channels) array")
        return cls(lo=rows.min(axis=0), hi=rows.max(axis=0))

    def transform(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        span = self.hi - self.lo
        flat = span == 0.0
        safe = np.where(flat, 1.0, span)
        out = 2.0 * (x - self.lo) / safe - 1.0
        # A channel that never varied in training still carries its
        # deviation from the training value, centered at zero.
        if np.any(flat):
            out = np.where(flat, x - self.lo, out)
        return out

    def is_identity(self) -> bool:
        return bool(np.all(self.lo == -1.0) and np.all(self.hi == 1.0))


@dataclass
class MimoNetwork:
    """Hidden wavelet atoms plus an (N_w, S) output weight matrix."""

    nodes: list[WaveletNode]
    weights: np.ndarray
    s_dim: int
    weight_mode: WeightMode = WeightMode.MATRIX
    scaler: ChannelScaler = None  # type: ignore[assignment]

    def __post_init__(self):
        if len(self.nodes) < 1:
            raise ValueError("network needs at least one hidden node")
        if self.s_dim < 1:
            raise ValueError(f"s_dim must be >= 1, got {self.s_dim}")
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (len(self.nodes), self.s_dim):
            raise ValueError(
                f"weights shape {self.weights.shape} does not match "
                f"({len(self.nodes)} nodes, {self.s_dim} channels)"
            )
        if self.scaler is None:
            self.scaler = ChannelScaler.identity(self.s_dim)
        if self.scaler.lo.shape[0] != self.s_dim:
            raise ValueError("scaler channel count does not match s_dim")
        if self.weight_mode is WeightMode.SHARED:
            if not np.array_equal(self.weights, np.broadcast_to(self.weights[:, :1], self.weights.shape)):
                raise ValueError("shared mode requires identical weight columns")

    @property
    def n_w(self) -> int:
        return len(self.nodes)


def init_network(
    s_dim: int,
    n_w: int,
    input_range: tuple[float, float],
    order: int = 1,
    weight_mode: WeightMode = WeightMode.MATRIX,
    seed: int = 0,
    p: float = 2.0,
    q: float = 2.0,
) -> MimoNetwork:
    """Build a randomly initialized network over the given input range.

    Translations are stratified across the range (one node per equal
    slot, jittered inside it), dilations are log-uniform between half a
    slot width and the full range, and weights are uniform in
    [-0.5, 0.5].  Identical seeds give identical networks.
    """
    if n_w < 1:
        raise ValueError(f"n_w must be >= 1, got {n_w}")
    if s_dim < 1:
        raise ValueError(f"s_dim must be >= 1, got {s_dim}")
    lo, hi = float(input_range[0]), float(input_range[1])
    if not (hi > lo):
        raise ValueError(f"input range must have positive width, got [{lo}, {hi}]")
    width = hi - lo

    rng = np.random.default_rng(seed)
    params = BetaParams(p=p, q=q, x0=-1.0, x1=1.0)

    slots = (np.arange(n_w) + rng.uniform(0.0, 1.0, size=n_w)) / n_w
    b_vals = lo + slots * width
    a_lo, a_hi = width / (2.0 * n_w), width
    a_vals = np.exp(rng.uniform(np.log(a_lo), np.log(a_hi), size=n_w))

    nodes = [
        WaveletNode(spec=WaveletSpec(params=params, order=order, a=float(a), b=float(b)))
        for a, b in zip(a_vals, b_vals)
    ]
    if weight_mode is WeightMode.SHARED:
        weights = np.tile(rng.uniform(-0.5, 0.5, size=(n_w, 1)), (1, s_dim))
    else:
        weights = rng.uniform(-0.5, 0.5, size=(n_w, s_dim))
    return MimoNetwork(nodes=nodes, weights=weights, s_dim=s_dim, weight_mode=weight_mode)


def node_activations(net: MimoNetwork, inputs: np.ndarray) -> np.ndarray:
    """Evaluate every atom on every channel: shape (N_w,) + inputs.shape."""
    inputs = np.asarray(inputs, dtype=float)
    return np.stack([psi_eval(node.spec, inputs) for node in net.nodes])


def _check_length(net: MimoNetwork, vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=float)
    if vec.ndim != 1:
        raise ValueError(f"expected a 1-d input vector, got shape {vec.shape}")
    if vec.shape[0] != net.s_dim:
        raise ValueError(
            f"input length {vec.shape[0]} does not match the network's "
            f"{net.s_dim} channels"
        )
    return vec


def forward(net: MimoNetwork, inputs: np.ndarray) -> np.ndarray:
    """y_i = sum_j weights[j, i] * psi_j(inputs_i)."""
    vec = _check_length(net, inputs)
    acts = node_activations(net, vec)
    return np.einsum("ji,ji->i", net.weights, acts)


def forward_batch(net: MimoNetwork, rows: np.ndarray) -> np.ndarray:
    """Forward pass over an (M, S) batch, returning (M, S) outputs."""
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2 or rows.shape[1] != net.s_dim:
        raise ValueError(
            f"batch shape {rows.shape} does not match (examples, {net.s_dim})"
        )
    acts = node_activations(net, rows)
    return np.einsum("ji,jmi->mi", net.weights, acts)


def reconstruction_error(net: MimoNetwork, inputs: np.ndarray) -> float:
    """Mean squared per-channel error of the network reproducing its input."""
    vec = _check_length(net, inputs)
    diff = vec - forward(net, vec)
    return float(np.mean(diff * diff))


def grow_hidden_layer(
    net: MimoNetwork,
    new_nodes: list[WaveletNode],
    init_weight_scale: float,
    seed: int = 0,
) -> MimoNetwork:
    """Append hidden nodes, keeping every existing weight bit-identical."""
    if not new_nodes:
        raise ValueError("new_nodes must be non-empty")
    rng = np.random.default_rng(seed)
    k = len(new_nodes)
    if net.weight_mode is WeightMode.SHARED:
        fresh = np.tile(rng.uniform(-init_weight_scale, init_weight_scale, size=(k, 1)), (1, net.s_dim))
    else:
        fresh = rng.uniform(-init_weight_scale, init_weight_scale, size=(k, net.s_dim))
    return MimoNetwork(
        nodes=list(net.nodes) + list(new_nodes),
        weights=np.vstack([net.weights, fresh]),
        s_dim=net.s_dim,
        weight_mode=net.weight_mode,
        scaler=net.scaler,
    )


def network_to_dict(net: MimoNetwork) -> dict:
    return {
        "s_dim": net.s_dim,
        "weight_mode": net.weight_mode.value,
        "scaler": {"min": net.scaler.lo.tolist(), "max": net.scaler.hi.tolist()},
        "nodes": [
            {
                "p": node.spec.params.p,
                "q": node.spec.params.q,
                "x0": node.spec.params.x0,
                "x1": node.spec.params.x1,
                "order": node.spec.order,
                "a": node.spec.a,
                "b": node.spec.b,
            }
            for node in net.nodes
        ],
        "weights": net.weights.tolist(),
    }


def network_from_dict(doc: dict) -> MimoNetwork:
    nodes = [
        WaveletNode(
            spec=WaveletSpec(
                params=BetaParams(p=nd["p"], q=nd["q"], x0=nd["x0"], x1=nd["x1"]),
                order=int(nd["order"]),
                a=nd["a"],
                b=nd["b"],
            )
        )
        for nd in doc["nodes"]
    ]
    return MimoNetwork(
        nodes=nodes,
        weights=np.array(doc["weights"], dtype=float),
        s_dim=int(doc["s_dim"]),
        weight_mode=WeightMode(doc["weight_mode"]),
        scaler=ChannelScaler(lo=np.array(doc["scaler"]["min"], dtype=float),
                             hi=np.array(doc["scaler"]["max"], dtype=float)),
    )


def save_network(net: MimoNetwork, path: str) -> None:
    """Write the network as JSON; floats keep full round-trip precision."""
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(network_to_dict(net), fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def load_network(path: str) -> MimoNetwork:
    with open(path, "r", encoding="utf-8") as fh:
        return network_from_dict(json.load(fh))
