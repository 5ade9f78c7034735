"""Gradient-descent training for wavelet networks.

Full-batch descent with heavy-ball momentum on the quadratic cost

    E = (1/S) * sum_i (t_i - y_i)**2        (mean over channels)

updating output weights, dilations, and translations together.  Atom
evaluations reuse the analytic derivative recurrence, so the dilation
and translation gradients are exact rather than numeric.
"""

from __future__ import annotations

import csv
import enum
import json
import os
from dataclasses import dataclass, replace

import numpy as np

from .network import MimoNetwork, WaveletNode, WeightMode, forward
from .wavelets import WaveletSpec, beta_derivs_upto


class InputMode(enum.Enum):
    """What the network sees at its input during training.

    EXAMPLE_AS_INPUT feeds each example as both input and target, so the
    trained network reconstructs members of its own class.
    UNIT_RANDOM_INPUT feeds a fixed seeded unit-norm random vector per
    example and uses the example as the target.
    """

    EXAMPLE_AS_INPUT = "example_as_input"
    UNIT_RANDOM_INPUT = "unit_random_input"


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    momentum: float = 0.9
    max_epochs: int = 5000
    target_mse: float = 1e-4
    input_mode: InputMode = InputMode.EXAMPLE_AS_INPUT
    seed: int = 0
    min_dilation: float = 2e-3  # 1e-3 of the canonical [-1, 1] range width
    train_atoms: bool = True    # freeze dilations/translations when False

    def __post_init__(self):
        if not self.learning_rate >= 0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.target_mse < 0:
            raise ValueError(f"target_mse must be >= 0, got {self.target_mse}")
        if not self.min_dilation > 0:
            raise ValueError(f"min_dilation must be > 0, got {self.min_dilation}")


@dataclass(frozen=True)
class TrainReport:
    epochs_run: int
    final_mse: float
    mse_history: list[float]
    converged: bool

    def to_dict(self) -> dict:
        return {
            "epochs_run": self.epochs_run,
            "final_mse": self.final_mse,
            "converged": self.converged,
            "mse_history": self.mse_history,
        }


@dataclass(frozen=True)
class GradientBundle:
    dW: np.ndarray  # (N_w, S)
    da: np.ndarray  # (N_w,)
    db: np.ndarray  # (N_w,)


def save_history_csv(report: TrainReport, path: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "mse"])
        for epoch, mse in enumerate(report.mse_history, start=1):
            writer.writerow([epoch, repr(mse)])
    os.replace(tmp, path)


def save_report_json(report: TrainReport, path: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def _group_nodes(nodes: list[WaveletNode]) -> list[tuple[list[int], WaveletSpec]]:
    """Group node indices sharing (shape params, order) for batched evaluation."""
    groups: dict[tuple, list[int]] = {}
    for j, node in enumerate(nodes):
        spec = node.spec
        key = (spec.params.p, spec.params.q, spec.params.x0, spec.params.x1, spec.order)
        groups.setdefault(key, []).append(j)
    return [(idx, nodes[idx[0]].spec) for idx in groups.values()]


def _atom_tables(nodes, a, b, rows):
    """Evaluate beta derivatives of order and order+1 for every node.

    rows: (M, S) inputs.  Returns (u, d_ord, d_next), each (N_w, M, S),
    where u is the mother-frame coordinate and d_* are the raw beta
    derivatives at u (no dilation scaling applied yet).
    """
    n_w = len(nodes)
    m, s_dim = rows.shape
    u = (rows[None, :, :] - b[:, None, None]) / a[:, None, None]
    d_ord = np.empty((n_w, m, s_dim))
    d_next = np.empty((n_w, m, s_dim))
    for idx, spec in _group_nodes(nodes):
        tower = beta_derivs_upto(spec.params, spec.order + 1, u[idx])
        d_ord[idx] = tower[spec.order]
        d_next[idx] = tower[spec.order + 1]
    return u, d_ord, d_next


def _batch_terms(nodes, a, b, weights, rows, targets):
    """Forward outputs and mean gradients for an (M, S) batch."""
    u, d_ord, d_next = _atom_tables(nodes, a, b, rows)
    m, s_dim = rows.shape
    root_a = np.sqrt(a)
    acts = d_ord / root_a[:, None, None]  # psi_j(x_i) per node/example/channel
    y = np.einsum("ji,jmi->mi", weights, acts)
    err = -(2.0 / s_dim) * (targets - y)  # dE/dy, per example

    # reduce per example first, then average over the batch axis, so a
    # duplicated example contributes exactly the same mean gradient
    d_weights = np.einsum("mi,jmi->ji", err, acts) / m
    inv_a32 = 1.0 / (a * root_a)
    scaled = np.einsum("mi,ji,jmi->jmi", err, weights, d_next)
    d_b = -inv_a32 * np.einsum("jmi->jm", scaled).mean(axis=1)
    d_a = (
        -0.5 * inv_a32 * np.einsum("mi,ji,jmi->jm", err, weights, d_ord).mean(axis=1)
        - inv_a32 * np.einsum("jmi,jmi->jm", u, scaled).mean(axis=1)
    )
    return y, d_weights, d_a, d_b


def gradients(net: MimoNetwork, inputs: np.ndarray, targets: np.ndarray) -> GradientBundle:
    """Exact cost gradients for a single (input, target) pair."""
    inputs = np.asarray(inputs, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if inputs.shape != (net.s_dim,) or targets.shape != (net.s_dim,):
        raise ValueError(
            f"input/target shapes {inputs.shape}/{targets.shape} do not match "
            f"({net.s_dim},)"
        )
    a = np.array([node.spec.a for node in net.nodes])
    b = np.array([node.spec.b for node in net.nodes])
    _, d_weights, d_a, d_b = _batch_terms(
        net.nodes, a, b, net.weights, inputs[None, :], targets[None, :]
    )
    return GradientBundle(dW=d_weights, da=d_a, db=d_b)


def _respec_nodes(nodes: list[WaveletNode], a: np.ndarray, b: np.ndarray) -> list[WaveletNode]:
    return [
        WaveletNode(spec=replace(node.spec, a=float(ai), b=float(bi)))
        for node, ai, bi in zip(nodes, a, b)
    ]


def train_on_pairs(
    net: MimoNetwork,
    inputs: np.ndarray,
    targets: np.ndarray,
    config: TrainConfig,
) -> tuple[MimoNetwork, TrainReport]:
    """Fit the network to map each input row to its target row.

    Full-batch heavy-ball descent: per epoch the averaged gradients move
    every parameter once (v <- momentum*v - lr*g; param += v), dilations
    are clamped to min_dilation, and the post-update cost is recorded.
    Stops when that cost reaches target_mse or after max_epochs.
    """
    inputs = np.asarray(inputs, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if inputs.ndim != 2 or inputs.shape[0] < 1:
        raise ValueError("inputs must be a non-empty (examples, channels) array")
    if inputs.shape != targets.shape:
        raise ValueError(f"inputs {inputs.shape} and targets {targets.shape} differ")
    if inputs.shape[1] != net.s_dim:
        raise ValueError(
            f"example length {inputs.shape[1]} does not match the network's "
            f"{net.s_dim} channels"
        )

    nodes = list(net.nodes)
    weights = net.weights.copy()
    a = np.array([node.spec.a for node in nodes])
    b = np.array([node.spec.b for node in nodes])
    shared = net.weight_mode is WeightMode.SHARED

    vel_w = np.zeros_like(weights)
    vel_a = np.zeros_like(a)
    vel_b = np.zeros_like(b)

    lr = config.learning_rate
    mom = config.momentum
    history: list[float] = []
    converged = False

    for _ in range(config.max_epochs):
        _, g_w, g_a, g_b = _batch_terms(nodes, a, b, weights, inputs, targets)
        if shared:
            # one weight per node feeds every channel: accumulate the
            # column gradients, step once, and replicate the column
            g_w = np.tile(g_w.sum(axis=1, keepdims=True), (1, net.s_dim))
        vel_w = mom * vel_w - lr * g_w
        weights = weights + vel_w
        if config.train_atoms:
            vel_a = mom * vel_a - lr * g_a
            vel_b = mom * vel_b - lr * g_b
            a = np.maximum(a + vel_a, config.min_dilation)
            b = b + vel_b
            nodes = _respec_nodes(nodes, a, b)

        y, _, _, _ = _batch_terms(nodes, a, b, weights, inputs, targets)
        diff = targets - y
        mse = float((diff * diff).mean(axis=1).mean())
        history.append(mse)
        if mse <= config.target_mse:
            converged = True
            break

    trained = MimoNetwork(
        nodes=nodes,
        weights=weights,
        s_dim=net.s_dim,
        weight_mode=net.weight_mode,
        scaler=net.scaler,
    )
    report = TrainReport(
        epochs_run=len(history),
        final_mse=history[-1],
        mse_history=history,
        converged=converged,
    )
    return trained, report


def train(
    net: MimoNetwork,
    examples: np.ndarray,
    config: TrainConfig,
) -> tuple[MimoNetwork, TrainReport]:
    """Train the network on a set of example vectors.

    EXAMPLE_AS_INPUT: each example is both input and target, so the
    network learns to reproduce its training class.  UNIT_RANDOM_INPUT:
    each example gets a fixed seeded unit-norm random input vector and
    the example itself is the target.
    """
    examples = np.asarray(examples, dtype=float)
    if examples.ndim == 1:
        examples = examples[None, :]
    if examples.shape[0] < 1:
        raise ValueError("need at least one training example")
    if examples.shape[1] != net.s_dim:
        raise ValueError(
            f"example length {examples.shape[1]} does not match the network's "
            f"{net.s_dim} channels"
        )

    if config.input_mode is InputMode.EXAMPLE_AS_INPUT:
        inputs = examples
    else:
        rng = np.random.default_rng(config.seed)
        inputs = rng.normal(size=examples.shape)
        inputs /= np.linalg.norm(inputs, axis=1, keepdims=True)
    return train_on_pairs(net, inputs, examples, config)


def cost(net: MimoNetwork, inputs: np.ndarray, targets: np.ndarray) -> float:
    """Quadratic cost (1/S) * sum_i (t_i - y_i)**2 for a single pair."""
    diff = np.asarray(targets, dtype=float) - forward(net, inputs)
    return float(np.mean(diff * diff))


def finite_diff_check(
    net: MimoNetwork,
    inputs: np.ndarray,
    targets: np.ndarray,
    step: float = 1e-6,
) -> float:
    """Max relative disagreement between analytic and numeric gradients.

    Central-differences the cost against every trainable parameter and
    returns max |analytic - numeric| / max(1e-8, |numeric|).
    """
    if not step > 0:
        raise ValueError(f"step must be > 0, got {step}")
    bundle = gradients(net, inputs, targets)
    a0 = np.array([node.spec.a for node in net.nodes])
    b0 = np.array([node.spec.b for node in net.nodes])

    def rebuilt(weights, a, b):
        return MimoNetwork(
            nodes=_respec_nodes(net.nodes, a, b),
            weights=weights,
            s_dim=net.s_dim,
            scaler=net.scaler,
        )

    worst = 0.0

    def compare(analytic, plus, minus):
        nonlocal worst
        numeric = (plus - minus) / (2.0 * step)
        rel = abs(analytic - numeric) / max(1e-8, abs(numeric))
        worst = max(worst, rel)

    for j in range(net.n_w):
        for i in range(net.s_dim):
            w_hi = net.weights.copy()
            w_lo = net.weights.copy()
            w_hi[j, i] += step
            w_lo[j, i] -= step
            compare(
                bundle.dW[j, i],
                cost(rebuilt(w_hi, a0, b0), inputs, targets),
                cost(rebuilt(w_lo, a0, b0), inputs, targets),
            )
        a_hi, a_lo = a0.copy(), a0.copy()
        a_hi[j] += step
        a_lo[j] -= step
        compare(
            bundle.da[j],
            cost(rebuilt(net.weights, a_hi, b0), inputs, targets),
            cost(rebuilt(net.weights, a_lo, b0), inputs, targets),
        )
        b_hi, b_lo = b0.copy(), b0.copy()
        b_hi[j] += step
        b_lo[j] -= step
        compare(
            bundle.db[j],
            cost(rebuilt(net.weights, a0, b_hi), inputs, targets),
            cost(rebuilt(net.weights, a0, b_lo), inputs, targets),
        )
    return worst
