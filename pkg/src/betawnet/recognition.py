"""Per-class wavelet-network models and reconstruction-error recognition.

Each acoustic unit gets its own auto-associative network trained on
that unit's feature vectors.  A test vector is scored by every class
network's reconstruction error (after the class's own input scaling)
and classified to the argmin.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from .features import AudioClip, FeatureVector
from .network import (
    ChannelScaler,
    MimoNetwork,
    WeightMode,
    init_network,
    load_network,
    reconstruction_error,
    save_network,
)
from .training import TrainConfig, TrainReport, train


@dataclass(frozen=True)
class NetConfig:
    """Hidden-layer shape options for newly initialized class networks."""

    n_w: int = 12
    order: int = 1
    p: float = 2.0
    q: float = 2.0
    weight_mode: WeightMode = WeightMode.MATRIX


@dataclass(frozen=True)
class ClassModel:
    label: str
    net: MimoNetwork
    train_report: TrainReport


@dataclass(frozen=True)
class Prediction:
    predicted: str
    scores: dict[str, float]


@dataclass(frozen=True)
class EvalReport:
    labels: list[str]
    confusion: np.ndarray  # (n_labels, n_labels) counts, rows = true
    recognition_rate: float
    per_class_rates: dict[str, float]
    items: list[tuple[str, str, float]]  # (true, predicted, winning score)

    def to_dict(self) -> dict:
        return {
            "labels": self.labels,
            "confusion": self.confusion.tolist(),
            "recognition_rate": self.recognition_rate,
            "per_class_rates": self.per_class_rates,
        }


def train_class(
    label: str,
    examples: list[FeatureVector],
    net_config: NetConfig = NetConfig(),
    train_config: TrainConfig = TrainConfig(),
    seed: int = 0,
) -> ClassModel:
    """Fit one auto-associative network to a class's feature vectors.

    The class's own per-channel scaler maps its examples into [-1, 1]
    (the atoms' support) and is stored inside the network for use at
    classification time.
    """
    if not examples:
        raise ValueError(f"class {label!r} has no examples")
    rows = np.stack([vec.values for vec in examples])
    if rows.ndim != 2:
        raise ValueError("examples must share one fixed length")
    scaler = ChannelScaler.fit(rows)
    scaled = scaler.transform(rows)
    net = init_network(
        s_dim=rows.shape[1],
        n_w=net_config.n_w,
        input_range=(-1.0, 1.0),
        order=net_config.order,
        weight_mode=net_config.weight_mode,
        seed=seed,
        p=net_config.p,
        q=net_config.q,
    )
    net.scaler = scaler
    trained, report = train(net, scaled, train_config)
    return ClassModel(label=label, net=trained, train_report=report)


def classify(models: list[ClassModel], x: FeatureVector) -> Prediction:
    """Score x against every class model; lowest reconstruction error wins.

    Ties go to the lexicographically smaller label, so the result never
    depends on registry order.
    """
    if not models:
        raise ValueError("no class models to classify against")
    values = np.asarray(x.values, dtype=float)
    scores: dict[str, float] = {}
    for model in models:
        if values.shape[0] != model.net.s_dim:
            raise ValueError(
                f"feature length {values.shape[0]} does not match model "
                f"{model.label!r} ({model.net.s_dim} channels)"
            )
        scores[model.label] = reconstruction_error(
            model.net, model.net.scaler.transform(values)
        )
    predicted = min(scores, key=lambda label: (scores[label], label))
    return Prediction(predicted=predicted, scores=scores)


def evaluate(models: list[ClassModel], test_set: list[FeatureVector]) -> EvalReport:
    """Classify a labeled test set and tabulate the confusion matrix."""
    if not test_set:
        raise ValueError("test set is empty")
    for vec in test_set:
        if vec.label is None:
            raise ValueError("every test vector needs a label")

    model_labels = [m.label for m in models]
    labels = sorted(set(model_labels) | {vec.label for vec in test_set})
    index = {label: i for i, label in enumerate(labels)}
    confusion = np.zeros((len(labels), len(labels)), dtype=int)
    items: list[tuple[str, str, float]] = []

    for vec in test_set:
        pred = classify(models, vec)
        confusion[index[vec.label], index[pred.predicted]] += 1
        items.append((vec.label, pred.predicted, pred.scores[pred.predicted]))

    total = confusion.sum()
    rate = float(np.trace(confusion)) / float(total)
    per_class: dict[str, float] = {}
    for label in labels:
        row = confusion[index[label]]
        row_total = int(row.sum())
        if row_total > 0:
            per_class[label] = float(row[index[label]]) / row_total
    return EvalReport(
        labels=labels,
        confusion=confusion,
        recognition_rate=rate,
        per_class_rates=per_class,
        items=items,
    )


# ---------------------------------------------------------------------------
# Synthetic corpus

def _class_tones(class_idx: int) -> list[tuple[float, float]]:
    """Fixed (frequency, amplitude) pairs; distinct per class by design."""
    tones = [
        (320.0 + 130.0 * class_idx, 1.0),
        (1150.0 + 215.0 * class_idx, 0.7),
    ]
    if class_idx % 2 == 1:
        tones.append((2400.0 + 160.0 * class_idx, 0.5))
    return tones


def _class_envelope(class_idx: int, n: int) -> np.ndarray:
    """Attack-decay amplitude contour; the attack fraction varies by class."""
    attack = 0.12 + 0.06 * (class_idx % 4)
    t = np.linspace(0.0, 1.0, n)
    rise = np.clip(t / attack, 0.0, 1.0)
    fall = np.clip((1.0 - t) / (1.0 - attack), 0.0, 1.0)
    return np.minimum(rise, fall) ** 0.5


def synth_corpus(
    n_classes: int,
    n_per_class: int,
    sample_rate: int = 16000,
    seed: int = 0,
    snr_db: float = 20.0,
    duration_jitter: float = 0.1,
    base_duration_s: float = 0.5,
) -> list[tuple[str, AudioClip]]:
    """Deterministic labeled clips: class-specific tone stacks plus noise.

    Every class is a fixed template (two or three tones under an
    amplitude envelope); examples vary by seeded white noise at snr_db
    and by +-duration_jitter relative duration.  An infinite snr_db with
    zero jitter reproduces the template exactly for every example.
    """
    if n_classes < 2:
        raise ValueError(f"need at least 2 classes, got {n_classes}")
    if n_per_class < 1:
        raise ValueError(f"need at least 1 example per class, got {n_per_class}")
    rng = np.random.default_rng(seed)
    corpus: list[tuple[str, AudioClip]] = []
    for c in range(n_classes):
        label = f"word{c:02d}"
        tones = _class_tones(c)
        for _ in range(n_per_class):
            stretch = 1.0 + duration_jitter * rng.uniform(-1.0, 1.0)
            n = max(1, int(round(base_duration_s * stretch * sample_rate)))
            t = np.arange(n) / sample_rate
            signal = np.zeros(n)
            for freq, amp in tones:
                signal += amp * np.sin(2.0 * np.pi * freq * t)
            signal *= _class_envelope(c, n)
            signal *= 0.7 / np.max(np.abs(signal))
            if math.isfinite(snr_db):
                power = float(np.mean(signal * signal))
                sigma = math.sqrt(power / (10.0 ** (snr_db / 10.0)))
                signal = signal + sigma * rng.standard_normal(n)
            corpus.append((label, AudioClip(samples=signal, sample_rate=sample_rate)))
    return corpus


# ---------------------------------------------------------------------------
# Model registry on disk

def save_registry(models: list[ClassModel], dir_path: str) -> None:
    """Write one JSON model per class plus a manifest, atomically per file."""
    os.makedirs(dir_path, exist_ok=True)
    entries = []
    for model in sorted(models, key=lambda m: m.label):
        fname = f"{model.label}.model.json"
        save_network(model.net, os.path.join(dir_path, fname))
        report_name = f"{model.label}.report.json"
        tmp = os.path.join(dir_path, f"{report_name}.tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(model.train_report.to_dict(), fh, indent=2)
            fh.write("\n")
        os.replace(tmp, os.path.join(dir_path, report_name))
        entries.append({"label": model.label, "model": fname, "report": report_name})
    tmp = os.path.join(dir_path, "registry.json.tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump({"classes": entries}, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, os.path.join(dir_path, "registry.json"))


def load_registry(dir_path: str) -> list[ClassModel]:
    with open(os.path.join(dir_path, "registry.json"), "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    models = []
    for entry in manifest["classes"]:
        net = load_network(os.path.join(dir_path, entry["model"]))
        with open(os.path.join(dir_path, entry["report"]), "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        report = TrainReport(
            epochs_run=doc["epochs_run"],
            final_mse=doc["final_mse"],
            mse_history=doc["mse_history"],
            converged=doc["converged"],
        )
        models.append(ClassModel(label=entry["label"], net=net, train_report=report))
    return models


def add_class(model: ClassModel, dir_path: str) -> None:
    """Register one more unit without retraining the existing models."""
    existing = load_registry(dir_path) if os.path.exists(
        os.path.join(dir_path, "registry.json")
    ) else []
    if any(m.label == model.label for m in existing):
        raise ValueError(f"class {model.label!r} already registered")
    save_registry(existing + [model], dir_path)


# ---------------------------------------------------------------------------
# Report files

def save_eval_json(report: EvalReport, path: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def save_predictions_csv(report: EvalReport, path: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["true_label", "predicted", "score"])
        for true, predicted, score in report.items:
            writer.writerow([true, predicted, repr(float(score))])
    os.replace(tmp, path)


def save_rates_csv(report: EvalReport, path: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "rate"])
        for label in report.labels:
            if label in report.per_class_rates:
                writer.writerow([label, repr(float(report.per_class_rates[label]))])
    os.replace(tmp, path)
