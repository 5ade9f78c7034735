"""Command-line front end for reproducible wavelet and recognition runs.

Every subcommand resolves its settings as flags > config file > defaults,
echoes the result to ``run.json`` in its output directory, and writes all
artifacts atomically (temp file, then rename).  Report-style commands also
render PNG figures next to their CSV/JSON outputs.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys

import numpy as np

from .features import (
    MfccConfig,
    clip_to_features,
    load_features_csv,
    load_manifest,
    load_wav,
    save_features_csv,
    save_manifest,
    save_wav,
)
from .network import (
    ChannelScaler,
    MimoNetwork,
    WaveletNode,
    WeightMode,
    forward_batch,
    init_network,
)
from .plotting import (
    save_confusion_plot,
    save_curve_plot,
    save_fit_plot,
    save_history_plot,
    save_rates_plot,
)
from .recognition import (
    NetConfig,
    classify,
    evaluate,
    load_registry,
    save_eval_json,
    save_predictions_csv,
    save_rates_csv,
    save_registry,
    synth_corpus,
    train_class,
)
from .training import TrainConfig, save_history_csv, train_on_pairs
from .wavelets import BetaParams, WaveletSpec, check_admissibility, psi_eval

APPROX_TARGETS = ("sine", "square_pulse", "beta_self")


# ---------------------------------------------------------------------------
# Settings plumbing

class Settings:
    """Flags > config file > defaults, remembering every resolved value."""

    def __init__(self, args: argparse.Namespace):
        self._args = args
        self._file = {}
        if getattr(args, "config", None):
            with open(args.config, "r", encoding="utf-8") as fh:
                self._file = json.load(fh)
            if not isinstance(self._file, dict):
                raise ValueError(f"config file {args.config} must hold a JSON object")
        self.resolved: dict = {}

    def get(self, key: str, default):
        value = getattr(self._args, key, None)
        if value is None:
            value = self._file.get(key, default)
        self.resolved[key] = value
        return value


def _write_json(doc: dict, path: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def _write_rows_csv(header: list[str], rows, path: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else repr(float(v)) for v in row])
    os.replace(tmp, path)


def _out_dir(settings: Settings) -> str:
    out = settings.get("out", None)
    if out is None:
        raise ValueError("an output directory is required (--out)")
    os.makedirs(out, exist_ok=True)
    return out


def _finish_run(command: str, settings: Settings, dir_path: str) -> None:
    _write_json({"command": command, "settings": settings.resolved},
                os.path.join(dir_path, "run.json"))


def _mfcc_from(settings: Settings) -> tuple[MfccConfig, int]:
    config = MfccConfig(
        frame_len_ms=float(settings.get("frame_len_ms", 25.0)),
        hop_ms=float(settings.get("hop_ms", 10.0)),
        n_mels=int(settings.get("n_mels", 26)),
        n_coeffs=int(settings.get("n_coeffs", 13)),
        pre_emphasis=float(settings.get("pre_emphasis", 0.97)),
    )
    return config, int(settings.get("n_segments", 4))


def _train_config_from(settings: Settings, default_epochs: int,
                       default_target: float) -> TrainConfig:
    return TrainConfig(
        learning_rate=float(settings.get("learning_rate", 0.05)),
        momentum=float(settings.get("momentum", 0.9)),
        max_epochs=int(settings.get("max_epochs", default_epochs)),
        target_mse=float(settings.get("target_mse", default_target)),
        min_dilation=float(settings.get("min_dilation", 2e-3)),
    )


# ---------------------------------------------------------------------------
# Subcommands

def cmd_wavelet(args: argparse.Namespace) -> int:
    settings = Settings(args)
    params = BetaParams(
        p=float(settings.get("p", 2.0)),
        q=float(settings.get("q", 2.0)),
        x0=float(settings.get("x0", -1.0)),
        x1=float(settings.get("x1", 1.0)),
    )
    spec = WaveletSpec(
        params=params,
        order=int(settings.get("order", 1)),
        a=float(settings.get("a", 1.0)),
        b=float(settings.get("b", 0.0)),
    )
    n_samples = int(settings.get("n_samples", 1001))
    if n_samples < 2:
        raise ValueError(f"n_samples must be at least 2, got {n_samples}")
    out = _out_dir(settings)

    report = check_admissibility(spec)
    print(json.dumps(dataclasses.asdict(report), sort_keys=True))

    lo, hi = spec.b + spec.a * params.x0, spec.b + spec.a * params.x1
    xs = np.linspace(lo, hi, n_samples)
    psi = psi_eval(spec, xs)
    _write_rows_csv(["x", "psi"], zip(xs, psi), os.path.join(out, "wavelet.csv"))
    save_curve_plot(xs, psi, os.path.join(out, "wavelet.png"),
                    title=f"order-{spec.order} atom, a={spec.a}, b={spec.b}",
                    ylabel="psi")
    _finish_run("wavelet", settings, out)
    return 0


def _approx_dataset(name: str, n_samples: int) -> tuple[np.ndarray, np.ndarray]:
    xs = np.linspace(-1.0, 1.0, n_samples)
    if name == "sine":
        return xs, np.sin(np.pi * xs)
    if name == "square_pulse":
        return xs, np.where(np.abs(xs) <= 0.5, 1.0, 0.0)
    if name == "beta_self":
        return xs, psi_eval(_self_target_spec(), xs)
    raise ValueError(f"unknown target {name!r}; choose from {', '.join(APPROX_TARGETS)}")


def _self_target_spec() -> WaveletSpec:
    return WaveletSpec(params=BetaParams(p=2.0, q=2.0, x0=-1.0, x1=1.0),
                       order=1, a=1.0, b=0.0)


def cmd_approximate(args: argparse.Namespace) -> int:
    settings = Settings(args)
    name = args.function
    settings.resolved["function"] = name
    out = _out_dir(settings)
    n_samples = int(settings.get("n_samples", 201))
    seed = int(settings.get("seed", 0))

    xs, ys = _approx_dataset(name, n_samples)
    if name == "beta_self":
        # one node already at the generating parameters: only the weight
        # needs solving, so the fit should be essentially exact
        n_w = int(settings.get("n_w", 1))
        train_config = _train_config_from(settings, 5000, 1e-6)
        net = MimoNetwork(
            s_dim=1,
            nodes=[WaveletNode(spec=_self_target_spec()) for _ in range(n_w)],
            weights=np.zeros((n_w, 1)),
            weight_mode=WeightMode.MATRIX,
            scaler=ChannelScaler.identity(1),
        )
    else:
        n_w = int(settings.get("n_w", 10))
        train_config = _train_config_from(settings, 5000, 1e-4)
        net = init_network(s_dim=1, n_w=n_w, input_range=(-1.0, 1.0),
                           order=1, seed=seed)

    trained, report = train_on_pairs(net, xs[:, None], ys[:, None], train_config)
    y_hat = forward_batch(trained, xs[:, None])[:, 0]

    save_history_csv(report, os.path.join(out, "mse_history.csv"))
    _write_rows_csv(["x", "f", "f_hat"], zip(xs, ys, y_hat),
                    os.path.join(out, "curve.csv"))
    save_fit_plot(xs, ys, y_hat, os.path.join(out, "fit.png"), title=name)
    save_history_plot(report.mse_history, os.path.join(out, "history.png"))
    _finish_run("approximate", settings, out)
    print(json.dumps({"final_mse": report.final_mse, "epochs_run": report.epochs_run,
                      "converged": report.converged}, sort_keys=True))
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    settings = Settings(args)
    out = _out_dir(settings)
    corpus = synth_corpus(
        n_classes=int(settings.get("n_classes", 5)),
        n_per_class=int(settings.get("n_per_class", 20)),
        sample_rate=int(settings.get("sample_rate", 16000)),
        seed=int(settings.get("seed", 0)),
        snr_db=float(settings.get("snr_db", 20.0)),
        duration_jitter=float(settings.get("duration_jitter", 0.1)),
    )
    items = []
    counter: dict[str, int] = {}
    for label, clip in corpus:
        idx = counter.get(label, 0)
        counter[label] = idx + 1
        fname = f"{label}_{idx:03d}.wav"
        save_wav(clip, os.path.join(out, fname))
        items.append((fname, label))
    save_manifest(items, os.path.join(out, "manifest.json"))
    _finish_run("synth", settings, out)
    print(json.dumps({"classes": len(counter), "files": len(items)}, sort_keys=True))
    return 0


def cmd_features(args: argparse.Namespace) -> int:
    settings = Settings(args)
    manifest_path = settings.get("manifest", None)
    if manifest_path is None:
        raise ValueError("a corpus manifest is required (--manifest)")
    out = _out_dir(settings)
    mfcc_config, n_segments = _mfcc_from(settings)

    base = os.path.dirname(os.path.abspath(manifest_path))
    vectors = []
    for fname, label in load_manifest(manifest_path):
        clip = load_wav(os.path.join(base, fname))
        vectors.append(clip_to_features(clip, mfcc_config, n_segments, label=label))
    if not vectors:
        raise ValueError(f"manifest {manifest_path} lists no files")
    save_features_csv(vectors, os.path.join(out, "features.csv"))
    _finish_run("features", settings, out)
    print(json.dumps({"vectors": len(vectors), "dim": len(vectors[0].values)},
                     sort_keys=True))
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    settings = Settings(args)
    features_path = settings.get("features", None)
    if features_path is None:
        raise ValueError("a labeled features CSV is required (--features)")
    model_dir = settings.get("model_dir", None)
    if model_dir is None:
        raise ValueError("a model directory is required (--model-dir)")

    net_config = NetConfig(
        n_w=int(settings.get("n_w", 12)),
        order=int(settings.get("order", 1)),
        p=float(settings.get("p", 2.0)),
        q=float(settings.get("q", 2.0)),
        weight_mode=WeightMode(settings.get("weight_mode", "matrix")),
    )
    train_config = _train_config_from(settings, 300, 1e-5)
    seed = int(settings.get("seed", 0))

    vectors = load_features_csv(features_path)
    by_label: dict[str, list] = {}
    for vec in vectors:
        if vec.label is None:
            raise ValueError(f"{features_path} has unlabeled rows; training needs labels")
        by_label.setdefault(vec.label, []).append(vec)

    models = []
    for i, label in enumerate(sorted(by_label)):
        models.append(train_class(label, by_label[label], net_config,
                                  train_config, seed=seed + i))
    os.makedirs(model_dir, exist_ok=True)
    save_registry(models, model_dir)
    save_history_plot({m.label: m.train_report.mse_history for m in models},
                      os.path.join(model_dir, "training.png"))
    _finish_run("train", settings, model_dir)
    print(json.dumps(
        {"classes": [m.label for m in models],
         "final_mse": {m.label: m.train_report.final_mse for m in models}},
        sort_keys=True))
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    settings = Settings(args)
    model_dir = settings.get("model_dir", None)
    if model_dir is None:
        raise ValueError("a model directory is required (--model-dir)")
    wav_path = settings.get("wav", None)
    if wav_path is None:
        raise ValueError("a WAV file is required (--wav)")
    mfcc_config, n_segments = _mfcc_from(settings)

    models = load_registry(model_dir)
    clip = load_wav(wav_path)
    vector = clip_to_features(clip, mfcc_config, n_segments)
    prediction = classify(models, vector)
    doc = {"predicted": prediction.predicted, "scores": prediction.scores}
    print(json.dumps(doc, sort_keys=True))

    out = settings.get("out", None)
    if out is not None:
        os.makedirs(out, exist_ok=True)
        _write_json(doc, os.path.join(out, "prediction.json"))
        _finish_run("classify", settings, out)
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    settings = Settings(args)
    model_dir = settings.get("model_dir", None)
    if model_dir is None:
        raise ValueError("a model directory is required (--model-dir)")
    features_path = settings.get("features", None)
    if features_path is None:
        raise ValueError("a labeled features CSV is required (--features)")
    out = _out_dir(settings)

    models = load_registry(model_dir)
    report = evaluate(models, load_features_csv(features_path))

    save_eval_json(report, os.path.join(out, "eval.json"))
    save_predictions_csv(report, os.path.join(out, "predictions.csv"))
    save_rates_csv(report, os.path.join(out, "rates.csv"))
    save_rates_plot(report.per_class_rates, os.path.join(out, "rates.png"))
    save_confusion_plot(report.labels, report.confusion,
                        os.path.join(out, "confusion.png"))
    _finish_run("evaluate", settings, out)
    print(json.dumps({"recognition_rate": report.recognition_rate}, sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# Parser

def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="JSON file with default settings")
    sub.add_argument("--seed", type=int)
    sub.add_argument("--out", help="output directory")


def _add_mfcc_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--n-segments", dest="n_segments", type=int)
    sub.add_argument("--frame-len-ms", dest="frame_len_ms", type=float)
    sub.add_argument("--hop-ms", dest="hop_ms", type=float)
    sub.add_argument("--n-mels", dest="n_mels", type=int)
    sub.add_argument("--n-coeffs", dest="n_coeffs", type=int)
    sub.add_argument("--pre-emphasis", dest="pre_emphasis", type=float)


def _add_train_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--learning-rate", "--lr", dest="learning_rate", type=float)
    sub.add_argument("--momentum", type=float)
    sub.add_argument("--max-epochs", dest="max_epochs", type=int)
    sub.add_argument("--target-mse", dest="target_mse", type=float)
    sub.add_argument("--min-dilation", dest="min_dilation", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="betawnet",
        description="Wavelet-network function approximation and isolated-word "
                    "recognition tools.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    wav = subs.add_parser("wavelet", help="sample one atom and report admissibility")
    for flag in ("--p", "--q", "--x0", "--x1", "--a", "--b"):
        wav.add_argument(flag, type=float)
    wav.add_argument("--order", type=int)
    wav.add_argument("--n-samples", dest="n_samples", type=int)
    _add_common(wav)
    wav.set_defaults(func=cmd_wavelet)

    approx = subs.add_parser("approximate", help="fit a 1-d target function")
    approx.add_argument("function", choices=APPROX_TARGETS)
    approx.add_argument("--n-w", dest="n_w", type=int)
    approx.add_argument("--n-samples", dest="n_samples", type=int)
    _add_train_flags(approx)
    _add_common(approx)
    approx.set_defaults(func=cmd_approximate)

    synth = subs.add_parser("synth", help="generate a labeled synthetic corpus")
    synth.add_argument("--n-classes", dest="n_classes", type=int)
    synth.add_argument("--n-per-class", dest="n_per_class", type=int)
    synth.add_argument("--snr-db", dest="snr_db", type=float)
    synth.add_argument("--sample-rate", dest="sample_rate", type=int)
    synth.add_argument("--duration-jitter", dest="duration_jitter", type=float)
    _add_common(synth)
    synth.set_defaults(func=cmd_synth)

    feats = subs.add_parser("features", help="extract feature vectors for a corpus")
    feats.add_argument("--manifest")
    _add_mfcc_flags(feats)
    _add_common(feats)
    feats.set_defaults(func=cmd_features)

    train_p = subs.add_parser("train", help="train one model per class label")
    train_p.add_argument("--features")
    train_p.add_argument("--model-dir", dest="model_dir")
    train_p.add_argument("--n-w", dest="n_w", type=int)
    train_p.add_argument("--order", type=int)
    train_p.add_argument("--p", type=float)
    train_p.add_argument("--q", type=float)
    train_p.add_argument("--weight-mode", dest="weight_mode",
                         choices=[m.value for m in WeightMode])
    _add_train_flags(train_p)
    _add_common(train_p)
    train_p.set_defaults(func=cmd_train)

    cls = subs.add_parser("classify", help="label one WAV file")
    cls.add_argument("--model-dir", dest="model_dir")
    cls.add_argument("--wav")
    _add_mfcc_flags(cls)
    _add_common(cls)
    cls.set_defaults(func=cmd_classify)

    ev = subs.add_parser("evaluate", help="score a labeled test set")
    ev.add_argument("--model-dir", dest="model_dir")
    ev.add_argument("--features")
    _add_common(ev)
    ev.set_defaults(func=cmd_evaluate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
