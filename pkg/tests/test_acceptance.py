"""Acceptance gate: every headline requirement, one printed line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
PASS/FAIL lines.  Each test measures what the criterion states, at the
stated tolerance, and fails loudly otherwise.
"""

import json
import time

import numpy as np
import pytest

from betawnet.cli import main
from betawnet.features import (
    MfccConfig,
    load_features_csv,
    mel_center_freqs,
    mel_filterbank,
    save_features_csv,
)
from betawnet.network import forward, init_network, load_network, save_network
from betawnet.training import TrainConfig, finite_diff_check
from betawnet.transforms import fft
from betawnet.wavelets import (
    BetaParams,
    WaveletSpec,
    beta_derivative,
    beta_eval,
    check_admissibility,
)


def _report(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def _rel_err(got: np.ndarray, want: np.ndarray) -> float:
    scale = np.maximum(np.abs(want), 1e-300)
    return float(np.max(np.abs(got - want) / scale))


# ---------------------------------------------------------------------------
# 1. closed-form oracle for the p = q = 1 bump

def test_beta_math_oracle():
    t0 = time.perf_counter()
    params = BetaParams(p=1.0, q=1.0, x0=-1.0, x1=1.0)
    rng = np.random.default_rng(20260817)
    xs = rng.uniform(-0.999, 0.999, size=1000)

    worst = _rel_err(beta_eval(params, xs), 1.0 - xs * xs)
    worst = max(worst, _rel_err(beta_derivative(params, 1, xs), -2.0 * xs))
    worst = max(worst, _rel_err(beta_derivative(params, 2, xs),
                                np.full_like(xs, -2.0)))
    elapsed = time.perf_counter() - t0
    _report("beta-oracle", worst < 1e-10 and elapsed < 1.0,
            f"max rel err {worst:.2e} (< 1e-10), {elapsed:.3f} s (< 1 s)")


# ---------------------------------------------------------------------------
# 2. derivative recurrence vs central finite differences

def test_derivative_recurrence_vs_finite_differences():
    params = BetaParams(p=4.0, q=5.0, x0=-1.0, x1=1.0)
    rng = np.random.default_rng(7)
    xs = rng.uniform(-0.9, 0.9, size=100)
    step = 1e-5

    worst = 0.0
    for order in (1, 2, 3):
        below = beta_derivative(params, order - 1, xs - step)
        above = beta_derivative(params, order - 1, xs + step)
        numeric = (above - below) / (2.0 * step)
        analytic = beta_derivative(params, order, xs)
        scale = np.maximum(np.abs(numeric), 1e-8)
        worst = max(worst, float(np.max(np.abs(analytic - numeric) / scale)))
    _report("derivative-recurrence", worst < 1e-6,
            f"orders 1-3 max rel err {worst:.2e} (< 1e-6)")


# ---------------------------------------------------------------------------
# 3. admissibility of order-1 atoms

def test_wavelet_admissibility_properties():
    cases = [
        (1.0, 1.0, 1.0, 0.0),
        (2.0, 2.0, 1.0, 0.0),
        (1.5, 3.0, 0.5, 0.25),
        (4.0, 1.0, 2.0, -1.0),
        (2.0, 5.0, 0.05, 3.0),
    ]
    worst_integral = 0.0
    for p, q, a, b in cases:
        spec = WaveletSpec(params=BetaParams(p=p, q=q, x0=-1.0, x1=1.0),
                           order=1, a=a, b=b)
        report = check_admissibility(spec)
        worst_integral = max(worst_integral, report.integral_abs)
        if report.support_decay != 0.0:
            _report("wavelet-properties", False,
                    f"support_decay {report.support_decay} != 0 for p={p}, q={q}")
        if not (np.isfinite(report.c_psi_estimate) and report.c_psi_estimate > 0):
            _report("wavelet-properties", False,
                    f"c_psi {report.c_psi_estimate} not finite/positive")
    _report("wavelet-properties", worst_integral < 1e-6,
            f"{len(cases)} atoms, max |integral| {worst_integral:.2e} (< 1e-6), "
            "zero decay outside support, c_psi finite and positive")


# ---------------------------------------------------------------------------
# 4. analytic gradients vs finite differences on random networks

def test_gradient_suite():
    t0 = time.perf_counter()
    worst = 0.0
    for seed in range(20):
        rng = np.random.default_rng(1000 + seed)
        s_dim = int(rng.integers(2, 5))
        net = init_network(s_dim=s_dim, n_w=int(rng.integers(2, 6)),
                           input_range=(-1.0, 1.0), order=1, seed=seed)
        x = rng.uniform(-0.95, 0.95, size=s_dim)
        t = rng.uniform(-1.0, 1.0, size=s_dim)
        worst = max(worst, finite_diff_check(net, x, t))
    elapsed = time.perf_counter() - t0
    _report("gradient-suite", worst < 1e-4 and elapsed < 10.0,
            f"20 triples, max rel err {worst:.2e} (< 1e-4), "
            f"{elapsed:.2f} s (< 10 s)")


# ---------------------------------------------------------------------------
# 5. 1-d approximation targets

def test_approximation_convergence(tmp_path):
    t0 = time.perf_counter()
    sine_out = tmp_path / "sine"
    assert main(["approximate", "sine", "--n-w", "10", "--out", str(sine_out)]) == 0
    history = [float(line.split(",")[1]) for line in
               (sine_out / "mse_history.csv").read_text().strip().splitlines()[1:]]
    sine_best = min(history)
    sine_ok = sine_best < 1e-2 and len(history) <= 5000

    beta_out = tmp_path / "beta"
    assert main(["approximate", "beta_self", "--out", str(beta_out)]) == 0
    beta_final = float((beta_out / "mse_history.csv")
                       .read_text().strip().splitlines()[-1].split(",")[1])
    elapsed = time.perf_counter() - t0
    _report("approximation-convergence",
            sine_ok and beta_final < 1e-6 and elapsed < 60.0,
            f"sine best mse {sine_best:.2e} (< 1e-2) in {len(history)} epochs, "
            f"self-target final {beta_final:.2e} (< 1e-6), "
            f"{elapsed:.1f} s (< 60 s)")


# ---------------------------------------------------------------------------
# 6 + 7. end-to-end synthetic recognition, and bit-identical reruns

def _run_recognition_pipeline(root):
    corpus = root / "corpus"
    featdir = root / "features"
    models = root / "models"
    assert main(["synth", "--n-classes", "5", "--n-per-class", "20",
                 "--snr-db", "20", "--seed", "7", "--out", str(corpus)]) == 0
    assert main(["features", "--manifest", str(corpus / "manifest.json"),
                 "--out", str(featdir)]) == 0

    # 80/20 split inside every class, in corpus order
    vectors = load_features_csv(str(featdir / "features.csv"))
    by_label = {}
    for vec in vectors:
        by_label.setdefault(vec.label, []).append(vec)
    train_vecs, test_vecs = [], []
    for label in sorted(by_label):
        group = by_label[label]
        cut = int(0.8 * len(group))
        train_vecs.extend(group[:cut])
        test_vecs.extend(group[cut:])
    save_features_csv(train_vecs, str(featdir / "train.csv"))
    save_features_csv(test_vecs, str(featdir / "test.csv"))

    assert main(["train", "--features", str(featdir / "train.csv"),
                 "--model-dir", str(models), "--seed", "100"]) == 0
    eval_train = root / "eval_train"
    eval_test = root / "eval_test"
    assert main(["evaluate", "--model-dir", str(models),
                 "--features", str(featdir / "train.csv"),
                 "--out", str(eval_train)]) == 0
    assert main(["evaluate", "--model-dir", str(models),
                 "--features", str(featdir / "test.csv"),
                 "--out", str(eval_test)]) == 0
    rate_train = json.loads((eval_train / "eval.json").read_text())["recognition_rate"]
    rate_test = json.loads((eval_test / "eval.json").read_text())["recognition_rate"]
    return models, eval_test, rate_train, rate_test


@pytest.fixture(scope="module")
def pipeline_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("e2e_a")
    t0 = time.perf_counter()
    models, eval_test, rate_train, rate_test = _run_recognition_pipeline(root)
    elapsed = time.perf_counter() - t0
    return root, models, eval_test, rate_train, rate_test, elapsed


def test_end_to_end_recognition(pipeline_run):
    _, _, _, rate_train, rate_test, elapsed = pipeline_run
    _report("end-to-end-recognition",
            rate_test >= 0.95 and rate_train == 1.0 and elapsed < 120.0,
            f"5 classes x 20 at 20 dB: held-out rate {rate_test:.3f} (>= 0.95), "
            f"training rate {rate_train:.3f} (= 1.0), {elapsed:.1f} s (< 120 s)")


def test_rerun_determinism(pipeline_run, tmp_path_factory):
    _, models_a, eval_a, _, _, _ = pipeline_run
    root_b = tmp_path_factory.mktemp("e2e_b")
    models_b, eval_b, _, _ = _run_recognition_pipeline(root_b)

    labels = [f"word{c:02d}" for c in range(5)]
    same = all(
        (models_a / f"{label}.model.json").read_bytes()
        == (models_b / f"{label}.model.json").read_bytes()
        for label in labels
    )
    same = same and all(
        (eval_a / name).read_bytes() == (eval_b / name).read_bytes()
        for name in ("predictions.csv", "rates.csv")
    )
    _report("rerun-determinism", same,
            "model JSON and evaluation CSVs byte-identical across reruns")


# ---------------------------------------------------------------------------
# 8. spectra: fast transform vs direct DFT, and the mel peak

def test_mfcc_oracle():
    rng = np.random.default_rng(512)
    worst = 0.0
    for _ in range(3):
        x = rng.standard_normal(512)
        direct = np.array([
            np.sum(x * np.exp(-2j * np.pi * k * np.arange(512) / 512))
            for k in range(512)
        ])
        got = fft(x.astype(complex))
        worst = max(worst, float(np.max(np.abs(got - direct))
                                 / np.max(np.abs(direct))))
    fft_ok = worst < 1e-9

    # a 1 kHz tone must excite the filter whose center is nearest 1 kHz
    sample_rate = 16000
    n_fft = 512
    t = np.arange(n_fft) / sample_rate
    tone = np.sin(2.0 * np.pi * 1000.0 * t)
    spectrum = np.abs(fft(tone.astype(complex)))[: n_fft // 2 + 1]
    config = MfccConfig()
    bank = mel_filterbank(config.n_mels, n_fft, sample_rate, 0.0, 8000.0)
    energies = bank @ spectrum
    peak = int(np.argmax(energies))
    centers = mel_center_freqs(config.n_mels, 0.0, 8000.0)
    nearest = int(np.argmin(np.abs(centers - 1000.0)))
    _report("spectrum-oracle", fft_ok and peak == nearest,
            f"fft vs direct dft max rel err {worst:.2e} (< 1e-9), "
            f"1 kHz tone peaks at filter {peak} (nearest-center {nearest})")


# ---------------------------------------------------------------------------
# 9. persistence round-trip

def test_persistence_roundtrip(tmp_path):
    net = init_network(s_dim=5, n_w=7, input_range=(-1.0, 1.0), order=1, seed=3)
    path = tmp_path / "net.json"
    save_network(net, str(path))
    loaded = load_network(str(path))

    rng = np.random.default_rng(99)
    exact = all(
        np.array_equal(forward(net, x), forward(loaded, x))
        for x in rng.uniform(-1.0, 1.0, size=(100, 5))
    )
    _report("persistence-roundtrip", exact,
            "forward outputs bit-identical on 100 random inputs after "
            "JSON round-trip")
