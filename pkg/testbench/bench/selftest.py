#!/usr/bin/env python3
"""
Fast invariant suites behind `testbench selftest`.

Each suite returns a short detail string on success and raises AssertionError (or a
TestbenchError) on failure; run_selftest() turns that into PASS/FAIL results.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from testbench.airlink.channel import sample_channel
from testbench.airlink.config import SystemConfig
from testbench.airlink.link import one_bit_quantize, transmit_block
from testbench.airlink.pilots import build_pilot_book, qpsk
from testbench.bench.experiment import ExperimentConfig, run_sweep
from testbench.numerics.dft import make_plan, unitarity_error
from testbench.numerics.packing import to_real
from testbench.numerics.seeding import make_rng
from testbench.numerics.tape import GradTape, finite_diff_grad, relative_error, squared_error
from testbench.stage1.mlp import MlpModel, init_mlp, mlp_forward_tape, watch_params
from testbench.stage1.trainer import Stage1Params, TrainingSet, make_label, training_loss
from testbench.stage2.dip import (
    DipConfig,
    DipModel,
    build_tensor,
    dip_forward_tape,
    fit_loss,
    hidden_names,
    init_dip,
)
from testbench.stage2.layers import batch_norm, conv_1x1, upsample_2x_bilinear

logger = logging.getLogger(__name__)

GRADIENT_TOLERANCE = 1e-4
FD_STEP = 1e-5
# gradients below this magnitude are compared in absolute terms
GRADIENT_FLOOR = 1e-4
# pre-activations closer than this to zero make central differences straddle a kink
KINK_MARGIN = 1e-3


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    detail: str = ''

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def check_dft_unitarity() -> str:
    worst = max(unitarity_error(make_plan(n)) for n in (16, 32, 64))
    assert worst < 1e-12, f"max |F F^H - I| = {worst:.3g}"
    return f"max |F F^H - I| = {worst:.2e}"


def check_quantizer(trials: int = 1000) -> str:
    rng = make_rng(11)
    y = rng.standard_normal((trials, 8)) + 1j * rng.standard_normal((trials, 8))
    q = one_bit_quantize(y)
    level = 1.0 / np.sqrt(2.0)
    assert np.array_equal(np.abs(q.real), np.full(q.shape, level)), "real parts off the alphabet"
    assert np.array_equal(np.abs(q.imag), np.full(q.shape, level)), "imaginary parts off the alphabet"
    alpha = rng.uniform(1e-3, 1e3, size=(trials, 1))
    assert np.array_equal(one_bit_quantize(alpha * y), q), "Q(alpha y) != Q(y)"
    assert np.array_equal(one_bit_quantize(q), q), "Q(Q(y)) != Q(y)"
    return f"{trials} scale-invariance pairs"


def check_label_oracle(cases: int = 100) -> str:
    """Noiseless, unquantized labels must reproduce the channel frequency response."""
    cfg = SystemConfig(users=1, antennas=2, subcarriers=16, symbols=4, pilots=1,
                       tap_profile=((0, 0.5), (1, 0.3), (3, 0.2)))
    rng = make_rng(12)
    worst = 0.0
    for _ in range(cases):
        ch = sample_channel(cfg, rng)
        book = build_pilot_book(cfg, rng)
        (sig,) = transmit_block(ch, book, cfg, rng, noise=False)
        x = book.pilot_for_slot(sig.slot)
        for m in range(cfg.antennas):
            worst = max(worst, float(np.max(np.abs(make_label(sig.y[:, m], x) - ch.lam[0, :, m]))))
    assert worst < 1e-9, f"label error {worst:.3g}"
    return f"{cases} cases, max error {worst:.2e}"


def check_parameter_count() -> str:
    rng = make_rng(13)
    for n_f in (16, 32, 64):
        count = init_mlp(n_f, rng).weight_count
        assert count == 32 * n_f ** 2, f"N_f={n_f}: {count} weights, expected {32 * n_f ** 2}"
    return "W = 32 N_f^2 for N_f in {16, 32, 64}"


def _mlp_margin(model: MlpModel, inputs: np.ndarray) -> float:
    p = model.params
    z1 = inputs @ p['phi1'].T + p['bias1']
    z2 = np.maximum(z1, 0.0) @ p['phi2'].T + p['bias2']
    return float(min(np.min(np.abs(z1)), np.min(np.abs(z2))))


def _random_training_set(rng: np.random.Generator, subcarriers: int = 2, pairs: int = 3) -> TrainingSet:
    x = qpsk(rng, (pairs, subcarriers))
    r = one_bit_quantize(rng.standard_normal((pairs, subcarriers)) + 1j * rng.standard_normal((pairs, subcarriers)))
    labels = np.stack([make_label(r[p], x[p]) for p in range(pairs)])
    return TrainingSet(inputs=to_real(x), labels=to_real(labels))


def stage1_gradient_error(seed: int = 14, subcarriers: int = 2, pairs: int = 3) -> float:
    """Worst per-coordinate relative error between tape and central-difference gradients."""
    rng = make_rng(seed)
    ts = _random_training_set(rng, subcarriers, pairs)
    model = init_mlp(subcarriers, rng)
    while _mlp_margin(model, ts.inputs) < KINK_MARGIN:
        model = init_mlp(subcarriers, rng)
        model.params['bias1'] = rng.uniform(-0.1, 0.1, size=model.params['bias1'].shape)

    tape = GradTape()
    variables = watch_params(tape, model.params)
    out = mlp_forward_tape(tape, variables, tape.constant(ts.inputs))
    analytic = tape.backward(squared_error(out, tape.constant(ts.labels), divisor=ts.size))
    numeric = finite_diff_grad(lambda p: training_loss(MlpModel(params=p), ts), model.params, step=FD_STEP)
    return max(float(np.max(relative_error(analytic[n], numeric[n], floor=GRADIENT_FLOOR))) for n in analytic)


def _dip_margin(model: DipModel, cfg: DipConfig) -> float:
    z = model.z0
    margin = np.inf
    for i in range(cfg.layers):
        kernel, bias, scale, shift = hidden_names(i)
        z = conv_1x1(z, model.params[kernel], model.params[bias])
        if i < cfg.layers - 1:
            z = upsample_2x_bilinear(z)
        margin = min(margin, float(np.min(np.abs(z))))
        z = batch_norm(np.maximum(z, 0.0), model.params[scale], model.params[shift], cfg.bn_mode)
    return margin


def _offset_dip(cfg: DipConfig, rng: np.random.Generator) -> DipModel:
    """A fresh model with nonzero biases and shifts, so no pre-activation sits exactly at zero."""
    model = init_dip(cfg, rng)
    for i in range(cfg.layers):
        _, bias, _, shift = hidden_names(i)
        model.params[bias] = rng.uniform(-0.05, 0.05, size=model.params[bias].shape)
        model.params[shift] = rng.uniform(-0.2, 0.2, size=model.params[shift].shape)
    return model


def tiny_dip_config(bn_mode: str = 'batch') -> DipConfig:
    return DipConfig(subcarriers=4, symbols=4, antennas=1, layers=2, widths=(3, 3, 2),
                     iterations=1, bn_mode=bn_mode)


def dip_gradient_error(seed: int = 15, bn_mode: str = 'batch') -> float:
    cfg = tiny_dip_config(bn_mode)
    rng = make_rng(seed)
    lam = rng.standard_normal((cfg.subcarriers, cfg.antennas)) + 1j * rng.standard_normal((cfg.subcarriers, cfg.antennas))
    target = build_tensor(lam, cfg.symbols)
    model = _offset_dip(cfg, rng)
    while _dip_margin(model, cfg) < KINK_MARGIN:
        model = _offset_dip(cfg, rng)

    tape = GradTape()
    variables = {name: tape.watch(name, value) for name, value in model.params.items()}
    out = dip_forward_tape(tape, variables, tape.constant(model.z0), cfg)
    analytic = tape.backward(squared_error(out, tape.constant(to_real(target.grid, axis=2))))
    numeric = finite_diff_grad(lambda p: fit_loss(DipModel(z0=model.z0, params=p), target, cfg),
                               model.params, step=FD_STEP)
    return max(float(np.max(relative_error(analytic[n], numeric[n], floor=GRADIENT_FLOOR))) for n in analytic)


def check_stage1_gradients() -> str:
    err = stage1_gradient_error()
    assert err < GRADIENT_TOLERANCE, f"relative error {err:.3g}"
    return f"max relative error {err:.2e}"


def check_dip_gradients() -> str:
    err = dip_gradient_error()
    assert err < GRADIENT_TOLERANCE, f"relative error {err:.3g}"
    return f"max relative error {err:.2e}"


def check_sweep_determinism() -> str:
    """Two runs of a one-second sweep must agree row for row."""
    cfg = ExperimentConfig(
        system=SystemConfig(users=1, antennas=2, subcarriers=8, symbols=8, pilots=2,
                            tap_profile=((0, 0.7), (1, 0.3))),
        stage1=Stage1Params(epochs=5, generated_samples=4),
        dip=DipConfig(subcarriers=8, symbols=4, antennas=2, layers=2, widths=(4, 4, 4), iterations=3),
        snr_db=(0.0, 10.0),
        realizations=2,
        seed=3,
    )
    first = run_sweep(cfg).to_dicts()
    second = run_sweep(cfg).to_dicts()
    assert first == second, "two sweeps with the same seed disagree"
    return f"{len(first)} rows reproduced"


SUITES: Dict[str, Callable[[], str]] = {
    'dft-unitarity': check_dft_unitarity,
    'quantizer': check_quantizer,
    'label-oracle': check_label_oracle,
    'parameter-count': check_parameter_count,
    'stage1-gradients': check_stage1_gradients,
    'dip-gradients': check_dip_gradients,
    'sweep-determinism': check_sweep_determinism,
}


def run_selftest(names: Optional[Sequence[str]] = None) -> List[SuiteResult]:
    results = []
    for name in names or list(SUITES):
        if name not in SUITES:
            results.append(SuiteResult(name, False, "unknown suite"))
            continue
        try:
            detail = SUITES[name]()
            results.append(SuiteResult(name, True, detail))
        except Exception as e:
            logger.debug("Suite %s failed", name, exc_info=True)
            results.append(SuiteResult(name, False, str(e) or type(e).__name__))
    return results
