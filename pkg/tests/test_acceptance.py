"""Acceptance checks for the whole package, one criterion per test.

Each test prints a single ``criterion N: PASS/FAIL`` line outside
pytest's capture (via the ``verdict`` fixture), then asserts.
"""

import time
from dataclasses import replace

import numpy as np
import pytest

from quatcomp import (
    QMatrix,
    Quaternion,
    SolverConfig,
    build_weights,
    dwqtnn_complete,
    embed,
    encode,
    psnr,
    qnn_svt_baseline,
    qsvd,
    qsvt,
    qtnn_complete,
    quat_mul,
    random_low_rank,
    random_mask,
    ssim,
    step_bound_check,
    trace_functional,
    truncated_factors,
    wqtnn_complete,
)

from test_imaging import ssim_reference
from test_qsvd import real_adjoint_singular_values


@pytest.fixture
def verdict(capsys):
    def emit(num: int, ok: bool) -> None:
        with capsys.disabled():
            print(f"criterion {num}: {'PASS' if ok else 'FAIL'}", flush=True)
    return emit


# runs shared between the solver criteria (5-8); computed once on demand
_RUNS: dict[str, tuple] = {}


def rank1_run():
    if "rank1" not in _RUNS:
        rng = np.random.default_rng(42)
        truth = random_low_rank(20, 20, 1, rng, scale=10.0)
        mask = random_mask(20, 20, 0.4, rng)
        report = qtnn_complete(truth, mask, SolverConfig.qtnn_defaults(r=1))
        _RUNS["rank1"] = (truth, mask, report)
    return _RUNS["rank1"]


def rank3_problem():
    rng = np.random.default_rng(42)
    truth = random_low_rank(60, 60, 3, rng, scale=1000.0)
    mask = random_mask(60, 60, 0.5, rng)
    return truth, mask


def rank3_runs():
    if "rank3" not in _RUNS:
        truth, mask = rank3_problem()
        qt = qtnn_complete(truth, mask, SolverConfig.qtnn_defaults(r=3))
        dw = dwqtnn_complete(truth, mask, SolverConfig.dwqtnn_defaults(r=3))
        _RUNS["rank3"] = (truth, mask, qt, dw)
    return _RUNS["rank3"]


def degenerate_runs():
    if "degenerate" not in _RUNS:
        rng = np.random.default_rng(58)
        truth = random_low_rank(16, 16, 2, rng, scale=100.0)
        mask = random_mask(16, 16, 0.4, rng)
        cfg = replace(SolverConfig.dwqtnn_defaults(r=2, theta1=2.0,
                                                   theta2=2.0),
                      max_outer=25, outer_tol=1e-12, record_trajectory=True)
        wq = wqtnn_complete(truth, mask, cfg)
        dw = dwqtnn_complete(truth, mask, cfg)
        _RUNS["degenerate"] = (truth, mask, wq, dw)
    return _RUNS["degenerate"]


def test_criterion_1_algebra_suite(verdict):
    t0 = time.perf_counter()
    ok = True
    rng = np.random.default_rng(100)
    vals = rng.uniform(-1.0, 1.0, size=(10_000, 3, 4))
    for triple in vals:
        a, b, c = (Quaternion(*v) for v in triple)
        ok &= abs(abs(quat_mul(a, b)) - abs(a) * abs(b)) <= 1e-12
        lhs = quat_mul(quat_mul(a, b), c)
        rhs = quat_mul(a, quat_mul(b, c))
        ok &= abs(lhs - rhs) <= 1e-12
    for _ in range(100):
        p = QMatrix.random(5, 4, rng)
        q = QMatrix.random(4, 6, rng)
        ok &= np.linalg.norm(embed(p @ q) - embed(p) @ embed(q)) <= 1e-10
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 5.0
    verdict(1, ok)
    assert ok, f"algebra suite failed (elapsed {elapsed:.2f}s)"


def test_criterion_2_qsvd_oracle(verdict):
    t0 = time.perf_counter()
    ok = True
    rng = np.random.default_rng(101)
    for _ in range(100):
        m = int(rng.integers(2, 33))
        n = int(rng.integers(2, 33))
        a = QMatrix.random(m, n, rng)
        f = qsvd(a)
        ok &= (f.reconstruct() - a).norm() <= 1e-9 * max(1.0, a.norm())
        ok &= (f.U.H @ f.U - QMatrix.eye(m)).norm() <= 1e-9 * m
        ok &= (f.V.H @ f.V - QMatrix.eye(n)).norm() <= 1e-9 * n
        oracle = real_adjoint_singular_values(a)[:min(m, n)]
        ok &= bool(np.allclose(f.sigma, oracle, atol=1e-8))
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30.0
    verdict(2, ok)
    assert ok, f"qsvd oracle suite failed (elapsed {elapsed:.2f}s)"


def test_criterion_3_trace_bound_fuzzing(verdict):
    from quatcomp.qsvd import _orthonormalize_columns

    ok = True
    rng = np.random.default_rng(102)
    x = QMatrix.random(7, 6, rng)
    top = np.cumsum(qsvd(x).sigma)
    for r in (1, 2, 4):
        tf = truncated_factors(x, r)
        ok &= abs(trace_functional(tf.C, x, tf.D) - top[r - 1]) <= 1e-8
        for _ in range(200):
            a = _orthonormalize_columns(QMatrix.random(7, r, rng)).H
            b = _orthonormalize_columns(QMatrix.random(6, r, rng)).H
            ok &= trace_functional(a, x, b) - top[r - 1] <= 1e-8
    verdict(3, ok)
    assert ok


def test_criterion_4_qsvt_optimality(verdict):
    from quatcomp.qsvd import nuclear_norm

    ok = True
    rng = np.random.default_rng(103)
    for _ in range(50):
        t = QMatrix.random(6, 5, rng)
        sigma = qsvd(t).sigma
        for tau in (0.1, 0.5, 2.0):
            x = qsvt(t, tau)
            expect = np.maximum(sigma - tau, 0.0)
            ok &= bool(np.allclose(qsvd(x).sigma, expect, atol=1e-8))
            base = tau * nuclear_norm(x) + 0.5 * (x - t).norm() ** 2
            for _ in range(100):
                e = QMatrix.random(6, 5, rng)
                e = e * (1e-2 / e.norm())
                z = x + e
                obj = tau * nuclear_norm(z) + 0.5 * (z - t).norm() ** 2
                ok &= base <= obj + 1e-12
    verdict(4, ok)
    assert ok


def test_criterion_5_synthetic_recovery_and_timing(verdict):
    t0 = time.perf_counter()
    truth1, _, rep1 = rank1_run()
    ok = rep1.converged
    ok &= (rep1.recovered - truth1).norm() / truth1.norm() <= 1e-2

    truth3, _, qt, dw = rank3_runs()
    ok &= qt.converged and dw.converged
    ok &= dw.wall_seconds < qt.wall_seconds
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 120.0
    verdict(5, ok)
    assert ok, (f"qtnn err={(rep1.recovered - truth1).norm() / truth1.norm():.2e} "
                f"qtnn_wall={qt.wall_seconds:.3f} dw_wall={dw.wall_seconds:.3f} "
                f"elapsed={elapsed:.1f}s")


def test_criterion_6_iteration_bound(verdict):
    ok = True
    _, mask3, _, dw = rank3_runs()
    cfg3 = SolverConfig.dwqtnn_defaults(r=3)
    _, mask_d, wq, dwd = degenerate_runs()
    cfg_d = SolverConfig.dwqtnn_defaults(r=2, theta1=2.0, theta2=2.0)
    for mask, cfg, report in ((mask3, cfg3, dw), (mask_d, cfg_d, dwd),
                              (mask_d, cfg_d, wq)):
        w = build_weights(mask, cfg.theta1, cfg.theta2, cfg.weight_side)
        ok &= step_bound_check(report, w.w1, w.w2, cfg.r)
        if report.converged:
            ok &= report.outer_iterations <= report.theorem5_iteration_bound
    verdict(6, ok)
    assert ok


def test_criterion_7_degeneracy(verdict):
    _, mask, wq, dw = degenerate_runs()
    ok = wq.outer_iterations == dw.outer_iterations
    ok &= len(wq.trajectory) >= 20
    for xa, xb in zip(wq.trajectory, dw.trajectory):
        ok &= xa.equal_bitwise(xb)
    w = build_weights(mask, 0.0, 0.0)
    ok &= bool(np.all(w.w1 == 1.0)) and bool(np.all(w.w2 == 1.0))
    verdict(7, ok)
    assert ok


def test_criterion_8_observed_entry_pinning(verdict):
    ok = True
    truth1, mask1, rep1 = rank1_run()
    truth3, mask3, qt, dw = rank3_runs()
    truth_d, mask_d, wq, dwd = degenerate_runs()
    for truth, mask, report in ((truth1, mask1, rep1), (truth3, mask3, qt),
                                (truth3, mask3, dw), (truth_d, mask_d, wq),
                                (truth_d, mask_d, dwd)):
        ok &= bool(np.all(report.recovered.planes[:, mask.observed]
                          == truth.planes[:, mask.observed]))
    verdict(8, ok)
    assert ok


def test_criterion_9_metrics(verdict):
    rng = np.random.default_rng(104)
    img = rng.integers(0, 256, size=(20, 20, 3), dtype=np.uint8)
    x = encode(img)
    ok = psnr(x, x) == np.inf
    a = encode(np.zeros((16, 16, 3), dtype=np.uint8))
    b = encode(np.full((16, 16, 3), 255, dtype=np.uint8))
    ok &= abs(psnr(a, b)) <= 1e-12
    ok &= abs(ssim(x, x) - 1.0) <= 1e-12
    for _ in range(10):
        u = rng.integers(0, 256, size=(18, 18, 3), dtype=np.uint8)
        v = np.clip(u.astype(int) + rng.integers(-40, 41, size=u.shape),
                    0, 255).astype(np.uint8)
        qu, qv = encode(u), encode(v)
        ref = np.mean([ssim_reference(qu.planes[c], qv.planes[c])
                       for c in (1, 2, 3)])
        ok &= abs(ssim(qu, qv) - ref) <= 1e-6
    verdict(9, ok)
    assert ok


def smooth_test_image(size=300):
    """Synthetic smooth RGB image with strong low-rank structure."""
    t = np.linspace(0.0, 1.0, size)
    basis = np.stack([np.ones(size), np.sin(2 * np.pi * t),
                      np.cos(2 * np.pi * t), np.sin(4 * np.pi * t)])
    rng = np.random.default_rng(105)
    chans = []
    for _ in range(3):
        c_left = rng.normal(size=(4, 1)) * basis
        c_right = rng.normal(size=(4, 1)) * basis
        plane = c_left.T @ c_right
        lo, hi = plane.min(), plane.max()
        chans.append((plane - lo) / (hi - lo) * 255.0)
    return np.round(np.stack(chans, axis=2)).astype(np.uint8)


def test_criterion_10_end_to_end_image(verdict):
    t0 = time.perf_counter()
    img = smooth_test_image()
    truth = encode(img)
    mask = random_mask(300, 300, 0.5, np.random.default_rng(106))
    zero_fill = mask.project(truth)

    # pixel-scale data needs a small starting penalty so the initial
    # threshold 1/beta is comparable to the image's singular values
    cfg = replace(SolverConfig.qtnn_defaults(r=8), beta0=1e-4,
                  inner_tol=1e-6, max_inner=100, max_outer=30)
    qt = qtnn_complete(truth, mask, cfg)
    base = qnn_svt_baseline(truth, mask, cfg)

    psnr_zero = psnr(truth, zero_fill)
    psnr_qt = psnr(truth, qt.recovered)
    psnr_base = psnr(truth, base.recovered)
    ok = psnr_qt >= psnr_zero + 5.0
    ok &= psnr_qt > psnr_base
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 600.0
    verdict(10, ok)
    assert ok, (f"psnr zero={psnr_zero:.2f} qtnn={psnr_qt:.2f} "
                f"baseline={psnr_base:.2f} elapsed={elapsed:.1f}s")
