"""One check per acceptance criterion, each printing a single PASS/FAIL line."""
import math
import time

import numpy as np
import pytest

from accy import flags, metrics, weights
from accy.cone import cubic_spec, fit_rate, odp_spec, sample_cone_points, scaling_map
from accy.projection import ProjectionMap, cubic_alpha, cubic_identity, deformation_rate_scan, rate_samples

RADII = np.geomspace(10, 1e4, 16)
LINES: dict[int, str] = {}


def _report(number, ok, detail):
    LINES[number] = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    print("\n" + LINES[number])
    assert ok, detail


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_criterion_01_stenzel_metric_rate():
    (r3, r4), sec = _timed(lambda: [metrics.metric_rate_experiment("stenzel", n, RADII).fit.exponent for n in (3, 4)])
    ok = abs(r3 + 3.0) <= 0.15 and abs(r4 + 8 / 3) <= 0.15 and sec <= 30
    _report(1, ok, f"n=3 rate {r3:.4f} (-3), n=4 rate {r4:.4f} (-8/3), {sec:.1f}s")


def test_criterion_02_leading_term():
    rep, sec = _timed(lambda: metrics.stenzel_leading_term(3, 1e6))
    target = np.diag([0.0, 0.0, 1.0, -1.0, 1.0, -1.0])
    err = float(np.abs(rep.matrix - target).max())
    br = max(rep.bianchi_relative)
    ok = err <= 1e-2 and abs(rep.trace) <= 1e-2 and br <= 1e-2 and sec <= 10
    _report(2, ok, f"entry error {err:.1e}, trace {rep.trace:.1e}, Bianchi {br:.1e}, {sec:.1f}s")


def test_criterion_03_cubic_volume_form_rate():
    def run():
        return [deformation_rate_scan("cubic", p).omega_rate.exponent
                for p in ({}, {"t_ij": {(0, 1): 1.0}}, {"t_i": [1.0, 0, 0, 0]})]
    (e0, eij, ei), sec = _timed(run)
    ok = abs(e0 + 9) <= 0.3 and abs(eij + 6) <= 0.3 and abs(ei + 3) <= 0.3 and sec <= 30
    _report(3, ok, f"default {e0:.3f} (-9), t_ij {eij:.3f} (-6), t_i {ei:.3f} (-3), {sec:.1f}s")


def test_criterion_04_quadric_rate():
    def run():
        return [deformation_rate_scan("quadrics", p).omega_rate.exponent for p in ({}, {"t_i": [1.0, 0, 0, 0, 0]})]
    (e0, ei), sec = _timed(run)
    ok = abs(e0 + 6) <= 0.3 and abs(ei + 3) <= 0.3 and sec <= 30
    _report(4, ok, f"default {e0:.3f} (-6), t_i {ei:.3f} (-3), {sec:.1f}s")


def test_criterion_05_projection_diagnostics():
    spec = cubic_spec()
    proj = ProjectionMap(spec)
    dirs = sample_cone_points(spec, 4, seed=0)
    z0 = dirs[0] / np.linalg.norm(dirs[0])
    alpha = [abs(cubic_alpha(proj, t * z0)) for t in RADII]
    rate = fit_rate(RADII, alpha).exponent
    ident = max(abs(cubic_identity(cubic_alpha(proj, scaling_map(spec, r, d)), scaling_map(spec, r, d)) - 1)
                for d in dirs for r in RADII)
    ospec = odp_spec(3)
    oproj = ProjectionMap(ospec)
    worst = 0.0
    for d in sample_cone_points(ospec, 4, seed=0):
        for r in RADII:
            z = scaling_map(ospec, r, d)
            # machine precision relative to the size of the summands of sum Phi^2
            worst = max(worst, abs(complex(np.sum(oproj(z) ** 2)) - 1) / np.sum(np.abs(z) ** 2))
    ok = abs(rate + 4) <= 0.05 and ident <= 1e-10 and worst <= 100 * np.finfo(float).eps
    _report(5, ok, f"alpha rate {rate:.4f} (-4), identity {ident:.1e}, ODP residual {worst:.1e}")


def test_criterion_06_ricci_flat_oracles():
    stds = {f"stenzel{n}": metrics.stenzel_ma_residuals(n, 100, 0).std() for n in (3, 4)}
    stds.update({f"calabi{n}": metrics.calabi_ma_residuals(n, 100, 0).std() for n in (2, 3)})
    shift = 0.0
    for n in (3, 4):
        a = metrics.stenzel_ma_residuals(n, 20, 0)
        b = metrics.stenzel_ma_residuals(n, 20, 0, scale=2.5)
        shift = max(shift, float(np.abs(b - a - n * math.log(2.5)).max()))
    ok = max(stds.values()) <= 1e-6 and shift <= 1e-8
    _report(6, ok, f"max residual std {max(stds.values()):.1e}, scaling shift error {shift:.1e}")


def test_criterion_07_profile_asymptotics():
    expected = {2: (-1.0, 0), 3: (-2.0, 1), 4: (-2.0, 0)}
    got = {n: metrics.solve_stenzel_profile(n).correction_fit for n in expected}
    prof_ok = all(abs(got[n].exponent - e) <= 0.3 and got[n].log_power == p for n, (e, p) in expected.items())
    c3 = metrics.metric_rate_experiment("calabi", 3, RADII).fit.exponent
    eh = metrics.metric_rate_experiment("eguchi_hanson", 2, RADII).fit.exponent
    ok = prof_ok and abs(c3 + 6) <= 0.2 and abs(eh + 4) <= 0.1
    desc = ", ".join(f"n={n} ({got[n].exponent:.3f}, {got[n].log_power})" for n in expected)
    _report(7, ok, f"{desc}; Calabi n=3 {c3:.3f}, Eguchi-Hanson {eh:.3f}")


def test_criterion_08_weight_calculus():
    flat_ok, sym_ok = True, True
    for m in (4, 6, 8):
        ws = weights.exceptional_weights(m, *weights.sphere_spectrum(m, 10))
        lo, hi = ws.certified_range
        expect = set(range(0, int(hi) + 1)) | set(range(int(lo), 3 - m))
        flat_ok &= set(ws.weights) == expect
        for w in ws.weights:
            sym_ok &= (2 - m) - w in ws
            sym_ok &= weights.eigenvalue_for_weight(m, w) == ws.sources[ws.weights.index(w)]
    rng = np.random.default_rng(0)
    bad = 0
    for b in rng.uniform(-2.0, 0.0, 1000):
        eps = min(0.01, abs(b) / 2)
        s = weights.rate_iteration(float(b), eps).steps
        good = s[1] == 2 * s[0] and s[-1] < -2 <= s[-2]
        good &= all(abs(y - (2 * x + eps)) <= 1e-12 for x, y in zip(s[1:-1], s[2:]))
        bad += not good
    ok = flat_ok and sym_ok and bad == 0
    _report(8, ok, f"flat sets exact {flat_ok}, symmetry/round-trip {sym_ok}, bad traces {bad}/1000")


def test_criterion_09_flag_combinatorics():
    def run():
        disagree = flags.cross_check(2, 12)
        roots = all(flags.flag_c1((1, k - 1, n + 1 - k)).c1_coefficients
                    == tuple([n + k] + [n] * (k - 1) + [0] * (n + 1 - k))
                    for n in range(2, 13) for k in range(2, n + 1))
        qstar = all(any(r.bundle == "Q*" and r.exists and r.twist_power == 1
                        for r in flags.grassmannian_small_resolutions(1, n)) for n in range(2, 13))
        return disagree, roots, qstar
    (disagree, roots, qstar), sec = _timed(run)
    ok = not disagree and roots and qstar and sec <= 1
    _report(9, ok, f"disagreements {len(disagree)}, root sums {roots}, G(1,n+1) Q* twist 1 {qstar}, {sec:.2f}s")


def test_criterion_10_pointwise_j_bound():
    ratios = []
    for spec in (cubic_spec(), odp_spec(3)):
        _, om, jm, _, _ = rate_samples(spec, RADII)
        ratios.append(jm / om)
    ratios = np.concatenate(ratios, axis=0)
    # the constant read off the inner radii must certify every outer sample
    C = float(ratios[:, : len(RADII) // 2].max())
    outer = float(ratios[:, len(RADII) // 2:].max())
    ok = math.isfinite(C) and outer <= C * (1 + 1e-6)
    _report(10, ok, f"C = {C:.4f} from r <= {RADII[len(RADII) // 2 - 1]:.0f}; outer max ratio {outer:.4f}")
