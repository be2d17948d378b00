"""Acceptance criteria AC1-AC12.

Each test prints a single ``ACn PASS|FAIL: ...`` line before asserting; run
with ``pytest tests/test_acceptance.py -s`` (or execute this file) to see them.
"""

import math
import re
import subprocess
import sys
import time

import numpy as np
import pytest

from conftest import random_density, random_hermitian, random_unitary
from contens.ensembles import (
    ContinuousEnsemble,
    barycenter,
    differential_entropy,
    smeared_from_density,
)
from contens.errors import BoundViolation
from contens.kfunc import (
    EvalConfig,
    SampleSet,
    grad_fd_check,
    k_closed_single,
    k_mc,
    k_on_samples,
)
from contens.operators import (
    SpaceDescriptor,
    density_matrix,
    hs_inner,
    identity,
    tensor_product,
    validate_hermitian,
    write_operator,
    zeros,
)
from contens.solver import (
    classify_robust_separability,
    solve_bipartite_saa,
    solve_single,
    werner_state,
)

B22 = SpaceDescriptor.bipartite(2, 2)


def report(tag, ok, detail):
    print(f"\n{tag} {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, detail


def seeded(tag):
    return np.random.default_rng(sum(map(ord, tag)) * 7919)


def test_ac01_normalization_anchor():
    lines, ok = [], True
    for dims in [(2,), (3,), (4,), (2, 2), (2, 3)]:
        space = SpaceDescriptor(dims)
        t0 = time.perf_counter()
        ev = k_mc(zeros(space), EvalConfig(samples=100_000, seed=1))
        dt = time.perf_counter() - t0
        d = space.total_dim
        dev = np.abs(ev.gradient.entries - np.eye(d) / d)
        within = bool(np.all(dev <= 4 * ev.gradient_entry_std_error))
        good = ev.k_value == 1.0 and within and dt < 5
        ok &= good
        lines.append(f"{dims}: K={ev.k_value!r} grad<=4sigma={within} {dt:.2f}s")
    report("AC1", ok, "; ".join(lines))


def test_ac02_closed_form_vs_mc():
    rng = seeded("AC2")
    t0 = time.perf_counter()
    hits = 0
    for i in range(100):
        n = 2 + i % 2
        x = random_hermitian(rng, n, norm=rng.uniform(0, 2))
        ev = k_mc(x, EvalConfig(samples=100_000, seed=1000 + i))
        hits += abs(ev.k_value - k_closed_single(x).k_value) <= 4 * ev.k_std_error
    dt = time.perf_counter() - t0
    report("AC2", hits >= 95 and dt < 60, f"{hits}/100 within 4 stderr, {dt:.1f}s")


def test_ac03_gradient_fd():
    rng = seeded("AC3")
    closed = max(grad_fd_check(random_hermitian(rng, 3), 1e-5) for _ in range(20))
    mc = max(
        grad_fd_check(random_hermitian(rng, 4, space=B22), 1e-5,
                      EvalConfig(samples=100_000, seed=300 + i), closed_form=False)
        for i in range(10)
    )
    report("AC3", closed <= 1e-6 and mc <= 1e-4,
           f"closed-form max dev {closed:.2e} (<=1e-6), MC/CRN max dev {mc:.2e} (<=1e-4)")


def test_ac04_samplewise_identities():
    rng = seeded("AC4")
    worst_trace = worst_shift = 0.0
    for dims in [(3,), (2, 2)]:
        space = SpaceDescriptor(dims)
        samples = SampleSet(dims, 44, 100_000)
        for _ in range(3):
            x = random_hermitian(rng, space.total_dim, space=space)
            ev = k_on_samples(x, samples)
            worst_trace = max(worst_trace, abs(ev.gradient.trace() - ev.k_value))
            for c in (-1.0, 0.5, 2.0):
                shifted = k_on_samples(x.shift(c), samples).k_value
                worst_shift = max(worst_shift, abs(shifted / (math.exp(c) * ev.k_value) - 1))
    report("AC4", worst_trace <= 1e-12 and worst_shift <= 1e-12,
           f"|tr grad K - K| max {worst_trace:.1e}, shift rel. dev max {worst_shift:.1e}")


def test_ac05_factorization():
    rng = seeded("AC5")
    i2 = identity(SpaceDescriptor.single(2))
    worst = 0.0
    for i in range(10):
        a, b = random_hermitian(rng, 2), random_hermitian(rng, 2)
        x = tensor_product(a, i2) + tensor_product(i2, b)
        ev = k_mc(x, EvalConfig(samples=100_000, seed=500 + i))
        truth = k_closed_single(a).k_value * k_closed_single(b).k_value
        worst = max(worst, abs(ev.k_value - truth) / ev.k_std_error)
    report("AC5", worst <= 4, f"10 pairs, worst deviation {worst:.2f} sigma")


def test_ac06_single_round_trip():
    rng = seeded("AC6")
    worst_g = worst_k = slowest = 0.0
    for i in range(20):
        n = (2, 3, 4, 6)[i % 4]
        rho = random_density(rng, n, floor=0.05)
        t0 = time.perf_counter()
        r = solve_single(rho)
        slowest = max(slowest, time.perf_counter() - t0)
        ev = k_closed_single(r.x)
        worst_g = max(worst_g, np.linalg.norm(ev.gradient.entries - rho.entries))
        worst_k = max(worst_k, abs(ev.k_value - 1))
    report("AC6", worst_g <= 1e-8 and worst_k <= 1e-8 and slowest < 1,
           f"|grad K - rho| max {worst_g:.1e}, |K-1| max {worst_k:.1e}, slowest {slowest:.3f}s")


def test_ac07_saa_round_trip():
    rng = seeded("AC7")
    cfg = EvalConfig(samples=10_000, seed=77)
    samples = SampleSet.for_config(B22, cfg)
    t0 = time.perf_counter()
    errors = []
    while len(errors) < 20:
        x = random_hermitian(rng, 4, norm=rng.uniform(0.1, 3.0), space=B22)
        x = x.shift(-math.log(k_on_samples(x, samples).k_value))
        if x.frobenius() > 3:
            continue
        rho = density_matrix(k_on_samples(x, samples).gradient.entries, B22)
        r = solve_bipartite_saa(rho, cfg)
        errors.append(np.linalg.norm(r.x.entries - x.entries) if r.converged else math.inf)
    dt = time.perf_counter() - t0
    good = sum(e <= 1e-6 for e in errors)
    report("AC7", good == 20 and dt < 120,
           f"{good}/20 recovered, worst |X-X*| {max(errors):.1e}, {dt:.1f}s")


def test_ac08_werner():
    cfg = EvalConfig(samples=100_000, seed=8)
    grid = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0]
    verdicts = {}
    ppt_dev = 0.0
    for p in grid:
        v = classify_robust_separability(werner_state(p), cfg)
        verdicts[p] = v.verdict
        ppt_dev = max(ppt_dev, abs(v.ppt_min_eigenvalue - min((1 + p) / 4, (1 - 3 * p) / 4)))
    sep = all(verdicts[p] == "robustly_separable" for p in (0.0, 0.1, 0.2))
    ent = all(verdicts[p] == "not_robustly_separable" for p in (0.5, 0.8, 1.0))
    inconcl = [p for p in grid if verdicts[p] == "inconclusive"]
    decided = [verdicts[p] for p in grid if verdicts[p] != "inconclusive"]
    switches = sum(a != b for a, b in zip(decided, decided[1:]))
    ok = sep and ent and ppt_dev <= 1e-12 and switches == 1 and set(inconcl) <= {0.3, 0.4}
    short = {"robustly_separable": "RS", "not_robustly_separable": "NRS", "inconclusive": "INC"}
    table = " ".join(f"{p}:{short[verdicts[p]]}" for p in grid)
    report("AC8", ok, f"{table}; ppt dev {ppt_dev:.1e}; switches {switches}")


def test_ac09_smeared_exactness():
    rng = seeded("AC9")
    worst = 0.0
    for n in (2, 3):
        for L in (1, 2, 3):
            for _ in range(5):
                rho = random_density(rng, n, floor=1 / (n * (L + 1)) + 1e-3)
                e = smeared_from_density(rho, L)
                worst = max(worst, float(np.max(np.abs(barycenter(e).mean.entries - rho.entries))))
    bad = 0
    for n in (2, 3):
        for p0 in (0.02, 0.05, 0.1, 0.12, 1 / 7):
            p = np.full(n, (1 - p0) / (n - 1))
            p[0] = p0
            brute = next(L for L in range(1, 1000) if p0 > 1 / (n * (L + 1)))
            if brute == 1:
                continue
            try:
                smeared_from_density(np.diag(p), brute - 1)
                bad += 1
            except BoundViolation as exc:
                bad += exc.min_L != brute
    report("AC9", worst <= 1e-12 and bad == 0,
           f"barycenter max entry dev {worst:.1e}; bound violations wrong: {bad}")


def test_ac10_entropy_identity():
    rng = seeded("AC10")
    worst = 0.0
    for space in (SpaceDescriptor.single(2), B22):
        for i in range(5):
            x = random_hermitian(rng, space.total_dim, norm=1.5, space=space)
            cfg = EvalConfig(samples=100_000, seed=1000 + i)
            if space.is_bipartite:
                x = x.shift(-math.log(k_mc(x, cfg).k_value))
                kev = k_mc(x, cfg)
                se_ref = kev.wg_std_error
            else:
                x = x.shift(-math.log(k_closed_single(x).k_value))
                kev = k_closed_single(x)
                se_ref = 0.0
            est = differential_entropy(ContinuousEnsemble.exponential(x),
                                       EvalConfig(samples=100_000, seed=2000 + i), kev)
            target = -hs_inner(x, kev.gradient)
            worst = max(worst, abs(est.value - target) / math.hypot(est.std_error, se_ref))
    report("AC10", worst <= 4, f"10 surface points, worst deviation {worst:.2f} sigma")


def test_ac11_covariance():
    rng = seeded("AC11")
    worst_k = worst_x = 0.0
    for _ in range(10):
        x = random_hermitian(rng, 3, norm=2.0)
        u = random_unitary(rng, 3)
        y = validate_hermitian(u @ x.entries @ u.conj().T)
        worst_k = max(worst_k, abs(k_closed_single(y).k_value - k_closed_single(x).k_value))
        rho = random_density(rng, 3, floor=0.05)
        sx = solve_single(rho).x.entries
        sy = solve_single(density_matrix(u @ rho.entries @ u.conj().T)).x.entries
        worst_x = max(worst_x, float(np.max(np.abs(u @ sx @ u.conj().T - sy))))
    report("AC11", worst_k <= 1e-10 and worst_x <= 1e-8,
           f"|K(UXU*) - K(X)| max {worst_k:.1e}, solve covariance max {worst_x:.1e}")


def _cli(*argv):
    res = subprocess.run([sys.executable, "-m", "contens", *argv],
                         capture_output=True, check=False)
    return res.returncode, re.sub(rb',\s*"wall_time_ms":\s*[-+0-9.eE]+', b"", res.stdout)


def test_ac12_cli_determinism(tmp_path):
    x = tmp_path / "x.json"
    write_operator(random_hermitian(seeded("AC12"), 4, space=B22), x)
    w = tmp_path / "w.json"
    write_operator(werner_state(0.2).op, w)
    commands = [
        ["k-eval", "--operator", str(x), "--seed", "5", "--samples", "60000"],
        ["classify", "--density", str(w), "--seed", "5", "--samples", "20000"],
        ["sweep-werner", "--grid", "0,0.2,0.5", "--seed", "5", "--samples", "20000"],
    ]
    same = True
    for cmd in commands:
        runs = [_cli(*cmd, "--workers", wk) for wk in ("1", "1", "4")]
        same &= all(r == runs[0] for r in runs) and runs[0][0] in (0, 4, 5) and bool(runs[0][1])
    report("AC12", same, f"{len(commands)} commands x 3 runs (workers 1, 1, 4) byte-identical")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-s", "-q"]))
