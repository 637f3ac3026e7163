"""Acceptance suite: one test per criterion, printing a pass/fail line each.

Run with `pytest tests/test_acceptance.py -v -s`. The desk-scale digits
model and dataset are built once per session (see conftest).
"""

import json
import time

import numpy as np
import pytest

import maskadv as ma
from maskadv.cli import main

from helpers import (affine_closest_linf_point, finite_difference_gradient,
                     grid_subproblem_oracle, near_relu_boundary,
                     random_affine_net, random_conv_net, random_dense_net)


def announce(num, description, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] criterion {num}: {description}" + (f"  ({detail})" if detail else ""))
    assert ok, f"criterion {num}: {description} {detail}"


def test_criterion_1_gradient_oracle():
    started = time.perf_counter()
    rng = np.random.default_rng(1001)
    worst = 0.0
    makers = [(random_dense_net, "relu"), (random_dense_net, "sigmoid"),
              (random_conv_net, "relu"), (random_conv_net, "sigmoid")]
    for idx in range(50):
        maker, activation = makers[idx % len(makers)]
        model = maker(rng, activation=activation)
        for _ in range(5):
            x = rng.uniform(0.05, 0.95, model.input_shape)
            while activation == "relu" and near_relu_boundary(model, x):
                x = rng.uniform(0.05, 0.95, model.input_shape)
            k = int(rng.integers(model.num_classes))
            grad = ma.input_gradient(model, x, k)
            fd = finite_difference_gradient(model, x, k)
            scale = max(np.max(np.abs(fd)), 1e-12)
            worst = max(worst, float(np.max(np.abs(grad - fd)) / scale))
    elapsed = time.perf_counter() - started
    announce(1, "input gradients match central finite differences",
             worst < 1e-4 and elapsed < 60,
             f"max rel err {worst:.2e}, {elapsed:.1f}s")


def test_criterion_2_affine_deepfool_exactness():
    started = time.perf_counter()
    rng = np.random.default_rng(1002)
    worst = 0.0
    for _ in range(20):
        model = random_affine_net(rng, in_dim=int(rng.integers(4, 10)),
                                  classes=int(rng.integers(3, 7)))
        x0 = rng.uniform(-1, 1, model.input_shape)
        y0 = ma.forward(model, x0).predicted_label
        _, expected = affine_closest_linf_point(model, x0)
        # one masked iteration with an unconstrained mask and overshoot 0
        _, delta = ma.deepfool_step(model, x0, y0)
        box = ma.feasible_box(x0, ma.uniform_mask(x0.shape, 1e6),
                              model.input_range)
        landed = ma.clip(x0 + delta, box)
        worst = max(worst, float(np.max(np.abs(landed - expected))))
    elapsed = time.perf_counter() - started
    announce(2, "one masked-DeepFool iteration lands on the affine closed form",
             worst < 1e-6 and elapsed < 10,
             f"max deviation {worst:.2e}, {elapsed:.1f}s")


def test_criterion_3_subproblem_oracle():
    started = time.perf_counter()
    rng = np.random.default_rng(1003)
    worst_gap = 0.0
    for i in range(200):
        dims = 2 if i % 2 == 0 else 3
        x0 = rng.uniform(0, 1, dims)
        x_cur = rng.uniform(0, 1, dims)
        b = rng.normal(0, 1, dims)
        box = ma.FeasibleBox(lower=np.zeros(dims), upper=np.ones(dims))
        r = float(rng.uniform(0.05, 1.0))
        # pick c from an interior feasible point so the equality is reachable
        probe = rng.uniform(box.lower - x_cur, box.upper - x_cur)
        if probe @ probe > r:
            probe *= np.sqrt(r / (probe @ probe)) * rng.uniform(0.3, 0.9)
        c = float(b @ probe)
        d = ma.solve_linf_subproblem(x0, x_cur, b, c, box, r)
        assert d @ d <= r + 1e-9
        assert np.all(x_cur + d >= box.lower - 1e-9)
        assert np.all(x_cur + d <= box.upper + 1e-9)
        assert abs(b @ d - c) <= 1e-6 * max(1.0, abs(c))
        step = 1e-3 if dims == 2 else 1e-2
        oracle = grid_subproblem_oracle(x0, x_cur, b, c, box, r, step=step,
                                        refinements=2)
        assert oracle is not None
        got = float(np.max(np.abs(x0 - (x_cur + d))))
        worst_gap = max(worst_gap, got - oracle)
    elapsed = time.perf_counter() - started
    announce(3, "subproblem solver matches the grid oracle",
             worst_gap <= 2e-3 and elapsed < 120,
             f"worst objective gap {worst_gap:.2e}, {elapsed:.1f}s")


@pytest.mark.slow
def test_criterion_4_pipeline_dominance(desk_model, desk_dataset,
                                        correct_indices):
    started = time.perf_counter()
    n = 100
    df_linf, full_linf, successes, feasible = [], [], 0, True
    for i in correct_indices[:n]:
        x, y = desk_dataset[i]
        res = ma.run_attack(ma.AttackRequest(
            model=desk_model, image=x,
            constraint=ma.ConstraintSpec(kind="uniform", eps=1.0),
            true_label=y))
        x_df, trace, _ = ma.deepfool_attack(desk_model, x,
                                            ma.uniform_mask(x.shape, 1.0),
                                            true_label=y)
        successes += res.success and trace.success
        if res.success:
            full_linf.append(res.norms["linf"])
            feasible &= bool(np.all(np.abs(res.perturbation) <= 1.0 + 1e-9))
            feasible &= 0.0 <= res.adversarial.min() and res.adversarial.max() <= 1.0
        if trace.success:
            df_linf.append(float(np.max(np.abs(x_df - x))))
    elapsed = time.perf_counter() - started
    asr = successes / n
    mean_df, mean_full = float(np.mean(df_linf)), float(np.mean(full_linf))
    announce(4, "unconstrained combined attack: 100% success, smaller mean "
                "max-norm than the preliminary phase, feasible outputs",
             asr == 1.0 and mean_full < mean_df and feasible and elapsed < 600,
             f"ASR {asr:.2f}, mean linf {mean_full:.5f} vs deepfool "
             f"{mean_df:.5f}, {elapsed:.0f}s")


@pytest.mark.slow
def test_criterion_5_imperceptibility_direction(desk_model, desk_dataset,
                                                correct_indices):
    started = time.perf_counter()
    n = 50
    ssim_plain, ssim_adaptive = [], []
    asr = {"plain": 0, "nonadaptive": 0, "adaptive": 0}
    for i in correct_indices[:n]:
        x, y = desk_dataset[i]
        plain = ma.run_attack(ma.AttackRequest(
            model=desk_model, image=x,
            constraint=ma.ConstraintSpec(kind="uniform", eps=1.0), true_label=y))
        nonadap = ma.run_attack(ma.AttackRequest(
            model=desk_model, image=x,
            constraint=ma.ConstraintSpec(kind="imperceptible"), true_label=y))
        adap = ma.run_attack(ma.AttackRequest(
            model=desk_model, image=x,
            constraint=ma.ConstraintSpec(kind="imperceptible", adaptive=True),
            true_label=y))
        asr["plain"] += plain.success
        asr["nonadaptive"] += nonadap.success
        asr["adaptive"] += adap.success
        if plain.success:
            ssim_plain.append(plain.ssim)
        if adap.success:
            ssim_adaptive.append(adap.ssim)
    elapsed = time.perf_counter() - started
    mean_plain = float(np.mean(ssim_plain))
    mean_adaptive = float(np.mean(ssim_adaptive))
    announce(5, "adaptive imperceptible attack: higher mean SSIM than the "
                "unconstrained attack, success rate at least the non-adaptive one",
             mean_adaptive > mean_plain
             and asr["adaptive"] >= asr["nonadaptive"] and elapsed < 900,
             f"ssim {mean_adaptive:.4f} vs {mean_plain:.4f}, ASR "
             f"{asr['adaptive']}/{n} vs {asr['nonadaptive']}/{n}, {elapsed:.0f}s")


def test_criterion_6_integrated_gradient_properties():
    started = time.perf_counter()
    rng = np.random.default_rng(1006)
    # linear exactness
    w = rng.normal(0, 1, (4, 8))
    linear = ma.NetworkModel(layers=(ma.Dense(weight=w, bias=np.zeros(4)),),
                             input_shape=(8,), input_range=(0.0, 1.0),
                             num_classes=4)
    x = rng.uniform(0, 1, 8)
    exact = True
    for m in (1, 7, 64):
        ig = ma.integrated_gradients(linear, x, baseline=np.zeros(8), k=1, m=m)
        exact &= bool(np.max(np.abs(ig - w[1] * x)) < 1e-9)
    # completeness on 10 random small nets at the default target class;
    # resample degenerate instances: the relative measure needs a score
    # span clearly away from zero
    worst = 0.0
    done = 0
    while done < 10:
        model = random_dense_net(rng, depth=int(rng.integers(1, 4)))
        xi = rng.uniform(0.1, 0.9, model.input_shape)
        baseline = np.zeros(model.input_shape)
        k = ma.forward(model, xi).predicted_label
        span = (ma.forward(model, xi).values[k]
                - ma.forward(model, baseline).values[k])
        if abs(span) < 0.5:
            continue
        ig = ma.integrated_gradients(model, xi, baseline, k, m=256)
        worst = max(worst, abs(float(ig.sum()) - span) / abs(span))
        done += 1
    elapsed = time.perf_counter() - started
    announce(6, "integrated gradients: linear exactness and completeness",
             exact and worst <= 0.02 and elapsed < 60,
             f"worst completeness error {worst:.4f}, {elapsed:.1f}s")


@pytest.mark.slow
def test_criterion_7_region_search(desk_model, desk_dataset, correct_indices):
    started = time.perf_counter()
    rng = np.random.default_rng(1007)
    # exactness against the exhaustive double loop
    exact = True
    for _ in range(100):
        h, w = int(rng.integers(2, 6)), int(rng.integers(2, 6))
        values = rng.uniform(0, 1, (int(rng.integers(6, 14)),
                                    int(rng.integers(6, 14))))
        imp = ma.ImportanceMap(importance=values, beta=np.ones_like(values))
        got = ma.best_rectangle(imp, h, w)
        best = None
        for r in range(values.shape[0] - h + 1):
            for c in range(values.shape[1] - w + 1):
                s = values[r:r + h, c:c + w].sum()
                if best is None or s > best[0] + 1e-12:
                    best = (s, r, c)
        exact &= (got.row, got.col) == (best[1], best[2])

    # top-k refinement against the sliding-window minimum on desk images
    light_bb = ma.BBConfig(steps=20, binary_search_steps=8)
    images = correct_indices[:10]
    dominance = True
    within3 = 0
    for i in images:
        x, y = desk_dataset[i]
        imp = ma.smoothgrad(desk_model, x, seed=0)
        candidates = ma.topk_rectangles(imp, 10, 10, 20)
        radii = [ma.estimate_robust_radius(desk_model, x,
                                           c.region_mask(28, 28),
                                           bb_cfg=light_bb, true_label=y)
                 for c in candidates]
        best_by_k = {k: min(radii[:k]) for k in (1, 5, 20)}
        dominance &= best_by_k[20] <= best_by_k[5] <= best_by_k[1]
        r_min = min(
            ma.estimate_robust_radius(
                desk_model, x,
                ma.RegionScore(r, c, 10, 10, 0.0).region_mask(28, 28),
                bb_cfg=light_bb, true_label=y)
            for r in range(19) for c in range(19))
        within3 += best_by_k[1] <= 3.0 * r_min
    elapsed = time.perf_counter() - started
    announce(7, "region search exact; top-k refinement non-increasing; "
                "importance pick within 3x of the sliding-window minimum",
             exact and dominance and within3 >= 7 and elapsed < 1800,
             f"within-3x on {within3}/10 images, {elapsed:.0f}s")


def test_criterion_8_metrics():
    started = time.perf_counter()
    rng = np.random.default_rng(1008)
    ssim_ok = all(ma.ssim(img, img) == 1.0
                  for img in (rng.uniform(0, 1, (9, 9, 1)),
                              rng.uniform(0, 1, (5, 5, 3))))
    from ciede2000_reference import REFERENCE_PAIRS
    ciede_ok = all(
        abs(float(ma.delta_e_ciede2000(np.array(p[:3]), np.array(p[3:6])))
            - p[6]) < 1e-4 for p in REFERENCE_PAIRS)
    ordering_ok = True
    for _ in range(1000):
        d = rng.normal(0, 1, int(rng.integers(1, 40)))
        _, l1, l2, linf = ma.lp_norms(d)
        ordering_ok &= linf <= l2 + 1e-12 <= l1 + 2e-12
    elapsed = time.perf_counter() - started
    announce(8, "self-SSIM is 1, CIEDE2000 matches the reference pairs, "
                "norms are ordered",
             ssim_ok and ciede_ok and ordering_ok and elapsed < 30,
             f"{elapsed:.1f}s")


def test_criterion_9_report_determinism(deskdata, tmp_path, correct_indices):
    started = time.perf_counter()
    args = ["--path_model", deskdata["model"], "--dataset", deskdata["dataset"],
            "--index", str(correct_indices[0]), "--ratio", "0.3",
            "--eps", "0.9", "--seed", "17"]
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        code = main(args + ["--output", str(out)])
        assert code in (0, 2)
        outs.append(sorted(out.glob("*/report.json"))[-1].read_bytes())
    elapsed = time.perf_counter() - started
    announce(9, "identical seeded invocations produce byte-identical reports",
             outs[0] == outs[1] and elapsed < 60, f"{elapsed:.1f}s")
