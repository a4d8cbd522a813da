"""Acceptance suite: every release criterion at its stated tolerance.

Each test prints one [ACCEPTANCE] pass/fail line (visible with -s or -rP).
The desk-scale dataset and classifier are session-scoped fixtures shared by
the learning, faithfulness, and synthesis criteria. Wall-clock limits from
the criteria are asserted alongside the functional checks.
"""

import time

import numpy as np
import pytest

import helpers
from patternsynth import session as sess
from patternsynth.learner import (
    LearnerConfig,
    evaluate_classifier,
    extract_features,
    learn_ruleset,
    ruleset_to_tssl,
    split_dataset,
)
from patternsynth.optimizer import (
    FitnessSpec,
    SearchBox,
    SwarmConfig,
    pso_maximize,
    synthesize,
)
from patternsynth.quadtree import DIRECTIONS, build_qts, build_quadtree
from patternsynth.rdsim import (
    FixedSampler,
    NotConverged,
    SteadyStateConfig,
    SystemParams,
    UniformDiffusionSampler,
    generate_dataset,
    initial_state,
    simulate_to_steady,
)
from patternsynth.tssl import check, parse, soundness_audit, value
from test_session import make_datasets, tiny_config

R_LOCAL = (1.0, -12.0, -1.0, 16.0)
D_SETS = {"large-spots": (5.6, 24.5), "fine-patches": (0.2, 20.0),
          "small-spots": (1.4, 5.3)}

CHECKER_TEXT = "A * X A * X ( A {SW,NE} X (m >= 1) & A {NW,SE} X (m <= 0) )"
RELAXED_TEXT = "A * X A * X ( A {SW,NE} X (m >= 0.9) & A {NW,SE} X (m <= 0.1) )"


def report(name: str, ok: bool, detail: str = "") -> None:
    print(f"[ACCEPTANCE] {name}: {'PASS' if ok else 'FAIL'}"
          + (f" — {detail}" if detail else ""))
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="session")
def desk_dataset():
    params = SystemParams(K=32, N=2, D=D_SETS["large-spots"], R=R_LOCAL)
    cfg = SteadyStateConfig()
    pos = generate_dataset(FixedSampler(params), 200, cfg, rng_seed=101)
    neg = generate_dataset(UniformDiffusionSampler(params, [(0, 30), (0, 30)]),
                           200, cfg, rng_seed=202)
    items = [(o, "+") for o in pos] + [(o, "-") for o in neg]
    train, test = split_dataset(items, seed=7)
    return train, test


@pytest.fixture(scope="session")
def desk_classifier(desk_dataset):
    train, _ = desk_dataset
    cfg = LearnerConfig(max_depth=4, seed=0)
    ruleset = learn_ruleset(train, cfg)
    return ruleset, ruleset_to_tssl(ruleset), cfg


def test_soundness_audit_ten_thousand_pairs():
    rng = np.random.default_rng(1)
    t0 = time.time()
    violations = 0
    for _ in range(10_000):
        qts = helpers.random_qts(rng, int(rng.integers(1, 65)), channels=2)
        phi = helpers.random_formula(rng, int(rng.integers(0, 5)), channels=2)
        violations += soundness_audit(qts, phi).violation
    elapsed = time.time() - t0
    report("semantics-soundness-audit", violations == 0 and elapsed < 120,
           f"10000 pairs, {violations} violations, {elapsed:.1f}s")


def test_brute_force_semantic_equivalence():
    rng = np.random.default_rng(2)
    t0 = time.time()
    mismatches = 0
    for _ in range(500):
        qts = helpers.random_qts(rng, int(rng.integers(1, 9)))
        phi = helpers.random_formula(rng, int(rng.integers(0, 4)))
        if check(qts, phi) != helpers.naive_check(qts, phi):
            mismatches += 1
        if value(qts, phi) != helpers.naive_value(qts, phi):
            mismatches += 1
    elapsed = time.time() - t0
    report("brute-force-equivalence", mismatches == 0 and elapsed < 60,
           f"500 formulas, {mismatches} mismatches, {elapsed:.1f}s")


def test_quadtree_invariants_thousand_observations():
    rng = np.random.default_rng(3)
    t0 = time.time()
    worst_gap = 0.0
    for i in range(1000):
        side = int((8, 16, 32, 64)[i % 4])
        k = side.bit_length() - 1
        qt = build_quadtree(rng.uniform(0, 1, (side, side)))
        assert qt.vertex_count() <= sum(4 ** j for j in range(k + 1))
        for v in qt.vertices():
            if not v.is_leaf:
                avg = sum(v.children[d].means[0] for d in DIRECTIONS) / 4.0
                worst_gap = max(worst_gap, abs(v.means[0] - avg))
        qts = build_qts(qt)
        qts.validate()  # label partition and non-blocking
        assert any(qts.has_self_loop(s) for s in range(qts.n_states))
    elapsed = time.time() - t0
    report("quadtree-invariants", worst_gap < 1e-9 and elapsed < 60,
           f"1000 observations, worst parent-mean gap {worst_gap:.2e}, {elapsed:.1f}s")


def test_checkerboard_golden():
    from patternsynth.quadtree import qts_from_observation

    board = np.fromfunction(lambda i, j: (i + j) % 2, (8, 8))
    qts = qts_from_observation(board)
    phi = parse(CHECKER_TEXT)
    ok = check(qts, phi)
    ok &= not check(qts_from_observation(np.zeros((8, 8))), phi)
    ok &= not check(qts_from_observation(np.ones((8, 8))), phi)
    relaxed = value(qts, parse(RELAXED_TEXT))
    ok &= abs(relaxed - 0.0015625) <= 1e-12
    exact_val = value(qts, phi)
    ok &= exact_val == 0.0 and soundness_audit(qts, phi).verdict == "indeterminate"
    report("checkerboard-golden", ok,
           f"relaxed value {relaxed:.10f}, exact value {exact_val}")


def test_simulator_sanity_at_reference_parameters():
    t0 = time.time()
    cfg = SteadyStateConfig()  # default eps, T
    all_ok = True
    details = []
    for name, D in D_SETS.items():
        params = SystemParams(K=32, N=2, D=D, R=R_LOCAL)
        steady = 0
        textured = 0
        for seed in range(20):
            result = simulate_to_steady(params, initial_state(params, seed),
                                        cfg, rng_seed=seed)
            if isinstance(result, NotConverged):
                continue
            steady += 1
            textured += float(result.values.std()) > 0.05
        all_ok &= steady >= 18 and textured == steady
        details.append(f"{name} {steady}/20 steady, {textured} textured")
    elapsed = time.time() - t0
    all_ok &= elapsed < 300
    report("simulator-sanity", all_ok, "; ".join(details) + f", {elapsed:.0f}s")


def test_desk_scale_learning(desk_dataset, desk_classifier):
    t0 = time.time()
    _, test_items = desk_dataset
    ruleset, phi, cfg = desk_classifier
    metrics = evaluate_classifier(phi, test_items, quant_levels=cfg.quant_levels,
                                  n_rules=len(ruleset))
    elapsed = time.time() - t0
    report("desk-scale-learning",
           metrics.accuracy >= 0.85 and elapsed < 900,
           f"held-out accuracy {metrics.accuracy:.4f} "
           f"({len(ruleset.rules)} rules), eval {elapsed:.0f}s")


def test_translation_faithfulness(desk_dataset, desk_classifier):
    from patternsynth.quadtree import qts_from_observation

    _, test_items = desk_dataset
    ruleset, phi, cfg = desk_classifier
    agree = 0
    for obs, _ in test_items:
        qts = qts_from_observation(obs, cfg.quant_levels)
        fv = extract_features(qts, cfg.max_depth, cfg.quant_levels)
        agree += (ruleset.decide(fv) == "+") == check(qts, phi)
    report("translation-faithfulness", agree == len(test_items),
           f"{agree}/{len(test_items)} decisions agree")


def test_pso_benchmark():
    t0 = time.time()
    c = np.array([11.0, 23.0])
    box = SearchBox(((0.0, 30.0), (0.0, 30.0)))
    hits = 0
    monotone = 0
    for seed in range(20):
        res = pso_maximize(lambda x: -float(np.sum((x - c) ** 2)), box,
                           SwarmConfig(swarm_size=20, iterations=100, seed=seed))
        hits += np.linalg.norm(res.best_point - c) < 1e-3
        monotone += all(b >= a for a, b in zip(res.history, res.history[1:]))
    elapsed = time.time() - t0
    report("pso-benchmark", hits >= 19 and monotone == 20 and elapsed < 10,
           f"{hits}/20 within 1e-3, {monotone}/20 monotone, {elapsed:.1f}s")


def test_end_to_end_synthesis(desk_classifier):
    t0 = time.time()
    _, phi, lcfg = desk_classifier
    params = SystemParams(K=32, N=2, D=D_SETS["large-spots"], R=R_LOCAL)
    steady = SteadyStateConfig()
    spec = FitnessSpec(template=params, free_params=("D1", "D2"), formula=phi,
                       x0_seeds=(0, 1), steady=steady,
                       quant_levels=lcfg.quant_levels)
    result = synthesize(spec, SearchBox(((0.0, 30.0), (0.0, 30.0))),
                        SwarmConfig(swarm_size=10, iterations=15, seed=0,
                                    stop_when_positive=True))
    certified = result.gamma >= 0
    if certified:
        from patternsynth.quadtree import qts_from_observation

        p_star = spec.instantiate(result.p_star)
        for seed in spec.x0_seeds:
            out = simulate_to_steady(p_star, initial_state(p_star, seed),
                                     steady, rng_seed=seed)
            certified &= not isinstance(out, NotConverged)
            if certified:
                qts = qts_from_observation(out.values, lcfg.quant_levels)
                certified &= check(qts, phi)
    elapsed = time.time() - t0
    report("end-to-end-synthesis",
           result.gamma >= 0 and certified and elapsed < 3600,
           f"gamma {result.gamma:+.6f} at D={np.round(result.p_star, 2).tolist()}, "
           f"certified={certified}, {elapsed:.0f}s")


def test_session_loop(tmp_path):
    # reject path: negative set grows by the candidate count and retraining runs
    pos, neg = make_datasets(tmp_path, np.random.default_rng(0))
    session = sess.start_session(pos, neg, tiny_config(formula_override="m >= 0.2"),
                                 tmp_path / "a")
    states = [session.state]
    sess.advance(session)
    states.append(session.state)
    sess.advance(session)
    states.append(session.state)
    ok = states == [sess.LEARNING, sess.OPTIMIZING, sess.AWAITING_REVIEW]
    n_before = sess.negative_count(session)
    n_candidates = len(sess.candidates_of(session)["candidates"])
    sess.decide(session, "reject")
    ok &= session.state == sess.LEARNING and session.iteration == 2
    ok &= sess.negative_count(session) == n_before + n_candidates
    sess.run_until_review(session)
    ok &= (session.iter_dir() / "formula.tssl").exists()
    ok &= session.state == sess.AWAITING_REVIEW

    # kill-and-resume: a fresh load sees the last persisted state, resumes
    reloaded = sess.load_session(tmp_path / "a", session.id)
    ok &= reloaded.state == sess.AWAITING_REVIEW
    sess.decide(reloaded, "approve")
    ok &= sess.load_session(tmp_path / "a", session.id).state == sess.DONE

    # negative valuation path: contradictory formula forces failed
    session2 = sess.start_session(
        pos, neg, tiny_config(formula_override="(m >= 1) & (m <= 0)"), tmp_path / "b")
    sess.run_until_review(session2)
    ok &= session2.state == sess.FAILED
    gamma = sess.result_of(session2)["gamma"]
    ok &= gamma < 0
    report("session-loop", ok,
           f"reject grew negatives by {n_candidates}, "
           f"failed path gamma {gamma:+.3f}")
