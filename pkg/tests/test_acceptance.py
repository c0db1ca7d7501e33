"""Acceptance suite: one test per release criterion.

Each test pins the tolerance it is allowed to use and prints a summary
line, so `pytest -v` reads as a one-line-per-criterion checklist.
"""

import math
import time

import numpy as np
import pytest

from reachguide.clock import TickScheduler, VirtualClock, scan_ticks
from reachguide.clients import LatencyLog, MockNoise, latency_report
from reachguide.guidance import (Band, GuidanceConfig, compute_cue, distance_band,
                                 haptic_schedule, throttle)
from reachguide.intent import Intent, IntentKind
from reachguide.kernels import render_depth_kernel
from reachguide.perception import Pose, TargetAnchor, to_world, unproject
from reachguide.session import EventKind, SessionEvent, SessionState, StateKind, step
from reachguide.sim.agent import AgentParams
from reachguide.sim.render import camera_ray_dirs
from reachguide.sim.scene import CAM_BASE, build_shelf_scene, randomize_positions
from reachguide.sim.trial import TrialConfig, run_trial
from reachguide.stats.inference import (TrialMatrix, friedman, paired_t,
                                        rm_anova_oneway, wilcoxon_signed_rank,
                                        wilson_ci)
from reachguide.stats.special import f_sf

from .conftest import DATA_DIR, random_pose
from .oracles import (brute_force_depth, friedman_permutation_p,
                      session_oracle_step, wilcoxon_exact_oracle)
from .test_session import FIND, _random_event


def report(name, detail):
    print(f"ACCEPTANCE {name}: PASS ({detail})")


def test_criterion_1_wilson_ci_reproduction(intr):
    lo, hi = wilson_ci(190, 200, 0.95)
    assert abs(lo - 0.911) <= 0.005
    assert abs(hi - 0.974) <= 0.005
    lo2, hi2 = wilson_ci(103, 108, 0.95)
    assert abs(lo2 - 0.896) <= 0.005
    assert abs(hi2 - 0.980) <= 0.005
    report("1 wilson-ci", f"[{lo:.4f},{hi:.4f}] and [{lo2:.4f},{hi2:.4f}]")


def test_criterion_2_session_fsm():
    start = time.monotonic()
    # BFS reachability of all six states from Idle.
    seen = set()
    frontier = [SessionState.idle()]
    events = [
        SessionEvent(EventKind.SYSTEM_READY),
        SessionEvent(EventKind.UTTERANCE_CAPTURED, text="find the mug"),
        SessionEvent(EventKind.INTENT_RESOLVED, intent=FIND),
        SessionEvent(EventKind.INTENT_RESOLVED, intent=Intent(IntentKind.CHAT, text="hi")),
        SessionEvent(EventKind.SPEECH_DONE),
        SessionEvent(EventKind.DETECTION_TICK),
        SessionEvent(EventKind.DETECTION_RESULT, detection=object()),
        SessionEvent(EventKind.ANCHOR_ESTABLISHED, anchor=object()),
        SessionEvent(EventKind.TARGET_REACHED),
        SessionEvent(EventKind.SHAKE),
        SessionEvent(EventKind.CLIENT_ERROR, error_kind="http"),
        SessionEvent(EventKind.TIMEOUT),
    ]
    while frontier:
        state = frontier.pop()
        key = (state.kind, state.query, state.pending_query)
        if key in seen:
            continue
        seen.add(key)
        for event in events:
            nxt, _ = step(state, event)
            frontier.append(nxt)
    assert {k for k, _, _ in seen} == set(StateKind)

    # Shake returns Listening from every non-Idle state discovered.
    for kind, query, pending in seen:
        if kind is StateKind.IDLE:
            continue
        state = SessionState(kind, query=query, pending_query=pending)
        nxt, _ = step(state, SessionEvent(EventKind.SHAKE))
        assert nxt.kind is StateKind.LISTENING

    # 1e4 random event streams re-folded against the independent oracle.
    rng = np.random.default_rng(2024)
    divergences = 0
    for _ in range(10_000):
        state = SessionState.idle()
        oracle_state = ("Idle", "", "")
        for _ in range(8):
            event, oracle_event = _random_event(rng)
            state, actions = step(state, event)
            oracle_state, oracle_actions = session_oracle_step(oracle_state, oracle_event)
            if (state.kind.value, state.query, state.pending_query) != oracle_state:
                divergences += 1
            if [a.kind.value for a in actions] != oracle_actions:
                divergences += 1
    assert divergences == 0
    elapsed = time.monotonic() - start
    assert elapsed < 5.0
    report("2 session-fsm", f"6 states reachable, 10000 streams, 0 divergences, {elapsed:.1f}s")


def test_criterion_3_geometry_roundtrips(intr):
    start = time.monotonic()
    rng = np.random.default_rng(77)
    worst = 0.0
    poses = [random_pose(rng) for _ in range(100)]
    for i in range(100_000):
        pose = poses[i % 100]
        u = rng.uniform(0, intr.width)
        v = rng.uniform(0, intr.height)
        d = rng.uniform(0.05, 5.0)
        cam = unproject((u, v), d, intr)
        back = pose.inverse_apply(to_world(cam, pose))
        u2 = intr.fx * back[0] / back[2] + intr.cx
        v2 = intr.fy * back[1] / back[2] + intr.cy
        err = max(abs(u2 - u) * d / intr.fx, abs(v2 - v) * d / intr.fy,
                  float(np.max(np.abs(back - cam))))
        worst = max(worst, err)
    assert worst < 1e-9

    # Rigid-motion equivariance of compute_cue.
    worst_cue = 0.0
    for i in range(10_000):
        pose = poses[i % 100]
        point_cam = np.array([rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5),
                              rng.uniform(0.2, 4.0)])
        base = compute_cue(TargetAnchor(point_cam, 0.0), Pose.identity())
        moved = compute_cue(TargetAnchor(pose.apply(point_cam), 0.0), pose)
        assert moved.direction is base.direction
        worst_cue = max(worst_cue,
                        abs(moved.azimuth_deg - base.azimuth_deg),
                        abs(moved.elevation_deg - base.elevation_deg),
                        abs(moved.distance_m - base.distance_m))
    assert worst_cue < 1e-9
    elapsed = time.monotonic() - start
    assert elapsed < 10.0
    report("3 geometry", f"1e5 round-trips worst {worst:.2e} m, "
                         f"1e4 equivariance worst {worst_cue:.2e}, {elapsed:.1f}s")


def test_criterion_4_depth_renderer_oracle(intr):
    start = time.monotonic()
    rng = np.random.default_rng(88)
    for scene_i in range(20):
        n = int(rng.integers(3, 9))
        centers = rng.uniform(-1.0, 1.0, size=(n, 3))
        half = rng.uniform(0.02, 0.35, size=(n, 3))
        lo, hi = centers - half, centers + half
        pose = Pose(CAM_BASE.copy(), rng.uniform(-0.3, 0.3, size=3) + [0.0, 0.0, 2.0])
        dirs = camera_ray_dirs(intr, pose)
        depth, valid = render_depth_kernel(pose.translation, dirs, lo, hi, 5.0)
        ref_depth, ref_valid = brute_force_depth(pose.translation, dirs, lo, hi, 5.0)
        assert np.array_equal(valid, ref_valid)
        assert np.array_equal(depth, ref_depth)  # exact equality required
    elapsed = time.monotonic() - start
    assert elapsed < 10.0
    report("4 depth-renderer", f"20 scenes 64x48 exact match, {elapsed:.1f}s")


def test_criterion_5_statistics_oracles():
    start = time.monotonic()
    rng = np.random.default_rng(99)

    # Exact Wilcoxon equals full sign enumeration at every n <= 12.
    for n in range(1, 13):
        for _ in range(3):
            d = np.round(rng.normal(size=n) + 0.3, 2)
            d = d[d != 0]
            if len(d) == 0:
                continue
            w, p = wilcoxon_signed_rank(d, np.zeros_like(d))
            w_ref, p_ref = wilcoxon_exact_oracle(d)
            assert w == w_ref and abs(p - p_ref) < 1e-12

    # Friedman chi-square approximation within 0.02 of permutation
    # enumeration on effect-bearing 5x3 grids.
    worst_friedman = 0.0
    for seed in (0, 1, 2, 4, 5, 6, 7, 8, 9, 10):
        g_rng = np.random.default_rng(seed)
        values = g_rng.normal(scale=0.6, size=(5, 3)) + np.array([0.0, 1.0, 2.0])
        matrix = TrialMatrix((0, 1, 2), (0, 1, 2, 3, 4), values)
        _, p = friedman(matrix)
        _, p_ref = friedman_permutation_p(values)
        worst_friedman = max(worst_friedman, abs(p - p_ref))
    assert worst_friedman <= 0.02

    # Paired-t p within 1e-6 of a quadrature oracle.
    scipy_integrate = pytest.importorskip("scipy.integrate")
    worst_t = 0.0
    for _ in range(20):
        n = int(rng.integers(3, 25))
        a = rng.normal(size=n)
        b = a + rng.normal(scale=0.5, size=n) + 0.3
        t, p = paired_t(a, b)
        df = n - 1

        def pdf(x):
            c = math.gamma((df + 1) / 2) / (math.sqrt(df * math.pi) * math.gamma(df / 2))
            return c * (1 + x * x / df) ** (-(df + 1) / 2)

        tail, _ = scipy_integrate.quad(pdf, abs(t), np.inf)
        worst_t = max(worst_t, abs(p - 2 * tail))
    assert worst_t < 1e-6

    # RM-ANOVA F within 1e-9 of hand-expanded sums of squares.
    toy = TrialMatrix((0, 1), (0, 1, 2), np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]))
    f, p = rm_anova_oneway(toy)
    assert abs(f - 12.0) < 1e-9
    assert abs(p - f_sf(12.0, 1, 2)) < 1e-9
    worst_f = 0.0
    for _ in range(10):
        n, k = int(rng.integers(3, 8)), int(rng.integers(2, 5))
        v = rng.normal(size=(n, k))
        f, _ = rm_anova_oneway(TrialMatrix(tuple(range(k)), tuple(range(n)), v))
        grand = v.mean()
        ss_total = sum((v[i, j] - grand) ** 2 for i in range(n) for j in range(k))
        ss_subj = sum(k * (v[i].mean() - grand) ** 2 for i in range(n))
        ss_treat = sum(n * (v[:, j].mean() - grand) ** 2 for j in range(k))
        ss_err = ss_total - ss_subj - ss_treat
        f_ref = (ss_treat / (k - 1)) / (ss_err / ((k - 1) * (n - 1)))
        worst_f = max(worst_f, abs(f - f_ref))
    assert worst_f < 1e-9
    elapsed = time.monotonic() - start
    assert elapsed < 60.0
    report("5 statistics-oracles",
           f"wilcoxon exact, friedman worst {worst_friedman:.4f}, "
           f"t worst {worst_t:.1e}, anova worst {worst_f:.1e}, {elapsed:.1f}s")


def test_criterion_6_end_to_end_simulation():
    start = time.monotonic()
    base = build_shelf_scene()
    cfg = TrialConfig()
    lines_a = []
    for seed in range(100):
        scene = randomize_positions(base, seed)
        rec = run_trial(scene, AgentParams(seed=seed), cfg, seed)
        assert rec.success, f"seed {seed} failed"
        assert rec.undesired_touches == 0
        assert rec.total_time_s == rec.search_time_s + rec.guidance_time_s  # exact
        lines_a.append(rec.to_json_line())

    # Same seeds reproduce byte-identical logs.
    lines_b = [run_trial(randomize_positions(base, seed), AgentParams(seed=seed),
                         cfg, seed).to_json_line()
               for seed in range(100)]
    assert "\n".join(lines_a).encode() == "\n".join(lines_b).encode()

    # Total detector blindness: every trial times out.
    blind = TrialConfig(noise=MockNoise(miss_prob=1.0), timeout_s=30.0)
    for seed in range(10):
        rec = run_trial(randomize_positions(base, seed), AgentParams(seed=seed),
                        blind, seed)
        assert rec.timed_out and not rec.success
    elapsed = time.monotonic() - start
    assert elapsed < 60.0
    report("6 end-to-end", f"100/100 success, 0 touches, byte-identical, "
                           f"10/10 blind timeouts, {elapsed:.1f}s")


def test_criterion_7_detection_cadence():
    interval = 1.0
    horizon = 37.3
    ticks = scan_ticks(horizon, interval)
    assert len(ticks) == math.floor(horizon / interval)
    assert all(t == k * interval for k, t in enumerate(ticks, start=1))

    clock = VirtualClock(0.05)
    sched = TickScheduler(interval)
    fired = []
    while clock.now() < horizon:
        t = sched.poll(clock.advance())
        if t is not None:
            fired.append(t)
    assert fired == ticks  # exact multiples, exact count
    report("7 cadence", f"{len(ticks)} ticks at exact multiples of {interval}s")


def test_criterion_8_latency_fixture():
    log = LatencyLog.read_csv(f"{DATA_DIR}/latency_fixture.csv")
    mean, p50, p99, count, error_rate = latency_report(log)
    assert count == 100
    assert round(mean, 3) == 0.706
    assert round(p99, 3) == 0.797
    report("8 latency-fixture", f"mean {mean:.3f}s p99 {p99:.3f}s over {count} calls")


def test_criterion_9_guidance_bands_and_throttle():
    cfg = GuidanceConfig()
    distances = np.linspace(3.0, 0.0, 30_001)
    bands = [distance_band(float(d), cfg) for d in distances]
    rates = [haptic_schedule(b, cfg).pulse_rate_hz for b in bands]
    assert all(a <= b for a, b in zip(rates, rates[1:]))  # non-decreasing
    transitions = [(a, b) for a, b in zip(bands, bands[1:]) if a is not b]
    assert transitions == [(Band.FAR, Band.MID), (Band.MID, Band.NEAR),
                           (Band.NEAR, Band.ARRIVED)]
    # Transition locations match the configured thresholds.
    for (a, b), threshold in zip(transitions, (cfg.far_m, cfg.near_m, cfg.arrival_m)):
        i = bands.index(b)
        assert abs(float(distances[i]) - threshold) < 2e-4

    # Throttle: identical cues are suppressed inside min_gap_s only.
    anchor = TargetAnchor(np.array([0.0, 0.0, 0.5]), 0.0)
    cue = compute_cue(anchor, Pose.identity(), cfg)
    assert throttle(None, (0.0, cue), cfg.min_gap_s) is cue
    assert throttle((0.0, cue), (cfg.min_gap_s - 0.05, cue), cfg.min_gap_s) is None
    assert throttle((0.0, cue), (cfg.min_gap_s, cue), cfg.min_gap_s) is cue
    report("9 guidance-bands", "monotone rates, 3 exact transitions, min-gap enforced")
