import math

import numpy as np
import pytest

from kinematics.min_time import analytic_plan_2d, min_time_1d
from kinematics.primitives import Primitive1D, Primitive2D, extreme_points, integrate_primitive
from kinematics.trajectory import Trajectory, TrajectoryPiece, read_samples_csv, write_samples_csv
from world.models import Scenario


def _switch_time_search(p0, pf, v0, v_max, a_max, points=401, rounds=12):
    """
    Shortest accelerate-coast-brake time found by scanning the coast velocity.

    Each coast velocity fixes both acceleration phases; the coast length then
    follows from the target position. The scan is refined around its best
    point and made finer when no velocity on it reaches the target.
    """
    d = pf - p0
    lo, hi = -v_max, v_max
    best, best_v = math.inf, None
    n = points
    for _ in range(rounds):
        v1 = np.linspace(lo, hi, n)
        if best_v is not None:
            v1 = np.append(v1, best_v)
        t1 = np.abs(v1 - v0) / a_max
        t3 = np.abs(v1) / a_max
        moved = 0.5 * (v0 + v1) * t1 + 0.5 * v1 * t3
        with np.errstate(divide="ignore", invalid="ignore"):
            t2 = (d - moved) / v1
            total = np.where((v1 != 0.0) & (t2 >= 0.0), t1 + t2 + t3, math.inf)
        k = int(np.argmin(total))
        if not math.isfinite(total[k]):
            n *= 10
            continue
        step = (hi - lo) / (n - 1)
        best, best_v = float(total[k]), float(v1[k])
        lo, hi = max(-v_max, best_v - step), min(v_max, best_v + step)
        n = points
    return best


def _stepped_end_state(prim, steps):
    """Integrate ``prim`` with fixed explicit steps aligned to its phases."""
    p, v = prim.p_start, prim.v_start
    accelerations = (prim.alpha_start * prim.a_max, 0.0, prim.alpha_end * prim.a_max)
    for tau, a in zip(prim.tau, accelerations):
        n = max(1, int(round(steps * tau / prim.duration)))
        dt = tau / n
        dv = np.full(n, a * dt)
        v_k = v + np.concatenate(([0.0], np.cumsum(dv)[:-1]))
        p += float(np.sum(v_k * dt + 0.5 * a * dt * dt))
        v += float(np.sum(dv))
    return p, v


def _random_primitive(rng, duration=None):
    tau = rng.uniform(0.0, 1.5, size=3)
    if duration is not None:
        tau *= duration / tau.sum()
    return Primitive1D(
        alpha_start=float(rng.choice((-1.0, 1.0))),
        alpha_end=float(rng.choice((-1.0, 1.0))),
        p_start=float(rng.uniform(-3.0, 3.0)),
        v_start=float(rng.uniform(-2.0, 2.0)),
        tau=tuple(float(t) for t in tau),
        a_max=float(rng.uniform(1.0, 6.0)),
    )


class TestMinTime1D:
    def test_saturated_profile(self):
        prim = min_time_1d(0.0, 1.0, 0.0, 1.0, 2.0)
        assert prim.tau == pytest.approx((0.5, 0.5, 0.5))
        assert prim.duration == pytest.approx(1.5)
        assert (prim.alpha_start, prim.alpha_end) == (1.0, -1.0)

    def test_triangular_profile(self):
        prim = min_time_1d(0.0, 0.25, 0.0, 1.0, 2.0)
        assert prim.tau[1] == 0.0
        assert prim.duration == pytest.approx(2.0 * math.sqrt(0.25 / 2.0))

    def test_negative_direction(self):
        prim = min_time_1d(1.0, 0.0, 0.0, 1.0, 2.0)
        assert (prim.alpha_start, prim.alpha_end) == (-1.0, 1.0)
        assert prim.end_state() == pytest.approx((0.0, 0.0))

    def test_overshoot_and_return(self):
        prim = min_time_1d(0.0, 0.0, 1.0, 1.0, 2.0)
        assert prim.alpha_start == -1.0
        assert prim.duration == pytest.approx((1.0 + math.sqrt(2.0)) / 2.0)
        assert prim.end_state() == pytest.approx((0.0, 0.0), abs=1e-12)

    def test_braking_exactly_to_target(self):
        prim = min_time_1d(0.0, 0.25, 1.0, 1.0, 2.0)
        assert prim.duration == pytest.approx(0.5)
        assert prim.end_state() == pytest.approx((0.25, 0.0), abs=1e-12)

    def test_zero_motion(self):
        assert min_time_1d(0.3, 0.3, 0.0, 1.0, 2.0).duration == 0.0

    @pytest.mark.parametrize("seed", range(5))
    def test_reaches_target_at_rest(self, seed):
        rng = np.random.default_rng(seed)
        v_max, a_max = rng.uniform(0.5, 2.0), rng.uniform(2.0, 6.0)
        p0, pf = rng.uniform(-3.0, 3.0, size=2)
        v0 = rng.uniform(-v_max, v_max)
        prim = min_time_1d(p0, pf, v0, v_max, a_max)
        assert prim.end_state() == pytest.approx((pf, 0.0), abs=1e-9)
        _, v, _ = prim.evaluate(np.linspace(0.0, prim.duration, 200))
        assert np.max(np.abs(v)) <= v_max + 1e-9

    def test_matches_switch_time_search(self):
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            v_max, a_max = rng.uniform(0.5, 2.0), rng.uniform(1.0, 6.0)
            p0, pf = rng.uniform(-3.0, 3.0, size=2)
            v0 = rng.uniform(-v_max, v_max)
            prim = min_time_1d(p0, pf, v0, v_max, a_max)
            p_end, v_end = prim.end_state()
            assert abs(p_end - pf) < 1e-9 and abs(v_end) < 1e-9
            assert abs(_switch_time_search(p0, pf, v0, v_max, a_max) - prim.duration) <= 1e-3
            _, v, _ = prim.evaluate(np.linspace(0.0, prim.duration, 50))
            assert np.max(np.abs(v)) <= v_max + 1e-12

    @pytest.mark.parametrize("p0, pf, v0", [
        (0.0, 3.0, 0.0),
        (1.0, -2.0, 0.5),
        (0.0, 0.1, 0.9),
        (2.0, 2.0, 0.7),
        (-1.0, 4.0, -0.8),
    ])
    def test_reflection(self, p0, pf, v0):
        prim = min_time_1d(p0, pf, v0, 1.0, 2.0)
        mirrored = min_time_1d(-p0, -pf, -v0, 1.0, 2.0)
        assert mirrored.duration == prim.duration
        assert mirrored.tau == prim.tau
        assert (mirrored.alpha_start, mirrored.alpha_end) == (-prim.alpha_start, -prim.alpha_end)
        t = np.linspace(0.0, prim.duration, 101)
        for original, reflected in zip(prim.evaluate(t), mirrored.evaluate(t)):
            assert np.allclose(reflected, -original, atol=1e-12)


class TestPrimitive:
    def test_closed_form_matches_sampling(self):
        prim = Primitive1D(1.0, -1.0, 0.2, -0.3, (0.4, 0.3, 0.6), 2.0)
        p, v, _ = prim.evaluate(np.array([prim.duration]))
        assert prim.end_state() == pytest.approx((p[0], v[0]))

    def test_split_preserves_motion(self):
        prim = Primitive1D(1.0, -1.0, 0.0, 0.0, (0.5, 0.5, 0.5), 2.0)
        head, tail = prim.split(0.7)
        assert head.duration + tail.duration == pytest.approx(prim.duration)
        assert tail.end_state() == pytest.approx(prim.end_state())
        assert tail.p_start == pytest.approx(prim.state_at(0.7)[0])

    def test_vertex_in_first_phase(self):
        prim = Primitive1D(1.0, -1.0, 0.0, -1.0, (1.0, 0.0, 0.0), 2.0)
        points = extreme_points(prim)
        assert len(points) == 1
        assert points[0].phase == 0
        assert points[0].time == pytest.approx(0.5)
        assert points[0].position == pytest.approx(-0.25)

    def test_stationary_coast(self):
        prim = Primitive1D(1.0, 1.0, 0.0, 0.0, (0.0, 1.0, 0.5), 2.0)
        points = extreme_points(prim)
        assert len(points) == 1 and points[0].stationary

    def test_monotone_profile_has_no_extrema(self):
        assert extreme_points(min_time_1d(0.0, 1.0, 0.0, 1.0, 2.0)) == []

    def test_integrate_primitive(self):
        prim = Primitive2D(
            min_time_1d(0.0, 1.0, 0.0, 1.0, 2.0), min_time_1d(0.0, -1.0, 0.0, 1.0, 2.0)
        )
        p, v = integrate_primitive(prim)
        assert p == pytest.approx((1.0, -1.0))
        assert v == pytest.approx((0.0, 0.0), abs=1e-12)

    def test_integrate_primitive_matches_stepping(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            x = _random_primitive(rng)
            y = _random_primitive(rng, duration=x.duration)
            p, v = integrate_primitive(Primitive2D(x, y))
            for axis, prim in enumerate((x, y)):
                p_step, v_step = _stepped_end_state(prim, 100_000)
                assert p[axis] == pytest.approx(p_step, rel=1e-9, abs=1e-9)
                assert v[axis] == pytest.approx(v_step, rel=1e-9, abs=1e-9)


class TestAnalyticPlan:
    def test_equal_axis_times_give_one_piece(self, free_scenario):
        trajectory = analytic_plan_2d(free_scenario)
        assert len(trajectory.pieces) == 1
        assert trajectory.t_move == pytest.approx(2.5)
        p, v = trajectory.final_state()
        assert p == pytest.approx((2.5, 2.5))
        assert v == pytest.approx((0.0, 0.0), abs=1e-12)

    def test_faster_axis_holds(self, free_grid, vehicle):
        scenario = Scenario(grid=free_grid, vehicle=vehicle, p0=(0.5, 0.5), pn=(2.5, 1.5))
        trajectory = analytic_plan_2d(scenario)
        assert len(trajectory.pieces) == 2
        assert trajectory.t_move == pytest.approx(2.5)
        assert trajectory.continuity_errors() == pytest.approx((0.0, 0.0), abs=1e-12)
        p, v = trajectory.final_state()
        assert p == pytest.approx((2.5, 1.5))
        assert v == pytest.approx((0.0, 0.0), abs=1e-12)


class TestSampling:
    def test_sample_times_end_at_t_move(self, free_scenario):
        trajectory = analytic_plan_2d(free_scenario)
        times = trajectory.sample_times(100.0)
        assert times[0] == 0.0
        assert times[-1] == pytest.approx(trajectory.t_move)
        assert len(times) == 251

    def test_non_positive_rate(self, free_scenario):
        with pytest.raises(ValueError):
            analytic_plan_2d(free_scenario).sample_times(0.0)

    def test_csv_file(self, free_scenario, tmp_path):
        samples = analytic_plan_2d(free_scenario).sample(10.0)
        path = str(tmp_path / "trajectory.csv")
        write_samples_csv(path, samples)
        with open(path, encoding="utf-8") as f:
            assert f.readline().strip() == "t,px,py,vx,vy,ax,ay"
        loaded = read_samples_csv(path)
        assert np.array_equal(loaded.p, samples.p)
        assert np.array_equal(loaded.t, samples.t)

    def test_pieces_export(self):
        prim = Primitive2D(
            min_time_1d(0.0, 1.0, 0.0, 1.0, 2.0), min_time_1d(0.0, 1.0, 0.0, 1.0, 2.0)
        )
        export = Trajectory([TrajectoryPiece(0.0, prim)]).to_pieces_export()
        assert '"start_time": 0.0' in export and '"tau"' in export
