"""Event-driven flow: split scheduling, trajectories, periodicity."""

import math
from fractions import Fraction

import pytest

from util import exact_trajectory_prefix

from veertrack.errors import DegeneracyError
from veertrack.fixtures import (
    GOLD_DILATATION,
    GOLD_PERIOD_T,
    gold,
    pillow,
    t2,
)
from veertrack.delaunay import greedy_delaunay, other_diagonal
from veertrack.flow import detect_periodicity, next_split, run_flow, thick_fraction
from veertrack.surface import validate


class TestNextSplit:
    def test_torus_first_event_exact(self):
        ev = next_split(t2())
        assert ev.edge == "e1"
        assert ev.threshold == Fraction(23, 10)
        assert ev.direction == "L"
        assert ev.t == pytest.approx(0.5 * math.log(2.3))

    def test_threshold_is_where_the_partner_height_ties(self):
        # the split fires when the flowed height of the partner diagonal
        # equals the flowed width of the splitting edge
        s = t2()
        ev = next_split(s)
        diag, flippable = other_diagonal(s, ev.edge)
        assert flippable
        assert ev.threshold == abs(diag[1]) / abs(s.periods[ev.edge].w)

    def test_event_is_deterministic(self):
        a, b = next_split(t2()), next_split(t2())
        assert (a.edge, a.threshold, a.direction) == (b.edge, b.threshold, b.direction)

    def test_structural_tie_raises(self):
        # the parallelogram sphere has a direction-preserving isometry pairing
        # distinct edges with equal periods, so its flow always ties
        reduced, _ = greedy_delaunay(pillow())
        with pytest.raises(DegeneracyError):
            run_flow(reduced, 2.0)


class TestRunFlow:
    def test_event_times_are_increasing(self):
        traj = run_flow(gold(), 3.0)
        times = traj.times()
        assert times == sorted(times)
        assert all(0 <= t <= 3.0 + 1e-9 for t in times)

    def test_states_stay_valid_and_delaunay(self):
        traj = run_flow(gold(), 2.0, verify="debug")
        for s in traj.states():
            assert validate(s).passed

    def test_exact_prefix_matches_float_run(self):
        events, _ = exact_trajectory_prefix(t2(), max_events=5)
        traj = run_flow(t2(), 0.5)
        assert events and traj.events
        for exact_ev, float_ev in zip(events, traj.events):
            assert exact_ev.edge == float_ev.edge
            assert exact_ev.direction == float_ev.direction
            assert float(exact_ev.threshold) == pytest.approx(
                float(float_ev.threshold), rel=1e-12
            )

    def test_max_events_cap(self):
        traj = run_flow(gold(), 50.0, max_events=7)
        assert len(traj.events) == 7


class TestThickness:
    def test_fraction_in_unit_interval(self):
        traj = run_flow(gold(), 3.0)
        stats = thick_fraction(traj, eps=0.05)
        assert 0.0 <= stats.theta <= 1.0
        assert stats.thick_time <= 3.0 + 1e-9

    def test_tiny_eps_makes_everything_thick(self):
        traj = run_flow(gold(), 2.0)
        stats = thick_fraction(traj, eps=1e-9)
        assert stats.theta == pytest.approx(1.0)


class TestPeriodicity:
    def test_golden_torus_period(self):
        traj = run_flow(gold(), 4 * GOLD_PERIOD_T)
        match = detect_periodicity(traj)
        assert match is not None
        assert match.lam_w == pytest.approx(GOLD_DILATATION, abs=1e-9)
        assert match.period_t == pytest.approx(GOLD_PERIOD_T, abs=1e-9)
        assert len(match.word) == 2
        assert {ev.direction for ev in match.word} == {"L", "R"}

    def test_relabel_is_a_signed_bijection(self):
        traj = run_flow(gold(), 4 * GOLD_PERIOD_T)
        match = detect_periodicity(traj)
        images = [e2 for e2, _ in match.relabel.values()]
        assert sorted(images) == sorted(match.relabel.keys())
        assert all(sg in (1, -1) for _, sg in match.relabel.values())

    def test_aperiodic_prefix_reports_nothing(self):
        traj = run_flow(gold(), 0.8 * GOLD_PERIOD_T)
        assert detect_periodicity(traj) is None
