import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from peerplace.cost import PeeringGame
from peerplace.dynamics import (
    Chain,
    RunConfig,
    RunTrace,
    Schedule,
    UniformStream,
    acceptance_probability,
    accepted_proposals,
    epsilon,
    run,
    run_unperturbed,
    stationary_stats,
    step,
)
from peerplace.routing import PeeringSet
from peerplace.stability import check_pairwise, enumerate_game
from peerplace.topology import all_pairs_distances, generate_ba, generate_regular

SMALL = Schedule(0.5, 200, 5e-3)


class Scripted:
    """Uniform stream replaying fixed values (index draws map u -> floor(u * k))."""

    def __init__(self, values):
        self.values = list(values)

    def __call__(self):
        return self.values.pop(0)

    def index(self, k):
        return min(int(self() * k), k - 1)


class TestEpsilon:
    def test_default_schedule(self):
        s = Schedule()
        assert epsilon(0, s) == 0.5
        assert epsilon(9999, s) == 0.5
        assert epsilon(10000, s) == 0.5
        assert epsilon(20000, s) == pytest.approx(0.5 / math.e, rel=1e-12)
        assert epsilon(20000, s) == pytest.approx(0.183940, abs=1e-6)

    @given(st.integers(0, 200_000), st.integers(0, 1000))
    def test_non_increasing(self, t, dt):
        assert epsilon(t + dt) <= epsilon(t)

    def test_validation(self):
        for kw in ({"eps0": 0}, {"eps0": 0.6}, {"t0": -1}, {"rate": 0}):
            with pytest.raises(ValueError):
                Schedule(**kw)
        with pytest.raises(ValueError):
            RunConfig(Schedule(t0=100), t_max=100)
        with pytest.raises(ValueError):
            RunConfig(SMALL, t_max=1000, sample_every=0)


def test_uniform_stream_reproducible():
    a, b = UniformStream(5, block=3), UniformStream(5)
    assert [a() for _ in range(10)] == [b() for _ in range(10)]
    assert 0 <= UniformStream(1).index(7) < 7


class TestStep:
    def test_empty_deletion_round_is_noop(self, path3):
        game = PeeringGame.build(path3, 0.5, 1)
        P, ev = step(game, PeeringSet(), 0, SMALL, Scripted([0.9]))
        assert P == PeeringSet() and ev.kind == "noop"

    def test_unperturbed_removal_of_dominated_link(self, path3):
        game = PeeringGame.build(path3, 0.5, 1)
        sched = Schedule(0.5, 0, 1e6)  # epsilon underflows to 0 past t0
        assert epsilon(10, sched) == 0.0
        P = PeeringSet([(0, 0), (2, 2)])
        # deletion round, pick index 1 -> (2, 2), inversion draws irrelevant at eps = 0
        new, ev = step(game, P, 10, sched, Scripted([0.9, 0.75, 0.5, 0.5]))
        assert ev.kind == "remove" and ev.link == (2, 2) and ev.accepted
        assert new == PeeringSet([(0, 0)])

    def test_link_cost_regime_rejects_additions(self, path3):
        game = PeeringGame.build(path3, 0, 1)
        P = PeeringSet([(1, 1)])
        for k in range(9):
            if k == 4:
                continue
            u = (k + 0.5) / 9
            new, ev = step(game, P, 0, SMALL, Scripted([0.1, u, 0.9, 0.9]))
            assert ev.kind == "add" and not ev.accepted and new == P

    def test_addition_drawn_from_absent_links(self, path3):
        game = PeeringGame.build(path3, 1, 1)
        everything = PeeringSet((a, b) for a in range(3) for b in range(3) if (a, b) != (2, 1))
        chain = Chain(game, everything.links)
        ev = chain.step(0, 0.0, UniformStream(3))
        assert ev.kind in ("noop", "remove") or ev.link == (2, 1)
        full = Chain(game, [(a, b) for a in range(3) for b in range(3)])
        ev = full.step(0, 0.0, Scripted([0.1]))
        assert ev.kind == "noop"

    def test_inversion_frequencies_match_acceptance_probability(self, path3):
        game = PeeringGame.build(path3, Fraction(1, 2), 1)
        P = PeeringSet([(0, 0), (2, 2)])
        eps = 0.3
        rng = np.random.default_rng(0)
        for link in [(1, 1), (2, 2)]:
            trials, hits = 4000, 0
            for _ in range(trials):
                chain = Chain(game, P.links)
                if link in P:
                    k = P.links.index(link)
                    script = [0.9, (k + 0.5) / len(P), rng.random(), rng.random()]
                else:
                    script = [0.1, (link[0] * 3 + link[1] + 0.5) / 9, rng.random(), rng.random()]
                hits += chain.step(0, eps, Scripted(script)).accepted
            p = acceptance_probability(game, P, link, eps)
            assert abs(hits / trials - p) < 4 * math.sqrt(p * (1 - p) / trials)

    @pytest.mark.parametrize("alpha", [0, Fraction(1, 2), 1])
    def test_every_transition_reachable_with_noise(self, path3, alpha):
        game = PeeringGame.build(path3, alpha, 1)
        for mask in range(0, 512, 7):
            P = PeeringSet.from_mask(mask, 3)
            for link in game.links:
                assert acceptance_probability(game, P, link, 1e-3) > 0


class TestRun:
    def test_deterministic(self, path3):
        game = PeeringGame.build(path3, 0.5, 1)
        cfg = RunConfig(SMALL, 2000, 50, seed=9)
        a, b = run(game, cfg), run(game, cfg)
        assert a.to_csv() == b.to_csv()
        assert a.final_P == b.final_P
        assert run(game, RunConfig(SMALL, 2000, 50, seed=10)).to_csv() != a.to_csv()

    def test_trace_shape(self, path3):
        game = PeeringGame.build(path3, 0.5, 1)
        tr = run(game, RunConfig(SMALL, 1010, 100, seed=1))
        times = [s[0] for s in tr.samples]
        assert times == [0, *range(100, 1001, 100), 1010]
        assert tr.samples[-1][1] == len(tr.final_P) and tr.final_t == 1010
        assert tr.to_csv().splitlines()[0] == "t,np,cost_a,cost_b"

    def test_initial_state(self, path3):
        game = PeeringGame.build(path3, 0.5, 1)
        tr = run(game, RunConfig(SMALL, 300, 100, initial=((1, 1), (0, 2))))
        assert tr.samples[0][1] == 2

    @pytest.mark.parametrize("alpha,beta", [(0, 1), (Fraction(1, 2), 0), (1, 1)])
    def test_unperturbed_moves_strictly_improve(self, cycle4, alpha, beta):
        game = PeeringGame.build(cycle4, alpha, beta)
        chain = Chain(game, [(0, 0), (1, 3), (2, 2)])
        uniform = UniformStream(4)
        for t in range(400):
            before = chain.peering_set()
            s0 = game.state(before)
            ev = chain.step(t, 0.0, uniform)
            if not ev.accepted:
                assert chain.peering_set() == before
                continue
            ga, gb = game.improves(s0, chain.state)
            assert ga or gb
            if ev.kind == "add":
                assert ga and gb
            assert max(game.costs(chain.state)) < 1e6

    def test_ba_unilateral_run_ends_with_one_link(self):
        d = all_pairs_distances(generate_ba(20, 2, 1))
        game = PeeringGame.build(d, 0.5, 0)
        tr = run(game, RunConfig(Schedule(0.5, 1000, 1e-3), 10000, 500, seed=2))
        assert len(tr.final_P) == 1


class TestAbsorption:
    @pytest.mark.parametrize("alpha", [0, Fraction(1, 4), Fraction(3, 4), 1])
    def test_terminal_networks_are_pairwise_stable(self, path3, alpha):
        game = PeeringGame.build(path3, alpha, 1)
        rng = np.random.default_rng(7)
        for seed in range(5):
            P0 = PeeringSet.from_mask(int(rng.integers(512)), 3)
            P, _ = run_unperturbed(game, P0, seed)
            assert check_pairwise(game, P).stable

    def test_stable_networks_are_fixed_points(self, path3):
        for alpha in (0, Fraction(1, 2), 1):
            game = PeeringGame.build(path3, alpha, 0)
            stable = {P.mask(3) for P in enumerate_game(game).stable}
            for mask in range(512):
                P = PeeringSet.from_mask(mask, 3)
                assert (not accepted_proposals(game, P)) == (mask in stable)


class TestStationaryStats:
    def _trace(self, values, start=0):
        return RunTrace([(start + 10 * k, v, 0.1 * v, 0.2 * v) for k, v in enumerate(values)], PeeringSet(), 0, 0)

    def test_constant_trace(self):
        s = stationary_stats([self._trace([1] * 10)], (-1, 1000))
        assert (s.mean_np, s.std_np, s.n_samples) == (1, 0, 10)

    def test_pooled_mean(self):
        s = stationary_stats([self._trace([1] * 5), self._trace([3] * 5)], (-1, 1000))
        assert s.mean_np == 2

    def test_window_is_open_interval(self):
        s = stationary_stats([self._trace([1, 2, 3, 4])], (0, 30))
        assert s.n_samples == 2 and s.mean_np == 2.5

    def test_histogram(self):
        s = stationary_stats([self._trace([1, 1, 2])], (-1, 1000), bin_width=0.05)
        assert sum(c for _, c in s.hist_ca.bins) == 3
        assert [c for _, c in s.hist_ca.bins] == [2, 1]
        assert s.hist_ca.bins[0][0] == pytest.approx(0.1)

    def test_errors(self):
        with pytest.raises(ValueError):
            stationary_stats([], (0, 1))
        with pytest.raises(ValueError):
            stationary_stats([self._trace([1])], (100, 200))
