# conflict-sim - traffic-conflict game simulation toolkit

import numpy as np
import pytest

from conflict_sim.base.errors import ProfileError
from conflict_sim.modules.harness import solve_game
from conflict_sim.modules.scenario import expand_sweep, read_config
from conflict_sim.modules.solvers import (
    solve_level0_maxmax,
    solve_qlk_level1,
    solve_spene,
    subgame_gains,
    verify_epsilon_equilibrium,
)
from tests.features.object_manager import ObjectManager
from tests.test_data.data import TestData
from tests.utils.base_class import BaseClass


class TestSolvers(BaseClass):
    """Class for testing the epsilon-equilibrium solver, quantal level-k play and equilibrium verification."""

    @pytest.mark.smoke
    def test_solvers_001(self):
        """Verify equilibrium counting and welfare selection on a coordination game."""
        log = self.get_logger()
        games = ObjectManager().get_games()
        tree = games.matrix_game(TestData().get_solver_data()["coordination"], epsilon=0.0)

        result = solve_spene(tree)
        log.info(f"coordination: counts {result.equilibrium_counts}, values {result.values}")

        assert result.equilibrium_counts["root"] == 2
        assert result.profile.joint_choice("root") == (0, 0)
        assert np.allclose(result.values["root"], [0.5, 0.5])
        assert not result.fallback_used
        assert result.profile.is_pure

        loose = solve_spene(games.matrix_game(TestData().get_solver_data()["coordination"], epsilon=0.5))
        assert loose.equilibrium_counts["root"] == 4
        assert loose.profile.joint_choice("root") == (0, 0)

    @pytest.mark.smoke
    def test_solvers_002(self):
        """Verify that equal-welfare equilibria resolve to the lexicographically first joint action."""
        tree = ObjectManager().get_games().matrix_game(TestData().get_solver_data()["crossing"], epsilon=0.0)
        result = solve_spene(tree)
        assert result.equilibrium_counts["root"] == 2
        assert result.profile.joint_choice("root") == (0, 1)

    @pytest.mark.smoke
    def test_solvers_003(self):
        """Verify the minimal-regret fallback when no pure equilibrium exists."""
        log = self.get_logger()
        games = ObjectManager().get_games()
        pennies = TestData().get_solver_data()["matching_pennies"]

        result = solve_spene(games.matrix_game(pennies, epsilon=0.0))
        log.info(f"matching pennies fallback nodes: {result.fallback_nodes}")
        assert result.fallback_used
        assert result.fallback_nodes == ["root"]
        assert result.equilibrium_counts["root"] == 0
        assert result.profile.joint_choice("root") == (0, 0)

        tolerant = solve_spene(games.matrix_game(pennies, epsilon=1.0))
        assert not tolerant.fallback_used
        assert tolerant.equilibrium_counts["root"] == 4

    @pytest.mark.smoke
    def test_solvers_004(self):
        """Verify that the verifier accepts a solved profile and reports the worst deviation of a corrupted one."""
        games = ObjectManager().get_games()
        tree = games.matrix_game(TestData().get_solver_data()["coordination"], epsilon=0.0)
        result = solve_spene(tree)

        report = verify_epsilon_equilibrium(tree, result.profile, 0.0)
        assert report.ok
        assert report.worst_gain == pytest.approx(0.0)

        corrupted = games.constant_profile(tree, lambda n: 0, lambda n: 1)
        report = verify_epsilon_equilibrium(tree, corrupted, 0.0)
        assert not report.ok
        assert report.worst_gain == pytest.approx(0.5)
        assert (report.node_id, report.agent, report.deviation) == ("root", 1, 0)
        assert np.allclose(subgame_gains(tree, corrupted)["root"], [0.25, 0.5])
        assert "FAILED" in str(report) and "agent 2" in str(report)

        assert verify_epsilon_equilibrium(tree, corrupted, 0.5).ok

    @pytest.mark.smoke
    def test_solvers_005(self):
        """Verify that a fallback profile fails verification by the regret it carries."""
        tree = ObjectManager().get_games().matrix_game(TestData().get_solver_data()["matching_pennies"], epsilon=0.0)
        result = solve_spene(tree)
        report = verify_epsilon_equilibrium(tree, result.profile, 0.0)
        assert not report.ok
        assert report.worst_gain == pytest.approx(1.0)

    @pytest.mark.smoke
    def test_solvers_006(self):
        """Verify that the verifier refuses mixed profiles."""
        games = ObjectManager().get_games()
        tree = games.matrix_game(TestData().get_solver_data()["coordination"])
        profile = games.constant_profile(tree, lambda n: 0)
        profile.set_distribution(0, "root", [0.5, 0.5])
        with pytest.raises(ProfileError):
            verify_epsilon_equilibrium(tree, profile, 0.1)

    @pytest.mark.smoke
    def test_solvers_007(self):
        """Verify subgame-perfect play on a constant two-stage game."""
        tree = ObjectManager().get_games().constant_tree(2, (0.2, 0.4), (1.0, -1.0), epsilon=0.0)
        result = solve_spene(tree)

        assert len(result.equilibrium_counts) == 5
        assert all(count == 4 for count in result.equilibrium_counts.values())
        assert all(choice == (0, 0) for choice in map(result.profile.joint_choice, result.equilibrium_counts))
        assert np.allclose(result.values["root"], [0.275, 0.175])
        assert verify_epsilon_equilibrium(tree, result.profile, 0.0).ok

    @pytest.mark.regression
    def test_solvers_008(self):
        """Verify on random games of up to three stages that every node not flagged as a fallback is epsilon-stable."""
        log = self.get_logger()
        games = ObjectManager().get_games()
        seeds = TestData().get_solver_data()["random_seeds"]
        flagged_games, flagged_nodes, nodes = 0, 0, 0
        for seed in range(seeds):
            tree = games.random_tree(seed, max_stages=3, min_actions=2, max_actions=4, epsilon=0.1)
            result = solve_spene(tree)
            report = verify_epsilon_equilibrium(tree, result.profile, tree.params.epsilon)
            assert report.ok or report.node_id in result.fallback_nodes, f"seed {seed}: {report}"
            for node_id, gains in subgame_gains(tree, result.profile).items():
                if node_id not in result.fallback_nodes:
                    assert gains.max() <= tree.params.epsilon + 1e-9, f"seed {seed}, node {node_id}: {gains}"
            assert set(result.equilibrium_counts) == {n.node_id for n in tree.decision_nodes()}
            flagged_games += result.fallback_used
            flagged_nodes += len(result.fallback_nodes)
            nodes += len(result.equilibrium_counts)
        log.info(
            f"regret fallback in {flagged_games}/{seeds} random games, "
            f"{flagged_nodes}/{nodes} nodes ({flagged_nodes / nodes:.2%})"
        )

    @pytest.mark.smoke
    def test_solvers_009(self):
        """Verify level-0 maxmax choices."""
        games = ObjectManager().get_games()
        coordination = games.matrix_game(TestData().get_solver_data()["coordination"])
        assert solve_level0_maxmax(coordination, 0) == {"root": 0}
        assert solve_level0_maxmax(coordination, 1) == {"root": 0}

        crossing = games.matrix_game(TestData().get_solver_data()["crossing"])
        assert solve_level0_maxmax(crossing, 0) == {"root": 1}
        assert solve_level0_maxmax(crossing, 1) == {"root": 1}

        # all-equal payoffs tie at the lowest index
        flat = games.matrix_game(np.zeros((3, 2, 2)))
        assert solve_level0_maxmax(flat, 0) == {"root": 0}
        assert solve_level0_maxmax(flat, 1) == {"root": 0}

    @pytest.mark.smoke
    def test_solvers_010(self):
        """Verify quantal level-1 expected values and logit probabilities."""
        log = self.get_logger()
        games = ObjectManager().get_games()
        tree = games.matrix_game(TestData().get_solver_data()["coordination"])

        result = solve_qlk_level1(tree)
        log.info(f"level-1 expected values: {result.expected_values}")

        assert result.concept == "qlk"
        assert result.level0 == ({"root": 0}, {"root": 0})
        assert np.allclose(result.expected_values[0]["root"], [0.5, 0.0])
        assert np.allclose(result.profile.distribution(0, "root"), [0.6224593312018546, 0.3775406687981454])
        assert not result.profile.is_pure
        assert result.profile.resolve().joint_choice("root") == (0, 0)

        sharp = solve_qlk_level1(games.matrix_game(TestData().get_solver_data()["coordination"], lambda_=50.0))
        assert sharp.profile.distribution(0, "root")[0] > 0.99

    @pytest.mark.smoke
    def test_solvers_011(self):
        """Verify that level-1 agents both yield against aggressive level-0 beliefs."""
        tree = ObjectManager().get_games().matrix_game(TestData().get_solver_data()["crossing"])
        result = solve_qlk_level1(tree)
        assert np.allclose(result.expected_values[0]["root"], [0.1, -0.5])
        assert np.allclose(result.expected_values[1]["root"], [0.1, -0.5])
        assert result.profile.resolve().joint_choice("root") == (0, 0)

    @pytest.mark.smoke
    def test_solvers_012(self):
        """Verify that sampled quantal play is reproducible for a fixed seed."""
        tree = ObjectManager().get_games().random_tree(7, max_stages=2)
        profile = solve_qlk_level1(tree).profile
        first = profile.resolve(np.random.default_rng(3))
        second = profile.resolve(np.random.default_rng(3))
        assert first.choices[0].keys() == second.choices[0].keys()
        for agent in (0, 1):
            for node_id in first.choices[agent]:
                assert first.choice(agent, node_id) == second.choice(agent, node_id)

    @pytest.mark.regression
    def test_solvers_013(self):
        """Verify a solved pedestrian-vehicle game against its configured epsilon."""
        log = self.get_logger()
        report = self.simulator.verify(0)
        solved = self.simulator.solve(0)
        log.info(f"pedestrian-vehicle game 0: {report}")
        assert report.ok or solved["result"].fallback_used
        assert solved["profile"].is_pure
        assert set(solved["result"].equilibrium_counts) == {n.node_id for n in solved["tree"].decision_nodes()}

    @pytest.mark.regression
    @pytest.mark.parametrize("scenario", ["ped_veh", "veh_veh"])
    def test_solvers_014(self, scenario):
        """Verify sampled games of both built-in sweeps at their configured epsilon and report the fallback rate."""
        log = self.get_logger()
        cfg = read_config(scenario)
        setups = expand_sweep(cfg.scenario, cfg.sweep)
        count = TestData().get_solver_data()["sampled_setups"]
        picks = np.random.default_rng(0).choice(len(setups), count, replace=False)

        flagged = 0
        for index in sorted(int(i) for i in picks):
            result, played, _, tree = solve_game(setups[index], cfg)
            report = verify_epsilon_equilibrium(tree, played, cfg.game.epsilon)
            log.info(f"{setups[index].game_id}: {report}, fallback nodes {result.fallback_nodes}")
            assert report.ok or report.node_id in result.fallback_nodes, f"{setups[index].game_id}: {report}"
            for node_id, gains in subgame_gains(tree, played).items():
                if node_id not in result.fallback_nodes:
                    assert gains.max() <= cfg.game.epsilon + 1e-9, f"{setups[index].game_id}, node {node_id}"
            flagged += result.fallback_used
        log.info(f"{scenario}: fallback in {flagged}/{len(picks)} sampled games, fingerprint {cfg.fingerprint}")

    @pytest.mark.smoke
    def test_solvers_015(self):
        """Verify that quantal probabilities form a distribution over own actions at every node."""
        games = ObjectManager().get_games()
        for seed in range(TestData().get_solver_data()["random_trees"]):
            tree = games.random_tree(seed, max_stages=3, max_actions=4, lambda_=3.0)
            result = solve_qlk_level1(tree)
            for node in tree.decision_nodes():
                for agent in (0, 1):
                    probs = result.profile.distribution(agent, node.node_id)
                    assert len(probs) == node.shape[agent]
                    assert np.all(probs >= 0.0)
                    assert probs.sum() == pytest.approx(1.0), f"seed {seed}, node {node.node_id}, agent {agent}"

    @pytest.mark.smoke
    def test_solvers_016(self):
        """Verify that quantal probabilities rank actions by expected value and that ties share probability."""
        games = ObjectManager().get_games()
        for seed in range(TestData().get_solver_data()["random_trees"]):
            tree = games.random_tree(seed, max_stages=3, max_actions=4, lambda_=5.0)
            result = solve_qlk_level1(tree)
            for agent in (0, 1):
                for node_id, ev in result.expected_values[agent].items():
                    probs = result.profile.distribution(agent, node_id)
                    for a in range(len(ev)):
                        for b in range(len(ev)):
                            if ev[a] > ev[b] + 1e-9:
                                assert probs[a] > probs[b], f"seed {seed}, node {node_id}, agent {agent}"

        # agent 1's first two actions pay the same against every choice of agent 2
        tied = games.matrix_game(
            [[[0.3, 0.1], [0.3, 0.2]], [[0.3, -0.4], [0.3, 0.5]], [[0.6, 0.0], [0.6, 0.1]]], lambda_=2.0
        )
        result = solve_qlk_level1(tied)
        probs = result.profile.distribution(0, "root")
        assert result.expected_values[0]["root"][0] == result.expected_values[0]["root"][1]
        assert probs[0] == pytest.approx(probs[1])
        assert probs[2] > probs[0]
        flat = solve_qlk_level1(games.matrix_game(np.zeros((3, 2, 2))))
        assert np.allclose(flat.profile.distribution(0, "root"), 1 / 3)
        assert np.allclose(flat.profile.distribution(1, "root"), 1 / 2)

    @pytest.mark.smoke
    def test_solvers_017(self):
        """Verify that near-deterministic quantal play follows an exhaustive best response to level-0 beliefs."""
        log = self.get_logger()
        games = ObjectManager().get_games()

        def response_values(node, agent, believed, params, depth=0):
            """Value of every own action when the opponent plays its believed choice at every node below."""
            other = believed[node.node_id]
            values = []
            for a in range(node.shape[agent]):
                i, j = (a, other) if agent == 0 else (other, a)
                child = node.child(i, j)
                if child.is_leaf:
                    below = params.norm * float(child.terminal[agent])
                else:
                    below = float(np.max(response_values(child, agent, believed, params, depth + 1)))
                values.append(params.delta ** (depth + 1) * node.payoffs[i, j, agent] + below)
            return np.array(values)

        checked = 0
        for seed in range(TestData().get_solver_data()["random_trees"]):
            tree = games.random_tree(seed, max_stages=3, max_actions=4, lambda_=100.0)
            result = solve_qlk_level1(tree)
            for agent in (0, 1):
                believed = result.level0[1 - agent]
                assert believed == solve_level0_maxmax(tree, 1 - agent)
                for node in tree.decision_nodes():
                    values = response_values(node, agent, believed, tree.params)
                    assert np.allclose(result.expected_values[agent][node.node_id], values)
                    mode = int(np.argmax(result.profile.distribution(agent, node.node_id)))
                    assert mode == int(np.argmax(values)), f"seed {seed}, node {node.node_id}, agent {agent}"
                    checked += 1
        log.info(f"{checked} quantal modes matched exhaustive best responses")

    @pytest.mark.smoke
    def test_solvers_018(self):
        """Verify that level-0 choices ignore the opponent's utilities but follow the agent's own."""
        games = ObjectManager().get_games()
        rng = np.random.default_rng(11)
        changed = 0
        for seed in range(TestData().get_solver_data()["random_trees"]):
            for agent in (0, 1):
                baseline = solve_level0_maxmax(games.random_tree(seed, max_stages=3, max_actions=4), agent)

                noisy = games.random_tree(seed, max_stages=3, max_actions=4)
                for node in noisy.decision_nodes():
                    node.payoffs = node.payoffs.copy()
                    node.payoffs[..., 1 - agent] = rng.uniform(-1.0, 1.0, size=node.shape)
                    if node.leaf_payoffs is not None:
                        node.leaf_payoffs = node.leaf_payoffs.copy()
                        node.leaf_payoffs[..., 1 - agent] = rng.uniform(-1.0, 1.0, size=node.shape)
                assert solve_level0_maxmax(noisy, agent) == baseline, f"seed {seed}, agent {agent}"

                own = games.random_tree(seed, max_stages=3, max_actions=4)
                for node in own.decision_nodes():
                    node.payoffs = node.payoffs.copy()
                    node.payoffs[..., agent] = rng.uniform(-1.0, 1.0, size=node.shape)
                changed += solve_level0_maxmax(own, agent) != baseline
        assert changed > 0
