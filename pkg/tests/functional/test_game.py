# conflict-sim - traffic-conflict game simulation toolkit

import numpy as np
import pytest

from conflict_sim.base.errors import GameConstructionError, ProfileError
from conflict_sim.modules.game import GameParams, StrategyProfile, build_tree, is_leaf_time, realized_path
from conflict_sim.modules.scenario import expand_sweep, read_config
from conflict_sim.modules.trajectory import Maneuver, within_limits
from tests.features.object_manager import ObjectManager
from tests.test_data.data import TestData
from tests.utils.base_class import BaseClass


class TestGame(BaseClass):
    """Class for testing game tree construction, strategy profiles and realized play."""

    @pytest.mark.smoke
    def test_game_001(self):
        """Verify the leaf test at exact multiples of the planning period."""
        params = GameParams(1.3, 2.6)
        assert not is_leaf_time(0.0, params)
        assert not is_leaf_time(1.3, params)
        assert is_leaf_time(2 * 1.3, params)
        assert is_leaf_time(2.0, GameParams(1.3, 3.0))

    @pytest.mark.regression
    def test_game_002(self, data_for_test):
        """Verify the shape, depth and node naming of a built pedestrian-vehicle tree."""
        log = self.get_logger()
        cfg = self.simulator.experiment
        tree = build_tree(self.simulator.setups()[0], cfg.game, cfg.trajectory)
        log.info(f"tree of {len(tree)} nodes, root {tree.root}")

        assert tree.stages == 2
        assert tree.root.shape == tuple(TestData().get_experiment_data()["root_shape"])
        assert [a.maneuver for a in tree.root.actions[0]] == [Maneuver.WAIT] + [Maneuver.PROCEED] * 3
        assert [a.target_speed for a in tree.root.actions[1]] == pytest.approx([0.0, 3.0, 5.0, 6.0, 7.0, 10.2])

        expected = 1 + 24 + sum(int(np.prod(tree.node(f"{i}-{j}").shape)) for i in range(4) for j in range(6))
        assert len(tree) == expected
        assert all(leaf.stage == 2 for leaf in tree.leaves())
        assert len(tree.decision_nodes()) == 25
        assert tree.node("3-5/0-0").parent is tree.node("3-5")
        data_for_test["tree"] = tree

    @pytest.mark.regression
    def test_game_003(self, data_for_test):
        """Verify that child states continue the chosen trajectories and that action sets are shared."""
        tree = data_for_test.get("tree") or build_tree(
            self.simulator.setups()[0], self.simulator.experiment.game, self.simulator.experiment.trajectory
        )
        root = tree.root
        child = root.child(2, 4)

        assert child.t == pytest.approx(1.3)
        assert child.arcs == pytest.approx((root.actions[0][2].final_arc, root.actions[1][4].final_arc))
        assert child.joint_state[1].speed == pytest.approx(7.0)
        assert child.last_trajectories == (root.actions[0][2], root.actions[1][4])
        assert root.joint_state[0].speed == pytest.approx(1.55)

        # an agent's options depend on its own history only
        assert tree.node("0-0").actions[0] is tree.node("0-1").actions[0]
        assert tree.node("0-0").actions[1] is tree.node("1-0").actions[1]
        # standing still, the vehicle can wait, proceed gently or accelerate hard
        assert [a.maneuver for a in tree.node("0-0").actions[1]] == [
            Maneuver.WAIT,
            Maneuver.PROCEED,
            Maneuver.AGGRESSIVE,
        ]
        # at 10.2 m/s the vehicle cannot stop within the period
        assert Maneuver.WAIT not in {a.maneuver for a in tree.node("0-5").actions[1]}

    @pytest.mark.regression
    def test_game_004(self, data_for_test):
        """Verify the realized path and history of a profile."""
        tree = data_for_test.get("tree") or build_tree(
            self.simulator.setups()[0], self.simulator.experiment.game, self.simulator.experiment.trajectory
        )
        profile = ObjectManager().get_games().constant_profile(tree, lambda n: n - 1)
        path = realized_path(tree, profile)

        assert [node.node_id for node, _ in path] == ["root", "3-5"]
        assert path[0][1] == (3, 5)
        leaf = path[-1][0].child(*path[-1][1])
        assert leaf.is_leaf
        assert len(leaf.history) == 2

    @pytest.mark.smoke
    def test_game_005(self):
        """Verify strategy profile bookkeeping and its errors."""
        profile = StrategyProfile()
        profile.set_pure(0, "root", 1, 3)
        profile.set_distribution(1, "root", [0.2, 0.5, 0.3])

        assert profile.joint_choice("root") == (1, 1)
        assert not profile.is_pure
        assert profile.resolve().is_pure

        with pytest.raises(ProfileError):
            profile.set_pure(0, "root", 3, 3)
        with pytest.raises(ProfileError):
            profile.set_distribution(0, "root", [0.5, 0.6])
        with pytest.raises(ProfileError):
            profile.distribution(0, "missing")

    @pytest.mark.smoke
    def test_game_006(self):
        """Verify lookup errors on a hand-built tree."""
        games = ObjectManager().get_games()
        tree = games.matrix_game(TestData().get_solver_data()["coordination"])
        with pytest.raises(GameConstructionError):
            tree.node("9-9")
        with pytest.raises(GameConstructionError):
            tree.root.child(5, 0)
        with pytest.raises(GameConstructionError):
            tree.root.joint_state

        incomplete = StrategyProfile()
        incomplete.set_pure(0, "root", 0, 2)
        with pytest.raises(ProfileError):
            realized_path(tree, incomplete)

    @pytest.mark.regression
    @pytest.mark.parametrize("scenario", ["ped_veh", "veh_veh"])
    def test_game_007(self, scenario):
        """Verify that every trajectory of trees built at the extreme swept speeds respects its agent's limits."""
        log = self.get_logger()
        cfg = read_config(scenario)
        setups = expand_sweep(cfg.scenario, cfg.sweep)
        kinds = [agent.kind for agent in cfg.scenario.agents]
        extremes = [(min(cfg.sweep.speeds_for(k)), max(cfg.sweep.speeds_for(k))) for k in kinds]
        corners = [
            s
            for s in setups
            if s.gammas == setups[0].gammas and all(s.speeds[k] in extremes[k] for k in (0, 1))
        ]
        assert len(corners) == 4

        for setup in corners:
            tree = build_tree(setup, cfg.game, cfg.trajectory)
            checked = {}
            for node in tree.decision_nodes():
                for agent in (0, 1):
                    limits = cfg.trajectory.limits_for(kinds[agent])
                    for traj in node.actions[agent]:
                        if id(traj) not in checked:
                            checked[id(traj)] = within_limits(traj, limits)
                            assert checked[id(traj)], f"{setup.game_id} node {node.node_id} agent {agent}: {traj}"
            log.info(f"{setup.game_id} speeds {setup.speeds}: {len(checked)} trajectories within limits")
