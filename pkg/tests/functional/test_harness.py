# conflict-sim - traffic-conflict game simulation toolkit

import dataclasses
import json

import pandas as pd
import pytest
import yaml

from conflict_sim.base.errors import AggregationError, ReportIOError
from conflict_sim.modules.harness import (
    CSV_COLUMNS,
    aggregate_distribution,
    emit_report,
    fallback_rate,
    load_records,
    reproduce_trends,
    run_batch,
    trend_checks,
    type_conditional,
)
from conflict_sim.modules.scenario import apply_overrides, read_config
from tests.features.object_manager import ObjectManager
from tests.test_data.data import TestData
from tests.utils.base_class import BaseClass


class TestHarness(BaseClass):
    """Class for testing batch runs, distribution aggregation and report files."""

    @pytest.mark.smoke
    def test_harness_001(self):
        """Verify the joint category distribution and its ordering."""
        log = self.get_logger()
        records = ObjectManager().get_records().batch()
        table = aggregate_distribution(records)
        log.info(f"distribution: {table.counts}")

        assert list(table.counts.items()) == [(("UA", "UA"), 2), (("UA", "UV"), 1), (("UAA", "UV"), 1)]
        assert table.failed == 1
        assert table.total == 4
        assert sum(table.fractions.values()) == pytest.approx(1.0)
        assert table.fraction("UA", "UA") == pytest.approx(0.5)
        assert table.fraction("UR", "RA") == 0.0
        assert table.most_common(1) == [(("UA", "UA"), 2)]

        collapsed = aggregate_distribution(records, collapsed=True)
        assert list(collapsed.counts.items()) == [(("UA", "UA"), 2), (("UA", "UV"), 2)]
        assert list(collapsed.as_frame().columns) == ["holder", "non_holder", "count", "fraction"]

    @pytest.mark.smoke
    def test_harness_002(self):
        """Verify type-conditional fractions with and without modifiers."""
        records = ObjectManager().get_records().batch()
        assert type_conditional(records, "UA", "holder") == {0.0: 1.0, 1.0: 0.5}
        assert type_conditional(records, "UA", "holder", collapsed=True) == {0.0: 1.0, 1.0: 1.0}
        assert type_conditional(records, ("UA", "UV"), "holder") == {0.0: 0.0, 1.0: 0.5}
        assert type_conditional(records, lambda r: r.deadlock, "holder") == {0.0: 0.5, 1.0: 0.0}
        assert type_conditional(records, "UV", "non_holder") == {0.0: 0.5}
        with pytest.raises(ValueError):
            type_conditional(records, "UA", "pedestrian")

    @pytest.mark.smoke
    def test_harness_003(self):
        """Verify that empty or all-failed batches cannot be aggregated."""
        factory = ObjectManager().get_records()
        with pytest.raises(AggregationError):
            aggregate_distribution([])
        with pytest.raises(AggregationError):
            type_conditional([factory.failed(0, 0.0)], "UA")
        assert fallback_rate(factory.batch()) == pytest.approx(0.25)
        assert fallback_rate([]) == 0.0

    @pytest.mark.smoke
    def test_harness_004(self, tmp_path):
        """Verify the report files and that records survive a write and read."""
        log = self.get_logger()
        records = ObjectManager().get_records().batch()
        files = emit_report(records, aggregate_distribution(records), tmp_path / "report", fmt="json")
        log.info(f"report files: {files}")

        assert all(p.is_file() for p in files.values())
        assert files["summary"].suffix == ".json"
        lines = files["games"].read_text().splitlines()
        assert lines[0].startswith("# conflict-sim games v1:")
        assert lines[1] == ",".join(CSV_COLUMNS)
        assert len(lines) == 2 + len(records)

        summary = json.loads(files["summary"].read_text())
        assert summary["games"] == 5 and summary["failed"] == 1
        assert summary["deadlock_rate"] == pytest.approx(0.25)
        assert summary["distribution_collapsed"][1] == {
            "holder": "UA",
            "non_holder": "UV",
            "count": 2,
            "fraction": 0.5,
        }
        assert "config" not in summary

        plot = pd.read_csv(files["plot"])
        assert set(plot["table"]) == {"distribution", "distribution_collapsed", "type_conditional"}

        assert load_records(files["games"]) == records

    @pytest.mark.smoke
    def test_harness_005(self, tmp_path):
        """Verify that foreign or missing per-game files are rejected."""
        foreign = tmp_path / "games.csv"
        foreign.write_text("game_id,category\ng1,UA\n")
        with pytest.raises(ReportIOError):
            load_records(foreign)
        with pytest.raises(ReportIOError):
            load_records(tmp_path / "absent.csv")

        truncated = tmp_path / "truncated.csv"
        truncated.write_text("# conflict-sim games v1: game_id\ngame_id\ng1\n")
        with pytest.raises(ReportIOError, match="lacks"):
            load_records(truncated)

    @pytest.mark.regression
    def test_harness_006(self, small_records, tmp_path):
        """Verify a played batch: record fields, sweep order and the YAML summary."""
        log = self.get_logger()
        cfg = self.simulator.experiment
        log.info(f"records: {small_records}")

        assert len(small_records) == TestData().get_experiment_data()["small_games"]
        assert [r.game_id for r in small_records] == [f"ped_veh-{i:04d}" for i in range(4)]
        assert [(r.gamma1, r.gamma2) for r in small_records] == [(0.0, 0.0), (0.0, 1.0), (1.0, 0.0), (1.0, 1.0)]
        for r in small_records:
            assert r.ok, r.error
            assert r.row_holder_id == 1
            assert r.param_fingerprint == cfg.fingerprint
            assert len(r.symbols_agent1.split()) == 2

        files = self.simulator.report(small_records, tmp_path)
        summary = yaml.safe_load(files["summary"].read_text())
        assert summary["config"]["game"]["delta_t_h"] == 2.6
        assert summary["param_fingerprint"] == cfg.fingerprint

    @pytest.mark.regression
    def test_harness_007(self, small_records):
        """Verify that a worker pool reproduces the in-process batch."""
        parallel = run_batch(self.simulator.experiment, worker_count=2, progress=False)
        assert parallel == small_records

    @pytest.mark.regression
    def test_harness_008(self):
        """Verify a quantal batch on a subset of the sweep."""
        cfg = self.simulator.experiment
        records = run_batch(cfg, concept="qlk", progress=False, setups=self.simulator.setups()[:2])
        assert [r.concept for r in records] == ["qlk", "qlk"]
        assert not any(r.fallback_used for r in records)
        assert records[0].param_fingerprint != cfg.fingerprint

    @pytest.mark.smoke
    def test_harness_009(self):
        """Verify that batches showing every qualitative trend pass all trend checks."""
        log = self.get_logger()
        batches = ObjectManager().get_records().trend_batches()
        checks = trend_checks(**batches, sigmoid_midpoint=2.0)
        for c in checks:
            log.info(str(c))

        assert [c.name for c in checks] == TestData().get_experiment_data()["trend_checks"]
        assert all(c.passed for c in checks)
        assert all(c.sigmoid_midpoint == 2.0 for c in checks)
        assert checks[0].observed["fraction"] == pytest.approx(0.3)
        assert checks[0].fingerprints == ("ped-qlk",)
        assert checks[1].fingerprints == ("ped-spene", "ped-qlk")
        assert checks[5].observed["peak_gamma"] == -0.5
        assert checks[3].observed["inversions"] == 0

    @pytest.mark.smoke
    def test_harness_010(self):
        """Verify that swapped concepts miss the distribution checks and name the batches in the verdict."""
        batches = ObjectManager().get_records().trend_batches()
        swapped = dict(
            ped_spene=batches["ped_qlk"],
            ped_qlk=batches["ped_spene"],
            veh_spene=batches["veh_qlk"],
            veh_qlk=batches["veh_spene"],
        )
        checks = {c.name: c for c in trend_checks(**swapped)}

        assert not checks["ped_qlk_ua_ua_band"].passed
        assert not checks["ped_ua_ua_qlk_above_spene"].passed
        assert not checks["veh_ra_uv_spene_above_qlk"].passed
        # here the (RA, UV) games fill the lowest holder types
        assert checks["veh_holder_ra_peaks_inside"].observed["peak_gamma"] == -1.0
        assert not checks["veh_holder_ra_peaks_inside"].passed
        assert "MISSED" in str(checks["veh_ra_uv_spene_above_qlk"])
        assert "veh-spene" in str(checks["veh_ra_uv_spene_above_qlk"])

    @pytest.mark.smoke
    def test_harness_011(self, monkeypatch):
        """Verify that a miss repeats the checks at the other sigmoid midpoints and that passing runs do not."""
        log = self.get_logger()
        batches = ObjectManager().get_records().trend_batches()
        calls = []

        def fake_batch(cfg, concept=None, worker_count=None, progress=True, setups=None):
            midpoint = cfg.utility.sigmoid_midpoint
            calls.append((cfg.scenario.scenario_id, concept, midpoint))
            name = f"{'ped' if cfg.scenario.scenario_id == 'ped_veh' else 'veh'}_{concept}"
            if midpoint == 1.0 and name.startswith("ped"):
                name = "ped_qlk" if concept == "spene" else "ped_spene"
            return [dataclasses.replace(r, param_fingerprint=f"{cfg.fingerprint}-{concept}") for r in batches[name]]

        monkeypatch.setattr("conflict_sim.modules.harness.run_batch", fake_batch)
        ped_cfg, veh_cfg = read_config("ped_veh"), read_config("veh_veh")

        clean = reproduce_trends(ped_cfg, veh_cfg)
        assert clean.passed and not clean.misses and clean.reruns == {}
        assert len(calls) == 4

        calls.clear()
        first = reproduce_trends(apply_overrides(ped_cfg, ["utility.sigmoid_midpoint=1.0"]), veh_cfg)
        log.info(f"misses: {[str(c) for c in first.misses]}")
        assert not first.passed
        assert set(first.reruns) == {2.0, 3.0}
        assert all(c.passed for group in first.reruns.values() for c in group)
        assert len(calls) == 12
        assert {midpoint for _, _, midpoint in calls} == {1.0, 2.0, 3.0}
        missed = {c.name for c in first.misses}
        assert {"ped_qlk_ua_ua_band", "ped_ua_ua_qlk_above_spene"} <= missed
        assert all(c.sigmoid_midpoint == 1.0 for c in first.misses)
        assert all(fp.endswith("-qlk") or fp.endswith("-spene") for c in first.misses for fp in c.fingerprints)

    @pytest.mark.regression
    def test_harness_012(self):
        """Verify trend checks on reduced sweeps of both built-in experiments, misses repeated and fingerprinted."""
        log = self.get_logger()
        data = TestData().get_experiment_data()
        ped_cfg = apply_overrides(read_config("ped_veh"), data["trend_overrides"]["ped_veh"])
        veh_cfg = apply_overrides(read_config("veh_veh"), data["trend_overrides"]["veh_veh"])

        report = reproduce_trends(ped_cfg, veh_cfg, worker_count=1)
        for c in report.checks:
            log.info(str(c))
        for midpoint, group in report.reruns.items():
            log.info(f"sigmoid midpoint {midpoint}: {sum(c.passed for c in group)}/{len(group)} checks passed")

        assert [c.name for c in report.checks] == data["trend_checks"]
        qlk = apply_overrides(ped_cfg, ["solver.concept=qlk"]).fingerprint
        assert report.checks[0].fingerprints == (qlk,)
        assert report.checks[1].fingerprints == (ped_cfg.fingerprint, qlk)
        assert all(c.sigmoid_midpoint == 2.0 for c in report.checks)
        if report.passed:
            assert report.reruns == {}
        else:
            assert set(report.reruns) == {1.0, 3.0}
            for midpoint, group in report.reruns.items():
                assert all(c.sigmoid_midpoint == midpoint for c in group)
                assert all(qlk not in c.fingerprints for c in group)
