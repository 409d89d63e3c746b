# conflict-sim - traffic-conflict game simulation toolkit

from conflict_sim.modules.harness import GameRecord


class Records:
    """Hand-made batch records with known category pairs."""

    def record(self, index: int, gamma_holder: float, holder_category: str, other_category: str, **fields):
        """A classified game of a pedestrian-holder scenario."""
        values = dict(
            game_id=f"toy-{index:04d}",
            scenario_id="toy",
            concept="spene",
            v1_init=1.5,
            v2_init=5.0,
            gamma1=gamma_holder,
            gamma2=0.0,
            row_holder_id=1,
            symbols_agent1="p p",
            symbols_agent2="w w",
            category_agent1=holder_category,
            category_agent2=other_category,
            param_fingerprint="0123456789abcdef",
        )
        values.update(fields)
        return GameRecord(**values)

    def failed(self, index: int, gamma_holder: float) -> GameRecord:
        """A game that could not be played."""
        return GameRecord(
            game_id=f"toy-{index:04d}",
            scenario_id="toy",
            concept="spene",
            v1_init=1.5,
            v2_init=5.0,
            gamma1=gamma_holder,
            gamma2=0.0,
            row_holder_id=1,
            param_fingerprint="0123456789abcdef",
            error="no feasible vehicle trajectory",
        )

    def batch(self):
        """
        Four classified games and one failure.

        Holder at gamma 0 plays UA twice; at gamma 1 it plays UA once and UAA once.
        """
        return [
            self.record(0, 0.0, "UA", "UA"),
            self.record(1, 0.0, "UA", "UA", deadlock=True),
            self.record(2, 1.0, "UA", "UV", fallback_used=True),
            self.record(3, 1.0, "UAA", "UV", symbols_agent1="pa p"),
            self.failed(4, 1.0),
        ]

    def trend_batches(self):
        """
        Four 20-game batches, four games per holder type in -1, -0.5, 0, 0.5, 1, that show every checked trend.

        Pedestrian-vehicle quantal play: k of the games at the k-th type have the holder adhere (UA), the rest
        relinquish (UR); six adhering games pair with a waiting vehicle. Vehicle-vehicle quantal play peaks in
        responsive adherence at -0.5.
        """
        gammas = (-1.0, -0.5, 0.0, 0.5, 1.0)

        def batch(name, concept, pairs):
            return [
                self.record(i, gammas[i // 4], h, o, concept=concept, param_fingerprint=name)
                for i, (h, o) in enumerate(pairs)
            ]

        ped_qlk = [p for k in range(5) for p in [("UA", "UA" if k < 4 else "UV")] * k + [("UR", "UV")] * (4 - k)]
        ra = (1, 3, 2, 1, 0)
        veh_qlk = [p for k in range(5) for p in [("RA", "UV")] * ra[k] + [("UA", "UV")] * (4 - ra[k])]
        return {
            "ped_spene": batch("ped-spene", "spene", [("UA", "UA")] + [("UR", "UV")] * 19),
            "ped_qlk": batch("ped-qlk", "qlk", ped_qlk),
            "veh_spene": batch("veh-spene", "spene", [("RA", "UV")] * 10 + [("UA", "UV")] * 10),
            "veh_qlk": batch("veh-qlk", "qlk", veh_qlk),
        }
