# conflict-sim - traffic-conflict game simulation toolkit

__version__ = "0.1.0"

from conflict_sim.config import CONFLICT_SIM_OUTPUT, CONFLICT_SIM_WORKERS  # noqa: E402
from conflict_sim.simulator import ConflictSimulator  # noqa: E402

__all__ = "__version__", "ConflictSimulator", "CONFLICT_SIM_OUTPUT", "CONFLICT_SIM_WORKERS"
