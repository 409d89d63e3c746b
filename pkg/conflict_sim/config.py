# conflict-sim - traffic-conflict game simulation toolkit

import os

# Failures inside one game of a batch are captured in its record unless this is switched off
CONFLICT_SIM_EXCEPTIONS = os.getenv("CONFLICT_SIM_EXCEPTIONS", "true").lower() == "true"

CONFLICT_SIM_WORKERS = int(os.environ.get("CONFLICT_SIM_WORKERS", "1"))
CONFLICT_SIM_OUTPUT = os.environ.get("CONFLICT_SIM_OUTPUT", "runs")

# Version tag written in the header comment row of every per-game CSV
RESULTS_SCHEMA_VERSION = "1"

# Prefix to be used for console printouts
PREFIX = "conflict-sim:"
