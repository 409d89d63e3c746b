# conflict-sim - traffic-conflict game simulation toolkit

import hashlib
import json
from typing import Any, Mapping


def derive_seed(master_seed: int, index: int) -> int:
    """
    Derive an independent 32-bit seed for one game from the master seed and its sweep index.

    Args:
        master_seed (int): The experiment-wide seed.
        index (int): The position of the game in the expanded sweep.

    Returns:
        (int): A seed stable across platforms and Python versions.
    """
    digest = hashlib.sha256(f"{master_seed}:{index}".encode()).digest()
    return int.from_bytes(digest[:4], "big")


def canonical_json(document: Mapping[str, Any]) -> str:
    """Serialize a document with sorted keys and no insignificant whitespace."""
    return json.dumps(document, sort_keys=True, separators=(",", ":"))


def fingerprint(document: Mapping[str, Any]) -> str:
    """
    Hash every configuration value of an experiment.

    Args:
        document (Mapping[str, Any]): The fully-defaulted experiment document.

    Returns:
        (str): The first 16 hex digits of the SHA-256 of the canonical JSON form.
    """
    return hashlib.sha256(canonical_json(document).encode()).hexdigest()[:16]
