# conflict-sim - traffic-conflict game simulation toolkit

from conflict_sim import config


def suppress_exceptions() -> None:
    """
    Suppress a per-game exception based on the global CONFLICT_SIM_EXCEPTIONS flag.

    If the flag is False, the exception currently being handled is re-raised so that it aborts the batch.
    If the flag is True, the function returns and the caller records the failure locally.

    Example:
        try:
            record = play_game(setup)
        except ConflictSimError as e:
            # Re-raised here when CONFLICT_SIM_EXCEPTIONS is False
            suppress_exceptions()
            record = failed_record(setup, e)

    Note:
        Must be called from inside an `except` block.
    """
    if not config.CONFLICT_SIM_EXCEPTIONS:
        raise
