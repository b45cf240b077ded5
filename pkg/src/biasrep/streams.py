"""Keyed, counter-based random streams for reproducible parallel Monte Carlo.

Every random decision in a simulation is addressed by a tuple
(seed, trial, location, qubit, tag) and hashed through the splitmix64
finalizer.  Draws are therefore independent of evaluation order, batch
size, and worker count: trial 7 sees the same faults whether it runs
alone, inside a vectorized batch, or on another process.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# Draw purposes within one (location, qubit) cell.
TAG_FAULT = 0        # fault-class selection
TAG_LEAK_OUTCOME = 1 # random outcome when measuring a leaked qubit
TAG_LEAK_CZ = 2      # random dephasing of the partner of a leaked qubit


def _mix(x: int) -> int:
    x &= _MASK
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK
    return x ^ (x >> 31)


def stream_key(seed: int, location: int, qubit: int, tag: int) -> int:
    """Collapse an address into a 64-bit stream key."""
    h = _mix(seed & _MASK)
    h = _mix(h ^ ((location & _MASK) * _GOLDEN) & _MASK)
    h = _mix(h ^ ((qubit & _MASK) * _MIX1) & _MASK)
    return _mix(h ^ tag)


def uniform(seed: int, trial: int, location: int, qubit: int, tag: int = TAG_FAULT) -> float:
    """One double in [0, 1) for the addressed decision."""
    key = stream_key(seed, location, qubit, tag)
    x = _mix((key + trial * _GOLDEN) & _MASK)
    return (x >> 11) * 2.0**-53


def uniform_vector(seed: int, trials: np.ndarray, location: int, qubit: int,
                   tag: int = TAG_FAULT) -> np.ndarray:
    """Vectorized :func:`uniform` over an array of trial indices."""
    key = stream_key(seed, location, qubit, tag)
    x = trials.astype(np.uint64) * np.uint64(_GOLDEN) + np.uint64(key)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(_MIX1)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(_MIX2)
    x = x ^ (x >> np.uint64(31))
    return (x >> np.uint64(11)) * 2.0**-53


class FaultStream:
    """Per-trial view of the keyed stream, passed to sampling routines."""

    __slots__ = ("seed", "trial")

    def __init__(self, seed: int, trial: int = 0):
        self.seed = int(seed)
        self.trial = int(trial)

    def uniform(self, location: int, qubit: int, tag: int = TAG_FAULT) -> float:
        return uniform(self.seed, self.trial, location, qubit, tag)
