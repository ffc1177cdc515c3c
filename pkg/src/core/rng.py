"""
Seeded random streams.

Every random draw in the toolkit comes from a ``RngStream``: numpy's PCG64 bit
generator keyed by ``SeedSequence(seed, spawn_key=(stream_id,))``. The same
(seed, stream_id) pair yields the same sequence on every platform numpy
supports; distinct stream ids give independent sequences, so simulations and
permutations can run in any order or in parallel.
"""
import numpy as np
from pydantic import BaseModel, ConfigDict, Field

# Well-known stream ids used by the pipeline stages
STREAM_SPLIT = 1
STREAM_FOLDS = 2
STREAM_SPLITTER = 3
STREAM_COHORT = 4
STREAM_PERMUTATION = 5
STREAM_SIMULATION = 6


class RngStream(BaseModel):
    """Identifies one reproducible random sequence."""

    model_config = ConfigDict(frozen=True)

    seed: int = Field(..., ge=0, lt=2**64)
    stream_id: int = Field(default=0, ge=0)
    # spawn path of the parent streams, empty for top-level streams
    parents: tuple[int, ...] = ()

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        sequence = np.random.SeedSequence(self.seed, spawn_key=self.parents + (self.stream_id,))
        return np.random.Generator(np.random.PCG64(sequence))

    def derive_seed(self) -> int:
        """A 63-bit integer seed drawn from this stream, for APIs that take plain ints."""
        sequence = np.random.SeedSequence(self.seed, spawn_key=self.parents + (self.stream_id,))
        return int(sequence.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))

    def child(self, stream_id: int) -> "RngStream":
        """Derived stream for a sub-task (e.g. one simulation of a campaign)."""
        return RngStream(
            seed=self.seed,
            stream_id=stream_id,
            parents=self.parents + (self.stream_id,),
        )


def make_generator(seed: int, stream_id: int = 0) -> np.random.Generator:
    return RngStream(seed=seed, stream_id=stream_id).generator()
