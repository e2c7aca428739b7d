"""Classical simulation of Gaussian boson sampling by the chain rule."""

from .kernels import InvalidState, haf_barvinok, haf_fast, hafnian, loop_haf, torontonian
from .samplers import (
    MixtureSpec,
    SampleRecord,
    SamplerConfig,
    TailMassError,
    sample_approx_nonneg,
    sample_displaced,
    sample_many,
    sample_mixture,
    sample_pnr,
    sample_threshold,
)
from .state import (
    GaussianState,
    auto_scale,
    from_adjacency,
    from_moments,
    from_squeezing_and_unitary,
    from_symmetric_b,
    probability,
    vacuum,
)

__version__ = "0.1.0"

__all__ = [
    "GaussianState",
    "InvalidState",
    "MixtureSpec",
    "SampleRecord",
    "SamplerConfig",
    "TailMassError",
    "auto_scale",
    "from_adjacency",
    "from_moments",
    "from_squeezing_and_unitary",
    "from_symmetric_b",
    "haf_barvinok",
    "haf_fast",
    "hafnian",
    "loop_haf",
    "probability",
    "sample_approx_nonneg",
    "sample_displaced",
    "sample_many",
    "sample_mixture",
    "sample_pnr",
    "sample_threshold",
    "torontonian",
    "vacuum",
]
