"""Translation-invariant quantum walks on Z^d: symbols, dynamics, spectra,
model-walk decompositions, intertwiners and continuous-time realization."""

from .category import (
    Decomposition,
    IntertwinerDescriptor,
    ModelWalk,
    SimilarityReport,
    common_divisor,
    decompose,
    has_uniform_intertwiner,
    intertwiner_space,
    is_indecomposable,
    similarity,
    split_model,
    translation_shift,
    verify_intertwiner,
)
from .ctqw import PhaseGenerator, RealizabilityVerdict, build_generator, evolve_continuous, realizable, verify_realization
from .dynamics import StateVector, evolve, periodic_evolve, position_distribution, step, velocity_distribution
from .errors import *  # noqa: F401,F403
from .registry import REGISTRY, resolve
from .spectral import EigenvalueFunction, limit_velocity_distribution, minimal_period, track_branches, winding_number
from .symbol import LaurentPoly, WalkDefinition, direct_sum, make_walk, parse_walk, validate

__version__ = "0.1.0"
