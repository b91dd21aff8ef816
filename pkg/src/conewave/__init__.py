"""Wave propagation on product cones by Fourier-Bessel separation of variables.

Submodules: ``spectrum`` (boundary eigenpairs and Bessel functions),
``geometry`` (cone models and geodesics), ``propagator`` (exact spectral
evolution), ``diagnostics`` (regularity estimates along rays) and
``harness`` (scenarios, oracles, bundles and the command line).
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    ConewaveError,
    EstimatorError,
    NumericError,
    ParameterError,
    SpectrumParseError,
    TruncationError,
    WallShadowError,
)
from .geometry import ConeModel, build_cone, geodesic, hits_boundary, near_miss_limit, pi_relation
from .spectrum import BoundarySpectrum, bessel_j, bessel_zeros, circle_spectrum, load_spectrum, save_spectrum, sphere_axisym_spectrum
from .propagator import (
    ConormalRing,
    PointPole,
    WaveState,
    build_basis,
    evolve,
    fundamental_solution,
    initial_state,
    load_state,
    save_state,
    synthesize,
    tangential_smooth,
    weyl_count,
)
from .diagnostics import (
    EstimatorConfig,
    RegularityReport,
    front_extract,
    mode_decay_profile,
    nonfocusing_test,
    ray_sample,
    sobolev_exponent,
    tip_emission_monitor,
    wavefront_scan,
)
