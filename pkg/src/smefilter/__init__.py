"""Simulation and model reduction for a homodyne-monitored atom-cavity system.

The package covers the full pipeline: integrate the stochastic master
equation of a driven two-level atom in a lossy cavity under continuous
homodyne detection, learn a low-dimensional manifold of visited states
with local tangent space alignment, fit a differentiable map onto that
manifold, project the dynamics to obtain a fast reduced filter, and use
the reduced filter for measurement feedback and loop analysis.
"""

from .system import (
    SystemParams,
    OperatorSet,
    Trajectory,
    RecordSpec,
    IntegrationDiverged,
    build_operators,
    ito_drift,
    diffusion,
    stratonovich_drift,
    step,
    photocurrent_increment,
    simulate,
)
from .vectorize import rho_to_vec, vec_to_rho, trace_vector, vector_dim

__version__ = "0.1.0"
