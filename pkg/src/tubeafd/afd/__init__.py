"""Adaptive decomposition engine: selection, orthogonalization and greedy loops."""

from __future__ import annotations

from .engine import (
    IllConditionedGram,
    RateReport,
    afd_run,
    mp_run,
    project_interpolate,
    random_atoms,
    rate_harness,
    synthesize,
)
from .model import Approximant, conjugate_model
from .search import (
    DictionaryExhausted,
    ResidualState,
    ResidualZero,
    SearchConfig,
    Selection,
    correlation_objective,
    escalate_order,
    lattice_objective,
    msp_select,
    order_from_count,
)
from .system import DegenerateElement, OrthoSystem, gram_normalized
from .targets import SpectralTarget, as_target


def preorthogonalize(system: OrthoSystem, alpha, z):
    """Candidate ``B`` coefficients and ``||beta||`` for ``phi_{alpha, z}``.

    Raises :class:`DegenerateElement` when the candidate is (numerically) in
    the span of the selected elements.
    """
    from ..kernels import phi_norm

    row, rel = system.candidate(alpha, z)
    return row, rel * float(phi_norm(alpha, np.asarray(z).imag))


import numpy as np  # noqa: E402
