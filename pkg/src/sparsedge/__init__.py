"""Spectral-edge correction laboratory for sparse symmetric random matrices."""

from .corrections import (CorrectionSet, IndexPattern, compute_Z, evaluate_term,
                          evaluate_term_bruteforce, scaling_study, x_variance)
from .ensemble import (CENTERED_BERNOULLI, SIGNED_SPARSE, CumulantProfile,
                       EnsembleSpec, MatrixSample, cumulants, sample)
from .experiments import (fluctuation_run, goe_compare_run, local_law_run,
                          rigidity_run, stability_check)
from .scm import (SelfConsistentModel, StieltjesPoint, build, control_phi,
                  density, local_law_rhs, stieltjes)
from .spectral import (SpectrumResult, check_resolvent_identity, check_ward,
                       eigen, empirical_stieltjes, extremal_eigenvalues)

__version__ = "0.1.0"

__all__ = [
    "CENTERED_BERNOULLI", "SIGNED_SPARSE",
    "CorrectionSet", "CumulantProfile", "EnsembleSpec", "IndexPattern",
    "MatrixSample", "SelfConsistentModel", "SpectrumResult", "StieltjesPoint",
    "build", "check_resolvent_identity", "check_ward", "compute_Z",
    "control_phi", "cumulants", "density", "eigen", "empirical_stieltjes",
    "evaluate_term", "evaluate_term_bruteforce", "extremal_eigenvalues",
    "fluctuation_run", "goe_compare_run", "local_law_rhs", "local_law_run",
    "rigidity_run", "sample", "scaling_study", "stability_check", "stieltjes",
    "x_variance",
]
