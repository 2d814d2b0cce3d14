"""Gap-independent randomized subspace iteration.

Computes an orthonormal ``Z`` spanning ``(A A^T)^t A G`` for a Gaussian sketch
``G`` and checks ``|A - Z Z^T A| <= (1 + eps) sigma_(k+1)`` with an iteration
count that ignores the spectral gap. Everything is built on a small dense
kernel (Householder QR, one-sided Jacobi SVD, power iteration) and a
counter-based Gaussian generator, plus a tracer that evaluates each
intermediate inequality of the convergence argument on concrete matrices.

Modules
-------
dense       matrix kernels and the matrix text format
sketch      seeded Gaussian sketches and random orthonormal factors
iteration   the randomized iteration and its residual
tracer      inequality-by-inequality audit of a run
harness     synthetic spectra, trials, sweeps, CSV
cli         ``gapfree`` command line
"""

from .dense import (ContractError, ConvergenceError, SvdFactorization, householder_qr,
                    jacobi_svd, matmul, min_singular_value, read_matrix, spectral_norm,
                    transpose, write_matrix)
from .harness import (ExperimentRecord, SpectrumSpec, make_spectrum, parse_spectrum,
                      run_trial, sweep, synthesize_matrix)
from .iteration import (ApproximationResult, IterationConfig, approximate_topk, choose_t,
                        low_rank_residual, simultaneous_iteration)
from .sketch import RankCollapseError, RngStream, gaussian_matrix, random_orthonormal
from .tracer import TraceReport, trace

__version__ = "0.1.0"
