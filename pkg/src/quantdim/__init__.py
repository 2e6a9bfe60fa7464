"""Quantization dimension of Markov-type measures on graph-directed fractals.

The package computes the order-zero dimension ``s0`` of a Markov system
``(P, C, q)``, the stopping cuts ``Lambda_j`` and their summary sequences,
and certified enclosures of the geometric-mean quantization error of
codebooks on a one-dimensional realization of the fractal.
"""

from .errors import (BudgetExceeded, DimensionNonPositive, InadmissibleWord, InvalidFrostman,
                     InvalidGeometry, InvalidSystem, LengthMismatch, NonConvergence,
                     QuantDimError, Reducible)
from .model import (MarkovSystem, Violation, block_diagonal, cantor2, closed_classes,
                    derived_constants, identical_rows, is_irreducible, random_system,
                    renormalized, restrict, ring3, skew2, validate)
from .spectral import (conditional_s, delta_table, entropy_vectors, s0, sequence_table,
                       stationary_vector)
from .words import (Word, iter_cut, lambda_summary, lambda_summary_conditional, lambda_table,
                    lambda_visit, make_word)
from .geometry import (FrostmanConstants, Realization1D, analytic_frostman, calibrate_frostman,
                       cut_intervals, cylinder_interval, equal_gap, from_offsets,
                       sample_points, verify_separation)
from .quadrature import Enclosure, eval_quantizer, integral_log_dist
from .quantizer import Codebook, QuantizerResult, codebook_for_n, gamma_upper, improve, q_sequence
from .analysis import (conditional_report, convergence_report, mixture_bracket_check,
                       mixture_dimension, reducible_example, stabilizes)

__version__ = "0.1.0"
