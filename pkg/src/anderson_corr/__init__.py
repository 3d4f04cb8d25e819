"""Walk-expansion correlation functions for the lattice Anderson model at
strong disorder, with brute-force finite-lattice oracles."""

from .densities import AnalyticDensity, parse_density_spec
from .cauchy1 import HalfPlaneSign, i0_bound, i0_boundary, i_n, in_boundary
from .cauchy_n import (EnergyVector, MultiIndex, SignVector, j_n,
                       j_partial_fraction, j_reg, j_sigma_decomposed,
                       j_sigma_direct, residue_part, restricted_multiindex_sum,
                       simplex_pole_product)
from .covariant import (CovariantMonomial, CovariantPolynomial,
                        assemble_site_density, identity, matrix_element,
                        parse_observable_spec, velocity)
from .expansion import (ExpansionConfig, SeriesValue, dos_series, dos_value,
                        green_series, lambda_r_eps, moment_kernel,
                        npoint_boundary_series, radius_a0)
from .walks import (LatticeWalk, NPathFamily, count_walks,
                    enumerate_closed_walks, enumerate_npaths, visit_counts)
from . import errors, oracle

__version__ = "0.1.0"
