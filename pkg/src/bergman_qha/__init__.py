"""Convolution calculus of Toeplitz operators on the truncated Bergman space."""

from .geometry import (GroupElement, SingularMapError, ball_point, boost,
                       cocycle, invariant_density, involution_map, mobius_act,
                       unitary_embed)
from .space import (BasisSpec, CoeffVector, KernelParams, QuadratureGrid,
                    basis_eval, basis_matrix, c_alpha, default_grid, disc_grid,
                    ball2_grid, integrate, integrate_invariant, kernel,
                    kernel_tail, normalized_kernel, project)
from .operators import (OperatorMatrix, RadialOperator, alpha_berezin, berezin,
                        op_norm, phi, phi_alpha, pi_matrix, radialize,
                        radial_levels, schatten_norm, toeplitz, toeplitz_radial,
                        trace, translate_operator, translate_vector)
from .convolution import (SymbolFunction, fun_conv_fun, fun_conv_op,
                          op_conv_op, radialize_fun, symbol_family)
from .radialcalc import (LevelSequence, berezin_radial, balpha_radial_symbol,
                         moment_levels, moment_matrix, phi_alpha_levels,
                         phi_alpha_level_tail, phi_alpha_trace_norm)

__version__ = "0.1.0"
