"""Thermal generating functional of the periodic XY spin chain.

The chain ``H = H_0 + gamma H_1 - h S^z`` is solved sector by sector after a
Jordan-Wigner transformation. The package evaluates the generating functional
``G(alpha, m) = <exp(alpha Q(m))>`` through finite determinant formulas, checks
them against dense exact diagonalization, and derives z-spin correlators,
partition functions and zeta-regularized determinants from the same data.
"""

from .errors import (AccuracyFailure, InternalInconsistency, InvalidArgument, PoleError,
                     ResourceLimit, SingularityError)
from .model import (ChainSpec, MomentumGrid, ProjectorKernel, Sector, SpectralData, Statistics,
                    bogoliubov_matrix, build_momentum_grid, dispersion, projector_kernel)
from .partition import (SectorPartition, free_energy, free_energy_limit, log_total_partition,
                        regularized_logdet_partition, sector_partition, total_partition)
from .genfunc import (Representation, SectorResult, SeriesDivergenceWarning,
                      assemble_generating_functional, full_window_product, genfunc_series,
                      genfunc_xx_sector, genfunc_xy_sector_2M, genfunc_xy_sector_M,
                      sector_results)
from .derivatives import (ThermalCorrelators, dlogdet_alpha0_xx, dlogdet_alpha0_xy,
                          genfunc_alpha_derivatives, q_moments, sigma_z, sigma_z_limit,
                          sigma_z_limit_xx, thermal_correlators, zz_correlator,
                          zz_correlator_limit, zz_correlator_limit_xx)
from .zeta import (HurwitzResult, MellinResult, hurwitz_zeta, hurwitz_zeta_sprime0, loggamma,
                   matsubara_logdet_series, single_mode_mellin)

__version__ = "0.1.0"
