"""fracheat: a desk-scale numerical laboratory for fractional powers of
sub-Laplacians and heat operators on discrete model geometries.

The package realizes the semigroup-based fractional calculus twice over:
once through exact spectral multipliers and once through singular-
integral quadrature of the semigroup, and cross-checks the two routes.
On top of that sit the extension-problem machinery (Poisson-kernel
modes, trace and weighted-Neumann limits, energy estimates), metric-
geometry audits (doubling, Poincare, A2, Sobolev), and certified Harnack
quotient scans.
"""

from .audits import (DoublingReport, GeometryAuditReport, SobolevProbe,
                     doubling_audit, poincare_constant, sobolev_probe)
from .config import ExperimentConfig, load_config
from .extension import (ExtensionField, energy_norm, energy_ratio,
                        extend_elliptic, extend_parabolic, make_bump_family,
                        neumann_constant, neumann_limit, pde_residual_strong,
                        poisson_mode, reflect_even, trace_rate,
                        weak_form_residual)
from .fields import (nonnegative_field, nonnegative_spacetime_field,
                     random_field, random_spacetime_field)
from .fractional import (FractionalParams, SpectralMultiplier,
                         dirichlet_solve_elliptic, dirichlet_solve_parabolic,
                         frac_heat_balakrishnan, frac_heat_spectral,
                         frac_laplacian_balakrishnan, frac_laplacian_spectral,
                         heat_power_lag_blocks, heat_power_matrix,
                         heat_power_offdiag_max, laplacian_power_offdiag_max,
                         norm_h2s, norm_w2s)
from .frames import (VectorFieldFrame, carre_du_champ, euclidean, extend_frame,
                     grushin, heisenberg, make_preset)
from .generator import (SemigroupReport, SpectralDecomposition, SubLaplacian,
                        assemble, gaussian_probe, heat_apply,
                        semigroup_axioms_check, spectral_decompose)
from .grid import Grid, GridCapExceeded
from .harnack import (Certificate, HarnackReport, QuotientRow, SolutionFamily,
                      harnack_quotient_elliptic, harnack_quotient_extension,
                      harnack_quotient_parabolic, make_caloric_translate,
                      scale_scan, scan_caloric, scan_constant,
                      scan_elliptic_dirichlet, scan_extension,
                      scan_parabolic_dirichlet)
from .metric import (MetricField, ball, ball_saturated, control_distance,
                     cylinder, cylinder_comparability, volume)
from .quadrature import (QuadratureScheme, QuadratureToleranceError,
                         balakrishnan_multiplier, balakrishnan_scheme,
                         checked_balakrishnan_multiplier, heat_time_integral,
                         heat_time_scheme)
from .spacetime import (SpaceTimeField, TimeCircle, evolutive_apply,
                        from_spatial, time_shift)
from .specialfuncs import (bessel_k, gr_bessel_identity_defect,
                           special_identities_check)
from .weights import WeightedMeasure, a2_characteristic
from .zmesh import ZGrid

__version__ = "0.1.0"
