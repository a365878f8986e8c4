"""Extended DG solver for 1-D hyperbolic-parabolic problems on [0, inf).

The half line is split into a finite subdomain carrying a modal Legendre
DG discretization and a semi-infinite tail carrying a scaled Laguerre
function spectral element; numerical fluxes couple the two like ordinary
interelement edges.  Submodules: basis, quadrature, space, operators,
timestepping, spectra, scenarios, config, tables, cli.
"""

from .basis import LaguerreBasis, LegendreBasis
from .quadrature import DiffMatrix, QuadRule, diff_matrix, gauss_legendre_rule, laguerre_rule
from .space import (NormReport, Space, State, build_dg_space, build_space,
                    discrete_norm, error_norms, evaluate, interface_traces, match_beta)
from .operators import (DampingProfile, Operator, assemble_damping, assemble_diffusion,
                        assemble_dirichlet_vector, assemble_linear_advection,
                        damping_profile, eval_hyperbolic_rhs)
from .timestepping import TimeLoop, crank_nicolson_step, imex2_step, run, solve_dense
from .spectra import (Spectrum, appendix_operator, beta_stability_scan,
                      critical_dz, eigenvalues)
from .scenarios import (Scenario, RunArtifacts, manufactured_eval, project_initial,
                        reference_run, run_scenario, wave_train_bc)
from .config import Config, parse_config, render_config, config_to_scenario
from .tables import TABLE_IDS, build_table

__version__ = "0.1.0"
