"""Computable convergence certificates for Markov chain Monte Carlo.

Three model chains (independence Metropolis-Hastings on [0,1], the Gaussian
autoregressive chain, random-walk Metropolis on a standard normal) and four
ways to certify how fast they mix: coupling simulations, closed-form TV and
Wasserstein bounds, drift-minorization rates, and two-sided operator-norm
brackets backed by exact grid oracles. A compiled kernel core accelerates
the Monte Carlo paths when the extension is available; the pure-Python
fallback produces bit-identical streams.
"""

from ._kernels import BACKEND
from .bounds import (DriftCondition, DriftMinorizationCertificate,
                     GeometricBound, dm_tv_bound, doeblin_tv_bound,
                     gaussian_dm_certificate, gaussian_minorization_epsilon,
                     gaussian_tv_bound, gaussian_w1_bound, mixing_time,
                     optimize_rho, optimize_rho_delta, rho_dm)
from .chains import (GaussianChain, ImhChain, ImhTarget, Rng, RwmhChain,
                     cosine_target, gaussian_step, imh_chain,
                     imh_doeblin_epsilon, imh_step, kernel_spec, rwmh_step,
                     tabulated_target, uniform_target)
from .coupling import (CouplingEstimate, CouplingStrategy, crn_strategy,
                       dm_strategy, doeblin_strategy, fixed_pair,
                       independent_strategy, maximal_strategy,
                       point_vs_stationary, simulate_coupling,
                       simulate_one_shot, stationary_pair)
from .errors import (BracketError, CertificateError, ConfigError,
                     ConvergenceError, IntegrationError, McmcCertifyError)
from .spectral import (GridChain, NormBracket, cheeger_bracket,
                       conductance_exact, discretize_gaussian1d,
                       discretize_imh, discretize_rwmh1d,
                       gaussian_norm_upper_iso, norm_bracket_gaussian,
                       norm_bracket_imh, operator_norm, rayleigh_lower,
                       rwmh_norm_lower, sigma_star, spectral_gap)

__version__ = "0.1.0"
