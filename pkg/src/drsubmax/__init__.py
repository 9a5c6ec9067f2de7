"""Online maximization of non-monotone DR-submodular quadratics over
down-closed convex sets, via a 1/e-linearizing surrogate and single-query
gradient estimation, with a certification and regret-rate benchmark suite."""

from .geometry import Box, Knapsack, ScaledBox, ShrunkDomain, make_domain
from .objectives import OracleSpec, Quadratic, StochasticOracle, \
    offline_benchmark
from .surrogate import (ALPHA, BETA, SurrogateContext, bqnd_estimate,
                        certify_union_bound, certify_linearization, F_quadrature,
                        grad_F_quadrature, h_map, h_z_map, prob_sum, sample_z)
from .learners import ImprovedAder, SoOga, so_ip, so_ip_path
from .reductions import (FEEDBACK_MODES, RunRecord, run_bandit,
                         run_first_order_full, run_semi_bandit,
                         run_zeroth_full)
from .harness import (Adversary, AdversarySpec, ExperimentConfig,
                      build_adversary, fit_slope, regret_adaptive,
                      regret_dynamic, regret_static, run_experiment, sweep)

__version__ = "0.1.0"
