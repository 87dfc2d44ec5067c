"""Deterministic zeroth-order mirror descent with a-posteriori certificates."""

from .geometry import (DomainError, EntropyMirror, EuclideanMirror, MirrorMap, NormPair,
                       d_f_omega, entropy_mirror, euclidean_mirror, norm_pair)
from .oracles import (AnalyticField, DirectionalField, FiniteDiffField, ObjectiveOracle,
                      StencilField, central_differences, compute_alpha, omega_fd,
                      star_c_from_mu_L, v_membership)
from .conic import (ConeSpec, DominanceProblem, InfeasibleDominanceError, ball_min_dominance_alpha,
                    min_dominance_alpha, verify_dominance, worst_case_witness)
from .descent import (CertificateReport, StepConfig, TrajectoryRecord, certificate,
                      last_iterate_bound, mirror_step, run, select_stepsize)
from .problems import ConfigError, ProblemSpec, RunConfig, make_problem, parse_config

__version__ = "0.1.0"
