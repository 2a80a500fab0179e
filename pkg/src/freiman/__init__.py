"""Freiman homomorphisms and Freiman rank of subsets of Z_N, with the polynomial
counting machinery behind random linear-set thresholds."""

from .errors import (DegenerateSet, DifferenceSetIncomplete, FreimanError, InvalidConfig,
                     LevelCapExceeded, NonPrimeModulus, NotAFreimanHom, NotIsolated, NotWellDefined,
                     ScheduleInvalid, TooLarge)
from .zn import (CyclicGroup, RandomModel, SubsetOfZn, count_additive_quadruples, difference_set,
                 enumerate_additive_quadruples, has_full_difference_set, is_sidon, sample_subset)
from .homspace import (FreimanHom, HomSpaceResult, brute_force_hom_count, find_isolated_element,
                       freiman_rank, indicator_hom_from_isolated, is_freiman_hom, is_linear,
                       solve_hom_space)
from .pairs import (additive_pairs, build_pair_constraints, build_triangle_constraints,
                    extend_pair_solution_to_hom, induced_function, induced_space_dimension,
                    is_additive_pair, is_linear_via_pairs, triangle_generator_rank)
from .embedding import (LambdaTable, all_triangles_positive, is_degenerate_tuple, lambda_table,
                        lambda_tilde, psi_forms)
from .boolpoly import (ReducedBooleanPolynomial, VuSchedule, azuma_bound, chernoff_bound,
                       empirical_concentration, ej, expectation, from_lambda1, from_triangle_count, m,
                       partial_derivative, pb_ratio, vu_bound)
from .experiments import (ExperimentConfig, TrialRecord, dist_bound_report, lambda_threshold_experiment,
                          lower_bound_experiment, sweep_linearity)

__version__ = "0.1.0"
