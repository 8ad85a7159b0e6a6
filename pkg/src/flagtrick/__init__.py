"""Nested multilevel subspace learning on flag manifolds.

Classic fixed-dimension subspace objectives (PCA, robust recovery, trace
ratio, sparse spectral clustering, domain-invariant projection) restated as
single optimizations over a flag of nested subspaces, with matching solvers
and a multilevel ensembling layer.
"""

from .descent import (DescentConfig, Objective, OptTrace, Termination,
                      fd_gradient, save_trace, steepest_descent,
                      steepest_descent_restarts)
from .ensemble import (cross_entropy, ensemble_predict, hard_vote,
                       knn_predict_proba, optimal_soft_voting, project_levels)
from .errors import (DegenerateDenominator, DegenerateRetraction,
                     FallbackToRandomInit, InvalidInput, NonUniqueWarning,
                     NumericalBlowup, ParseError, RankDeficient)
from .flag import (FlagPoint, FlagSignature, average_projector, flag_distance,
                   load_flag, nested_projectors, random_uniform, retract,
                   riemannian_gradient, save_flag, tangent_project, validate)
from .numerics import SymEig, polar_factor, principal_angles, sym_eig
from .objectives import (Dataset, DipProblem, SscProblem, TraceRatioProblem,
                         build_lda_matrices, center, dip_mmd_objective,
                         lad_residuals, nested_pca_closed_form,
                         nested_pca_objective, rsr_lad_objective,
                         ssc_objective, trace_ratio_objective)
from .solvers import (FmfConfig, KernelEmbedding, build_laplacian, flag_itr,
                      fmf, kernel_graph_embed, newton_bracket, root_function,
                      spectral_cluster)
from .datagen import (HaystackConfig, gaussian_clusters, haystack, haystack_3d,
                      load_csv, save_csv, two_moons_3d)

__version__ = "0.1.0"
