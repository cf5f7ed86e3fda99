"""Hybrid physics/data-driven elasticity on the unit square.

A P1 finite-element elastodynamics solver whose discrete system can be
augmented with a learned corrective source term, a purely data-driven
stepper for comparison, manufactured solutions to benchmark against, and a
harness that runs the benchmark matrix and scores the three model kinds.
"""

__version__ = "0.1.0"

from .fem import (ElasticMaterial, FemOperators, StatePair, apply_dirichlet,
                  assemble_load, assemble_mass, assemble_stiffness,
                  build_operators, elasticity_matrix_2d, elasticity_matrix_3d,
                  project_initial, time_step)
from .harness import (ExperimentSpec, RrmseRecord, aggregate_stats,
                      emit_results, rrmse, run_experiment, significance_curve)
from .hybrid import (MODEL_COSTA, MODEL_DDM, MODEL_PBM, CaseData, SampleSet,
                     Trajectory, build_case_data, build_training_sets,
                     compute_residual, costa_step, ddm_step,
                     exact_residual_predictor, pbm_predict, rollout)
from .manufactured import (CASES, AlphaSplit, ManufacturedCase,
                           default_alpha_split, derive_load,
                           eval_displacement, eval_strain, get_case,
                           restrict_to_plane, young_modulus)
from .mesh import (DofMap, GridMesh, build_dof_map, build_grid_mesh,
                   element_areas)
from .neural import (MlpNetwork, Normalizer, TrainConfig, TrainedModel,
                     TrainingDiverged, fit_normalizer, load_model, save_model,
                     train)
