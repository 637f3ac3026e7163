"""Mask-constrained minimal max-norm adversarial attacks for small classifiers."""

from .boundary import (BBConfig, BBTrace, BoundaryState, bb_optimize,
                       boundary_search, boundary_state, solve_linf_subproblem)
from .constraints import (FeasibleBox, attackable_pixels, cap_to_range, clip,
                          feasible_box, ratio_to_mask, region_to_mask,
                          uniform_mask)
from .datasets import Dataset, ingest_dataset, load_idx_dataset, load_png_dataset
from .deepfool import DeepFoolConfig, DeepFoolTrace, deepfool_attack, deepfool_step
from .errors import (DatasetError, InputError, MaskAdvError, ModelFormatError,
                     NumericError, SolverError)
from .metrics import ciede2000, delta_e_ciede2000, lp_norms, srgb_to_lab, ssim
from .nn import (Conv2D, Dense, Flatten, NetworkModel, ReLU, ResidualAdd,
                 Scores, Sigmoid, forward, forward_trace, input_gradient,
                 input_jacobian, load_model, save_model, score_diff_gradient,
                 validate_model)
from .pipeline import (AttackRequest, AttackResult, ConstraintSpec,
                       build_constraint, estimate_robust_radius, render_report,
                       run_attack)
from .saliency import (ImportanceMap, RegionScore, best_rectangle,
                       correction_coefficients, imperceptible_mask,
                       integrated_gradients, region_vulnerability, smoothgrad,
                       topk_rectangles, variance_map)
from .tensorio import load_tensor, save_tensor, tensor_from_payload, tensor_to_payload
from .train import accuracy, init_mlp, train_sgd

__version__ = "0.1.0"
