"""Decision-boundary analysis toolkit for small seeded classifiers.

Train compact MLPs under a zoo of optimizers, checkpoint them at accuracy
milestones, and study how the class-pair geometry of their embedding
features evolves: PCA planes, probability heat maps, center trajectories,
explained variances, auto-correlation spectra, and resistor samples.
"""

from .boundary import (
    HeatmapGrid,
    PairCoords,
    PCAModel,
    ResistorSet,
    center_trajectory,
    class_centers,
    decision_space,
    fit_pair_plane,
    heatmap,
    inverse_map,
    pair_matrix,
    pca3_export,
    pca_fit,
    project,
    resistor_overlap,
    resistors,
    stabilize_signs,
)
from .datasets import (
    ClassSpec,
    LabeledDataset,
    MixtureSpec,
    gaussian_mixture,
    reference_spec,
    train_test_split,
)
from .errors import ToolkitError
from .linalg import SvdResult, numerical_rank, svd, sym_eig
from .net import NetConfig, NetParams, forward, init_params, loss_and_grads
from .optim import OPTIMIZERS, LrSchedule, make_optimizer, preset_schedule, schedule_lr
from .spectra import (
    ProfileRow,
    SpectrumReport,
    acm_spectrum,
    autocorrelation,
    explained_variances,
    first_component_sufficiency,
    optimizer_profile,
    variance_evolution,
)
from .store import (
    read_checkpoint,
    read_fmx,
    read_head_file,
    write_checkpoint,
    write_fmx,
    write_head_file,
)
from .training import (
    Metrics,
    Milestone,
    RunArchive,
    TrainConfig,
    evaluate,
    load_run,
    milestone_policy,
    save_run,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "ClassSpec",
    "HeatmapGrid",
    "LabeledDataset",
    "LrSchedule",
    "Metrics",
    "Milestone",
    "MixtureSpec",
    "NetConfig",
    "NetParams",
    "OPTIMIZERS",
    "PCAModel",
    "PairCoords",
    "ProfileRow",
    "ResistorSet",
    "RunArchive",
    "SpectrumReport",
    "SvdResult",
    "ToolkitError",
    "TrainConfig",
    "acm_spectrum",
    "autocorrelation",
    "center_trajectory",
    "class_centers",
    "decision_space",
    "evaluate",
    "explained_variances",
    "first_component_sufficiency",
    "fit_pair_plane",
    "forward",
    "gaussian_mixture",
    "heatmap",
    "init_params",
    "inverse_map",
    "load_run",
    "loss_and_grads",
    "make_optimizer",
    "milestone_policy",
    "numerical_rank",
    "optimizer_profile",
    "pair_matrix",
    "pca3_export",
    "pca_fit",
    "preset_schedule",
    "project",
    "read_checkpoint",
    "read_fmx",
    "read_head_file",
    "reference_spec",
    "resistor_overlap",
    "resistors",
    "save_run",
    "schedule_lr",
    "stabilize_signs",
    "svd",
    "sym_eig",
    "train",
    "train_test_split",
    "variance_evolution",
    "write_checkpoint",
    "write_fmx",
    "write_head_file",
]
