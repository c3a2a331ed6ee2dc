from .loaders import TrajectoryFormat, load_msrc12, load_skeleton, load_trajectory6d, read_exclusion_list
from .samples import LabeledSample, load_dataset, load_sample, natural_key, save_dataset, save_sample
from .splits import SplitPlan, make_splits
from .synth import (
    NoiseSpec,
    SynthSpec,
    add_noise,
    apply_rigid_transform,
    random_rigid_transform,
    synth_dataset,
    synth_skeleton,
    synth_skeleton_dataset,
    synth_trajectory,
)
