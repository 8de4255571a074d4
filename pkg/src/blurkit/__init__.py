"""blurkit: data-parallel blur synthesis, interpolated rotation,
transparency-gated feature fusion and blur dataset augmentation."""

from .augment import AugmentConfig, YoloAnnotation, augment_bbox, augment_uniform, expand_dataset, parse_yolo_labels
from .bench import BenchCase, BenchReport, run_bench
from .blur import (BoxBlurSpec, GaussianSpec, MotionBlurSpec,
                   box_blur_boundary_safe, box_blur_reference,
                   gaussian_filter, gaussian_kernel, motion_blur)
from .fusion import (DrsGate, TransparencyMap, alpha_clamp, blur_level_estimate,
                     fuse, synthesize_fuzzy_feature, transparency_map)
from .pyramid import PyramidLevels, attention_spread, build_pyramid, dfrc_enhance
from .rotate import RegionClass, RotationSpec, classify_region, rotate, rotate_oracle
from .tensor import ImageU8, Tensor4D, global_avg_pool, linear_index, par_map_pixels

__version__ = "0.1.0"
