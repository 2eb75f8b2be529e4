"""Frozen constants for the natural-scene-statistics scorers."""

# MSCN local normalisation
WINDOW_SIZE = 7
WINDOW_SIGMA = 7.0 / 6.0
MSCN_C = 1.0

# generalized-Gaussian shape search table
ALPHA_MIN = 0.2
ALPHA_MAX = 10.0
ALPHA_STEP = 0.001

MIN_FIT_SAMPLES = 100
DEGENERATE_ALPHA = 10.0
DEGENERATE_EPS = 1e-6

# BRISQUE
BRISQUE_MIN_DIM = 32
N_FEATURES_PER_SCALE = 18
N_FEATURES = 2 * N_FEATURES_PER_SCALE

# NIQE
NIQE_PATCH_SIZE = 96
NIQE_SHARPNESS_FRACTION = 0.75
# patches whose mean local deviation is below this (luminance units) count as flat
NIQE_MIN_SHARPNESS = 1e-3
NIQE_MIN_PRISTINE_IMAGES = 20
PSD_TOLERANCE = 1e-8

# PIQE
PIQE_MIN_DIM = 64
PIQE_BLOCK_SIZE = 16
PIQE_ACTIVITY_THRESHOLD = 0.1
PIQE_IMPAIRED_THRESHOLD = 0.1
PIQE_SEGMENT_LENGTH = 6
PIQE_C = 1.0

# luminance weights (ITU-R BT.601)
LUMA_WEIGHTS = (0.299, 0.587, 0.114)

SCORE_MIN = 0.0
SCORE_MAX = 100.0
