"""Default constants used across the toolkit.

Every tunable the CLI exposes is defined here exactly once so that help
text, manifest defaults, and report config echoes stay in sync.
"""

# Patch-level discrepancy and pseudo ground truth
DELTA = 0.2                 # reliability threshold on normalized discrepancy
GRID_ROWS = 7
GRID_COLS = 7
D_WEIGHT_MAD = 0.9
D_WEIGHT_GRAD = 0.1

# Probability binarization (evaluator output -> binary evaluation map)
BINARIZE_THRESHOLD = 0.5

# Fusion soft blending
BLUR_KERNEL = 9
BLUR_SIGMA = 5.0

# Reference metrics
GRAD_SIGMA = 1.4
CONN_STEP = 0.1
CONN_TOLERANCE = 0.15
METRIC_SCALE = 1000.0       # MAD / MSE / Grad / Conn
DTSSD_SCALE = 100.0

# Losses
FOCAL_GAMMA = 2.0
FOCAL_ALPHA = 0.25
LAMBDA_EVAL = 0.1
PYRAMID_LEVELS = 5
LOSS_EPSILON = 1e-6
DICE_SMOOTH = 1.0
PROB_CLAMP = 1e-7

# Boundary band / non-reference metrics
BAND_WIDTH = 10

# Reference-frame sampling and dropout augmentation
WINDOW_SIZE = 8
MAX_BOUNDARY_PATCHES = 3
MAX_NONBOUNDARY_PATCHES = 1
PATCH_SIDE_MIN = 50
PATCH_SIDE_MAX = 100

# Mask curation
COVERAGE_THRESHOLD = 0.9
ASSIGN_THRESHOLD = 0.5
MIN_AREA_FRACTION = 0.3

# Correlation analysis
CORRELATION_BINS = 30
