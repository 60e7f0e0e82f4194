import os
from dotenv import load_dotenv

load_dotenv()

# Parallelism / logging
QLS_THREADS = int(os.getenv("QLS_THREADS", "1"))
QLS_LOG_LEVEL = os.getenv("QLS_LOG_LEVEL", "INFO").upper()

# Grids
GRID_N = int(os.getenv("QLS_GRID_N", "4096"))
HYPOTHESIS_GRID_N = int(os.getenv("QLS_HYPOTHESIS_GRID_N", "512"))
PROFILE_NODES = int(os.getenv("QLS_PROFILE_NODES", "600"))
BACKGROUND_TOL = float(os.getenv("QLS_BACKGROUND_TOL", "0.05"))  # relative to r0, at both grid ends

# Traveling-wave branch
NEAR_SONIC_FRACTION = float(os.getenv("QLS_NEAR_SONIC_FRACTION", "0.95"))
MU_CAP_FRACTION = float(os.getenv("QLS_MU_CAP_FRACTION", "0.2"))
ROOT_XTOL = float(os.getenv("QLS_ROOT_XTOL", "1e-13"))

# Quadrature
QUAD_EPSABS = float(os.getenv("QLS_QUAD_EPSABS", "1e-13"))
QUAD_EPSREL = float(os.getenv("QLS_QUAD_EPSREL", "1e-11"))
QUAD_LIMIT = int(os.getenv("QLS_QUAD_LIMIT", "200"))

# Evolution
FIXED_POINT_TOL = float(os.getenv("QLS_FIXED_POINT_TOL", "1e-10"))
MAX_INNER_ITERS = int(os.getenv("QLS_MAX_INNER_ITERS", "25"))
ELLIPTICITY_FLOOR = float(os.getenv("QLS_ELLIPTICITY_FLOOR", "1e-3"))
OUTPUT_CADENCE = float(os.getenv("QLS_OUTPUT_CADENCE", "0.1"))
LEAKAGE_WARN = float(os.getenv("QLS_LEAKAGE_WARN", "1e-8"))

# Modulation fitting
CAPTURE_RADIUS = float(os.getenv("QLS_CAPTURE_RADIUS", "2.0"))
NEWTON_MAX_ITERS = int(os.getenv("QLS_NEWTON_MAX_ITERS", "50"))

# Caches
PROFILE_CACHE_SIZE = int(os.getenv("QLS_PROFILE_CACHE_SIZE", "64"))
