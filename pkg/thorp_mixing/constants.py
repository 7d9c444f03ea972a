# thorp_mixing/constants.py
import os

TOOL_NAME = "thorp_mixing"
VERSION = "1.0.0"

# Convention tags embedded in every exported document
L1_CONVENTION = "L1-unhalved"
LOG_CONVENTION = "log-natural"
CONVENTION_TAGS = (L1_CONVENTION, LOG_CONVENTION)

# Capacity limits for exact work
MAX_EXACT_D = 3                  # n = 8, n! = 40320 ranks
MAX_EXACT_N_FACTORIAL = 40320
MAX_KERNEL_D = 2                 # dense n! x n! kernels (24 x 24)
MAX_PAIR_D = 6                   # n(n-1) = 4032 ordered pairs
MAX_SWEEP_D = 3                  # 2^(n/2 * d) = 4096 oracle tables
MAX_SINGLE_CARD_D = 12
CONTRACTION_MAX_SUPPORT = 256    # support cap for sampled mu at d = 3

# Tolerances
SIMPLEX_TOL = 1e-12
CHAIN_RULE_TOL = 1e-9
LEMMA_TOL = 1e-12
KERNEL_TOL = 1e-12

# Defaults for experiments
DEFAULT_MIX_THRESHOLD = 0.25
MAX_MIX_ROUNDS = 200
DEFAULT_PAIR_BLOCK = 256
POWER_ITERATION_STEPS = 500
PAIR_SLOPE_BOUND = 3.5          # expected ceiling on the log-log growth of pair mixing times; informational
ENTROPY_BOUND_TARGET = 0.125     # ENT <= 1/8 gives ||X - U|| <= 1/2 under the halved Pinsker bound

# Environment variables
SEED_ENV_VAR = "THORP_SEED"
LOG_LEVEL_ENV_VAR = "THORP_LOG_LEVEL"
DEFAULT_SEED = 0
DEFAULT_LOG_LEVEL = "WARNING"


def env_seed():
    """
    Resolve the master seed from the environment.

    Returns:
        int: Value of THORP_SEED, or DEFAULT_SEED when unset or blank.

    Raises:
        ValueError: If THORP_SEED is set to something other than an
            unsigned 64-bit integer.
    """
    raw = os.getenv(SEED_ENV_VAR, "").strip()
    if raw == "":
        return DEFAULT_SEED
    if not raw.isdigit() or int(raw) >= 2 ** 64:
        raise ValueError(f"{SEED_ENV_VAR} must be an unsigned 64-bit integer, got {raw!r}")
    return int(raw)


def env_log_level():
    """Log level name from THORP_LOG_LEVEL (defaults to WARNING)."""
    return os.getenv(LOG_LEVEL_ENV_VAR, DEFAULT_LOG_LEVEL).upper()
