import numbers

import numpy as np


def check_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_nonneg_float(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    if not np.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be a finite nonnegative number, got {value}")
    return float(value)


def check_symmetric_tensor3(T, name="tensor", atol=1e-10):
    T = np.asarray(T)
    if T.ndim != 3 or len(set(T.shape)) != 1:
        raise ValueError(f"{name} must be a cubical order-3 array, got shape {T.shape}")
    scale = max(float(np.abs(T).max()), 1.0) if T.size else 1.0
    for axes in ((1, 0, 2), (0, 2, 1), (2, 1, 0)):
        if np.abs(T - T.transpose(axes)).max() > atol * scale:
            raise ValueError(f"{name} is not symmetric")
    return T


def seed_sequence(random_state):
    """Map ``None``/int/``SeedSequence`` to a ``SeedSequence``."""
    if isinstance(random_state, np.random.SeedSequence):
        return random_state
    if random_state is None:
        return np.random.SeedSequence()
    return np.random.SeedSequence(check_int(random_state, "random_state", minimum=0))
