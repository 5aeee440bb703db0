"""Global numeric configuration.

A single epsilon controls every degeneracy guard in the package:
divisions, matrix pivots and window checks all compare magnitudes
against it. The default is 1e-12; the CLI honours the NOETHER_EPS
environment variable.
"""

_DEFAULT_EPSILON = 1e-12
_epsilon = _DEFAULT_EPSILON


def epsilon() -> float:
    return _epsilon


def set_epsilon(value: float) -> None:
    global _epsilon
    value = float(value)
    if not value > 0.0:
        raise ValueError("epsilon must be positive")
    _epsilon = value


def reset_epsilon() -> None:
    global _epsilon
    _epsilon = _DEFAULT_EPSILON
