import math


def ib_lagrangian(i_xh: float, i_yh: float, beta: float) -> float:
    """Information-bottleneck Lagrangian I(X;H) - beta * I(H;Y); a diagnostic, never optimized."""
    if beta < 0:
        raise ValueError("beta must be >= 0")
    if not all(math.isfinite(v) for v in (i_xh, i_yh, beta)):
        raise ValueError("ib_lagrangian needs finite inputs")
    return i_xh - beta * i_yh
