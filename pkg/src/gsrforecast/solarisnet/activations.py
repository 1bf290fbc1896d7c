from __future__ import annotations

import numpy as np
from scipy.special import expit


def tansig(n):
    """``2 / (1 + exp(-2n)) - 1``, evaluated as ``tanh`` to stay finite for large ``|n|``."""
    return np.tanh(n)


def logsig(n):
    """``1 / (1 + exp(-n))``."""
    return expit(n)


def linear(n):
    return np.asarray(n, dtype=np.float64)


# Derivatives expressed through the activation output ``a``.
def _dtansig(a):
    return 1.0 - a * a


def _dlogsig(a):
    return a * (1.0 - a)


def _dlinear(a):
    return np.ones_like(a)


ACTIVATIONS = {
    "tansig": (tansig, _dtansig),
    "logsig": (logsig, _dlogsig),
    "linear": (linear, _dlinear),
}
