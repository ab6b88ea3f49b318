"""Truncated Taylor arithmetic in the spectral parameter.

A series is an array whose leading axis holds the coefficients
c_k = f^(k)(λ0)/k!, k = 0..order. Trailing axes broadcast.
"""

import math

import numpy as np


def from_derivatives(derivs: np.ndarray) -> np.ndarray:
    """Divide the k-th λ-derivative by k!."""
    derivs = np.asarray(derivs)
    scale = np.array([1.0 / math.factorial(k) for k in range(derivs.shape[0])])
    return derivs * scale.reshape((-1,) + (1,) * (derivs.ndim - 1))


def mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cauchy product truncated to the shorter of the two orders."""
    a = np.asarray(a)
    b = np.asarray(b)
    order = min(a.shape[0], b.shape[0])
    shape = np.broadcast_shapes(a.shape[1:], b.shape[1:])
    out = np.zeros((order,) + shape, dtype=np.result_type(a, b, complex))
    for k in range(order):
        for m in range(k + 1):
            out[k] = out[k] + a[m] * b[k - m]
    return out


def det2(a11, a12, a21, a22) -> np.ndarray:
    """Series of a11*a22 - a12*a21."""
    return mul(a11, a22) - mul(a12, a21)


def constant(value, order: int) -> np.ndarray:
    out = np.zeros((order + 1,) + np.shape(value), dtype=complex)
    out[0] = value
    return out
