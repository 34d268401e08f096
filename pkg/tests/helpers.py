"""Independent reference implementations used to pin expected test values.

These deliberately avoid the library's computational paths: the blur
reference is a direct dense 2-D convolution over an explicitly padded
array, and the denoiser reference evaluates naive (unshifted)
exponentials in 50-digit arithmetic.
"""

import math

import mpmath
import numpy as np


def dense_gaussian_reference(field: np.ndarray, sigma: float) -> np.ndarray:
    """Direct O(n^2 k^2) convolution with a jointly normalized 2-D kernel."""
    radius = math.ceil(3.0 * sigma)
    offsets = np.arange(-radius, radius + 1, dtype=float)
    kernel_1d = np.exp(-0.5 * (offsets / sigma) ** 2)
    kernel = np.outer(kernel_1d, kernel_1d)
    kernel /= kernel.sum()
    padded = np.pad(field, radius, mode="reflect")
    height, width = field.shape
    out = np.zeros_like(field, dtype=float)
    size = 2 * radius + 1
    for i in range(height):
        for j in range(width):
            window = padded[i : i + size, j : j + size]
            out[i, j] = float((kernel * window).sum())
    return out


def mp_posterior_eps(images: np.ndarray, z_t: np.ndarray, alpha_bar: float) -> np.ndarray:
    """Posterior-mean noise estimate with naive exponentials at 50 digits."""
    with mpmath.workdps(50):
        scale = mpmath.sqrt(alpha_bar)
        variance = mpmath.mpf(1) - alpha_bar
        flat = [img.ravel() for img in images]
        z = z_t.ravel()
        raw = []
        for x in flat:
            d2 = float(((z - float(scale) * x) ** 2).sum())
            raw.append(mpmath.exp(-mpmath.mpf(d2) / (2 * variance)))
        total = mpmath.fsum(raw)
        weights = [r / total for r in raw]
        x0 = np.zeros_like(z)
        for w, x in zip(weights, flat):
            x0 += float(w) * x
        eps = (z - float(scale) * x0) / float(mpmath.sqrt(variance))
    return eps.reshape(z_t.shape)
