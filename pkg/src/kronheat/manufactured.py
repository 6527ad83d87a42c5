"""Manufactured smooth solution of the heat equation test problem.

The reference solution is a scaled Gaussian centered at (1/4, -1/4)
multiplied by sin(pi x1 x2),

    u = 5/(2 pi t) * exp(-((x1 - 1/4)^2 + (x2 + 1/4)^2)/(4 t)) * sin(pi x1 x2).

The Gaussian factor solves the heat equation exactly, so the source
f = dt u - laplace u involves only the cross terms with the sine factor.
The center lies inside the removed quadrant of the L-shaped domain, so u
is smooth up to the boundary and decays to zero as t -> 0.
"""

import numpy as np

__all__ = ["CENTER", "exact_u", "exact_dt", "exact_grad", "source_f"]

CENTER = (0.25, -0.25)


def _gaussian(x1, x2, t):
    # returns (G, r2) with G = 5/(2 pi t) exp(-r2 / (4 t)); the limit
    # t -> 0+ is zero away from the center, which is all of the domain
    r2 = (x1 - CENTER[0]) ** 2 + (x2 - CENTER[1]) ** 2
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        g = 5.0 / (2.0 * np.pi * t) * np.exp(-r2 / (4.0 * t))
        g = np.where(t > 0.0, g, 0.0)
    return g, r2


def exact_u(x1, x2, t):
    """Evaluate the manufactured solution; broadcasts over inputs."""
    x1, x2, t = np.broadcast_arrays(*map(np.asarray, (x1, x2, t)))
    g, _ = _gaussian(x1, x2, t)
    return g * np.sin(np.pi * x1 * x2)


def exact_dt(x1, x2, t):
    """Time derivative of the manufactured solution."""
    x1, x2, t = np.broadcast_arrays(*map(np.asarray, (x1, x2, t)))
    g, r2 = _gaussian(x1, x2, t)
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = r2 / (4.0 * t**2) - 1.0 / t
        factor = np.where(t > 0.0, factor, 0.0)
    return g * factor * np.sin(np.pi * x1 * x2)


def exact_grad(x1, x2, t):
    """Spatial gradient; returns the pair (du/dx1, du/dx2)."""
    x1, x2, t = np.broadcast_arrays(*map(np.asarray, (x1, x2, t)))
    g, _ = _gaussian(x1, x2, t)
    s = np.sin(np.pi * x1 * x2)
    c = np.pi * np.cos(np.pi * x1 * x2)
    with np.errstate(divide="ignore", invalid="ignore"):
        half_t = np.where(t > 0.0, 0.5 / t, 0.0)
    dg1 = -g * (x1 - CENTER[0]) * half_t
    dg2 = -g * (x2 - CENTER[1]) * half_t
    return dg1 * s + g * x2 * c, dg2 * s + g * x1 * c


def source_f(x1, x2, t):
    """Heat equation source dt u - laplace u.

    The Gaussian factor is annihilated by the heat operator, leaving

        f = G * (pi ((x1 - 1/4) x2 + (x2 + 1/4) x1) cos(pi x1 x2) / t
                 + pi^2 (x1^2 + x2^2) sin(pi x1 x2)).
    """
    x1, x2, t = np.broadcast_arrays(*map(np.asarray, (x1, x2, t)))
    g, _ = _gaussian(x1, x2, t)
    s = np.sin(np.pi * x1 * x2)
    c = np.cos(np.pi * x1 * x2)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_t = np.where(t > 0.0, 1.0 / t, 0.0)
    cross = (x1 - CENTER[0]) * x2 + (x2 - CENTER[1]) * x1
    return g * (np.pi * cross * c * inv_t + np.pi**2 * (x1**2 + x2**2) * s)
