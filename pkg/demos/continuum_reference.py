"""Finite-difference reference solver for the weighted Poisson equation:
Green's functions, point sources, and mollified sources."""

import numpy as np

from rgglearn import (
    Box,
    GridFunction,
    SourceSpec,
    build_grid,
    greens_function,
    interpolate_at,
    make_density,
    solve_weighted_poisson,
)

box = Box([0, 0], [1, 1])
rho = make_density("affine", box, slope=0.8)
grid = build_grid(box, 1.0 / 128, rho)
print("grid: h = 1/%d, %d cells" % (round(1 / grid.h), grid.n_cells))

# snap source locations to cell centers so deposits are exact
snap = lambda x: tuple(grid.axes[i][grid.cell_of(x)[i]] for i in range(2))
y1, y2 = snap((0.3, 0.5)), snap((0.7, 0.5))
s = SourceSpec(np.array([y1, y2]), np.array([1.0, -1.0]))

u = solve_weighted_poisson(grid, s, tol=1e-10)
print("two-point solution: min %.4f, max %.4f" % (u.values.min(), u.values.max()))
probe = np.array([[0.3, 0.5], [0.5, 0.5], [0.7, 0.5]])
print("values along the axis:", np.round(interpolate_at(u, probe), 4))

# superposition of Green's functions reproduces the solution
gf1 = greens_function(grid, y1)
gf2 = greens_function(grid, y2)
gap = np.max(np.abs(u.values - (gf1.values - gf2.values)))
print("superposition gap %.2e" % gap)

# replacing the deltas with radial bumps perturbs u at rate radius^2
mesh = np.meshgrid(*grid.axes, indexing="ij")
for radius in (0.04, 0.08, 0.16):
    f = np.zeros(grid.shape)
    for y, coef in zip((y1, y2), (1.0, -1.0)):
        r2 = sum((mm - yy) ** 2 for mm, yy in zip(mesh, y)) / radius**2
        q = np.maximum(0.0, 1.0 - r2) ** 2
        f += coef * q / (q.sum() * grid.h**2)
    ub = solve_weighted_poisson(grid, GridFunction(grid, f), tol=1e-10)
    l1 = np.abs(ub.values - u.values).sum() * grid.h**2
    print("radius %.2f   L1 gap %.3e   gap / radius^2 %.3f"
          % (radius, l1, l1 / radius**2))
