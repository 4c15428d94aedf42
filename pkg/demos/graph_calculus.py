"""Graph calculus on a random geometric graph: inner products, deltas,
and the four Laplacian normalizations."""

import numpy as np

from rgglearn import (
    Box,
    LaplacianKind,
    build_graph,
    graph_delta,
    inner,
    laplacian_apply,
    make_density,
    make_kernel,
    pnorm,
    sample_points,
    weighted_mean,
)

box = Box([0, 0], [1, 1])
rho = make_density("constant", box)
pts = sample_points(box, rho, 400, seed=0)
g = build_graph(pts, 0.2, make_kernel("indicator", 2))
print("graph: n = %d, eps = %.2f, connected = %s" % (g.n, g.eps, g.connected))
print("degrees: min %.1f, mean %.1f, max %.1f"
      % (g.degrees.min(), g.degrees.mean(), g.degrees.max()))

# the delta at node x integrates to 1 under the (1/n) sum
d0 = graph_delta(7, g)
print("mean of delta = %.17g (should be 1)" % np.mean(d0.values))

rng = np.random.default_rng(1)
u = g.func(rng.normal(size=g.n))
v = g.func(rng.normal(size=g.n))
print("<u, v> = %.6f, |u|_2 = %.6f, (u)_deg = %.6f"
      % (inner(u, v), pnorm(u, 2), weighted_mean(u)))

# pairing u against a delta reads off the value at its node
print("<u, delta_7> = %.17g vs u(7) = %.17g" % (inner(u, d0), u.values[7]))

for kind in LaplacianKind:
    lu = laplacian_apply(u, kind)
    print("%-18s |Lu|_2 = %10.4f   <Lu, 1> = %9.2e"
          % (kind.name, pnorm(lu, 2), inner(lu, g.func(np.ones(g.n)))))

# the random-walk Laplacian and its adjoint pair up under <.,.>
a = inner(laplacian_apply(u, LaplacianKind.RandomWalk), v)
b = inner(u, laplacian_apply(v, LaplacianKind.RandomWalkAdjoint))
print("adjoint pairing gap = %.2e" % abs(a - b))
