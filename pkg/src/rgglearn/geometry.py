"""Domains, densities, kernel profiles, point sampling, and geometric
graph construction.

A random geometric graph is built from n i.i.d. samples of a density rho
on a bounded domain by connecting points within distance eps, weighted by
a rescaled radial kernel

    w_xy = eps^{-d} eta(|x - y| / eps).

Kernel profiles are normalized to unit mass over the unit ball and carry
their second-moment constant sigma_eta = int |z_1|^2 eta(|z|) dz, computed
by radial quadrature.
"""

import numpy as np
import scipy.sparse as sparse
from scipy.integrate import simpson

from .graph_core import Graph

# unit-ball volumes omega_d for d = 1, 2, 3
BALL_VOLUME = {1: 2.0, 2: np.pi, 3: 4.0 * np.pi / 3.0}


class Box:
    """Axis-aligned box domain."""

    name = "box"

    def __init__(self, lower, upper):
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise ValueError("lower and upper must be 1-d arrays of equal length")
        if not 1 <= self.lower.size <= 3:
            raise ValueError("dimension must be 1, 2, or 3")
        if np.any(self.upper <= self.lower):
            raise ValueError("box must have positive volume")

    @property
    def d(self):
        return self.lower.size

    @property
    def volume(self):
        return float(np.prod(self.upper - self.lower))

    @property
    def center(self):
        return 0.5 * (self.lower + self.upper)

    def bounding_box(self):
        return self.lower, self.upper

    def contains(self, pts):
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        ok = np.all((pts >= self.lower) & (pts <= self.upper), axis=1)
        return bool(ok[0]) if single else ok

    def boundary_distance(self, x):
        x = np.asarray(x, dtype=float)
        return float(min(np.min(x - self.lower), np.min(self.upper - x)))

    def ray_exit(self, x, dirs):
        """First exit time of the rays x + t*dirs from the box (x inside)."""
        x = np.asarray(x, dtype=float)
        dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
        with np.errstate(divide="ignore", invalid="ignore"):
            t_up = (self.upper - x) / dirs
            t_lo = (self.lower - x) / dirs
        t = np.where(dirs > 0, t_up, np.where(dirs < 0, t_lo, np.inf))
        return np.min(t, axis=1)

    def corners(self):
        grids = np.meshgrid(*[(self.lower[i], self.upper[i]) for i in range(self.d)],
                            indexing="ij")
        return np.stack([a.ravel() for a in grids], axis=1)

    def corner_angles(self, x):
        """Directions (angles, d=2 only) from x to the box corners."""
        if self.d != 2:
            raise ValueError("corner_angles is 2-d only")
        c = self.corners() - np.asarray(x, dtype=float)
        return np.arctan2(c[:, 1], c[:, 0])

    def integrate(self, f, n_axis=96):
        """Tensor Gauss-Legendre quadrature of f over the box."""
        nodes, weights = np.polynomial.legendre.leggauss(n_axis)
        axes, wts = [], []
        for i in range(self.d):
            a, b = self.lower[i], self.upper[i]
            axes.append(0.5 * (b - a) * nodes + 0.5 * (a + b))
            wts.append(0.5 * (b - a) * weights)
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        w = wts[0]
        for i in range(1, self.d):
            w = np.multiply.outer(w, wts[i])
        return float(np.sum(f(pts) * w.ravel()))


class Disk:
    """Disk domain (d = 2 only)."""

    name = "disk"

    def __init__(self, center, radius):
        self.center_pt = np.asarray(center, dtype=float)
        if self.center_pt.shape != (2,):
            raise ValueError("disk center must be a 2-d point")
        if radius <= 0:
            raise ValueError("disk radius must be positive")
        self.radius = float(radius)

    @property
    def d(self):
        return 2

    @property
    def volume(self):
        return float(np.pi * self.radius**2)

    @property
    def center(self):
        return self.center_pt

    def bounding_box(self):
        return self.center_pt - self.radius, self.center_pt + self.radius

    def contains(self, pts):
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        ok = np.linalg.norm(pts - self.center_pt, axis=1) <= self.radius
        return bool(ok[0]) if single else ok

    def boundary_distance(self, x):
        x = np.asarray(x, dtype=float)
        return float(self.radius - np.linalg.norm(x - self.center_pt))

    def ray_exit(self, x, dirs):
        x = np.asarray(x, dtype=float)
        dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
        y = x - self.center_pt
        b = dirs @ y
        disc = b**2 + self.radius**2 - y @ y
        return -b + np.sqrt(np.maximum(disc, 0.0))

    def corner_angles(self, x):
        return np.empty(0)

    def integrate(self, f, nr=160, na=512):
        """Polar quadrature: Gauss-Legendre radially, trapezoid in angle."""
        nodes, weights = np.polynomial.legendre.leggauss(nr)
        r = 0.5 * self.radius * (nodes + 1.0)
        wr = 0.5 * self.radius * weights * r
        theta = np.linspace(0.0, 2 * np.pi, na, endpoint=False)
        e = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        pts = self.center_pt + r[:, None, None] * e[None, :, :]
        vals = f(pts.reshape(-1, 2)).reshape(nr, na)
        return float((2 * np.pi / na) * np.sum(vals.sum(axis=1) * wr))


class KernelProfile:
    """Radial weight profile
    ======

    Profile eta supported on [0,1], non-increasing, normalized so that
    int_{B(0,1)} eta(|z|) dz = 1, with second-moment constant

        sigma_eta = int_{B(0,1)} |z_1|^2 eta(|z|) dz
                  = omega_d int_0^1 r^{d+1} eta(r) dr.

    Fields
    ------
    name : str
        One of 'indicator', 'cone', 'bump'.
    d : int
        Ambient dimension (normalization depends on it).
    sigma_eta : float
    eta0 : float
        Peak value eta(0) > 0.
    """

    def __init__(self, name, d, shape, norm):
        self.name = name
        self.d = d
        self._shape = shape
        self._norm = norm
        r = np.linspace(0.0, 1.0, 20001)
        self.sigma_eta = BALL_VOLUME[d] * simpson(self.eta(r) * r ** (d + 1), x=r)
        self.eta0 = float(self.eta(np.array([0.0]))[0])

    def eta(self, t):
        """Evaluate the normalized profile at radii t (vectorized)."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        mask = t <= 1.0
        out[mask] = self._norm * self._shape(t[mask])
        return out

    def eta_eps(self, r, eps):
        """Rescaled profile eta_eps(r) = eps^{-d} eta(r/eps)."""
        return eps ** (-self.d) * self.eta(np.asarray(r, dtype=float) / eps)


def _bump_shape(t):
    out = np.zeros_like(t)
    inside = t < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - t[inside] ** 2))
    return out


def make_kernel(variant, d):
    """Construct a normalized kernel profile
    ======

    Parameters
    ----------
    variant : str
        'indicator' (constant on [0,1]), 'cone' ((1-t)_+), or 'bump'
        (smooth compactly supported exp(-1/(1-t^2))).
    d : int
        Dimension in {1,2,3}.

    Returns
    -------
    KernelProfile
    """
    if d not in (1, 2, 3):
        raise ValueError("unsupported dimension %r" % (d,))
    wd = BALL_VOLUME[d]
    if variant == "indicator":
        shape = lambda t: np.ones_like(t)
        norm = 1.0 / wd
    elif variant == "cone":
        shape = lambda t: 1.0 - t
        norm = (d + 1) / wd
    elif variant == "bump":
        shape = _bump_shape
        r = np.linspace(0.0, 1.0, 20001)
        mass = d * wd * simpson(_bump_shape(r) * r ** (d - 1), x=r)
        norm = 1.0 / mass
    else:
        raise ValueError("unknown kernel variant %r" % (variant,))
    return KernelProfile(variant, d, shape, norm)


class DensityModel:
    """Normalized sampling density on a domain.

    evaluate() returns rho with int_Omega rho = 1; rho_min and rho_max are
    valid pointwise bounds and lipschitz bounds the gradient norm.
    """

    def __init__(self, name, domain, base, base_min, base_max, base_lip):
        self.name = name
        self.domain = domain
        self._base = base
        self._z = domain.integrate(base)
        self.rho_min = base_min / self._z
        self.rho_max = base_max / self._z
        self.lipschitz = base_lip / self._z

    def evaluate(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return self._base(pts) / self._z


def make_density(name, domain, slope=0.8, amplitude=1.0, width=None):
    """Construct a density model
    ======

    Parameters
    ----------
    name : str
        'constant', 'affine' (linear ramp along the first axis), or
        'bump' (Gaussian bump at the domain center, Lipschitz).
    domain : Box or Disk
    slope : float
        Affine ramp steepness, must be > -1.
    amplitude, width : float
        Bump parameters; width defaults to 0.2 x the smallest extent.

    Returns
    -------
    DensityModel
    """
    lo, up = domain.bounding_box()
    if name == "constant":
        return DensityModel("constant", domain, lambda p: np.ones(p.shape[0]),
                            1.0, 1.0, 0.0)
    if name == "affine":
        if slope <= -1:
            raise ValueError("affine slope must be > -1 to stay positive")
        extent = up[0] - lo[0]
        base = lambda p: 1.0 + slope * (p[:, 0] - lo[0]) / extent
        bmin, bmax = sorted((1.0, 1.0 + slope))
        return DensityModel("affine", domain, base, bmin, bmax, abs(slope) / extent)
    if name == "bump":
        c = domain.center
        w = width if width is not None else 0.2 * float(np.min(up - lo))
        base = lambda p: 1.0 + amplitude * np.exp(
            -np.sum((p - c) ** 2, axis=1) / (2 * w**2))
        if isinstance(domain, Box):
            rmax = np.max(np.linalg.norm(domain.corners() - c, axis=1))
        else:
            rmax = domain.radius + np.linalg.norm(c - domain.center)
        bmin = 1.0 + amplitude * np.exp(-rmax**2 / (2 * w**2))
        bmax = 1.0 + amplitude
        lip = amplitude * np.exp(-0.5) / w
        return DensityModel("bump", domain, base, bmin, bmax, lip)
    raise ValueError("unknown density %r" % (name,))


def sample_points(domain, density, n, seed, min_acceptance=1e-3):
    """Draw i.i.d. points from a density by rejection sampling
    ======

    Proposes uniformly on the domain's bounding box and accepts with
    probability rho(x)/rho_max; deterministic for a fixed seed.

    Parameters
    ----------
    domain : Box or Disk
    density : DensityModel
    n : int
        Number of points, >= 2.
    seed : int
    min_acceptance : float
        Guard threshold; an observed acceptance rate below it raises
        RuntimeError (misconfigured density).

    Returns
    -------
    (n,d) array
    """
    if n < 2:
        raise ValueError("need n >= 2 points")
    rng = np.random.default_rng(seed)
    lo, up = domain.bounding_box()
    d = domain.d
    chunks = []
    accepted = 0
    proposed = 0
    chunk = max(1024, int(n))
    while accepted < n:
        x = lo + (up - lo) * rng.random((chunk, d))
        u = rng.random(chunk)
        vals = np.zeros(chunk)
        inside = domain.contains(x)
        vals[inside] = density.evaluate(x[inside])
        acc = u * density.rho_max <= vals
        chunks.append(x[acc])
        accepted += int(acc.sum())
        proposed += chunk
        if accepted / proposed < min_acceptance:
            raise RuntimeError(
                "rejection acceptance rate %.2e below %.2e; density envelope "
                "is misconfigured" % (accepted / proposed, min_acceptance))
    return np.concatenate(chunks, axis=0)[:n]


def _forward_offsets(d):
    # offsets into {-1,0,1}^d that are lexicographically positive, so each
    # ordered cell pair is visited exactly once
    offs = []
    grids = np.meshgrid(*([(-1, 0, 1)] * d), indexing="ij")
    for o in np.stack([g.ravel() for g in grids], axis=1):
        nz = np.nonzero(o)[0]
        if nz.size and o[nz[0]] > 0:
            offs.append(o)
    return np.array(offs, dtype=np.int64)


def build_graph(points, eps, kernel, seed=None):
    """Build the eps-neighborhood geometric graph
    ======

    Connects all pairs within distance eps using uniform-cell binning with
    cell side eps (exact pairwise distances, no approximation), and stores
    self-weights w_xx = eta_eps(0).

    Parameters
    ----------
    points : (n,d) array
    eps : float
        Bandwidth; n * eps^d >= 1 is required.
    kernel : KernelProfile
    seed : int or None
        Recorded in the graph metadata.

    Returns
    -------
    Graph
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] == 0:
        raise ValueError("empty or malformed point list")
    n, d = points.shape
    if d != kernel.d:
        raise ValueError("kernel dimension %d does not match points (%d)" % (kernel.d, d))
    if eps <= 0:
        raise ValueError("eps must be positive")
    if n * eps**d < 1.0:
        raise ValueError("n * eps^d = %.3g < 1; graph too sparse to be meaningful"
                         % (n * eps**d,))

    lo = points.min(axis=0)
    cells = np.floor((points - lo) / eps).astype(np.int64)
    shape = cells.max(axis=0) + 1
    flat = np.ravel_multi_index(tuple(cells.T), tuple(shape))
    order = np.argsort(flat, kind="stable")
    sorted_flat = flat[order]
    uniq, starts = np.unique(sorted_flat, return_index=True)
    ends = np.append(starts[1:], n)
    span = {int(f): (int(s), int(e)) for f, s, e in zip(uniq, starts, ends)}
    strides = np.array([int(np.prod(shape[i + 1:])) for i in range(d)], dtype=np.int64)
    offsets = _forward_offsets(d)

    rows, cols, dists = [], [], []

    def _collect(ia, ib, cross):
        # pairwise distances between two index blocks, chunked to bound memory
        pa = points[ia]
        step = max(1, int(4e6) // max(1, ib.size))
        for s in range(0, ia.size, step):
            block = pa[s:s + step]
            dd = np.sqrt(np.sum((block[:, None, :] - points[ib][None, :, :]) ** 2, axis=2))
            if cross:
                sel = dd <= eps
                r, c = np.nonzero(sel)
            else:
                r, c = np.triu_indices(block.shape[0], k=1, m=ib.size)
                keep = dd[r, c] <= eps
                r, c = r[keep], c[keep]
            if r.size:
                a = ia[s:s + step][r]
                b = ib[c]
                rows.append(np.minimum(a, b))
                cols.append(np.maximum(a, b))
                dists.append(dd[r, c] if cross else
                             np.sqrt(np.sum((points[a] - points[b]) ** 2, axis=1)))

    for f, (s0, e0) in span.items():
        ia = order[s0:e0]
        _collect(ia, ia, cross=False)
        coords = np.array(np.unravel_index(f, tuple(shape)))
        for o in offsets:
            nb = coords + o
            if np.any(nb < 0) or np.any(nb >= shape):
                continue
            fnb = int(nb @ strides)
            if fnb in span:
                s1, e1 = span[fnb]
                _collect(ia, order[s1:e1], cross=True)

    if rows:
        i = np.concatenate(rows)
        j = np.concatenate(cols)
        dv = np.concatenate(dists)
        w = kernel.eta_eps(dv, eps)
        keep = w > 0
        upper = sparse.coo_matrix((w[keep], (i[keep], j[keep])), shape=(n, n))
    else:
        upper = sparse.coo_matrix((n, n))
    diag = np.full(n, eps ** (-d) * kernel.eta0)
    return Graph(points, upper, diag, eps, kernel=kernel, seed=seed)


def closest_point(x, g):
    """Index of the graph node closest to x; ties break to the smallest index."""
    x = np.asarray(x, dtype=float)
    return int(np.argmin(np.linalg.norm(g.points - x, axis=1)))


def save_points(points, path):
    """Write points as CSV with header x0,...,x{d-1}."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    header = ",".join("x%d" % i for i in range(points.shape[1]))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in points:
            fh.write(",".join("%.17g" % c for c in row) + "\n")


def load_points(path):
    """Read a points CSV written by save_points."""
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
