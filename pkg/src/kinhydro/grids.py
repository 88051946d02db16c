"""Velocity, space and collision-sphere discretizations plus weighted norms.

Velocity space is a midpoint-uniform tensor grid on [-v_max, v_max]^d with
an even number of points per axis, so the node set is symmetric under
v -> -v and never contains the origin.  Space is the 2*pi-periodic torus
sampled uniformly; the unit sphere carries a centrally symmetric quadrature
normalized to total mass one.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class VelocityGrid:
    """Truncated uniform velocity grid.

    Attributes
    ----------
    d : dimension (2 or 3)
    v_max : truncation radius per axis
    n_v : nodes per axis (even, >= 8 for production runs)
    nodes : (n_v**d, d) array of node coordinates
    weight : uniform quadrature cell volume (2*v_max/n_v)**d
    """

    d: int
    v_max: float
    n_v: int
    nodes: np.ndarray = field(repr=False)
    axis: np.ndarray = field(repr=False)
    dv: float
    weight: float

    @property
    def n_total(self):
        return self.n_v ** self.d

    @property
    def x0(self):
        """Coordinate of the first node on each axis."""
        return -self.v_max + 0.5 * self.dv

    def speed_sq(self):
        return np.sum(self.nodes ** 2, axis=1)

    def bracket(self):
        """<v> = sqrt(1 + |v|^2) at the nodes."""
        return np.sqrt(1.0 + self.speed_sq())


def build_velocity_grid(d, v_max, n_v, min_n=8):
    """Midpoint-uniform symmetric velocity grid on [-v_max, v_max]^d."""
    if d not in (2, 3):
        raise ValueError("velocity dimension must be 2 or 3")
    if n_v % 2 != 0:
        raise ValueError("n_v must be even: an odd grid breaks the v -> -v "
                         "symmetry used by the parity cancellations")
    if n_v < min_n:
        raise ValueError(f"n_v must be at least {min_n}")
    if v_max <= 0:
        raise ValueError("v_max must be positive")
    dv = 2.0 * v_max / n_v
    axis = -v_max + (np.arange(n_v) + 0.5) * dv
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    nodes = np.stack([m.ravel() for m in mesh], axis=1)
    return VelocityGrid(d=d, v_max=float(v_max), n_v=n_v,
                        nodes=np.ascontiguousarray(nodes), axis=axis,
                        dv=dv, weight=dv ** d)


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform grid on the torus of period 2*pi per axis."""

    d: int
    n_x: int
    points_axis: np.ndarray = field(repr=False)
    wavenumbers_axis: np.ndarray = field(repr=False)

    @property
    def n_total(self):
        return self.n_x ** self.d

    @property
    def cell_volume(self):
        return (2.0 * np.pi / self.n_x) ** self.d

    def shape(self):
        return (self.n_x,) * self.d

    def wave_vectors(self):
        """Integer wave vectors, shape (n_x,)*d + (d,), fft layout."""
        mesh = np.meshgrid(*([self.wavenumbers_axis] * self.d), indexing="ij")
        return np.stack(mesh, axis=-1)

    def xi_norm_sq(self):
        k = self.wave_vectors()
        return np.sum(k ** 2, axis=-1)

    def mesh(self):
        return np.meshgrid(*([self.points_axis] * self.d), indexing="ij")


def build_spatial_grid(d, n_x):
    if d not in (1, 2, 3):
        raise ValueError("spatial dimension must be 1, 2 or 3")
    if n_x < 2:
        raise ValueError("n_x must be at least 2")
    points = 2.0 * np.pi * np.arange(n_x) / n_x
    waves = np.fft.fftfreq(n_x, d=1.0 / n_x)
    return SpatialGrid(d=d, n_x=n_x, points_axis=points,
                       wavenumbers_axis=waves)


@dataclass(frozen=True)
class AngleQuadrature:
    """Quadrature on the unit sphere S^{d-1}, normalized to total mass one.

    Nodes are stored so that node k + n/2 is the antipode of node k; the
    collision kernels exploit this central symmetry by summing over the
    first half with doubled weights.
    """

    d: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    exact_degree: int

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    def half(self):
        """First half of the node set and doubled weights."""
        nh = self.n_nodes // 2
        return (np.ascontiguousarray(self.nodes[:nh]),
                np.ascontiguousarray(2.0 * self.weights[:nh]))


def build_angle_quadrature(d, n_sigma):
    """Uniform circle quadrature (d=2) or Gauss-Legendre x uniform product
    rule (d=3); both centrally symmetric and normalized to mass one."""
    if d == 2:
        if n_sigma % 2 != 0:
            raise ValueError("n_sigma must be even (central symmetry)")
        ang = 2.0 * np.pi * (np.arange(n_sigma) + 0.5) / n_sigma
        # reorder so that the second half is the antipodal image of the first
        ang = np.concatenate([ang[: n_sigma // 2],
                              ang[: n_sigma // 2] + np.pi])
        nodes = np.stack([np.cos(ang), np.sin(ang)], axis=1)
        weights = np.full(n_sigma, 1.0 / n_sigma)
        degree = n_sigma - 1
    elif d == 3:
        # product rule: Gauss-Legendre in the polar cosine, uniform azimuth;
        # sized so the total node count is close to the requested n_sigma
        n_pol = max(2, int(round(np.sqrt(n_sigma / 2.0))))
        n_az = 2 * n_pol
        xs, ws = np.polynomial.legendre.leggauss(n_pol)
        phi = 2.0 * np.pi * (np.arange(n_az) + 0.5) / n_az
        half_phi = phi[: n_az // 2]
        nodes, weights = [], []
        # second block is the antipodal image (c, phi) -> (-c, phi + pi) of
        # the first, in the same order, as required by half()
        for flip in (1.0, -1.0):
            for c, wc in zip(xs, ws):
                s = np.sqrt(1.0 - c * c)
                for p in half_phi:
                    ph = p if flip > 0 else p + np.pi
                    nodes.append([s * np.cos(ph), s * np.sin(ph), c * flip])
                    weights.append(wc / 2.0 / n_az)
        nodes = np.asarray(nodes)
        weights = np.asarray(weights)
        degree = min(2 * n_pol - 1, n_az - 1)
    else:
        raise ValueError("sphere dimension must be 2 or 3")
    weights = weights / weights.sum()
    return AngleQuadrature(d=d, nodes=np.ascontiguousarray(nodes),
                           weights=weights, exact_degree=degree)


def maxwellian(grid):
    """Standard centered Maxwellian (2*pi)^{-d/2} exp(-|v|^2/2) at the nodes."""
    return (2.0 * np.pi) ** (-grid.d / 2.0) * np.exp(-0.5 * grid.speed_sq())


_NU_CACHE = {}


def collision_frequency(grid, quad=None, mass_tol=0.01):
    """Hard-sphere collision frequency nu(v) = sum_* M(v_*) |v - v_*| w.

    The sphere measure is normalized, so no sigma factor appears.  Raises
    when the grid truncation leaves more than ``mass_tol`` of the Maxwellian
    mass outside (the quadrature would then be meaningless).
    """
    key = (grid.d, grid.v_max, grid.n_v)
    cached = _NU_CACHE.get(key)
    if cached is not None:
        return cached
    m = maxwellian(grid)
    mass = float(m.sum() * grid.weight)
    if abs(mass - 1.0) > mass_tol:
        raise ValueError(
            f"Maxwellian mass on the grid is {mass:.6f}; increase v_max "
            "or n_v so the truncation error drops below "
            f"{mass_tol:.0%}")
    mw = m * grid.weight
    nu = np.empty(grid.n_total)
    chunk = max(1, int(2 ** 22 // grid.n_total) or 1)
    for a in range(0, grid.n_total, chunk):
        b = min(a + chunk, grid.n_total)
        dist = np.linalg.norm(grid.nodes[a:b, None, :] - grid.nodes[None, :, :],
                              axis=2)
        nu[a:b] = dist @ mw
    nu.setflags(write=False)
    _NU_CACHE[key] = nu
    return nu


def collision_frequency_at(points, grid):
    """nu evaluated by the same quadrature at arbitrary velocities.

    points has shape (m, d); the grid nodes carry no value at v = 0, so the
    origin checks use this form.
    """
    m = maxwellian(grid) * grid.weight
    pts = np.atleast_2d(points)
    dist = np.linalg.norm(pts[:, None, :] - grid.nodes[None, :, :], axis=2)
    return dist @ m


def nu_bounds(nu, grid):
    """(nu0, nu1) with nu0 <v> <= nu <= nu1 <v> on the grid."""
    ratio = nu / grid.bracket()
    nu0 = float(ratio.min())
    nu1 = float(ratio.max())
    if nu0 <= 0:
        raise ValueError("collision frequency must be positive")
    return nu0, nu1


@dataclass(frozen=True)
class NormSpec:
    """Discrete surrogate of the weighted norms used throughout.

    flavor 'polynomial': || f <v>^alpha ||_{L^p_v H^s_x}
    flavor 'gaussian':   || f M^{-1/2} <v>^beta ||_{L^inf_v H^s_x}
    flavor 'nu':         polynomial flavor with the extra nu^{1/p} weight
    """

    flavor: str = "polynomial"
    p: float = 1.0
    alpha: float = 0.0
    beta: float = 0.0
    s: int = 2

    def __post_init__(self):
        if self.flavor not in ("polynomial", "gaussian", "nu"):
            raise ValueError(f"unknown norm flavor {self.flavor!r}")
        if self.flavor != "gaussian" and not (1.0 <= self.p):
            raise ValueError("p must lie in [1, inf]")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be nonnegative")
        if self.s < 0:
            raise ValueError("s must be nonnegative")


def sobolev_profile(data_xv, s_grid, s):
    """H^s_x norm of f(., v) for each velocity node.

    data_xv has shape (n_x**d, n_v**d); returns an (n_v**d,) profile.
    Fourier coefficients are normalized so a constant field has norm equal
    to its absolute value.
    """
    shp = s_grid.shape() + (data_xv.shape[1],)
    fhat = np.fft.fftn(data_xv.reshape(shp), axes=tuple(range(s_grid.d)))
    fhat /= s_grid.n_total
    w = (1.0 + s_grid.xi_norm_sq()) ** s
    prof = np.einsum("...v,...->v", np.abs(fhat) ** 2, w)
    return np.sqrt(prof)


def weighted_norm(field, spec):
    """Evaluate a NormSpec on a DistributionField (or raw (nx, nv) array
    paired with its grids via the field object)."""
    prof = sobolev_profile(field.data, field.s_grid, spec.s)
    grid = field.v_grid
    br = grid.bracket()
    if spec.flavor == "gaussian":
        m = maxwellian(grid)
        return float(np.max(prof * br ** spec.beta / np.sqrt(m)))
    wgt = br ** spec.alpha
    if spec.flavor == "nu":
        nu = collision_frequency(grid)
        wgt = wgt * nu ** (1.0 / spec.p) if np.isfinite(spec.p) else wgt
    if np.isinf(spec.p):
        return float(np.max(prof * br ** spec.alpha))
    return float((np.sum((prof * wgt) ** spec.p) * grid.weight) ** (1.0 / spec.p))
