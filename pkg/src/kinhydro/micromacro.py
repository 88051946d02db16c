"""Moments, the macroscopic projector, Leray projection and the three-way
well-prepared / ill-prepared / microscopic splitting of initial data.

All projectors are Gram-corrected on the grid: quadrature breaks the exact
orthogonality of the collision-invariant family, so the projector matrix is
built as V (V^T W V)^{-1} V^T W in the discrete L^2_v(M^{-1}) metric.  This
makes idempotency, self-adjointness and the reconstruction identities hold
to machine precision instead of quadrature accuracy.
"""

from dataclasses import dataclass

import numpy as np

from .grids import maxwellian


@dataclass
class MacroFields:
    """(rho, u, theta) fields on the spatial grid, flattened x index."""

    rho: np.ndarray
    u: np.ndarray      # shape (n_x**d, d)
    theta: np.ndarray

    def __post_init__(self):
        if not (np.all(np.isfinite(self.rho)) and np.all(np.isfinite(self.u))
                and np.all(np.isfinite(self.theta))):
            raise ValueError("macroscopic fields must be finite")

    @classmethod
    def zero(cls, n_x_total, d):
        return cls(np.zeros(n_x_total), np.zeros((n_x_total, d)),
                   np.zeros(n_x_total))

    def stack(self):
        return np.concatenate([self.rho[:, None], self.u,
                               self.theta[:, None]], axis=1)

    @classmethod
    def from_stack(cls, arr):
        d = arr.shape[1] - 2
        return cls(arr[:, 0].copy(), arr[:, 1:1 + d].copy(),
                   arr[:, 1 + d].copy())


class MomentMachinery:
    """Grid-corrected moment algebra for one velocity grid.

    Provides the moment functionals, the rank d+2 projector onto the
    collision-invariant subspace, and the moment-exact infinitesimal
    Maxwellian lift (the right inverse of the moment map).
    """

    def __init__(self, v_grid):
        self.v_grid = v_grid
        d = v_grid.d
        m = maxwellian(v_grid)
        sq = v_grid.speed_sq()
        self.m = m
        # collision-invariant basis phi_j * M
        cols = [m] + [v_grid.nodes[:, a] * m for a in range(d)] + [sq * m]
        self.basis = np.stack(cols, axis=1)
        self.wm = v_grid.weight / m          # L^2_v(M^{-1}) quadrature weight
        gram = self.basis.T @ (self.wm[:, None] * self.basis)
        if np.linalg.cond(gram) > 1e12:
            raise np.linalg.LinAlgError(
                "degenerate velocity grid: moment Gram matrix is singular")
        self._gram_inv = np.linalg.inv(gram)
        # projector in velocity space, acting on the right of (nx, nv) data
        self.proj = self.basis @ self._gram_inv @ (self.wm[:, None] * self.basis).T
        # moment-map rows: rho, u_a, theta
        w = v_grid.weight
        rows = [np.full(v_grid.n_total, w)]
        rows += [v_grid.nodes[:, a] * w for a in range(d)]
        rows += [(sq - d) * (w / d)]
        self.moment_rows = np.stack(rows, axis=0)
        # infinitesimal Maxwellian raw columns (rho, u, theta order)
        lift = [m] + [v_grid.nodes[:, a] * m for a in range(d)] + [0.5 * (sq - d) * m]
        lift = np.stack(lift, axis=1)
        # correct so that moments(lift(c)) = c exactly on the grid
        a_mat = self.moment_rows @ lift
        self.lift = lift @ np.linalg.inv(a_mat)
        # coefficient-space metric induced by the corrected lift
        self.coeff_metric = self.lift.T @ (self.wm[:, None] * self.lift)

    def moments(self, data_xv):
        """Raw quadrature moments: (nx, d+2) array (rho, u, theta)."""
        return data_xv @ self.moment_rows.T

    def project(self, data_xv):
        return data_xv @ self.proj.T

    def lift_coeffs(self, coeffs):
        """Field of the infinitesimal Maxwellian with given (rho, u, theta)."""
        return coeffs @ self.lift.T


_MACHINERY = {}


def machinery_for(v_grid):
    key = (v_grid.d, v_grid.v_max, v_grid.n_v)
    mm = _MACHINERY.get(key)
    if mm is None:
        mm = MomentMachinery(v_grid)
        _MACHINERY[key] = mm
    return mm


def moments(f):
    """MacroFields (rho_f, u_f, theta_f) of a fluctuation field."""
    mm = machinery_for(f.v_grid)
    out = mm.moments(f.data)
    return MacroFields.from_stack(out)


def project_pi(f):
    """Macroscopic part Pi f; f - Pi f is the microscopic remainder."""
    mm = machinery_for(f.v_grid)
    return f.with_data(mm.project(f.data))


def infinitesimal_maxwellian(macro, v_grid, s_grid):
    """(rho + u.v + (|v|^2-d)/2 theta) M as a field; exact right inverse of
    the discrete moment map."""
    from .collision import DistributionField
    mm = machinery_for(v_grid)
    data = mm.lift_coeffs(macro.stack())
    return DistributionField(data, "fluctuation", s_grid, v_grid)


def _fft_x(arr, s_grid):
    shp = s_grid.shape() + arr.shape[1:]
    return np.fft.fftn(arr.reshape(shp), axes=tuple(range(s_grid.d)))


def _ifft_x(arr_hat, s_grid, lead_shape):
    out = np.fft.ifftn(arr_hat, axes=tuple(range(s_grid.d)))
    return out.real.reshape(lead_shape)


def leray_project(u, s_grid):
    """Fourier-multiplier projection onto divergence-free fields.

    u has shape (n_x**d, d); the mean mode passes through unchanged
    (constants on the torus are divergence-free).
    """
    d = s_grid.d
    uhat = _fft_x(u, s_grid)
    k = s_grid.wave_vectors().astype(float)
    k2 = np.sum(k ** 2, axis=-1)
    k2safe = np.where(k2 > 0, k2, 1.0)
    dot = np.sum(k * uhat, axis=-1) / k2safe
    mask = (k2 > 0).astype(float)
    uhat = uhat - (mask * dot)[..., None] * k
    return _ifft_x(uhat, s_grid, u.shape)


def split_initial(f):
    """Three-way split f = f_WP + f_IP + f_perp.

    The microscopic part is f - Pi f.  The well-prepared part applies, per
    Fourier mode, the Leray projection to u and the projection of
    (rho, theta) onto the Boussinesq line rho = -theta; both projections
    are orthogonal in the discrete L^2_v(M^{-1}) metric, so the three
    components are mutually orthogonal to machine precision, and the
    coefficient formula reduces to (2 rho - d theta)/(d + 2) up to
    quadrature corrections.
    """
    mm = machinery_for(f.v_grid)
    s_grid = f.s_grid
    d = f.v_grid.d
    macro = mm.project(f.data)
    perp = f.with_data(f.data - macro)

    coeffs = mm.moments(f.data)            # (nx, d+2), exact for macro part
    rho, u, theta = coeffs[:, 0], coeffs[:, 1:1 + d], coeffs[:, 1 + d]
    u_bar = leray_project(u, s_grid)
    # Boussinesq direction (-1, 0, 1) in the (rho, theta) block of the
    # coefficient metric; G is diag-ish: (1, I_d, d/2) up to quadrature
    g = mm.coeff_metric
    q = np.zeros(d + 2)
    q[0], q[-1] = -1.0, 1.0
    gq = g @ q
    denom = q @ gq
    # project (rho, 0, theta) onto the q line, G-orthogonally
    stack = np.concatenate([rho[:, None], np.zeros_like(u), theta[:, None]],
                           axis=1)
    amp = (stack @ gq) / denom
    rho_bar = amp * q[0]
    theta_bar = amp * q[-1]
    wp_coeffs = np.concatenate([rho_bar[:, None], u_bar, theta_bar[:, None]],
                               axis=1)
    f_wp = f.with_data(mm.lift_coeffs(wp_coeffs))
    f_ip = f.with_data(macro - f_wp.data)
    return f_wp, f_ip, perp
