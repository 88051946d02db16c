"""Hard-sphere collision operator, its linearization and the smooth-cutoff
splitting, entropy and conservation functionals, and the coercivity-regime
constants.

The bilinear operator is evaluated by direct quadrature over (v_*, sigma)
with multilinear interpolation at the off-grid post-collisional velocities;
off-grid points outside the node hull contribute zero.  All linear
operators derived from it (linearization, cutoff parts, Grad's gain term)
are assembled once per grid as dense velocity-space matrices by the same
quadrature, so applying them is a matrix product.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import backend
from ._py_kernels import theta_weight
from .grids import collision_frequency, maxwellian, nu_bounds
from .micromacro import machinery_for


@dataclass
class DistributionField:
    """Samples of a distribution on (x-grid) x (v-grid).

    data is (n_x**d, n_v**d), x index outermost.  role is 'absolute' for a
    nonnegative density F or 'fluctuation' for a signed perturbation f.
    """

    data: np.ndarray
    role: str
    s_grid: object
    v_grid: object

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=float)
        expected = (self.s_grid.n_total, self.v_grid.n_total)
        if self.data.shape != expected:
            raise ValueError(f"field shape {self.data.shape} does not match "
                             f"grids {expected}")
        if self.role not in ("absolute", "fluctuation"):
            raise ValueError(f"unknown role {self.role!r}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("field contains non-finite values")
        if self.role == "absolute":
            floor = -1e-9 * max(1.0, float(np.abs(self.data).max()))
            if self.data.min() < floor:
                raise ValueError("absolute density has negative values")

    def with_data(self, data, role=None):
        return DistributionField(data, role or self.role, self.s_grid,
                                 self.v_grid)

    def same_grids(self, other):
        return (self.v_grid.d == other.v_grid.d
                and self.v_grid.n_v == other.v_grid.n_v
                and self.v_grid.v_max == other.v_grid.v_max
                and self.s_grid.n_x == other.s_grid.n_x
                and self.s_grid.d == other.s_grid.d)


@dataclass(frozen=True)
class SplittingParams:
    """Cutoff scale of the smooth collision-kernel splitting."""

    delta: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")


def theta_delta(v, v_star, sigma, params):
    """Smooth cutoff used to split the linearized operator.

    Equals 1 on the inner plateau and 0 outside the stated support in the
    variables |v|, |v - v_*| and |cos| of the deflection angle; built as a
    product of quintic smoothstep ramps.
    """
    return float(theta_weight(np.asarray(v, dtype=float),
                              np.asarray(v_star, dtype=float),
                              np.asarray(sigma, dtype=float), params.delta))


class CollisionModel:
    """Collision operators bound to one (velocity grid, sphere quadrature).

    Caches the collision frequency, the matrix of the linearized operator
    and the cutoff-split matrices; exposes the bilinear operator and the
    operator applications used by the rest of the package.
    """

    def __init__(self, v_grid, quad, s_grid=None):
        if quad.d != v_grid.d:
            raise ValueError("sphere and velocity dimensions differ")
        self.v_grid = v_grid
        self.quad = quad
        self.s_grid = s_grid
        self.m = maxwellian(v_grid)
        self.nu = collision_frequency(v_grid, quad)
        self.nu0, self.nu1 = nu_bounds(self.nu, v_grid)
        self.sig_half, self.wsig2 = quad.half()
        self._mats = {}
        self._sym_eig = {}
        self.mm = machinery_for(v_grid)

    # -- bilinear operator ------------------------------------------------

    def q_data(self, f_data, g_data, conserve_fix=False):
        """Q(f, g) on raw (nx, nv) arrays; symmetric in its arguments."""
        g = self.v_grid
        f_t = np.ascontiguousarray(f_data.T)
        same = f_data is g_data
        g_t = f_t if same else np.ascontiguousarray(g_data.T)
        out = backend.q_bilinear(g.nodes, g.x0, g.dv, g.n_v, g.d, g.weight,
                                 self.sig_half, self.wsig2, self.m, f_t, g_t,
                                 same)
        out = np.ascontiguousarray(out.T)
        if conserve_fix:
            out -= out @ self.mm.proj.T
        return out

    def q_bilinear(self, f, g, conserve_fix=False):
        """Symmetrized collision operator of two fields."""
        if not f.same_grids(g):
            raise ValueError("collision arguments live on different grids")
        same = f is g or f.data is g.data
        out = self.q_data(f.data, f.data if same else g.data,
                          conserve_fix=conserve_fix)
        return f.with_data(out, role="fluctuation")

    # -- linear operator matrices -----------------------------------------

    def _assemble(self, mode, delta=0.0):
        g = self.v_grid
        return backend.assemble_linear(g.nodes, g.x0, g.dv, g.n_v, g.d,
                                       g.weight, self.sig_half, self.wsig2,
                                       self.m, mode, delta)

    def linearized_matrix(self):
        """Matrix of h -> 2 Q(M, h): the gain/local quadrature terms minus
        the collision-frequency diagonal."""
        key = ("L",)
        if key not in self._mats:
            full = self._assemble(backend.MODE_FULL)
            self._mats[key] = full - np.diag(self.nu)
        return self._mats[key]

    def a_delta_matrix(self, params):
        key = ("A", params.delta)
        if key not in self._mats:
            plateau = 1.0 / params.delta
            reach = float(np.linalg.norm(self.v_grid.nodes, axis=1).max())
            if plateau > reach:
                warnings.warn(
                    f"delta={params.delta} puts the |v| plateau edge "
                    f"{plateau:.1f} beyond the grid reach {reach:.1f}; the "
                    "velocity cutoff is inactive on this grid",
                    stacklevel=2)
            self._mats[key] = self._assemble(backend.MODE_A_DELTA,
                                             params.delta)
        return self._mats[key]

    def b_tilde_matrix(self, params):
        key = ("Bt", params.delta)
        if key not in self._mats:
            self._mats[key] = self._assemble(backend.MODE_B_TILDE,
                                             params.delta)
        return self._mats[key]

    def b_bar_matrix(self, params):
        key = ("Bb", params.delta)
        if key not in self._mats:
            self._mats[key] = self._assemble(backend.MODE_B_BAR, params.delta)
        return self._mats[key]

    def b_delta_matrix(self, params):
        """Complement part: B_delta = L - A_delta (includes the -nu term)."""
        return self.linearized_matrix() - self.a_delta_matrix(params)

    # -- operator applications ---------------------------------------------

    def apply_matrix(self, mat, f):
        return f.with_data(f.data @ mat.T, role="fluctuation")

    def linearized_l(self, h):
        """L h = 2 Q(M, h), via the precomputed quadrature matrix."""
        return self.apply_matrix(self.linearized_matrix(), h)

    def a_delta_apply(self, f, params):
        return self.apply_matrix(self.a_delta_matrix(params), f)

    def b_delta_apply(self, f, params):
        return self.apply_matrix(self.b_delta_matrix(params), f)

    def b_tilde_apply(self, f, params):
        return self.apply_matrix(self.b_tilde_matrix(params), f)

    def k_apply(self, h):
        """Grad's gain operator K h = L h + nu h."""
        out = h.data @ self.linearized_matrix().T + h.data * self.nu
        return h.with_data(out, role="fluctuation")

    # -- symmetrized spectral form ------------------------------------------

    def _scale(self):
        return np.sqrt(self.v_grid.weight / self.m)

    def sym_eig(self, which="L", params=None, deflate=None):
        """Eigendecomposition of the W-symmetrized operator.

        The raw quadrature matrix is conjugated into the L^2_v(M^{-1})
        metric, symmetrized (the antisymmetric part is pure quadrature
        error), optionally deflated so the collision invariants are an
        exact kernel, and clipped to be negative semidefinite.  Returns
        (eigenvalues, eigenvectors in the scaled coordinates, scale),
        with the largest spurious positive eigenvalue recorded.
        """
        if deflate is None:
            deflate = which == "L"
        key = (which, params.delta if params else None, deflate)
        if key in self._sym_eig:
            return self._sym_eig[key]
        if which == "L":
            mat = self.linearized_matrix()
        elif which == "B":
            mat = self.b_delta_matrix(params)
        else:
            raise ValueError(which)
        s = self._scale()
        sym = (s[:, None] * mat) / s[None, :]
        asym_rec = float(np.abs(sym - sym.T).max() / max(1.0, np.abs(sym).max()))
        sym = 0.5 * (sym + sym.T)
        if deflate:
            basis_s = s[:, None] * self.mm.basis
            qmat, _ = np.linalg.qr(basis_s)
            sym = sym - qmat @ (qmat.T @ sym)
            sym = sym - (sym @ qmat) @ qmat.T
        lam, vec = np.linalg.eigh(sym)
        pos_rec = float(lam.max())
        lam = np.minimum(lam, 0.0)
        res = {"eigenvalues": lam, "vectors": vec, "scale": s,
               "raw_asymmetry": asym_rec, "clipped_positive": pos_rec}
        self._sym_eig[key] = res
        return res

    def propagator(self, t_over_eps2, which="L", params=None):
        """Dense matrix of exp(t L / eps^2) (or B) in node coordinates."""
        e = self.sym_eig(which, params)
        lam, vec, s = e["eigenvalues"], e["vectors"], e["scale"]
        core = (vec * np.exp(t_over_eps2 * lam)) @ vec.T
        return (core / s[:, None]) * s[None, :]

    def sym_matrix(self, which="L", params=None):
        e = self.sym_eig(which, params)
        lam, vec, s = e["eigenvalues"], e["vectors"], e["scale"]
        core = (vec * lam) @ vec.T
        return (core / s[:, None]) * s[None, :]

    def spectral_gap(self):
        """Distance from the nonzero symmetrized spectrum to zero."""
        lam = self.sym_eig("L")["eigenvalues"]
        nz = lam[lam < -1e-10 * np.abs(lam).max()]
        return float(-nz.max())


# -- entropy and conservation ---------------------------------------------

def entropy(field):
    """H = sum F log F over both grids; F must be an absolute density."""
    if field.role != "absolute":
        raise ValueError("entropy is defined for absolute densities")
    f = field.data
    if f.min() < -1e-12 * max(1.0, f.max()):
        raise ValueError("entropy of a negative density is undefined")
    f = np.clip(f, 1e-300, None)
    w = field.v_grid.weight * field.s_grid.cell_volume
    return float(np.sum(f * np.log(f)) * w)


def collision_invariants(field):
    """Mass, momentum and energy per unit torus volume."""
    g = field.v_grid
    wx = field.s_grid.cell_volume / (2.0 * np.pi) ** field.s_grid.d
    col = field.data.sum(axis=0) * (g.weight * wx)
    mass = float(col.sum())
    momentum = col @ g.nodes
    energy = float(col @ g.speed_sq())
    return mass, momentum, energy


# -- regime constants -------------------------------------------------------

@dataclass(frozen=True)
class RegimeConstants:
    phi_p: float
    alpha_b: float
    alpha_q: float
    alpha_star: float
    sigma_b: float


def phi_p(p, alpha):
    """4 / ((alpha+2)^{1/p} (alpha-1)^{1/p'})."""
    pinv = 0.0 if np.isinf(p) else 1.0 / p
    qinv = 1.0 - pinv
    return 4.0 / ((alpha + 2.0) ** pinv * (alpha - 1.0) ** qinv)


def regime_constants(p, alpha, d, nu0, nu1):
    """Coercivity and bilinear-bound thresholds for the weight exponents.

    alpha_b solves (nu1/nu0)^{1/p'} phi_p(alpha + 1/p') = 1 (p < inf; the
    p = inf threshold is the closed form 1 + 4 nu1/nu0), alpha_q = 2 + d/p',
    alpha_star = max(alpha_q, alpha_b) + 1, and sigma_b is the coercivity
    margin at the requested alpha with the vanishing-delta remainder
    dropped.
    """
    if not (1.0 <= p):
        raise ValueError("p must lie in [1, inf]")
    if alpha <= 1.0:
        raise ValueError("alpha must exceed 1")
    ratio = nu1 / nu0
    pinv = 0.0 if np.isinf(p) else 1.0 / p
    qinv = 1.0 - pinv
    alpha_q = 2.0 + d * qinv
    if np.isinf(p):
        alpha_b = 1.0 + 4.0 * ratio
    elif qinv == 0.0:
        alpha_b = 2.0
    else:
        from scipy.optimize import brentq

        def crit(a):
            return ratio ** qinv * phi_p(p, a + qinv) - 1.0
        lo = 2.0 + qinv
        if crit(lo + 1e-12) <= 0.0:
            alpha_b = lo
        else:
            hi = 10.0 + 8.0 * ratio
            while crit(hi) > 0:
                hi *= 2.0
            alpha_b = brentq(crit, lo + 1e-12, hi, xtol=1e-12)
    sigma_b = 1.0 - ratio ** qinv * phi_p(p, alpha + qinv)
    if sigma_b <= 0.0:
        warnings.warn(f"sigma_B(p={p}, alpha={alpha}) = {sigma_b:.4f} <= 0: "
                      "alpha is below the coercivity threshold", stacklevel=2)
    alpha_star = max(alpha_q, alpha_b) + 1.0
    return RegimeConstants(phi_p(p, alpha), alpha_b, alpha_q, alpha_star,
                           sigma_b)


# -- coercivity of the scaled split operator --------------------------------

def _hs_weights(s_grid, s):
    return (1.0 + s_grid.xi_norm_sq()) ** s


def coercivity_form_parts(h, model, params, epsilon, alpha, s=2):
    """Pieces of the p = 2 coercivity form of the scaled split operator.

    Returns (collision_part, transport_part, nu_norm_sq): the weighted
    H^s_x pairings of B_delta h and of the scaled transport term against h,
    and the squared nu-weighted norm, all with weight <v>^{2 alpha}.  The
    operator is eps^{-2} (B_delta + eps v.grad_x); the transport pairing
    vanishes by skew-adjointness.
    """
    g = model.v_grid
    s_grid = h.s_grid
    shp = s_grid.shape() + (g.n_total,)
    axes = tuple(range(s_grid.d))
    hhat = np.fft.fftn(h.data.reshape(shp), axes=axes) / s_grid.n_total
    ws = _hs_weights(s_grid, s)
    wv = g.bracket() ** (2.0 * alpha) * g.weight

    bh = h.data @ model.b_delta_matrix(params).T
    bhat = np.fft.fftn(bh.reshape(shp), axes=axes) / s_grid.n_total
    pair = np.einsum("...v,...v,...->v", bhat, hhat.conj(), ws).real
    collision_part = float(pair @ wv) / epsilon ** 2

    kvec = s_grid.wave_vectors().astype(float)
    phase = 1j * np.tensordot(kvec, g.nodes.T, axes=([-1], [0]))
    that = phase * hhat
    tpair = np.einsum("...v,...v,...->v", that, hhat.conj(), ws).real
    transport_part = float(tpair @ wv) / epsilon
    nu_norm = np.einsum("...v,...v,...->v", hhat, hhat.conj(), ws).real
    nu_norm_sq = float((nu_norm * model.nu) @ wv)
    return collision_part, transport_part, nu_norm_sq


def coercivity_check(h, model, params, epsilon, alpha, s=2):
    """Ratio <B^eps h, h>_alpha / (-eps^{-2} ||h||^2_{E_nu}); positive when
    the split operator is coercive on h."""
    if float(np.abs(h.data).max()) == 0.0:
        raise ValueError("coercivity ratio of the zero field is undefined")
    col, tra, den = coercivity_form_parts(h, model, params, epsilon, alpha, s)
    return -(col + tra) / (den / epsilon ** 2)
