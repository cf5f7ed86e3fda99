"""Manufactured elastodynamics solutions and their body loads.

Each case is an analytic displacement family parametrized by a scalar alpha.
Loads are not hand-coded: they are derived numerically from the governing
equation f = u_tt - div(sigma) using Richardson-extrapolated central
differences (base step 1e-3, two extrapolation levels).  Nonlinear cases use
the strain-dependent Young's modulus E(eps) = 5 / sqrt(20 + ||eps||_F).
"""

from dataclasses import dataclass, replace
from typing import Callable, Union

import numpy as np

from .fem import elasticity_matrix_2d, elasticity_matrix_3d

FD_BASE_STEP = 1e-3

YoungLaw = Union[float, Callable[[np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class ManufacturedCase:
    """Analytic displacement family with its constitutive law.

    ``displacement(t, X, alpha)`` maps points (m, dimension) to displacements
    of the same shape.  ``young`` is either a constant modulus or a callable
    of Voigt strain rows (the nonlinear law).
    """

    label: str
    dimension: int
    displacement: Callable[[float, np.ndarray, float], np.ndarray]
    young: YoungLaw = 1.0
    poisson: float = 0.25

    @property
    def is_nonlinear(self) -> bool:
        return callable(self.young)


# --- displacement families -------------------------------------------------

def _disp_e1(t, x, alpha):
    ph = np.pi * (x[:, 0] + alpha * x[:, 1])
    return np.column_stack([np.sin(ph) * np.cos(alpha * t),
                            np.cos(ph) * np.sin(alpha * t)])


def _disp_e2(t, x, alpha):
    den = 1.0 + alpha + t**2
    xx, yy = x[:, 0] ** 2, x[:, 1] ** 2
    return np.column_stack([np.exp((-t * xx + yy) / den),
                            np.exp((t * xx - yy) / den)])


def _disp_e3(t, x, alpha):
    xx, yy = x[:, 0], x[:, 1]
    s = t + 0.5
    return np.column_stack([xx**3 + yy**2 * s**1.5 + xx * yy * alpha,
                            xx**2 + yy**3 * s**1.1 + xx * yy * alpha])


def _disp_ed1(t, x, alpha):
    ph = np.pi * (x[:, 0] + alpha * x[:, 1] + 0.5 * (1.0 + alpha) * x[:, 2])
    c, s = np.cos(alpha * t), np.sin(alpha * t)
    return np.column_stack([np.sin(ph) * c, np.cos(ph) * s, -np.cos(ph) * s])


def _disp_ed2(t, x, alpha):
    den = 1.0 + alpha + t**2
    xx, yy, zz = x[:, 0] ** 2, x[:, 1] ** 2, x[:, 2] ** 2
    return np.column_stack([np.exp((-t * xx + yy + zz) / den),
                            np.exp((t * xx - yy + zz) / den),
                            np.exp((t * xx + yy - zz) / den)])


def _disp_ed3(t, x, alpha):
    xx, yy, zz = x[:, 0], x[:, 1], x[:, 2]
    s = t + 0.5
    r = np.sqrt(s)
    u0 = xx**3 + yy**2 * s**1.5 + xx * yy * alpha + r * zz**2 + zz * (xx + yy) * alpha
    u1 = xx**2 + yy**3 * s**1.1 - xx * yy * alpha + r * zz**2 + zz * (xx - yy) * alpha
    u2 = xx**2 + yy**2 * s**1.1 + xx * yy * alpha + r * zz**3 + zz * (yy - xx) * alpha
    return np.column_stack([u0, u1, u2])


def frobenius_norm(eps: np.ndarray) -> np.ndarray:
    """Tensor Frobenius norm of Voigt strain rows.

    Voigt shear entries are engineering strains gamma = 2 eps_ij; the tensor
    norm counts each off-diagonal pair as 2 (gamma/2)^2 = gamma^2 / 2.
    """
    eps = np.atleast_2d(eps)
    if eps.shape[1] == 3:
        sq = eps[:, 0] ** 2 + eps[:, 1] ** 2 + 0.5 * eps[:, 2] ** 2
    elif eps.shape[1] == 6:
        sq = (eps[:, 0] ** 2 + eps[:, 1] ** 2 + eps[:, 2] ** 2
              + 0.5 * (eps[:, 3] ** 2 + eps[:, 4] ** 2 + eps[:, 5] ** 2))
    else:
        raise ValueError(f"Voigt strain must have 3 or 6 columns, got {eps.shape}")
    return np.sqrt(sq)


def young_modulus(eps: np.ndarray) -> np.ndarray:
    """Strain-dependent modulus E(eps) = 5 / sqrt(20 + ||eps||_F)."""
    return 5.0 / np.sqrt(20.0 + frobenius_norm(eps))


CASES: dict[str, ManufacturedCase] = {}
for _label, _dim, _disp in [
    ("e1", 2, _disp_e1), ("e2", 2, _disp_e2), ("e3", 2, _disp_e3),
    ("ed1", 3, _disp_ed1), ("ed2", 3, _disp_ed2), ("ed3", 3, _disp_ed3),
]:
    CASES[_label] = ManufacturedCase(label=_label, dimension=_dim, displacement=_disp)
for _src in ("e1", "e2", "e3"):
    _n = "n" + _src[1:]
    CASES[_n] = replace(CASES[_src], label=_n, young=young_modulus)


def get_case(label: str) -> ManufacturedCase:
    try:
        return CASES[label]
    except KeyError:
        raise ValueError(f"unknown solution label {label!r}; "
                         f"known: {sorted(CASES)}") from None


# --- alpha parameter split ---------------------------------------------------

@dataclass(frozen=True)
class AlphaSplit:
    train: tuple[float, ...]
    val: tuple[float, ...]
    test: tuple[float, ...]

    def __post_init__(self):
        sets = [set(self.train), set(self.val), set(self.test)]
        if (sets[0] & sets[1]) or (sets[0] & sets[2]) or (sets[1] & sets[2]):
            raise ValueError("train/val/test alphas must be pairwise disjoint")
        if not (self.train and self.val and self.test):
            raise ValueError("all three alpha sets must be non-empty")


def default_alpha_split() -> AlphaSplit:
    """Benchmark split: train on a 0.1 grid, hold out fixed val/test values.

    Test alphas 0.7 and 1.5 interpolate the training range; -0.5 and 2.5
    extrapolate it.
    """
    test = (-0.5, 0.7, 1.5, 2.5)
    val = (0.8, 1.1)
    held_out = set(test) | set(val)
    train = tuple(i / 10 for i in range(1, 21) if i / 10 not in held_out)
    return AlphaSplit(train=train, val=val, test=test)


# --- numerical differentiation ----------------------------------------------

def _richardson(d0: np.ndarray, d1: np.ndarray, d2: np.ndarray) -> np.ndarray:
    """Two-level Richardson extrapolation of an O(h^2) difference at h, h/2, h/4."""
    a1 = (4.0 * d1 - d0) / 3.0
    a2 = (4.0 * d2 - d1) / 3.0
    return (16.0 * a2 - a1) / 15.0


def _diff_space(fun, x, axis, h0=FD_BASE_STEP):
    """d fun / d x_axis for vectorized fun: (m, dim) -> (m, p)."""
    def central(h):
        xp = x.copy()
        xp[:, axis] += h
        xm = x.copy()
        xm[:, axis] -= h
        return (fun(xp) - fun(xm)) / (2.0 * h)

    return _richardson(central(h0), central(h0 / 2.0), central(h0 / 4.0))


def _diff2_time(fun, t, h0=FD_BASE_STEP):
    """d^2 fun / d t^2 for fun: scalar t -> array."""
    f0 = fun(t)

    def second(h):
        return (fun(t + h) - 2.0 * f0 + fun(t - h)) / h**2

    return _richardson(second(h0), second(h0 / 2.0), second(h0 / 4.0))


# --- strain, stress, load -----------------------------------------------------

def _as_points(case: ManufacturedCase, x) -> tuple[np.ndarray, bool]:
    pts = np.asarray(x, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != case.dimension:
        raise ValueError(f"case {case.label} is {case.dimension}D, "
                         f"got points of shape {pts.shape}")
    return pts, single


def eval_displacement(case: ManufacturedCase, alpha: float, t: float, x) -> np.ndarray:
    pts, single = _as_points(case, x)
    out = case.displacement(t, pts, alpha)
    return out[0] if single else out


def eval_strain(case: ManufacturedCase, alpha: float, t: float, x) -> np.ndarray:
    """Voigt strain (2D: xx, yy, xy-engineering; 3D: xx, yy, zz, yz, zx, xy)."""
    pts, single = _as_points(case, x)
    u = lambda y: case.displacement(t, y, alpha)
    grad = [_diff_space(u, pts, j) for j in range(case.dimension)]
    if case.dimension == 2:
        eps = np.column_stack([grad[0][:, 0], grad[1][:, 1],
                               grad[1][:, 0] + grad[0][:, 1]])
    else:
        eps = np.column_stack([
            grad[0][:, 0], grad[1][:, 1], grad[2][:, 2],
            grad[2][:, 1] + grad[1][:, 2],
            grad[0][:, 2] + grad[2][:, 0],
            grad[1][:, 0] + grad[0][:, 1],
        ])
    return eps[0] if single else eps


def _stress(case: ManufacturedCase, alpha: float, t: float, pts: np.ndarray) -> np.ndarray:
    eps = eval_strain(case, alpha, t, pts)
    if case.dimension == 2:
        unit_c = elasticity_matrix_2d(1.0, case.poisson)
    else:
        unit_c = elasticity_matrix_3d(1.0, case.poisson)
    sig = eps @ unit_c.T
    if case.is_nonlinear:
        sig = sig * case.young(eps)[:, None]
    else:
        sig = sig * case.young
    return sig


def derive_load(case: ManufacturedCase, alpha: float, t: float, x) -> np.ndarray:
    """Body load f = u_tt - div(sigma) of the governing equation, numerically."""
    pts, single = _as_points(case, x)
    acc = _diff2_time(lambda s: case.displacement(s, pts, alpha), t)
    sig = lambda y: _stress(case, alpha, t, y)
    d = [_diff_space(sig, pts, j) for j in range(case.dimension)]
    if case.dimension == 2:
        div = np.column_stack([d[0][:, 0] + d[1][:, 2],
                               d[1][:, 1] + d[0][:, 2]])
    else:
        div = np.column_stack([d[0][:, 0] + d[2][:, 4] + d[1][:, 5],
                               d[1][:, 1] + d[2][:, 3] + d[0][:, 5],
                               d[2][:, 2] + d[1][:, 3] + d[0][:, 4]])
    f = acc - div
    return f[0] if single else f


def restrict_to_plane(case: ManufacturedCase, alpha: float, t: float, xy) -> tuple[np.ndarray, np.ndarray]:
    """In-plane (x, y) displacement and load of a 3D case on the z = 0 plane."""
    if case.dimension != 3:
        raise ValueError(f"case {case.label} is not 3D")
    pts = np.atleast_2d(np.asarray(xy, dtype=float))
    if pts.shape[1] != 2:
        raise ValueError(f"expected (m, 2) plane points, got {pts.shape}")
    emb = np.column_stack([pts, np.zeros(len(pts))])
    disp = case.displacement(t, emb, alpha)[:, :2]
    load = derive_load(case, alpha, t, emb)[:, :2]
    single = np.asarray(xy).ndim == 1
    return (disp[0], load[0]) if single else (disp, load)


def plane_displacement(case: ManufacturedCase) -> Callable[[float, np.ndarray, float], np.ndarray]:
    """(t, XY, alpha) -> (m, 2) displacement seen by the 2D solver.

    2D cases pass through; 3D cases are sampled on the z = 0 plane.
    """
    if case.dimension == 2:
        return lambda t, xy, alpha: case.displacement(t, np.atleast_2d(xy), alpha)

    def restricted(t, xy, alpha):
        pts = np.atleast_2d(xy)
        emb = np.column_stack([pts, np.zeros(len(pts))])
        return case.displacement(t, emb, alpha)[:, :2]

    return restricted


def plane_load(case: ManufacturedCase) -> Callable[[float, np.ndarray, float], np.ndarray]:
    """(t, XY, alpha) -> (m, 2) true body load seen by the 2D solver."""
    if case.dimension == 2:
        return lambda t, xy, alpha: derive_load(case, alpha, t, np.atleast_2d(xy))

    def restricted(t, xy, alpha):
        pts = np.atleast_2d(xy)
        emb = np.column_stack([pts, np.zeros(len(pts))])
        return derive_load(case, alpha, t, emb)[:, :2]

    return restricted
