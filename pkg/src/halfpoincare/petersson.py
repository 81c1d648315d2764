"""Quadrature on Gamma_0(N)\\H and on the whole half-plane, Petersson products,
Cauchy derivatives and the kernel identities they test."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import _kernels, config
from .arithmetic import DirichletCharacter, gamma0_index, gamma0_right_cosets
from .group_core import FOUR_PI, as_weight, falling_product, half_integer_power, theorem61_rhs
from .series import SeriesSpec, TruncationBudget, pfkm_seed, power_series_eval, series_function

FUNDAMENTAL = "fundamental-domain"
FULL_PLANE = "full-plane"


@dataclass
class QuadratureMesh:
    """Nodes and hyperbolic-area weights (dx dy / y^2).

    ``weights_check`` is an embedded lower-resolution rule on a subset of the
    same nodes (zero weight elsewhere) used for the error estimate; ``weights``
    is zero on the nodes only the check rule uses.
    """

    nodes: np.ndarray
    weights: np.ndarray
    weights_check: np.ndarray
    coverage: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=np.complex128)
        self.weights = np.asarray(self.weights, dtype=float)
        self.weights_check = np.asarray(self.weights_check, dtype=float)
        if not (self.nodes.shape == self.weights.shape == self.weights_check.shape):
            raise ValueError("nodes and weights must have the same length")
        if np.any(self.nodes.imag <= 0):
            raise ValueError("mesh nodes must lie in the upper half-plane")

    def __len__(self):
        return self.nodes.size

    def volume(self) -> float:
        return float(self.weights.sum())

    def expected_volume(self) -> float | None:
        return self.params.get("expected_volume")

    def to_json(self) -> dict:
        return {
            "coverage": self.coverage,
            "params": self.params,
            "nodes": [[z.real, z.imag] for z in self.nodes],
            "weights": self.weights.tolist(),
            "weights_check": self.weights_check.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "QuadratureMesh":
        nodes = np.array([complex(a, b) for a, b in data["nodes"]], dtype=np.complex128)
        return cls(nodes, np.array(data["weights"]), np.array(data["weights_check"]), data["coverage"], data.get("params", {}))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load(cls, path) -> "QuadratureMesh":
        return cls.from_json(json.loads(Path(path).read_text()))


def _gauss(n: int, a: float, b: float):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def _standard_domain_rule(ymax: float, res: int):
    """Tensor Gauss rule on {|x| <= 1/2, |z| >= 1, y <= ymax} in (x, log y)."""
    xs, wx = _gauss(res, -0.5, 0.5)
    pts, wts = [], []
    for x, w1 in zip(xs, wx):
        lo = math.log(math.sqrt(1.0 - x * x))
        us, wu = _gauss(res, lo, math.log(ymax))
        # dx dy / y^2 = dx du e^{-u}
        pts.append(x + 1j * np.exp(us))
        wts.append(w1 * wu * np.exp(-us))
    return np.concatenate(pts), np.concatenate(wts)


def fundamental_mesh(N: int, ymax: float = config.DEFAULT_YMAX, res: int = config.DEFAULT_QUAD_RES) -> QuadratureMesh:
    """Quadrature on a fundamental domain of Gamma_0(N), truncated near each cusp.

    The standard domain F of SL2(Z) is cut at Im z <= ymax and carried by the
    right coset representatives alpha_j of Gamma_0(N) in SL2(Z); the union of
    the alpha_j F is a fundamental domain.  The weights keep the invariant
    measure.  The check rule uses resolution res // 2.
    """
    if ymax <= 1.0 or res < 4:
        raise ValueError("need ymax > 1 and res >= 4")
    fine_z, fine_w = _standard_domain_rule(ymax, res)
    coarse_z, coarse_w = _standard_domain_rule(ymax, max(2, res // 2))
    base = np.concatenate([fine_z, coarse_z])
    w_main = np.concatenate([fine_w, np.zeros_like(coarse_w)])
    w_check = np.concatenate([np.zeros_like(fine_w), coarse_w])
    reps = gamma0_right_cosets(N)
    nodes = np.concatenate([(g.a * base + g.b) / (g.c * base + g.d) for g in reps])
    index = len(reps)
    params = {
        "N": N,
        "ymax": ymax,
        "res": res,
        "index": index,
        "expected_volume": index * (math.pi / 3.0 - 1.0 / ymax),
    }
    return QuadratureMesh(nodes, np.tile(w_main, index), np.tile(w_check, index), FUNDAMENTAL, params)


def _strip_rule(ymin: float, ymax: float, res: int, density: float, min_row: int):
    """x in [0, 1) periodic trapezoid with about density / y points per row; Gauss in log y."""
    us, wu = _gauss(res, math.log(ymin), math.log(ymax))
    pts, wts = [], []
    for u, w1 in zip(us, wu):
        y = math.exp(u)
        S = max(min_row, int(math.ceil(density / y)))
        xs = np.arange(S) / S
        pts.append(xs + 1j * y)
        wts.append(np.full(S, w1 * math.exp(-u) / S))
    return np.concatenate(pts), np.concatenate(wts)


def full_plane_mesh(
    ymin: float = 0.02, ymax: float = 4.0, res: int = 40, density: float = 4.0, min_row: int = 16
) -> QuadratureMesh:
    """Quadrature on the strip 0 <= x < 1 standing in for the whole half-plane.

    Integrals over H of 1-periodic functions times a kernel are integrals over
    the strip of the function times the periodized kernel; integral_formula_eval
    performs that periodization.  Rows near the real axis get about density/y
    points so the trapezoid rule resolves the oscillation there.
    """
    fz, fw = _strip_rule(ymin, ymax, res, density, min_row)
    cz, cw = _strip_rule(ymin, ymax, max(2, res // 2), density / 2.0, max(4, min_row // 2))
    nodes = np.concatenate([fz, cz])
    params = {"ymin": ymin, "ymax": ymax, "res": res, "density": density, "expected_volume": 1.0 / ymin - 1.0 / ymax}
    return QuadratureMesh(
        nodes,
        np.concatenate([fw, np.zeros_like(cw)]),
        np.concatenate([np.zeros_like(fw), cw]),
        FULL_PLANE,
        params,
    )


@dataclass(frozen=True)
class InnerProductReport:
    value: complex
    error_estimate: float
    coverage: str
    nodes: int
    volume: float
    expected_volume: float | None


def _values_on(f, mesh: QuadratureMesh) -> np.ndarray:
    if callable(f):
        return np.asarray(f(mesh.nodes), dtype=np.complex128).reshape(-1)
    vals = np.asarray(f, dtype=np.complex128).reshape(-1)
    if vals.size != len(mesh):
        raise ValueError("precomputed values do not match the mesh")
    return vals


def petersson_inner(f_eval, g_eval, m, mesh: QuadratureMesh) -> InnerProductReport:
    """<f, g> = integral of f conj(g) y^m dv over the mesh region.

    f_eval and g_eval are vectorized callables or arrays of values on mesh.nodes.
    """
    w = as_weight(m)
    if mesh.coverage != FUNDAMENTAL:
        raise ValueError("Petersson products need a fundamental-domain mesh")
    fv = _values_on(f_eval, mesh)
    gv = _values_on(g_eval, mesh)
    dens = fv * np.conj(gv) * mesh.nodes.imag ** float(w)
    value = complex(np.dot(dens, mesh.weights))
    check = complex(np.dot(dens, mesh.weights_check))
    return InnerProductReport(
        value, abs(value - check), mesh.coverage, int(np.count_nonzero(mesh.weights)), mesh.volume(), mesh.expected_volume()
    )


def cauchy_derivative(f_eval: Callable, xi: complex, k: int, radius: float | None = None, nodes: int = config.CAUCHY_NODES) -> complex:
    """f^(k)(xi) by the trapezoid rule on the circle |z - xi| = radius (default Im xi / 2)."""
    xi = complex(xi)
    if radius is None:
        radius = 0.5 * xi.imag
    if not 0 < radius < xi.imag:
        raise ValueError("circle must stay inside the upper half-plane")
    theta = 2.0 * math.pi * np.arange(nodes) / nodes
    pts = xi + radius * np.exp(1j * theta)
    vals = np.asarray(f_eval(pts), dtype=np.complex128).reshape(-1)
    return complex(math.factorial(k) / radius**k * np.mean(vals * np.exp(-1j * k * theta)))


def integral_kernel(xi: complex, k: int, m) -> Callable[[np.ndarray], np.ndarray]:
    """z -> conj(delta_{k,m,xi}(z)) periodized over z -> z + j."""
    w = as_weight(m)
    p2 = w.two_m + 2 * k
    pre = np.conj(half_integer_power(2j, w)) / FOUR_PI * falling_product(w, 0, k)
    shift = -complex(xi).conjugate()

    def kern(z):
        z = np.asarray(z, dtype=np.complex128).reshape(-1)
        out = np.empty(z.size, dtype=np.complex128)
        for i, zz in enumerate(z):
            out[i] = _kernels.lattice_power(zz + shift, p2, 8)
        return pre * np.conj(out)

    return kern


def integral_formula_eval(f_eval, xi: complex, k: int, m, mesh: QuadratureMesh) -> InnerProductReport:
    """f^(k)(xi) = (-2i)^m / (4 pi) prod(m-1+r) * integral over H of f(z) (zbar - xi)^{-(m+k)} y^m dv.

    Needs a full-plane mesh; f must be 1-periodic (a cusp form for Gamma_0(N)).
    """
    w = as_weight(m)
    if mesh.coverage != FULL_PLANE:
        raise ValueError("integral formula needs full-plane coverage")
    fv = _values_on(f_eval, mesh)
    dens = fv * integral_kernel(xi, k, w)(mesh.nodes) * mesh.nodes.imag ** float(w)
    value = complex(np.dot(dens, mesh.weights))
    check = complex(np.dot(dens, mesh.weights_check))
    return InnerProductReport(
        value, abs(value - check), mesh.coverage, int(np.count_nonzero(mesh.weights)), mesh.volume(), mesh.expected_volume()
    )


@dataclass(frozen=True)
class IdentityReport:
    name: str
    lhs: complex
    rhs: complex
    abs_err: float
    rel_err: float
    quad_error: float
    budget: str
    coverage: str

    def passed(self, tol: float) -> bool:
        return self.rel_err < tol


def _report(name, lhs, rhs, quad_error, budget, coverage) -> IdentityReport:
    err = abs(lhs - rhs)
    return IdentityReport(name, complex(lhs), complex(rhs), err, err / max(abs(rhs), 1e-300), quad_error, budget, coverage)


def verify_reproducing(
    f_eval,
    k: int,
    xi: complex,
    m,
    chi: DirichletCharacter | None,
    N: int,
    budget: TruncationBudget,
    mesh: QuadratureMesh,
    f_on_mesh: np.ndarray | None = None,
    f_point_eval: Callable | None = None,
) -> IdentityReport:
    """<f, Delta_{k,m,xi,chi}> against the Cauchy derivative f^(k)(xi).

    f_point_eval, if given, is a more accurate evaluator of f used on the
    Cauchy circle.
    """
    spec = SeriesSpec("delta", N, m, k, xi, chi)
    delta = series_function(spec, budget)
    fv = _values_on(f_eval, mesh) if f_on_mesh is None else f_on_mesh
    ip = petersson_inner(fv, delta, m, mesh)
    rhs = cauchy_derivative(f_point_eval or f_eval, xi, k)
    return _report("reproducing", ip.value, rhs, ip.error_estimate, budget.describe() + f",res={mesh.params.get('res')}", mesh.coverage)


def pfkm_values(k: int, m, chi, N: int, z, budget: TruncationBudget) -> np.ndarray:
    """(P f_{k,m})(z) on an array of points."""
    chi = chi if chi is not None else DirichletCharacter.trivial(N)
    return power_series_eval([pfkm_seed(k, m)], N, m, chi, z, budget)[0][:, 0]


def verify_thm61(
    f_eval,
    k: int,
    m,
    chi: DirichletCharacter | None,
    N: int,
    budget: TruncationBudget,
    mesh: QuadratureMesh,
    f_on_mesh: np.ndarray | None = None,
    f_point_eval: Callable | None = None,
) -> IdentityReport:
    """<f, P f_{k,m}> against sum_l C(k,l) (2i)^l 4 pi / prod_{r<=l}(m-1+r) f^(l)(i)."""
    fv = _values_on(f_eval, mesh) if f_on_mesh is None else f_on_mesh
    gv = pfkm_values(k, m, chi, N, mesh.nodes, budget)
    ip = petersson_inner(fv, gv, m, mesh)
    derivs = [cauchy_derivative(f_point_eval or f_eval, 1j, l) for l in range(k + 1)]
    rhs = theorem61_rhs(derivs, k, m)
    return _report("thm61", ip.value, rhs, ip.error_estimate, budget.describe() + f",res={mesh.params.get('res')}", mesh.coverage)


def verify_integral_formula(
    f_eval, k: int, xi: complex, m, mesh: QuadratureMesh, f_point_eval: Callable | None = None
) -> IdentityReport:
    rep = integral_formula_eval(f_eval, xi, k, m, mesh)
    rhs = cauchy_derivative(f_point_eval or f_eval, xi, k)
    return _report("integral-formula", rep.value, rhs, rep.error_estimate, f"res={mesh.params.get('res')}", mesh.coverage)


def verify_norm_identity(k: int, m) -> IdentityReport:
    from .group_core import F_km_l2norm_sq, F_km_l2norm_sq_numeric

    value, err = F_km_l2norm_sq_numeric(k, m)
    return _report("norm", value, F_km_l2norm_sq(k, m), err, "cartan-quadrature", "group")


__all__ = [
    "QuadratureMesh",
    "InnerProductReport",
    "IdentityReport",
    "fundamental_mesh",
    "full_plane_mesh",
    "petersson_inner",
    "cauchy_derivative",
    "integral_formula_eval",
    "verify_reproducing",
    "verify_thm61",
    "verify_integral_formula",
    "verify_norm_identity",
]
