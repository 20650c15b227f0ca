"""
Smooth period geometry of a torus of modulus tau, the pullback of the
symplectic form through the holonomy, and sweeps over the (A1, A2) plane.
"""

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from Torus.Errors import (EuclideanPoint, InvalidArgument, NumericalCheckFailure,
                          UnwrapFailure)
from Torus.Hodge import energy_inequality_check, period_map, PeriodMatrix
from Torus.Pattern import solve_pattern
from Utilities.ConfigReader import ConfigReader
from Utilities.Log import Log
from Utilities.Serializer import write_csv

UNIT_DIRECTIONS = [(math.cos(k * math.pi / 4), math.sin(k * math.pi / 4)) for k in range(8)]


def omega(p, q):
    return float(p[0] * q[1] - p[1] * q[0])


def h_tau(tau):
    tau = complex(tau)
    if not tau.imag > 0:
        raise InvalidArgument(f"tau must lie in the upper half plane, got {tau!r}")
    x, y = tau.real, tau.imag
    return PeriodMatrix(np.array([[x / y, -1.0 / y], [abs(tau) ** 2 / y, -x / y]]), "smooth")


def inner_tau(tau, p, q):
    return omega(p, h_tau(tau)(q))


def norm_tau(tau, p):
    return math.sqrt(inner_tau(tau, p, p))


@dataclass
class PeriodSymplecticContext:
    tau: complex

    @property
    def h_tau(self):
        return h_tau(self.tau)

    def identity_errors(self, p=(1.0, 0.0), q=(0.0, 1.0)):
        h = self.h_tau
        return {
            "square": float(np.max(np.abs(h.matrix @ h.matrix + np.eye(2)))),
            "det": abs(h.det - 1.0),
            "trace": abs(h.trace),
            "compatibility": abs(omega(h(p), h(q)) - omega(p, q)),
        }


# ---------------------------------------------------------------------- #
#  PULLBACK FORM
# ---------------------------------------------------------------------- #

@dataclass
class PullbackForm:
    lam: float
    matrix: np.ndarray
    det: float
    imaginary: float

    def evaluate(self, p, q):
        return self.lam * omega(p, q)


def pullback_form(pattern, h_x=None):
    """lambda = 2 (1 - det h_X); the form is lambda * omega on (A1, A2)-tangents."""
    if pattern.is_euclidean:
        raise EuclideanPoint("the holonomy pullback is undefined at a Euclidean pattern; use the shear route")
    h_x = h_x if h_x is not None else period_map(pattern)
    e1, e2 = (1.0, 0.0), (0.0, 1.0)
    imaginary = omega(h_x(e1), e2) + omega(e1, h_x(e2))
    tol = ConfigReader.readfloat("hodge", "check_tolerance")
    if abs(imaginary) > tol:
        raise NumericalCheckFailure(f"reciprocity fails: imaginary part {imaginary!r}", imaginary=imaginary)
    lam = 2.0 * (1.0 - h_x.det)
    return PullbackForm(lam, lam * np.array([[0.0, 1.0], [-1.0, 0.0]]), h_x.det, imaginary)


# ---------------------------------------------------------------------- #
#  TAU AND THE DEGREE CHECK
# ---------------------------------------------------------------------- #

def tau_of(mesh, angles, A1, A2, initial=None):
    return solve_pattern(mesh, angles, A1, A2, initial=initial).tau


def disk_chart(tau):
    return (tau - 1j) / (tau + 1j)


@dataclass
class WindingTrace:
    R: float
    samples: int
    w: list = field(default_factory=list)
    total_argument: float = 0.0
    closure: float = 0.0

    @property
    def winding(self):
        return int(round(self.total_argument / (2 * math.pi)))


def winding_trace(mesh, angles, R, n=None):
    """Follows g(tau) along the half circle of radius R, warm-starting each solve."""
    n = ConfigReader.readint("winding", "samples") if n is None else int(n)
    min_samples = ConfigReader.readint("winding", "min_samples")
    if not R > 0:
        raise InvalidArgument(f"radius must be positive, got {R!r}")
    if n < min_samples:
        raise InvalidArgument(f"at least {min_samples} samples are required, got {n}")

    trace = WindingTrace(float(R), n)
    previous = None
    for k in range(n + 1):
        t = math.pi * k / n
        pattern = solve_pattern(mesh, angles, R * math.cos(t), R * math.sin(t), initial=previous)
        previous = pattern.u
        w = disk_chart(pattern.tau)
        if trace.w:
            ratio = w / trace.w[-1]
            if not abs(ratio - 1) < 1:
                raise UnwrapFailure(f"phase jump between samples {k - 1} and {k}; increase the sample count",
                                    sample=k)
            trace.total_argument += cmath.phase(ratio)
        trace.w.append(w)

    trace.closure = abs(trace.w[-1] - trace.w[0])
    tol = ConfigReader.readfloat("winding", "closure_tolerance")
    if trace.closure > tol:
        raise NumericalCheckFailure(f"loop does not close: |w_n - w_0| = {trace.closure:.3e}",
                                    closure=trace.closure)
    Log.logger.info(f"Winding at R={R} with {n} samples: {trace.winding} "
                    f"(argument {trace.total_argument:.6f}, closure {trace.closure:.2e})")
    return trace


def winding_check(mesh, angles, R, n=None):
    return winding_trace(mesh, angles, R, n).winding


# ---------------------------------------------------------------------- #
#  SWEEPS
# ---------------------------------------------------------------------- #

SWEEP_COLUMNS = ["A1", "A2", "tau_re", "tau_im", "det_hx", "trace_hx", "lam",
                 "min_energy_margin", "min_norm_margin"]
RAY_COLUMNS = ["R", "A1", "A2", "im_c", "im_c_tau"]


def margins(pattern, h_x=None, directions=UNIT_DIRECTIONS):
    """Minimum energy-inequality margin and norm-contraction margin over the given directions."""
    h_x = h_x if h_x is not None else period_map(pattern)
    energy, contraction = [], []
    for p in directions:
        energy.append(energy_inequality_check(pattern, p, h_x)[2])
        contraction.append(norm_tau(pattern.tau, p) - norm_tau(pattern.tau, h_x(p)))
    return min(energy), min(contraction)


def sweep_grid(mesh, angles, xs, ys):
    """One row per non-Euclidean grid point."""
    rows = []
    for A2 in ys:
        for A1 in xs:
            if A1 == 0 and A2 == 0:
                Log.logger.info("Grid sweep skips the Euclidean point")
                continue
            pattern = solve_pattern(mesh, angles, A1, A2)
            h_x = period_map(pattern)
            form = pullback_form(pattern, h_x)
            energy_margin, norm_margin = margins(pattern, h_x)
            rows.append({
                "A1": float(A1), "A2": float(A2),
                "tau_re": pattern.tau.real, "tau_im": pattern.tau.imag,
                "det_hx": h_x.det, "trace_hx": h_x.trace, "lam": form.lam,
                "min_energy_margin": energy_margin, "min_norm_margin": norm_margin,
            })
            Log.logger.info(f"Grid sample A=({A1}, {A2}): lambda={form.lam:.6g}")
    return rows


def boundedness_sweep(mesh, angles, direction, radii):
    """|Im c| and |Im c*tau| along the ray R * (cos direction, sin direction)."""
    rows = []
    previous = None
    for R in radii:
        A1, A2 = R * math.cos(direction), R * math.sin(direction)
        pattern = solve_pattern(mesh, angles, A1, A2, initial=previous)
        previous = pattern.u
        rows.append({"R": float(R), "A1": A1, "A2": A2,
                     "im_c": abs(pattern.c.imag), "im_c_tau": abs((pattern.c * pattern.tau).imag)})
    bound = max(max(r["im_c"], r["im_c_tau"]) for r in rows)
    Log.logger.info(f"Ray at angle {direction}: max |Im c|, |Im c tau| = {bound:.6g}")
    return rows, bound


def write_sweep_csv(rows, path, columns=None):
    return write_csv(rows, columns or SWEEP_COLUMNS, path)
