"""Default numerical tolerances and truncation parameters.

Every comparison routine takes an explicit ``tol`` argument; the values here
are only the defaults.
"""

import os

# group arithmetic
DET_TOL = 1e-12
ETA_TOL = 1e-12
ROUNDTRIP_TOL = 1e-10
COCYCLE_TOL = 1e-10
LIFT_TOL = 1e-10

# refuse to work closer than this to the real axis
MIN_IM = 1e-12

# theta multiplier
THETA_TOL = 1e-16
J_RATIO_TOL = 1e-8

# series engine
DEFAULT_CMAX = 60.0
DEFAULT_POINT_CMAX = 640.0
DEFAULT_EM_TERMS = 8
DEFAULT_NMAX = 8

# quadrature
DEFAULT_YMAX = 6.0
DEFAULT_QUAD_RES = 40
CAUCHY_NODES = 64

# Fourier extraction
DEFAULT_Y0 = 0.8
SAMPLES_PER_COEFF = 8
# sampling height for the psi-series Hecke pipeline
HECKE_Y0_PSI = 0.12

# beta median bisection
MEDIAN_TOL = 1e-15
MEDIAN_MAXITER = 200


def thread_count():
    """Thread count requested through ``HALFPOINCARE_THREADS`` (None if unset)."""
    value = os.environ.get("HALFPOINCARE_THREADS")
    return int(value) if value else None
