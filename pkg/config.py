"""Default configuration for jeansbench.

Every value here can be overridden by a JSON file passed with `--config`
and then by command line flags.
"""

import math

"""Whether to log every accepted solver step."""
DEBUG = False

"""Physical constants (dimensionless units)."""
G = 1.0
kappa = 1.0
gamma = 4 / 3

"""Background amplitude and perturbation size of the initial data."""
beta = 1.0
beta0 = 0.01

"""Torus discretization: points per axis and box length."""
grid_n = 16
period = 2 * math.pi

"""Field solver used by `simulate` and `sweep` (either "fuchsian" or "direct")."""
solver = "fuchsian"
nonlinear = False

"""Integration range: the Fuchsian solver stops at tau_min, the direct one at t_end."""
tau_min = 1e-2
t_end = 100.0

"""Relative tolerance of the field integrators and of the mode ODE oracle."""
rtol = 1e-8
ode_tol = 1e-10

"""CFL safety factor for explicit stepping."""
cfl = 0.5

"""Sobolev order of the energy and of the data norm."""
sobolev_s = 3

"""Embedding and Moser constants (advisory admissibility check only)."""
Cs = 2.0
Cm = 10.0

"""Random data seed."""
seed = 0

"""Number of snapshots stored between the initial and the final time (log spaced)."""
snapshots = 12

"""Sweep worker count. None means one worker per physical core."""
workers = None

"""Worker threads used by scipy.fft. Fixed so that results are bit reproducible."""
fft_workers = 1

"""Directory for result files."""
out = "results"

"""Default eigenvalues for the `modes` table."""
lams = (0.0, -1.0, -2.0)

"""Default sample times for the `modes` table."""
mode_times = (1.0, 10.0, 100.0)
