"""Hard resource caps and solver defaults, CLI-overridable where noted."""

# flat-distance LP refuses larger atom counts (quadratic constraint growth)
FLAT_ATOM_LIMIT = 5000

# constrained relaxation defaults
RELAX_TOL = 1e-10            # max angular update per sweep, radians
RELAX_MAX_SWEEPS = 200_000

# finite-difference Laplace solver
LAPLACE_RESIDUAL = 1e-10     # discrete max-norm target
LAPLACE_MAX_SWEEPS = 200_000
