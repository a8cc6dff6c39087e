# %% [markdown]
# Three ways to get the spectrum of a string
# ==========================================
#
# A vibrating string with mass density rho on [0, 1], fixed at both ends:
# -u'' = lam rho u.  For a piecewise-constant rho the eigenvalues can be found
# exactly with 2x2 transfer matrices; in general we shoot with a Prufer phase
# and check against a finite-difference pencil.

# %%
import numpy as np

from eigenratio import fd, prufer, stepexact
from eigenratio.coefficients import Family, Step
from eigenratio.core import BoundarySpec, CoefficientSet

rho = Step((0.3, 0.55), (5.0, 2.0, 0.8))
lam_shoot = prufer.eigenvalues(rho, 6)
lam_exact = stepexact.exact_eigenvalues(rho, 6)
lam_fd = fd.oracle_eigenvalues(CoefficientSet(rho=rho), BoundarySpec(), 6, 8192, richardson=True)

print(" n      shooting            transfer         finite diff")
for n, (a, b, c) in enumerate(zip(lam_shoot, lam_exact, lam_fd), start=1):
    print(f"{n:2d}  {a:18.12f}  {b:18.12f}  {c:18.10f}")
print("max rel gap shooting/exact:", np.max(np.abs(lam_shoot / lam_exact - 1)))
print("max rel gap shooting/fd:   ", np.max(np.abs(lam_shoot / lam_fd - 1)))

# %% [markdown]
# The finite-difference error is second order; Richardson over N and 2N
# removes the leading term.

# %%
exact = (np.arange(1, 4) * np.pi) ** 2
for N in (128, 256, 512, 1024):
    err = fd.oracle_eigenvalues(CoefficientSet(), BoundarySpec(), 3, N) - exact
    print(N, err)

# %% [markdown]
# Smooth densities go through the same shooting code; rho'/rho enters the
# phase equation and is tabulated once per density.

# %%
smooth = Family("gaussian-well", x0=0.4, a=2.0, k=1.2, w=0.2)
lam = prufer.eigenvalues(smooth, 5)
ref = fd.oracle_eigenvalues(CoefficientSet(rho=smooth), BoundarySpec(), 5, 8192, richardson=True)
print(lam)
print("rel gap:", np.max(np.abs(lam / ref - 1)))

sol = prufer.eigenfunction(smooth, 4)
print("zeros of u_4:", sol.zeros, " normalisation:", sol.normalization)
