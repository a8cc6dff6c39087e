# %% [markdown]
# From -(p y')' + q y = lam rho y to a plain string
# ================================================
#
# Factor out the solution h of (p h')' = q h with h(1/2) = 1, h'(1/2) = 0,
# change variable with h^-2 and then with 1/p.  What is left is -u'' = lam' W u
# with lam' a fixed multiple of lam.

# %%
import numpy as np

from eigenratio import fd, prufer, transform
from eigenratio.coefficients import Family
from eigenratio.core import BoundarySpec, CoefficientSet

source = CoefficientSet(
    p=Family("quadratic-barrier", x0=0.5, a=1.5, k=1.0),
    q=Family("tent", x0=0.5, a=0.0, b=0.5, positive=False),      # min(x, 1 - x)
    rho=Family("quadratic-well", x0=0.5, a=1.0, k=4.0),
)

h = transform.solve_h(source.p, source.q)
print("h at 0, 1/2, 1:", h.curve(np.array([0.0, 0.5, 1.0])))
print("h is", h.classification.kind, "with minimum at", h.classification.x0)
print("c =", h.c)

chain, verdict = transform.full_pipeline(source, n_max=5)
print("sigma =", chain.sigma, " predicted scale (sigma c)^2 =", chain.scale)
print("measured lam_string / lam_source:", np.array(verdict["scale_measured"]))
print("ratio invariance error:", verdict["ratio_invariance_error"])
print("final density:", verdict["density_classification"])
print("hypotheses:", verdict["hypotheses"])
print("worst slack:", verdict["worst_slack"])

# %% [markdown]
# The function F(0, lam) = p h'/h at the left end, with h now solving the
# eigen-equation from the midpoint, increases up to its first pole.

# %%
eta = verdict["spectral"]["eta_hat"]
for lam in np.linspace(0.0, 0.95 * eta, 6):
    print(f"lam {lam:9.4f}   F(0, lam) {transform.F_eval(source.p, source.q, source.rho, lam, 0):+.6f}")

# %% [markdown]
# Sanity check of the new density against the source spectrum directly.

# %%
lam_src = fd.oracle_eigenvalues(source, BoundarySpec(), 4, 4096, richardson=True)
lam_str = prufer.eigenvalues(chain.density, 4)
print(lam_str / lam_src)
