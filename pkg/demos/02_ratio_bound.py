# %% [markdown]
# How far can lambda_n / lambda_m stray from (n/m)^2?
# ====================================================
#
# For a constant density the ratio is exactly (n/m)^2.  Symmetric single-well
# densities stay below it.  Once the well is lopsided, or the density is
# simply decreasing, the ratio can go above it.

# %%
import numpy as np

from eigenratio import prufer, stepexact, suite
from eigenratio.classify import classify
from eigenratio.coefficients import Family, Step


def show(label, rho, n_max=4):
    lam = prufer.eigenvalues(rho, n_max)
    sl = suite.slacks(lam)
    worst = max(sl, key=sl.get)
    print(f"{label:34s} {classify(rho).kind:12s} lam2/lam1 = {lam[1] / lam[0]:.6f}"
          f"   worst slack {sl[worst]:+.4f} at (n,m)=({worst})")


show("constant", Family("constant", c=3.0))
show("symmetric quadratic well", Family("quadratic-well", x0=0.5, a=1.0, k=6.0))
show("off-centre quadratic well", Family("quadratic-well", x0=0.8, a=1.0, k=6.0))
show("2 - x", Family("linear", a=2.0, b=-1.0))
show("exp(-3x)", Family("exponential", a=1.0, b=-3.0))
show("step 4 | 1", Step((0.5,), (4.0, 1.0)))

# %% [markdown]
# A heavy left end pushes the ratio up.  With rho = (M, 1) on halves the
# limit M -> infinity leaves a string clamped at 1/2 whose other end can move
# freely, and lambda_2/lambda_1 approaches (s_2/s_1)^2 with tan s = -s.

# %%
for M in (2, 4, 16, 64, 256, 4096):
    lam = stepexact.exact_eigenvalues(Step((0.5,), (float(M), 1.0)), 2)
    print(f"M = {M:5d}   lam2/lam1 = {lam[1] / lam[0]:.6f}")

from scipy.optimize import brentq
s1 = brentq(lambda s: np.tan(s) + s, 1.6, 3.0)
s2 = brentq(lambda s: np.tan(s) + s, 4.72, 6.2)
print("limit:", (s2 / s1) ** 2)

# %% [markdown]
# The phase derivative d(phi/z)/dz is the quantity that would have to stay
# nonnegative for the ratio to be controlled.  Across a downward jump it can
# turn negative.

# %%
rho = Step((0.5,), (4.0, 1.0))
for z in (np.pi, 2 * np.pi, 3 * np.pi):
    vals = [prufer.theta_dot(rho, z, x) for x in (0.25, 0.5, 0.75, 1.0)]
    print(f"z = {z:7.4f}:", " ".join(f"{v:+.5f}" for v in vals))
print("closed form at z = 2 pi, x = 3/4:", -1 / (4 * np.pi))
