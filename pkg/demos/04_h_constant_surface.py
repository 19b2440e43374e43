"""The constant separating the ROS and FCFS waiting-time tails.

With a regularly varying service time of index -nu in (1, 2) and load
rho, the two tails differ asymptotically by a constant factor:

    P(W_ROS > x) ~ h(rho, nu) P(W_FCFS > x),    h(rho, nu) < 1.

h equals 1 at nu = 1 and nu = 2, is convex in nu, and sinks toward
Gamma(nu) as rho -> 1; its minimum over the whole surface is
Gamma(3/2) ~ 0.886.  Random order of service is thus always slightly
better than FCFS in the deep tail, by at most ~11 percent.
"""

import numpy as np

from rosqueue import asymptotics as asym
from rosqueue.numerics import gamma_fn

print("h(rho, nu) on a coarse surface grid:\n")
nus = [1.1, 1.3, 1.5, 1.7, 1.9]
print("  rho\\nu " + "".join(f"{nu:>9.1f}" for nu in nus))
for rho in (0.0, 0.3, 0.6, 0.9, 0.99, 0.999):
    row = [asym.h_constant(rho, nu).h for nu in nus]
    print(f"  {rho:6.3f}" + "".join(f"{h:9.4f}" for h in row))

print(f"\n  limit rho -> 1 at nu = 1.5: Gamma(3/2) = {gamma_fn(1.5):.5f}")
print(f"  h(0.999, 1.5)              = {asym.h_constant(0.999, 1.5).h:.5f}")

print("\nendpoint identities and the interior bound:")
for rho in (0.2, 0.5, 0.8):
    print(f"  rho = {rho}: h(rho,1) = {asym.h_via_f(rho, 1.0):.10f}"
          f"   h(rho,2) = {asym.h_via_f(rho, 2.0):.10f}")

print("\nboth integral representations agree (partial-integration identity):")
for rho, nu in [(0.3, 1.2), (0.6, 1.5), (0.9, 1.8)]:
    f, g = asym.h_via_f(rho, nu), asym.h_via_g(rho, nu)
    print(f"  rho={rho}, nu={nu}:  f-form {f:.12f}   g-form {g:.12f}   gap {abs(f - g):.2e}")

print("\nan independent Monte-Carlo integration of the f integrand:")
rng = np.random.default_rng(1)
u = rng.random(2_000_000)
vals = asym._h_f_integrand(u, 0.5, 1.5)
print(f"  MC h(0.5, 1.5) = {vals.mean():.5f} +- {vals.std() / len(u) ** 0.5:.5f}"
      f"   quadrature {asym.h_via_f(0.5, 1.5):.5f}")
