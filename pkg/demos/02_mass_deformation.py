"""Mass-deformed superpotentials and symmetry measures.

A position-dependent mass shifts the superpotential by a derivative term,
W_m = W - (N/2) [m^(-N/2)]'.  For the worked sec-type masses the deformed
superpotential collapses to the periodic, PT-symmetric exp(i alpha x) even
though W itself is not PT-symmetric.
"""

import numpy as np

from pdmsusy import (MassFn, ModelSpec, mass_deformed_superpotential, parse,
                     rho, symmetry_report)
from pdmsusy.expr import ParamEnv, evaluate_many

w = parse("exp(i*alpha*x) - sin(x)")
env = ParamEnv(alpha=1.0)
xs = np.linspace(0.02, 1.55, 9)

for order, mass_source in ((1, "1/4*sec(x)^2"), (2, "sec(x)")):
    mass = MassFn(parse(mass_source), 0.02, 1.55)
    wm = mass_deformed_superpotential(w, mass, order)
    err = np.max(np.abs(evaluate_many(wm, xs, env)
                        - evaluate_many(parse("exp(i*alpha*x)"), xs, env)))
    print(f"order {order}, m = {mass_source:14s}: "
          f"sup |W_m - exp(i alpha x)| = {err:.2e}")

# Symmetry is measured, not enforced: parity defect of m, PT defect of W_m
spec = ModelSpec(order=1, mass=MassFn(parse("1/(1+x^2)"), -2.0, 2.0),
                 deformed=parse("x^2+i*x"), susy_constants=(1.0,))
report = symmetry_report(spec)
print("\nsymmetric model defects:", report.entries())

broken = ModelSpec(order=1, mass=MassFn(parse("1+x/4"), -1.0, 1.0),
                   deformed=parse("i*x"), susy_constants=(0.0,))
print("odd-mass model defects: ", symmetry_report(broken).entries())

# The kinetic-ordering term vanishes identically for (a, b) = (0, -1)
mass = MassFn(parse("sec(x)"), 0.1, 1.5)
print("\nrho(m; a=0, b=-1)  =", rho(mass, 0.0, -1.0))
print("rho(m; a=0, b=0)   =", rho(mass, 0.0, 0.0))
