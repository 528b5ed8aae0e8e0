"""Parse, differentiate and evaluate the scalar building blocks.

Everything else in the library (masses, superpotentials, potentials,
log-derivatives) is assembled from these immutable expression trees.
"""

import math

from pdmsusy import parse, differentiate, evaluate
from pdmsusy.expr import ParamEnv

# The workhorse superpotential of the worked examples
w = parse("exp(i*alpha*x) - sin(x)")
print("W(x)      =", w)
print("W'(x)     =", differentiate(w))
print("W''(x)    =", differentiate(w, 2))

env = ParamEnv(alpha=1.0)
for x in (0.0, 0.5, 1.0):
    print(f"W({x})    =", evaluate(w, x, env))

# Exact symbolic derivatives vs a quick finite-difference probe
sec = parse("sec(x)")
d2 = differentiate(sec, 2)
x0 = math.pi / 4
h = 1e-4
fd = (evaluate(sec, x0 + h) - 2 * evaluate(sec, x0) + evaluate(sec, x0 - h)) / h**2
print("\nsec''(pi/4) symbolic :", evaluate(d2, x0).real)
print("sec''(pi/4) stencil  :", fd.real)
print("closed form 3*sqrt(2):", 3 * math.sqrt(2))

# Poles are reported, never silently swallowed
try:
    evaluate(parse("1/4*sec(x)^2"), math.pi / 2)
except Exception as err:
    print("\npole reporting:", err)
