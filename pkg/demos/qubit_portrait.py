"""A qubit seen through its counters.

Run with ``python3 demos/qubit_portrait.py``.  Prints how the firing
probability of a counter falls off with the angle to the state's director,
how much a measurement along a tilted axis costs in entropy, and the
generator norm separating two counter banks.
"""

import numpy as np

from qportrait import measurement as me
from qportrait import qudit as qd

rho = qd.qubit_density([0.0, 0.0, 0.6])
print("state eigenvalues:", rho.eigenvalues())

print("\nangle   portrait   entropy of result")
for theta in np.linspace(0, np.pi, 7):
    m = [np.sin(theta), 0.0, np.cos(theta)]
    p = qd.qubit_portrait(rho, m)
    s = me.measurement_entropy(qd.portrait_distribution(rho, qd.qubit_roi(m)))
    print(f"{theta:5.3f}   {p:8.5f}   {s:8.5f}")
print(f"state entropy for comparison: {me.state_entropy(rho):.5f}")

# simulate a series along x: every shot is a coin flip
series = me.measure_series(rho, qd.qubit_roi([1, 0, 0]), 20_000, 42)
print("\nx-axis series, frequencies:", series.table.frequencies)
print("averaged matrix:\n", np.round(series.averaged.matrix.real, 3))

z, x = qd.qubit_roi([0, 0, 1]), qd.qubit_roi([1, 0, 0])
red = me.reduction_measure(z, x)
print(f"\nreduction measure z -> x: {red.value:.6f} (pi/sqrt8 = {np.pi / np.sqrt(8):.6f})")
