"""Four qubit pairs, four verdicts.

The covariance matrix ``c_ab = <s_a s_b> - <s_a><s_b>`` of two qubits is
classified by its rank.  The rank-2 example is built from the two-angle
entangled basis with weights tuned so the zz correlation cancels.
"""

import numpy as np

from qportrait import composite as co

ket = co.QUBIT_PAIR.ket


def light(psi, delta=0.5):
    q = (1 - delta ** 2 * np.cos(2 * psi) ** 2) / 4
    p0 = (1 - 2 * q + delta) / 2
    basis = co.canonical_entangled_basis(psi, 0.0)
    return sum(w * b.projector for w, b in zip([p0, q, q, p0 - delta], basis))


bell = (ket(0, 0) + ket(1, 1)) / np.sqrt(2)
cases = {
    "product |00>": np.outer(ket(0, 0), ket(0, 0)),
    "classical mix": 0.5 * (np.outer(ket(0, 1), ket(0, 1)) + np.outer(ket(1, 0), ket(1, 0))),
    "tuned canonical mix": light(np.pi / 8),
    "Bell": np.outer(bell, bell),
}
for name, rho in cases.items():
    v = co.classify_entanglement(rho)
    sv = ", ".join(f"{s:.4f}" for s in v.singular_values)
    print(f"{name:22s} rank {v.covariance_rank}  {v.verdict}  singular values [{sv}]")

# how far qubit 0's conditional director swings as qubit 1's counter turns
print("\nconditional director of qubit 0 as the partner counter turns in the xz plane")
for name in ("tuned canonical mix", "Bell"):
    print(name)
    for theta in np.linspace(0, np.pi, 5):
        m = [np.sin(theta), 0.0, np.cos(theta)]
        d = co.conditional_director(cases[name], m, which=0)
        print(f"  theta={theta:4.2f}  d={np.round(d, 4)}")

U = co.entangling_unitary(np.pi / 4)
print("\nentangling_unitary(pi/4) is", co.classify_transform(U))
