"""Critical coupling gains for the built-in systems.

Walks through the closed-form thresholds: the definite-G network bound,
its indefinite-G refinement, and the two-node bounds that also price the
discontinuous layer.
"""
import numpy as np

from pwsnet import QSplit, builtin_spec, spectral_norm
from pwsnet import threshold_t1, threshold_t2, threshold_t3
from pwsnet.matgraph import build_erdos_renyi


def sym(A):
    return 0.5 * (A + A.T)


# A 50-node random graph stands in for "some reasonably connected network".
L = build_erdos_renyi(50, 0.5, seed=2018)
print(f"graph: N = {L.N}, lambda_2 = {L.lambda2:.4f}\n")

# Relay system, identity inner coupling: one number decides everything.
relay = builtin_spec("relay")
t1 = threshold_t1(sym(relay.A), L, np.eye(2))
print(f"relay, definite case:    c > {t1.c_star:.4f}")

# The refinement: only directions where Q' is expanding need coupling, so an
# inner coupling acting on the second coordinate alone is enough here.
split = QSplit(Qminus=-np.eye(2), Qprime=np.diag([0.0, 4.0]))
t2 = threshold_t2(split, np.diag([0.0, 1.0]), L)
print(f"relay, indefinite case:  c >= {t2.c_star:.4f}  (partial inner coupling)")

# Sprott circuit: the sign term needs the discontinuous layer; the slack
# vector m prices it.
sprott = builtin_spec("sprott")
print(f"\nsprott: ||Q|| = {spectral_norm(sprott.A):.4f}")
t3 = threshold_t3(sprott.A, m=np.array([2.0, 0.0, 0.0]), P=np.eye(3), Gamma=np.eye(3), Gamma_d=np.eye(3))
print(f"sprott, two-node bounds: c > {t3.c_star:.4f}, c_d >= {t3.cd_star:.4f}")
