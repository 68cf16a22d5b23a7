"""Straight-line numpy evaluation of the constants frozen into the C++ tests."""
import itertools
import math

import numpy as np
from scipy.special import zeta


def laplacian(a):
    return np.diag(a.sum(axis=1)) - a


def complete(n, w=1.0):
    return w * (np.ones((n, n)) - np.eye(n))


def bernoulli_support(base, p):
    n = base.shape[0]
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if base[i, j] or base[j, i]]
    out = []
    for alive in itertools.product([0, 1], repeat=len(pairs)):
        a = np.zeros_like(base)
        for keep, (i, j) in zip(alive, pairs):
            if keep:
                a[i, j], a[j, i] = base[i, j], base[j, i]
        k = sum(alive)
        out.append((a, p**k * (1 - p) ** (len(pairs) - k)))
    return out


def constants(support, h):
    e = 2 ** max(h, 2)
    rho0 = sum(q * np.linalg.norm(laplacian(a), 2) ** e for a, q in support) ** (1 / e)
    rho1 = sum(q * np.count_nonzero(a) * np.abs(a).max() ** 2 for a, q in support)
    rho2 = max(sum(q * (a.sum(1)[i] - a.sum(0)[i]) ** 2 for a, q in support) for i in range(support[0][0].shape[0]))
    entry = max(sum(q * a[i, j] ** 2 for a, q in support) for i in range(support[0][0].shape[0]) for j in range(support[0][0].shape[0]))
    return rho0, rho1, rho2, entry


def theorem1(sigma, b, beta, rho0, rho1, rho2, n, v0, x0sq, c):
    qv = math.exp(c * (rho0**2 + 4 * rho1 * beta * sigma**2)) * (v0 + 2 * c * beta * rho1 * b**2)
    qx = math.exp(c * rho0**2) * (x0sq + 2 * c * beta * rho1 * (2 * sigma**2 * qv + b**2))
    t = (4 * c * beta * b**2 * rho1 / n**2, 8 * qv * c * beta * sigma**2 * rho1 / n**2, 2 * c * rho2 * qx / n)
    return qv, qx, t


print("gain_at(2,4,0.75,0) =", repr(2 / 4**0.75))
print("zeta(2) =", repr(math.pi**2 / 6), " zeta(1.5) =", repr(zeta(1.5)), " zeta(2.25) =", repr(zeta(2.25)))

# Theorem 1 worked instance: n = 4, link failures on K4 with p = 0.7, h = 1.
sup = bernoulli_support(complete(4), 0.7)
rho0, rho1, rho2, entry = constants(sup, 1)
x0 = np.array([0.0, 1.0, 2.0, 3.0])
v0 = float(((x0 - x0.mean()) ** 2).sum())
c = zeta(1.5)
qv, qx, t = theorem1(0.1, 0.1, 16.0, rho0, rho1, rho2, 4, v0, float(x0 @ x0), c)
print("K4 p=0.7: rho0 =", repr(rho0), "rho1 =", repr(rho1), "rho2 =", repr(rho2), "rho1_entry =", repr(entry))
print("  q_v =", repr(qv), "q_x =", repr(qx), "terms =", [repr(v) for v in t], "bound =", repr(sum(t)))
r6 = 4 * c * 16.0 * 0.01 * entry / 16 + 8 * qv * c * 16.0 * 0.01 * entry / 16
print("  remark6 bound (entrywise rho1) =", repr(r6))
mean = sum(q * a for a, q in sup)
lsym = laplacian(mean)
print("  lambda2(E sym L) =", repr(np.linalg.eigvalsh((lsym + lsym.T) / 2)[1]),
      "E||L||^2 =", repr(sum(q * np.linalg.norm(laplacian(a), 2) ** 2 for a, q in sup)))

# Theorem 4 instance: i.i.d. flow that is always K4; a = 0.3, gamma = 0.75.
a = 0.3
k4 = complete(4)
lam2 = np.linalg.eigvalsh(laplacian(k4))[1]
l2m = np.linalg.norm(laplacian(k4), 2) ** 2
rb1 = 12.0
slope = l2m + 4 * 0.01 * 16 * rb1
c0 = a
c2, c3 = a**2 * zeta(1.5), a**3 * zeta(2.25)
ctilde = (c0 * v0 + 2 * 0.01 * 16 * rb1 * c3) / (2 * lam2 - slope * c0)
r0, r1, r2, _ = constants([(k4, 1.0)], 1)
qv4, qx4, _ = theorem1(0.1, 0.1, 16.0, r0, r1, r2, 4, v0, float(x0 @ x0), c2)
t4 = (4 * c2 * 16 * 0.01 * rb1 / 16, 8 * ctilde * 16 * 0.01 * rb1 / 16, 0.0)
print("K4 iid a=0.3: limit =", repr(2 * lam2 / slope), "c_tilde =", repr(ctilde), "bound =", repr(sum(t4)),
      "q_v =", repr(qv4), "q_x =", repr(qx4))

# Markov three-state example: stationary law and theta for h = 1, 2, 3.
P = np.array([[0.5, 0.25, 0.25], [0.25, 0.5, 0.25], [0.25, 0.25, 0.5]])
w, v = np.linalg.eig(P.T)
pi = np.real(v[:, np.argmin(abs(w - 1))])
print("markov pi =", pi / pi.sum())

# Hurwitz-zeta gain sums: sum_k (a/(k+k0)^g)^p = a^p zeta(p g, k0).
for a, k0, g in [(2.0, 4, 0.75), (0.3, 10, 0.9)]:
    print(f"a={a} k0={k0} gamma={g}: sum c^2 =", repr(a**2 * zeta(2 * g, k0)), " sum c^3 =", repr(a**3 * zeta(3 * g, k0)))
print("gamma=0.51: sum c^2 =", repr(zeta(1.02)), " sum c^3 =", repr(zeta(1.53)))
