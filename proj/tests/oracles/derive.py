"""Independent reference values for the C++ tests.

Everything here is plain numpy/cvxpy and shares no code with the library.
Run: python3 tests/oracles/derive.py
"""
import numpy as np
import cvxpy as cp

np.set_printoptions(precision=17)
PI = np.pi


def quad_grads(a, b, phi, beta):
    x = a - b
    c2 = np.cos(phi) ** 2
    return 2 * x + beta * b * c2, -2 * x + beta * a * c2, -beta * a * b * np.sin(2 * phi)


def quad_value(a, b, phi, beta):
    return np.sum((a - b) ** 2) + beta * np.sum(a * b * np.cos(phi) ** 2)


def step(a, b, phi, beta, lam_hint, margin=1.0, gain=4.0, relax=0.5, growth=2.0, rate=1.0):
    """One discrete update: Baum-Eagon on masses, per-node phase multiplier."""
    gv, gi, gp = quad_grads(a, b, phi, beta)
    lp = gain * np.maximum(np.abs(gp), beta * a * b) + np.finfo(float).tiny
    target = PI * (lp * phi - PI * gp) / (lp * PI - phi * gp)
    nphi = np.clip(phi + rate * (target - phi), -PI, PI)
    L0 = quad_value(a, b, phi, beta)
    lam = max(max(0.0, gv.max(), gi.max()) + margin, lam_hint * relax)
    while True:
        eta = np.sum(a * (lam - gv) + b * (lam - gi))
        na, nb = a * (lam - gv) / eta, b * (lam - gi) / eta
        if quad_value(na, nb, nphi, beta) <= L0 + 1e-13 * (1 + abs(L0)):
            break
        lam *= growth
    s = np.sum(na + nb)
    return na / s, nb / s, nphi, lam


print("# g_phi example")
g = -0.25
print(PI * (1 * PI / 4 - PI * g) / (1 * PI - PI / 4 * g))

print("# active power at pi/4, |V|=|I|=sqrt(0.5)")
print(0.5 * np.cos(PI / 4))

print("# five discrete steps, N=3, beta=1")
a = np.array([0.10, 0.25, 0.05])
b = np.array([0.30, 0.15, 0.15])
phi = np.array([0.4, -2.0, 1.0])
lam = 0.0
for k in range(5):
    a, b, phi, lam = step(a, b, phi, 1.0, lam)
print("v2", a.tolist())
print("i2", b.tolist())
print("phi", phi.tolist())
print("L", quad_value(a, b, phi, 1.0))

print("# one-class dual on fixed points, sigma=1, nu=0.2")
X = np.array([[0.0, 0.0], [1.0, 0.2], [-0.5, 0.9], [0.3, -1.1], [2.0, 1.5],
              [-1.4, -0.3], [0.8, 0.8], [-0.2, 0.4], [1.6, -0.7], [-0.9, -1.2]])
d2 = ((X[:, None, :] - X[None, :, :]) ** 2).sum(-1)
K = np.exp(-d2 / 2.0)
N = len(X)
C = 1.0 / (0.2 * N)
al = cp.Variable(N)
prob = cp.Problem(cp.Minimize(0.5 * cp.quad_form(al, cp.psd_wrap(K))), [cp.sum(al) == 1, al >= 0, al <= C])
prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-14, tol_gap_rel=1e-14, tol_feas=1e-14)
print("H*", prob.value)
print("alpha*", np.round(al.value, 10).tolist())

print("# capped-simplex projection example")
y = np.array([0.9, 0.1, -0.3, 0.5])
lo, hi = y.min() - 1, y.max() + 1
for _ in range(200):
    t = (lo + hi) / 2
    if np.clip(y - t, 0, 0.4).sum() > 1:
        lo = t
    else:
        hi = t
print(np.clip(y - (lo + hi) / 2, 0, 0.4).tolist())

print("# xoshiro256** seeded by splitmix64, seed 42 stream 0 and seed 7 stream 3")
M = (1 << 64) - 1


def splitmix(x):
    x = (x + 0x9E3779B97F4A7C15) & M
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M
    return x, z ^ (z >> 31)


def rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & M


def xoshiro(seed, stream, count):
    x = seed ^ ((stream * 0xD1B54A32D192ED03) & M)
    s = []
    for _ in range(4):
        x, z = splitmix(x)
        s.append(z)
    out = []
    for _ in range(count):
        out.append((rotl((s[1] * 5) & M, 7) * 9) & M)
        t = (s[1] << 17) & M
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = rotl(s[3], 45)
    return out


print([hex(v) for v in xoshiro(42, 0, 3)])
print([hex(v) for v in xoshiro(7, 3, 2)])
print((xoshiro(42, 0, 1)[0] >> 11) * 2.0 ** -53)
