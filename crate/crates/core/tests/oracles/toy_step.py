# Reference values for the 3-node entropic step tests in tests/oracles.rs.
# Evaluated in 40-digit arithmetic with mpmath; run `python3 toy_step.py`
# and paste the output into the test if the toy problem changes.
from mpmath import mp, mpf, exp, log

mp.dps = 40

w = [mpf(1) / 4, mpf(1) / 2, mpf(1) / 4]
M = [
    [mpf(1), mpf("0.5"), mpf(0)],
    [mpf("0.2"), mpf(1), mpf("-0.3")],
    [mpf(0), mpf("0.4"), mpf(1)],
]
u = [mpf(1), mpf("0.5"), mpf(2)]
y = [mpf("1.5"), mpf("0.2"), mpf("0.7")]
lam = mpf("0.8")


def apply(v):
    return [sum(M[j][i] * v[i] for i in range(3)) for j in range(3)]


def adjoint(r):
    return [sum(M[j][i] * w[j] * r[j] for j in range(3)) / w[i] for i in range(3)]


res = [y[j] - apply(u)[j] for j in range(3)]
e = [lam * a for a in adjoint(res)]
m0 = [u[i] * exp(e[i]) for i in range(3)]
mass = sum(w[i] * m0[i] for i in range(3))
u_prob = [u[i] / sum(w[k] * u[k] for k in range(3)) for i in range(3)]
m1_raw = [u_prob[i] * exp(lam * adjoint([y[j] - apply(u_prob)[j] for j in range(3)])[i]) for i in range(3)]
m1_mass = sum(w[i] * m1_raw[i] for i in range(3))
m1 = [v / m1_mass for v in m1_raw]
print("m0", [mp.nstr(v, 25) for v in m0])
print("u_prob", [mp.nstr(v, 25) for v in u_prob])
print("m1", [mp.nstr(v, 25) for v in m1], "ln_c", mp.nstr(-log(m1_mass), 25))
