"""Independent reference values for the Rust Fock-space solver.

Builds the Lindblad superoperator as a sparse matrix (column-stacked vec),
propagates with scipy's expm_multiply and prints values that the Rust tests
freeze. Run: python3 tools/fock_reference.py
"""
import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply


def ladder(n_cut):
    return sp.diags(np.sqrt(np.arange(1, n_cut + 1)), 1, format="csr").astype(complex)


def embed(op, j, modes, n_cut):
    eye = sp.identity(n_cut + 1, format="csr", dtype=complex)
    out = None
    # index = sum n_j (n_cut+1)^j: mode 0 is the fastest-varying factor
    for k in reversed(range(modes)):
        f = op if k == j else eye
        out = f if out is None else sp.kron(out, f, format="csr")
    return out


class Model:
    def __init__(self, modes, U, J, delta, gamma, nbar, F, n_cut):
        self.modes, self.n_cut = modes, n_cut
        a1 = ladder(n_cut)
        self.a = [embed(a1, j, modes, n_cut) for j in range(modes)]
        d = (n_cut + 1) ** modes
        self.dim = d
        H = sp.csr_matrix((d, d), dtype=complex)
        for j, a in enumerate(self.a):
            ad = a.getH()
            H = H - delta * (ad @ a) + 0.5 * U * (ad @ ad @ a @ a)
            if j + 1 < modes:
                b = self.a[j + 1]
                H = H - J * (ad @ b + b.getH() @ a)
        H = H + F * (self.a[0].getH() + self.a[0])
        I = sp.identity(d, format="csr", dtype=complex)

        def spre(A):
            return sp.kron(I, A, format="csr")

        def spost(A):
            return sp.kron(A.T, I, format="csr")

        L = -1j * (spre(H) - spost(H))
        for a in self.a:
            ad = a.getH()
            L = L + 0.5 * gamma * (nbar + 1) * (2 * sp.kron(ad.T, a) - spre(ad @ a) - spost(ad @ a))
            L = L + 0.5 * gamma * nbar * (2 * sp.kron(a.T, ad) - spre(a @ ad) - spost(a @ ad))
        self.L = L.tocsr()

    def vec(self, X):
        return X.reshape(-1, order="F")

    def mat(self, v):
        return v.reshape(self.dim, self.dim, order="F")

    def vacuum(self):
        r = np.zeros((self.dim, self.dim), complex)
        r[0, 0] = 1
        return r

    def evolve(self, X, t):
        return self.mat(expm_multiply(self.L * t, self.vec(X)))

    def grid(self, X, taus):
        vs = expm_multiply(self.L, self.vec(X), start=taus[0], stop=taus[-1], num=len(taus), endpoint=True)
        return [self.mat(v) for v in vs]


def op(m, kind, j):
    return m.a[j].getH() if kind == "c" else m.a[j]


def two_time(m, rho, early, late, taus):
    """early/late: lists of (side, kind, mode); side 'L' acts from the right (A-block), 'R' from the left."""
    X = rho.copy()
    for side, kind, j in reversed([f for f in early if f[0] == "R"]):
        X = op(m, kind, j) @ X
    for side, kind, j in [f for f in early if f[0] == "L"]:
        X = X @ op(m, kind, j)
    out = []
    for Y in m.grid(X, taus):
        Z = Y
        for side, kind, j in reversed([f for f in late if f[0] == "R"]):
            Z = op(m, kind, j) @ Z
        for side, kind, j in [f for f in late if f[0] == "L"]:
            Z = Z @ op(m, kind, j)
        out.append(np.trace(Z))
    return np.array(out)


def occ(m, rho, j):
    return np.trace(m.a[j].getH() @ m.a[j] @ rho).real


def report_blockade(nbar, n_cut=6):
    m = Model(2, 0.0856, 3.0, -0.275, 1.0, nbar, 0.01, n_cut)
    rho = m.evolve(m.vacuum(), 20.0)
    n1, n2 = occ(m, rho, 0), occ(m, rho, 1)
    taus = np.linspace(0, 8, 17)
    # a+_1(t0) a+_1(t0+tau) a_1(t0+tau) a_1(t0)
    early = [("L", "c", 0), ("R", "a", 0)]
    late = [("L", "c", 0), ("R", "a", 0)]
    num = two_time(m, rho, early, late, taus)
    n1_late = [occ(m, Y, 0) for Y in m.grid(rho, taus)]
    g = num.real / (n1 * np.array(n1_late))
    print(f"nbar={nbar:g} n_cut={n_cut} n1={n1:.10e} n2={n2:.10e} trace={np.trace(rho).real:.15f}")
    print("  g11(tau) tau=0..8 step 0.5:", ", ".join(f"{x:.10f}" for x in g))


def report_strong(n_cut=12):
    m = Model(2, 0.0856, 3.0, -0.275, 1.0, 0.0, 3.0, n_cut)
    rho = m.evolve(m.vacuum(), 20.0)
    print(f"F=3 n_cut={n_cut} n1={occ(m, rho, 0):.10e} n2={occ(m, rho, 1):.10e}")
    taus = np.linspace(0, 5, 11)
    j = 1
    specs = {
        # a_2(t0) a_2(t0+tau) a+_2(t0+tau) a+_2(t0)
        "Ga": ([("L", "a", j), ("R", "c", j)], [("L", "a", j), ("R", "c", j)]),
        # a_2(t0+tau)^2 a+_2(t0)^2
        "Gb": ([("R", "c", j), ("R", "c", j)], [("L", "a", j), ("L", "a", j)]),
        # a_2(t0+tau) a+_2(t0+tau) a+_2(t0) a_2(t0)
        "Gc": ([("R", "c", j), ("R", "a", j)], [("L", "a", j), ("L", "c", j)]),
        # a_2(t0) a+_2(t0+tau)^2 a_2(t0)
        "Gd": ([("L", "a", j), ("R", "a", j)], [("L", "c", j), ("L", "c", j)]),
    }
    for name, (early, late) in specs.items():
        v = two_time(m, rho, early, late, taus)
        print(f"  {name} tau=0..5 step 0.5:", ", ".join(f"{x.real:.10f}{x.imag:+.10f}j" for x in v))
    top = sum(rho[r, r].real for r in range(m.dim) if (r % (n_cut + 1) == n_cut or r // (n_cut + 1) == n_cut))
    print(f"  boundary population {top:.3e}")


if __name__ == "__main__":
    report_blockade(0.0)
    report_blockade(1e-8)
    report_strong()
