"""Pure-numpy RK4 stepping of the GKSL equation (fallback for ``_rk4``)."""
import numpy as np


def rk4_integrate(hamiltonian, jumps, rho0, dt, n_steps):
    """Return ``n_steps + 1`` states; every state is re-symmetrised."""
    h = np.asarray(hamiltonian, dtype=complex)
    d = h.shape[0]
    ls = np.asarray(jumps, dtype=complex).reshape(-1, d, d)
    heff = h - 0.5j * np.einsum("kji,kjl->il", ls.conj(), ls)
    heff_dag = heff.conj().T
    ls_dag = ls.conj().transpose(0, 2, 1)

    def rhs(r):
        out = -1j * (heff @ r - r @ heff_dag)
        if ls.shape[0]:
            out = out + (ls @ r @ ls_dag).sum(axis=0)
        return out

    out = np.empty((n_steps + 1, d, d), dtype=complex)
    out[0] = rho0
    cur = out[0]
    for s in range(n_steps):
        k1 = rhs(cur)
        k2 = rhs(cur + 0.5 * dt * k1)
        k3 = rhs(cur + 0.5 * dt * k2)
        k4 = rhs(cur + dt * k3)
        nxt = cur + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        nxt = 0.5 * (nxt + nxt.conj().T)
        out[s + 1] = nxt
        cur = nxt
    return out
