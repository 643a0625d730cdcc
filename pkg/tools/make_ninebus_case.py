"""Build the bundled 9-bus classical-model case file.

Runs the standard WSCC 3-machine power flow, converts loads to constant
admittances at the solved voltages, attaches the generator transient
reactances, Kron-reduces to the internal nodes, and writes everything the
dynamic simulation needs as JSON. Run from the repository root:

    python3 tools/make_ninebus_case.py

The output is committed as src/pmugan/data/ieee9_classical.json; this script
exists so the file can be regenerated and audited, not as a runtime
dependency.
"""

import json
import pathlib

import numpy as np
from scipy.optimize import fsolve

N_BUS = 9
F_HZ = 60.0
OMEGA_S = 2.0 * np.pi * F_HZ

# branches: (from, to, r, x, b_total), 1-based buses, 100 MVA base
BRANCHES = [
    (1, 4, 0.0, 0.0576, 0.0),
    (2, 7, 0.0, 0.0625, 0.0),
    (3, 9, 0.0, 0.0586, 0.0),
    (4, 5, 0.010, 0.085, 0.176),
    (4, 6, 0.017, 0.092, 0.158),
    (5, 7, 0.032, 0.161, 0.306),
    (6, 9, 0.039, 0.170, 0.358),
    (7, 8, 0.0085, 0.072, 0.149),
    (8, 9, 0.0119, 0.1008, 0.209),
]

# generators at buses 1..3: inertia H (s), transient reactance x'd (p.u.)
GEN_BUS = [1, 2, 3]
H = np.array([23.64, 6.40, 3.01])
XDP = np.array([0.0608, 0.1198, 0.1813])

# dispatch: slack at bus 1 (V=1.04), PV buses 2 and 3
V_SETPOINT = {1: 1.04, 2: 1.025, 3: 1.025}
P_GEN = {2: 1.63, 3: 0.85}

# loads (P, Q) at buses, consumed
LOADS = {5: (1.25, 0.50), 6: (0.90, 0.30), 8: (1.00, 0.35)}

MONITORED = (4, 6)
FAULT_SHUNT = 1.0e6
DAMPING_PER_INERTIA = 1.0  # D_i = M_i * this, 1/s


def build_ybus():
    y = np.zeros((N_BUS, N_BUS), dtype=complex)
    for f, t, r, x, b in BRANCHES:
        f, t = f - 1, t - 1
        ys = 1.0 / (r + 1j * x)
        y[f, f] += ys + 0.5j * b
        y[t, t] += ys + 0.5j * b
        y[f, t] -= ys
        y[t, f] -= ys
    return y


def solve_power_flow(ybus):
    p_inj = np.zeros(N_BUS)
    q_inj = np.zeros(N_BUS)
    for bus, p in P_GEN.items():
        p_inj[bus - 1] += p
    for bus, (p, q) in LOADS.items():
        p_inj[bus - 1] -= p
        q_inj[bus - 1] -= q

    pv_or_slack = set(V_SETPOINT)
    pq_buses = [b for b in range(1, N_BUS + 1) if b not in pv_or_slack]
    angle_buses = list(range(2, N_BUS + 1))  # all but the slack

    def unpack(x):
        theta = np.zeros(N_BUS)
        vmag = np.empty(N_BUS)
        for i, bus in enumerate(angle_buses):
            theta[bus - 1] = x[i]
        for bus, v in V_SETPOINT.items():
            vmag[bus - 1] = v
        for i, bus in enumerate(pq_buses):
            vmag[bus - 1] = x[len(angle_buses) + i]
        return vmag * np.exp(1j * theta)

    def mismatch(x):
        v = unpack(x)
        s = v * np.conj(ybus @ v)
        res_p = [s[bus - 1].real - p_inj[bus - 1] for bus in angle_buses]
        res_q = [s[bus - 1].imag - q_inj[bus - 1] for bus in pq_buses]
        return np.array(res_p + res_q)

    x0 = np.zeros(len(angle_buses) + len(pq_buses))
    x0[len(angle_buses):] = 1.0
    sol, info, ok, msg = fsolve(mismatch, x0, full_output=True, xtol=1e-13)
    assert ok == 1, msg
    resid = np.abs(mismatch(sol)).max()
    assert resid < 1e-10, resid
    return unpack(sol)


def main():
    ybus = build_ybus()
    v = solve_power_flow(ybus)
    s = v * np.conj(ybus @ v)
    print("power flow solution:")
    for bus in range(N_BUS):
        print(
            f"  bus {bus + 1}: V={abs(v[bus]):.4f} ang={np.degrees(np.angle(v[bus])):7.3f} deg"
            f"  P={s[bus].real:+.4f}  Q={s[bus].imag:+.4f}"
        )

    # generator internal EMFs behind x'd; generator buses carry no load
    e_int = np.empty(3, dtype=complex)
    i_gen = np.empty(3, dtype=complex)
    for g, bus in enumerate(GEN_BUS):
        i_gen[g] = np.conj(s[bus - 1] / v[bus - 1])
        e_int[g] = v[bus - 1] + 1j * XDP[g] * i_gen[g]
    pm = (e_int * np.conj(i_gen)).real
    delta0 = np.angle(e_int)
    print("internal nodes:")
    for g in range(3):
        print(
            f"  gen {g + 1}: |E|={abs(e_int[g]):.4f} delta0={np.degrees(delta0[g]):7.3f} deg"
            f"  Pm={pm[g]:.4f}"
        )

    # dynamic network: loads as constant admittance, machines behind x'd
    y_nn = ybus.copy()
    for bus, (p, q) in LOADS.items():
        y_nn[bus - 1, bus - 1] += (p - 1j * q) / abs(v[bus - 1]) ** 2
    y_gen = 1.0 / (1j * XDP)
    y_ng = np.zeros((N_BUS, 3), dtype=complex)
    for g, bus in enumerate(GEN_BUS):
        y_nn[bus - 1, bus - 1] += y_gen[g]
        y_ng[bus - 1, g] = -y_gen[g]
    y_gg = np.diag(y_gen)
    y_red = y_gg - y_ng.T @ np.linalg.solve(y_nn, y_ng)

    # equilibrium consistency: electrical power at delta0 equals Pm
    pe0 = (e_int * np.conj(y_red @ e_int)).real
    err = np.abs(pe0 - pm).max()
    print(f"equilibrium check: max |Pe(delta0) - Pm| = {err:.3e}")
    assert err < 1e-8, err

    # monitored branch parameters
    for f, t, r, x, b in BRANCHES:
        if (f, t) == MONITORED:
            y_series = 1.0 / (r + 1j * x)
            b_half = 0.5 * b
            break
    else:
        raise SystemExit(f"monitored line {MONITORED} not in branch table")

    # recovery check: pre-fault network voltages from internal sources
    v_back = -np.linalg.solve(y_nn, y_ng @ e_int)
    v_err = np.abs(v_back - v).max()
    print(f"voltage recovery check: max |V_back - V_pf| = {v_err:.3e}")
    assert v_err < 1e-8, v_err

    def cpairs(arr):
        arr = np.asarray(arr, dtype=complex)
        if arr.ndim == 1:
            return [[z.real, z.imag] for z in arr]
        return [[[z.real, z.imag] for z in row] for row in arr]

    m = 2.0 * H / OMEGA_S
    case = {
        "name": "ieee9-classical",
        "n_gen": 3,
        "n_bus": N_BUS,
        "f_hz": F_HZ,
        "M": m.tolist(),
        "D": (DAMPING_PER_INERTIA * m).tolist(),
        "Pm": pm.tolist(),
        "E": np.abs(e_int).tolist(),
        "delta0": delta0.tolist(),
        "Y_reduced": cpairs(y_red),
        "Y_nn": cpairs(y_nn),
        "Y_ng": cpairs(y_ng),
        "y_gen": cpairs(y_gen),
        "gen_bus": GEN_BUS,
        "monitored_line": {
            "from_bus": MONITORED[0],
            "to_bus": MONITORED[1],
            "y_series": [y_series.real, y_series.imag],
            "b_half": b_half,
        },
        "fault_buses": list(range(1, N_BUS + 1)),
        "fault_shunt": FAULT_SHUNT,
    }
    out = pathlib.Path(__file__).resolve().parents[1] / "src/pmugan/data/ieee9_classical.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(case, indent=1, sort_keys=True))
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
