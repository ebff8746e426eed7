#!/usr/bin/env python3
"""Write cases/wscc9.json and cases/ne39.json from the MATPOWER data shipped with PYPOWER.

Machine data are not part of MATPOWER; they are tabulated below on the 100 MVA system base.
  wscc9: Sauer and Pai, "Power System Dynamics and Stability", WSCC 3-machine example.
  ne39:  Pai, "Energy Function Analysis for Power System Stability", New England system.
Damping D is not given in either source; every machine gets D = 1 (pu torque per pu speed).
"""
import argparse
import json
from pathlib import Path

from pypower.case9 import case9
from pypower.case39 import case39

DYN9 = [
    dict(H=23.64, x_d=0.146, x_q=0.0969, x_d_prime=0.0608, x_q_prime=0.0969, T_d0_prime=8.96, T_q0_prime=0.31),
    dict(H=6.4, x_d=0.8958, x_q=0.8645, x_d_prime=0.1198, x_q_prime=0.1969, T_d0_prime=6.0, T_q0_prime=0.535),
    dict(H=3.01, x_d=1.3125, x_q=1.2578, x_d_prime=0.1813, x_q_prime=0.25, T_d0_prime=5.89, T_q0_prime=0.6),
]

# unit: H, x'd, x'q, xd, xq, T'd0, T'q0. Unit 1 sits at bus 39, units 2..9 at buses 31..38,
# unit 10 at bus 30.
PAI39 = {
    1: (500, .006, .008, .02, .019, 7.0, .7),
    2: (30.3, .0697, .170, .295, .282, 6.56, 1.5),
    3: (35.8, .0531, .0876, .2495, .237, 5.7, 1.5),
    4: (28.6, .0436, .166, .262, .258, 5.69, 1.5),
    5: (26.0, .132, .166, .67, .62, 5.4, .44),
    6: (34.8, .05, .0814, .254, .241, 7.3, .4),
    7: (26.4, .049, .186, .295, .292, 5.66, 1.5),
    8: (24.3, .057, .0911, .290, .280, 6.7, .41),
    9: (34.5, .057, .0587, .2106, .205, 4.79, 1.96),
    10: (42.0, .031, .008, .1, .069, 10.2, 0.0),
}
UNIT_AT_BUS = {30: 10, 31: 2, 32: 3, 33: 4, 34: 5, 35: 6, 36: 7, 37: 8, 38: 9, 39: 1}


def dyn39(bus):
    H, xdp, xqp, xd, xq, td0, tq0 = PAI39[UNIT_AT_BUS[bus]]
    if tq0 == 0.0:
        # no q-axis transient circuit listed: make the q axis non-transient (x'q = xq)
        xqp, tq0 = xq, 0.4
    return dict(H=H, x_d=xd, x_q=xq, x_d_prime=xdp, x_q_prime=xqp, T_d0_prime=td0, T_q0_prime=tq0)


BUS_TYPE = {1: "PQ", 2: "PV", 3: "slack"}


def convert(ppc, name, dyn_of, damping=1.0, v_band=None):
    base = float(ppc["baseMVA"])
    out = dict(name=name, base_mva=base, cost_basis="MW", buses=[], branches=[], generators=[])
    for b in ppc["bus"]:
        vmin, vmax = (float(b[12]), float(b[11])) if v_band is None else v_band
        out["buses"].append(dict(id=int(b[0]), type=BUS_TYPE[int(b[1])], P_d=b[2] / base, Q_d=b[3] / base,
                                 G_s=b[4] / base, B_s=b[5] / base, V_min=vmin, V_max=vmax))
    for br in ppc["branch"]:
        out["branches"].append(dict(**{"from": int(br[0]), "to": int(br[1])}, r=float(br[2]), x=float(br[3]),
                                    b_charging=float(br[4]), tap=float(br[8]) or 1.0, S_max=br[5] / base))
    for i, (g, c) in enumerate(zip(ppc["gen"], ppc["gencost"])):
        assert int(c[0]) == 2 and int(c[3]) == 3, "expected quadratic polynomial costs"
        gen = dict(bus=int(g[0]), P_min=g[9] / base, P_max=g[8] / base, Q_min=g[4] / base, Q_max=g[3] / base,
                   c2=float(c[4]), c1=float(c[5]), c0=float(c[6]), D=damping)
        gen.update(dyn_of(i, int(g[0])))
        out["generators"].append(gen)
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "cases")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    cases = {
        # the 9-bus runs use a 0.95-1.0 pu voltage band
        "wscc9": convert(case9(), "wscc9", lambda i, bus: DYN9[i], v_band=(0.95, 1.0)),
        "ne39": convert(case39(), "ne39", lambda i, bus: dyn39(bus)),
    }
    for name, c in cases.items():
        path = args.out / f"{name}.json"
        path.write_text(json.dumps(c, indent=1) + "\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
