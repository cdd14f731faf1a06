"""Low-temperature plateau, deviation from the plateau and the linear-in-nbar fit."""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from optorot.entanglement import fit_low_temperature
from optorot.sweeps import SweepSpec, evaluate_point, render_outputs, run_sweep

from _common import base_params, parser


def main():
    ap = parser(__doc__, "reference.cfg")
    ap.add_argument("--points", type=int, default=120)
    ap.add_argument("--nbar-cutoff", type=float, default=1e3)
    args = ap.parse_args()
    p, _ = base_params(args)

    ev0 = evaluate_point(p.replace(T=0.0))
    e0, Tc = ev0.report.E_N, ev0.response.T_c
    spec = SweepSpec.from_range("temperature", Tc / 20, 300.0, args.points, p, spacing="log")
    result = run_sweep(spec, workers=args.workers)
    out = Path(args.out)
    render_outputs(result, out / "low_temperature")

    T = np.array(result.column("axis_value"), dtype=float)
    E = np.array([np.nan if v is None else v for v in result.column("E_N")], dtype=float)
    fit = fit_low_temperature(zip(result.column("nbar"), result.column("E_N")), args.nbar_cutoff)
    print(f"T_c = {Tc:.4e} K, E_N(T=0) = {e0:.5f}")
    print(f"fit: E0 = {fit.E0:.5f}, kappa = {fit.kappa:.4e}, rms {fit.residual:.2e}, {fit.n_points} points")

    fig, (a, b) = plt.subplots(1, 2, figsize=(9, 3.5))
    a.semilogx(T, E)
    a.axvline(Tc, ls="--", c="gray")
    a.set_xlabel("T (K)")
    a.set_ylabel(r"$E_N$")
    drop = e0 - E
    mask = drop > 0
    b.loglog(T[mask], drop[mask])
    b.axvline(Tc, ls="--", c="gray")
    b.set_xlabel("T (K)")
    b.set_ylabel(r"$E_0 - E_N$")
    fig.tight_layout()
    with matplotlib.rc_context({"svg.hashsalt": "optorot"}):
        fig.savefig(out / "low_temperature_panels.svg", metadata={"Date": None})
    print(f"plot: {out / 'low_temperature_panels.svg'}")


if __name__ == "__main__":
    main()
