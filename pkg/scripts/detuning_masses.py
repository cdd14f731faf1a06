"""Entanglement versus detuning for three mirror masses; reports the peak against omega_eff."""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from optorot.sweeps import SweepSpec, evaluate_point, render_outputs, run_sweep

from _common import base_params, parser


def main():
    ap = parser(__doc__, "short_cavity.cfg")
    ap.add_argument("--masses-ng", type=float, nargs="+", default=[50.0, 100.0, 200.0])
    ap.add_argument("--points", type=int, default=100)
    args = ap.parse_args()
    p, _ = base_params(args)
    out = Path(args.out)

    fig, ax = plt.subplots(figsize=(5, 3.5))
    for m in args.masses_ng:
        pm = p.replace(M=m * 1e-12)
        spec = SweepSpec.from_range("detuning", 0.05, 5.0, args.points, pm)
        result = run_sweep(spec, workers=args.workers)
        render_outputs(result, out / f"detuning_{m:g}ng")
        x = np.array(result.column("axis_value"), dtype=float)
        e = np.array([np.nan if v is None else v for v in result.column("E_N")], dtype=float)
        i = int(np.nanargmax(e))
        w_eff = evaluate_point(pm.replace(Delta=x[i] * pm.omega_phi)).response.omega_eff
        print(f"M = {m:g} ng: peak at Delta = {x[i]:.3f} omega_phi, "
              f"omega_eff = {w_eff / pm.omega_phi:.4f} omega_phi, E_N = {e[i]:.3e}")
        ax.plot(x, e, label=f"{m:g} ng")
    ax.set_xlabel(r"$\Delta/\omega_\phi$")
    ax.set_ylabel(r"$E_N$")
    ax.legend()
    fig.tight_layout()
    with matplotlib.rc_context({"svg.hashsalt": "optorot"}):
        fig.savefig(out / "detuning.svg", metadata={"Date": None})


if __name__ == "__main__":
    main()
