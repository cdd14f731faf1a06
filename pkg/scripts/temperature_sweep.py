"""Entanglement versus bath temperature at the reference operating point."""

from pathlib import Path

from optorot.sweeps import SweepSpec, find_threshold, render_outputs, run_sweep

from _common import base_params, parser


def main():
    ap = parser(__doc__, "reference.cfg")
    ap.add_argument("--points", type=int, default=120)
    args = ap.parse_args()
    p, _ = base_params(args)
    spec = SweepSpec.from_range("temperature", 1e-3, 300.0, args.points, p, spacing="log")
    result = run_sweep(spec, workers=args.workers)
    paths = render_outputs(result, Path(args.out) / "temperature_sweep")
    e = result.column("E_N")
    t_star = find_threshold(result)
    print(f"E_N(1 mK) = {e[0]:.4f}")
    print("entanglement vanishes at T* = " + ("none in range" if t_star is None else f"{t_star:.2f} K"))
    for kind, path in paths.items():
        print(f"{kind}: {path}")


if __name__ == "__main__":
    main()
