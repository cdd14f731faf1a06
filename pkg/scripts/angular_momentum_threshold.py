"""Entanglement versus optical charge l, with the onset threshold."""

from pathlib import Path

from optorot.sweeps import SweepSpec, find_threshold, render_outputs, run_sweep

from _common import base_params, parser


def main():
    ap = parser(__doc__, "l_threshold.cfg")
    ap.add_argument("--lmax", type=int, default=200)
    args = ap.parse_args()
    p, _ = base_params(args)
    spec = SweepSpec("angular_momentum", tuple(range(1, args.lmax + 1)), p)
    result = run_sweep(spec, workers=args.workers)
    paths = render_outputs(result, Path(args.out) / "angular_momentum_threshold")
    lc = find_threshold(result)
    print("threshold l_c = " + ("none in range" if lc is None else str(lc)))
    for kind, path in paths.items():
        print(f"{kind}: {path}")


if __name__ == "__main__":
    main()
