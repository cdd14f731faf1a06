"""Small helpers shared by the figure scripts."""

import argparse
from pathlib import Path

from optorot.params import ParameterSet
from optorot.sweeps import load_config

ROOT = Path(__file__).resolve().parent.parent


def parser(description: str, default_config: str | None = None) -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(description=description)
    ap.add_argument("--config", default=None if default_config is None else str(ROOT / "configs" / default_config))
    ap.add_argument("--out", default=str(ROOT / "results"), help="output directory")
    ap.add_argument("--omega-c", type=float, default=None,
                    help="override the cavity angular frequency (rad/s) used for the photon flux")
    ap.add_argument("--workers", type=int, default=1)
    return ap


def base_params(args) -> tuple[ParameterSet, object]:
    if args.config:
        p, spec = load_config(args.config)
    else:
        p, spec = ParameterSet(), None
    if args.omega_c is not None:
        p = p.replace(omega_c=args.omega_c)
    return p, spec
