"""``porofrac`` command line: run, validate and list scenarios."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from ..errors import PorofracError
from .config import SCENARIOS, load_config, preset, template


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="porofrac",
                                 description="Poro-plastic phase-field fracture simulations.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log every step")
    sub = ap.add_subparsers(dest="command", required=True)

    def with_overrides(p):
        p.add_argument("config", help="path to a key = value config file")
        p.add_argument("--desk", action="store_true",
                       help="use the coarse desk preset instead of the full-size mesh")
        p.add_argument("--threads", type=int, help="element-kernel threads")
        p.add_argument("--output-dir", help="directory for results")

    with_overrides(sub.add_parser("run", help="run a scenario"))
    with_overrides(sub.add_parser("validate", help="check a config without running it"))
    sc = sub.add_parser("scenarios", help="list built-in scenarios or print a template")
    sc.add_argument("name", nargs="?", choices=SCENARIOS)
    sc.add_argument("--desk", action="store_true", help="template of the desk preset")
    return ap


def _config(args):
    cfg = load_config(args.config, desk=True if args.desk else None)
    changes = {}
    if args.threads is not None:
        changes["threads"] = args.threads
    if args.output_dir:
        changes["output_dir"] = args.output_dir
    return replace(cfg, **changes) if changes else cfg


def _describe(cfg) -> str:
    from .scenarios import build_scenario

    sc = build_scenario(cfg)
    return (f"{cfg.scenario} ({cfg.preset}): {sc.mesh.n_elements} elements, "
            f"{sc.dofs.n_mech} displacement/flux dofs, {cfg.steps} steps of "
            f"{cfg.tau:g} s, variant {cfg.variant}")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        if args.command == "scenarios":
            if args.name:
                sys.stdout.write(template(args.name, "desk" if args.desk else "full"))
            else:
                for name in SCENARIOS:
                    print(f"{name:10s} desk: {_describe(preset(name, 'desk'))}")
            return 0
        cfg = _config(args)
        if args.command == "validate":
            print(f"ok: {_describe(cfg)}")
            return 0
        from .runner import run

        result = run(cfg)
        if not result.ok:
            print(f"failed at step {result.failed_step}: {result.error}", file=sys.stderr)
            return 1
        print(f"completed {len(result.records)} steps; results in {cfg.output_dir}")
        return 0
    except PorofracError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
