"""Command-line interface.

  capillary run <scenario> [--sigma ...] [--T ...] [--out-dir ...]
  capillary run --config run.json
  capillary converge table2 --orders first,second --M 40,80,160,320
  capillary dae sessile|pendant [--shape bulge|lightbulb] [--T ...]

Exit code 0 on success.  Any solver error is serialized as a one-line JSON
object on stderr and exits nonzero.  ``CAPILLARY_OUT_DIR`` overrides the
output root.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import CapillaryError
from .harness import (
    convergence_study,
    load_config_file,
    run_scenario,
    scenario_names,
    write_order_tables,
)
from .harness_config import resolve_config


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="capillary")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a named scenario or a config file")
    run.add_argument("scenario", nargs="?", choices=scenario_names() + ["pendant"])
    run.add_argument("--config", help="JSON or TOML config file for a custom run")
    run.add_argument("--sigma", type=float, help="override relative adhesion")
    run.add_argument("--T", type=float, dest="final_time", help="override final time")
    run.add_argument("--N", type=int, dest="n_grid", help="override grid intervals")
    run.add_argument("--order", choices=["first", "second"])
    run.add_argument("--M", type=int, help="table2 temporal resolution (dt = T/M)")
    run.add_argument("--shape", choices=["bulge", "lightbulb"], help="pendant shape")
    run.add_argument("--out-dir", help="output root (default CAPILLARY_OUT_DIR)")

    conv = sub.add_parser("converge", help="temporal convergence study")
    conv.add_argument("scenario", nargs="?", default="table2")
    conv.add_argument("--orders", default="first,second")
    conv.add_argument("--M", default="40,80,160,320")
    conv.add_argument("--out-dir", help="output root")

    dae = sub.add_parser("dae", help="quasi-static DAE trajectories")
    dae.add_argument("problem", choices=["sessile", "pendant"])
    dae.add_argument("--shape", choices=["bulge", "lightbulb"], default="bulge")
    dae.add_argument("--T", type=float, dest="final_time")
    dae.add_argument("--n-quad", type=int, dest="n_quad")
    dae.add_argument("--out-dir")
    return parser


def _cmd_run(args: argparse.Namespace) -> int:
    if args.config:
        from .harness import emit_profiles, emit_timeseries
        from .schemes import run_simulation
        from pathlib import Path

        resolved = resolve_config(load_config_file(args.config))
        series = run_simulation(
            resolved["initial"], resolved["substrate"],
            resolved["params"], resolved["config"],
        )
        root = Path(args.out_dir or resolved["out_dir"] or "capillary_out") / "custom"
        ts = emit_timeseries(series, root / "timeseries.csv")
        pf = emit_profiles(series, root / "profiles.csv")
        print(json.dumps({"timeseries": str(ts), "profiles": str(pf)}))
        return 0
    if not args.scenario:
        raise CapillaryError("run needs a scenario name or --config")
    overrides = {}
    if args.sigma is not None:
        overrides["sigma"] = args.sigma
    if args.final_time is not None:
        overrides["final_time"] = args.final_time
    if args.n_grid is not None:
        overrides["n_grid"] = args.n_grid
    if args.order is not None:
        overrides["order"] = args.order
    if args.M is not None:
        overrides["M"] = args.M
    if args.shape is not None:
        overrides["shape"] = args.shape
    manifest = run_scenario(args.scenario, overrides, out_dir=args.out_dir)
    print(json.dumps({"manifest": manifest["manifest_path"], "final": manifest["final"]}))
    return 0


def _cmd_converge(args: argparse.Namespace) -> int:
    orders = tuple(s.strip() for s in args.orders.split(",") if s.strip())
    m_list = [int(s) for s in args.M.split(",") if s.strip()]
    tables = convergence_study(args.scenario, m_list, orders)
    from .harness import _out_root

    path = write_order_tables(tables, _out_root(args.out_dir) / "table2" / "orders.csv")
    for label in orders:
        for m, err, alpha in tables[label].rows:
            alpha_s = "" if alpha is None else f"{alpha:.4f}"
            print(f"{label:6s} M={m:<5d} error={err:.6e} order={alpha_s}")
    print(json.dumps({"orders_csv": str(path)}))
    return 0


def _cmd_dae(args: argparse.Namespace) -> int:
    overrides: dict = {}
    if args.final_time is not None:
        overrides["final_time"] = args.final_time
    if args.n_quad is not None:
        overrides["n_quad"] = args.n_quad
    if args.problem == "pendant":
        overrides["shape"] = args.shape
    manifest = run_scenario(args.problem, overrides, out_dir=args.out_dir)
    print(json.dumps({"manifest": manifest["manifest_path"], "final": manifest["final"]}))
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "converge":
            return _cmd_converge(args)
        if args.command == "dae":
            return _cmd_dae(args)
        raise CapillaryError(f"unknown command {args.command!r}")
    except CapillaryError as exc:
        print(json.dumps(exc.to_json_dict()), file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc), "detail": {}}),
            file=sys.stderr,
        )
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
