"""Command-line interface.

Exit codes: 0 success, 2 invalid configuration or arguments, 3 numerical
failure or a diagnostic outside its tolerance.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import acceptance
from ._numerics import chebyshev_grid
from .cocycle_core import decompose, verify_cocycle
from .config import PRESETS, RunConfig, load_config, preset
from .errors import ConfigError, NumericalError
from .results import result_document, write_csv, write_document
from .symbol_model import symbol_phi_provider
from .trace_extraction import TraceReport, kv_density, wodzicki_density
from .zeta_family import Domain, SymbolFamily, residue_at, scan

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

DEFAULT_PRESET = {
    "decompose": "kv-half",
    "residue": "wodzicki-n1",
    "kv-trace": "kv-n1",
    "zeta-scan": "wodzicki-n1",
}


class ToleranceFailure(Exception):
    def __init__(self, diagnostic: str, value: float, tol: float):
        super().__init__(f"{diagnostic} = {value:.3e} exceeds tolerance {tol:.1e}")


def _lambda_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"--lambda expects comma-separated floats, got {text!r}") from None
    if not values or any(not v > 0 for v in values):
        raise argparse.ArgumentTypeError("--lambda values must be positive")
    return values


def _positive(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration")
    common.add_argument("--preset", choices=sorted(PRESETS), help="built-in configuration")
    common.add_argument("--out", type=Path, help="output directory (default: $COCYCLE_OUT or ./cocycle_out)")
    common.add_argument("--tol", type=_positive, help="override the command's pass/fail tolerance")
    common.add_argument("--lambda", dest="lambdas", type=_lambda_list, help="lambda set, e.g. 2,2.718281828,3")
    common.add_argument("--quiet", action="store_true")

    parser = argparse.ArgumentParser(prog="cocycle-trace", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="cocycle residuals of symbol providers")
    sub.add_parser("decompose", parents=[common], help="psi and c of the symbol cocycle")
    sub.add_parser("residue", parents=[common], help="Wodzicki residue density and integral")
    sub.add_parser("kv-trace", parents=[common], help="Kontsevich-Vishik density and integral")
    sub.add_parser("zeta-scan", parents=[common], help="psi(z, t) over a z-window, residues at poles")
    st = sub.add_parser("selftest", parents=[common], help="run the acceptance criteria")
    st.add_argument("--corrupt-oracle", type=float, default=0.0, help=argparse.SUPPRESS)
    return parser


def _load(args, command: str) -> tuple[str, RunConfig]:
    if args.config is not None:
        try:
            return str(args.config), load_config(args.config)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    name = args.preset or DEFAULT_PRESET[command]
    return name, preset(name)


def _lambdas(args, cfg: RunConfig) -> tuple[float, ...]:
    return args.lambdas or cfg.lambdas


def _per_point_rows(report: TraceReport):
    for i, (x, v) in enumerate(zip(report.x_grid, report.per_point)):
        oracle = report.oracle_per_point[i] if report.oracle_per_point is not None else complex("nan")
        yield [i, *x, v.real, v.imag, oracle.real, oracle.imag]


def _cmd_verify(args, out: Path, say) -> dict:
    if args.config is not None or args.preset:
        runs = [_load(args, "verify")]
    else:
        runs = [(name, preset(name)) for name in PRESETS]
    rows, worst = [], 0.0
    for name, cfg in runs:
        provider = symbol_phi_provider(cfg.symbol, cfg.x_grid())
        res = verify_cocycle(provider)
        tol = args.tol or cfg.tolerances["cocycle"]
        rows.append({"name": name, "K": cfg.symbol.K, "max": res.max, "mean": res.mean, "tol": tol,
                     "passed": res.max <= tol})
        say(f"{name:>14s}  K={cfg.symbol.K.real:+.3f}{cfg.symbol.K.imag:+.3f}i  max {res.max:.3e}  mean {res.mean:.3e}")
        worst = max(worst, res.max / tol)
    write_csv(out / "verify_residuals.csv", ["name", "re_K", "im_K", "max_residual", "mean_residual"],
              [[r["name"], r["K"].real, r["K"].imag, r["max"], r["mean"]] for r in rows])
    doc = result_document(
        "verify", runs[0][1].hash if len(runs) == 1 else None,
        status="ok" if worst <= 1 else "failed",
        tables={"residuals": rows},
    )
    write_document(doc, out, "verify")
    if worst > 1:
        bad = next(r for r in rows if not r["passed"])
        raise ToleranceFailure(f"cocycle residual ({bad['name']})", bad["max"], bad["tol"])
    return doc


def _cmd_decompose(args, out: Path, say) -> dict:
    name, cfg = _load(args, "decompose")
    lambdas = _lambdas(args, cfg)
    tols = cfg.tolerances
    provider = symbol_phi_provider(cfg.symbol, cfg.x_grid())
    residual = verify_cocycle(provider)
    grid = chebyshev_grid(int(cfg.grids["t_nodes"]), float(cfg.grids["t_max"]))
    dec = decompose(provider, lambdas, tol=args.tol or tols["decompose"], spread_tol=tols["spread"],
                    series_tol=tols["series"], t_grid=grid)
    rows = [[t, i, v.real, v.imag] for t, sample in zip(dec.t_grid, dec.samples) for i, v in enumerate(sample)]
    write_csv(out / "decompose_psi.csv", ["t", "x_index", "re_psi", "im_psi"], rows)
    psi1 = dec.psi(1.0)
    say(f"{name}: K={cfg.symbol.K}, c={dec.c[0]:.12g}, psi(1)={psi1[0]:.12g} (first grid point)")
    doc = result_document(
        "decompose", cfg.hash, config=cfg.raw,
        scalars={"K": cfg.symbol.K, "c": dec.c, "psi_at_1": psi1},
        tables={"level_constants": dec.level_constants},
        diagnostics={**dec.diagnostics, "cocycle_residual": residual.max},
    )
    write_document(doc, out, "decompose")
    return doc


def _trace_doc(command: str, cfg: RunConfig, report: TraceReport, key: str, tol: float, out: Path) -> dict:
    n = cfg.symbol.n
    header = ["x_index", *[f"x{d + 1}" for d in range(n)], "re", "im", "re_oracle", "im_oracle"]
    write_csv(out / f"{command.replace('-', '_')}_density.csv", header, _per_point_rows(report))
    failed = report.oracle_gap is not None and report.oracle_gap > tol
    doc = result_document(
        command, cfg.hash, config=cfg.raw,
        status="failed" if failed else "ok",
        scalars={key: report.integrated, "K": report.order.K, "l": report.l},
        tables={"per_point": report.per_point, "oracle_per_point": report.oracle_per_point},
        diagnostics={**report.diagnostics, "oracle_gap": report.oracle_gap},
    )
    write_document(doc, out, command.replace("-", "_"))
    if failed:
        raise ToleranceFailure("oracle gap", report.oracle_gap, tol)
    return doc


def _cmd_residue(args, out: Path, say) -> dict:
    name, cfg = _load(args, "residue")
    tol = args.tol or cfg.tolerances["oracle"]
    report = wodzicki_density(cfg.symbol, cfg.x_grid(), _lambdas(args, cfg), tol=cfg.tolerances["spread"])
    say(f"{name}: Res = {report.integrated.real:.15g}{report.integrated.imag:+.3g}i  (oracle gap {report.oracle_gap:.2e})")
    return _trace_doc("residue", cfg, report, "Res", tol, out)


def _cmd_kv(args, out: Path, say) -> dict:
    name, cfg = _load(args, "kv-trace")
    tol = args.tol or cfg.tolerances["oracle"]
    report = kv_density(cfg.symbol, cfg.x_grid(), _lambdas(args, cfg), tol=cfg.tolerances["decompose"])
    gap = "n/a" if report.oracle_gap is None else f"{report.oracle_gap:.2e}"
    say(f"{name}: TR = {report.integrated.real:.15g}{report.integrated.imag:+.3g}i  (oracle gap {gap})")
    return _trace_doc("kv-trace", cfg, report, "TR", tol, out)


def _cmd_zeta(args, out: Path, say) -> dict:
    name, cfg = _load(args, "zeta-scan")
    z = cfg.zeta
    contour = cfg.contour
    margin = max(1.0, 2 * float(contour["radius"]))
    domain = Domain(z["re"][0] - margin, z["re"][1] + margin, z["im"][0] - margin, z["im"][1] + margin)
    family = SymbolFamily(cfg.symbol.n, cfg.symbol.layers, cfg.symbol.cutoff, cfg.x_grid(), domain,
                          _lambdas(args, cfg))
    re_values = np.linspace(z["re"][0], z["re"][1], int(z["re_nodes"]))
    im_values = np.linspace(z["im"][0], z["im"][1], int(z["im_nodes"]))
    rows, skipped = scan(family, re_values, im_values, float(z["t"]), float(z["exclusion"]))
    write_csv(out / "zeta_scan.csv", ["re_z", "im_z", "x_index", "re_psi", "im_psi"],
              [[zz.real, zz.imag, i, v.real, v.imag] for zz, vals in rows for i, v in enumerate(vals)])
    tol = args.tol or 1e-6
    poles, worst = [], None
    for m in contour["poles"]:
        rep = residue_at(family, m, float(contour["radius"]), int(contour["nodes"]), float(z["t"]))
        poles.append({"m": m, "residue": rep.residue_estimate, "c": rep.c_value, "gap": rep.gap,
                      "second_moment": rep.second_moment})
        say(f"{name}: pole z={m}: residue {rep.residue_estimate[0]:.12g}, -c = {-rep.c_value[0]:.12g}, gap {rep.gap:.2e}")
        if rep.gap > tol and worst is None:
            worst = rep
    doc = result_document(
        "zeta-scan", cfg.hash, config=cfg.raw,
        status="failed" if worst is not None else "ok",
        scalars={"points": len(rows), "skipped": skipped},
        tables={"poles": poles},
    )
    write_document(doc, out, "zeta_scan")
    if worst is not None:
        raise ToleranceFailure(f"residue gap at z={worst.m}", worst.gap, tol)
    return doc


def _cmd_selftest(args, out: Path, say) -> dict:
    if args.config is not None:
        _load(args, "residue")  # validates; the suite itself uses built-in presets
    results, doc = acceptance.selftest(args.corrupt_oracle, echo=say)
    write_document(doc, out, "selftest")
    failed = [r for r in results if not r.passed]
    if failed:
        first = failed[0]
        raise ToleranceFailure(f"criterion {first.number} ({first.name})", first.measured, first.tolerance)
    return doc


COMMANDS = {
    "verify": _cmd_verify,
    "decompose": _cmd_decompose,
    "residue": _cmd_residue,
    "kv-trace": _cmd_kv,
    "zeta-scan": _cmd_zeta,
    "selftest": _cmd_selftest,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = args.out or Path(os.environ.get("COCYCLE_OUT", "cocycle_out"))
    say = (lambda msg: None) if args.quiet else print
    try:
        COMMANDS[args.command](args, out, say)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ToleranceFailure as exc:
        print(f"tolerance failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except NumericalError as exc:
        label = "pole locus" if "pole locus" in str(exc) else type(exc).__name__
        print(f"numerical error ({label}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
