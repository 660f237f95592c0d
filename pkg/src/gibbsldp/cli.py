"""Command-line entry point: ``gibbsldp <command> ...``.

Every output carries its own argv in the header, so ``gibbsldp rerun FILE``
regenerates it. Exit codes: 0 ok, 1 named numeric failure, 2 usage.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from . import acceptance
from . import ldplab as LD
from . import ratefn as R
from .errors import EmptyEvent, GibbsLDPError
from .gibbs import LYAPUNOV, ConfigSet, Kt, MapPotential, Poly, gibbs_weights
from .maps import Family, MapSpec, hyperbolicity_probe
from .orbitsets import build_orbit_set
from .pressure import (curve_from_orbit, factorization_pressure, pressure_estimate,
                       shift_pressure_estimate, transfer_matrix_pressure)
from .shift import Box, ShiftPotential, ShiftSpec, parse_extension

PROBE_N, PROBE_SAMPLES, PROBE_SEED = 8, 64, 0


class UsageError(Exception):
    pass


# -- parsing helpers ----------------------------------------------------------------

def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _grid(text: str) -> np.ndarray:
    """``lo:hi:step`` (inclusive) or a comma list."""
    if ":" in text:
        lo, hi, step = (float(v) for v in text.split(":"))
        return R.default_grid(lo, hi, step)
    return np.array(_floats(text))


def _map(args) -> MapSpec:
    try:
        m = MapSpec.parse(args.map)
    except ValueError as exc:
        raise UsageError(f"--map: {exc}") from None
    if not m.certified and not args.unsafe:
        raise UsageError(f"{m}: |c| >= 1/4 is outside the certified range; pass --unsafe to run anyway")
    return m


def _map_potential(text: str | None, t: float) -> MapPotential:
    if not text:
        return Kt(t)
    parts = []
    for term in text.split("+"):
        term = term.strip()
        if term.startswith("kt:"):
            parts.append(Kt(float(term[3:])))
        else:
            parts.append(Poly.parse(term))
    pot = parts[0]
    for p in parts[1:]:
        pot = pot + p
    return pot


def _shift_potential(text: str | None, spec: ShiftSpec) -> ShiftPotential | None:
    if not text or text == "0":
        return None
    kind, _, arg = text.partition(":")
    m, l = spec.alphabet_size, spec.dimension
    if kind == "single":
        vals = _floats(arg)
        if len(vals) != m:
            raise UsageError(f"single-site potential needs {m} values")
        return ShiftPotential.single_site(vals, dimension=l)
    if kind == "nn":
        return ShiftPotential.nearest_neighbor(float(arg), m, l)
    if kind == "indicator":
        return ShiftPotential.indicator(int(arg), m, l)
    if kind == "file":
        return ShiftPotential.from_json(Path(arg).read_text(), m, label=f"file:{arg}")
    raise UsageError(f"unknown shift potential {text!r}")


def _shift(args):
    try:
        spec = ShiftSpec.parse(args.shift)
        box = Box.parse(args.box) if args.box else Box.cube(10, spec.dimension)
        if box.dimension == 1 and spec.dimension > 1:
            box = Box.cube(box.sides[0], spec.dimension)
        ext = parse_extension(args.extension)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return spec, box, ext


def _probe(m: MapSpec, meta: dict):
    if m.family is Family.POWER:
        return
    probe = hyperbolicity_probe(m, PROBE_N, PROBE_SAMPLES, PROBE_SEED)
    meta["hyperbolicity_probe"] = probe
    if probe <= 0:
        print(f"warning: hyperbolicity probe {probe:.4g} <= 0 for {m}; results carry no guarantee",
              file=sys.stderr)


# -- output ----------------------------------------------------------------------

def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _finite_rows(rows: list[dict]) -> list[dict]:
    """Replace +-inf by the signed sentinel and list the affected keys in ``infinite``."""
    out = []
    for row in rows:
        flagged, clean = [], {}
        for k, v in row.items():
            if isinstance(v, (float, np.floating)) and math.isinf(v):
                flagged.append(k)
                v = math.copysign(R.SENTINEL, v)
            clean[k] = v
        clean["infinite"] = ";".join(flagged)
        out.append(clean)
    return out


def render(meta: dict, rows: list[dict], fmt: str) -> str:
    rows = _finite_rows(rows)
    if fmt == "json":
        return json.dumps({"meta": meta, "rows": rows}, indent=1, default=_cell) + "\n"
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write(f"#{k}={json.dumps(v) if k == 'argv' else _cell(v)}\n")
    cols: list[str] = []
    for row in rows:
        cols += [k for k in row if k not in cols]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in cols])
    return buf.getvalue()


def _emit(args, meta: dict, rows: list[dict]):
    text = render(meta, rows, args.format)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _meta(args, argv) -> dict:
    meta = {"tool": "gibbsldp", "version": __version__, "argv": list(argv), "command": args.command}
    for k, v in sorted(vars(args).items()):
        if k not in ("func", "command", "output"):
            meta[k] = v
    return meta


# -- commands ----------------------------------------------------------------------

def cmd_pressure(args, meta) -> list[dict]:
    rows = []
    if args.map:
        m = _map(args)
        _probe(m, meta)
        orb = build_orbit_set(m, args.method, args.n, eps=args.eps_sep, seed=args.seed)
        meta["count"] = len(orb)
        for t in _floats(args.t):
            pot = _map_potential(args.potential, t)
            est = pressure_estimate(orb, pot, workers=args.workers)
            row = {"t": t, "potential": pot.label, "n": est.horizon, "estimate": est.value}
            if args.oracle == "exact":
                if m.family is not Family.POWER or not isinstance(pot, Kt):
                    raise UsageError("--oracle exact needs a power map with k_t")
                exact = (1 - pot.t) * math.log(m.degree)
                row.update(oracle=exact, gap=abs(est.value - exact))
            rows.append(row)
        return rows
    spec, box, ext = _shift(args)
    pot = _shift_potential(args.potential, spec)
    est = shift_pressure_estimate(spec, box, pot, ext, workers=args.workers)
    row = {"potential": "0" if pot is None else pot.label, "box": "x".join(map(str, box.sides)),
           "volume": box.volume, "estimate": est.value}
    if args.oracle:
        zero = pot or ShiftPotential.constant(0.0, spec.alphabet_size, spec.dimension)
        if args.oracle == "transfer":
            if spec.dimension != 1:
                raise UsageError("--oracle transfer needs l=1")
            oracle = transfer_matrix_pressure(spec, zero)
        elif args.oracle in ("factorization", "exact"):
            oracle = factorization_pressure(zero)
        else:
            raise UsageError(f"unknown oracle {args.oracle!r}")
        row.update(oracle=oracle, gap=abs(est.value - oracle))
    return [row]


def _curve(args, meta):
    m = _map(args)
    _probe(m, meta)
    orb = build_orbit_set(m, args.method, args.n, eps=args.eps_sep, seed=args.seed)
    grid = _grid(args.t_grid) if args.t_grid else R.default_grid()
    return orb, curve_from_orbit(orb, grid)


def cmd_rate_curve(args, meta) -> list[dict]:
    if not args.map:
        raise UsageError("rate-curve needs --map")
    _, curve = _curve(args, meta)
    t = _floats(args.t)[0]
    meta["degenerate"] = curve.is_degenerate
    if args.x_grid and args.x_grid != "auto":
        xs = _grid(args.x_grid)
    elif curve.is_degenerate:
        d = curve(0.0)
        xs = np.array([d - 0.1, d, d + 0.1])
    else:
        xs = R.interior_x_grid(curve, 40)
    meta["chi_range"] = "" if curve.is_degenerate else ",".join(repr(v) for v in R.lyapunov_range(curve))
    return R.rate_curve_rows(curve, t, xs, dual_check=args.dual_check)


def _report_row(rep: LD.DeviationReport | None, base: dict) -> dict:
    if rep is None:
        return {**base, "estimate": -math.inf, "prediction": None, "gap": None, "event_count": 0}
    return {**base, "estimate": rep.estimate, "prediction": rep.prediction, "gap": rep.gap,
            "event_count": rep.event_count, "total": rep.total_count}


def cmd_deviation(args, meta) -> list[dict]:
    horizons = _ints(args.n_list) if args.n_list else [args.n]
    rows = []
    if args.shift:
        spec, _, ext = _shift(args)
        pot = _shift_potential(args.potential, spec)
        k = _shift_potential(args.observable or "indicator:1", spec)
        center = args.center if args.center is not None else 1.0 / spec.alphabet_size
        rate = None
        if args.predict and pot is None and spec.alphabet_size == 2 and len(k.window) == 1:
            rate = R.indicator_rate_full_shift
        for n in horizons:
            nu = gibbs_weights(ConfigSet(spec, Box.cube(n, spec.dimension), ext), pot, workers=args.workers)
            for eps in _floats(args.eps):
                try:
                    rep = LD.deviation_prob(nu, k, center, eps, rate=rate)
                except EmptyEvent:
                    rep = None
                rows.append(_report_row(rep, {"n": n, "eps_or_x": eps, "center": center}))
        return rows
    m = _map(args)
    _probe(m, meta)
    t = _floats(args.t)[0]
    grid = _grid(args.t_grid) if args.t_grid else R.default_grid()
    final = build_orbit_set(m, args.method, max(horizons), eps=args.eps_sep, seed=args.seed)
    curve = curve_from_orbit(final, grid)
    meta["prediction_curve_n"] = final.horizon
    for n in horizons:
        orb = final if n == final.horizon else build_orbit_set(m, args.method, n, eps=args.eps_sep,
                                                                seed=args.seed)
        pc = curve if args.predict else None
        if args.kind == "deviation":
            nu = gibbs_weights(orb, Kt(t) if t else None, workers=args.workers)
            center = args.center if args.center is not None else R.chi(curve, t)
            for eps in _floats(args.eps):
                try:
                    rep = LD.deviation_prob(nu, LYAPUNOV, center, eps, curve=pc)
                except EmptyEvent:
                    rep = None
                rows.append(_report_row(rep, {"n": n, "eps_or_x": eps, "center": center}))
        else:
            xs = _floats(args.x) if args.x else [R.chi(curve, t)]
            for x in xs:
                try:
                    if args.kind == "tail":
                        rep = LD.lyapunov_tail_weighted(orb, t, x, args.side, pc)
                    else:
                        rep = LD.entropy_by_counting(orb, x, args.side, pc)
                except EmptyEvent:
                    rep = None
                rows.append(_report_row(rep, {"n": n, "eps_or_x": x, "side": args.side}))
    return rows


def cmd_selftest(args) -> int:
    results = acceptance.run(args.filter, echo=print)
    if not results:
        print(f"no criterion matches {args.filter!r}", file=sys.stderr)
        return 2
    failed = [r for r in results if not r.ok]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return 1 if failed else 0


def cmd_rerun(args) -> int:
    argv = None
    for line in Path(args.file).read_text().splitlines():
        if line.startswith("#argv="):
            argv = json.loads(line[len("#argv="):])
            break
        if line.lstrip().startswith("{"):
            argv = json.loads(Path(args.file).read_text())["meta"]["argv"]
            break
    if argv is None:
        print(f"{args.file}: no argv header", file=sys.stderr)
        return 2
    argv = _strip_output(argv)
    if args.output:
        argv += ["--output", args.output]
    return main(argv)


def _strip_output(argv: list[str]) -> list[str]:
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
            continue
        if a == "--output":
            skip = True
            continue
        if a.startswith("--output="):
            continue
        out.append(a)
    return out


# -- parser -------------------------------------------------------------------------

def _common(p: argparse.ArgumentParser):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--map", help="powermap:d or quadratic:c")
    src.add_argument("--shift", help="m=<symbols>,l=<dimension>[,delta=]")
    p.add_argument("--method", default="periodic", choices=["periodic", "preimage", "separated"])
    p.add_argument("--n", type=int, default=12, help="horizon")
    p.add_argument("--t", default="0", help="potential parameter(s), comma separated")
    p.add_argument("--potential", help="map: kt:t | re:j:a | im:j:a | const:a joined by '+'; "
                                       "shift: single:v0,v1,... | nn:beta | indicator:s | file:path")
    p.add_argument("--box", help="box sides, e.g. 10 or 4x4")
    p.add_argument("--extension", default="periodic", help="periodic | padded[:symbol]")
    p.add_argument("--eps-sep", type=float, default=0.05, help="separation for --method separated")
    p.add_argument("--t-grid", help="lo:hi:step for the pressure curve")
    p.add_argument("--unsafe", action="store_true", help="allow quadratic parameters with |c| >= 1/4")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", default="csv", choices=["csv", "json"])
    p.add_argument("--output", help="write here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gibbsldp", description="Gibbs ensembles, pressure and rate functions")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pressure", help="pressure estimates with optional oracles")
    _common(p)
    p.add_argument("--oracle", choices=["exact", "transfer", "factorization"])
    p.set_defaults(func=cmd_pressure)

    p = sub.add_parser("rate-curve", help="level-1 Lyapunov rate over an x-grid")
    _common(p)
    p.add_argument("--x-grid", help="lo:hi:step, comma list, or auto")
    p.add_argument("--dual-check", action="store_true", help="add the Legendre transform and its gap")
    p.set_defaults(func=cmd_rate_curve)

    p = sub.add_parser("deviation", help="deviation probabilities, Lyapunov tails, entropy counts")
    _common(p)
    p.add_argument("--kind", default="deviation", choices=["deviation", "tail", "count"])
    p.add_argument("--n-list", help="comma-separated horizons (overrides --n)")
    p.add_argument("--eps", default="0.01", help="comma-separated thresholds")
    p.add_argument("--x", help="comma-separated Lyapunov levels for tail/count")
    p.add_argument("--side", default="above", choices=["above", "below"])
    p.add_argument("--center", type=float)
    p.add_argument("--observable", help="shift observable (default indicator:1)")
    p.add_argument("--predict", action="store_true", help="attach rate-function predictions")
    p.set_defaults(func=cmd_deviation)

    p = sub.add_parser("selftest", help="run the acceptance battery")
    p.add_argument("--filter", help="substring of a criterion name or tag, or cN")
    p.set_defaults(func=None)

    p = sub.add_parser("rerun", help="regenerate an output from its header")
    p.add_argument("file")
    p.add_argument("--output")
    p.set_defaults(func=None)
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "selftest":
        return cmd_selftest(args)
    if args.command == "rerun":
        return cmd_rerun(args)
    if args.workers < 1:
        parser.print_usage(sys.stderr)
        print("gibbsldp: error: --workers must be >= 1", file=sys.stderr)
        return 2
    if args.command != "rate-curve" and not (args.map or args.shift):
        parser.print_usage(sys.stderr)
        print("gibbsldp: error: one of --map/--shift is required", file=sys.stderr)
        return 2
    meta = _meta(args, argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            rows = args.func(args, meta)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"gibbsldp: error: {exc}", file=sys.stderr)
        return 2
    except GibbsLDPError as exc:
        print(f"gibbsldp: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    _emit(args, meta, rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
