"""Command-line front end: ``startail <command> [options]``.

Exit codes: 0 success, 1 a requested check failed, 2 usage or validation
error. Options may also come from a JSON file given with ``--config``; flags
on the command line take precedence over the file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from . import checks, exact, rate_core, simulate, variational
from .rng import default_workers

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2
COMMANDS = ("rate", "minimize", "critical", "classify", "exact", "simulate", "verify", "curves")


class UsageError(Exception):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class RunConfig:
    command: str
    r: int | None = None
    n: int | None = None
    p: float | None = None
    N: int | None = None
    eps: float | None = None
    c: float | None = None
    delta: float | None = None
    seed: int = 0
    samples: int = 100_000
    workers: int | None = None
    tol: float = variational.DEFAULT_TOL
    window: float = 4.0
    regime: str = "auto"
    R: int | None = None
    h: float | None = None
    optimize_h: bool = False
    estimator: str = "naive"
    mode: str = "gnp"
    kind: str = "gnp"
    joint: bool = False
    distribution: bool = False
    b_case: str = "auto"
    residual: str = "mean"
    compare_rate: bool = False
    verify: bool = False
    grid_points: int = 1_000_000
    suite: str = "all"
    alpha: list = field(default_factory=list)
    points: int = 1000
    outdir: str | None = None
    output_format: str = "json"
    output_path: str | None = None
    sweep: list = field(default_factory=list)

    # -- validation ---------------------------------------------------------
    def need(self, *names: str):
        for name in names:
            if getattr(self, name) is None:
                raise UsageError(name, f"required by '{self.command}'")

    def check_common(self):
        if self.r is not None and (int(self.r) != self.r or self.r < 2):
            raise UsageError("r", "must be an integer >= 2")
        if self.n is not None and (int(self.n) != self.n or self.n < 1):
            raise UsageError("n", "must be a positive integer")
        if self.r is not None and self.n is not None and self.n <= self.r and self.command != "exact":
            raise UsageError("n", "must exceed r")
        if self.p is not None and not 0.0 < self.p < 1.0:
            raise UsageError("p", "must lie strictly between 0 and 1")
        if self.N is not None and (int(self.N) != self.N or self.N < 1):
            raise UsageError("N", "must be a positive integer")
        if self.eps is not None and not (math.isfinite(self.eps) and self.eps > 0):
            raise UsageError("eps", "must be positive")
        if self.c is not None and not (math.isfinite(self.c) and self.c >= 0):
            raise UsageError("c", "must be >= 0")
        if self.delta is not None and not self.delta > 0:
            raise UsageError("delta", "must be positive")
        if self.samples < 1:
            raise UsageError("samples", "must be >= 1")
        if self.workers is not None and self.workers < 1:
            raise UsageError("workers", "must be >= 1")
        if not self.tol > 0:
            raise UsageError("tol", "must be positive")
        if not self.window > 1:
            raise UsageError("window", "must exceed 1")
        if self.R is not None and self.R < 0:
            raise UsageError("R", "must be >= 0")
        if self.points < 1:
            raise UsageError("points", "must be >= 1")
        if self.output_format not in ("json", "csv"):
            raise UsageError("format", "must be 'json' or 'csv'")

    def star_params(self) -> rate_core.StarParams:
        self.need("r", "n", "p")
        try:
            return rate_core.StarParams(self.r, self.n, self.p, self.N)
        except ValueError as exc:
            raise UsageError(_field_of(exc, ("N", "n", "p", "r")), str(exc)) from None


def _field_of(exc: Exception, names) -> str:
    text = str(exc)
    for name in names:
        if text.startswith(name + " ") or text.startswith(name + ":"):
            return name
    return names[0]


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return "" if v is None else str(v).lower()
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, (list, tuple, dict)):
        return json.dumps(v)
    return str(v)


def _flatten(rec: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in rec.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _plain(obj):
    """Convert numpy scalars and tuples so that json output is stable."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        return obj.item()
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def render(records: list[dict], fmt: str) -> str:
    records = [_plain(r) for r in records]
    if fmt == "json":
        body = records[0] if len(records) == 1 else records
        return json.dumps(body, indent=2) + "\n"
    flat = [_flatten(r) for r in records]
    cols: list[str] = []
    for row in flat:
        cols.extend(k for k in row if k not in cols)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in flat:
        w.writerow([_fmt(row.get(c)) for c in cols])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands; each returns (records, exit code)
# ---------------------------------------------------------------------------

def _regime_tag(cfg: RunConfig, params: rate_core.StarParams):
    if cfg.c is not None:
        return rate_core.RegimeTag.poisson(cfg.c)
    kind = cfg.regime
    if kind == "auto":
        return None
    if kind == "PoissonTransition":
        r, n = params.r, params.n
        return rate_core.RegimeTag.poisson(params.mu / math.log(n) ** (r / (r - 1.0)))
    if kind == "Fractional":
        return rate_core.RegimeTag.fractional(params.rho)
    if kind == "Intermediate":
        return rate_core.RegimeTag.intermediate()
    if kind == "Dense":
        return rate_core.RegimeTag.dense()
    raise UsageError("regime", f"unknown regime {kind!r}")


def cmd_rate(cfg: RunConfig):
    cfg.need("eps")
    params = cfg.star_params()
    rep = rate_core.rate_report(params, cfg.eps, cfg.window, _regime_tag(cfg, params))
    return [rep.to_dict()], EXIT_OK


def cmd_classify(cfg: RunConfig):
    params = cfg.star_params()
    tag = rate_core.classify_regime(params, cfg.window)
    return [{"params": params.to_dict(), "regime": tag.to_dict(),
             "phi_n": rate_core.phi_order(params)}], EXIT_OK


def cmd_minimize(cfg: RunConfig):
    cfg.need("r", "eps", "c")
    sol = variational.solve(cfg.c, cfg.eps, cfg.r, cfg.tol)
    rec = sol.to_dict()
    code = EXIT_OK
    if cfg.verify:
        chk = variational.grid_check(cfg.c, cfg.eps, cfg.r, cfg.grid_points)
        rec["grid_check"] = chk
        code = EXIT_OK if chk["ok"] else EXIT_CHECK
    return [rec], code


def cmd_critical(cfg: RunConfig):
    cfg.need("r", "eps")
    return [variational.critical_constants(cfg.eps, cfg.r).to_dict()], EXIT_OK


def cmd_exact(cfg: RunConfig):
    if cfg.joint:
        cfg.need("n", "N", "p", "r", "R")
        joint = exact.exact_joint_YpYpp(cfg.n, cfg.N, cfg.p, cfg.r, cfg.R)
        bad = joint.na_violations()
        notes = []
        if joint.ypp_degenerate:
            notes.append("Y'' degenerate: R >= N, so Y'' is identically 0")
        if joint.yp_degenerate:
            notes.append("Y' degenerate: R < r, so Y' is identically 0")
        rec = {"kind": "joint", "n": cfg.n, "N": cfg.N, "p": cfg.p, "r": cfg.r, "R": cfg.R,
               "shape": list(joint.log_mass.shape), "na_violations": len(bad),
               "violations": [list(v) for v in bad[:20]], "notes": notes}
        return [rec], EXIT_OK if not bad else EXIT_CHECK
    if cfg.kind == "gnp":
        cfg.need("n", "p", "r")
        if cfg.distribution:
            dist = exact.exact_gnp_star_distribution(cfg.n, cfg.p, cfg.r)
            return _distribution_records(dist), EXIT_OK
        cfg.need("eps")
        lt = exact.exact_gnp_star_tail(cfg.n, cfg.p, cfg.r, cfg.eps)
        rec = {"kind": "gnp", "n": cfg.n, "p": cfg.p, "r": cfg.r, "eps": cfg.eps}
    elif cfg.kind == "iid":
        cfg.need("n", "N", "p", "r")
        part = "low" if cfg.R is not None else "all"
        if cfg.distribution:
            dist = exact.exact_Y_distribution(cfg.n, cfg.N, cfg.p, cfg.r, cfg.R, part)
            return _distribution_records(dist), EXIT_OK
        cfg.need("eps")
        lt = exact.exact_iid_tail(cfg.n, cfg.N, cfg.p, cfg.r, cfg.eps, cfg.R, part)
        rec = {"kind": "iid", "n": cfg.n, "N": cfg.N, "p": cfg.p, "r": cfg.r, "eps": cfg.eps,
               "R": cfg.R}
    else:
        raise UsageError("kind", "must be 'gnp' or 'iid'")
    rec |= {"log_tail": lt, "tail": math.exp(lt)}
    return [rec], EXIT_OK


def _distribution_records(dist: exact.DiscreteDistribution) -> list[dict]:
    return [{"support": int(s), "log_mass": float(m)} for s, m in zip(dist.support, dist.log_mass)]


def _simulate_one(cfg: RunConfig) -> dict:
    cfg.check_common()
    cfg.need("eps")
    est = cfg.estimator
    if est == "naive":
        params = cfg.star_params()
        res = simulate.naive_tail(params, cfg.eps, cfg.samples, cfg.seed, cfg.mode, cfg.workers)
    elif est == "tilted":
        cfg.need("n", "N", "p", "r")
        params = None
        if cfg.R is not None and cfg.R < cfg.r:
            raise UsageError("R", "must be >= r")
        res = simulate.tilted_tail(cfg.n, cfg.N, cfg.p, cfg.r, cfg.eps, cfg.R, cfg.h, cfg.samples,
                                   cfg.seed, cfg.optimize_h, cfg.workers)
    elif est == "planted":
        cfg.need("delta")
        params = cfg.star_params()
        res = simulate.planted_tail_lower(params, cfg.eps, cfg.delta, cfg.samples, cfg.seed,
                                          cfg.b_case, cfg.residual, cfg.window, cfg.workers)
    else:
        raise UsageError("estimator", "must be 'naive', 'tilted' or 'planted'")
    rec = res.to_dict()
    if cfg.compare_rate:
        if params is None:
            raise UsageError("compare_rate", "needs a naive or planted estimate")
        rec["rate_comparison"] = (simulate.rate_comparison(params, cfg.eps, res, cfg.window)
                                  if res.estimate > 0 else None)
    return rec


def cmd_simulate(cfg: RunConfig):
    if not cfg.sweep:
        return [_simulate_one(cfg)], EXIT_OK
    base = asdict(cfg)
    base.pop("sweep")
    out = []
    for i, override in enumerate(cfg.sweep):
        if not isinstance(override, dict):
            raise UsageError("sweep", f"entry {i} must be an object")
        out.append(_simulate_one(_build(base | override)))
    return out, EXIT_OK


def cmd_verify(cfg: RunConfig):
    try:
        results = checks.run_suite(cfg.suite)
    except ValueError as exc:
        raise UsageError("suite", str(exc)) from None
    ok = all(r.ok for r in results)
    return [r.to_dict() for r in results], EXIT_OK if ok else EXIT_CHECK


def cmd_curves(cfg: RunConfig):
    cfg.need("r", "eps")
    alphas = [float(a) for a in cfg.alpha] or variational.default_curve_alphas(cfg.eps, cfg.r)
    for a in alphas:
        if not a > 0:
            raise UsageError("alpha", "values must be positive")
    d_touch, a0 = variational.alpha0_point(cfg.eps, cfg.r)
    records = []
    outdir = Path(cfg.outdir) if cfg.outdir else None
    if outdir is None and len(alphas) > 1:
        raise UsageError("outdir", "required when more than one alpha is requested")
    for i, a in enumerate(alphas):
        text = variational.curves_csv(a, cfg.eps, cfg.r, cfg.points)
        if outdir is None:
            return text, EXIT_OK
        outdir.mkdir(parents=True, exist_ok=True)
        path = outdir / f"curve_{i}.csv"
        path.write_text(text, encoding="utf-8")
        records.append({"alpha": a, "path": str(path), "points": cfg.points})
    return [{"r": cfg.r, "eps": cfg.eps, "alpha0": a0, "delta_touch": d_touch,
             "fprime_min_at_alpha0": variational.f_alpha_prime(a0, d_touch, cfg.eps, cfg.r),
             "curves": records}], EXIT_OK


DISPATCH = {
    "rate": cmd_rate, "minimize": cmd_minimize, "critical": cmd_critical,
    "classify": cmd_classify, "exact": cmd_exact, "simulate": cmd_simulate,
    "verify": cmd_verify, "curves": cmd_curves,
}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON file of option values; flags override it")
    p.add_argument("--format", dest="output_format", choices=("json", "csv"))
    p.add_argument("--output", dest="output_path", help="write to this file instead of stdout")


def _add_params(p: argparse.ArgumentParser, *names: str):
    spec = {
        "r": (int, "star size"), "n": (int, "number of vertices / variables"),
        "p": (float, "edge probability"), "N": (int, "binomial trials (default n-1)"),
        "eps": (float, "relative excess"), "c": (float, "constant c of the Poisson regime"),
        "delta": (float, "slack of the planted construction"),
        "seed": (int, "random seed"), "samples": (int, "Monte-Carlo samples"),
        "workers": (int, "worker threads (default $STARTAIL_WORKERS or 1)"),
        "tol": (float, "relative tie tolerance"), "window": (float, "regime window"),
        "R": (int, "cutoff for the split Y' / Y''"), "h": (float, "tilt parameter"),
        "points": (int, "curve grid size"), "grid_points": (int, "grid size of the verify oracle"),
    }
    for name in names:
        typ, help_ = spec[name]
        flag = "--" + name.replace("_", "-")
        p.add_argument(flag, dest=name, type=typ, help=help_)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="startail",
                                 description="Upper tails of r-star counts in G(n, p).")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rate", help="leading-order rate and all four case values")
    _add_params(p, "r", "n", "p", "N", "eps", "c", "window")
    p.add_argument("--regime", choices=("auto", "PoissonTransition", "Intermediate",
                                        "Fractional", "Dense"))

    p = sub.add_parser("classify", help="regime tag and Phi_n")
    _add_params(p, "r", "n", "p", "N", "window")

    p = sub.add_parser("minimize", help="solve the one-dimensional variational problem")
    _add_params(p, "r", "eps", "c", "tol", "grid_points")
    p.add_argument("--verify", action="store_const", const=True, default=None,
                   help="cross-check against a uniform grid")

    p = sub.add_parser("critical", help="alpha0, alpha1 and c_crit")
    _add_params(p, "r", "eps")

    p = sub.add_parser("exact", help="exact small-instance distributions and tails")
    _add_params(p, "r", "n", "p", "N", "eps", "R")
    p.add_argument("--kind", choices=("gnp", "iid"))
    p.add_argument("--joint", action="store_const", const=True, default=None,
                   help="joint law of (Y', Y'') and its negative-association check")
    p.add_argument("--distribution", action="store_const", const=True, default=None,
                   help="emit the full distribution instead of a tail")

    p = sub.add_parser("simulate", help="Monte-Carlo tail estimates")
    _add_params(p, "r", "n", "p", "N", "eps", "delta", "seed", "samples", "workers", "R", "h",
                "window")
    p.add_argument("--estimator", choices=("naive", "tilted", "planted"))
    p.add_argument("--mode", choices=("gnp", "iid"))
    p.add_argument("--optimize-h", dest="optimize_h", action="store_const", const=True,
                   default=None)
    p.add_argument("--b-case", dest="b_case", choices=("auto", "zero", "finite", "infinite"))
    p.add_argument("--residual", choices=("mean", "certified"))
    p.add_argument("--compare-rate", dest="compare_rate", action="store_const", const=True,
                   default=None)

    p = sub.add_parser("verify", help="run self-check suites")
    p.add_argument("--suite", help=f"one of {', '.join(sorted(checks.SUITES))} or all")

    p = sub.add_parser("curves", help="dump f_alpha, g_alpha and h as CSV")
    _add_params(p, "r", "eps", "points")
    p.add_argument("--alpha", action="append", type=float)
    p.add_argument("--outdir")

    for sp in sub.choices.values():
        _add_common(sp)
    return ap


def _build(values: dict) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise UsageError(unknown[0], "unknown option")
    cfg = RunConfig(**values)
    cfg.check_common()
    return cfg


def load_config(argv) -> RunConfig:
    ap = build_parser()
    ns = vars(ap.parse_args(argv))
    values: dict = {}
    cfg_path = ns.pop("config", None)
    if cfg_path:
        try:
            values = json.loads(Path(cfg_path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError("config", str(exc)) from None
        if not isinstance(values, dict):
            raise UsageError("config", "must hold a JSON object")
        values.pop("command", None)
    values |= {k: v for k, v in ns.items() if v is not None}
    return _build(values)


def main(argv=None) -> int:
    try:
        cfg = load_config(argv)
        if cfg.workers is None:
            cfg.workers = default_workers()
        records, code = DISPATCH[cfg.command](cfg)
    except SystemExit as exc:  # argparse
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    except UsageError as exc:
        print(f"startail: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except exact.GuardError as exc:
        print(f"startail: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"startail: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = records if isinstance(records, str) else render(records, cfg.output_format)
    if cfg.output_path:
        Path(cfg.output_path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
