"""Command-line front end: ``python -m slspec <command> --config run.yaml``.

Commands write CSV tables, ``report.txt`` and ``manifest.json`` into the
output directory. Exit codes: 0 success, 2 configuration or input error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .asymptotics import (Regime, auto_regime, check_regime, discriminant, predict_pair,
                          residual_table, simplicity_report, window_center)
from .bc_model import (CanonicalBC, Family, adjoint_of, classify, classify_case, compute_theta,
                       is_regular, is_regular_not_strongly)
from .config import RunConfig, load_config
from .contour import Rect
from .determinant import DeterminantContext, trace_rows
from .eig_solver import SolverOptions, SpectralProblem
from .errors import (BCError, ConditionViolated, ConfigError, PotentialError, SpectralError,
                     UndefinedCondition)
from .oracle import build_pencil, calibrate_constant, compare_with_solver, oracle_eigs
from .potential import Potential, Smoothness, endpoint_condition, moment_table, sine_decay_condition
from .riesz_diag import angles_from_eigs, gather_conditions, riesz_verdict

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

EIG_COLUMNS = ["n", "j", "re_mu", "im_mu", "re_lambda", "im_lambda", "multiplicity",
               "det_residual", "bc_residual"]
RESIDUAL_COLUMNS = ["n", "j", "regime", "re_mu", "re_mu_pred", "abs_r", "n_abs_r", "n2_abs_r"]
ANGLE_COLUMNS = ["n", "angle", "n_angle"]
ORACLE_COLUMNS = ["n", "j", "lambda_solver", "lambda_oracle", "abs_diff", "error_bar"]
TRACE_COLUMNS = ["re_mu", "im_mu", "re_delta", "im_delta"]
MOMENT_COLUMNS = ["n", "c", "s", "n_s"]

_THEOREM_NUMBER = {
    (Family.T1, 1, Regime.L1): 1, (Family.T1, 1, Regime.AC): 2,
    (Family.T1, 0, Regime.L1): 3, (Family.T1, 0, Regime.AC): 4,
    (Family.T2, 1, Regime.L1): 5, (Family.T2, 1, Regime.AC): 6,
    (Family.T2, 0, Regime.L1): 7, (Family.T2, 0, Regime.AC): 8,
}


def theorem_label(cbc: CanonicalBC, regime: Regime, part: str = "a") -> str:
    if regime is Regime.UNPERTURBED:
        return "Unperturbed closed-form roots"
    return f"Theorem {_THEOREM_NUMBER[(cbc.family, cbc.sigma, regime)]}({part})"


# ------------------------------------------------------------------ output

def fmt_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        return f"{v + 0.0:.12e}"
    return str(v)


class OutputWriter:
    """Collects every file of a run and writes them in one place."""

    def __init__(self, out_dir: str | Path):
        self.out_dir = Path(out_dir)
        self.files: dict[str, str] = {}

    def csv(self, name: str, columns: Sequence[str], rows: Iterable[dict]) -> None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt_value(r[c]) for c in columns])
        self.files[name] = buf.getvalue()

    def text(self, name: str, body: str) -> None:
        self.files[name] = body if body.endswith("\n") else body + "\n"

    def manifest(self, command: str, cfg: RunConfig, extra: dict | None = None) -> None:
        data = {
            "tool": "slspec",
            "version": __version__,
            "command": command,
            "config": cfg.to_dict(),
            "outputs": sorted(self.files) + ["manifest.json"],
        }
        if extra:
            data.update(extra)
        self.text("manifest.json", json.dumps(data, indent=2, sort_keys=True))

    def flush(self) -> list[Path]:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        paths = []
        for name in sorted(self.files):
            p = self.out_dir / name
            p.write_text(self.files[name])
            paths.append(p)
        return paths


class Report:
    def __init__(self, title: str):
        self.lines = [title, "=" * len(title), ""]

    def section(self, heading: str) -> None:
        self.lines += [heading, "-" * len(heading)]

    def line(self, key: str, value="") -> None:
        self.lines.append(f"{key}: {value}" if value != "" else key)

    def end(self) -> None:
        self.lines.append("")

    def render(self) -> str:
        return "\n".join(self.lines).rstrip() + "\n"


def _c(z) -> str:
    z = complex(z)
    return f"{z.real:.10g}{z.imag + 0.0:+.10g}j"


def _f(x) -> str:
    if x is None:
        return "nan"
    if isinstance(x, complex):
        if x.imag != 0:
            return _c(x)
        x = x.real
    return "nan" if math.isnan(x) else f"{x + 0.0:.6g}"


def _header(rep: Report, cfg: RunConfig, q: Potential) -> None:
    rep.section("Problem")
    rep.line("conditions", cfg.bc.canonical.describe())
    rep.line("potential", q.describe())
    if q.shift != 0:
        rep.line("note", f"eigenvalues refer to q minus its mean; add {q.shift:.12g} to lambda")
    rep.end()


# ------------------------------------------------------------------ helpers

def _resolve_regime(cfg: RunConfig, q: Potential, cbc: CanonicalBC) -> tuple[Regime, str]:
    n_range = range(max(cfg.n_min, 1), cfg.n_max + 1)
    if cfg.regime == "auto":
        if q.is_zero:
            return Regime.UNPERTURBED, "q = 0: closed-form roots"
        return auto_regime(q, cbc, cfg.variant, n_range)
    regime = Regime(cfg.regime)
    if regime is Regime.UNPERTURBED:
        return regime, "requested"
    try:
        check_regime(cbc, regime, q, cfg.variant)
    except (ConditionViolated, UndefinedCondition) as exc:
        return Regime.UNPERTURBED, f"requested {regime.value} but its hypothesis fails ({exc}); unperturbed formulas only"
    return regime, "requested"


def _problem(cfg: RunConfig, q: Potential, regime: Regime, functions: bool = True) -> SpectralProblem:
    s = cfg.solver
    opts = SolverOptions(n0=s.n0, half_width=s.half_width, tau_mult=s.tau_mult, n_out=s.n_out,
                         tol_ode=cfg.tolerances.ode, eig_scale=cfg.tolerances.eig, regime=regime,
                         variant=cfg.variant, functions=functions)
    return SpectralProblem(q, cfg.bc.canonical, opts)


def _eig_summary(rep: Report, eigs) -> None:
    rep.line("eigenvalues", len(eigs))
    mult = [e for e in eigs if e.multiplicity > 1]
    rep.line("multiple roots", ", ".join(f"n={e.n} (m={e.multiplicity})" for e in mult) or "none")
    amb = sorted({e.n for e in eigs if e.ambiguous})
    rep.line("ambiguous labels", ", ".join(map(str, amb)) or "none")
    det = [e.det_residual for e in eigs if np.isfinite(e.det_residual)]
    bc = [e.bc_residual for e in eigs if np.isfinite(e.bc_residual)]
    rep.line("max det residual", _f(max(det)) if det else "nan")
    rep.line("max bc residual", _f(max(bc)) if bc else "nan")


# ------------------------------------------------------------------ commands

def cmd_classify(cfg: RunConfig, out: OutputWriter, threads: int = 1) -> None:
    cbc = cfg.bc.canonical
    rep = Report("Boundary-condition classification")
    rep.section("Classification")
    raw = cfg.bc.raw
    if raw is not None:
        th = compute_theta(raw)
        rep.line("raw coefficients", ", ".join(f"{k}={_c(getattr(raw, k))}"
                                               for k in ("a1", "b1", "a0", "b0", "c0", "d0")))
        rep.line("theta_-1", _c(th.theta_minus1))
        rep.line("theta_0", _c(th.theta_0))
        rep.line("theta_1", _c(th.theta_1))
        rep.line("theta_0^2 - 4 theta_1 theta_-1", _c(th.discriminant))
        rep.line("regular", is_regular(raw))
        rep.line("regular, not strongly regular", is_regular_not_strongly(raw))
        rep.line("taxonomy", classify(raw).value)
    rep.line("canonical form", cbc.describe())
    rep.line("family", cbc.family.value)
    rep.line("sigma", cbc.sigma)
    rep.line("case", classify_case(cbc).value)
    if cbc.adjoint:
        # the given rows are an alpha form whose adjoint is the canonical form
        given = adjoint_of(cbc)
        rep.line("given alpha form", f"form {given.form}, sigma={given.sigma}, row coefficient "
                                     f"{_c(given.a_row)}, value coefficient {_c(given.a_val)}")
        rep.line("adjoint", replace(cbc, adjoint=False).describe())
        rep.line("note", "eigenvalues are the conjugates of those of the adjoint canonical form")
    else:
        adj = adjoint_of(cbc)
        rep.line("adjoint", f"form {adj.form}, sigma={adj.sigma}, row coefficient {_c(adj.a_row)}, "
                            f"value coefficient {_c(adj.a_val)}")
    rep.end()
    out.text("report.txt", rep.render())


def cmd_eigs(cfg: RunConfig, out: OutputWriter, threads: int = 1) -> list:
    q = cfg.potential.build()
    cbc = cfg.bc.canonical
    regime, note = _resolve_regime(cfg, q, cbc)
    prob = _problem(cfg, q, regime)
    eigs = prob.solve(cfg.n_min, cfg.n_max, low=cfg.solver.low, threads=threads)
    out.csv("eigenvalues.csv", EIG_COLUMNS, (e.as_csv() for e in eigs))

    top = window_center(cbc.sigma, cfg.n_max) + cfg.solver.half_width
    mus = np.linspace(0.0, top, max(64, int(8 * top)) + 1)[1:]
    ctx = DeterminantContext(q, cbc, tol=cfg.tolerances.ode, rows=cbc.source_functionals())
    out.csv("determinant_trace.csv", TRACE_COLUMNS, trace_rows(ctx, mus))

    rep = Report("Eigenvalue sweep")
    _header(rep, cfg, q)
    rep.section(theorem_label(cbc, regime, "a"))
    rep.line("regime used for labels", f"{regime.value} ({note})")
    rep.line("index range", f"{cfg.n_min}..{cfg.n_max}")
    _eig_summary(rep, eigs)
    rep.end()
    out.text("report.txt", rep.render())
    return eigs


def cmd_asym(cfg: RunConfig, out: OutputWriter, threads: int = 1):
    q = cfg.potential.build()
    cbc = cfg.bc.canonical
    regime, note = _resolve_regime(cfg, q, cbc)
    n_min = max(cfg.n_min, cfg.solver.n0)
    prob = _problem(cfg, q, regime, functions=False)
    eigs = prob.solve(n_min, cfg.n_max, low=False, threads=threads)
    preds = [p for n in range(n_min, cfg.n_max + 1) for p in predict_pair(cbc, regime, q, n, cfg.variant)]
    table = residual_table(eigs, preds)
    out.csv("residuals.csv", RESIDUAL_COLUMNS, (r.as_csv() for r in table.rows))
    out.csv("moments.csv", MOMENT_COLUMNS,
            moment_table(q, range(n_min, cfg.n_max + 1), cbc.sigma))
    gaps = simplicity_report(eigs, preds, cfg.solver.tau_mult)

    rep = Report("Asymptotic residuals")
    _header(rep, cfg, q)
    rep.section(theorem_label(cbc, regime, "a"))
    rep.line("regime", f"{regime.value} ({note})")
    if regime is Regime.UNPERTURBED and cfg.regime in ("auto", "Unperturbed") and not q.is_zero:
        rep.line("warning", "no perturbation hypothesis verified; residuals compare against q = 0 roots")
    if regime is Regime.AC:
        d = discriminant(cbc, q.q0, q.q1, cfg.variant)
        rep.line("discriminant", f"{d.name} = {_c(d.value)} (formula variant: {cfg.variant})")
    rep.line("branch convention", "principal square root; j = 1 takes the minus sign")
    rep.line("index range", f"{n_min}..{cfg.n_max}")
    for j, s in sorted(table.slopes.items()):
        rep.line(f"log-log slope of n|r| (j={j})", _f(s))
    simple = [g for g in gaps if g.simple]
    rep.line("simple pairs", f"{len(simple)} of {len(gaps)}")
    if gaps:
        last = gaps[-1]
        rep.line(f"gap at n={last.n}", f"{_f(last.gap)} (predicted {_f(last.predicted_gap)})")
    _eig_summary(rep, eigs)
    rep.end()
    out.text("report.txt", rep.render())
    return table


def cmd_riesz(cfg: RunConfig, out: OutputWriter, threads: int = 1):
    q = cfg.potential.build()
    cbc = cfg.bc.canonical
    regime, note = _resolve_regime(cfg, q, cbc)
    n_min = max(cfg.n_min, cfg.solver.n0)
    prob = _problem(cfg, q, regime)
    eigs = prob.solve(n_min, cfg.n_max, low=False, threads=threads)
    records = angles_from_eigs(eigs)
    out.csv("angles.csv", ANGLE_COLUMNS, (r.as_csv() for r in records))
    conds = gather_conditions(q, cbc, range(n_min, cfg.n_max + 1), cfg.variant)
    res = riesz_verdict(cbc, q, records, conds)

    rep = Report("Riesz-basis diagnostic")
    _header(rep, cfg, q)
    ev = res.evidence
    labels = res.theorems or ev["candidate_theorems"] or [
        theorem_label(cbc, Regime.L1, "b"), theorem_label(cbc, Regime.AC, "b")]
    for label in labels:
        rep.section(label)
        ac = label == theorem_label(cbc, Regime.AC, "b")
        if ac:
            rep.line("endpoint condition holds", ev["endpoint_holds"])
            if ev["endpoint_lhs"] is not None:
                rep.line("endpoint lhs / rhs", f"{_f(ev['endpoint_lhs'])} / {_f(ev['endpoint_rhs'])}")
            if ev["note"]:
                rep.line("note", ev["note"])
        else:
            rep.line("sine-moment decay", f"{ev['decay_verdict']} (tail median {_f(ev['decay_tail_median'])})")
            if ev["decay_subsequence"]:
                rep.line("holding subsequence", ev["decay_subsequence"])
        rep.line("hypothesis satisfied", label in ev["candidate_theorems"])
        rep.end()
    rep.section("Verdict")
    rep.line("pair-angle log-log slope", _f(ev["angle_slope"]))
    rep.line("angle first / last", f"{_f(ev['angle_first'])} / {_f(ev['angle_last'])}")
    rep.line("angle tends to zero", ev["angle_tends_to_zero"])
    rep.line("verdict", res.verdict.value)
    rep.line("citing", ", ".join(res.theorems) or "none")
    rep.end()
    out.text("report.txt", rep.render())
    return res


def oracle_region(cbc: CanonicalBC, n_max: int) -> Rect:
    """lambda-plane box holding every eigenvalue with index n <= n_max."""
    r = window_center(cbc.sigma, n_max) + math.pi
    return Rect(-math.pi ** 2, r * r, -2 * r * math.pi, 2 * r * math.pi)


def cmd_oracle(cfg: RunConfig, out: OutputWriter, threads: int = 1):
    q = cfg.potential.build()
    cbc = cfg.bc.canonical
    n_max = min(cfg.n_max, cfg.oracle.n_max)
    n_min = min(cfg.n_min, n_max)
    prob = _problem(cfg, q, Regime.UNPERTURBED, functions=False)
    eigs = [e for e in prob.solve(0, n_max, low=True, threads=threads) if e.n >= n_min]
    region = oracle_region(cbc, n_max)
    C = calibrate_constant(cbc, region, cfg.oracle.N, cfg.oracle.safety)
    pencil = build_pencil(q, cbc.source_functionals(), cfg.oracle.N)
    ref = oracle_eigs(pencil, region, C=C, method=cfg.oracle.method)
    rows = compare_with_solver(eigs, ref)
    out.csv("oracle.csv", ORACLE_COLUMNS, (r.as_csv() for r in rows))

    rep = Report("Finite-difference oracle comparison")
    _header(rep, cfg, q)
    rep.section("Oracle")
    rep.line("grid", f"N = {cfg.oracle.N}, determinant via {cfg.oracle.method}")
    rep.line("error-bar constant", f"{C:.6g} (calibrated on q = 0, safety {cfg.oracle.safety:g})")
    rep.line("solver eigenvalues", len(eigs))
    rep.line("oracle eigenvalues in region", len(ref))
    rep.line("compared", len(rows))
    rep.line("within error bar", sum(r.agrees for r in rows))
    worst = max(rows, key=lambda r: r.diff / r.error_bar, default=None)
    if worst is not None:
        rep.line("worst diff / bar", f"{worst.diff / worst.error_bar:.3g} at n={worst.n}, j={worst.j}")
    rep.end()
    out.text("report.txt", rep.render())
    return rows


COMMANDS = {
    "classify": cmd_classify,
    "eigs": cmd_eigs,
    "asym": cmd_asym,
    "riesz": cmd_riesz,
    "oracle": cmd_oracle,
}


# ------------------------------------------------------------------ entry point

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="slspec", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"slspec {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, metavar="PATH")
        p.add_argument("--out", metavar="DIR")
        p.add_argument("--n-min", type=int)
        p.add_argument("--n-max", type=int)
        p.add_argument("--threads", type=int, default=1)
    return ap


def resolve(args) -> RunConfig:
    cfg = load_config(args.config)
    changes = {}
    if args.out is not None:
        changes["out"] = args.out
    if args.n_min is not None:
        changes["n_min"] = args.n_min
    if args.n_max is not None:
        changes["n_max"] = args.n_max
    if args.threads < 1:
        raise ConfigError("--threads must be at least 1")
    return replace(cfg, **changes) if changes else cfg


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
        out = OutputWriter(cfg.out)
        COMMANDS[args.command](cfg, out, args.threads)
        out.manifest(args.command, cfg)
        paths = out.flush()
    except (ConfigError, BCError, PotentialError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SpectralError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    sys.stdout.write(out.files["report.txt"])
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
