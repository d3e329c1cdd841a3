"""Command-line entry point.

Subcommands drive one module each end to end and emit machine-readable
tables.  Exit codes: 0 all checks pass, 1 a numeric check failed (a failure
report is still written), 2 configuration error before any computation.
"""

from __future__ import annotations

import argparse
import random
import sys
from dataclasses import dataclass, field
from pathlib import Path

from mpmath import mp, mpf

from . import __version__
from .context import ConvergenceError, PrecisionLossError, QContext, QDomainError, make_context
from . import asymptotics, ortho, painleve, rhp, series, specfun
from .serialize import fmt, meta_block, series_payload, seq_payload, write_csv, write_json

ACCEPT_TOL = mpf("1e-25")   # desk-scale acceptance tolerance for PASS/FAIL rows

COMMANDS = ("moments", "polys", "painleve", "series", "rhp", "asym", "hq")


@dataclass
class RunConfig:
    command: str
    q: str = "0.5"
    precision_bits: int | None = None
    trunc_tol: str = "1e-55"
    n_max: int = 24
    shifts: list = field(default_factory=lambda: ["1"])
    fmt: str = "csv"
    out: str | None = None
    seed: int = 0

    def validate(self):
        try:
            qv = mpf(self.q)
        except Exception as exc:
            raise QDomainError(f"unparseable q: {self.q!r}") from exc
        if not 0 < qv < 1:
            raise QDomainError("q must lie in (0,1)")
        if not 0 < mpf(self.trunc_tol) < 1:
            raise QDomainError("trunc-tol must lie in (0,1)")
        if self.n_max < 0:
            raise QDomainError("n-max must be non-negative")
        if self.precision_bits is not None and self.precision_bits <= 0:
            raise QDomainError("precision-bits must be positive")
        if self.fmt not in ("csv", "json"):
            raise QDomainError("format must be csv or json")
        for c in self.shifts:
            cv = mpf(c)
            if not qv < cv <= 1:
                raise QDomainError(f"shift c={c} outside (q, 1]")

    def context(self) -> QContext:
        return make_context(self.q, n_max=max(self.n_max, 8),
                            precision_bits=self.precision_bits,
                            trunc_tol=self.trunc_tol)


def _read_config_file(path: str) -> dict:
    values = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise QDomainError(f"bad config line: {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = val
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qfreud",
        description="q-Freud II orthogonal polynomials: moments, recurrence "
                    "coefficients, series solutions, parametrix and asymptotic checks")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="flat key=value file; flags override it")
    parser.add_argument("--q", help="base q in (0,1), as a decimal string")
    parser.add_argument("--precision-bits", type=int)
    parser.add_argument("--trunc-tol", help="series/product tail bound")
    parser.add_argument("--n-max", type=int)
    parser.add_argument("--shift-c", action="append",
                        help="lattice shift c in (q,1]; repeatable")
    parser.add_argument("--format", choices=("csv", "json"), dest="fmt")
    parser.add_argument("--out", help="output file path")
    parser.add_argument("--seed", type=int, help="seed for sample-point placement")
    return parser


def parse_config(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(command=args.command)
    if args.config:
        file_vals = _read_config_file(args.config)
        for key, val in file_vals.items():
            if key == "q":
                cfg.q = val
            elif key == "precision_bits":
                cfg.precision_bits = int(val)
            elif key == "trunc_tol":
                cfg.trunc_tol = val
            elif key == "n_max":
                cfg.n_max = int(val)
            elif key == "shift_c":
                cfg.shifts = [s.strip() for s in val.split(",") if s.strip()]
            elif key == "format":
                cfg.fmt = val
            elif key == "out":
                cfg.out = val
            elif key == "seed":
                cfg.seed = int(val)
            else:
                raise QDomainError(f"unknown config key: {key}")
    if args.q is not None:
        cfg.q = args.q
    if args.precision_bits is not None:
        cfg.precision_bits = args.precision_bits
    if args.trunc_tol is not None:
        cfg.trunc_tol = args.trunc_tol
    if args.n_max is not None:
        cfg.n_max = args.n_max
    if args.shift_c:
        cfg.shifts = args.shift_c
    if args.fmt:
        cfg.fmt = args.fmt
    if args.out:
        cfg.out = args.out
    if args.seed is not None:
        cfg.seed = args.seed
    cfg.validate()
    return cfg


def _emit(cfg: RunConfig, ctx: QContext, rows, header, extra_meta, failures):
    dps = mp.prec_to_dps(ctx.precision_bits)
    meta = meta_block(ctx, cfg.command, __version__,
                      {"seed": cfg.seed, "status": "fail" if failures else "pass",
                       "failures": "; ".join(failures) or "none", **extra_meta})
    out = cfg.out or f"qfreud_{cfg.command}.{cfg.fmt}"
    if cfg.fmt == "csv":
        write_csv(out, meta, header, rows, dps)
    else:
        write_json(out, meta, [dict(zip(header, row)) for row in rows], dps)
    return out


def _check(failures, ok: bool, label: str) -> str:
    if not ok:
        failures.append(label)
    return "PASS" if ok else "FAIL"


def cmd_moments(cfg: RunConfig, ctx: QContext):
    with ctx.workprec():
        q = ctx.q
        rows, failures = [], []
        for c in cfg.shifts:
            table = ortho.compute_moments(c, max(8, 2 * min(cfg.n_max, 10)), ctx)
            for j in range(0, len(table.moments)):
                rows.append((fmt(table.c, 25), j, table.moments[j], "", ""))
            r4 = table.m(4) / table.m(0)
            r6 = table.m(6) / table.m(2)
            t4, t6 = 1 / q - 1, q ** -3 - 1
            rows.append((fmt(table.c, 25), "m4/m0", r4, t4,
                         _check(failures, abs(r4 / t4 - 1) < ACCEPT_TOL, f"m4/m0 c={c}")))
            rows.append((fmt(table.c, 25), "m6/m2", r6, t6,
                         _check(failures, abs(r6 / t6 - 1) < ACCEPT_TOL, f"m6/m2 c={c}")))
        return rows, ("c", "index", "value", "target", "status"), {}, failures


def cmd_polys(cfg: RunConfig, ctx: QContext):
    with ctx.workprec():
        rows, failures = [], []
        payloads = {}
        for c in cfg.shifts:
            seq = ortho.build_polys(c, cfg.n_max, ctx)
            resid = ortho.verify_orthogonality(seq, ctx) if cfg.n_max <= 12 else None
            for n in range(seq.n_max + 1):
                rows.append((fmt(seq.c, 25), n, seq.gamma[n], seq.alpha[n]))
            ok = all(g > 0 for g in seq.gamma) and (resid is None or resid < 10 * ctx.trunc_tol)
            _check(failures, ok, f"orthogonality c={c}")
            payloads[fmt(seq.c, 12)] = seq_payload(seq, mp.prec_to_dps(ctx.precision_bits))
        extra = {"orthogonality_residual_checked_to_n": min(cfg.n_max, 12)}
        if cfg.fmt == "json":
            extra["families"] = payloads
        return rows, ("c", "n", "gamma_n", "alpha_n"), extra, failures


def cmd_painleve(cfg: RunConfig, ctx: QContext):
    with ctx.workprec():
        q = ctx.q
        rows, failures = [], []
        shifts = list(dict.fromkeys(["1"] + cfg.shifts))
        all_rows, tails = painleve.shift_discrimination(shifts, cfg.n_max, ctx)
        orbits = {}
        for c in shifts:
            orbits[c] = painleve.orbit_from_moments(c, cfg.n_max, ctx)
        for (cval, n, alpha_n, scaled, r) in all_rows:
            rows.append((fmt(cval, 25), n, alpha_n, scaled, r))
        for c, orbit in orbits.items():
            worst = max(abs(orbit.residual(n)) for n in range(1, orbit.n_max))
            _check(failures, worst < ACCEPT_TOL, f"painleve residual c={c}")
        limit_rows = painleve.limit_diagnostic(orbits["1"], ctx)
        dev_ok = limit_rows[-1][2] < 10 and abs(limit_rows[-1][1] - q) < mpf("0.01")
        _check(failures, dev_ok, "q^n alpha_n -> q")
        return rows, ("c", "n", "alpha_n", "q^n*alpha_n", "r_n"), \
            {"tail_min_abs_r": {k: fmt(v, 25) for k, v in tails.items()}}, failures


def cmd_series(cfg: RunConfig, ctx: QContext):
    with ctx.workprec():
        bundle = series.build_series_bundle(ctx)
        rng = random.Random(cfg.seed)
        rows, failures = [], []
        payloads = []
        for s in bundle.all():
            worst = mpf(0)
            for _ in range(5):
                r = mpf(repr(rng.uniform(1.5, 3.5)))
                theta = mpf(repr(rng.uniform(0.03, 0.22)))
                z = r * mp.expjpi(theta)
                worst = max(worst, series.equation_residual(s, z, ctx))
            rows.append((s.name, s.parity, s.order, worst,
                         _check(failures, worst < ACCEPT_TOL, f"residual {s.name}")))
            payloads.append(series_payload(s, mp.prec_to_dps(ctx.precision_bits)))
        cc = series.solve_connection(ctx, bundle=bundle)
        for name, resid in sorted(cc.residuals.items()):
            rows.append((f"connection:{name}", "", "", resid,
                         _check(failures, resid < 1000 * ACCEPT_TOL, f"connection {name}")))
        rows.append(("lambda_ratio", "", "", cc.lam_ratio_err,
                     _check(failures, cc.lam_ratio_err < 1000 * ACCEPT_TOL, "lambda ratio")))
        extra = {"c_psi": cc.c_psi, "c_psi_err": cc.c_psi_err}
        if cfg.fmt == "json":
            extra["series"] = payloads
        return rows, ("series", "parity", "order", "max_residual", "status"), extra, failures


def cmd_rhp(cfg: RunConfig, ctx: QContext):
    with ctx.workprec():
        q = ctx.q
        data = rhp.build_parametrix(ctx)
        contour = rhp.ContourSpec.default(ctx)
        n_values = [n for n in (8, 12, 16, 20, 24) if n <= max(cfg.n_max, 12)]
        table = rhp.glue_residual_table(n_values, contour, data)
        rows, failures = [], []
        ratios = []
        for n, resid, ratio in table:
            rows.append((n, resid, ratio if ratio is not None else ""))
            if ratio is not None:
                ratios.append(ratio)
        fitted = mp.exp(sum(mp.log(r) for r in ratios) / len(ratios))
        _check(failures, q / 2 < fitted < 2 * q, "glue ratio within factor 2 of q")
        _check(failures, all(r1 > r2 for (_, r1, _), (_, r2, _) in zip(table, table[1:])),
               "glue residual decreasing")
        return rows, ("n", "residual", "ratio"), {"fitted_ratio": fitted}, failures


def cmd_asym(cfg: RunConfig, ctx: QContext):
    with ctx.workprec():
        q = ctx.q
        data = rhp.build_parametrix(ctx)
        n_top = max(12, cfg.n_max - cfg.n_max % 4)
        seq = ortho.build_polys(1, n_top, ctx)
        n_values = list(range(8, n_top + 1, 4))
        rng = random.Random(cfg.seed)
        z_samples = [mpf(repr(rng.uniform(0.2, 0.9))) * mp.expjpi(mpf(repr(rng.uniform(0.05, 0.2))))
                     for _ in range(3)]
        near = asymptotics.check_pn_near(seq, data, n_values, z_samples)
        far = asymptotics.check_pn_far(seq, data, n_values)
        gam = asymptotics.check_gamma_scaling(seq, ctx)
        rows, failures = [], []
        for n in n_values:
            rows.append(("near", n, max(near.errors[n]), ""))
            rows.append(("far", n, max(far.errors[n]), ""))
        rows.append(("near_fitted_ratio", "", near.fitted_ratio,
                     _check(failures, q / 2 < near.fitted_ratio < 2 * q, "near decay rate")))
        rows.append(("far_fitted_ratio", "", far.fitted_ratio,
                     _check(failures, q / 2 < far.fitted_ratio < 2 * q, "far decay rate")))
        rows.append(("AB_extrapolated", "", gam.ab_extrapolated,
                     _check(failures, abs(gam.ab_extrapolated - q) < 1000 * ACCEPT_TOL, "A*B = q")))
        return rows, ("check", "n", "value", "status"), \
            {"mu2_over_eta2": near.constants["mu2_over_eta2"]}, failures


def cmd_hq(cfg: RunConfig, ctx: QContext):
    with ctx.workprec():
        q = ctx.q
        rows, failures = [], []
        r_grid = [q ** (mpf(k) / 2) for k in range(-2, 5)] + \
                 [q ** (mpf(2 * k + 1) / 4) for k in range(-2, 4)]
        scan = specfun.hq_ray_scan(sorted(r_grid), mpf(1) / 4 * mp.pi, ctx)
        for r, re, im in scan:
            rows.append((r, re, im))
        worst_re = mpf(0)
        for j in range(64):
            theta = mpf(2 * j + 1) / 64
            worst_re = max(worst_re,
                           abs(specfun.hq_series(mp.expjpi(theta), ctx).real),
                           abs(specfun.hq_series(mp.sqrt(q) * mp.expjpi(theta), ctx).real))
        _check(failures, worst_re < ACCEPT_TOL, "Re h_q on |z|=1 and q^{1/2}")
        c1, spread = specfun.calibrate_c1(ctx)
        _check(failures, spread < ACCEPT_TOL, "series/product agreement")
        return rows, ("r", "re_hq", "im_hq"), {"c1": c1, "c1_spread": spread}, failures


_DISPATCH = {
    "moments": cmd_moments, "polys": cmd_polys, "painleve": cmd_painleve,
    "series": cmd_series, "rhp": cmd_rhp, "asym": cmd_asym, "hq": cmd_hq,
}


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv if argv is not None else sys.argv[1:])
    except QDomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    ctx = cfg.context()
    try:
        rows, header, extra, failures = _DISPATCH[cfg.command](cfg, ctx)
    except (ConvergenceError, PrecisionLossError, QDomainError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 1
    out = _emit(cfg, ctx, rows, header, extra, failures)
    print(f"{cfg.command}: {'FAIL' if failures else 'PASS'} -> {out}")
    if failures:
        for f in failures:
            print(f"  failed: {f}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
