"""Command-line front end: ``padicqft <command> [options]``.

Every run writes its CSV outputs and a ``manifest.json`` echoing the
resolved configuration.  Exit codes: 0 success, 2 invalid input,
3 numerical acceptance failure.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .green import decay_scan, green_apply, green_build, positivity_report
from .lattice import (
    LatticeField,
    LatticeGeometry,
    _atomic_write,
    ball_indicator,
    dft,
    fft_plan,
    idft,
    load_field,
    naive_dft_full,
    naive_dft_values,
    random_field,
    save_field,
    translate_values,
)
from .noise import InteractionH, LevySpec, bochner_validate, h_to_levy, levy_to_h, sample_convolved, sample_levy_white
from .schwinger import (
    analytic_schwinger,
    bell_number,
    set_partitions,
    cluster_check,
    mc_schwinger,
    t_transform_derivative_schwinger,
)
from .symbols import (
    CATALOG,
    EllipticPolynomial,
    SymbolSpec,
    apply_operator,
    binary_norm_form,
    ellipticity_check,
    power_polynomial,
)
from .wick import (
    ChaosVector,
    KondratievNormParams,
    os1_bound_check,
    phi_h_convolved,
    s_transform,
    t_series_chaos,
    t_series_closed_form,
    wick_product,
)

OUT_DIR_ENV = "PADICQFT_OUT_DIR"
EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    """Invalid user input; reported with exit code 2."""


# ---------------------------------------------------------------------------
# config helpers


def _read_json(arg):
    """JSON from a file path or an inline string."""
    if arg is None:
        return None
    if os.path.exists(arg):
        with open(arg) as fh:
            return json.load(fh)
    try:
        return json.loads(arg)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{arg!r} is neither a file nor valid JSON: {exc}") from None


def load_polynomial(arg, p: int, N: int, d: int = 2) -> EllipticPolynomial:
    """Polynomial from a JSON term list (file or inline) or a catalog name like ``power`` or ``binary``."""
    try:
        if arg is None:
            return CATALOG["power"](p, d) if N == 1 else CATALOG["binary"](p)
        if arg in CATALOG:
            return CATALOG[arg](p, d) if arg == "power" else CATALOG[arg](p)
        poly = EllipticPolynomial.from_json(p, _read_json(arg))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad polynomial: {exc}") from None
    if poly.N != N:
        raise ConfigError(f"polynomial has N={poly.N}, geometry has N={N}")
    return poly


def green_config(data: dict) -> tuple:
    """(SymbolSpec, LatticeGeometry) from a dict with p, N, K, alpha, m, beta, variant, poly."""
    known = {"p", "N", "K", "alpha", "m", "beta", "variant", "poly", "degree"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown green-config keys {sorted(unknown)}")
    try:
        p, N, K = int(data["p"]), int(data.get("N", 1)), int(data["K"])
        geo = LatticeGeometry(p, N, K)
        poly = data.get("poly")
        if isinstance(poly, list):
            poly = json.dumps(poly)
        l = load_polynomial(poly, p, N, int(data.get("degree", 2)))
        spec = SymbolSpec(l, float(data.get("alpha", 1.0)), float(data.get("m", 1.0)), float(data.get("beta", 1.0)), data.get("variant", "l-power"))
    except KeyError as exc:
        raise ConfigError(f"green config is missing {exc}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return spec, geo


def _green_from_args(args) -> tuple:
    if getattr(args, "green", None):
        return green_config(_read_json(args.green))
    return green_config(
        {
            "p": args.p,
            "N": args.N,
            "K": args.K,
            "alpha": args.alpha,
            "m": args.m,
            "beta": args.beta,
            "variant": args.variant,
            "poly": args.poly,
        }
    )


def _interaction(arg) -> InteractionH:
    if arg is None:
        return InteractionH(())
    try:
        return InteractionH.from_json(_read_json(arg))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad InteractionH: {exc}") from None


def _levy(arg) -> LevySpec:
    try:
        return LevySpec.from_json(_read_json(arg))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad LevySpec: {exc}") from None


def _test_functions(arg, geo: LatticeGeometry, n: int) -> list:
    """Fields from a comma-separated list of field CSVs, or n translated unit-ball indicators."""
    if arg:
        fields = [load_field(path) for path in arg.split(",")]
        for f in fields:
            if f.geometry != geo:
                raise ConfigError(f"test function geometry {f.geometry} does not match {geo}")
        if len(fields) < n:
            raise ConfigError(f"need {n} test functions, got {len(fields)}")
        return fields[:n]
    base = ball_indicator(geo, min(0, geo.K))
    step = geo.p ** (geo.K - 1) if geo.K >= 1 else 1
    out = []
    for i in range(n):
        shift = (i * step,) + (0,) * (geo.N - 1)
        out.append(LatticeField(geo, translate_values(geo, base.values, shift), real=True))
    return out


# ---------------------------------------------------------------------------
# output


class Run:
    def __init__(self, args, command: str):
        self.args = args
        self.command = command
        base = args.out_dir or os.environ.get(OUT_DIR_ENV) or "."
        self.out_dir = base
        self.outputs = []
        self.report = {}
        self.config = {k: v for k, v in vars(args).items() if k not in ("func",)}

    def path(self, name: str) -> str:
        return name if os.path.isabs(name) else os.path.join(self.out_dir, name)

    def write_csv(self, name: str, header, rows) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
        path = self.path(name)
        _atomic_write(path, buf.getvalue())
        self.outputs.append(path)
        return path

    def finish(self, status: int, resolved: dict | None = None) -> int:
        manifest = {
            "command": self.command,
            "version": __version__,
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "config": self.config,
            "resolved": resolved or {},
            "report": self.report,
            "outputs": self.outputs,
            "exit_status": status,
        }
        _atomic_write(self.path(f"{self.command}.manifest.json"), json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n")
        return status


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, complex):
        return repr(v.real)
    return v


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    return str(o)


# ---------------------------------------------------------------------------
# commands


def cmd_green(args, run: Run) -> int:
    spec, geo = _green_from_args(args)
    g = green_build(spec, geo)
    scan = decay_scan(g)
    out = args.out or "green_decay.csv"
    run.write_csv(out, ["r", "lognorm", "logG", "sphere_count"], scan.rows)
    if args.field_out:
        save_field(g.values, run.path(args.field_out))
        run.outputs.append(run.path(args.field_out))
    pos = positivity_report(g)
    run.report = {
        "far_slope": scan.far_slope,
        "expected_far_slope": -(spec.growth + spec.N),
        "near_slope": scan.near_slope,
        "log_fit_residual": scan.log_fit_residual,
        "power_fit_residual": scan.power_fit_residual,
        "zero_cell_offset": g.zero_cell_offset,
        "high_frequency_tail": g.high_frequency_tail,
        "positivity": pos,
    }
    print(f"far-field slope {scan.far_slope:.4f} (expected {-(spec.growth + spec.N):.4f})")
    status = EXIT_OK
    if spec.growth > spec.N and pos["violations"] and not pos["within_error_bound"]:
        print(f"positivity violated beyond the error bound: worst {pos['worst']:.3e}")
        status = EXIT_NUMERIC
    return run.finish(status, {"symbol": spec.to_dict(), "geometry": geo.to_dict()})


def cmd_sample(args, run: Run) -> int:
    spec = _levy(args.spec) if args.spec else LevySpec()
    geo = LatticeGeometry(args.p, args.N, args.K)
    resolved = {"levy": spec.to_json(), "geometry": geo.to_dict()}
    if args.convolve:
        sym, ggeo = green_config(_read_json(args.convolve))
        if ggeo != geo:
            raise ConfigError("convolution geometry differs from the sampling geometry")
        sample = sample_convolved(spec, green_build(sym, geo), geo, args.seed, args.samples)
        resolved["symbol"] = sym.to_dict()
    else:
        sample = sample_levy_white(spec, geo, args.seed, args.samples)
    flat = sample.values.reshape(len(sample), -1)
    rows = ((i, j, flat[i, j]) for i in range(flat.shape[0]) for j in range(flat.shape[1]))
    run.write_csv(args.out or "samples.csv", ["sample", "index", "value"], rows)
    return run.finish(EXIT_OK, resolved)


def _levy_for_mc(args, h: InteractionH) -> LevySpec:
    if args.spec:
        return _levy(args.spec)
    if h.degree <= 2 and not h.truncated:
        var = 1 - h.coefficient(2).real
        if var < 0:
            raise ConfigError("H_2 > 1 gives a negative variance")
        return LevySpec(-h.coefficient(1).real, math.sqrt(var), ())
    raise ConfigError("Monte Carlo needs --spec unless H is at most quadratic")


def cmd_schwinger(args, run: Run) -> int:
    spec, geo = _green_from_args(args)
    g = green_build(spec, geo)
    h = _interaction(args.h)
    levy = None
    if args.spec:
        levy = _levy(args.spec)
        if args.h is None:
            h = levy_to_h(levy, max(args.n, 2))
    fs = _test_functions(args.funcs, geo, args.n)
    rows = []
    for n in range(1, args.n + 1):
        if args.source == "analytic":
            rows.append((n, analytic_schwinger(h, g, fs[:n]).real, 0.0))
        elif args.source == "chaos":
            phi = phi_h_convolved(h, g, geo, args.n)
            rows.append((n, t_transform_derivative_schwinger(phi, fs[:n]).real, 0.0))
        else:
            levy = levy or _levy_for_mc(args, h)
            est = mc_schwinger(levy, g, fs[:n], args.samples, args.seed)
            rows.append((n, est.value, est.stderr))
    run.write_csv(args.out or "schwinger.csv", ["n", "value", "stderr"], rows)
    return run.finish(EXIT_OK, {"symbol": spec.to_dict(), "h": h.to_json(), "levy": levy.to_json() if levy else None})


def cmd_cluster(args, run: Run) -> int:
    spec, geo = _green_from_args(args)
    g = green_build(spec, geo)
    h = _interaction(args.h)
    if args.spec:
        h = levy_to_h(_levy(args.spec), 4)
    direction = tuple(int(v) for v in args.direction.split(","))
    if len(direction) != geo.N:
        raise ConfigError(f"direction needs {geo.N} components")
    f = ball_indicator(geo, args.support)
    res = cluster_check(h, g, [f], [f], direction, args.ladder, start=args.start)
    run.write_csv(args.out or "cluster.csv", ["lambda_norm", "deviation", "truncated_deviation"], res.rows)
    run.report = {"slope": res.slope, "expected_slope": res.expected_slope, "monotone": res.monotone, "complete": res.complete}
    print(f"cluster slope {res.slope} (expected {res.expected_slope}), monotone={res.monotone}")
    status = EXIT_OK
    if spec.growth > spec.N and not res.passed:
        status = EXIT_NUMERIC
    return run.finish(status, {"symbol": spec.to_dict(), "h": h.to_json()})


def cmd_wick(args, run: Run) -> int:
    spec, geo = _green_from_args(args)
    g = green_build(spec, geo)
    h = _interaction(args.h)
    rng = np.random.default_rng(args.seed)
    status = EXIT_OK
    tol = args.tol if args.tol is not None else 1e-8
    if args.check == "ttransform":
        phi = phi_h_convolved(h, g, geo, args.nmax)
        f = random_field(geo, rng) * 0.5
        order = phi.nmax if phi.exact_through is None else min(phi.nmax, phi.exact_through)
        a = t_series_chaos(phi, f, order)
        b = t_series_closed_form(h, f, order, g)
        rows = [(n, a[n].real, a[n].imag, b[n].real, b[n].imag, abs(a[n] - b[n])) for n in range(order + 1)]
        run.write_csv(args.out or "wick_ttransform.csv", ["order", "chaos_re", "chaos_im", "closed_re", "closed_im", "abs_diff"], rows)
        worst = max(r[-1] / max(abs(b[r[0]]), 1e-300) for r in rows)
        status = EXIT_OK if worst < tol else EXIT_NUMERIC
        run.report = {"max_rel_diff": worst, "expectation": phi.expectation}
    elif args.check == "os1":
        phi = phi_h_convolved(h, g, geo, args.nmax)
        fs = [random_field(geo, rng) for _ in range(args.nmax)]
        tuples = [fs[:n] for n in range(1, args.nmax + 1)]
        rep = os1_bound_check(phi, KondratievNormParams(args.l, args.k), tuples)
        run.write_csv(args.out or "wick_os1.csv", ["n", "abs_S", "bound", "slack"], rep.rows)
        status = EXIT_OK if rep.holds else EXIT_NUMERIC
        run.report = {"K": rep.K, "C": rep.C, "I0": rep.i0}
    else:
        rows = []
        worst = 0.0
        for trial in range(args.trials):
            A = _random_chaos(geo, rng, 2)
            B = _random_chaos(geo, rng, 2)
            f = random_field(geo, rng)
            lhs = s_transform(wick_product(A, B), f)
            rhs = s_transform(A, f) * s_transform(B, f)
            err = abs(lhs - rhs) / (1 + abs(rhs))
            worst = max(worst, err)
            rows.append((trial, lhs.real, rhs.real, err))
        run.write_csv(args.out or "wick_homomorphism.csv", ["trial", "S_product", "product_S", "rel_err"], rows)
        status = EXIT_OK if worst < 1e-10 else EXIT_NUMERIC
        run.report = {"max_rel_err": worst}
    return run.finish(status, {"symbol": spec.to_dict(), "h": h.to_json()})


def _random_chaos(geo, rng, order):
    v = ChaosVector(geo, order)
    for n in range(order + 1):
        v.add_term(complex(rng.normal(), rng.normal()), [random_field(geo, rng) for _ in range(n)])
    return v


def cmd_levy_check(args, run: Run) -> int:
    if args.spec:
        target = _levy(args.spec)
        resolved = {"levy": target.to_json()}
        cumulants = None
    else:
        target = _interaction(args.h)
        resolved = {"h": target.to_json()}
        cumulants = [c.real for c in h_to_levy(target).cumulants[1:]]
    verdict = bochner_validate(target, tol=args.tol if args.tol is not None else 1e-10)
    run.write_csv(args.out or "levy_check.csv", ["plausible", "min_eigenvalue", "reason"], [(int(verdict.plausible), verdict.min_eigenvalue, verdict.reason)])
    run.report = {"plausible": verdict.plausible, "min_eigenvalue": verdict.min_eigenvalue, "reason": verdict.reason, "cumulants": cumulants}
    print(("plausible: " if verdict.plausible else "rejected: ") + verdict.reason)
    return run.finish(EXIT_OK if verdict.plausible else EXIT_NUMERIC, resolved)


def bench_rows(p: int, kmax: int, repeats: int = 3, naive_limit: int = 6561, seed: int = 0) -> list:
    """(size, fft_seconds, naive_seconds, max_diff) per K, after the correctness gate."""
    rng = np.random.default_rng(seed)
    rows = []
    for K in range(1, kmax + 1):
        geo = LatticeGeometry(p, 1, K)
        x = rng.standard_normal(geo.size) + 1j * rng.standard_normal(geo.size)
        plan = fft_plan(geo)
        fast = plan.forward(x)
        naive_t = float("nan")
        diff = float("nan")
        if geo.size <= naive_limit:
            t0 = time.perf_counter()
            slow = naive_dft_values(geo, x, 1)
            naive_t = time.perf_counter() - t0
            diff = float(np.abs(fast - slow).max())
            if not diff < 1e-10 * max(1.0, float(np.abs(slow).max())):
                raise RuntimeError(f"fft and naive transforms disagree at size {geo.size}: {diff}")
        best = math.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            plan.forward(x)
            best = min(best, time.perf_counter() - t0)
        rows.append((geo.size, best, naive_t, diff))
    return rows


def cmd_bench(args, run: Run) -> int:
    try:
        rows = bench_rows(args.p, args.kmax)
    except RuntimeError as exc:
        print(str(exc))
        return run.finish(EXIT_NUMERIC)
    run.write_csv(args.out or "bench.csv", ["size", "fft_seconds", "naive_seconds", "max_diff"], rows)
    for size, ft, nt, d in rows:
        print(f"{size:>8}  fft {ft:.2e}s  naive {nt:.2e}s  diff {d:.1e}")
    return run.finish(EXIT_OK, {"p": args.p, "kmax": args.kmax})


def selftest_checks(seed: int = 0) -> list:
    """(name, passed, detail) for a quick run of core invariants."""

    rng = np.random.default_rng(seed)
    out = []
    for p, N, K in [(2, 1, 2), (3, 2, 1), (5, 1, 1)]:
        geo = LatticeGeometry(p, N, K)
        f = random_field(geo, rng, real=False)
        F = dft(f)
        ok = abs(f.l2_norm() - F.l2_norm()) <= 1e-12 * f.l2_norm()
        ok &= np.abs(dft(F).values - f.reflect().values).max() <= 1e-12 * np.abs(f.values).max()
        ok &= np.abs(idft(F).values - f.values).max() <= 1e-12 * np.abs(f.values).max()
        ok &= np.abs(F.values - naive_dft_full(f).values).max() < 1e-10
        out.append((f"fourier p={p} N={N} K={K}", bool(ok), ""))
    out.append(("bell numbers", [bell_number(n) for n in range(1, 6)] == [1, 2, 5, 15, 52] and len(list(set_partitions(5))) == 52, ""))
    out.append(("ellipticity x1^2+x2^2 at p=5 rejected", not ellipticity_check(EllipticPolynomial(5, ((1, (2, 0)), (1, (0, 2)))), 4).elliptic, ""))
    out.append(("binary norm form elliptic", ellipticity_check(binary_norm_form(3), 4).elliptic, ""))
    geo = LatticeGeometry(3, 1, 3)
    spec = SymbolSpec(power_polynomial(3, 2), 1.0, 1.0)
    g = green_build(spec, geo)
    f = random_field(geo, rng)
    back = apply_operator(spec, green_apply(g, f))
    out.append(("green reciprocity", float(np.abs(back.values - f.values).max()) < 1e-10 * float(np.abs(f.values).max()), ""))
    out.append(("green integral = 1/m^2", abs(g.values.integral() - 1.0) < 1e-12, ""))
    small = LatticeGeometry(3, 1, 1)
    A, B = _random_chaos(small, rng, 2), _random_chaos(small, rng, 2)
    f = random_field(small, rng)
    lhs, rhs = s_transform(wick_product(A, B), f), s_transform(A, f) * s_transform(B, f)
    out.append(("wick S-homomorphism", abs(lhs - rhs) < 1e-10 * (1 + abs(rhs)), ""))
    quartic = InteractionH((0, 0, 0, 24))
    out.append(("quartic H rejected", not bochner_validate(quartic).plausible, ""))
    return out


def cmd_selftest(args, run: Run) -> int:
    checks = selftest_checks(args.seed)
    run.write_csv(args.out or "selftest.csv", ["check", "passed"], [(name, int(ok)) for name, ok, _ in checks])
    for name, ok, _ in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return run.finish(EXIT_OK if all(ok for _, ok, _ in checks) else EXIT_NUMERIC)


# ---------------------------------------------------------------------------
# parser


def _add_symbol_flags(sp, with_green_config: bool = True):
    sp.add_argument("--p", type=int, default=3)
    sp.add_argument("--N", type=int, default=1)
    sp.add_argument("--K", type=int, default=3)
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--m", type=float, default=1.0)
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--variant", default="l-power", choices=["l-power", "shifted-power", "bessel"])
    sp.add_argument("--poly", help="polynomial JSON file/inline list, or a catalog name")
    if with_green_config:
        sp.add_argument("--green", help="green-config JSON (overrides the symbol flags)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="padicqft", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1, help="accepted for reproducibility records; results never depend on it")
    parser.add_argument("--tol", type=float, default=None)
    parser.add_argument("--out-dir", default=None, help=f"output directory (default ${OUT_DIR_ENV} or .)")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("green", "covariance"):
        sp = sub.add_parser(name, help="Green function and decay scan" if name == "green" else "alias of green")
        _add_symbol_flags(sp, with_green_config=False)
        sp.add_argument("--out")
        sp.add_argument("--field-out", help="also save the spatial Green function as a field CSV")
        sp.set_defaults(func=cmd_green)

    sp = sub.add_parser("sample", help="white-noise or convolved samples")
    sp.add_argument("--spec", help="LevySpec JSON")
    sp.add_argument("--p", type=int, default=3)
    sp.add_argument("--N", type=int, default=1)
    sp.add_argument("--K", type=int, default=1)
    sp.add_argument("--samples", type=int, default=10)
    sp.add_argument("--convolve", help="green-config JSON")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("schwinger", help="Schwinger functions S_1..S_n")
    _add_symbol_flags(sp)
    sp.add_argument("--source", choices=["analytic", "mc", "chaos"], default="analytic")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--h", help="InteractionH JSON")
    sp.add_argument("--spec", help="LevySpec JSON (Monte Carlo, or to derive H)")
    sp.add_argument("--funcs", help="comma-separated field CSV files")
    sp.add_argument("--samples", type=int, default=20000)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_schwinger)

    sp = sub.add_parser("cluster", help="cluster-property ladder")
    _add_symbol_flags(sp)
    sp.add_argument("--h", help="InteractionH JSON")
    sp.add_argument("--spec", help="LevySpec JSON")
    sp.add_argument("--ladder", type=int, default=4, help="number of ladder steps")
    sp.add_argument("--start", type=int, default=2, help="norm exponent of the first translation")
    sp.add_argument("--direction", default="1")
    sp.add_argument("--support", type=int, default=-2, help="test functions are indicators of B_support")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_cluster)

    sp = sub.add_parser("wick", help="Wick-calculus checks")
    _add_symbol_flags(sp)
    sp.add_argument("--h", help="InteractionH JSON")
    sp.add_argument("--nmax", type=int, default=4)
    sp.add_argument("--check", choices=["ttransform", "os1", "homomorphism"], default="ttransform")
    sp.add_argument("--l", type=int, default=1)
    sp.add_argument("--k", type=int, default=1)
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--out")
    # the chaos expansion grows like cells**nmax, so keep the default window small
    sp.set_defaults(func=cmd_wick, K=1)

    sp = sub.add_parser("levy-check", help="validate a candidate Lévy characteristic")
    group = sp.add_mutually_exclusive_group(required=True)
    group.add_argument("--h", help="InteractionH JSON")
    group.add_argument("--spec", help="LevySpec JSON")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_levy_check)

    sp = sub.add_parser("bench", help="fast transform against the naive transform")
    sp.add_argument("--p", type=int, default=3)
    sp.add_argument("--kmax", type=int, default=4)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("selftest", help="quick invariant suite")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    run = Run(args, args.command)
    try:
        return args.func(args, run)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return run.finish(EXIT_INVALID)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return run.finish(EXIT_INVALID)


if __name__ == "__main__":
    sys.exit(main())
