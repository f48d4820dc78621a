"""Command line entry point: ``spectori <subcommand> [flags]``.

Exit status 0 on success, 2 when a check fails, 1 on errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import SpectralError
from .geometry import Family, ModuliPoint, Sign, validate_moduli_point


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, complex):
        return f"{x.real:.15g}{x.imag:+.15g}i"
    if isinstance(x, (list, tuple, np.ndarray)):
        return "[" + ",".join(_fmt(complex(v) if np.iscomplexobj(v) else float(v)) for v in x) + "]"
    if isinstance(x, float):
        return f"{x:.15g}"
    return str(x)


def record(kind: str, fields: dict) -> str:
    """One line of space separated key=value pairs in insertion order."""
    return " ".join([f"record={kind}"] + [f"{k}={_fmt(v)}" for k, v in fields.items()])


def _parse_lambda(text: str) -> complex:
    try:
        re, im = text.split(",")
        return complex(float(re), float(im))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"--lambda expects re,im but got {text!r}") from exc


def _point(args) -> ModuliPoint:
    return validate_moduli_point(args.family.upper(), args.n, args.R, args.lambdas or [],
                                 mu=args.mu, nu=args.nu)


def _common(p: argparse.ArgumentParser, point: bool = True) -> None:
    if point:
        p.add_argument("--family", choices=["odd", "even", "ODD", "EVEN"], default="odd")
        p.add_argument("--n", type=int, default=0)
        p.add_argument("--R", type=float, default=None)
        p.add_argument("--lambda", dest="lambdas", type=_parse_lambda, action="append")
        p.add_argument("--mu", type=float, default=None)
        p.add_argument("--nu", type=float, default=None)
    p.add_argument("--tol-quad", type=float, default=1e-11)
    p.add_argument("--tol-rational", type=float, default=1e-9)
    p.add_argument("--max-den", type=int, default=50)
    p.add_argument("--delta", type=float, default=None, help="contour clearance")
    p.add_argument("--dump-contours", type=Path, default=None, help="also write contour CSV here")
    p.add_argument("--format", choices=["records", "csv"], default="records")
    p.add_argument("--output", type=Path, default=None)
    p.add_argument("--report", type=Path, default=None, help="directory for figures")


def _emit(args, text: str) -> None:
    if args.output:
        args.output.write_text(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _dump(args, p: ModuliPoint) -> None:
    if not (args.dump_contours or args.report):
        return
    from .homology import canonical_contours, dump_contours
    systems = [canonical_contours(p, s, args.delta) for s in (Sign.PLUS, Sign.MINUS)]
    if args.dump_contours:
        args.dump_contours.write_text(dump_contours(systems))
    if args.report:
        from .report import plot_contours
        args.report.mkdir(parents=True, exist_ok=True)
        plot_contours(systems, args.report / "contours.png")


# ----------------------------------------------------------------------
# subcommands
# ----------------------------------------------------------------------
def cmd_periods(args) -> int:
    from .periods import invariant_set, period_data
    p = _point(args)
    d = period_data(p, args.delta, args.tol_quad)
    fields = {"point": p.to_record().replace(" ", ";"),
              "Iplus": d.I.plus, "Iminus": d.I.minus,
              "IhatPlus": d.Ihat.plus, "IhatMinus": d.Ihat.minus,
              "Dplus": d.D_plus, "Dminus": d.D_minus,
              "realness": max(d.I.realness_residual, d.Ihat.realness_residual)}
    if not p.is_degenerate:
        try:
            inv = invariant_set(d)
            fields.update(etaPlus=float(np.real(inv.eta_plus)), etaMinus=float(np.real(inv.eta_minus)),
                          mobius=list(inv.mobius))
            if inv.chi is not None:
                fields["chi"] = float(np.real(inv.chi))
        except SpectralError as exc:
            fields["invariants"] = exc.code
    _emit(args, record("PERIODS", fields))
    _dump(args, p)
    return 0


def cmd_asymptotics(args) -> int:
    from .variation import asymptotic_probe
    p = _point(args)
    sign = Sign.PLUS if args.sign == "plus" else Sign.MINUS
    probe = asymptotic_probe(p, args.kind, args.mu_list, sign)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["mu", "value_re", "value_im", "predicted_re", "predicted_im", "residual_abs"])
    for mu, v, m, r in zip(probe.mus, probe.values, probe.model, probe.residuals):
        w.writerow([f"{mu:.6g}", f"{v.real:.15g}", f"{v.imag:.15g}", f"{complex(m).real:.15g}",
                    f"{complex(m).imag:.15g}", f"{abs(r):.6e}"])
    w.writerow(["fitted_order", f"{probe.fitted_order:.6f}", "", "", "", ""])
    _emit(args, buf.getvalue())
    if args.report:
        from .report import plot_probe
        args.report.mkdir(parents=True, exist_ok=True)
        plot_probe(probe, args.report / f"{args.kind.lower()}_{args.sign}.png")
    return 0


def _fractions(items) -> list:
    return [Fraction(s) for s in items or []]


def cmd_search(args) -> int:
    from .periods import period_data
    from .search import RationalTarget, newton_to_rational, rational_project, scale_and_type
    p = _point(args)
    if args.target_plus is None and args.target_minus is None:
        d = period_data(p)
        tp = rational_project(d.I.plus, args.max_den).ratios if len(d.I.plus) > 1 else []
        tm = rational_project(d.I.minus, args.max_den).ratios if len(d.I.minus) > 1 else []
    else:
        tp, tm = _fractions(args.target_plus), _fractions(args.target_minus)
    res = newton_to_rational(p, RationalTarget(tp, tm, args.max_den))
    cand = scale_and_type(res.point, args.max_den, args.tol_rational)
    lines = [record("NEWTON", {"iterations": res.iterations, "residual": res.residual}),
             "candidate " + cand.to_record()]
    _emit(args, "\n".join(lines))
    if args.report:
        from .report import plot_newton
        args.report.mkdir(parents=True, exist_ok=True)
        plot_newton(res.history, args.report / "newton.png")
    _dump(args, res.point)
    return 0


def cmd_verify(args) -> int:
    from .search import SpectralCandidate, verify_candidate
    text = args.candidate
    if text is None and args.candidate_file is not None:
        text = args.candidate_file.read_text()
    if not text:
        raise SpectralError("PARSE", "no candidate given")
    line = next(ln for ln in text.splitlines() if ln.strip())
    line = line.split("candidate ", 1)[-1]
    cand = SpectralCandidate.from_record(line)
    rep = verify_candidate(cand, delta=args.delta)
    out = [record("CHECK", {"name": k, "pass": ok, "residual": float(r)}) for k, (ok, r) in rep.checks.items()]
    out.append(record("VERIFY", {"overall": rep.overall}))
    _emit(args, "\n".join(out))
    return 0 if rep.overall else 2


def cmd_dump(args) -> int:
    from .homology import canonical_contours, dump_contours
    p = _point(args)
    systems = [canonical_contours(p, s, args.delta) for s in (Sign.PLUS, Sign.MINUS)]
    _emit(args, dump_contours(systems))
    if args.report:
        from .report import plot_contours
        args.report.mkdir(parents=True, exist_ok=True)
        plot_contours(systems, args.report / "contours.png")
    return 0


def base_checks() -> list:
    """(name, ok, detail) for the genus-zero and genus-one closed forms."""
    from .periods import invariant_set, period_data
    out = []
    even = validate_moduli_point("EVEN", 0)
    d = period_data(even)
    inv = invariant_set(d)
    ok = (abs(d.I.plus[0] + 8) < 1e-10 and abs(d.I.minus[0] - 8) < 1e-10
          and abs(d.Ihat.plus[0] - 8) < 1e-10 and abs(d.Ihat.minus[0] - 8) < 1e-10
          and abs(inv.eta_plus + 1) < 1e-10 and abs(inv.eta_minus - 1) < 1e-10
          and abs(d.D_plus + 1) < 1e-10 and abs(d.D_minus - 1) < 1e-10)
    out.append(("even_genus0", ok, f"I=({d.I.plus[0]:.12g},{d.I.minus[0]:.12g})"))
    for t in (0.1, 0.01):
        d = period_data(validate_moduli_point("ODD", 0, 2 + t))
        target = np.array([4 * t ** 0.5, 4 * (4 + t) ** 0.5])
        err = float(np.max(np.abs(d.I.plus - target)))
        out.append((f"odd_genus1_Iplus_t={t}", err < 1e-9, f"err={err:.2e}"))
        out.append((f"odd_genus1_Iminus_t={t}", abs(d.I.minus[0] - 8) <= 5 * t, f"I-={d.I.minus[0]:.10g}"))
        s = float(np.real(d.minus.omega.zetas[0])) - 2
        out.append((f"odd_genus1_s_t={t}", abs(s - t) <= 5 * t * t, f"s={s:.6g}"))
        # the observed expansion s = t/2 + O(t^2)
        out.append((f"odd_genus1_s_half_t={t}", abs(s - t / 2) <= 5 * t * t, f"s={s:.6g}"))
    return out


def cmd_base_check(args) -> int:
    rows = base_checks()
    lines = [record("BASE", {"check": n, "pass": ok, "detail": det.replace(" ", "")}) for n, ok, det in rows]
    _emit(args, "\n".join(lines))
    return 0 if all(ok for _, ok, _ in rows) else 2


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spectori", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("base-check", help="closed-form genus 0 and genus 1 checks")
    _common(p, point=False)
    p.set_defaults(func=cmd_base_check)
    p = sub.add_parser("periods", help="period vectors and invariants of one point")
    _common(p)
    p.set_defaults(func=cmd_periods)
    p = sub.add_parser("asymptotics", help="large-mu probes on the circle |z| = mu")
    _common(p)
    p.add_argument("--kind", default="B_NEXT_PERIOD", choices=["B_NEXT_PERIOD", "HAT_B_NEXT", "KAPPA"])
    p.add_argument("--sign", default="plus", choices=["plus", "minus"])
    p.add_argument("--mu-list", type=float, nargs="+", default=[1e2, 1e3, 1e4])
    p.set_defaults(func=cmd_asymptotics)
    p = sub.add_parser("search", help="Newton to rational period ratios, then scale")
    _common(p)
    p.add_argument("--target-plus", nargs="*", default=None, help="ratios such as 3/5")
    p.add_argument("--target-minus", nargs="*", default=None)
    p.set_defaults(func=cmd_search)
    p = sub.add_parser("verify", help="check a candidate record")
    _common(p, point=False)
    p.add_argument("--candidate", default=None)
    p.add_argument("--candidate-file", type=Path, default=None)
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("dump-contours", help="CSV of the cycle polylines")
    _common(p)
    p.set_defaults(func=cmd_dump)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except SpectralError as exc:
        sys.stderr.write(f"error {exc.code}: {exc.detail}\n")
        return 1
    except (OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
