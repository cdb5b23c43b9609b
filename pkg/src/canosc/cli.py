"""Command-line front end.

Configuration comes from a JSON document (``--config FILE`` or ``--config -``
for stdin) and/or flags; flags win.  The report is JSON on stdout and a short
summary goes to stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
import time
from pathlib import Path

from . import __version__
from .bounds import consistency_report, tail_stats, thm11_interval, thm13_interval, thm14_upper
from .interval import encode_real
from .model import CoefficientField, DomainError, builtin_family, diagonal_part
from .prufer import StepPolicy, StiffnessError, integrate, trajectory_rows, write_csv
from .schrodinger import ShootingPolicy, negative_spectrum_finite, s_bracket, shoot_zero_energy, write_zero_counts
from .spectrum import ClassifyPolicy, ThresholdError, Verdict, classify, m_estimate, oscillatory_threshold
from .transforms import prepare

EXIT_OK, EXIT_CONFIG, EXIT_INCONCLUSIVE, EXIT_CONSISTENCY, EXIT_IO = 0, 2, 3, 4, 5

FAMILY_PARAMS = ("c", "p", "g", "phi", "c2")


class ConfigError(Exception):
    pass


def _jsonable(obj):
    """Replace non-finite floats by strings so the report is strict JSON."""
    if isinstance(obj, float):
        return encode_real(obj) if math.isinf(obj) else ("nan" if math.isnan(obj) else obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Verdict):
        return obj.value
    return obj


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file, or - for stdin")
    common.add_argument("--family", help="built-in family name")
    common.add_argument("--grid", help="CSV grid file with columns x,phi[,g]")
    for name in FAMILY_PARAMS:
        common.add_argument(f"--{name}", type=float, help=f"family parameter {name}")
    common.add_argument("--t", type=float, help="spectral parameter")
    common.add_argument("--sign", type=int, choices=(1, -1), help="estimate: bracket only the threshold of this sign")
    common.add_argument("--x-max", type=float, help="largest horizon")
    common.add_argument("--x-first", type=float, help="first dyadic horizon")
    common.add_argument("--resolution", type=float, help="relative bisection resolution")
    common.add_argument("--t-min", type=float)
    common.add_argument("--t-max", type=float)
    common.add_argument("--output", help="write the JSON report here instead of stdout")
    common.add_argument("--csv", help="CSV output path (trace, schrodinger)")
    common.add_argument("--deterministic", action="store_true", help="omit timings from the report")

    p = argparse.ArgumentParser(prog="canosc", description="Oscillation-based essential-spectrum estimates "
                                                           "for canonical systems.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("classify", parents=[common], help="oscillation verdict at one t")
    sub.add_parser("estimate", parents=[common], help="brackets for M_+, |M_-| and M")
    sub.add_parser("bounds", parents=[common], help="tail statistics, bounds and consistency checks")
    sch = sub.add_parser("schrodinger", parents=[common], help="zero-energy probe; S bracket without --t")
    sch.add_argument("--horizon", type=float, help="shooting horizon for zero counts")
    tr = sub.add_parser("trace", parents=[common], help="CSV trace of theta (or zero counts)")
    tr.add_argument("--horizon", type=float, help="trace end point")
    tr.add_argument("--theta0", type=float, help="initial angle")
    tr.add_argument("--zeros", action="store_true", help="trace Schroedinger zero counts instead")
    vf = sub.add_parser("verify", parents=[common], help="run the acceptance criteria")
    vf.add_argument("--skip", type=int, action="append", default=[], help="criterion number to skip")
    return p


def _load_config(args) -> dict:
    cfg: dict = {}
    if args.config:
        try:
            text = sys.stdin.read() if args.config == "-" else Path(args.config).read_text()
        except OSError as exc:
            raise OSError(f"cannot read config {args.config}: {exc}") from exc
        try:
            cfg = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(cfg, dict):
            raise ConfigError("config must be a JSON object")
    system = dict(cfg.get("system") or {})
    if args.family or args.grid:
        system = {"family": args.family} if args.family else {"grid": args.grid}
    params = dict(system.get("params") or {})
    for name in FAMILY_PARAMS:
        v = getattr(args, name)
        if v is not None:
            params[name] = v
    system["params"] = params
    cfg["system"] = system
    for key in ("t", "sign", "x_max", "x_first", "resolution", "t_min", "t_max", "output", "csv",
                "horizon", "theta0"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    if args.deterministic:
        cfg["deterministic"] = True
    for key, v in cfg.items():
        if isinstance(v, float) and not math.isfinite(v):
            raise ConfigError(f"option {key} must be finite")
    return cfg


def _system(cfg: dict) -> CoefficientField:
    system = cfg["system"]
    if ("family" in system) == ("grid" in system):
        raise ConfigError("give exactly one system source: a family name or a grid file")
    if "grid" in system:
        return builtin_family("grid_sampled", path=system["grid"])
    return builtin_family(system["family"], **system["params"])


def _system_json(fld: CoefficientField, cfg: dict) -> dict:
    out = {**cfg["system"], "name": fld.name}
    notes = []
    if not fld.trace_normed:
        notes.append("reparametrized by arclength of the trace (trace normalization)")
    if not fld.l2_direction_ok and fld.l2_angle != 0.0:
        notes.append(f"rotated by {fld.l2_angle!r} to put the declared L^2 direction on e_1")
    out["preparation"] = notes
    return out


def _classify_policy(cfg: dict) -> ClassifyPolicy:
    kw = {}
    for src, dst in (("x_max", "x_max"), ("x_first", "x_first"), ("resolution", "rel_resolution"),
                     ("t_min", "t_min"), ("t_max", "t_max")):
        if src in cfg:
            kw[dst] = float(cfg[src])
    return ClassifyPolicy(**kw)


def _shooting_policy(cfg: dict) -> ShootingPolicy:
    kw = {}
    for src, dst in (("x_max", "x_max"), ("x_first", "x_first"), ("resolution", "rel_resolution"),
                     ("t_min", "t_min"), ("t_max", "t_max")):
        if src in cfg:
            kw[dst] = float(cfg[src])
    return ShootingPolicy(**kw)


def _need_t(cfg: dict) -> float:
    if "t" not in cfg:
        raise ConfigError("this command needs --t")
    return float(cfg["t"])


def cmd_classify(fld, cfg):
    policy = _classify_policy(cfg)
    v = classify(fld, _need_t(cfg), policy)
    code = EXIT_INCONCLUSIVE if v.kind is Verdict.INCONCLUSIVE else EXIT_OK
    return v.to_json(), dataclasses.asdict(policy), {}, code, f"t={v.t}: {v.kind.value} ({v.evidence['reason']})"


def cmd_estimate(fld, cfg):
    policy = _classify_policy(cfg)
    if "sign" in cfg:
        # one side only: the threshold of the oscillatory set at sign * t
        res = oscillatory_threshold(fld, int(cfg["sign"]), policy)
        return (res.to_json(), dataclasses.asdict(policy), {}, EXIT_OK,
                f"threshold for sign {res.sign:+d} in {res.bracket}")
    est = m_estimate(fld, policy)
    return (est.to_json(), dataclasses.asdict(policy), {}, EXIT_OK,
            f"M_+ in {est.m_plus}, |M_-| in {est.m_minus}, M in {est.m}, 0 in ess: {est.zero_in_ess}")


def cmd_bounds(fld, cfg):
    policy, spol = _classify_policy(cfg), _shooting_policy(cfg)
    stats = tail_stats(fld)
    est = m_estimate(fld, policy)
    est_d = est if fld.diagonal else m_estimate(diagonal_part(fld), policy)
    s = s_bracket(fld, spol)
    report = consistency_report(fld, est, s, stats, est_d)
    result = {
        "tail_stats": {k: v for k, v in stats.to_json().items() if k != "samples"},
        "thm13_interval": thm13_interval(stats.A_hat).to_json(),
        "thm14_upper": encode_real(thm14_upper(stats.B_hat)),
        "thm11_interval": thm11_interval(est_d.m).to_json(),
        "estimate": est.to_json(),
        "diagonal_estimate": est_d.to_json(),
        "s_bracket": s.to_json(),
        "consistency": report.to_json(),
        "discrete_spectrum": report.discrete_spectrum,
    }
    code = EXIT_OK if report.passed else EXIT_CONSISTENCY
    summary = (f"A={stats.A_hat:g} B={stats.B_hat:g} M in {est.m}, M_d in {est_d.m}, S in {s.bracket}; "
               f"checks {'pass' if report.passed else 'FAIL: ' + ', '.join(report.failures())}")
    if report.discrete_spectrum:
        summary += "; A = 0: discrete spectrum"
    return result, {"classify": dataclasses.asdict(policy), "shooting": dataclasses.asdict(spol)}, {}, code, summary


def cmd_schrodinger(fld, cfg):
    policy = _shooting_policy(cfg)
    if "t" in cfg:
        t = float(cfg["t"])
        v = negative_spectrum_finite(fld, t, policy)
        if "csv" in cfg:
            run = v.run or shoot_zero_energy(fld, t, float(cfg.get("horizon", policy.x_max)), policy)
            write_zero_counts(run, cfg["csv"])
        code = EXIT_INCONCLUSIVE if v.kind == "Inconclusive" else EXIT_OK
        return v.to_json(), dataclasses.asdict(policy), {}, code, f"t={t}: {v.kind} ({v.evidence.get('reason')})"
    s = s_bracket(fld, policy)
    return s.to_json(), dataclasses.asdict(policy), {}, EXIT_OK, f"S in {s.bracket}"


def cmd_trace(fld, cfg):
    t = _need_t(cfg)
    horizon = float(cfg.get("horizon", 100.0))
    if cfg.get("zeros"):
        policy = _shooting_policy(cfg)
        run = shoot_zero_energy(fld, t, horizon, policy)
        rows, header = run.zero_counts, ("X", "count")
        result = {"t": t, "horizon": horizon, "rows": len(rows), "zero_count": run.count}
    else:
        policy = StepPolicy()
        # same preparation as classify: x is then the trace arclength of the original field
        traj = integrate(prepare(fld), t, float(cfg.get("theta0", 0.0)), 0.0, horizon, policy)
        rows, header = trajectory_rows(traj), ("x", "theta")
        result = {"t": t, "horizon": horizon, "rows": len(rows), "theta_end": traj.samples[-1].theta,
                  "rotations": traj.rotations, "step_stats": traj.step_stats}
    if "csv" in cfg:
        write_csv(rows, header, cfg["csv"])
        result["csv"] = cfg["csv"]
    else:
        write_csv(rows, header, None, fh=sys.stdout)
        result["csv"] = "-"
    return result, dataclasses.asdict(policy), {}, EXIT_OK, f"{len(rows)} rows, t={t}, horizon={horizon:g}"


def cmd_verify(fld, cfg, skip=()):
    from .acceptance import run_all

    results = run_all(tuple(skip))
    for r in results:
        print(r.line(), file=sys.stderr)
    ok = all(r.passed for r in results)
    res = {"criteria": [r.to_json() for r in results], "passed": ok}
    if cfg.get("deterministic"):
        for c in res["criteria"]:
            c.pop("seconds")
    return (res, {}, {}, EXIT_OK if ok else EXIT_CONSISTENCY,
            f"{sum(r.passed for r in results)}/{len(results)} criteria pass")


COMMANDS = {
    "classify": cmd_classify,
    "estimate": cmd_estimate,
    "bounds": cmd_bounds,
    "schrodinger": cmd_schrodinger,
    "trace": cmd_trace,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        cfg = _load_config(args)
        if args.command == "trace" and args.zeros:
            cfg["zeros"] = True
        if args.command == "verify":
            fld = None
            system_json = None
            result, policy, diag, code, summary = cmd_verify(fld, cfg, args.skip)
        else:
            fld = _system(cfg)
            system_json = _system_json(fld, cfg)
            result, policy, diag, code, summary = COMMANDS[args.command](fld, cfg)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ThresholdError, StiffnessError) as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    diag = dict(diag, version=__version__)
    if not cfg.get("deterministic"):
        diag["elapsed_s"] = time.perf_counter() - t0
        diag["generated_at"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    report = {"system": system_json, "command": args.command, "result": result, "policy": policy,
              "diagnostics": diag}
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True, allow_nan=False) + "\n"
    try:
        if "output" in cfg:
            Path(cfg["output"]).write_text(text)
        elif args.command != "trace" or "csv" in cfg:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(summary, file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
