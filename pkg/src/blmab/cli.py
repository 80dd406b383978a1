"""Command-line front end.

Run commands (``simulate``, ``sweep``, ``demo-lower-bound``, ``bound-check``)
write a regret CSV; with ``--out DIR`` they also write ``summary.json``
holding the fits, Lemma-1 bound evaluations and the run manifest. Data goes
to stdout or ``--out``; progress goes to stderr.
"""

import argparse
import configparser
import csv
import datetime as _dt
import hashlib
import io
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .analysis import AGREEMENT_TOL, fit_report, theoretical_exponent_subpareto
from .engine import SimulationConfig, lemma1_check, sweep
from .errors import BLMABError, ConfigError, DataError, ParseError
from .estimation import fit_from_event_times, required_samples

log = logging.getLogger("blmab")

CSV_HEADER = ["policy", "tail", "param", "c", "T", "n_instances", "n_sub", "mean_regret", "std_err", "seed"]
DEFAULT_HORIZONS = (10_000, 20_000, 50_000, 70_000, 100_000)
EXIT_IO = 5
EXIT_BOUND = 1

# key -> parser; every key a config file or flag may set
_KEYS = {
    "policy": str,
    "policies": lambda s: [p.strip() for p in s.split(",") if p.strip()],
    "tail": str,
    "param": float,
    "params": lambda s: [float(p) for p in s.split(",") if p.strip()],
    "c": float,
    "horizons": lambda s: [int(float(p)) for p in s.split(",") if p.strip()],
    "n_instances": int,
    "n_sub": int,
    "seed": int,
    "threads": int,
    "alpha": float,
    "alpha_tail": str,
    "alpha_param": float,
    "k_mode": str,
    "epsilon": float,
    "baseline": str,
}

_DEFAULTS = {
    "policy": "blmoss",
    "tail": "subexp",
    "param": None,
    "c": 0.5,
    "horizons": list(DEFAULT_HORIZONS),
    "n_instances": 200,
    "n_sub": 20,
    "seed": 0,
    "threads": 1,
    "alpha": None,
    "alpha_tail": None,
    "alpha_param": None,
    "k_mode": "cap",
    "epsilon": None,
}


def read_config(path):
    """Parse a ``key = value`` file (``#`` comments, no sections)."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}", key="config") from exc
    try:
        parser.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}", key="config") from exc
    out = {}
    for key, raw in parser["run"].items():
        if key not in _KEYS:
            raise ConfigError(f"unknown config key {key!r}", key=key)
        try:
            out[key] = _KEYS[key](raw.strip().strip('"'))
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r}", key=key) from exc
    return out


def resolve(args, extra_defaults=None):
    """Defaults, then the config file, then flags (flags win)."""
    values = dict(_DEFAULTS)
    values.update(extra_defaults or {})
    if getattr(args, "config", None):
        values.update(read_config(args.config))
    for key in _KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return values


def base_config(values, **overrides):
    v = {**values, **overrides}
    try:
        return SimulationConfig(
            horizon=v["horizons"][0],
            policy=v["policy"],
            tail=v["tail"],
            param=None if v["tail"] == "uniform" else v["param"],
            c=v["c"],
            n_instances=v["n_instances"],
            n_sub=v["n_sub"],
            master_seed=v["seed"],
            alpha=v["alpha"],
            alpha_tail=v["alpha_tail"],
            alpha_param=v["alpha_param"],
            k_mode=v["k_mode"],
            epsilon=v["epsilon"],
            threads=max(1, v["threads"]),
        )
    except IndexError:
        raise ConfigError("horizons is empty", key="horizons") from None


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def manifest_core(command, values):
    """Schedule-independent part of the manifest; its hash names the run."""
    config = {k: v for k, v in sorted(values.items()) if k != "threads"}
    return {"artifact": "blmab", "version": __version__, "command": command, "config": config, "seed": values["seed"]}


def manifest_hash(core):
    return hashlib.sha256(json.dumps(core, sort_keys=True).encode()).hexdigest()


def curves_csv(curves, digest):
    buf = io.StringIO()
    buf.write(f"# manifest_sha256={digest}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for curve in curves:
        for p in curve.points:
            writer.writerow(
                [_fmt(x) for x in (curve.policy, curve.tail, curve.param, curve.c, p.horizon,
                                   p.n_instances, curve.n_sub, p.mean_regret, p.std_error, curve.seed)]
            )
    return buf.getvalue()


def curve_summary(curve, beta=None):
    entry = {"policy": curve.policy, "tail": curve.tail, "param": curve.param, "c": curve.c}
    theo = None
    if beta is None and curve.tail == "subpareto" and curve.policy == "blmoss":
        beta = curve.param
    if beta is not None:
        theo = theoretical_exponent_subpareto(beta)
    try:
        report = fit_report(curve, theo)
        entry["fit"] = report.to_dict()
        if report.disagreement > AGREEMENT_TOL:
            log.warning(
                "%s/%s/%s: fit methods differ by %.3f (> %.2f)",
                curve.policy, curve.tail, curve.param, report.disagreement, AGREEMENT_TOL,
            )
    except BLMABError as exc:
        entry["fit"] = None
        entry["fit_error"] = str(exc)
    if curve.policy == "blmoss" and curve.tail != "uniform":
        entry["lemma1"] = lemma1_check(curve)
    entry["points"] = [p.__dict__ for p in curve.points]
    return entry


def emit(command, values, curves, out, extra=None):
    core = manifest_core(command, values)
    digest = manifest_hash(core)
    text = curves_csv(curves, digest)
    summary = {"curves": [curve_summary(c) for c in curves]}
    summary.update(extra or {})
    write_outputs(out, {"regret.csv": text}, summary, core, digest, stdout_text=text)
    return summary


def write_outputs(out, files, summary, core, digest, stdout_text=None):
    if out is None:
        if stdout_text is not None:
            sys.stdout.write(stdout_text)
        else:
            json.dump(summary, sys.stdout, indent=2, default=str)
            sys.stdout.write("\n")
        return
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    digests = {}
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8")
        digests[name] = hashlib.sha256(text.encode()).hexdigest()
    manifest = dict(core)
    manifest.update(
        manifest_sha256=digest,
        timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        outputs=digests,
    )
    summary = dict(summary, manifest=manifest)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, default=str) + "\n", encoding="utf-8")


def _progress(T, mean, se):
    log.info("T=%d mean_regret=%.4g std_err=%.3g", T, mean, se)


def cmd_simulate(args):
    values = resolve(args)
    cfg = base_config(values)
    curve = sweep(cfg, values["horizons"], progress=_progress)
    emit("simulate", values, [curve], args.out)
    return 0


def cmd_sweep(args):
    values = resolve(args)
    params = values.get("params") or [values["param"]]
    policies = values.get("policies") or [values["policy"]]
    curves = []
    for policy in policies:
        for param in params:
            cfg = base_config(values, policy=policy, param=param)
            log.info("sweep policy=%s param=%s", policy, param)
            curves.append(sweep(cfg, values["horizons"], progress=_progress))
    emit("sweep", values, curves, args.out)
    return 0


def cmd_demo_lower_bound(args):
    values = resolve(
        args,
        {"tail": "uniform", "epsilon": 0.1, "baseline": "ucb1", "alpha_tail": "subpareto", "alpha_param": 0.5},
    )
    values["tail"] = "uniform"
    eps = values["epsilon"]
    if eps is None or not 0 <= eps <= 0.5:
        raise ConfigError("epsilon must lie in [0, 1/2]", key="epsilon")
    baseline = values.get("baseline") or "ucb1"
    if baseline not in ("ucb1", "moss"):
        raise ConfigError(f"baseline must be ucb1 or moss, got {baseline!r}", key="baseline")
    curves = [
        sweep(base_config(values, policy=baseline), values["horizons"], progress=_progress),
        sweep(base_config(values, policy="blmoss"), values["horizons"], progress=_progress),
    ]
    emit("demo-lower-bound", values, curves, args.out)
    return 0


def cmd_bound_check(args):
    values = resolve(args)
    values["policy"] = "blmoss"
    cfg = base_config(values)
    curve = sweep(cfg, values["horizons"], progress=_progress)
    rows = lemma1_check(curve)
    violations = [r["T"] for r in rows if not r["ok"]]
    emit("bound-check", values, [curve], args.out, {"violations": violations})
    for r in rows:
        print(
            f"T={r['T']} regret={r['mean_regret']:.4g}+3*{r['std_err']:.3g} "
            f"bound={r['lemma1_bound']:.4g}{' (vacuous)' if r['vacuous'] else ''} "
            f"{'ok' if r['ok'] else 'VIOLATED'}",
            file=sys.stderr,
        )
    return EXIT_BOUND if violations else 0


def read_curve_csv(path):
    """Group ``(T, mean_regret)`` rows of a regret CSV by policy/tail/param."""
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    numbered = [(i, line) for i, line in enumerate(lines, start=1) if line.strip() and not line.startswith("#")]
    if not numbered:
        raise DataError(f"{path}: empty curve file")
    reader = csv.DictReader([line for _, line in numbered])
    if reader.fieldnames is None or not {"T", "mean_regret"} <= set(reader.fieldnames):
        raise ParseError("CSV needs T and mean_regret columns", line=numbered[0][0])
    groups = {}
    for (lineno, _), row in zip(numbered[1:], reader):
        try:
            T = int(float(row["T"]))
            R = float(row["mean_regret"])
        except (TypeError, ValueError):
            raise ParseError(f"bad T/mean_regret: {row}", line=lineno) from None
        key = (row.get("policy") or "", row.get("tail") or "", row.get("param") or "")
        groups.setdefault(key, []).append((T, R, lineno))
    return groups


def cmd_fit(args):
    groups = read_curve_csv(args.curve)
    theo = theoretical_exponent_subpareto(args.beta) if args.beta is not None else None
    fits = []
    for (policy, tail, param), rows in groups.items():
        rows.sort()
        try:
            report = fit_report([(T, R) for T, R, _ in rows], theo)
        except BLMABError as exc:
            raise type(exc)(f"{exc} (rows {', '.join(str(r[2]) for r in rows)})") from None
        if report.disagreement > AGREEMENT_TOL:
            log.warning(
                "fit methods differ by %.3f (> %.2f) for %s", report.disagreement, AGREEMENT_TOL,
                "/".join(x for x in (policy, tail, param) if x) or "curve",
            )
        fits.append({"policy": policy, "tail": tail, "param": param, **report.to_dict()})
    result = {"fits": fits}
    if args.out:
        core = {"artifact": "blmab", "version": __version__, "command": "fit", "input": str(args.curve), "beta": args.beta, "seed": None}
        write_outputs(args.out, {}, result, core, manifest_hash(core))
    else:
        json.dump(result, sys.stdout, indent=2)
        sys.stdout.write("\n")
    return 0


def cmd_estimate(args):
    fit = fit_from_event_times(args.events, mu=args.mu, delta=args.delta)
    needed = required_samples(args.horizon, args.mu, args.delta)
    result = fit.to_dict()
    result.update(
        horizon=args.horizon,
        mu=args.mu,
        delta=args.delta,
        n_samples=fit.rate.n_samples,
        required_samples=needed,
        insufficient_samples=fit.rate.n_samples < needed,
    )
    if result["insufficient_samples"]:
        log.warning("only %d samples, %d required for mu=%g delta=%g", fit.rate.n_samples, needed, args.mu, args.delta)
    if args.out:
        core = {"artifact": "blmab", "version": __version__, "command": "estimate", "input": str(args.events), "seed": None}
        write_outputs(args.out, {}, result, core, manifest_hash(core))
    else:
        json.dump(result, sys.stdout, indent=2)
        sys.stdout.write("\n")
    return 0


def _csv_list(kind):
    def parse(s):
        try:
            return _KEYS[kind](s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad list: {s!r}") from None
    return parse


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value run configuration file")
    common.add_argument("--seed", type=int, help="master seed (64-bit)")
    common.add_argument("--threads", type=int, help="worker threads for instance-level parallelism")
    common.add_argument("--out", help="output directory (default: data to stdout)")
    common.add_argument("-v", "--verbose", action="store_true", help="progress on stderr")

    run = argparse.ArgumentParser(add_help=False)
    run.add_argument("--policy", choices=["blmoss", "moss", "ucb1", "thompson"])
    run.add_argument("--tail", choices=["subexp", "subpareto", "uniform"])
    run.add_argument("--param", type=float, help="lambda (subexp) or beta (subpareto)")
    run.add_argument("--c", type=float, help="exponent constant (default 0.5)")
    run.add_argument("--horizons", type=_csv_list("horizons"), help="comma-separated horizons")
    run.add_argument("--n-instances", dest="n_instances", type=int)
    run.add_argument("--n-sub", dest="n_sub", type=int)
    run.add_argument("--alpha", type=float, help="explicit admission fraction")
    run.add_argument("--alpha-tail", dest="alpha_tail", choices=["subexp", "subpareto"])
    run.add_argument("--alpha-param", dest="alpha_param", type=float, help="tail parameter used for alpha")
    run.add_argument("--k-mode", dest="k_mode", choices=["cap", "arrived"])

    parser = argparse.ArgumentParser(prog="blmab", description="Ballooning-bandit regret simulations")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common, run], help="one regret curve")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", parents=[common, run], help="curves over several parameters/policies")
    p.add_argument("--params", type=_csv_list("params"))
    p.add_argument("--policies", type=_csv_list("policies"))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("demo-lower-bound", parents=[common, run], help="uniform arrivals, baseline vs BL-Moss")
    p.add_argument("--epsilon", type=float, help="best-arm gap (default 0.1)")
    p.add_argument("--baseline", choices=["ucb1", "moss"])
    p.set_defaults(func=cmd_demo_lower_bound)

    p = sub.add_parser("bound-check", parents=[common, run], help="BL-Moss curve against the Lemma-1 bound")
    p.set_defaults(func=cmd_bound_check)

    p = sub.add_parser("fit", parents=[common], help="fit regret exponents to a curve CSV")
    p.add_argument("curve", help="CSV with T and mean_regret columns")
    p.add_argument("--beta", type=float, help="report the sub-Pareto theoretical exponent")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("estimate", parents=[common], help="fit tail parameters to event times")
    p.add_argument("events", help="one event time per line")
    p.add_argument("--horizon", "-T", type=int, default=1000)
    p.add_argument("--mu", type=float, default=0.05)
    p.add_argument("--delta", type=float, default=0.05)
    p.set_defaults(func=cmd_estimate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        key = f" [{exc.key}]" if exc.key else ""
        print(f"blmab: usage error{key}: {exc}", file=sys.stderr)
        return exc.exit_code
    except BLMABError as exc:
        print(f"blmab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"blmab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
