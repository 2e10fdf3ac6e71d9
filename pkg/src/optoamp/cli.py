"""Command-line entry point.

Exit codes: 0 success, 1 validation/config error, 2 numerical failure,
3 I/O error.
"""
import argparse
import json
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from types import SimpleNamespace

import numpy as np

from . import experiments, presets
from .errors import IoError, NumericalError, ParseError, ValidationError
from .noise import noise_sweep
from .response import group_delay
from .scattering import gain, t12_closed, transmission_sweep
from .stability import stability_grid, stability_report
from .sysmodel import (RATE_FIELDS, RAW_KEYS, TWO_PI, apply_amplification_conditions,
                       g2_stability_rule, invariant_violations, params_from_megahertz)

log = logging.getLogger("optoamp")

TOP_KEYS = {"params", "conditions", "rule_g2", "grid", "output"}
GRID_KEYS = {"f_min", "f_max", "points", "g_min", "g_max", "g_points"}
OUTPUT_KEYS = {"path", "format"}
FLAG_KEYS = {"conditions", "rule_g2"}


@dataclass
class RunConfig:
    params: dict
    conditions: bool = False
    rule_g2: bool = False
    grid: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def resolve(self):
        """SystemParams after the G2 rule and condition application."""
        raw = dict(self.params)
        if self.rule_g2:
            raw["f_G2"] = g2_stability_rule(raw["f_G1"])
        p = _validated(raw)
        return apply_amplification_conditions(p) if self.conditions else p


def _validated(raw):
    """SystemParams from a complete raw map; the error lists every bad field."""
    try:
        return params_from_megahertz(raw, base={})
    except ValidationError as first:
        try:
            probe = SimpleNamespace(**{name: TWO_PI * float(raw[key]) for name, key in RATE_FIELDS})
            for key in ("eta1", "eta2", "eta3", "phi", "n_m"):
                setattr(probe, key, float(raw[key]))
            probe.s_in = tuple(float(s) for s in raw["s_in"])
        except (TypeError, ValueError, KeyError):
            raise first from None
        bad = invariant_violations(probe)
        if len(bad) <= 1:
            raise
        raise ValidationError("; ".join(msg for _, msg in bad),
                              fields=[f for f, _ in bad]) from None


def load_config(path):
    """Read a JSON run configuration; missing parameters come from the fig3 preset."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return config_from_dict(doc, source=str(path))


def config_from_dict(doc, source="config"):
    if not isinstance(doc, dict):
        raise ValidationError(f"{source}: top level must be a JSON object")
    errors = []
    unknown = sorted(set(doc) - TOP_KEYS)
    if unknown:
        errors.append(f"unknown top-level key(s): {', '.join(unknown)}")
    params = doc.get("params", {})
    if not isinstance(params, dict):
        errors.append("'params' must be an object")
        params = {}
    bad_params = sorted(set(params) - set(RAW_KEYS))
    if bad_params:
        errors.append(f"unknown parameter key(s): {', '.join(bad_params)}")
    for key, allowed in (("grid", GRID_KEYS), ("output", OUTPUT_KEYS)):
        sub = doc.get(key, {})
        if not isinstance(sub, dict):
            errors.append(f"'{key}' must be an object")
        elif set(sub) - allowed:
            errors.append(f"unknown {key} key(s): {', '.join(sorted(set(sub) - allowed))}")
    for key in FLAG_KEYS:
        if key in doc and not isinstance(doc[key], bool):
            errors.append(f"'{key}' must be true or false")
    if errors:
        raise ValidationError(f"{source}: " + "; ".join(errors))
    missing = [k for k in RAW_KEYS if k not in params]
    if missing:
        log.warning("%s: %s not given, using fig3 preset values", source, ", ".join(missing))
    return RunConfig(params={**presets.DEFAULT, **params},
                     conditions=doc.get("conditions", False),
                     rule_g2=doc.get("rule_g2", False),
                     grid=dict(doc.get("grid", {})),
                     output=dict(doc.get("output", {})))


def apply_set(cfg, assignment):
    """Apply one ``key=value`` override; values are parsed as JSON literals."""
    key, sep, value = assignment.partition("=")
    key = key.strip()
    if not sep:
        raise ValidationError(f"--set expects key=value, got {assignment!r}")
    try:
        parsed = json.loads(value)
    except json.JSONDecodeError:
        raise ValidationError(f"--set {key}: cannot parse value {value!r}") from None
    if key in FLAG_KEYS:
        if not isinstance(parsed, bool):
            raise ValidationError(f"--set {key} expects true or false")
        setattr(cfg, key, parsed)
    elif key in RAW_KEYS:
        cfg.params[key] = parsed
    else:
        raise ValidationError(f"--set: unknown key {key!r}", fields=[key])
    return cfg


def _detuning_grid(cfg, args, default):
    lo = args.f_min if args.f_min is not None else cfg.grid.get("f_min", default[0])
    hi = args.f_max if args.f_max is not None else cfg.grid.get("f_max", default[1])
    n = args.points if args.points is not None else cfg.grid.get("points", default[2])
    if not (isinstance(n, int) and n >= 1 and lo <= hi):
        raise ValidationError(f"bad detuning grid f_min={lo!r} f_max={hi!r} points={n!r}")
    return np.linspace(lo, hi, n)


def _emit(dataset, cfg, args):
    fmt = args.format or cfg.output.get("format", "csv")
    out = args.out or cfg.output.get("path")
    if out:
        experiments.write_dataset(dataset, fmt, out)
        print(f"wrote {out}")
    else:
        text = experiments.to_json(dataset) if fmt == "json" else experiments.to_csv(dataset)
        sys.stdout.write(text)


def _echo(p):
    print("params (MHz convention): " + json.dumps(p.to_megahertz()), file=sys.stderr)


def cmd_validate(p, cfg, args):
    rep = stability_report(p)
    verdict = "stable" if rep.stable else ("marginal" if rep.marginal else "unstable")
    print(f"{verdict}, max Re λ = {rep.max_real_part:.6g} rad/us")
    return 0


def cmd_transmit(p, cfg, args):
    f = _detuning_grid(cfg, args, experiments.DETUNING_MHZ)
    pairs = [(i, j) for i in (1, 2, 3) for j in (1, 2, 3)]
    T = transmission_sweep(p, TWO_PI * f)
    cols = [experiments.DETUNING_COL] + [(f"T{i}{j}sq", "dimensionless") for i, j in pairs]
    rows = np.column_stack([f] + [np.abs(T[:, i - 1, j - 1]) ** 2 for i, j in pairs])
    _emit(experiments.SweepDataset("transmit", cols, rows, p.as_dict()), cfg, args)
    return 0


def cmd_gain(p, cfg, args):
    s = gain(p)
    isolation = abs(t12_closed(p, 0.0)) ** 2
    summary = {
        "gain_linear": s.gain_linear,
        "gain_db": s.gain_db,
        "t21_resonant": [s.t21_resonant.real, s.t21_resonant.imag],
        "t12_resonant_sq": isolation,
        "bandwidth_MHz": s.bandwidth / TWO_PI,
        "bandwidth_numeric_MHz": s.bandwidth_numeric / TWO_PI,
        "gbp_MHz": s.gbp / TWO_PI,
    }
    if (args.format or cfg.output.get("format")) == "json":
        print(json.dumps({**summary, "params": p.as_dict()}, indent=1))
    else:
        print(f"gain            {s.gain_linear:.6g} ({s.gain_db:.3f} dB)")
        print(f"|T12(0)|^2      {isolation:.3g}")
        print(f"bandwidth       {summary['bandwidth_MHz']:.6g} MHz (closed form), "
              f"{summary['bandwidth_numeric_MHz']:.6g} MHz (half-power)")
        print(f"gain-bandwidth  {summary['gbp_MHz']:.6g} MHz")
    return 0


def cmd_stability(p, cfg, args):
    if not args.grid:
        rep = stability_report(p)
        verdict = "stable" if rep.stable else ("marginal" if rep.marginal else "unstable")
        print(f"{verdict}, max Re λ = {rep.max_real_part:.6g} rad/us, margin = {rep.margin:.6g}")
        for lam in rep.eigenvalues:
            print(f"  λ = {lam.real:+.6g} {lam.imag:+.6g}i")
        return 0
    lo = cfg.grid.get("g_min", experiments.STABILITY_AXIS_MHZ[0])
    hi = cfg.grid.get("g_max", experiments.STABILITY_AXIS_MHZ[1])
    n = cfg.grid.get("g_points", experiments.STABILITY_AXIS_MHZ[2])
    axis = np.linspace(lo, hi, n)
    g = stability_grid(p, axis, axis, apply_conditions=cfg.conditions)
    G1, G2 = np.meshgrid(g.g1_values, g.g2_values, indexing="ij")
    rows = np.column_stack([G1.ravel(), G2.ravel(), g.status.ravel(), g.max_real_parts.ravel()])
    cols = [("f_G1", "MHz"), ("f_G2", "MHz"), ("status", "flag"), ("max_re", "rad/us")]
    _emit(experiments.SweepDataset("stability", cols, rows, p.as_dict()), cfg, args)
    return 0


def cmd_noise(p, cfg, args):
    f = _detuning_grid(cfg, args, experiments.DETUNING_MHZ)
    r = noise_sweep(p, TWO_PI * f)
    cols = [experiments.DETUNING_COL, ("S2out", "quanta"), ("N2", "quanta")]
    _emit(experiments.SweepDataset("noise", cols, np.column_stack([f, r.s2_out, r.added_quanta]),
                                   p.as_dict()), cfg, args)
    return 0


def cmd_delay(p, cfg, args):
    f = _detuning_grid(cfg, args, experiments.DELAY_MHZ)
    c = group_delay(p, TWO_PI * f)
    cols = [experiments.DETUNING_COL, ("phase", "rad"), ("delay", "us")]
    _emit(experiments.SweepDataset("delay", cols, np.column_stack([f, c.phase, c.delay]),
                                   p.as_dict()), cfg, args)
    return 0


def cmd_figure(cfg, args):
    overrides = {k: v for k, v in cfg.params.items() if k in args.explicit}
    fmt = args.format or cfg.output.get("format", "csv")
    out = args.out or cfg.output.get("path")
    datasets = experiments.figure_dataset(args.fig, overrides, workers=args.workers)
    for d in datasets:
        _echo(d.system_params())
    if out and len(datasets) == 1 and Path(out).suffix in (".csv", ".json"):
        targets = [Path(out)]
    else:
        out_dir = Path(out or ".")
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise IoError(f"cannot create {out_dir}: {exc.strerror or exc}") from exc
        targets = [out_dir / f"{d.name}.{fmt}" for d in datasets]
    for d, target in zip(datasets, targets):
        experiments.write_dataset(d, fmt, target)
        print(f"wrote {target}")
    return 0


COMMANDS = {"validate": cmd_validate, "transmit": cmd_transmit, "gain": cmd_gain,
            "stability": cmd_stability, "noise": cmd_noise, "delay": cmd_delay}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", help="output file (or directory for multi-dataset figures)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a parameter (MHz convention) or rule_g2/conditions")
    common.add_argument("--apply-conditions", action="store_true",
                        help="impose phi=-pi/2, J=sqrt(k2 k3)/2, G3=G2 k3/(2J)")
    common.add_argument("-v", "--verbose", action="store_true")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--f-min", type=float, help="lowest detuning omega/2pi in MHz")
    grid.add_argument("--f-max", type=float, help="highest detuning omega/2pi in MHz")
    grid.add_argument("--points", type=int)

    parser = argparse.ArgumentParser(prog="optoamp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check config and report stability")
    sub.add_parser("transmit", parents=[common, grid], help="|T_ij|^2 over a detuning grid")
    sub.add_parser("gain", parents=[common], help="resonant gain, bandwidth, GBP")
    st = sub.add_parser("stability", parents=[common], help="stability report or G1-G2 grid")
    st.add_argument("--grid", action="store_true", help="sweep G1 and G2 instead of one point")
    sub.add_parser("noise", parents=[common, grid], help="output spectrum and added noise")
    sub.add_parser("delay", parents=[common, grid], help="phase and group delay of T21")
    fig = sub.add_parser("figure", parents=[common], help="reproduce a figure's datasets")
    fig.add_argument("fig", choices=experiments.FIGURES)
    fig.add_argument("--workers", type=int, default=1)
    return parser


def _resolve_config(args):
    if args.config:
        cfg = load_config(args.config)
        explicit = set(json.loads(Path(args.config).read_text(encoding="utf-8")).get("params", {}))
    else:
        cfg = RunConfig(params=dict(presets.DEFAULT))
        explicit = set()
    for assignment in args.set:
        apply_set(cfg, assignment)
        explicit.add(assignment.partition("=")[0].strip())
    if args.apply_conditions:
        cfg.conditions = True
    args.explicit = explicit
    return cfg


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = _resolve_config(args)
        if args.command == "figure":
            return cmd_figure(cfg, args)
        p = cfg.resolve()
        _echo(p)
        return COMMANDS[args.command](p, cfg, args)
    except (ValidationError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (IoError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
