"""Figure datasets and their CSV/JSON serialisation.

Each figure produces one or more :class:`SweepDataset` objects named
``<fig>_<variant>``. Every dataset carries the full parameter snapshot it
was computed from, and serialisation is byte-for-byte deterministic.
"""
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import presets
from .errors import IoError, ValidationError
from .noise import added_noise
from .response import group_delay
from .scattering import transmission_sweep
from .stability import stability_grid, stability_report
from .sysmodel import TWO_PI, SystemParams, params_from_megahertz, with_rule_line

log = logging.getLogger(__name__)

FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8")

DETUNING_MHZ = (-3.0, 3.0, 601)
DELAY_MHZ = (-1.0, 1.0, 2001)
PHI_POINTS = 721
STABILITY_AXIS_MHZ = (0.0, 5.0, 251)

DETUNING_COL = ("detuning", "MHz")


@dataclass
class SweepDataset:
    name: str
    columns: list
    rows: np.ndarray
    params: dict
    stable: bool = True
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.columns = [tuple(c) for c in self.columns]
        self.rows = np.asarray(self.rows, dtype=float).reshape(-1, len(self.columns))

    def column(self, label):
        labels = [c[0] for c in self.columns]
        return self.rows[:, labels.index(label)]

    def system_params(self):
        return SystemParams.from_dict(self.params)


def _grid(lo, hi, n):
    return np.linspace(lo, hi, n)


def _stable(p):
    rep = stability_report(p)
    if not rep.stable:
        log.warning("parameters are dynamically unstable (max Re lambda = %.6g rad/us)",
                    rep.max_real_part)
    return rep.stable


def _fig2(base, workers):
    axis = _grid(*STABILITY_AXIS_MHZ)
    grid = stability_grid(base, axis, axis, apply_conditions=True)
    G1, G2 = np.meshgrid(grid.g1_values, grid.g2_values, indexing="ij")
    rows = np.column_stack([G1.ravel(), G2.ravel(), grid.status.ravel(),
                            grid.max_real_parts.ravel()])
    cols = [("f_G1", "MHz"), ("f_G2", "MHz"), ("status", "flag"), ("max_re", "rad/us")]
    return [SweepDataset("fig2_stability", cols, rows, base.as_dict())]


def _transmission_set(name, p, pairs):
    f = _grid(*DETUNING_MHZ)
    T = transmission_sweep(p, TWO_PI * f)
    data = [f] + [np.abs(T[:, i - 1, j - 1]) ** 2 for i, j in pairs]
    cols = [DETUNING_COL] + [(f"T{i}{j}sq", "dimensionless") for i, j in pairs]
    return SweepDataset(name, cols, np.column_stack(data), p.as_dict(), stable=_stable(p))


NINE = [(i, j) for i in (1, 2, 3) for j in (1, 2, 3)]


def _fig3(base, workers):
    variants = [("fig3_phi_minus", base.replace(phi=-math.pi / 2)),
                ("fig3_phi_plus", base.replace(phi=math.pi / 2))]
    return _map(workers, lambda v: _transmission_set(v[0], v[1], NINE), variants)


def _fig4(base, workers):
    phis = _grid(-math.pi, math.pi, PHI_POINTS)
    t12, t21, max_re = [], [], []
    for phi in phis:
        q = base.replace(phi=float(phi))
        T = transmission_sweep(q, [0.0])[0]
        t12.append(abs(T[0, 1]) ** 2)
        t21.append(abs(T[1, 0]) ** 2)
        max_re.append(stability_report(q).max_real_part)
    max_re = np.array(max_re)
    stable = (max_re < 0) & (np.abs(max_re) >= 1e-9)
    if not stable.all():
        log.warning("fig4: %d of %d phase points are dynamically unstable; see fig4_stability",
                    int((~stable).sum()), phis.size)
    cols = [("phi", "rad"), ("T12sq", "dimensionless"), ("T21sq", "dimensionless")]
    main = SweepDataset("fig4", cols, np.column_stack([phis, t12, t21]), base.as_dict(),
                        stable=bool(stable.all()))
    flags = SweepDataset("fig4_stability", [("phi", "rad"), ("stable", "flag"), ("max_re", "rad/us")],
                         np.column_stack([phis, stable, max_re]), base.as_dict(),
                         stable=bool(stable.all()))
    return [main, flags]


def _label(x):
    return repr(float(x)).removesuffix(".0")


def _fig5(base, workers):
    variants = [(f"fig5_ga_{_label(f)}", base.replace(g_a=TWO_PI * f)) for f in (2.0, 1.0, 0.5, -2.0)]
    return _map(workers, lambda v: _transmission_set(v[0], v[1], [(2, 1)]), variants)


def _noise_set(name, p):
    f = _grid(*DETUNING_MHZ)
    w = TWO_PI * f
    T = transmission_sweep(p, w)
    cols = [DETUNING_COL, ("T21sq", "dimensionless"), ("N2", "quanta")]
    rows = np.column_stack([f, np.abs(T[:, 1, 0]) ** 2, added_noise(p, w)])
    return SweepDataset(name, cols, rows, p.as_dict(), stable=_stable(p))


def _fig6(base, workers):
    variants = [(f"fig6_G1_{_label(g)}", with_rule_line(base, g)) for g in (2.0, 5.0, 10.0)]
    return _map(workers, lambda v: _noise_set(*v), variants)


def _fig7(base, workers):
    variants = [(f"fig7_eta_{_label(e)}", base.replace(eta1=e, eta2=e, eta3=e))
                for e in (1.0, 0.75, 0.5)]
    return _map(workers, lambda v: _noise_set(*v), variants)


def _delay_set(name, p):
    f = _grid(*DELAY_MHZ)
    curve = group_delay(p, TWO_PI * f)
    cols = [DETUNING_COL, ("phase", "rad"), ("delay", "us")]
    return SweepDataset(name, cols, np.column_stack([f, curve.phase, curve.delay]),
                        p.as_dict(), stable=_stable(p))


def _fig8(base, workers):
    variants = [(f"fig8_G1_{_label(g)}", with_rule_line(base, g)) for g in (2.0, 5.0, 10.0)]
    variants.append(("fig8_passive", with_rule_line(base.replace(g_a=-TWO_PI * 2.0), 5.0)))
    return _map(workers, lambda v: _delay_set(*v), variants)


def _map(workers, fn, items):
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


_BUILDERS = {"fig2": _fig2, "fig3": _fig3, "fig4": _fig4, "fig5": _fig5,
             "fig6": _fig6, "fig7": _fig7, "fig8": _fig8}


def figure_dataset(fig, overrides=None, workers=1):
    """Datasets behind one figure.

    Parameters
    ----------
    fig : str
        One of ``fig2`` .. ``fig8``.
    overrides : dict, optional
        MHz-convention parameter overrides applied on top of the named
        preset before the figure's own sweep variables are set.
    workers : int
        Thread count for figures with several independent variants. Output
        is identical to the serial run.

    Returns
    -------
    list of SweepDataset
    """
    if fig not in _BUILDERS:
        raise ValidationError(f"unknown figure {fig!r}; choose from {', '.join(FIGURES)}")
    base = params_from_megahertz(overrides or {}, base=presets.PRESETS[fig])
    return _BUILDERS[fig](base, workers)


def _fmt(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def _json_number(x):
    x = float(x)
    return x if math.isfinite(x) else None


def to_csv(d):
    lines = [",".join(f"{label}[{unit}]" for label, unit in d.columns)]
    lines += [",".join(_fmt(v) for v in row) for row in d.rows]
    return "\n".join(lines) + "\n"


def to_json(d):
    doc = {
        "name": d.name,
        "params": d.params,
        "columns": [{"label": label, "unit": unit} for label, unit in d.columns],
        "rows": [[_json_number(v) for v in row] for row in d.rows],
        "stable": d.stable,
    }
    return json.dumps(doc, indent=1) + "\n"


def write_dataset(d, format, destination):
    """Write `d` as ``csv`` or ``json`` to a path."""
    if format == "csv":
        text = to_csv(d)
    elif format == "json":
        text = to_json(d)
    else:
        raise ValidationError(f"unknown format {format!r}; use csv or json")
    path = Path(destination)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_dataset_json(source):
    path = Path(source)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from exc
    rows = np.array([[math.nan if v is None else v for v in row] for row in doc["rows"]],
                    dtype=float)
    cols = [(c["label"], c["unit"]) for c in doc["columns"]]
    return SweepDataset(doc["name"], cols, rows.reshape(-1, len(cols)), doc["params"],
                        stable=doc.get("stable", True))


def write_figure(fig, out_dir, format="csv", overrides=None, workers=1):
    """Compute a figure and write every dataset as ``<out_dir>/<name>.<format>``."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {out_dir}: {exc.strerror or exc}") from exc
    return [write_dataset(d, format, out_dir / f"{d.name}.{format}")
            for d in figure_dataset(fig, overrides, workers)]
