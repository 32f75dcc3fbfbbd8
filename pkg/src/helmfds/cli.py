"""Command-line harness for the verification, scaling and frequency experiments.

Every command writes

* ``<out>/results.csv``: one row per run with the deterministic outcome
  (sizes, errors, status), floats printed with 17 significant digits;
* ``<out>/report.json``: the configuration echo, wall-clock times, per-level
  rank statistics and derived timing ratios.

Wall-clock data never enter the CSV, so re-running a command single-threaded
reproduces the CSV byte for byte.

Exit codes: 0 on success, 2 for configuration errors, 3 for numerical
failures (the offending module and cell are printed on stderr).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np
from threadpoolctl import threadpool_limits

from .dense import DEFAULT_SIZE_CAP, dense_solve, relative_error, write_solution
from .errors import ConfigError, HelmFdsError, SingularProjection, SizeCapExceeded
from .fds import fds_factor, fds_solve, leaf_projections
from .formulations import BlockSystem, Formulation, simplified_bm_rules
from .geometry import CurveSpec, build_tree, grid_layout, make_star_curve
from .kernels import WaveParams
from .oracle import mie_solve, mie_trace
from .skeleton import CompressionConfig

__all__ = ["ExperimentConfig", "ExperimentRow", "RESULT_COLUMNS", "TRACE_COLUMNS",
           "build_parser", "main", "cmd_verify", "cmd_scaling", "cmd_freq_sweep",
           "cmd_bm_singularity_demo"]

#: Columns of ``results.csv``.
RESULT_COLUMNS = ["command", "formulation", "mode", "m", "n", "N", "omega", "eps_plus",
                  "eps_minus", "qr_tol", "status", "compressed_size", "compression_ratio",
                  "rel_error_vs_dense", "rel_error_vs_oracle", "rel_error_vs_bm"]

#: Columns of the boundary-trace CSV written by ``verify``.
TRACE_COLUMNS = ["inclusion", "node", "x1", "x2", "abs_u_pmchwt_omit", "abs_q_pmchwt_omit",
                 "abs_u_bm", "abs_q_bm", "abs_u_oracle", "abs_q_oracle"]

_MODES = ("dense", "fds", "both")
_FORMS = tuple(f.value for f in Formulation)

#: Per-command defaults applied when neither the config file nor a flag
#: sets a field.
_COMMAND_DEFAULTS = {
    "verify": {"m": [1], "omega": [3.0], "eps_minus": 4.0, "mode": "dense",
               "formulation": ["pmchwt-omit", "bm"]},
    "scaling": {"m": [16, 64, 256], "omega": [5.0], "eps_minus": 5.0, "mode": "fds",
                "formulation": list(_FORMS)},
    "freq-sweep": {"m": [64], "omega": [1.0, 2.0, 4.0, 8.0], "eps_minus": 5.0, "mode": "fds",
                   "formulation": ["pmchwt-omit", "bm"]},
    "bm-singularity-demo": {"m": [16], "omega": [5.0], "eps_minus": 5.0, "mode": "fds",
                            "formulation": ["bm"], "qr_tol": [1e-12]},
}


@dataclass
class ExperimentConfig:
    """Settings of one command invocation.

    List-valued fields are swept; every combination is one run.

    Attributes
    ----------
    formulation : list of str
    mode : {"dense", "fds", "both"}
    omega : list of float
    eps_plus, eps_minus : float
    m : list of int
        Inclusion counts, powers of 4.
    n : int
        Nodes per inclusion.
    qr_tol : list of float
    proxy_ratio, proxy_min, proxy_factor : see :class:`CompressionConfig`
    threads : int
        BLAS thread count.
    out : str
        Output directory.
    base_radius, lobe_amplitude, lobe_count, spacing : float, float, int, float
        Star geometry.
    size_cap : int
        Largest dense system attempted.
    save_solutions : bool
        Also dump every solution vector as binary.
    """

    formulation: list = field(default_factory=lambda: ["pmchwt-omit"])
    mode: str = "fds"
    omega: list = field(default_factory=lambda: [5.0])
    eps_plus: float = 1.0
    eps_minus: float = 5.0
    m: list = field(default_factory=lambda: [16])
    n: int = 200
    qr_tol: list = field(default_factory=lambda: [1e-12, 1e-9, 1e-6])
    proxy_ratio: float = 1.5
    proxy_min: int = 64
    proxy_factor: float = 3.0
    threads: int = 1
    out: str = "results"
    base_radius: float = 0.25
    lobe_amplitude: float = 0.3
    lobe_count: int = 5
    spacing: float = 1.0
    size_cap: int = DEFAULT_SIZE_CAP
    save_solutions: bool = False

    def validate(self):
        """Raise :class:`ConfigError` on invalid settings; returns ``self``."""
        self.formulation = [Formulation.parse(f).value for f in _as_list(self.formulation)]
        if self.mode not in _MODES:
            raise ConfigError(f"mode must be one of {_MODES}, got {self.mode!r}")
        self.m = [int(v) for v in _as_list(self.m)]
        self.omega = [float(v) for v in _as_list(self.omega)]
        self.qr_tol = [float(v) for v in _as_list(self.qr_tol)]
        for mm in self.m:
            if mm < 1 or 4 ** round(math.log(mm, 4)) != mm:
                raise ConfigError(f"m must be a power of 4, got {mm}")
        for name in ("eps_plus", "eps_minus", "n", "threads", "base_radius", "spacing",
                     "proxy_ratio", "proxy_min", "proxy_factor", "size_cap"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if any(not w > 0 for w in self.omega):
            raise ConfigError("omega must be positive")
        if any(not 0 < t < 1 for t in self.qr_tol):
            raise ConfigError("qr_tol values must lie in (0, 1)")
        if self.n % 2 or self.n < 16:
            raise ConfigError("n must be even and at least 16")
        if not self.formulation or not self.m or not self.omega or not self.qr_tol:
            raise ConfigError("formulation, m, omega and qr_tol need at least one value")
        # Geometry and compression settings are validated by their own types.
        self.curve()
        self.compression(self.qr_tol[0])
        return self

    def curve(self):
        return CurveSpec(base_radius=self.base_radius, lobe_amplitude=self.lobe_amplitude,
                         lobe_count=self.lobe_count)

    def compression(self, tol):
        return CompressionConfig(qr_tol=tol, proxy_ratio=self.proxy_ratio,
                                 proxy_min=int(self.proxy_min), proxy_factor=self.proxy_factor)

    def params(self, omega):
        return WaveParams(omega, self.eps_plus, self.eps_minus)


@dataclass
class ExperimentRow:
    """Outcome of one run; ``times`` and ``per_level`` go to JSON only."""

    command: str
    formulation: str
    mode: str
    m: int
    n: int
    omega: float
    eps_plus: float
    eps_minus: float
    qr_tol: float | None
    status: str = "ok"
    compressed_size: int | None = None
    compression_ratio: float | None = None
    rel_error_vs_dense: float | None = None
    rel_error_vs_oracle: float | None = None
    rel_error_vs_bm: float | None = None
    times: dict = field(default_factory=dict)
    per_level: list = field(default_factory=list)
    message: str = ""

    @property
    def N(self):
        return 2 * self.m * self.n

    def csv_cells(self):
        out = []
        for col in RESULT_COLUMNS:
            v = self.N if col == "N" else getattr(self, col)
            out.append(_fmt(v))
        return out

    def json_record(self):
        rec = dataclasses.asdict(self)
        rec["N"] = self.N
        return rec


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _as_list(v):
    if isinstance(v, (list, tuple)):
        return list(v)
    return [v]


# -- runners -----------------------------------------------------------------

def _layout(cfg, m, circle=False):
    """Grids of a run; ``circle`` replaces the star by a circle of radius ``R0``."""
    t0 = time.perf_counter()
    if circle:
        spec = CurveSpec(base_radius=cfg.base_radius, lobe_amplitude=0.0)
        grids = [make_star_curve(spec, cfg.n)]
    else:
        grids = grid_layout(m, cfg.spacing, cfg.curve(), cfg.n)
    return grids, time.perf_counter() - t0


def _run_dense(system, cap):
    rep = dense_solve(system, size_cap=cap)
    times = {"assembly": rep.assembly_time, "factor": rep.factor_time, "solve": rep.solve_time}
    return rep.solution, times, rep.residual


def _run_fds(system, tree, config):
    fact = fds_factor(system, tree, config)
    rep = fds_solve(fact, system.rhs())
    return rep


def _dump(cfg, row, phi):
    if not cfg.save_solutions:
        return
    name = f"{row.command}_{row.formulation}_m{row.m}_w{row.omega:g}_{row.mode}"
    if row.qr_tol is not None:
        name += f"_tol{row.qr_tol:g}"
    meta = {k: v for k, v in row.json_record().items() if k not in ("times", "per_level")}
    write_solution(os.path.join(cfg.out, name + ".bin"), phi, meta)


def _solve_grid(cfg, command, forms, m, omega, tols):
    """Run every formulation and tolerance on one layout; returns rows."""
    params = cfg.params(omega)
    grids, t_geom = _layout(cfg, m)
    tree = build_tree(grids)
    rows = []
    for form in forms:
        system = BlockSystem(grids, params, form)
        dense_phi = None
        base = dict(command=command, formulation=form, m=m, n=cfg.n, omega=omega,
                    eps_plus=cfg.eps_plus, eps_minus=cfg.eps_minus)
        if cfg.mode in ("dense", "both"):
            row = ExperimentRow(mode="dense", qr_tol=None, **base)
            try:
                dense_phi, times, res = _run_dense(system, cfg.size_cap)
                times["geometry"] = t_geom
                times["total"] = t_geom + sum(v for k, v in times.items() if k != "geometry")
                row.times = dict(times, residual=res)
                _dump(cfg, row, dense_phi)
            except SizeCapExceeded as exc:
                row.status, row.message = "skipped", str(exc)
            rows.append(row)
        if cfg.mode in ("fds", "both"):
            for tol in tols:
                row = ExperimentRow(mode="fds", qr_tol=tol, **base)
                t0 = time.perf_counter()
                rep = _run_fds(system, tree, cfg.compression(tol))
                row.compressed_size = rep.compressed_size
                row.per_level = rep.per_level
                times = dict(rep.times)
                times["geometry"] = t_geom
                times["total"] = t_geom + (time.perf_counter() - t0)
                row.times = times
                if dense_phi is not None:
                    row.rel_error_vs_dense = relative_error(rep.solution, dense_phi)
                _dump(cfg, row, rep.solution)
                rows.append(row)
    _fill_ratios(rows)
    return rows


def _fill_ratios(rows):
    """``compression_ratio`` = compressed size over that of Burton--Miller."""
    bm = {(r.m, r.omega, r.qr_tol): r.compressed_size for r in rows
          if r.formulation == "bm" and r.compressed_size}
    for r in rows:
        ref = bm.get((r.m, r.omega, r.qr_tol))
        if r.compressed_size is not None and ref:
            r.compression_ratio = r.compressed_size / ref


def cmd_verify(cfg):
    """Dense PMCHWT (omit) versus dense Burton--Miller, plus the Mie oracle for ``m = 1``.

    Returns
    -------
    rows : list of ExperimentRow
    extra : dict
        ``traces`` (rows of :data:`TRACE_COLUMNS`) and the error summary.
    """
    m = cfg.m[0]
    if len(cfg.m) != 1 or m not in (1, 16):
        raise ConfigError("verify runs a single m in {1, 16}")
    omega = cfg.omega[0]
    params = cfg.params(omega)
    grids, t_geom = _layout(cfg, m, circle=(m == 1))
    sols, rows = {}, {}
    for form in ("pmchwt-omit", "bm"):
        system = BlockSystem(grids, params, form)
        phi, times, res = _run_dense(system, cfg.size_cap)
        times["geometry"] = t_geom
        times["total"] = sum(times.values())
        row = ExperimentRow("verify", form, "dense", m, cfg.n, omega, cfg.eps_plus,
                            cfg.eps_minus, None, times=dict(times, residual=res))
        sols[form] = system.traces(phi)
        rows[form] = row
        _dump(cfg, row, phi)
    u_p, q_p = sols["pmchwt-omit"]
    u_b, q_b = sols["bm"]
    cross = relative_error(np.concatenate([u_p.ravel(), q_p.ravel()]),
                           np.concatenate([u_b.ravel(), q_b.ravel()]))
    rows["pmchwt-omit"].rel_error_vs_bm = cross
    rows["bm"].rel_error_vs_bm = 0.0
    oracle = None
    if m == 1:
        sol = mie_solve(cfg.base_radius, params)
        oracle = mie_trace(sol, grids[0])
        ref = np.concatenate(oracle)
        for form, (u, q) in sols.items():
            rows[form].rel_error_vs_oracle = relative_error(
                np.concatenate([u.ravel(), q.ravel()]), ref)
    traces = []
    for s, g in enumerate(grids):
        for l in range(g.n):
            rec = [s, l, float(g.nodes[l, 0]), float(g.nodes[l, 1]),
                   abs(u_p[s, l]), abs(q_p[s, l]), abs(u_b[s, l]), abs(q_b[s, l])]
            rec += [abs(oracle[0][l]), abs(oracle[1][l])] if oracle is not None else [None, None]
            traces.append(rec)
    summary = {"cross_formulation_error": cross,
               "oracle_error": {f: r.rel_error_vs_oracle for f, r in rows.items()}}
    return list(rows.values()), {"traces": traces, "summary": summary}


def cmd_scaling(cfg):
    """FDS runs over ``formulation x m x qr_tol`` at fixed ``omega``."""
    for mm in cfg.m:
        if mm not in (16, 64, 256):
            raise ConfigError(f"scaling supports m in {{16, 64, 256}}, got {mm}")
    rows = []
    for mm in cfg.m:
        for omega in cfg.omega:
            rows += _solve_grid(cfg, "scaling", cfg.formulation, mm, omega, cfg.qr_tol)
    return rows, {"speedup": _speedups(rows), "time_slope": _time_slopes(rows)}


def cmd_freq_sweep(cfg):
    """FDS runs over ``omega x formulation x qr_tol`` at fixed ``m``."""
    rows = []
    for mm in cfg.m:
        for omega in cfg.omega:
            rows += _solve_grid(cfg, "freq-sweep", cfg.formulation, mm, omega, cfg.qr_tol)
    return rows, {"size_slope": _size_slopes(rows), "speedup": _speedups(rows)}


def cmd_bm_singularity_demo(cfg):
    """Leaf condition estimates of the simplified Burton--Miller fixture.

    The projected matrix ``R A^{-1} L`` of every leaf is reported for the
    simplified fixture; full Burton--Miller and PMCHWT (omit) are then
    factored on the same layout. Succeeds when every simplified leaf
    exceeds ``1e10`` and both full factorizations complete.
    """
    m, omega, tol = cfg.m[0], cfg.omega[0], cfg.qr_tol[0]
    params = cfg.params(omega)
    grids, _ = _layout(cfg, m)
    tree = build_tree(grids)
    comp = cfg.compression(tol)
    simplified = BlockSystem(grids, params, "bm", offdiag=simplified_bm_rules(params))
    leaves = leaf_projections(simplified, tree, comp)
    conds = [f.cond for f in leaves]
    rows = []
    base = dict(command="bm-singularity-demo", mode="fds", m=m, n=cfg.n, omega=omega,
                eps_plus=cfg.eps_plus, eps_minus=cfg.eps_minus, qr_tol=tol)
    singular_row = ExperimentRow(formulation="bm-simplified", **base)
    singular_row.status = "singular" if all(c > 1e10 for c in conds) else "regular"
    rows.append(singular_row)
    full = {}
    for form in ("bm", "pmchwt-omit"):
        row = ExperimentRow(formulation=form, **base)
        try:
            fact = fds_factor(BlockSystem(grids, params, form), tree, comp)
            row.compressed_size = fact.compressed_size
            row.per_level = fact.per_level()
            full[form] = max(f.cond for lev in fact.levels for f in lev)
        except SingularProjection as exc:
            row.status, row.message = "singular", str(exc)
        rows.append(row)
    ok = singular_row.status == "singular" and all(r.status == "ok" for r in rows[1:])
    lines = [f"simplified Burton-Miller, m={m}, omega={omega:g}, qr_tol={tol:g}"]
    lines += [f"  leaf {i:3d}: cond(R A^-1 L) = {c:.3e}" for i, c in enumerate(conds)]
    lines.append(f"  min over leaves: {min(conds):.3e} (threshold 1e10)")
    for form in ("bm", "pmchwt-omit"):
        if form in full:
            lines.append(f"{form}: factored, max cond(R A^-1 L) = {full[form]:.3e}")
        else:
            lines.append(f"{form}: FAILED")
    lines.append("demonstration " + ("succeeded" if ok else "failed"))
    return rows, {"leaf_conditions": conds, "full_max_condition": full, "ok": ok,
                  "text": "\n".join(lines)}


def _loglog_slope(x, y):
    x, y = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(x, y, 1)[0])


def _speedups(rows):
    """``time(other) / time(pmchwt-omit)`` per ``(m, omega, qr_tol)``."""
    fds = [r for r in rows if r.mode == "fds" and r.status == "ok"]
    omit = {(r.m, r.omega, r.qr_tol): r.times["total"] for r in fds if r.formulation == "pmchwt-omit"}
    out = []
    for r in fds:
        key = (r.m, r.omega, r.qr_tol)
        if r.formulation != "pmchwt-omit" and key in omit:
            out.append({"m": r.m, "omega": r.omega, "qr_tol": r.qr_tol,
                        "formulation": r.formulation, "ratio": r.times["total"] / omit[key]})
    return out


def _time_slopes(rows):
    out = []
    groups = {}
    for r in rows:
        if r.mode == "fds" and r.status == "ok":
            groups.setdefault((r.formulation, r.omega, r.qr_tol), []).append(r)
    for (form, omega, tol), rs in sorted(groups.items(), key=lambda kv: str(kv[0])):
        if len({r.m for r in rs}) >= 2:
            out.append({"formulation": form, "omega": omega, "qr_tol": tol,
                        "slope": _loglog_slope([r.N for r in rs], [r.times["total"] for r in rs])})
    return out


def _size_slopes(rows):
    out = []
    groups = {}
    for r in rows:
        if r.mode == "fds" and r.status == "ok":
            groups.setdefault((r.formulation, r.m, r.qr_tol), []).append(r)
    for (form, m, tol), rs in sorted(groups.items(), key=lambda kv: str(kv[0])):
        rs = sorted(rs, key=lambda r: r.omega)
        if len(rs) >= 2:
            sizes = [r.compressed_size for r in rs]
            out.append({"formulation": form, "m": m, "qr_tol": tol,
                        "omega": [r.omega for r in rs], "sizes": sizes,
                        "monotone": bool(all(a <= b for a, b in zip(sizes, sizes[1:]))),
                        "slope": _loglog_slope([r.omega for r in rs], sizes)})
    return out


# -- output -----------------------------------------------------------------

def write_results_csv(path, rows):
    """Write :data:`RESULT_COLUMNS` rows."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for r in rows:
            w.writerow(r.csv_cells())


def write_trace_csv(path, traces):
    """Write boundary traces (:data:`TRACE_COLUMNS`)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for rec in traces:
            w.writerow([_fmt(v) for v in rec])


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_report_json(path, command, cfg, rows, extra, started, wall):
    report = {"command": command, "config": dataclasses.asdict(cfg), "started_at": started,
              "wall_time_s": wall, "runs": [r.json_record() for r in rows]}
    report.update({k: v for k, v in extra.items() if k != "traces"})
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, default=_json_default)


# -- argument handling ----------------------------------------------------------

def _list_of(conv):
    def parse(text):
        try:
            return [conv(t) for t in str(text).split(",") if t.strip()]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc
    return parse


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage errors with exit code 2 via :class:`ConfigError`."""

    def error(self, message):
        raise ConfigError(message)


def build_parser():
    parser = _Parser(prog="helmfds", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "verify": "dense PMCHWT vs Burton-Miller (and the Mie series for m=1)",
        "scaling": "FDS size and time over m and qr_tol",
        "freq-sweep": "FDS size and time over omega",
        "bm-singularity-demo": "condition of R A^-1 L for the simplified Burton-Miller system",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--config", help="flat JSON file of ExperimentConfig fields")
        p.add_argument("--formulation", type=_list_of(str),
                       help="comma list of pmchwt-omit, pmchwt-all, bm")
        p.add_argument("--mode", choices=_MODES)
        p.add_argument("--omega", type=_list_of(float), help="comma list of angular frequencies")
        p.add_argument("--eps-plus", dest="eps_plus", type=float)
        p.add_argument("--eps-minus", dest="eps_minus", type=float)
        p.add_argument("--qr-tol", dest="qr_tol", type=_list_of(float),
                       help="comma list of QR thresholds")
        p.add_argument("--m", type=_list_of(int), help="comma list of inclusion counts")
        p.add_argument("--n", type=int, help="nodes per inclusion")
        p.add_argument("--threads", type=int, help="BLAS threads (1 = deterministic)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--proxy-ratio", dest="proxy_ratio", type=float)
        p.add_argument("--proxy-min", dest="proxy_min", type=int)
        p.add_argument("--proxy-factor", dest="proxy_factor", type=float)
        p.add_argument("--size-cap", dest="size_cap", type=int)
        p.add_argument("--save-solutions", dest="save_solutions", action="store_true",
                       default=None)
    return parser


def load_config(command, args):
    """Merge command defaults, the JSON file and explicit flags (in that order)."""
    values = dict(_COMMAND_DEFAULTS.get(command, {}))
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        known = {f.name for f in dataclasses.fields(ExperimentConfig)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        values.update(data)
    for f in dataclasses.fields(ExperimentConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    try:
        cfg = ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


_COMMANDS = {
    "verify": cmd_verify,
    "scaling": cmd_scaling,
    "freq-sweep": cmd_freq_sweep,
    "bm-singularity-demo": cmd_bm_singularity_demo,
}


def main(argv=None):
    """Entry point of the ``helmfds`` command; returns the exit code."""
    try:
        args = build_parser().parse_args(argv)
        cfg = load_config(args.command, args)
    except ConfigError as exc:
        print(f"helmfds: configuration error: {exc}", file=sys.stderr)
        return 2
    started = datetime.datetime.now(datetime.timezone.utc).isoformat()
    t0 = time.perf_counter()
    try:
        os.makedirs(cfg.out, exist_ok=True)
        with threadpool_limits(limits=cfg.threads):
            rows, extra = _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"helmfds: configuration error: {exc}", file=sys.stderr)
        return 2
    except SingularProjection as exc:
        print(f"helmfds: numerical failure in skeleton, cell {exc.cell}: {exc}", file=sys.stderr)
        return 3
    except (HelmFdsError, ArithmeticError, np.linalg.LinAlgError) as exc:
        module = type(exc).__module__.rsplit(".", 1)[-1]
        print(f"helmfds: numerical failure ({module}.{type(exc).__name__}): {exc}",
              file=sys.stderr)
        return 3
    write_results_csv(os.path.join(cfg.out, "results.csv"), rows)
    if "traces" in extra:
        write_trace_csv(os.path.join(cfg.out, "traces.csv"), extra["traces"])
    write_report_json(os.path.join(cfg.out, "report.json"), args.command, cfg, rows, extra,
                      started, time.perf_counter() - t0)
    for r in rows:
        print(" ".join(f"{k}={v}" for k, v in zip(RESULT_COLUMNS, r.csv_cells()) if v != ""))
    if "text" in extra:
        print(extra["text"])
    if extra.get("ok") is False:
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
