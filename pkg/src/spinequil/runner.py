"""Sweep orchestration and CSV output for the command-line tools.

Every ``run_*`` function takes a validated :class:`~spinequil.config.SweepConfig`,
writes plot-ready CSV files into ``config.out_dir`` and returns a
:class:`RunResult`. Work is grouped by chain length so each Hamiltonian is
diagonalized once; groups may run on a thread pool but rows are always
emitted in (n, k, case, direction) order.
"""

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis
from .cache import SpectrumCache
from .errors import InsufficientDataError, NeverCrossedError, NoDynamicsError, ResourceLimitError
from .hamiltonian import check_dimension
from .observables import build_magnetization, expand_in_energy_basis, to_energy_basis
from .states import CoarseGrainedSpec, build_initial_state

logger = logging.getLogger(__name__)

# Point-level failures that are logged and skipped rather than fatal.
SKIPPABLE = (ResourceLimitError, NoDynamicsError, NeverCrossedError)

COLUMN_DOCS = {
    "n": "number of spins",
    "D": "Hilbert-space dimension 2**n",
    "k": "flip count of the coarse-grained initial state",
    "case": "a = exactly k flips, b = at most k flips",
    "direction": "quantization axis of the initial state",
    "d_eff": "effective dimension 1/sum_k |c_k|^4",
    "fit_id": "row id in deff_fits.csv (empty when the curve has < 3 points)",
    "a": "fitted exponent of d_eff = b * D**a",
    "b": "fitted prefactor of d_eff = b * D**a",
    "residual": "rms misfit of the log-log fit",
    "point_count": "points used in the fit",
    "bin_lo": "lower bin edge (energy units)",
    "bin_hi": "upper bin edge (energy units)",
    "weight": "LDOS weight sum |c_k|^2 over eigenvalues in the bin",
    "count": "number of eigenvalues in the bin",
    "t": "time",
    "re_g": "real part of g(t) = (M_z(t) - Mbar)/(2n)",
    "im_g": "imaginary part of g(t) (numerical residue)",
    "abs2_g": "|g(t)|^2",
    "T_eq": "dephasing estimate pi/sqrt(sum_a q_a G_a^2)",
    "first_decay_time": "first time |g|^2 <= threshold * |g(0)|^2",
    "ldos_mean": "LDOS weighted mean energy",
    "ldos_std": "LDOS weighted standard deviation",
    "time_average_abs2": "mean of |g|^2 over the evolution window",
    "bound_lhs": "sampled time average of (M_z(t) - Mbar)^2; empty above bound_n_max",
    "bound_rhs": "||M_z||^2 / d_eff",
    "bound_literal": "||M_z|| / d_eff",
}


@dataclass
class RunResult:
    files: list = field(default_factory=list)
    requested: int = 0
    completed: int = 0
    skipped: list = field(default_factory=list)
    failed: list = field(default_factory=list)

    @property
    def exit_code(self):
        return 0 if not self.failed else 1


def format_value(value):
    """Shortest round-trip text for numbers; strings pass through."""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"refusing to write non-finite value {value!r}")
    return repr(value)


def write_csv(path, columns, rows, title):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# {title}\n")
        for col in columns:
            fh.write(f"# {col}: {COLUMN_DOCS.get(col, '')}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row[c]) for c in columns])
    return path


def read_csv(path):
    """Read a CSV written by :func:`write_csv` into a list of dicts (strings)."""
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(lines))


class _Context:
    """Per-run memo of spectra and energy-basis magnetization."""

    def __init__(self, config, cache=None):
        self.config = config
        self.cache = cache if cache is not None else SpectrumCache(dim_cap=config.dim_cap)
        self._mz = {}

    def spectrum(self, n):
        check_dimension(n, self.config.dim_cap)
        return self.cache.get(self.config.hamiltonian(n))

    def mz_energy(self, n):
        if n not in self._mz:
            M = build_magnetization(n, dim_cap=self.config.dim_cap)
            self._mz[n] = to_energy_basis(M, self.spectrum(n))
        return self._mz[n]

    def coefficients(self, spec):
        psi = build_initial_state(spec, dim_cap=self.config.dim_cap)
        return expand_in_energy_basis(psi, self.spectrum(spec.n))


def _points(config, n, scaling):
    for k in sorted(config.k_values):
        if k > n or (scaling and not n > 2 * k):
            continue
        for case in config.case_list:
            for direction in config.direction_list:
                yield CoarseGrainedSpec(n, k, case, direction)


def _map_by_n(config, ns, task):
    if config.threads > 1 and len(ns) > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            return list(pool.map(task, ns))
    return [task(n) for n in ns]


def _tag(spec):
    return f"n{spec.n}_k{spec.k}_{spec.case.value}_{spec.direction.label}"


def _record(result, outcomes):
    rows = []
    for kind, payload in outcomes:
        result.requested += 1
        if kind == "ok":
            result.completed += 1
            rows.append(payload)
        elif kind == "skip":
            result.skipped.append(payload)
            logger.warning("skipped %s: %s", *payload)
        else:
            result.failed.append(payload)
            logger.error("failed %s: %s", *payload)
    return rows


def _guard(label, fn):
    try:
        return ("ok", fn())
    except SKIPPABLE as exc:
        return ("skip", (label, str(exc)))
    except Exception as exc:  # noqa: BLE001 - reported per point
        return ("fail", (label, f"{type(exc).__name__}: {exc}"))


def _per_n(ctx, n, scaling, make_row):
    specs = list(_points(ctx.config, n, scaling))
    if not specs:
        return []
    try:
        ctx.spectrum(n)
    except SKIPPABLE as exc:
        return [("skip", (_tag(s), str(exc))) for s in specs]
    return [_guard(_tag(s), lambda s=s: make_row(s)) for s in specs]


def run_deff_sweep(config, cache=None):
    """Effective dimension versus D plus power-law fits per curve."""
    ctx = _Context(config, cache)
    out = Path(config.out_dir)
    result = RunResult()

    def row(spec):
        c = ctx.coefficients(spec)
        return {
            "n": spec.n, "D": 2 ** spec.n, "k": spec.k, "case": spec.case.value,
            "direction": spec.direction.label, "d_eff": analysis.effective_dimension(c),
        }

    per_n = _map_by_n(config, config.n_values, lambda n: _per_n(ctx, n, True, row))
    rows = _record(result, [o for group in per_n for o in group])

    fits = []
    curve_ids = {}
    for k in sorted(config.k_values):
        for case in config.case_list:
            for direction in config.direction_list:
                curve = [r for r in rows if r["k"] == k and r["case"] == case.value
                         and r["direction"] == direction.label]
                fit_id = f"k{k}_{case.value}_{direction.label}"
                if len(curve) < 3:
                    if curve:
                        logger.info("curve %s has %d point(s); not fitted", fit_id, len(curve))
                    continue
                try:
                    fit = analysis.fit_power_law([(r["D"], r["d_eff"]) for r in curve])
                except InsufficientDataError:
                    if curve:
                        logger.info("curve %s has %d point(s); not fitted", fit_id, len(curve))
                    continue
                curve_ids[(k, case.value, direction.label)] = fit_id
                fits.append({
                    "fit_id": fit_id, "k": k, "case": case.value, "direction": direction.label,
                    "a": fit.a, "b": fit.b, "residual": fit.residual, "point_count": fit.point_count,
                })
    for r in rows:
        r["fit_id"] = curve_ids.get((r["k"], r["case"], r["direction"]), "")

    result.files.append(write_csv(
        out / "deff.csv", ["n", "D", "k", "case", "direction", "d_eff", "fit_id"], rows,
        "effective dimension of k-flipped initial states"))
    result.files.append(write_csv(
        out / "deff_fits.csv",
        ["fit_id", "k", "case", "direction", "a", "b", "residual", "point_count"], fits,
        "log-log least-squares fits d_eff = b * D**a"))
    return result


def run_ldos(config, cache=None):
    """LDOS histograms at ``ldos_n`` (default ``n_max``) plus the DOS."""
    ctx = _Context(config, cache)
    out = Path(config.out_dir)
    result = RunResult()
    n = config.ldos_n or config.n_max
    cols = ["bin_lo", "bin_hi", "weight"]

    def hist_rows(edges, values, key):
        return [{"bin_lo": edges[i], "bin_hi": edges[i + 1], key: values[i]} for i in range(values.size)]

    def one(spec):
        c = ctx.coefficients(spec)
        h = analysis.ldos(c, ctx.spectrum(n))
        path = write_csv(out / f"ldos_{_tag(spec)}.csv", cols, hist_rows(h.bin_edges, h.weights, "weight"),
                         f"LDOS for {_tag(spec)}")
        return {"path": path, "n": n, "D": 2 ** n, "k": spec.k, "case": spec.case.value,
                "direction": spec.direction.label, "ldos_mean": h.mean, "ldos_std": h.std,
                "d_eff": analysis.effective_dimension(c)}

    rows = _record(result, _per_n(ctx, n, False, one))
    result.files.extend(r["path"] for r in rows)
    result.files.append(write_csv(
        out / f"ldos_summary_n{n}.csv",
        ["n", "D", "k", "case", "direction", "ldos_mean", "ldos_std", "d_eff"], rows,
        "LDOS moments per initial state"))
    try:
        dos = analysis.dos_histogram(ctx.spectrum(n))
    except ResourceLimitError as exc:
        logger.warning("DOS for n=%d skipped: %s", n, exc)
    else:
        result.files.append(write_csv(
            out / f"dos_n{n}.csv", ["bin_lo", "bin_hi", "count"],
            hist_rows(dos.bin_edges, dos.counts, "count"), f"density of states for n={n}"))
    return result


def run_evolution(config, cache=None):
    """Time series of the relative fluctuation at ``evolve_n`` (default ``n_max``)."""
    ctx = _Context(config, cache)
    out = Path(config.out_dir)
    result = RunResult()
    n = config.evolve_n or config.n_max
    times = np.linspace(0.0, config.t_max, config.n_times)

    def one(spec):
        c = ctx.coefficients(spec)
        sig = analysis.time_signal(c, ctx.mz_energy(n), ctx.spectrum(n), times, dim_cap=config.dim_cap)
        rows = [{"t": t, "re_g": g.real, "im_g": g.imag, "abs2_g": a}
                for t, g, a in zip(sig.times, sig.values, sig.abs2)]
        return write_csv(out / f"evolve_{_tag(spec)}.csv", ["t", "re_g", "im_g", "abs2_g"], rows,
                         f"relative fluctuation g(t) for {_tag(spec)}")

    result.files.extend(_record(result, _per_n(ctx, n, False, one)))
    return result


def run_teq(config, cache=None):
    """Equilibration-time estimate and first decay time versus n."""
    ctx = _Context(config, cache)
    out = Path(config.out_dir)
    result = RunResult()
    times = np.linspace(0.0, config.t_max, config.n_times)
    bound_times = np.linspace(0.0, config.bound_t_max, config.bound_n_times) if config.bound_check else None

    def row(spec):
        check = bound_times is not None and (config.bound_n_max is None or spec.n <= config.bound_n_max)
        rep = analysis.analyze_state(
            spec, ctx.spectrum(spec.n), ctx.mz_energy(spec.n), times,
            threshold_fraction=config.decay_threshold, bound_times=bound_times if check else None,
            dim_cap=config.dim_cap)
        if rep.degenerate_levels:
            logger.warning("%s: %d near-degenerate level pair(s); diagonal ensemble may be biased",
                           _tag(spec), rep.degenerate_levels)
        r = {"n": rep.n, "D": 2 ** rep.n, "k": rep.k, "case": rep.case, "direction": rep.direction,
             "d_eff": rep.d_eff, "T_eq": rep.T_eq, "first_decay_time": rep.first_decay_time,
             "ldos_mean": rep.ldos_mean, "ldos_std": rep.ldos_std,
             "time_average_abs2": rep.time_average_abs2}
        if rep.bound is not None:
            r.update(bound_lhs=rep.bound.lhs, bound_rhs=rep.bound.bound_squared,
                     bound_literal=rep.bound.bound_literal)
        elif bound_times is not None:
            # above bound_n_max: columns present, cells left empty
            r.update(bound_lhs="", bound_rhs="", bound_literal="")
        return r

    per_n = _map_by_n(config, config.n_values, lambda n: _per_n(ctx, n, False, row))
    rows = _record(result, [o for group in per_n for o in group])
    cols = ["n", "D", "k", "case", "direction", "T_eq", "first_decay_time", "d_eff",
            "ldos_mean", "ldos_std", "time_average_abs2"]
    if config.bound_check:
        cols += ["bound_lhs", "bound_rhs", "bound_literal"]
    result.files.append(write_csv(out / "teq.csv", cols, rows, "equilibration times"))
    return result
