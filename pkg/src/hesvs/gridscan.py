"""Parameter sweeps, phase-space grids and the analytic-versus-oracle validation run.

Every evaluator returns a :class:`Table`, which serialises to CSV or JSON.
Points are evaluated independently (optionally on a thread pool sized by the
``HESVS_THREADS`` environment variable) and always assembled in input order,
so output is byte-identical regardless of concurrency.
"""
import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import analytic, oracle, published
from .exceptions import ParameterError, UndefinedQError, ZeroProbabilityError
from .params import ModelParams, derive

DEFAULT_WINDOW = (-10.0, 10.0)
DEFAULT_POINTS = 201

SWEEP_OBSERVABLES = ("p_event", "mean_n", "mandel_q")
GRID_OBSERVABLES = ("wigner", "husimi", "qcd")

VALIDATION_THETAS = (math.pi / 7, math.pi / 5, 2 * math.pi / 7, 3 * math.pi / 7)
VALIDATION_RS = (0.3, 0.5, 1.0)
VALIDATION_MS = (0, 1, 2, 3, 4)

# pointwise phase-space comparisons need amplitude-level (not weight-level)
# convergence of the oracle's Schmidt sum
VALIDATION_POLICY = oracle.TruncationPolicy(tail_tolerance=1e-32)


def thread_count():
    raw = os.environ.get("HESVS_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ParameterError("HESVS_THREADS", raw, "must be a positive integer") from None
    if n < 1:
        raise ParameterError("HESVS_THREADS", raw, "must be a positive integer")
    return n


def _ordered_map(fn, items):
    items = list(items)
    workers = thread_count()
    if workers == 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _format_value(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value)) if math.isfinite(value) else ""
    return str(value)


def _json_value(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    return value


@dataclass
class Table:
    """Rows of named columns plus provenance metadata."""

    columns: list
    rows: list
    metadata: dict = field(default_factory=dict)

    def column(self, name):
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_format_value(v) for v in row])
        return buf.getvalue()

    def to_json(self):
        payload = {
            "metadata": {k: _json_value(v) for k, v in self.metadata.items()},
            "columns": list(self.columns),
            "rows": [[_json_value(v) for v in row] for row in self.rows],
        }
        return json.dumps(payload, indent=1, allow_nan=False) + "\n"

    def render(self, fmt):
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ParameterError("format", fmt, "expected 'csv' or 'json'")


@dataclass(frozen=True)
class SweepSpec:
    """One-dimensional sweep of ``variable`` over [lo, hi] with the other knob fixed."""

    variable: str
    lo: float
    hi: float
    points: int
    fixed: float
    m_list: tuple = (1, 2, 3, 4)

    def __post_init__(self):
        if self.variable not in ("r", "theta"):
            raise ParameterError("variable", self.variable, "expected 'r' or 'theta'")
        if not self.lo < self.hi:
            raise ParameterError("range", (self.lo, self.hi), "need lo < hi")
        if self.points < 2:
            raise ParameterError("points", self.points, "need at least 2 points")
        if self.variable == "theta" and (self.lo < 0 or self.hi > math.pi / 2):
            raise ParameterError("range", (self.lo, self.hi), "theta must stay within [0, pi/2]")
        if self.variable == "r" and self.lo < 0:
            raise ParameterError("range", (self.lo, self.hi), "r must be non-negative")
        if not self.m_list:
            raise ParameterError("m_list", self.m_list, "need at least one m")
        # validates the fixed knob and every m
        for m in self.m_list:
            if self.variable == "r":
                ModelParams(self.fixed, self.lo, m)
            else:
                ModelParams(self.lo, self.fixed, m)

    def values(self):
        return np.linspace(self.lo, self.hi, self.points)

    def model(self, value, m):
        if self.variable == "r":
            return ModelParams(self.fixed, float(value), m)
        return ModelParams(float(value), self.fixed, m)


@dataclass(frozen=True)
class GridSpec:
    """Rectangular evaluation grid; for ``qcd`` the second axis is the phase phi."""

    observable: str
    x_range: tuple = DEFAULT_WINDOW
    y_range: tuple = DEFAULT_WINDOW
    nx: int = DEFAULT_POINTS
    ny: int = DEFAULT_POINTS
    measure: str = "xp"

    def __post_init__(self):
        if self.observable not in GRID_OBSERVABLES:
            raise ParameterError("observable", self.observable, f"expected one of {GRID_OBSERVABLES}")
        if self.nx < 2 or self.ny < 2:
            raise ParameterError("nx, ny", (self.nx, self.ny), "need at least 2 points per axis")
        for name, (lo, hi) in (("x_range", self.x_range), ("y_range", self.y_range)):
            if not lo < hi:
                raise ParameterError(name, (lo, hi), "need lo < hi")
        if self.measure not in ("xp", "alpha"):
            raise ParameterError("measure", self.measure, "expected 'xp' or 'alpha'")

    def axes(self):
        return np.linspace(*self.x_range, self.nx), np.linspace(*self.y_range, self.ny)


def _observable(params, observable):
    d = derive(params)
    if observable == "p_event":
        return analytic.event_probability(d, params.r, params.m)
    if observable == "mean_n":
        return analytic.mean_photon(d, params.r, params.m)
    if observable == "mandel_q":
        return analytic.mandel_q(d, params.r, params.m)
    raise ParameterError("observable", observable, f"expected one of {SWEEP_OBSERVABLES}")


def _nullable(params, observable):
    try:
        return _observable(params, observable)
    except (ZeroProbabilityError, UndefinedQError):
        return None


def sweep(spec, observable):
    """Observable against the swept knob, one row per (value, m); nulls for impossible events."""
    if observable not in SWEEP_OBSERVABLES:
        raise ParameterError("observable", observable, f"expected one of {SWEEP_OBSERVABLES}")
    jobs = [(float(v), m) for m in spec.m_list for v in spec.values()]
    values = _ordered_map(lambda job: _nullable(spec.model(*job), observable), jobs)
    rows = [(v, m, val) for (v, m), val in zip(jobs, values)]
    meta = {
        "kind": "sweep",
        "observable": observable,
        "variable": spec.variable,
        "lo": spec.lo,
        "hi": spec.hi,
        "points": spec.points,
        "fixed_" + ("theta" if spec.variable == "r" else "r"): spec.fixed,
        "m_list": ",".join(str(m) for m in spec.m_list),
    }
    return Table([spec.variable, "m", observable], rows, meta)


def grid(spec, p):
    """Dense (x, y, value) table, row-major with x varying fastest."""
    if not isinstance(p, ModelParams):
        p = ModelParams(*p)
    d = derive(p)
    norm = analytic.event_probability(d, p.r, p.m)
    xs, ys = spec.axes()

    def row(y):
        if spec.observable == "qcd":
            return analytic.qcd(d, p.r, p.m, xs, y, norm=norm)
        fn = analytic.wigner if spec.observable == "wigner" else analytic.husimi
        return fn(d, p.r, p.m, xs, np.full_like(xs, y), measure=spec.measure, norm=norm)

    values = _ordered_map(row, ys)
    rows = [(float(x), float(y), float(v)) for y, vals in zip(ys, values) for x, v in zip(xs, vals)]
    meta = {
        "kind": "grid",
        "observable": spec.observable,
        "theta": p.theta,
        "r": p.r,
        "m": p.m,
        "x_lo": spec.x_range[0],
        "x_hi": spec.x_range[1],
        "nx": spec.nx,
        "y_lo": spec.y_range[0],
        "y_hi": spec.y_range[1],
        "ny": spec.ny,
        "measure": spec.measure if spec.observable != "qcd" else None,
    }
    return Table(["x", "phi" if spec.observable == "qcd" else "p", spec.observable], rows, meta)


def q_region_map(theta_points, r_points, m):
    """Mandel Q on the (theta, r) plane for external contouring; nulls where undefined."""
    thetas = [float(t) for t in theta_points]
    rs = [float(r) for r in r_points]
    jobs = [(t, r) for r in rs for t in thetas]
    values = _ordered_map(lambda job: _nullable(ModelParams(job[0], job[1], m), "mandel_q"), jobs)
    rows = [(t, r, m, q) for (t, r), q in zip(jobs, values)]
    meta = {"kind": "qmap", "m": m, "n_theta": len(thetas), "n_r": len(rs)}
    return Table(["theta", "r", "m", "mandel_q"], rows, meta)


# --- validation -----------------------------------------------------------------


@dataclass
class CheckResult:
    name: str
    max_abs_error: float
    max_rel_error: float
    tolerance: str
    passed: bool
    count: int = 0


@dataclass
class Finding:
    """A printed statement measured against the oracle."""

    name: str
    statement: str
    max_deviation: float
    discrepancy: bool


@dataclass
class ValidationReport:
    checks: list
    findings: list
    grid: dict

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failed(self):
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self):
        return {
            "passed": self.passed,
            "grid": self.grid,
            "checks": [{k: _json_value(v) for k, v in asdict(c).items()} for c in self.checks],
            "findings": [{k: _json_value(v) for k, v in asdict(f).items()} for f in self.findings],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=1, allow_nan=False) + "\n"


class _Comparison:
    """Accumulates mixed relative/absolute errors for one named check."""

    def __init__(self, name, rel_tol, abs_tol, floor):
        self.name = name
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol
        self.floor = floor
        self.max_abs = 0.0
        self.max_rel = 0.0
        self.passed = True
        self.count = 0

    def add(self, value, reference):
        value = np.atleast_1d(np.asarray(value, dtype=float))
        reference = np.broadcast_to(np.asarray(reference, dtype=float), value.shape)
        err = np.abs(value - reference)
        if not np.all(np.isfinite(err)):
            self.passed = False
            self.max_abs = math.inf
            return
        big = (np.abs(reference) >= self.floor) & (reference != 0)
        self.count += err.size
        self.max_abs = max(self.max_abs, float(err.max()))
        if np.any(big):
            rel = err[big] / np.abs(reference[big])
            self.max_rel = max(self.max_rel, float(rel.max()))
            if rel.max() > self.rel_tol:
                self.passed = False
        if np.any(~big) and err[~big].max() > self.abs_tol:
            self.passed = False

    def result(self):
        tol = f"rel {self.rel_tol:g} (abs {self.abs_tol:g} below {self.floor:g})"
        return CheckResult(self.name, self.max_abs, self.max_rel, tol, self.passed, self.count)


def _perturbed(d, perturb):
    if not perturb:
        return d
    changes = {}
    for name, eps in perturb.items():
        if not hasattr(d, name):
            raise ParameterError("perturb", name, "not a derived parameter")
        changes[name] = getattr(d, name) * (1.0 + eps)
    return replace(d, **changes)


def peak_positions(theta, m_list=(1, 2, 3, 4), r_max=3.0, points=300):
    """r-argmax of p(m) on the grid r_i = r_max * i / points, i = 1..points."""
    rs = r_max * np.arange(1, points + 1) / points
    out = []
    for m in m_list:
        probs = [analytic.event_probability(derive(ModelParams(theta, r, m)), r, m) for r in rs]
        out.append(float(rs[int(np.argmax(probs))]))
    return out


def _shape_findings(policy):
    # qualitative claims about curves, measured on the oracle / closed forms
    means = [oracle.oracle_mean(oracle.conditional_amplitudes(ModelParams(math.pi / 5, 1.5, m), policy)[0])
             for m in (1, 2, 3, 4)]
    drops = [a - b for a, b in zip(means, means[1:])]
    out = [Finding("mean_photon_increasing_in_m", "<n> increases with m at theta = pi/5, r = 1.5",
                   max(0.0, max(drops)), any(d >= 0 for d in drops))]
    for label, theta in (("pi7", math.pi / 7), ("2pi7", 2 * math.pi / 7)):
        peaks = peak_positions(theta)
        steps = [b - a for a, b in zip(peaks, peaks[1:])]
        out.append(Finding(f"probability_peak_order_{label}",
                           f"r-argmax of p(m) strictly increases with m = 1..4 at theta = {label.replace('pi', 'pi/')}",
                           max(0.0, -min(steps)), any(s <= 0 for s in steps)))
    return out


def validate(
    thetas=VALIDATION_THETAS,
    rs=VALIDATION_RS,
    ms=VALIDATION_MS,
    *,
    rel_tol=1e-8,
    abs_tol=1e-10,
    floor=1e-6,
    n_photons=40,
    grid_points=41,
    window=DEFAULT_WINDOW,
    perturb=None,
    policy=VALIDATION_POLICY,
):
    """Compare every closed form with the oracle over a parameter grid.

    ``perturb`` maps derived-parameter names to relative offsets applied to the
    closed forms only (the oracle never sees them); it exists to prove the
    checks can fail.
    """
    names = ["p_event", "pnd", "mean_n", "mandel_q", "qcd", "wigner", "husimi"]
    cmp = {n: _Comparison(n, rel_tol, abs_tol, floor) for n in names}
    cmp["legendre_path"] = _Comparison("legendre_path", 1e-10, 0.0, 0.0)
    cmp["legendre_branch"] = _Comparison("legendre_branch", 1e-12, 0.0, 0.0)
    cmp["parity"] = _Comparison("parity", 0.0, 1e-14, math.inf)
    cmp["pnd_normalization"] = _Comparison("pnd_normalization", 0.0, 1e-10, math.inf)
    cmp["diagonal_moments"] = _Comparison("diagonal_moments", 1e-9, abs_tol, floor)
    cmp["wigner_marginal"] = _Comparison("wigner_marginal", 0.0, 1e-6, math.inf)

    printed = {
        "legendre_sign": [0.0, "p(m) = (-sqrt B3)^m P_m(sqrt B4)/(cosh^2 r sqrt A), principal roots"],
        "wigner_sum_sign": [0.0, "Wigner sum terms (-B1/2)^(m-l) |H_(m-l)(-R/sqrt(2 B1))|^2"],
        "wigner_m0_orientation": [0.0, "W(x,p|0) = exp(-p^2 e^(-2 lam) - x^2 e^(2 lam))/pi"],
        "wigner_normalization": [0.0, "W(0,0|m) = (2/pi)(-1)^m alongside the m=0 form with 1/pi"],
        "mean_photon_m0": [0.0, "<n> = sinh^2 r when m = 0"],
        "mandel_q_nonnegative": [0.0, "Q >= 0 with equality for the Fock state"],
        "symmetric_b1": [0.0, "B1 = -tanh(r)/2 at theta = pi/4"],
        "omega_m": [0.0, "|Psi_m> = Omega_m^(1/2) H_m(nu a+/sqrt(2 mu)) S(lam)|0>"],
    }

    def note(name, dev):
        printed[name][0] = max(printed[name][0], float(dev))

    lo, hi = window
    axis = np.linspace(lo, hi, grid_points)
    X, P = np.meshgrid(axis, axis)
    qx = np.linspace(-6.0, 6.0, 101)
    mx = np.linspace(-3.0, 3.0, 13)
    mp_axis = np.linspace(-6.0, 6.0, 201)
    min_q = math.inf

    for theta in thetas:
        for r in rs:
            for m in ms:
                params = ModelParams(theta, r, m)
                d_true = derive(params)
                try:
                    state, p_o = oracle.conditional_amplitudes(params, policy)
                except ZeroProbabilityError:
                    continue
                d = _perturbed(d_true, perturb)
                norm = analytic.event_probability(d, r, m)
                cmp["p_event"].add(norm, p_o)
                if abs(d.B3) >= 1e-6:
                    leg = analytic.event_probability(d, r, m, path="legendre")
                    cmp["legendre_path"].add(leg, norm)
                    cmp["legendre_branch"].add(analytic.event_probability(d, r, m, path="legendre", branch=-1), leg)
                    if d_true.B4_defined:
                        note("legendre_sign", abs(published.legendre_probability(d_true, r, m) - p_o) / p_o)

                probs_o = oracle.oracle_pnd(state)
                amps = analytic.fock_amplitudes(d, r, m, max(n_photons, state.n_max), norm=norm)
                probs_a = amps ** 2
                ref = np.zeros(n_photons + 1)
                head = probs_o[: n_photons + 1]
                ref[: len(head)] = head
                cmp["pnd"].add(probs_a[: n_photons + 1], ref)
                cmp["parity"].add(probs_a[(m + 1) % 2 :: 2], 0.0)
                cmp["parity"].add(probs_o[(m + 1) % 2 :: 2], 0.0)
                cmp["pnd_normalization"].add(probs_a.sum(), 1.0)

                n = np.arange(len(probs_a))
                for k in (1, 2):
                    weight = np.prod([n + j for j in range(1, k + 1)], axis=0)
                    cmp["diagonal_moments"].add(analytic.moments(d, r, m, k, k, norm=norm), float(np.sum(probs_a * weight)))

                mean_o = oracle.oracle_mean(state)
                cmp["mean_n"].add(analytic.mean_photon(d, r, m, norm=norm), mean_o)
                if m == 0:
                    note("mean_photon_m0", abs(published.mean_photon_m0(r) - mean_o) / mean_o)
                try:
                    q_o = oracle.oracle_q(state)
                except ArithmeticError:
                    q_o = None
                if q_o is not None:
                    min_q = min(min_q, q_o)
                    cmp["mandel_q"].add(analytic.mandel_q(d, r, m, norm=norm), q_o)

                for phi in (0.0, math.pi / 4, math.pi / 2):
                    cmp["qcd"].add(analytic.qcd(d, r, m, qx, phi, norm=norm), oracle.oracle_qcd(state, qx, phi))

                w_o = oracle.oracle_wigner(state, X, P)
                cmp["wigner"].add(analytic.wigner(d, r, m, X, P, norm=norm), w_o)
                cmp["husimi"].add(analytic.husimi(d, r, m, X, P, norm=norm), oracle.oracle_husimi(state, X, P))
                if d_true.B1 > 0:
                    note("wigner_sum_sign", np.max(np.abs(published.wigner(d_true, r, m, p_o, X, P) - 2 * w_o)))
                if m == 0:
                    note("wigner_m0_orientation", np.max(np.abs(published.wigner_m0(d_true, X, P) - w_o)))
                    # the stated m = 0 form is a dx dp density; the stated centre value is not
                    note("wigner_normalization", abs(published.wigner_center(0) - float(published.wigner_m0(d_true, 0.0, 0.0))))
                if d_true.mu > 0:
                    herm = published.hermite_excited_state(d_true, r, m, p_o, state.n_max)
                    note("omega_m", np.max(np.abs(herm - state.amplitudes.real)))

                mx_grid, mp_grid = np.meshgrid(mx, mp_axis, indexing="ij")
                w_xp = analytic.wigner(d, r, m, mx_grid, mp_grid, norm=norm)
                marginal = np.trapezoid(w_xp, mp_axis, axis=1)
                cmp["wigner_marginal"].add(marginal, analytic.qcd(d, r, m, mx, 0.0, norm=norm))

    for r in rs:
        for m in (2, 4):
            _, p_sym = oracle.unnormalized_amplitudes(ModelParams(math.pi / 4, r, m), policy)
            note("symmetric_b1", abs(published.symmetric_probability(r, m) - p_sym) / p_sym)

    if min_q < math.inf:
        printed["mandel_q_nonnegative"][0] = max(0.0, -min_q)

    checks = [c.result() for c in cmp.values()]
    findings = [
        Finding(name, statement, dev, dev > max(rel_tol, 1e-8)) for name, (dev, statement) in printed.items()
    ]
    findings.extend(_shape_findings(policy))
    meta = {
        "thetas": [float(t) for t in thetas],
        "rs": [float(r) for r in rs],
        "ms": [int(m) for m in ms],
        "window": [float(lo), float(hi)],
        "grid_points": grid_points,
        "perturb": dict(perturb) if perturb else None,
    }
    return ValidationReport(checks, findings, meta)
