"""Command-line front end.

Subcommands::

    crossing-sweep    Monte Carlo crossing probabilities over n and p
    decay-fit         exponential fit of the one-arm probability
    critical-points   critical edge weights of the built-in lattices
    threshold-window  p where C_h(2n, n) passes 1/4 and 3/4
    verify            run a certification suite
    couple            run the two-configuration coupling chain
    enumerate         exact probabilities, derivatives and influences
    sample            heat-bath / cluster chain with a binary frame dump

Exit codes: 0 success, 1 a verifying command found a failure, 2 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import dynamics as dyn
from . import exact
from . import lattice as lat
from . import verify as ver
from .events import C_H, C_V, load_family
from .exact import BoundaryCondition, RCParams

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    """Invalid command-line or configuration input (exit code 2)."""


# ---------------------------------------------------------------------------
# configuration


@dataclass
class ExperimentConfig:
    lattice: str = "square"
    q: float = 1.0
    p_grid: tuple = (0.5,)
    beta_grid: tuple = ()
    J: tuple = ()
    ns: tuple = (8,)
    bc: str = "free"
    replicas: int = 8
    sweeps: int = 1000
    burn_in: int = dyn.DEFAULT_BURN_IN
    seed: int = 0
    out: str | None = None
    algo: str = "auto"
    aspect: float = 2.0

    def validate(self) -> "ExperimentConfig":
        try:
            self.lattice_spec()
        except (ValueError, OSError) as exc:
            raise UsageError(str(exc)) from None
        if self.q <= 0:
            raise UsageError("q must be positive")
        if any(not 0.0 <= p <= 1.0 for p in self.p_grid):
            raise UsageError("p values must lie in [0, 1]")
        if any(b < 0 for b in self.beta_grid):
            raise UsageError("beta values must be non-negative")
        if any(j <= 0 for j in self.J):
            raise UsageError("couplings must be positive")
        if not self.ns or any(int(n) != n or n < 1 for n in self.ns):
            raise UsageError("sizes must be positive integers")
        if any(b <= a for a, b in zip(self.ns, self.ns[1:])):
            raise UsageError("sizes must be strictly increasing")
        if self.bc not in ("free", "wired"):
            raise UsageError("bc must be free or wired")
        if self.replicas < 1 or self.sweeps < 1 or self.burn_in < 0:
            raise UsageError("need replicas >= 1, sweeps >= 1 and burn-in >= 0")
        if self.algo not in ("auto", "heatbath", "es"):
            raise UsageError("algo must be auto, heatbath or es")
        if self.aspect <= 0:
            raise UsageError("aspect must be positive")
        return self

    def lattice_spec(self) -> lat.LatticeSpec:
        if self.lattice in lat.BUILTIN_LATTICES:
            return lat.BUILTIN_LATTICES[self.lattice]
        if Path(self.lattice).is_file():
            return lat.LatticeSpec.custom(lat.UnitCell.from_json(self.lattice))
        raise ValueError(f"unknown lattice {self.lattice!r}; use a built-in name or a unit-cell JSON file")

    @classmethod
    def from_json(cls, path, **overrides) -> "ExperimentConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from None
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        for key in ("p_grid", "beta_grid", "J", "ns"):
            if key in doc:
                doc[key] = tuple(doc[key])
        doc.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**doc)


def _floats(text: str) -> tuple:
    try:
        return tuple(float(t) for t in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers, got {text!r}") from None


def _ints(text: str) -> tuple:
    try:
        return tuple(int(t) for t in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None


def _box(text: str) -> tuple:
    vals = _floats(text)
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("a region is given as a,b,c,d")
    return vals


def _config(args) -> ExperimentConfig:
    over = {
        "lattice": args.lattice, "q": args.q, "p_grid": args.p, "beta_grid": args.beta,
        "J": args.couplings, "ns": args.n, "bc": args.bc, "replicas": args.replicas,
        "sweeps": args.sweeps, "burn_in": args.burn_in, "seed": args.seed, "out": args.out,
        "algo": args.algo, "aspect": args.aspect,
    }
    if args.config:
        cfg = ExperimentConfig.from_json(args.config, **over)
    else:
        cfg = ExperimentConfig(**{k: v for k, v in over.items() if v is not None})
    return cfg.validate()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(x) if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def _need_replicas(cfg):
    if cfg.replicas < 2:
        raise UsageError("Monte Carlo standard errors need at least two replicas")


# ---------------------------------------------------------------------------
# experiment drivers


CROSSING_HEADER = ("lattice", "q", "bc", "n", "p", "event", "estimate", "stderr", "replicas", "seed")


def crossing_sweep(cfg: ExperimentConfig, events=("C_h(2n,n)", "C_v(2n,n)", "C_h(n+1,n)")) -> list[tuple]:
    """Crossing estimates for every size and p; rows follow :data:`CROSSING_HEADER`."""
    _need_replicas(cfg)
    spec = cfg.lattice_spec()
    rows = []
    for n in cfg.ns:
        wide = cfg.aspect * n
        shapes = {}
        for name in events:
            if name == "C_h(n+1,n)":
                shapes.setdefault((n + 1, n), []).append((name, C_H))
            elif name == "C_h(2n,n)":
                shapes.setdefault((wide, n), []).append((name, C_H))
            elif name == "C_v(2n,n)":
                shapes.setdefault((wide, n), []).append((name, C_V))
            else:
                raise UsageError(f"unknown crossing event {name!r}")
        for p in cfg.p_grid:
            params = RCParams(q=cfg.q, p=p)
            for (w, h), evs in shapes.items():
                region = lat.build_region(spec, 0, w, 0, h)
                bc = BoundaryCondition.named(region, cfg.bc)
                res = dyn.estimate_many([e for _, e in evs], region, params, bc, cfg.replicas, cfg.sweeps,
                                        cfg.burn_in, cfg.seed, cfg.algo)
                for (name, _), (mean, se) in zip(evs, res):
                    rows.append((cfg.lattice, cfg.q, cfg.bc, n, p, name, mean, se, cfg.replicas, cfg.seed))
    order = {e: i for i, e in enumerate(events)}
    rows.sort(key=lambda r: (r[3], r[4], order[r[5]]))
    return rows


@dataclass
class DecayFit:
    """Weighted least-squares fit of ``log phi(0 <-> d Lambda_n) = a - c n``."""

    c: float
    c_stderr: float
    intercept: float
    r2: float
    r2_unweighted: float
    ns: np.ndarray
    estimates: np.ndarray
    stderrs: np.ndarray
    used: np.ndarray
    decaying: bool
    warnings: list = field(default_factory=list)


MAX_RELATIVE_ERROR = 0.5


def fit_decay(ns, est, se) -> DecayFit:
    """Fit ``log(est)`` against ``n`` with weights ``(est/se)^2``.

    Points with a zero estimate or a relative error above
    :data:`MAX_RELATIVE_ERROR` are dropped with a warning.  A slope that is
    not significantly negative (or estimates within 1e-3 of one) marks the
    fit as non-decaying.
    """
    ns, est, se = (np.asarray(a, dtype=float) for a in (ns, est, se))
    notes = []
    used = est > 0
    for n in ns[~used]:
        notes.append(f"dropped n={int(n)}: zero estimate")
    floor = 1.0 / 1e12
    rel = np.where(est > 0, np.maximum(se, floor) / np.where(est > 0, est, 1), np.inf)
    noisy = used & (rel > MAX_RELATIVE_ERROR)
    for n in ns[noisy]:
        notes.append(f"dropped n={int(n)}: relative error above {MAX_RELATIVE_ERROR}")
    used &= ~noisy
    if used.sum() < 2:
        raise ValueError("fewer than two usable points; all estimates zero or too noisy")
    x, y = ns[used], np.log(est[used])
    w = 1.0 / np.maximum(rel[used], 1e-6) ** 2
    X = np.column_stack([np.ones_like(x), x])
    W = np.diag(w)
    cov = np.linalg.inv(X.T @ W @ X)
    beta = cov @ X.T @ W @ y
    resid = y - X @ beta
    ybar = np.average(y, weights=w)
    r2 = 1.0 - np.sum(w * resid**2) / np.sum(w * (y - ybar) ** 2)
    r2u = 1.0 - np.sum(resid**2) / np.sum((y - y.mean()) ** 2)
    dof = max(int(used.sum()) - 2, 1)
    scale = max(1.0, float(np.sum(w * resid**2)) / dof)
    c, c_se = -beta[1], math.sqrt(cov[1, 1] * scale)
    decaying = c > 2 * c_se and float(est[used].min()) < 1 - 1e-3
    if not decaying:
        notes.append("non-decaying: slope not significantly negative")
    for note in notes:
        warnings.warn(note, stacklevel=2)
    return DecayFit(c, c_se, beta[0], float(r2), float(r2u), ns, est, se, used, decaying, notes)


def one_arm_curve(cfg: ExperimentConfig, p: float, samples: int):
    """``phi(x <-> d Lambda_n(x))`` for every ``n`` in ``cfg.ns``.

    At q = 1 the origin cluster is explored exactly inside ``Lambda_{n_max}``.
    Otherwise a chain runs on ``Lambda_L`` with ``L = n_max + 2`` and every
    vertex whose box of half-width ``n`` fits inside is used as a translate.
    """
    spec = cfg.lattice_spec()
    ns = np.asarray(cfg.ns)
    params = RCParams(q=cfg.q, p=p)
    if cfg.q == 1:
        box = lat.build_region(spec, -ns[-1] - 1, ns[-1] + 1, -ns[-1] - 1, ns[-1] + 1)
        origin = int(np.argmin(np.hypot(*box.vertices.T)))
        est, se, _, _ = dyn.one_arm(box, params, ns, [origin], samples, cfg.seed, None, 0, max(cfg.replicas, 2))
        return est, se
    _need_replicas(cfg)
    size = int(ns[-1]) + 2
    box = lat.build_region(spec, -size, size, -size, size)
    bc = BoundaryCondition.named(box, cfg.bc)
    depth = size - np.max(np.abs(box.vertices), axis=1)
    per = max(1, samples // cfg.replicas)
    hits = np.zeros((cfg.replicas, len(ns)))
    trials = np.zeros((cfg.replicas, len(ns)))
    allowed = depth[:, None] >= ns[None, :] - 1e-9
    everyone = np.arange(box.n_vertices)
    for r in range(cfg.replicas):
        chain = dyn.make_chain(box, params, bc, dyn.make_rng(cfg.seed, r), cfg.algo)
        if cfg.burn_in:
            chain.sweep(cfg.burn_in)
        for _ in range(per):
            chain.sweep(1)
            radii = dyn.origin_radii(chain.config, box, everyone)
            hits[r] += ((radii[:, None] >= ns[None, :]) & allowed).sum(axis=0)
        trials[r] = per * allowed.sum(axis=0)
    means = hits / trials
    est = hits.sum(axis=0) / trials.sum(axis=0)
    se = means.std(axis=0, ddof=1) / math.sqrt(cfg.replicas)
    return est, se


def decay_fit(cfg: ExperimentConfig, p: float, samples: int = 100_000) -> DecayFit:
    if len(cfg.ns) < 4:
        raise UsageError("decay fit needs at least four sizes")
    est, se = one_arm_curve(cfg, p, samples)
    return fit_decay(cfg.ns, est, se)


def critical_points(qs) -> list[tuple]:
    rows = []
    for q in qs:
        sq = lat.solve_critical_point("square", q)
        tri = lat.solve_critical_point("triangular", q)
        hexa = lat.solve_critical_point("hexagonal", q)
        rows.append((q, sq, tri, hexa, lat.pstar(tri, q), abs(lat.pstar(tri, q) - hexa)))
    return rows


@dataclass
class Window:
    n: int
    p_lo: float
    p_hi: float

    @property
    def width(self) -> float:
        return self.p_hi - self.p_lo

    @property
    def centre(self) -> float:
        return 0.5 * (self.p_lo + self.p_hi)


def _crossing_level(cfg, region, bc, target, lo, hi, tol):
    """Bisection for the p where the C_h estimate crosses ``target``.

    Every evaluation reuses the same seeds, so the estimate is a
    deterministic function of p.
    """
    def f(p):
        return dyn.estimate(C_H, region, RCParams(q=cfg.q, p=p), bc, cfg.replicas, cfg.sweeps, cfg.burn_in,
                            cfg.seed, cfg.algo)[0]

    if f(lo) > target or f(hi) < target:
        raise UsageError(f"p range [{lo}, {hi}] does not bracket the crossing level {target}; widen it")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def threshold_window(cfg: ExperimentConfig, lo=None, hi=None, levels=(0.25, 0.75), tol=2e-3) -> list[Window]:
    """Window ``[p_lo, p_hi]`` where ``phi(C_h(2n, n))`` goes from 1/4 to 3/4."""
    _need_replicas(cfg)
    if len(cfg.ns) < 2:
        raise UsageError("threshold window needs at least two sizes")
    lo = min(cfg.p_grid) if lo is None else lo
    hi = max(cfg.p_grid) if hi is None else hi
    if not lo < hi:
        raise UsageError("threshold window needs a p range with two distinct endpoints")
    spec = cfg.lattice_spec()
    out = []
    for n in cfg.ns:
        region = lat.build_region(spec, 0, cfg.aspect * n, 0, n)
        bc = BoundaryCondition.named(region, cfg.bc)
        a = _crossing_level(cfg, region, bc, levels[0], lo, hi, tol)
        b = _crossing_level(cfg, region, bc, levels[1], lo, hi, tol)
        out.append(Window(int(n), a, b))
    return out


# ---------------------------------------------------------------------------
# subcommands


def _params(cfg: ExperimentConfig, region) -> RCParams:
    if cfg.beta_grid:
        if len(cfg.beta_grid) != 1:
            raise UsageError("give a single beta for this command")
        J = cfg.J or (1.0,) * region.n_edges
        if len(J) != region.n_edges:
            raise UsageError(f"need {region.n_edges} couplings, got {len(J)}")
        return RCParams.weighted(cfg.beta_grid[0], J, cfg.q)
    if len(cfg.p_grid) != 1:
        raise UsageError("give a single p for this command")
    return RCParams(q=cfg.q, p=cfg.p_grid[0])


def _region(cfg: ExperimentConfig, box) -> lat.Region:
    try:
        return lat.build_region(cfg.lattice_spec(), *box)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_crossing_sweep(args) -> int:
    cfg = _config(args)
    rows = crossing_sweep(cfg, tuple(args.events) if args.events else ("C_h(2n,n)", "C_v(2n,n)", "C_h(n+1,n)"))
    _emit(_csv(CROSSING_HEADER, rows), cfg.out)
    return EXIT_OK


def cmd_decay_fit(args) -> int:
    cfg = _config(args)
    if len(cfg.p_grid) != 1:
        raise UsageError("decay fit takes a single p")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        fit = decay_fit(cfg, cfg.p_grid[0], args.samples)
    rows = [(cfg.lattice, cfg.q, cfg.p_grid[0], int(n), float(e), float(s), bool(u))
            for n, e, s, u in zip(fit.ns, fit.estimates, fit.stderrs, fit.used)]
    text = "".join(f"# {w.message}\n" for w in caught)
    text += (f"# c={fit.c!r} c_stderr={fit.c_stderr!r} r2={fit.r2!r} r2_unweighted={fit.r2_unweighted!r} "
             f"decaying={fit.decaying}\n")
    text += _csv(("lattice", "q", "p", "n", "estimate", "stderr", "used"), rows)
    _emit(text, cfg.out)
    return EXIT_OK


def cmd_critical_points(args) -> int:
    qs = args.qs or ((args.q,) if args.q is not None else (1.0, 2.0, 3.0, 4.0))
    if any(q < 1 for q in qs):
        raise UsageError("critical points are tabulated for q >= 1")
    rows = critical_points(qs)
    _emit(_csv(("q", "square", "triangular", "hexagonal", "pstar_triangular", "duality_gap"), rows), args.out)
    return EXIT_OK


def cmd_threshold_window(args) -> int:
    cfg = _config(args)
    lo, hi = args.range if args.range else (None, None)
    wins = threshold_window(cfg, lo, hi)
    rows = [(cfg.lattice, cfg.q, cfg.bc, w.n, w.p_lo, w.p_hi, w.width, w.centre, cfg.replicas, cfg.sweeps, cfg.seed)
            for w in wins]
    header = ("lattice", "q", "bc", "n", "p_lo", "p_hi", "width", "centre", "replicas", "sweeps", "seed")
    _emit(_csv(header, rows), cfg.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    rows = ver.run_suite(args.suite, args.seed or 0)
    meta = {"suite": args.suite, "seed": args.seed or 0, "rows": len(rows),
            "failures": len(ver.failures(rows)),
            "note": "finite-volume surrogates; reported-only rows carry no asserted constant"}
    _emit(ver.reports_csv(rows, meta), args.out)
    return EXIT_FAIL if ver.failures(rows) else EXIT_OK


def cmd_couple(args) -> int:
    cfg = _config(args)
    region = _region(cfg, args.region)
    if not 0 <= args.pivot < region.n_edges:
        raise UsageError(f"pivot edge {args.pivot} not in region with {region.n_edges} edges")
    params = _params(cfg, region)
    bc = BoundaryCondition.named(region, cfg.bc)
    run = dyn.coupling_chain_run(region, params, bc, args.pivot, args.t_max, cfg.seed, args.max_events)
    lines = [f"events={run.n_events}", f"clock={run.final.clock!r}"]
    lines += [f"violations.{k}={v}" for k, v in run.violations.items()]
    if run.occupation_pi is not None and region.n_edges <= exact.ENUMERATION_CAP:
        law = exact.engine(region, bc).distribution(params)
        on = exact.engine(region, bc).edge_state(args.pivot)
        closed = np.where(on, 0.0, law) / law[~on].sum()
        opened = np.where(on, law, 0.0) / law[on].sum()
        mp, mo = run.marginals()
        lines.append(f"tv.pi={float(0.5 * np.abs(mp - closed).sum())!r}")
        lines.append(f"tv.omega={float(0.5 * np.abs(mo - opened).sum())!r}")
    _emit("\n".join(lines) + "\n", cfg.out)
    return EXIT_FAIL if any(run.violations.values()) else EXIT_OK


ENUM_HEADER = ("region", "bc", "p", "q", "event", "value", "derivative", "influence_edge", "influence")


def cmd_enumerate(args) -> int:
    cfg = _config(args)
    region = _region(cfg, args.region)
    bc = BoundaryCondition.named(region, cfg.bc)
    try:
        events = load_family(args.events) if args.events else {"C_h": C_H, "C_v": C_V}
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read event family: {exc}") from None
    rows = []
    if cfg.beta_grid:
        settings = [_params(cfg, region)]
    else:
        settings = [RCParams(q=cfg.q, p=p) for p in cfg.p_grid]
    for params in settings:
        for name, ev in events.items():
            value = exact.probability(ev, region, params, bc)
            deriv, inf_e, inf = math.nan, -1, math.nan
            if params.homogeneous and 0 < params.p < 1:
                deriv = exact.derivative_dp(ev, region, params, bc)
            if ev.increasing:
                inf_e, inf = exact.influence(ev, region, params, bc)
            label = params.p if params.homogeneous else f"beta={params.beta!r}"
            rows.append((region.name, cfg.bc, label, cfg.q, name, value, deriv, inf_e, inf))
    _emit(_csv(ENUM_HEADER, rows), cfg.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    cfg = _config(args)
    region = _region(cfg, args.region)
    params = _params(cfg, region)
    bc = BoundaryCondition.named(region, cfg.bc)
    chain = dyn.make_chain(region, params, bc, dyn.make_rng(cfg.seed, 0), cfg.algo)
    if cfg.burn_in:
        chain.sweep(cfg.burn_in)
    frames = np.empty((cfg.sweeps, region.n_edges), dtype=bool)
    for s in range(cfg.sweeps):
        chain.sweep(1)
        frames[s] = chain.config
    if not cfg.out:
        raise UsageError("sample needs --out for the frame dump")
    dyn.write_frames(cfg.out, frames)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("model and sampling")
    g.add_argument("--lattice", help="square, triangular, hexagonal or a unit-cell JSON file")
    g.add_argument("--q", type=float, help="cluster weight")
    g.add_argument("--p", type=_floats, help="edge weight(s), comma separated")
    g.add_argument("--beta", type=_floats, help="inverse temperature (weighted mode)")
    g.add_argument("--couplings", type=_floats, help="per-edge couplings J (weighted mode)")
    g.add_argument("--n", type=_ints, help="sizes, strictly increasing")
    g.add_argument("--bc", choices=("free", "wired"))
    g.add_argument("--seed", type=int)
    g.add_argument("--out", help="output path (default: stdout)")
    g.add_argument("--config", help="ExperimentConfig JSON file; flags override it")
    g.add_argument("--aspect", type=float, help="width/height ratio of the long rectangle (default 2)")
    g.add_argument("--sweeps", type=int)
    g.add_argument("--burn-in", dest="burn_in", type=int)
    g.add_argument("--replicas", type=int)
    g.add_argument("--algo", choices=("auto", "heatbath", "es"))
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="rcmodel", description="Random-cluster model toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("crossing-sweep", parents=[common], help="crossing probabilities over n and p")
    s.add_argument("--events", nargs="+", choices=("C_h(2n,n)", "C_v(2n,n)", "C_h(n+1,n)"))
    s.set_defaults(func=cmd_crossing_sweep)

    s = sub.add_parser("decay-fit", parents=[common], help="exponential fit of the one-arm probability")
    s.add_argument("--samples", type=int, default=100_000)
    s.set_defaults(func=cmd_decay_fit)

    s = sub.add_parser("critical-points", parents=[common], help="critical edge weights")
    s.add_argument("--qs", type=_floats, help="list of q values")
    s.set_defaults(func=cmd_critical_points)

    s = sub.add_parser("threshold-window", parents=[common], help="1/4 to 3/4 window of C_h(2n,n)")
    s.add_argument("--range", type=_floats, help="p_lo,p_hi bracket for the bisection")
    s.set_defaults(func=cmd_threshold_window)

    s = sub.add_parser("verify", parents=[common], help="run a certification suite")
    s.add_argument("suite", choices=ver.SUITES + ("all",))
    s.set_defaults(func=cmd_verify)

    for name, func, text in (("couple", cmd_couple, "two-configuration coupling chain"),
                             ("enumerate", cmd_enumerate, "exact event probabilities"),
                             ("sample", cmd_sample, "run a chain and dump frames")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("--region", type=_box, required=True, help="rectangle a,b,c,d")
        if name == "couple":
            s.add_argument("--pivot", type=int, default=0)
            s.add_argument("--t-max", dest="t_max", type=float, default=1000.0)
            s.add_argument("--max-events", dest="max_events", type=int)
        if name == "enumerate":
            s.add_argument("--events", help="JSON event family")
        s.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, exact.CapacityError, lat.RegionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
