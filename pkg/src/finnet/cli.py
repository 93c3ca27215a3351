"""Command-line entry point: ``finnet solve | compare | stencil-check``."""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import config as cfg
from . import stencil
from .autodiff import Tape
from .mesh import uniform_1d
from .metrics import interior_derivative_stats
from .network import save_params
from .plots import heatmaps, line_plot
from .problems import get_problem
from .stencil import Field
from .trainer import DivergenceError, TrainConfig, TrainHistory, evaluate, make_grid, run

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_DIVERGED = 3

COMPARE_COLUMNS = ("method", "seed", "final_loss", "final_mse", "d1_mean", "d1_var", "d2_mean", "d2_var")
fr = cfg.format_real


def run_name(config: TrainConfig) -> str:
    return f"{config.problem}-{config.method}-s{config.seed}"


def write_history(history: TrainHistory, path: Path) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epoch", "loss", "mse"])
    for k, (loss, mse) in enumerate(zip(history.loss, history.mse)):
        w.writerow([k, fr(loss), fr(mse)])
    path.write_text(buf.getvalue())


def write_solution(points: np.ndarray, pred: np.ndarray, exact: np.ndarray, path: Path) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    coords = ["x"] if points.shape[1] == 1 else ["x", "y"]
    w.writerow(coords + ["u_pred", "u_exact"])
    for p, a, b in zip(points, pred, exact):
        w.writerow([fr(c) for c in p] + [fr(a), fr(b)])
    path.write_text(buf.getvalue())


def read_summary(path: str | Path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        if line and not line.startswith("#"):
            k, v = line.split("=", 1)
            out[k] = v
    return out


def solve(config: TrainConfig, out_dir: str | Path | None = None) -> tuple[int, dict]:
    """Train one run and write its artifacts; returns (exit code, summary dict)."""
    out = Path(out_dir) if out_dir else Path("out") / run_name(config)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    status = "ok"
    code = EXIT_OK
    try:
        params, history, problem, grid = run(config)
    except DivergenceError as exc:
        params, history = exc.params, exc.history
        kwargs = {"epsilon": config.epsilon} if config.problem == "eikonal" else {}
        problem = get_problem(config.problem, **kwargs)
        grid = make_grid(problem, config.mesh_n)
        status = f"diverged at epoch {exc.epoch}"
        code = EXIT_DIVERGED
    wall = time.perf_counter() - start

    write_history(history, out / "history.csv")
    save_params(params, out / "params.ckpt")
    X = grid.coords()
    pred, final_mse = evaluate(params, problem, X)
    exact = problem.u_exact(X)
    write_solution(X, pred, exact, out / "solution.csv")
    s1 = interior_derivative_stats(params, grid, 1)
    s2 = interior_derivative_stats(params, grid, 2)

    if grid.dim == 1:
        svg = line_plot(grid.points, {"u_pred": pred, "u_exact": exact},
                        title=f"{config.problem} ({config.method})")
    else:
        svg = heatmaps(grid.xs, grid.ys,
                       {"u_pred": pred.reshape(grid.nx, grid.ny), "u_exact": exact.reshape(grid.nx, grid.ny)},
                       title=f"{config.problem} ({config.method})")
    (out / "plot.svg").write_text(svg)

    summary = dict(cfg.echo(config, str(out)))
    summary.update(
        status=status,
        final_loss=fr(history.loss[-1]) if len(history) else "nan",
        final_mse=fr(final_mse),
        d1_mean=fr(s1.mean), d1_var=fr(s1.variance),
        d2_mean=fr(s2.mean), d2_var=fr(s2.variance),
        epochs_run=str(len(history)),
        wall_time=f"{wall:.3f}",
    )
    (out / "summary.txt").write_text("".join(f"{k}={v}\n" for k, v in summary.items()))
    return code, summary


def _compare_job(args) -> dict:
    config, out_dir = args
    code, summary = solve(config, out_dir)
    summary["exit_code"] = code
    return summary


def failure_pattern(row: dict, problem: str) -> bool:
    """The PINN failure signature: far from u* while the derivative is near constant."""
    var_key = "d1_var" if problem == "ode1" else "d2_var"
    return float(row["final_mse"]) >= 1e-2 and float(row[var_key]) <= 1e-3


def compare(problem: str, seeds: Sequence[int], out_dir: str | Path, epochs: int | None = None,
            jobs: int = 1) -> tuple[int, list[dict]]:
    """Both methods over the given seeds; writes compare.csv and compare_report.txt."""
    if problem not in ("ode1", "ode2"):
        raise ValueError(f"compare covers the 1-D problems ode1 and ode2 only, got {problem!r}")
    seeds = list(seeds)
    if not seeds:
        raise ValueError("compare needs at least one seed")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tasks = []
    for method in ("finnet", "pinn"):
        for s in seeds:
            c = TrainConfig.paper_defaults(problem, method, seed=s, epochs=epochs)
            tasks.append((c, out / f"{method}-s{s}"))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_compare_job, tasks))
    else:
        results = [_compare_job(t) for t in tasks]
    rows = sorted(results, key=lambda r: (r["method"], int(r["seed"])))

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COMPARE_COLUMNS)
    for r in rows:
        w.writerow([r[k] for k in COMPARE_COLUMNS])
    (out / "compare.csv").write_text(buf.getvalue())

    lines = [f"problem={problem}"]
    medians = {}
    for method in ("finnet", "pinn"):
        mses = [float(r["final_mse"]) for r in rows if r["method"] == method]
        medians[method] = float(np.median(mses))
        lines.append(f"median_mse_{method}={fr(medians[method])}")
    lines.append(f"finnet_median_below_pinn={medians['finnet'] < medians['pinn']}")
    for r in rows:
        flag = failure_pattern(r, problem)
        lines.append(f"{r['method']} seed={r['seed']} loss={r['final_loss']} mse={r['final_mse']} "
                     f"d1_mean={r['d1_mean']} d1_var={r['d1_var']} d2_mean={r['d2_mean']} "
                     f"d2_var={r['d2_var']} failure_pattern={flag}")
    (out / "compare_report.txt").write_text("\n".join(lines) + "\n")
    code = EXIT_OK if all(r["exit_code"] == EXIT_OK for r in rows) else EXIT_DIVERGED
    return code, rows


# ---------------------------------------------------------------------------
# stencil convergence check

StencilFn = Callable[[Field, int], object]
STEPS = (0.1, 0.05, 0.025)
TEST_FUNCTIONS = {
    "sin": (np.sin, np.cos, lambda x: -np.sin(x)),
    "exp": (np.exp, np.exp, np.exp),
}
DEFAULT_STENCILS: dict[str, tuple[StencilFn, int, float]] = {
    # name: (stencil, derivative order, required convergence order)
    "d1_forward": (stencil.d1_forward, 1, 0.9),
    "d1_backward": (stencil.d1_backward, 1, 0.9),
    "d1_central": (stencil.d1_central, 1, 1.9),
    "d2_central": (stencil.d2_central, 2, 1.9),
}


def convergence_order(fn: StencilFn, order: int, f, derivs, x0: float = 0.5,
                      steps: Sequence[float] = STEPS) -> float:
    """Least-squares slope of log|error| against log h."""
    errs = []
    for h in steps:
        grid = uniform_1d(x0 - h, x0 + h, 3)
        field = Field.from_values(Tape(), grid, f(grid.points), constant=True)
        est = fn(field, 1).value
        errs.append(abs(est - derivs[order - 1](x0)))
    return float(np.polyfit(np.log(steps), np.log(np.maximum(errs, 1e-300)), 1)[0])


def stencil_check(stencils: dict[str, tuple[StencilFn, int, float]] | None = None,
                  stream=None) -> int:
    stencils = DEFAULT_STENCILS if stencils is None else stencils
    stream = sys.stdout if stream is None else stream
    ok = True
    for name, (fn, order, need) in stencils.items():
        orders = {fname: convergence_order(fn, order, f, (d1, d2))
                  for fname, (f, d1, d2) in TEST_FUNCTIONS.items()}
        good = all(math.isfinite(p) and p >= need for p in orders.values())
        ok &= good
        parts = [f"{fname}={p:.3f}" for fname, p in orders.items()]
        verdict = "ok" if good else "FAIL"
        print(f"{name}: order {' '.join(parts)} (need >= {need}) {verdict}", file=stream)
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--problem")
    p.add_argument("--method")
    p.add_argument("--epochs")
    p.add_argument("--lr")
    p.add_argument("--seed")
    p.add_argument("--mesh-n", dest="mesh_n")
    p.add_argument("--hidden")
    p.add_argument("--epsilon")
    p.add_argument("--out", dest="out_dir")
    p.add_argument("--config")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="finnet", description="Finite-difference neural network solver experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _run_flags(sub.add_parser("solve", help="train one run and write its artifacts"))
    c = sub.add_parser("compare", help="FinNet vs PINN over several seeds (ode1/ode2)")
    c.add_argument("--problem", required=True)
    c.add_argument("--seeds", default="1,2,3,4,5", help="comma-separated seeds")
    c.add_argument("--epochs", type=int)
    c.add_argument("--out", dest="out_dir")
    c.add_argument("--jobs", type=int, default=1)
    sub.add_parser("stencil-check", help="measure finite-difference convergence orders")
    return parser


def _solve_values(ns: argparse.Namespace) -> dict:
    values = cfg.load(ns.config) if ns.config else {}
    for key in cfg.KEYS:
        text = getattr(ns, key, None)
        if text is not None:
            values[key] = cfg.parse_value(key, text)
    return values


def main(argv: Sequence[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    if ns.command == "stencil-check":
        return stencil_check()
    if ns.command == "solve":
        try:
            config, out_dir = cfg.build(_solve_values(ns))
        except (cfg.ConfigError, OSError) as exc:
            print(f"finnet solve: {exc}", file=sys.stderr)
            return EXIT_USAGE
        code, summary = solve(config, out_dir)
        print(f"{run_name(config)}: status={summary['status']} final_loss={summary['final_loss']} "
              f"final_mse={summary['final_mse']} -> {summary['out_dir']}")
        return code
    try:
        seeds = [int(s) for s in ns.seeds.split(",") if s.strip()]
    except ValueError:
        print(f"finnet compare: bad seed list {ns.seeds!r}", file=sys.stderr)
        return EXIT_USAGE
    out = ns.out_dir or str(Path("out") / f"compare-{ns.problem}")
    try:
        code, rows = compare(ns.problem, seeds, out, epochs=ns.epochs, jobs=ns.jobs)
    except ValueError as exc:
        print(f"finnet compare: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print((Path(out) / "compare_report.txt").read_text(), end="")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
