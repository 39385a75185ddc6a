"""Monte Carlo studies: Type I error, power curves and sparsity robustness.

Seeds are derived hierarchically, master -> cell -> replicate -> permutation
stream.  A cell's seed depends only on its parameters, so a cell gives the
same result whether it runs alone or inside a larger grid, and results do
not depend on execution order or worker count.
"""
from __future__ import annotations

import csv
import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .io import atomic_write
from .measures import SIMULATION_MEASURES, MeasureKind
from .permtest import PermTestConfig, run_permutation_test
from .simgen import SimScenario, derive_seed, gen_pair

DEFAULT_SEED = 20240917
CSV_COLUMNS = ("n", "K", "signal", "sparsity", "measure", "rejection_rate", "mean_statistic", "replicates")


@dataclass(frozen=True)
class ExperimentGrid:
    n: tuple = (50, 100, 200)
    K: tuple = (3, 5, 10)
    signal: tuple = (0.0,)
    sparsity: tuple = (0.3,)
    replicates: int = 200
    R: int = 999
    alpha: float = 0.05
    seed: int = DEFAULT_SEED
    measures: tuple = SIMULATION_MEASURES

    def __post_init__(self):
        for name in ("n", "K", "signal", "sparsity"):
            vals = tuple(getattr(self, name))
            if not vals:
                raise ValueError(f"axis {name!r} is empty")
            object.__setattr__(self, name, vals)
        if int(self.replicates) < 1:
            raise ValueError("replicates must be at least 1")
        object.__setattr__(self, "measures", tuple(MeasureKind(m) for m in self.measures))
        self.scenarios()  # SimScenario rejects invalid axis values

    def scenarios(self) -> list[SimScenario]:
        """Cells in grid order: n, then K, then signal, then sparsity."""
        return [
            SimScenario(n=int(n), K=int(k), signal=float(s), sparsity=float(sp))
            for n, k, s, sp in itertools.product(self.n, self.K, self.signal, self.sparsity)
        ]


def type1_grid(**overrides) -> ExperimentGrid:
    return ExperimentGrid(**{"n": (50, 100, 200), "K": (3, 5, 10), "signal": (0.0,), "sparsity": (0.3,), **overrides})


def power_grid(**overrides) -> ExperimentGrid:
    signals = tuple(round(0.1 * i, 1) for i in range(11))
    return ExperimentGrid(**{"n": (50, 100, 200), "K": (5,), "signal": signals, "sparsity": (0.3,), **overrides})


def sparsity_grid(**overrides) -> ExperimentGrid:
    return ExperimentGrid(
        **{"n": (100, 200), "K": (5, 10, 20), "signal": (0.6,), "sparsity": (0.0, 0.2, 0.4, 0.6, 0.8), **overrides}
    )


@dataclass(frozen=True)
class CellResult:
    scenario: SimScenario
    replicates: int
    rejections: dict
    mean_statistic: dict
    rejection_rate: dict = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self, "rejection_rate", {k: v / self.replicates for k, v in self.rejections.items()}
        )

    def rows(self) -> list[dict]:
        sc = self.scenario
        return [
            {
                "n": sc.n,
                "K": sc.K,
                "signal": sc.signal,
                "sparsity": sc.sparsity,
                "measure": kind.label,
                "rejection_rate": self.rejection_rate[kind],
                "mean_statistic": self.mean_statistic[kind],
                "replicates": self.replicates,
            }
            for kind in self.rejections
        ]


def cell_seed(master: int, sc: SimScenario) -> int:
    """Seed of the cell (n, K, signal, sparsity) under `master`."""
    return derive_seed(master, sc.n, sc.K, round(sc.signal * 1_000_000), round(sc.sparsity * 1_000_000))


def run_replicate(sc: SimScenario, cell_seed: int, rep: int, grid: ExperimentGrid) -> tuple[np.ndarray, np.ndarray]:
    """One simulated pair and its permutation test.

    Returns (rejected, observed), each with one entry per measure.
    """
    rep_seed = derive_seed(cell_seed, rep)
    o, ohat = gen_pair(sc.with_seed(rep_seed))
    cfg = PermTestConfig(R=grid.R, alpha=grid.alpha, seed=derive_seed(rep_seed, 0), measures=grid.measures)
    report = run_permutation_test(o, ohat, cfg)
    rejected = np.array([report[k].p < grid.alpha for k in grid.measures])
    observed = np.array([report[k].observed for k in grid.measures])
    return rejected, observed


def _unit(args):
    cell, sc, cell_seed, rep, grid = args
    return cell, rep, run_replicate(sc, cell_seed, rep, grid)


def run_grid(grid: ExperimentGrid, workers: int = 1, progress=None) -> list[CellResult]:
    """Run every cell of `grid`; `progress(done, total)` is called per replicate."""
    cells = grid.scenarios()
    units = [
        (c, sc, cell_seed(grid.seed, sc), r, grid)
        for c, sc in enumerate(cells)
        for r in range(grid.replicates)
    ]
    rej = np.zeros((len(cells), grid.replicates, len(grid.measures)), dtype=bool)
    obs = np.zeros((len(cells), grid.replicates, len(grid.measures)))

    def collect(results):
        for done, (c, r, (rj, ob)) in enumerate(results, 1):
            rej[c, r] = rj
            obs[c, r] = ob
            if progress is not None:
                progress(done, len(units))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            collect(pool.map(_unit, units, chunksize=4))
    else:
        collect(map(_unit, units))

    out = []
    for c, sc in enumerate(cells):
        out.append(
            CellResult(
                scenario=sc,
                replicates=grid.replicates,
                rejections={k: int(rej[c, :, i].sum()) for i, k in enumerate(grid.measures)},
                mean_statistic={k: float(obs[c, :, i].mean()) for i, k in enumerate(grid.measures)},
            )
        )
    return out


def run_type1(grid: ExperimentGrid | None = None, workers: int = 1, progress=None) -> list[CellResult]:
    """Rejection rates under the null (signal fixed at 0)."""
    grid = grid or type1_grid()
    if tuple(grid.signal) != (0.0,):
        raise ValueError("the Type I error study requires signal == 0")
    return run_grid(grid, workers, progress)


def run_power(grid: ExperimentGrid | None = None, workers: int = 1, progress=None) -> list[CellResult]:
    return run_grid(grid or power_grid(), workers, progress)


def run_sparsity(grid: ExperimentGrid | None = None, workers: int = 1, progress=None) -> list[CellResult]:
    return run_grid(grid or sparsity_grid(), workers, progress)


def result_rows(results: list[CellResult]) -> list[dict]:
    return [row for cell in results for row in cell.rows()]


def write_csv(results: list[CellResult], path) -> None:
    with atomic_write(path) as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(result_rows(results))


def write_json(results: list[CellResult], path, study: str, grid: ExperimentGrid) -> None:
    doc = {
        "schema_version": 1,
        "study": study,
        "replicates": grid.replicates,
        "permutations": grid.R,
        "alpha": grid.alpha,
        "seed": grid.seed,
        "rows": result_rows(results),
    }
    with atomic_write(path) as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def format_table(results: list[CellResult]) -> str:
    """Rejection-rate table with one row per cell and one column per measure."""
    if not results:
        return ""
    kinds = list(results[0].rejections)
    axes = [("n", "n"), ("K", "K")]
    if len({c.scenario.signal for c in results}) > 1 or results[0].scenario.signal != 0.0:
        axes.append(("signal", "Signal"))
    if len({c.scenario.sparsity for c in results}) > 1:
        axes.append(("sparsity", "Sparsity"))
    head = [h for _, h in axes] + [k.label for k in kinds]
    body = []
    for c in results:
        row = [f"{getattr(c.scenario, a):g}" for a, _ in axes]
        row += [f"{c.rejection_rate[k]:.3f}" for k in kinds]
        body.append(row)
    widths = [max(len(r[i]) for r in [head] + body) for i in range(len(head))]
    lines = ["  ".join(h.rjust(w) for h, w in zip(head, widths))]
    lines.append("-" * len(lines[0]))
    lines += ["  ".join(x.rjust(w) for x, w in zip(r, widths)) for r in body]
    return "\n".join(lines)
