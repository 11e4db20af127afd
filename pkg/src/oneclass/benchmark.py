"""Benchmark harness: fit each method on each class split, report AUROC.

The result grid mirrors the usual mean-over-classes tables: one row per
class, one column per method, plus a mean row.  A failed cell is recorded
(and warned about) but never silently dropped: it is excluded from the
mean and the runner reports partial failure.
"""

import csv
import hashlib
import warnings
from dataclasses import dataclass, field

import numpy as np

from .metrics import auroc, roc_curve


@dataclass
class EvalReport:
    method: str
    class_tag: str
    auroc: float
    n_target_test: int
    n_negative_test: int
    roc_points: list = field(repr=False, default_factory=list)


@dataclass
class BenchmarkResult:
    method: str
    reports: list = field(default_factory=list)
    failures: list = field(default_factory=list)  # (class_tag, message)

    @property
    def mean_auroc(self):
        if not self.reports:
            return float("nan")
        return float(np.mean([r.auroc for r in self.reports]))


def cell_seed(seed, method, class_tag):
    """Stable per-cell seed so adding a method never perturbs the others."""
    digest = hashlib.sha256(f"{seed}:{method}:{class_tag}".encode()).digest()
    return int.from_bytes(digest[:8], "little") % (2**63)


def run_benchmark(methods, splits, seed=0):
    """Run the (method x class) grid.

    methods: list of (name, factory) where factory(seed) builds a fresh
    estimator with fit/decision_function.  splits: ProtocolSplit list.
    Returns one BenchmarkResult per method, in request order.
    """
    results = []
    for name, factory in methods:
        result = BenchmarkResult(method=name)
        for split in splits:
            try:
                est = factory(cell_seed(seed, name, split.class_tag))
                est.fit(split.train.data)
                t_scores = est.decision_function(split.target_test.data)
                n_scores = est.decision_function(split.negative_test.data)
                result.reports.append(EvalReport(
                    method=name,
                    class_tag=split.class_tag,
                    auroc=auroc(t_scores, n_scores),
                    n_target_test=split.target_test.n,
                    n_negative_test=split.negative_test.n,
                    roc_points=roc_curve(t_scores, n_scores),
                ))
            except Exception as exc:  # noqa: BLE001 - cell isolation is the contract
                warnings.warn(
                    f"benchmark cell ({name}, {split.class_tag}) failed: {exc}",
                    stacklevel=2)
                result.failures.append((split.class_tag, str(exc)))
        results.append(result)
    return results


def write_benchmark_csv(results, path):
    """One row per (method, class): method, class, auroc, n_pos, n_neg."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["method", "class", "auroc", "n_pos", "n_neg"])
        for result in results:
            for r in result.reports:
                writer.writerow([r.method, r.class_tag, repr(r.auroc),
                                 r.n_target_test, r.n_negative_test])
            for class_tag, message in result.failures:
                writer.writerow([result.method, class_tag, "FAILED", "", ""])


def format_benchmark_table(results):
    """Aligned text table: classes as rows, methods as columns, mean last."""
    methods = [r.method for r in results]
    classes = []
    for result in results:
        for r in result.reports:
            if r.class_tag not in classes:
                classes.append(r.class_tag)
        for class_tag, _ in result.failures:
            if class_tag not in classes:
                classes.append(class_tag)
    cells = {(r.method, r.class_tag): f"{r.auroc:.4f}"
             for result in results for r in result.reports}
    for result in results:
        for class_tag, _ in result.failures:
            cells[(result.method, class_tag)] = "FAIL"

    width = max([len("class")] + [len(c) for c in classes] + [4])
    col_widths = [max(len(m), 6) for m in methods]
    lines = []
    header = "class".ljust(width) + "  " + "  ".join(
        m.rjust(w) for m, w in zip(methods, col_widths))
    lines.append(header)
    lines.append("-" * len(header))
    for c in classes:
        row = c.ljust(width) + "  " + "  ".join(
            cells.get((m, c), "-").rjust(w) for m, w in zip(methods, col_widths))
        lines.append(row)
    lines.append("-" * len(header))
    mean_cells = []
    for result, w in zip(results, col_widths):
        mean = result.mean_auroc
        mean_cells.append(("nan" if np.isnan(mean) else f"{mean:.4f}").rjust(w))
    lines.append("mean".ljust(width) + "  " + "  ".join(mean_cells))
    return "\n".join(lines)
