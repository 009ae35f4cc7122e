"""Result tables, plot series, and the benchmark reproductions."""
from __future__ import annotations

import csv
import io
from pathlib import Path

from .problems import table1_columns, table2_columns
from .solvers import Trace, run
from .space import norm_p

__all__ = ["fmt_x", "fmt_float", "result_table", "write_table", "combined_table",
           "write_plot_data", "reproduce", "iterations_to_threshold",
           "compare_traces"]

TARGETS = ("table1", "table2")


def fmt_x(v: float) -> str:
    """Iterate coordinates: fixed point with 15 decimals, as in the tables."""
    return f"{v:.15f}"


def fmt_float(v: float) -> str:
    """Residuals and norms: 15 significant digits."""
    return f"{v:.14e}"


def result_table(trace: Trace) -> tuple:
    """``(header, rows)`` with one row per iterate ``x_n``.

    Row ``n`` carries the residuals of the iteration that produced ``x_n``;
    the starting rows leave them empty.
    """
    dim = trace.problem.space1.dim
    header = ["n"] + [f"x[{i}]" for i in range(dim)] + ["residual_S", "residual_T",
                                                          "step_norm"]
    by_n = {rec.n + 1: rec for rec in trace.records}
    rows = []
    for n, x in trace.iterates().items():
        rec = by_n.get(n)
        extra = ["", "", ""] if rec is None else [
            fmt_float(rec.residual_S), fmt_float(rec.residual_T), fmt_float(rec.step_norm)]
        rows.append([str(n)] + [fmt_x(c) for c in x.coords] + extra)
    return header, rows


def _csv_text(header, rows, comments=()):
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_table(path, header, rows, comments=()) -> None:
    Path(path).write_text(_csv_text(header, rows, comments), encoding="utf-8")


def combined_table(columns: list) -> tuple:
    """Side-by-side first coordinates of several traces, keyed by ``n``.

    ``columns`` is a list of ``(label, trace)``; missing entries are blank.
    """
    series = [(label, {n: x.coords[0] for n, x in tr.iterates().items()})
              for label, tr in columns]
    ns = sorted(set().union(*(s.keys() for _, s in series)))
    header = ["n"] + [label for label, _ in series]
    rows = [[str(n)] + [fmt_x(s[n]) if n in s else "" for _, s in series] for n in ns]
    return header, rows


def write_plot_data(path, trace: Trace) -> None:
    """Two whitespace-separated columns ``n x_n`` (first coordinate)."""
    lines = [f"{n} {fmt_x(x.coords[0])}" for n, x in trace.iterates().items()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _safe(label):
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in label)


def reproduce(target: str, output_dir, max_iter: int = 24) -> dict:
    """Run the columns of ``target`` and write ``<target>.csv`` plus plot data.

    Returns ``{label: trace}``.  The columns are independent runs; they are
    executed in order and each writes only its own plot file.
    """
    if target == "table1":
        columns = table1_columns(max_iter)
    elif target == "table2":
        columns = table2_columns(max_iter)
    else:
        raise ValueError(f"unknown target {target!r}; expected one of {TARGETS}")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    traces = {}
    for label, problem in columns:
        tr = run(problem)
        traces[label] = tr
        write_plot_data(out / f"{target}_{_safe(label)}.dat", tr)
    header, rows = combined_table(list(traces.items()))
    write_table(out / f"{target}.csv", header, rows)
    return traces


def iterations_to_threshold(trace: Trace, threshold: float = 1e-6):
    """First ``n`` with ``||x_n - x*|| <= threshold`` (``x* = 0`` if unknown)."""
    ref = trace.problem.x_star
    for n, x in trace.iterates().items():
        d = norm_p(x - ref) if ref is not None else norm_p(x)
        if d <= threshold:
            return n
    return None


def compare_traces(trace_a: Trace, trace_b: Trace, threshold: float = 1e-6,
                   labels=("a", "b")) -> tuple:
    """Side-by-side table and a one-line summary of iterations-to-threshold."""
    header, rows = combined_table([(labels[0], trace_a), (labels[1], trace_b)])
    ka = iterations_to_threshold(trace_a, threshold)
    kb = iterations_to_threshold(trace_b, threshold)

    def show(k):
        return "not reached" if k is None else str(k)

    summary = (f"iterations to ||x_n - x*|| <= {threshold:g}: "
               f"{labels[0]}={show(ka)} {labels[1]}={show(kb)}")
    return header, rows, summary, (ka, kb)
