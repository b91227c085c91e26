"""CSV ingestion, design diagnostics, and report serialization.

CSV input follows RFC-4180 conventions (UTF-8, header row unless told
otherwise, ``.`` decimal separator); every cell used must parse as a
number, and parse failures name the offending row and column.  Reports
serialize to JSON (full structure) or CSV (one row per subset or per
replication) with shortest-round-trip float encoding, and both formats
round-trip through the provided readers.
"""

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .estimators import Dataset
from .exceptions import EmptyData, MissingColumn, ParseError
from .selection import SelectionReport, round_half_up, selected_coefficients
from .simulation import ReplicationSummary
from .tau import TauEstimate

SCHEMA_VERSION = 1


def load_csv(path, response_column, no_header=False, delimiter=",",
             columns=None, subsample=None, seed=0):
    """Read a numeric design matrix and response from a CSV file.

    Arguments
    ---------
    response_column : header name, or 1-based column position (int or
        digit string).
    no_header : treat the first line as data; columns are auto-named
        x1..xk.
    columns : optional predictor selection (names or 1-based positions);
        other non-response columns are ignored, which is how text-valued
        columns in mixed files are skipped.
    subsample : optional number of rows to keep, drawn without replacement
        using ``seed``.
    """
    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle, delimiter=delimiter))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise EmptyData(f"{path}: no rows")

    if no_header:
        width = len(rows[0])
        names = [f"x{i}" for i in range(1, width + 1)]
        data_rows = rows
        first_line = 1
    else:
        names = [c.strip() for c in rows[0]]
        data_rows = rows[1:]
        first_line = 2
    if not data_rows:
        raise EmptyData(f"{path}: header only, no data rows")

    def resolve(col, what):
        if isinstance(col, int) or (isinstance(col, str) and col.strip().isdigit()):
            pos = int(col)
            if not 1 <= pos <= len(names):
                raise MissingColumn(f"{what} position {pos} outside [1, {len(names)}]")
            return pos - 1
        try:
            return names.index(str(col).strip())
        except ValueError:
            raise MissingColumn(f"{what} {col!r} not found among {names}") from None

    y_pos = resolve(response_column, "response column")
    if columns is not None:
        x_pos = [resolve(c, "predictor column") for c in columns]
        if y_pos in x_pos:
            raise MissingColumn("response column listed among predictors")
    else:
        x_pos = [i for i in range(len(names)) if i != y_pos]
    if not x_pos:
        raise EmptyData(f"{path}: no predictor columns left")

    def parse(cell, line, col_idx):
        try:
            return float(cell)
        except ValueError:
            raise ParseError(line, col_idx + 1, f"not a number: {cell!r}") from None

    x = np.empty((len(data_rows), len(x_pos)))
    y = np.empty(len(data_rows))
    for i, row in enumerate(data_rows):
        line = first_line + i
        if len(row) != len(names):
            raise ParseError(line, len(row) + 1,
                             f"expected {len(names)} cells, got {len(row)}")
        y[i] = parse(row[y_pos], line, y_pos)
        for j, pos in enumerate(x_pos):
            x[i, j] = parse(row[pos], line, pos)

    if subsample is not None:
        if not 1 <= subsample <= len(data_rows):
            raise ValueError(f"subsample must lie in [1, {len(data_rows)}]")
        keep = np.sort(
            np.random.default_rng(seed).choice(len(data_rows), subsample, replace=False)
        )
        x, y = x[keep], y[keep]

    return Dataset(x, y, column_names=tuple(names[pos] for pos in x_pos))


@dataclass(frozen=True)
class Diagnostics:
    """Design-conditioning summary used as a pre-flight check.

    ``eig_min`` / ``eig_max`` bound the spectrum of the scaled Gram matrix
    ``X'X / n`` (a well-posed design keeps them away from 0 and infinity);
    the row-norm maxima flag observations large enough to distort a
    growing-dimension analysis; ``split_ratio_warning`` is set when the
    requested split would not leave the validation side dominant.
    """

    eig_min: float
    eig_max: float
    max_row_norm2: float
    max_row_norm_inf: float
    condition_number: float
    split_ratio_warning: bool
    n: int
    p: int
    s: float


def diagnose(data, s=0.9):
    """Compute design diagnostics; reports, never rejects."""
    gram = data.x.T @ data.x / data.n
    eigs = np.linalg.eigvalsh(gram)
    eig_min, eig_max = float(eigs[0]), float(eigs[-1])
    n_val = round_half_up(float(s) * data.n)
    return Diagnostics(
        eig_min=eig_min,
        eig_max=eig_max,
        max_row_norm2=float(np.linalg.norm(data.x, axis=1).max()),
        max_row_norm_inf=float(np.abs(data.x).max()),
        condition_number=float(eig_max / eig_min) if eig_min > 0 else float("inf"),
        split_ratio_warning=bool(n_val <= data.n - n_val),
        n=data.n,
        p=data.p,
        s=float(s),
    )


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _num(x):
    if x is None:
        return None
    return float(x)


def _fit_dict(fit):
    return {
        "beta": [float(b) for b in fit.beta],
        "intercept": _num(fit.intercept),
        "tau": float(fit.tau),
        "objective": float(fit.objective),
        "iterations": int(fit.iterations),
        "converged": bool(fit.converged),
        "method": fit.method,
        "regularized": bool(fit.regularized),
        "n_active": len(fit.active) if fit.active is not None
                    else int(np.count_nonzero(fit.beta)),
    }


def selection_to_dict(report):
    chosen_fit = report.fits[report.chosen]
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "selection",
        "criterion": report.criterion,
        "method": report.method,
        "tau": float(report.tau),
        "chosen": report.chosen.label(),
        "ties": [m.label() for m in report.ties],
        "coefficients": [float(b) for b in selected_coefficients(report)],
        "intercept": _num(chosen_fit.intercept),
        "split": {
            "seed": report.split.seed,
            "n_train": report.split.n_train,
            "n_validation": report.split.n_validation,
            "train_indices": list(report.split.train_indices),
            "validation_indices": list(report.split.validation_indices),
        },
        "subsets": [
            {"subset": m.label(), "size": m.size, "score": float(v),
             **_fit_dict(report.fits[m])}
            for m, v in report.scores.items()
        ],
        "skipped": [
            {"subset": m.label(), "error": msg} for m, msg in report.skipped.items()
        ],
    }


def summary_to_dict(summary):
    cfg = summary.config
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "simulation",
        "config": {
            "n": cfg.n,
            "p": cfg.p,
            "beta_star": [float(b) for b in cfg.beta_star],
            "error": str(cfg.error.value),
            "s": float(cfg.s),
            "tau": cfg.tau if isinstance(cfg.tau, str) else float(cfg.tau),
            "methods": list(cfg.methods),
            "penalized": cfg.penalized,
            "replications": cfg.replications,
            "master_seed": cfg.master_seed,
            "covariate_law": cfg.covariate_law,
            "zero_noise": cfg.zero_noise,
        },
        "tau": float(summary.tau),
        "methods": {
            name: {
                "mse": _num(m.mse),
                "coef_mse": _num(m.coef_mse),
                "tpr": _num(m.tpr),
                "tnr": _num(m.tnr),
                "n_ok": m.n_ok,
                "n_failed": m.n_failed,
            }
            for name, m in summary.methods.items()
        },
        "records": [dict(r) for r in summary.records],
        "failures": [dict(f) for f in summary.failures],
    }


def tau_to_dict(estimate):
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "tau",
        "tau": float(estimate.tau),
        "stage": estimate.stage,
        "n_used": estimate.n_used,
        "tau_raw": _num(estimate.tau_raw),
        "tau_initial": _num(estimate.tau_initial),
    }


def diagnostics_to_dict(diag):
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "diagnostics",
        "eig_min": diag.eig_min,
        "eig_max": diag.eig_max,
        "max_row_norm2": diag.max_row_norm2,
        "max_row_norm_inf": diag.max_row_norm_inf,
        "condition_number": diag.condition_number,
        "split_ratio_warning": diag.split_ratio_warning,
        "n": diag.n,
        "p": diag.p,
        "s": diag.s,
    }


def to_dict(report):
    """Structured-dict view of any reportable object."""
    if isinstance(report, SelectionReport):
        return selection_to_dict(report)
    if isinstance(report, ReplicationSummary):
        return summary_to_dict(report)
    if isinstance(report, TauEstimate):
        return tau_to_dict(report)
    if isinstance(report, Diagnostics):
        return diagnostics_to_dict(report)
    if isinstance(report, dict):
        return report
    raise TypeError(f"cannot serialize {type(report).__name__}")


def _csv_cell(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)  # shortest decimal that round-trips
    if value is None:
        return ""
    return str(value)


def _csv_rows(report):
    doc = to_dict(report)
    kind = doc.get("kind")
    if kind == "selection":
        return [
            {"subset": row["subset"], "size": row["size"], "score": row["score"],
             "chosen": row["subset"] == doc["chosen"],
             "tie": row["subset"] in doc["ties"],
             "converged": row["converged"], "iterations": row["iterations"],
             "n_active": row["n_active"]}
            for row in doc["subsets"]
        ]
    if kind == "simulation":
        return [dict(r) for r in doc["records"]]
    if kind == "tau":
        return [{k: v for k, v in doc.items() if k not in ("schema_version", "kind")}]
    if kind == "diagnostics":
        return [{k: v for k, v in doc.items() if k not in ("schema_version", "kind")}]
    raise TypeError(f"no CSV layout for kind {kind!r}")


def render_report(report, format="json"):
    """Serialize a report to a JSON or CSV string."""
    if format == "json":
        return json.dumps(to_dict(report), indent=2) + "\n"
    if format == "csv":
        rows = _csv_rows(report)
        if not rows:
            return ""
        header = list(rows[0].keys())
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_cell(row.get(col)) for col in header])
        return buf.getvalue()
    raise ValueError(f"unknown format {format!r}")


def write_report(report, format="json", path=None):
    """Write a report to ``path`` (or return the rendered string)."""
    text = render_report(report, format)
    if path is None:
        return text
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)
    return None


def _parse_csv_value(cell):
    if cell == "":
        return None
    if cell == "true":
        return True
    if cell == "false":
        return False
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        return float(cell)
    except ValueError:
        return cell


def read_report(path, format="json"):
    """Read back a written report: a dict for JSON, a row list for CSV."""
    with open(path, encoding="utf-8") as handle:
        if format == "json":
            return json.load(handle)
        if format == "csv":
            reader = csv.reader(handle)
            rows = list(reader)
            if not rows:
                return []
            header = rows[0]
            return [
                {name: _parse_csv_value(cell) for name, cell in zip(header, row)}
                for row in rows[1:]
            ]
    raise ValueError(f"unknown format {format!r}")
