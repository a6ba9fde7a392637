"""Service for CSV export/import of iteration traces and bound sequences."""

import csv
import io

from proxnet.core.exceptions import ConfigException
from proxnet.services.engine import BoundSequences, IterationRow, IterationTrace, RunStatus

TRACE_COLUMNS = ["n", "lambda", "step_norm", "residual", "x_norm", "dist_ref"]
COUPLING_COLUMNS = ["coupling_gap", "coupling_bound"]
STATUS_PREFIX = "# status="


def _fmt(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def _parse_float(raw: str | None) -> float | None:
    if raw is None or raw == "":
        return None
    return float(raw)


class TraceCSVService:
    """Service for writing and reading iteration traces as CSV."""

    @staticmethod
    def export_trace(trace: IterationTrace) -> str:
        """
        Export a trace to CSV.

        Coupling columns are appended only when some row carries them. The terminal status is a
        trailing comment line.

        Args:
            trace: Recorded iteration trace

        Returns:
            CSV string
        """
        with_coupling = any(row.coupling_gap is not None for row in trace.rows)
        fieldnames = TRACE_COLUMNS + (COUPLING_COLUMNS if with_coupling else [])

        output = io.StringIO()
        writer = csv.DictWriter(output, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()

        for row in trace.rows:
            record = {
                "n": str(row.n),
                "lambda": _fmt(row.lam),
                "step_norm": _fmt(row.step_norm),
                "residual": _fmt(row.residual),
                "x_norm": _fmt(row.x_norm),
                "dist_ref": _fmt(row.dist_ref),
            }
            if with_coupling:
                record["coupling_gap"] = _fmt(row.coupling_gap)
                record["coupling_bound"] = _fmt(row.coupling_bound)
            writer.writerow(record)

        if trace.status is not None:
            output.write(f"{STATUS_PREFIX}{trace.status.value}\n")
        return output.getvalue()

    @staticmethod
    def parse_trace(csv_content: str) -> IterationTrace:
        """
        Parse CSV content back into a trace.

        Args:
            csv_content: CSV string as written by export_trace

        Returns:
            IterationTrace with rows and status

        Raises:
            ConfigException: If the header or a row is malformed
        """
        lines = csv_content.splitlines()
        status: RunStatus | None = None
        body = []
        for line in lines:
            if line.startswith(STATUS_PREFIX):
                raw_status = line[len(STATUS_PREFIX) :].strip()
                try:
                    status = RunStatus(raw_status)
                except ValueError as e:
                    raise ConfigException(
                        f"Unknown run status: {raw_status}", details={"status": raw_status}
                    ) from e
            elif line.strip():
                body.append(line)

        reader = csv.DictReader(io.StringIO("\n".join(body)))
        if reader.fieldnames is None:
            raise ConfigException("Trace CSV is empty")
        missing = [c for c in TRACE_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise ConfigException("Trace CSV header is incomplete", details={"missing": missing})

        trace = IterationTrace()
        for row_num, row in enumerate(reader, start=2):
            try:
                step_norm = _parse_float(row["step_norm"])
                residual = _parse_float(row["residual"])
                x_norm = _parse_float(row["x_norm"])
                lam = _parse_float(row["lambda"])
                if step_norm is None or residual is None or x_norm is None or lam is None:
                    raise ValueError("empty required field")
                trace.append(
                    IterationRow(
                        n=int(row["n"]),
                        lam=lam,
                        step_norm=step_norm,
                        residual=residual,
                        x_norm=x_norm,
                        dist_ref=_parse_float(row["dist_ref"]),
                        coupling_gap=_parse_float(row.get("coupling_gap")),
                        coupling_bound=_parse_float(row.get("coupling_bound")),
                    )
                )
            except (TypeError, ValueError) as e:
                raise ConfigException(
                    f"Row {row_num}: {str(e)}", details={"row": row_num}
                ) from e

        if status is not None:
            trace.set_status(status)
        return trace

    @staticmethod
    def export_bounds(bounds: BoundSequences) -> str:
        """
        Export bound sequences to CSV: n, then chi_i, zeta_i, tau_i, theta_i per layer.
        """
        depth = int(bounds.chi.shape[0])
        fieldnames = ["n"]
        for i in range(1, depth + 1):
            fieldnames += [f"chi_{i}", f"zeta_{i}", f"tau_{i}", f"theta_{i}"]

        output = io.StringIO()
        writer = csv.writer(output, lineterminator="\n")
        writer.writerow(fieldnames)
        for n in range(bounds.horizon):
            row = [str(n)]
            for i in range(depth):
                row += [
                    _fmt(bounds.chi[i, n]),
                    _fmt(bounds.zeta[i, n]),
                    _fmt(bounds.tau[i, n]),
                    _fmt(bounds.theta[i, n]),
                ]
            writer.writerow(row)
        return output.getvalue()
