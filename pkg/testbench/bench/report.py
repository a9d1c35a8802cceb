#!/usr/bin/env python3
"""
CSV reporting for sweeps and training traces.

Every file is UTF-8 with LF line endings and fixed 6-decimal floats, so the same
report always serializes to the same bytes.
"""

import csv
import logging
import os
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence

from testbench.errors import ConfigError

logger = logging.getLogger(__name__)

REPORT_HEADER = ['snr_db', 'method', 'nmse_db', 'realizations', 'seed', 'wall_time_s']


@dataclass(frozen=True)
class NmseRow:
    snr_db: float
    method: str
    nmse_db: float
    realizations: int
    seed: int
    wall_time_s: float = 0.0


@dataclass
class NmseReport:
    """One row per (snr, method)."""

    rows: List[NmseRow] = field(default_factory=list)

    def sorted(self) -> "NmseReport":
        return NmseReport(rows=sorted(self.rows, key=lambda r: (r.snr_db, r.method)))

    def lookup(self, snr_db: float, method: str) -> NmseRow:
        for row in self.rows:
            if row.snr_db == snr_db and row.method == method:
                return row
        raise KeyError((snr_db, method))

    def methods(self) -> List[str]:
        return sorted({r.method for r in self.rows})

    def snrs(self) -> List[float]:
        return sorted({r.snr_db for r in self.rows})

    def to_dicts(self) -> List[dict]:
        return [dict(zip(REPORT_HEADER, (r.snr_db, r.method, r.nmse_db, r.realizations,
                                         r.seed, r.wall_time_s)))
                for r in self.rows]


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def _ensure_parent(path: str) -> None:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def _write_rows(path: str, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    _ensure_parent(path)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(rows)


def write_report(report: NmseReport, path: str) -> None:
    """Write rows sorted by (snr, method)."""
    rows = [(_fmt(r.snr_db), r.method, _fmt(r.nmse_db), str(r.realizations), str(r.seed),
             _fmt(r.wall_time_s))
            for r in report.sorted().rows]
    _write_rows(path, REPORT_HEADER, rows)
    logger.info("Wrote %d report rows to %s", len(rows), path)


def read_report(path: str) -> NmseReport:
    try:
        with open(path, encoding='utf-8', newline='') as f:
            reader = csv.reader(f)
            header = next(reader, None)
            if header != REPORT_HEADER:
                raise ConfigError(f"{path} is not an NMSE report (header {header})")
            rows = [NmseRow(snr_db=float(snr), method=method, nmse_db=float(nmse),
                            realizations=int(reals), seed=int(seed), wall_time_s=float(wall))
                    for snr, method, nmse, reals, seed, wall in reader]
    except ConfigError:
        raise
    except (OSError, ValueError) as e:
        raise ConfigError(f"Cannot read report {path}: {e}") from e
    return NmseReport(rows=rows)


def write_loss_traces(path: str, traces: Sequence[Sequence[float]]) -> None:
    """Stage-1 traces, one per antenna: columns antenna, epoch, loss."""
    rows = [(str(m), str(epoch), _fmt(loss))
            for m, trace in enumerate(traces)
            for epoch, loss in enumerate(trace)]
    _write_rows(path, ['antenna', 'epoch', 'loss'], rows)


def write_fit_trace(path: str, trace: Sequence[float]) -> None:
    """DIP fit trace: columns iteration, loss."""
    _write_rows(path, ['iteration', 'loss'],
                [(str(i), _fmt(loss)) for i, loss in enumerate(trace)])
