"""Plain-text formats for patterns, rasters, traces and reports.

Pattern file::

    # wavesplit coupling pattern
    # L = 6
    # J = 1.0
    # theta = 0.7853981633974483
    site,B_n
    1,0.0
    ...
    bond,J_n
    1,0.5998577...
    ...

Tables are CSV with a fixed header row. Each table may be accompanied by a
JSON sidecar ``<name>.json`` holding run metadata. Floats are written with
``repr`` so they read back bit-exactly.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .lattice import ChainSpec, CouplingPattern

PATTERN_MAGIC = "# wavesplit coupling pattern"
SITE_HEADER = ("site", "B_n")
BOND_HEADER = ("bond", "J_n")
RASTER_COLUMNS = ("t", "site", "value")
CARPET_COLUMNS = ("t", "site", "mean_n", "mean_n2")
TRACE_COLUMNS = ("iteration", "residual", "step")
REPORT_COLUMNS = ("pair_left", "pair_right", "concurrence", "bell_fidelity")
SWEEP_COLUMNS = ("strength", "mean", "stderr", "samples", "seed")


def pattern_hash(pattern: CouplingPattern) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(pattern.couplings, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(pattern.fields, dtype="<f8").tobytes())
    return h.hexdigest()[:16]


def format_pattern(pattern: CouplingPattern, spec: ChainSpec | None = None) -> str:
    lines = [PATTERN_MAGIC, f"# L = {pattern.length}"]
    if spec is not None:
        lines += [f"# J = {spec.energy_unit!r}", f"# theta = {spec.theta!r}"]
    lines.append(",".join(SITE_HEADER))
    lines += [f"{n},{float(b)!r}" for n, b in enumerate(pattern.fields, start=1)]
    lines.append(",".join(BOND_HEADER))
    lines += [f"{n},{float(j)!r}" for n, j in enumerate(pattern.couplings, start=1)]
    return "\n".join(lines) + "\n"


def parse_pattern(text: str) -> tuple[CouplingPattern, ChainSpec | None]:
    """Inverse of :func:`format_pattern`; the chain spec is ``None`` if absent."""
    header, sites, bonds = {}, {}, {}
    target = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            if sep:
                header[key.strip()] = value.strip()
            continue
        cells = tuple(c.strip() for c in line.split(","))
        if cells == SITE_HEADER:
            target = sites
        elif cells == BOND_HEADER:
            target = bonds
        elif target is None or len(cells) != 2:
            raise ValueError(f"malformed pattern line: {raw!r}")
        else:
            target[int(cells[0])] = float(cells[1])
    L = len(sites)
    if sorted(sites) != list(range(1, L + 1)) or sorted(bonds) != list(range(1, L)):
        raise ValueError("pattern file must list sites 1..L and bonds 1..L-1")
    if "L" in header and int(header["L"]) != L:
        raise ValueError(f"header says L = {header['L']} but {L} sites are listed")
    pattern = CouplingPattern([bonds[n] for n in range(1, L)], [sites[n] for n in range(1, L + 1)])
    spec = None
    if "J" in header and "theta" in header:
        spec = ChainSpec(L, float(header["J"]), float(header["theta"]))
    return pattern, spec


def write_pattern(path, pattern: CouplingPattern, spec: ChainSpec | None = None) -> None:
    Path(path).write_text(format_pattern(pattern, spec))


def read_pattern(path) -> tuple[CouplingPattern, ChainSpec | None]:
    return parse_pattern(Path(path).read_text())


def write_table(path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


def read_table(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def write_sidecar(table_path, metadata: dict) -> Path:
    path = Path(str(table_path) + ".json")
    path.write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n")
    return path


def chain_metadata(pattern: CouplingPattern, spec: ChainSpec | None) -> dict:
    meta = {"L": pattern.length, "pattern_hash": pattern_hash(pattern)}
    if spec is not None:
        meta.update(J=spec.energy_unit, theta=spec.theta)
    return meta


def raster_rows(series, with_square: bool):
    for i, t in enumerate(series.times):
        for j in range(series.mean_n.shape[1]):
            if with_square:
                yield (float(t), j + 1, float(series.mean_n[i, j]), float(series.mean_n2[i, j]))
            else:
                yield (float(t), j + 1, float(series.mean_n[i, j]))


def write_raster(path, series, metadata: dict) -> None:
    """Single-particle raster ``t, site, value``."""
    write_table(path, RASTER_COLUMNS, raster_rows(series, False))
    write_sidecar(path, metadata)


def write_carpet(path, series, metadata: dict, sites=None) -> None:
    """Many-body raster ``t, site, mean_n, mean_n2``, optionally restricted to ``sites``."""
    rows = raster_rows(series, True)
    if sites is not None:
        keep = set(sites)
        rows = (r for r in rows if r[1] in keep)
    write_table(path, CARPET_COLUMNS, rows)
    write_sidecar(path, metadata)


def write_trace(path, trace) -> None:
    write_table(path, TRACE_COLUMNS, ((r.iteration, float(r.residual), float(r.step)) for r in trace))


def write_report(path, report, metadata: dict) -> None:
    rows = (
        (left, right, float(c), float(f))
        for (left, right), c, f in zip(report.pairs, report.concurrences, report.bell_fidelities)
    )
    write_table(path, REPORT_COLUMNS, rows)
    write_sidecar(path, metadata)


def write_sweep(path, result, metadata: dict) -> None:
    rows = ((p.strength, p.mean, p.stderr, p.samples, result.seed) for p in result.points)
    write_table(path, SWEEP_COLUMNS, rows)
    write_sidecar(path, metadata)
