"""Input parsing and TSV output helpers."""

from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from motifreg.expression import ExpressionMatrix
from motifreg.sequence import IUPAC, Promoter, PromoterSet


class InputError(ValueError):
    """Malformed or inconsistent user input."""


def parse_fasta(path) -> PromoterSet:
    """Read promoters; the id is the first whitespace-delimited header token."""
    records: list[tuple[str, list[str], int]] = []
    seen: dict[str, int] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith(">"):
                parts = line[1:].split()
                if not parts:
                    raise InputError(f"{path}:{lineno}: empty FASTA header")
                gid = parts[0]
                if gid in seen:
                    raise InputError(f"{path}:{lineno}: duplicate gene id {gid!r} (first at line {seen[gid]})")
                seen[gid] = lineno
                records.append((gid, [], lineno))
                continue
            if not records:
                raise InputError(f"{path}:{lineno}: sequence data before the first header")
            seq = line.upper()
            bad = sorted(set(seq) - IUPAC)
            if bad:
                raise InputError(f"{path}:{lineno}: invalid letters {''.join(bad)!r}")
            records[-1][1].append(seq)
    if not records:
        raise InputError(f"{path}: no FASTA records")
    out = []
    for gid, chunks, lineno in records:
        if not chunks:
            raise InputError(f"{path}:{lineno}: empty sequence for {gid!r}")
        out.append(Promoter(gid, "".join(chunks)))
    return PromoterSet(out)


def parse_expression_tsv(path) -> ExpressionMatrix:
    """Header row of sample labels (first cell names the id column); one row per gene."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh, delimiter="\t"))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if len(rows) < 2:
        raise InputError(f"{path}: need a header and at least one gene row")
    header = rows[0]
    labels = [c.strip() for c in header[1:]]
    if not labels:
        raise InputError(f"{path}: header has no sample columns")
    ids: list[str] = []
    values = np.empty((len(rows) - 1, len(labels)))
    seen = set()
    for i, row in enumerate(rows[1:], 2):
        if len(row) != len(header):
            raise InputError(f"{path}: row {i} has {len(row)} fields, expected {len(header)}")
        gid = row[0].strip()
        if gid in seen:
            raise InputError(f"{path}: row {i}: duplicate gene id {gid!r}")
        seen.add(gid)
        ids.append(gid)
        for j, cell in enumerate(row[1:]):
            cell = cell.strip()
            if not cell:
                raise InputError(f"{path}: row {i}, column {labels[j]!r}: missing value")
            try:
                x = float(cell)
            except ValueError:
                raise InputError(f"{path}: row {i}, column {labels[j]!r}: not a number: {cell!r}") from None
            if not math.isfinite(x):
                raise InputError(f"{path}: row {i}, column {labels[j]!r}: non-finite value")
            values[i - 2, j] = x
    return ExpressionMatrix(values, ids, labels)


def join_promoters(expression: ExpressionMatrix, promoters: PromoterSet) -> PromoterSet:
    """Promoters in expression-row order; both files must list the same genes."""
    expr_ids = set(expression.gene_ids)
    fa_ids = set(promoters.gene_ids)
    missing = sorted(expr_ids - fa_ids)
    extra = sorted(fa_ids - expr_ids)
    if missing or extra:
        msg = []
        if missing:
            msg.append(f"no promoter for: {', '.join(missing[:20])}" + (" ..." if len(missing) > 20 else ""))
        if extra:
            msg.append(f"no expression for: {', '.join(extra[:20])}" + (" ..." if len(extra) > 20 else ""))
        raise InputError("gene sets differ; " + "; ".join(msg))
    return promoters.reorder(expression.gene_ids)


def read_gene_list(path) -> list[str]:
    genes = []
    with open(path) as fh:
        for line in fh:
            tok = line.strip()
            if tok and not tok.startswith("#"):
                genes.append(tok.split()[0])
    return genes


def fmt(x) -> str:
    if x is None:
        return "NA"
    if isinstance(x, (float, np.floating)):
        if math.isnan(x):
            return "NA"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(float(x), ".10g")
    return str(x)


def write_tsv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(fmt(v) for v in row) + "\n")


def read_tsv(path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh, delimiter="\t"))


def write_fasta(path, promoters: PromoterSet, width: int = 70) -> None:
    with open(path, "w") as fh:
        for p in promoters:
            fh.write(f">{p.gene_id}\n")
            for i in range(0, len(p.bases), width):
                fh.write(p.bases[i : i + width] + "\n")


def write_expression_tsv(path, y: ExpressionMatrix) -> None:
    rows = ([gid, *row] for gid, row in zip(y.gene_ids, y.values.tolist()))
    write_tsv(Path(path), ["gene_id", *y.sample_labels], rows)
