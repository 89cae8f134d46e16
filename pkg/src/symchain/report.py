"""Render evaluation reports as accuracy tables and length histograms.

Output is text or CSV; plotting is left to downstream tools.
"""

from __future__ import annotations

import io

from .harness import Report


def _depths(report: Report) -> list[int]:
    seen: set[int] = set()
    for pair in report.pairs.values():
        seen.update(int(d) for d in pair["per_depth"])
    return sorted(seen)


def accuracy_table(report: Report) -> str:
    """Per-depth `chain/answer` percentages, one column per strategy pair."""
    pairs = sorted(report.pairs)
    depths = _depths(report)
    header = ["depth"] + pairs
    rows = [header]
    for depth in depths:
        row = [str(depth)]
        for key in pairs:
            entry = report.pairs[key]["per_depth"].get(str(depth))
            if entry is None:
                row.append("-")
            else:
                row.append(f"{entry['chain_accuracy'] * 100:.1f}/{entry['answer_accuracy'] * 100:.1f}")
        rows.append(row)
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    if report.meta.get("incomplete"):
        lines.append("(incomplete run: " + report.meta.get("transport_error", "transport failure") + ")")
    return "\n".join(lines)


def accuracy_csv(report: Report) -> str:
    out = io.StringIO()
    out.write("pair,depth,n,chain_accuracy,answer_accuracy,capped,max_calls\n")
    for key in sorted(report.pairs):
        per_depth = report.pairs[key]["per_depth"]
        for depth in sorted(per_depth, key=int):
            e = per_depth[depth]
            out.write(
                f"{key},{depth},{e['n']},{e['chain_accuracy']:.6f},"
                f"{e['answer_accuracy']:.6f},{e['capped']},{e['max_calls']}\n"
            )
    return out.getvalue()


def lengths_csv(report: Report) -> str:
    """Chain-length distribution (characters of the canonical rendering)."""
    out = io.StringIO()
    out.write("pair,depth,chain_chars,count\n")
    for key in sorted(report.pairs):
        per_depth = report.pairs[key]["per_depth"]
        for depth in sorted(per_depth, key=int):
            hist = per_depth[depth]["chain_length_hist"]
            for length in sorted(hist, key=int):
                out.write(f"{key},{depth},{length},{hist[length]}\n")
    return out.getvalue()


def error_summary(report: Report) -> str:
    out = io.StringIO()
    out.write("pair,depth,error_class,count\n")
    for key in sorted(report.pairs):
        per_depth = report.pairs[key]["per_depth"]
        for depth in sorted(per_depth, key=int):
            for cls, count in sorted(per_depth[depth]["errors"].items()):
                out.write(f"{key},{depth},{cls},{count}\n")
    return out.getvalue()
