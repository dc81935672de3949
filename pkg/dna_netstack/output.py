# -*- coding: utf-8 -*-
import csv, io, json, os
from typing import Any, Dict, Iterable, List, Optional

HOP_COLUMNS = ["hop", "src", "dst", "frames_sent", "corrupted", "corrected", "dropped"]
MINING_COLUMNS = ["index", "difficulty", "attempts", "wall_ms"]


def _ensure_parent(path: str):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)


def hop_csv(rows: Iterable[Dict[str, Any]]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=HOP_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: r[k] for k in HOP_COLUMNS})
    return buf.getvalue()


def save_hop_csv(rows: Iterable[Dict[str, Any]], path: str) -> str:
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(hop_csv(rows))
    return path


def append_mining_csv(rows: Iterable[Dict[str, Any]], path: str) -> str:
    """追加挖矿统计；文件不存在或为空时先写表头。"""
    _ensure_parent(path)
    fresh = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", encoding="utf-8", newline="") as f:
        w = csv.DictWriter(f, fieldnames=MINING_COLUMNS, lineterminator="\n")
        if fresh:
            w.writeheader()
        for r in rows:
            w.writerow({k: r[k] for k in MINING_COLUMNS})
    return path


def save_json(summary: Dict[str, Any], path: str) -> str:
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(summary, f, ensure_ascii=False, indent=2, sort_keys=True)
    return path


def _md_table(rows: List[Dict[str, Any]], columns: List[str]) -> List[str]:
    lines = ["| " + " | ".join(columns) + " |", "|" + "---|" * len(columns)]
    for r in rows:
        lines.append("| " + " | ".join(str(r[c]) for c in columns) + " |")
    return lines


def save_markdown(path: str, title: str, settings: List[str],
                  hop_rows: Optional[List[Dict[str, Any]]] = None,
                  summary: Optional[Dict[str, Any]] = None,
                  chain_lines: Optional[List[str]] = None) -> str:
    """运行报告：设置、结果摘要、逐跳统计、账本事件。"""
    _ensure_parent(path)
    lines = [f"# {title}", "", "## Settings", "", "```"]
    lines.extend(settings)
    lines.extend(["```", ""])
    if summary:
        lines.extend(["## Result", ""])
        for k in sorted(summary):
            lines.append(f"- {k}: {summary[k]}")
        lines.append("")
    if hop_rows:
        lines.extend(["## Per-hop delivery", ""])
        lines.extend(_md_table(hop_rows, HOP_COLUMNS))
        lines.append("")
    if chain_lines:
        lines.extend(["## Ledger", ""])
        lines.extend(f"- {s}" for s in chain_lines)
        lines.append("")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines))
    return path
