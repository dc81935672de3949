# -*- coding: utf-8 -*-
import html
import os
from typing import Optional
from markdown import markdown

_BASE_CSS = """
body{font-family:DejaVu Sans, Arial, Helvetica, sans-serif;font-size:12pt;line-height:1.5;color:#111;max-width:60em;margin:auto;}
h1,h2,h3{color:#111;margin:8pt 0 6pt 0;}
code,pre{font-family:DejaVu Sans Mono, Menlo, Consolas, monospace;}
pre{background:#f6f8fa;padding:8pt;border-radius:6pt;white-space:pre-wrap;word-break:break-all;}
table{border-collapse:collapse;margin:6pt 0;}
th,td{border:1pt solid #ddd;padding:3pt 8pt;text-align:right;}
th{background:#f6f8fa;}
.loss{color:#b00020;font-weight:bold;}
hr{border:0;border-top:1pt solid #ddd;margin:10pt 0;}
"""

# 逐跳统计表中非零即表示有损伤的列
_LOSS_COLUMNS = ("corrupted", "dropped")


def report_title(md: str, fallback: str) -> str:
    for line in md.splitlines():
        if line.startswith("# "):
            return line[2:].strip()
    return fallback


def _mark_losses(md: str) -> str:
    """把逐跳表里 corrupted / dropped 非零的格子包上 loss 样式。"""
    out, header = [], None
    for line in md.splitlines():
        if not line.startswith("|"):
            header = None
            out.append(line)
            continue
        cells = [c.strip() for c in line.strip("|").split("|")]
        if header is None:
            header = cells
        elif not set("".join(cells)) <= set("-: "):
            for i, name in enumerate(header):
                if name in _LOSS_COLUMNS and i < len(cells) and cells[i] not in ("", "0"):
                    cells[i] = f'<span class="loss">{cells[i]}</span>'
            line = "| " + " | ".join(cells) + " |"
        out.append(line)
    return "\n".join(out)


def md_to_html(md_path: str, html_path: Optional[str] = None) -> str:
    """
    将 Markdown 运行报告转换为独立的 HTML 文件：标题取报告的一级标题，
    逐跳表中出现损伤/丢弃的格子高亮。返回生成的 html 路径
    """
    if not os.path.exists(md_path):
        raise FileNotFoundError(md_path)
    if not html_path:
        base, _ = os.path.splitext(md_path)
        html_path = base + ".html"
    with open(md_path, "r", encoding="utf-8") as f:
        md = f.read()

    title = html.escape(report_title(md, os.path.basename(md_path)))
    html_body = markdown(_mark_losses(md), extensions=["extra", "toc", "tables", "fenced_code"])
    html_doc = f"""<html><head><meta charset="utf-8"><title>{title}</title><style>{_BASE_CSS}</style></head>
<body>{html_body}</body></html>
"""
    with open(html_path, "w", encoding="utf-8") as out:
        out.write(html_doc)
    return html_path
