# test_output.py 运行报告与 HTML 导出
from dna_netstack.exporter import md_to_html, report_title
from dna_netstack.output import save_markdown

ROWS = [
    {"hop": 1, "src": "0001", "dst": "0002", "frames_sent": 4, "corrupted": 0, "corrected": 0, "dropped": 0},
    {"hop": 2, "src": "0002", "dst": "0003", "frames_sent": 4, "corrupted": 3, "corrected": 1, "dropped": 2},
]


def test_report_sections(tmp_path):
    md = save_markdown(str(tmp_path / "run.md"), "dna-netstack send", ["seed=1"],
                       hop_rows=ROWS, summary={"recovered": "true"}, chain_lines=["winner length=4"])
    text = open(md, encoding="utf-8").read()
    assert text.startswith("# dna-netstack send\n")
    for section in ("## Settings", "## Result", "## Per-hop delivery", "## Ledger"):
        assert section in text
    assert "| 2 | 0002 | 0003 | 4 | 3 | 1 | 2 |" in text


def test_html_title_and_loss_cells(tmp_path):
    md = save_markdown(str(tmp_path / "run.md"), "dna-netstack <demo>", ["seed=1"], hop_rows=ROWS)
    html_path = md_to_html(md)
    assert html_path.endswith("run.html")
    doc = open(html_path, encoding="utf-8").read()
    assert "<title>dna-netstack &lt;demo&gt;</title>" in doc
    assert doc.count('class="loss"') == 2
    assert '<span class="loss">3</span>' in doc
    assert '<span class="loss">2</span>' in doc


def test_report_title_fallback():
    assert report_title("## only sections\n", "run.md") == "run.md"
