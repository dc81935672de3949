# test_fasta.py 类 FASTA 文件读写
import pytest

from dna_netstack.errors import FastaError
from dna_netstack.fasta import FastaRecord, format_fasta, parse_fasta, read_fasta, write_fasta


def test_parse_multiline_records():
    text = ">frame 0 ecc=triple\nACGT\nAC\n\n>frame 1\nGGGG\n"
    recs = parse_fasta(text)
    assert recs == [FastaRecord("frame 0 ecc=triple", "ACGTAC"), FastaRecord("frame 1", "GGGG")]
    assert recs[0].fields == ["frame", "0", "ecc=triple"]


def test_format_wraps_at_80():
    text = format_fasta([FastaRecord("x", "A" * 170)])
    lines = text.splitlines()
    assert lines[0] == ">x"
    assert [len(l) for l in lines[1:]] == [80, 80, 10]
    assert parse_fasta(text)[0].sequence == "A" * 170


def test_bad_character_position():
    with pytest.raises(FastaError) as ei:
        parse_fasta(">a\nACGT\nACnT\n", path="f.fa")
    e = ei.value
    assert (e.line, e.column) == (3, 3)
    assert str(e).startswith("f.fa:3:3:")


def test_long_line_rejected():
    with pytest.raises(FastaError) as ei:
        parse_fasta(">a\n" + "A" * 81 + "\n")
    assert ei.value.line == 2


def test_sequence_before_header_rejected():
    with pytest.raises(FastaError) as ei:
        parse_fasta("ACGT\n>a\n")
    assert (ei.value.line, ei.value.column) == (1, 1)


def test_file_round_trip(tmp_path):
    recs = [FastaRecord("block 0 difficulty=1", "ACGT" * 30), FastaRecord("block 1", "")]
    path = write_fasta(recs, str(tmp_path / "sub" / "c.fa"))
    assert read_fasta(path) == recs
