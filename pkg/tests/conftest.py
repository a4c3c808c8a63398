import pytest

from lemtag.corpus import parse_tsv

# Small corpus in the project's annotation style: composite POS/morph on the
# contraction, both strong-punctuation spellings, homographic "la".
FIXTURE_TSV = """\
# fixture corpus
Saint\tsaint\tADJqua\tNOMB.=s|GENRE=m|CAS=r|DEGRE=p
Jaike\tJacques\tNOMpro\tNOMB.=s|GENRE=m|CAS=r
on\ten1+le\tPRE.DETdef\tMORPH=empty+NOMB.=s|GENRE=m|CAS=r
Mont\tmont\tNOMcom\tNOMB.=s|GENRE=m|CAS=r
.\t.\tPONfrt\t_

veez\tvëoir\tVERcjg\tMODE=imp|TEMPS=pst|PERS=5|NOMB.=p
la\til\tPROper\tNOMB.=s|GENRE=f|CAS=r
la\tlà\tADVgen\tMORPH=empty
!\t!\tPUNfrt\t_
"""


@pytest.fixture
def fixture_doc():
    return parse_tsv(FIXTURE_TSV, doc_id="fixture")


REFERENCE_LEMMAS = [
    "saint", "Jacques", "en1", "le", "mont", ".", "vëoir", "il", "là", "!",
    "que1", "que2", "que3", "que4", "cheval", "ne1", "ne2", "faire",
]
REFERENCE_POS = [
    "ADJqua", "NOMpro", "PRE", "DETdef", "NOMcom", "PONfrt", "PUNfrt",
    "VERcjg", "PROper", "ADVgen", "PROrel", "CONsub", "CONcoo", "ADVint",
    "ADVneg",
]
REFERENCE_MORPH = [
    ("CAS", "r"), ("CAS", "s"),
    ("DEGRE", "p"), ("DEGRE", "c"),
    ("GENRE", "m"), ("GENRE", "f"), ("GENRE", "x"),
    ("MODE", "imp"), ("MODE", "ind"),
    ("NOMB", "s"), ("NOMB", "p"),
    ("PERS", "1"), ("PERS", "5"),
    ("TEMPS", "pst"), ("TEMPS", "ipf"),
]


@pytest.fixture
def reference_files(tmp_path):
    lemma_path = tmp_path / "lemmas.txt"
    pos_path = tmp_path / "pos.txt"
    morph_path = tmp_path / "morph.tsv"
    lemma_path.write_text("\n".join(REFERENCE_LEMMAS) + "\n", encoding="utf-8")
    pos_path.write_text("\n".join(REFERENCE_POS) + "\n", encoding="utf-8")
    morph_path.write_text(
        "\n".join(f"{c}\t{v}" for c, v in REFERENCE_MORPH) + "\n", encoding="utf-8"
    )
    return lemma_path, pos_path, morph_path
