"""Write the shipped toy corpus (src/eblgen/data/toy.corpus)."""
import argparse
from pathlib import Path

from eblgen.chart import CorpusItem
from eblgen.corpus import NP, clause, format_corpus
from eblgen.mrs import parse_mrs

SANDY = ("TOP=h1 INDEX=e2 [SandyRel h4 INST=x5] [GiveRel h1 EVENT=e2 ACT=x5 PREPARG=x6 UND=x7] "
        "[TempOver h1 EVENT=e2] [Some h9 BV=x7 RESTR=h10 SCOPE=h11] [ChairRel h10 INST=x7] "
        "[To h12 ARG=v13 PREP=x6] [KimRel h14 INST=x6]")


def name(p):
    return NP(p)


def a(noun, *adjs):
    return NP(noun, "Some", adjs)


def the(noun, *adjs):
    return NP(noun, "Def", adjs)


SENTENCES = [
    ("sandy-sleeps", clause("SleepRel", name("SandyRel"))),
    ("the-dog-arrives", clause("ArriveRel", the("DogRel"))),
    ("a-big-cat-sleeps", clause("SleepRel", a("CatRel", "BigRel"))),
    ("kim-reads-a-book", clause("ReadRel", name("KimRel"), a("BookRel"))),
    ("the-man-sees-lee", clause("SeeRel", the("ManRel"), name("LeeRel"))),
    ("pat-likes-robin", clause("LikeRel", name("PatRel"), name("RobinRel"))),
    ("a-woman-reads-the-letter", clause("ReadRel", a("WomanRel"), the("LetterRel"))),
    ("chris-sees-an-old-dog", clause("SeeRel", name("ChrisRel"), a("DogRel", "OldRel"))),
    ("noam-likes-the-red-sofa", clause("LikeRel", name("NoamRel"), the("SofaRel", "RedRel"))),
    ("kim-gives-a-book-to-peter", clause("GiveRel", name("KimRel"), a("BookRel"), name("PeterRel"))),
    ("lee-sends-a-letter-to-the-man",
     clause("SendRel", name("LeeRel"), a("LetterRel"), the("ManRel"))),
    ("the-woman-lends-a-gift-to-pat",
     clause("LendRel", the("WomanRel"), a("GiftRel"), name("PatRel"))),
    ("a-man-offers-the-table-to-a-dog",
     clause("OfferRel", a("ManRel"), the("TableRel"), a("DogRel"))),
    ("robin-donates-a-sofa-to-chris",
     clause("DonateRel", name("RobinRel"), a("SofaRel"), name("ChrisRel"))),
    ("sandy-gives-a-red-book-to-kim",
     clause("GiveRel", name("SandyRel"), a("BookRel", "RedRel"), name("KimRel"))),
    ("the-old-man-sleeps", clause("SleepRel", the("ManRel", "OldRel"))),
    ("pat-reads-a-big-red-book", clause("ReadRel", name("PatRel"), a("BookRel", "BigRel", "RedRel"))),
    ("a-cat-likes-the-dog", clause("LikeRel", a("CatRel"), the("DogRel"))),
    ("noam-arrives", clause("ArriveRel", name("NoamRel"))),
    ("the-big-dog-sees-a-cat", clause("SeeRel", the("DogRel", "BigRel"), a("CatRel"))),
    ("chris-offers-an-old-letter-to-lee",
     clause("OfferRel", name("ChrisRel"), a("LetterRel", "OldRel"), name("LeeRel"))),
    ("a-woman-sends-the-gift-to-the-man",
     clause("SendRel", a("WomanRel"), the("GiftRel"), the("ManRel"))),
    ("kim-lends-a-chair-to-sandy",
     clause("LendRel", name("KimRel"), a("ChairRel"), name("SandyRel"))),
    ("the-dog-likes-lee", clause("LikeRel", the("DogRel"), name("LeeRel"))),
    ("peter-gives-the-big-table-to-a-woman",
     clause("GiveRel", name("PeterRel"), the("TableRel", "BigRel"), a("WomanRel"))),
    ("robin-sees-the-red-chair", clause("SeeRel", name("RobinRel"), the("ChairRel", "RedRel"))),
    ("lee-donates-a-book-to-noam",
     clause("DonateRel", name("LeeRel"), a("BookRel"), name("NoamRel"))),
]


def corpus_items():
    items = [CorpusItem(parse_mrs(SANDY), None, "sandy-gives-a-chair-to-kim")]
    items += [CorpusItem(m, None, label) for label, m in SENTENCES]
    return items


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1]
                                         / "src/eblgen/data/toy.corpus"))
    args = ap.parse_args()
    text = format_corpus(corpus_items(), "Toy corpus: one clause per record.\n"
                                         "Generated by scripts/make_corpus.py.")
    Path(args.out).write_text(text, encoding="utf-8")
    print(f"wrote {len(corpus_items())} items to {args.out}")


if __name__ == "__main__":
    main()
