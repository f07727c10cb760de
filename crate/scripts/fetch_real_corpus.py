#!/usr/bin/env python3
"""Prepare a small real-text evaluation bundle from data files shipped inside the
gensim wheel on PyPI:

  corpus.txt      plain lowercase text, one paragraph per line (Wikipedia sample)
  analogies/      one category file per analogy section, "word_a<TAB>word_b"
  similarity.tsv  word-similarity pairs with human scores

Usage: python3 scripts/fetch_real_corpus.py [--out data/real] [--wheel PATH]
"""

import argparse
import bz2
import re
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path
from xml.etree import ElementTree

PREFIX = "gensim/test/test_data/"
WIKI = "enwiki-latest-pages-articles1.xml-p000000010p000030302-shortened.bz2"
ANALOGIES = "questions-words.txt"
SIMILARITY = "wordsim353.tsv"

TEMPLATE = re.compile(r"\{\{[^{}]*\}\}")
TABLE = re.compile(r"\{\|.*?\|\}", re.S)
REF = re.compile(r"<ref[^>/]*/>|<ref[^>]*>.*?</ref>", re.S)
COMMENT = re.compile(r"<!--.*?-->", re.S)
TAG = re.compile(r"<[^>]+>")
FILE_LINK = re.compile(r"\[\[(?:file|image|category):[^\]]*\]\]", re.I)
LINK = re.compile(r"\[\[(?:[^|\]]*\|)?([^\]]*)\]\]")
EXT_LINK = re.compile(r"\[https?://[^\s\]]*\s?([^\]]*)\]")
URL = re.compile(r"https?://\S+")
WORD = re.compile(r"[a-z]+(?:'[a-z]+)?")


def find_wheel(explicit):
    if explicit:
        return Path(explicit)
    tmp = Path(tempfile.mkdtemp(prefix="gensim-wheel-"))
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "gensim", "--no-deps", "--only-binary=:all:", "-d", str(tmp)],
        check=True,
    )
    wheels = sorted(tmp.glob("gensim-*.whl"))
    if not wheels:
        sys.exit("pip did not produce a gensim wheel")
    return wheels[0]


def clean_wikitext(text):
    text = COMMENT.sub(" ", text)
    text = REF.sub(" ", text)
    text = TABLE.sub(" ", text)
    for _ in range(5):
        stripped = TEMPLATE.sub(" ", text)
        if stripped == text:
            break
        text = stripped
    text = FILE_LINK.sub(" ", text)
    text = LINK.sub(r"\1", text)
    text = EXT_LINK.sub(r"\1", text)
    text = URL.sub(" ", text)
    text = TAG.sub(" ", text)
    lines = []
    for para in text.split("\n"):
        para = para.strip()
        if not para or para.startswith(("=", "|", "!", "*", "#", ":", ";")):
            continue
        tokens = WORD.findall(para.lower())
        if len(tokens) >= 5:
            lines.append(" ".join(tokens))
    return lines


def write_corpus(raw, out):
    n_lines = n_tokens = 0
    with bz2.open(raw) as src, open(out, "w", encoding="utf-8") as dst:
        for _, elem in ElementTree.iterparse(src):
            if elem.tag.rsplit("}", 1)[-1] == "text" and elem.text:
                for line in clean_wikitext(elem.text):
                    dst.write(line + "\n")
                    n_lines += 1
                    n_tokens += line.count(" ") + 1
            elem.clear()
    return n_lines, n_tokens


def write_analogies(text, out_dir):
    out_dir.mkdir(parents=True, exist_ok=True)
    sections, current = {}, None
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith(":"):
            current = line[1:].strip()
            sections.setdefault(current, [])
            continue
        words = line.lower().split()
        if current is None or len(words) != 4:
            continue
        for pair in ((words[0], words[1]), (words[2], words[3])):
            if pair not in sections[current]:
                sections[current].append(pair)
    for name, pairs in sections.items():
        with open(out_dir / f"{name}.txt", "w", encoding="utf-8") as f:
            for a, b in pairs:
                f.write(f"{a}\t{b}\n")
    return {name: len(p) for name, p in sections.items()}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="data/real")
    ap.add_argument("--wheel", help="use an already downloaded gensim wheel")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    wheel = find_wheel(args.wheel)
    with zipfile.ZipFile(wheel) as z, tempfile.TemporaryDirectory() as tmp:
        for name in (WIKI, ANALOGIES, SIMILARITY):
            z.extract(PREFIX + name, tmp)
        data = Path(tmp) / PREFIX
        n_lines, n_tokens = write_corpus(data / WIKI, out / "corpus.txt")
        cats = write_analogies((data / ANALOGIES).read_text(encoding="utf-8"), out / "analogies")
        (out / "similarity.tsv").write_text((data / SIMILARITY).read_text(encoding="utf-8"), encoding="utf-8")
    print(f"corpus.txt: {n_lines} lines, {n_tokens} tokens")
    print(f"analogies/: {len(cats)} categories, {sum(cats.values())} pairs")
    print(f"similarity.tsv: copied from {wheel.name}")


if __name__ == "__main__":
    main()
