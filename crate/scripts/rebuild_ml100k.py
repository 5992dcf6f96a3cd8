#!/usr/bin/env python3
"""Rebuild the MovieLens 100K on-disk layout from the copy bundled in the
`recbole` wheel, for machines that cannot reach files.grouplens.org.

Produces u.data, u.user, u.item, u.genre, u.occupation and the u1..u5
base/test folds. u.data and u.user are byte-identical to the GroupLens
distribution. u.item keeps ids, release years and genre flags; full release
dates and IMDb URLs are not present in the bundled copy, so every date is
written as 01-Jan-<year> and the URL field is left empty. The folds follow
the distribution's mku.sh rule (contiguous 20,000-line blocks of u.data,
sorted by user then movie).

Usage: rebuild_ml100k.py OUT_DIR [--wheel PATH]
"""

import argparse
import pathlib
import subprocess
import sys
import tempfile
import zipfile

GENRES = [
    "unknown", "Action", "Adventure", "Animation", "Children's", "Comedy",
    "Crime", "Documentary", "Drama", "Fantasy", "Film-Noir", "Horror",
    "Musical", "Mystery", "Romance", "Sci-Fi", "Thriller", "War", "Western",
]
OCCUPATIONS = [
    "administrator", "artist", "doctor", "educator", "engineer",
    "entertainment", "executive", "healthcare", "homemaker", "lawyer",
    "librarian", "marketing", "none", "other", "programmer", "retired",
    "salesman", "scientist", "student", "technician", "writer",
]
PREFIX = "recbole/dataset_example/ml-100k/ml-100k."


def fetch_wheel(tmp):
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", tmp, "recbole==1.2.1"],
        check=True,
    )
    return next(pathlib.Path(tmp).glob("recbole-*.whl"))


def rows(blob):
    lines = blob.split(b"\n")[1:]
    return [l.split(b"\t") for l in lines if l]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out")
    ap.add_argument("--wheel")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    with tempfile.TemporaryDirectory() as tmp:
        wheel = pathlib.Path(args.wheel) if args.wheel else fetch_wheel(tmp)
        with zipfile.ZipFile(wheel) as z:
            inter = rows(z.read(PREFIX + "inter"))
            users = rows(z.read(PREFIX + "user"))
            items = rows(z.read(PREFIX + "item"))

    data = [b"\t".join(r) + b"\n" for r in inter]
    assert len(data) == 100000
    (out / "u.data").write_bytes(b"".join(data))
    (out / "u.user").write_bytes(b"".join(b"|".join(r) + b"\n" for r in users))
    (out / "u.genre").write_text("".join(f"{g}|{i}\n" for i, g in enumerate(GENRES)) + "\n")
    (out / "u.occupation").write_text("".join(o + "\n" for o in OCCUPATIONS))

    item_lines = []
    for movie_id, title, year, genres in items:
        flags = set(genres.decode("latin-1").split(" "))
        if not year.isdigit():
            title, date = b"unknown", b""
        else:
            title = title + b" (" + year + b")"
            date = b"01-Jan-" + year
        bits = b"|".join(b"1" if g in flags else b"0" for g in GENRES)
        item_lines.append(b"|".join([movie_id, title, date, b"", b""]) + b"|" + bits + b"\n")
    (out / "u.item").write_bytes(b"".join(item_lines))

    def key(line):
        f = line.split(b"\t")
        return int(f[0]), int(f[1])

    for k in range(1, 6):
        lo, hi = (k - 1) * 20000, k * 20000
        (out / f"u{k}.test").write_bytes(b"".join(sorted(data[lo:hi], key=key)))
        (out / f"u{k}.base").write_bytes(b"".join(sorted(data[:lo] + data[hi:], key=key)))


if __name__ == "__main__":
    main()
