#!/usr/bin/env python3
"""Fairy-tale sentence annotations to benchmark rows for `emodist label --scheme fairy_tales`.

Two inputs are understood:

  *.agree files, one "id@code@sentence" line per sentence on which the
  annotators agreed, with codes 2 angry-disgusted, 3 fearful, 4 happy, 6 sad,
  7 surprised (other codes are skipped);

  --annotations TSV files with "label,label,...<TAB>sentence" lines, one
  label per annotator, passed through unchanged.

Output rows are "label,label,...<TAB>sentence"; emodist applies the
agreement filter and the label mapping.
"""

import argparse
import sys

AGREE_CODES = {"2": "angry-disgusted", "3": "fearful", "4": "happy", "6": "sad", "7": "surprised"}


def agree_rows(path):
    skipped = 0
    with open(path, encoding="utf-8", errors="replace") as f:
        for line_no, line in enumerate(f, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            parts = line.split("@", 2)
            if len(parts) != 3:
                sys.exit(f"{path}:{line_no}: expected id@code@sentence")
            label = AGREE_CODES.get(parts[1].strip())
            if label is None:
                skipped += 1
                continue
            yield label, " ".join(parts[2].split())
    if skipped:
        print(f"{path}: skipped {skipped} sentences with unmapped codes", file=sys.stderr)


def annotation_rows(path):
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            line = line.rstrip("\r\n")
            if not line.strip():
                continue
            labels, sep, text = line.partition("\t")
            if not sep:
                sys.exit(f"{path}:{line_no}: expected labels<TAB>sentence")
            yield labels.strip().lower(), " ".join(text.split())


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("files", nargs="*", help=".agree files")
    ap.add_argument("--annotations", nargs="*", default=[], help="per-annotator label TSV files")
    ap.add_argument("-o", "--out", help="output file (default: stdout)")
    args = ap.parse_args()
    if not args.files and not args.annotations:
        ap.error("no input files")

    out = open(args.out, "w", encoding="utf-8", newline="\n") if args.out else sys.stdout
    for path in args.files:
        for label, text in agree_rows(path):
            if text:
                out.write(f"{label}\t{text}\n")
    for path in args.annotations:
        for labels, text in annotation_rows(path):
            if text:
                out.write(f"{labels}\t{text}\n")
    if args.out:
        out.close()


if __name__ == "__main__":
    main()
