#!/usr/bin/env python3
"""ISEAR questionnaire export to benchmark rows for `emodist label --scheme isear`.

Reads a delimited export of the ISEAR databank with a header row and writes

    emotion<TAB>situation

for every record. The emotion column holds one of joy, fear, anger, sadness,
disgust, shame, guilt; mapping and dropping happen in emodist.
"""

import argparse
import csv
import sys


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("csv", help="ISEAR export with a header row")
    ap.add_argument("--delimiter", default="|", help="field separator (default: |)")
    ap.add_argument("--label-column", default="Field1", help="emotion column (default: Field1)")
    ap.add_argument("--text-column", default="SIT", help="situation column (default: SIT)")
    ap.add_argument("-o", "--out", help="output file (default: stdout)")
    args = ap.parse_args()

    out = open(args.out, "w", encoding="utf-8", newline="\n") if args.out else sys.stdout
    with open(args.csv, encoding="utf-8", errors="replace", newline="") as f:
        reader = csv.DictReader(f, delimiter=args.delimiter)
        for col in (args.label_column, args.text_column):
            if col not in (reader.fieldnames or []):
                sys.exit(f"{args.csv}: no column '{col}' (have: {', '.join(reader.fieldnames or [])})")
        for row in reader:
            label = row[args.label_column].strip().lower()
            text = " ".join((row[args.text_column] or "").split())
            if label and text:
                out.write(f"{label}\t{text}\n")
    if args.out:
        out.close()


if __name__ == "__main__":
    main()
