#!/usr/bin/env python3
"""Affective Text headlines to benchmark rows for `emodist label --scheme affective`.

Reads the headline XML (<instance id="N">headline</instance>) and the matching
.emotions.gold file ("N anger disgust fear joy sadness surprise", scores 0-100)
and writes one row per headline:

    anger<TAB>disgust<TAB>fear<TAB>joy<TAB>sadness<TAB>surprise<TAB>headline

Labeling and the score threshold are applied by emodist, not here.
"""

import argparse
import sys
import xml.etree.ElementTree as ET


def read_headlines(path):
    root = ET.parse(path).getroot()
    return {inst.get("id"): " ".join((inst.text or "").split()) for inst in root.iter("instance")}


def read_scores(path):
    scores = {}
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) != 7:
                sys.exit(f"{path}:{line_no}: expected an id and six scores")
            scores[fields[0]] = fields[1:]
    return scores


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("xml", help="headline XML file")
    ap.add_argument("gold", help=".emotions.gold score file")
    ap.add_argument("-o", "--out", help="output file (default: stdout)")
    args = ap.parse_args()

    headlines = read_headlines(args.xml)
    scores = read_scores(args.gold)
    missing = sorted(set(headlines) - set(scores), key=lambda k: int(k) if k.isdigit() else k)
    if missing:
        print(f"warning: {len(missing)} headlines without scores", file=sys.stderr)

    out = open(args.out, "w", encoding="utf-8", newline="\n") if args.out else sys.stdout
    for hid, text in headlines.items():
        if hid in scores and text:
            out.write("\t".join(scores[hid] + [text]) + "\n")
    if args.out:
        out.close()


if __name__ == "__main__":
    main()
