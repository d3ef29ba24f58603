#!/usr/bin/env python3
"""Standalone structural check for corpus JSON files.

Independent of the C++ loader: verifies the documented layout and the
record invariants, printing every violation. Exit status 0 when valid.
"""
import argparse
import json
import sys

KINDS = {"visual", "contextual"}
SPLITS = {"train", "val", "test"}


def nonempty_str(value):
    return isinstance(value, str) and value.strip() != ""


def check(doc):
    errors = []
    if not isinstance(doc, dict) or not isinstance(doc.get("records"), list):
        return ["top level must be an object with a 'records' array"]
    records = doc["records"]
    if not records:
        errors.append("corpus has no records")
    seen = set()
    for i, rec in enumerate(records):
        where = f"records[{i}]"
        if not isinstance(rec, dict):
            errors.append(f"{where}: not an object")
            continue
        rid = rec.get("id")
        if not nonempty_str(rid):
            errors.append(f"{where}: id must be a nonempty string")
        elif rid in seen:
            errors.append(f"{where}: duplicate id {rid!r}")
        else:
            seen.add(rid)
        if not nonempty_str(rec.get("title")):
            errors.append(f"{where}: title must be a nonempty string")
        sentences = 0
        for field in ("visual_sentences", "contextual_sentences"):
            items = rec.get(field)
            if not isinstance(items, list):
                errors.append(f"{where}: {field} must be an array")
                continue
            for j, s in enumerate(items):
                if not nonempty_str(s):
                    errors.append(f"{where}.{field}[{j}]: empty sentence")
            sentences += len(items)
        if sentences == 0:
            errors.append(f"{where}: no reference sentences")
        for j, qa in enumerate(rec.get("questions", [])):
            qwhere = f"{where}.questions[{j}]"
            if not isinstance(qa, dict):
                errors.append(f"{qwhere}: not an object")
                continue
            for field in ("question", "answer"):
                if not nonempty_str(qa.get(field)):
                    errors.append(f"{qwhere}: {field} must be a nonempty string")
            if qa.get("kind") not in KINDS:
                errors.append(f"{qwhere}: kind must be visual or contextual")
    splits = doc.get("splits")
    if splits is not None:
        if not isinstance(splits, dict):
            errors.append("splits must be an object")
        else:
            for rid, split in splits.items():
                if rid not in seen:
                    errors.append(f"splits: unknown id {rid!r}")
                if split not in SPLITS:
                    errors.append(f"splits[{rid!r}]: invalid split {split!r}")
            for rid in seen - set(splits):
                errors.append(f"splits: no assignment for {rid!r}")
    return errors


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("corpus", nargs="+")
    args = parser.parse_args()
    status = 0
    for path in args.corpus:
        with open(path, encoding="utf-8") as fh:
            errors = check(json.load(fh))
        for err in errors:
            print(f"{path}: {err}")
        if errors:
            status = 1
        else:
            print(f"{path}: ok")
    return status


if __name__ == "__main__":
    sys.exit(main())
