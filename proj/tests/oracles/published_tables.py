#!/usr/bin/env python3
"""Extracts the published result tables from a LaTeX-flavoured markdown source
into data/published/*.csv.  usage: published_tables.py <source.md>

Also recomputes every efficiency as resolution/cost and reports the worst
absolute deviation from the printed value.
"""
import pathlib
import re
import sys

ROOT = pathlib.Path(__file__).resolve().parents[2]

NAMES = {
    "Self-Consistency - Direct": "sc_majority",
    "Self-Consistency - Clustering": "sc_clustering",
    "Self-Consistency - Universal": "sc_universal",
    "Best of n (cheating)": "best_of_n",
    "Best of n": "best_of_n",
    "Plan": "plan",
    "Instance Level QA Pairs": "instance_qa",
    "Repo Structure": "repo_structure",
    "Repo Level QA Pairs": "repo_faq",
    "Repo Summary": "repo_summary",
    "Strong LM Single Attempt": "strong_single_attempt",
    "Strong LM First": "strong_first",
    "Prompt Reduction": "prompt_reduction",
    "Weak LM First": "weak_first",
    "Weak Router": "weak_router",
    "Strong Router": "strong_router",
}
HEADER = "method_id,resolution_rate,avg_strong_iters,avg_weak_iters,valid_patch_rate,total_cost,efficiency\n"


def strip(cell):
    cell = re.sub(r"\\color\[HTML\]\{\w+\}", "", cell)
    cell = re.sub(r"\\cellcolor\[HTML\]\{\w+\}", "", cell)
    cell = re.sub(r"\\tnote\{\d+\}", "", cell)
    cell = re.sub(r"\\textbf\{([^}]*)\}", r"\1", cell)
    return cell.replace("{", "").replace("}", "").replace("*", "").replace("\\\\", "").strip()


def row(method, cells):
    res, iters, valid, cost, eff = cells
    m = re.fullmatch(r"([\d.]+)s \+ ([\d.]+)w", iters)
    s, w = (m.group(1), m.group(2)) if m else (iters, "0")
    return [method, res, s, w, valid, cost, eff]


def rows_between(lines, start):
    out = []
    for line in lines[start:]:
        if "\\end{tabular}" in line:
            break
        if "&" not in line or "textbf{Experiment}" in line:
            continue
        cells = [strip(c) for c in line.replace("\\midrule", "").replace("\\bottomrule", "").split("&")]
        out.append(cells)
    return out


def main():
    lines = pathlib.Path(sys.argv[1]).read_text().splitlines()
    worst = 0.0
    tables = {}
    base_start = next(i for i, l in enumerate(lines) if l.startswith("o3-mini\\tnote"))
    base = []
    for cells in rows_between(lines, base_start):
        base.append(row(cells[0], cells[1:]))
    tables["base"] = base
    for i, line in enumerate(lines):
        m = re.match(r"\\caption\{Results with (\S+) as strong LM and (\S+) as weak LM", line)
        if not m:
            continue
        pair = f"{m.group(1).lower()}+{m.group(2).lower()}"
        start = max(j for j in range(i) if "\\begin{tabular}" in lines[j])
        out = []
        for cells in rows_between(lines, start + 1):
            name = cells[0]
            if name.startswith("Base - "):
                model = name[len("Base - "):]
                method = "base_strong" if model == m.group(1).lower() else "base_weak"
            elif (fs := re.fullmatch(r"(\d+) Shot (Succesfull|All) - (Random|Similarity)", name)):
                suffix = "_successful" if fs.group(2) == "Succesfull" else ""
                method = f"few_shot_{fs.group(1)}_{fs.group(3).lower()}{suffix}"
            else:
                method = NAMES[name]
            out.append(row(method, cells[1:]))
        tables[pair] = out
    for pair, rows in tables.items():
        path = ROOT / "data" / "published" / f"{pair}.csv"
        with path.open("w", newline="\n") as f:
            f.write(HEADER)
            for r in rows:
                f.write(",".join(r) + "\n")
                eff = float(r[1]) / float(r[5]) if float(r[5]) > 0 else 0.0
                dev = abs(eff - float(r[6]))
                if dev > 5e-5:
                    print(f"deviation {pair} {r[0]}: {eff:.6f} vs {r[6]}", file=sys.stderr)
                worst = max(worst, dev) if pair == "base" else worst
        print(pair, len(rows))
    print(f"worst base deviation {worst:.2e}")


if __name__ == "__main__":
    main()
