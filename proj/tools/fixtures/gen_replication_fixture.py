#!/usr/bin/env python3
"""Generate the synthetic 256-library replication fixture.

The original open dataset is not redistributed with this repository, so the
fixture is constructed to reproduce a set of reference aggregates exactly:

  * final category counts (Internet 135, Database 30, ... Text Editors 1)
  * 148 / 4 / 104 libraries with coincident / two-coincident / no-coincident
    assessments
  * Fleiss' kappa 0.381599 after pair reduction
  * min/median/max/mean/population-stdev of NVD CVSS per category and per
    revised class (2-decimal reporting precision)
  * 434 CVEs, 65 of them with an NVD score below 7.0
  * 6 class escalations, the two worked revision examples, and the jfinal
    row 32 CVE cells.

Output is deterministic (fixed seed). Run from the repository root:

    python3 tools/fixtures/gen_replication_fixture.py tests/data/replication
"""

import csv
import json
import math
import random
import sys
from decimal import Decimal, ROUND_HALF_UP
from pathlib import Path

TOPICS = [
    "Adaptive Technologies", "Artistic Software", "Database", "Communications",
    "Desktop Environment", "Documentation", "Education", "Games/Entertainment",
    "Home Automation", "Internet", "Multimedia", "Office/Business",
    "Other/Nonlisted Topic", "Printing", "Religion", "Scientific/Engineering",
    "Security", "Sociology", "Software Development", "System", "Terminals",
    "Text Editors", "Text Processing", "Utilities",
]
REMOTE = {"System", "Database", "Communications", "Security", "Internet", "Utilities"}

FINAL_COUNTS = {
    "Internet": 135, "Database": 30, "Text Processing": 21, "Security": 19,
    "Software Development": 14, "Multimedia": 13, "System": 13, "Utilities": 6,
    "Communications": 2, "Scientific/Engineering": 2, "Text Editors": 1,
}

# (n, min, median, max, mean, stdev)
CATEGORY_TARGETS = {
    "Internet": (188, 4.70, 7.50, 10.00, 8.04, 1.29),
    "Database": (30, 5.90, 9.10, 9.80, 8.66, 1.15),
    "Text Processing": (59, 5.30, 8.50, 9.80, 8.03, 1.49),
    "Security": (36, 5.30, 8.45, 9.90, 8.19, 1.39),
    "Software Development": (23, 5.50, 7.50, 9.80, 8.11, 1.32),
    "Multimedia": (13, 6.50, 6.50, 10.00, 7.33, 1.14),
    "System": (29, 5.90, 9.00, 10.00, 8.70, 1.25),
    "Utilities": (50, 7.50, 8.10, 9.80, 8.40, 0.63),
    "Communications": (2, 6.80, 7.95, 9.10, 7.95, 1.15),
    "Scientific/Engineering": (3, 5.30, 7.50, 9.80, 7.53, 1.84),
    "Text Editors": (1, 9.80, 9.80, 9.80, 9.80, 0.00),
}
CLASS_TARGETS = {
    "Remote network": (None, 4.70, 8.10, 10.00, 8.22, 1.24),
    "Local": (None, 5.30, 7.50, 10.00, 7.92, 1.46),
}
TOTAL_CVES = 434
# category sizes above were chosen by a moment-matching search so that the
# class rows are reachable; the annealer keeps them fixed
RESIZE_PROBABILITY = 0.0
BELOW_SEVEN = 65
KAPPA_SQUARE_SUM = 89932  # sum of squared rating counts giving kappa 0.381599

JFINAL = "com.jfinal:jfinal"
CORENLP = "edu.stanford.nlp:stanford-corenlp"
ITEXT = "com.itextpdf:io"
JFINAL_ROW = 30   # 0-based library index; sheet row 32 with the header row
CORENLP_ROW = 63  # sheet row 65
ITEXT_ROW = 120

CORENLP_COMMENT = ("Artifact provides a set of natural language analysis tools; "
                   "CVEs describe XML vulnerabilities of the server which this artifact DOES implement")
ITEXT_COMMENT = ("Library io provides the low-level functionality of iText 7 which is a PDF reader and editor; "
                 "CVE describes command injection via another tool, which is irrelevant for the categorisation of this library")

rng = random.Random(20240110)


def round2(x):
    return Decimal(repr(x)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)


def summary(values):
    v = sorted(values)
    n = len(v)
    med = v[n // 2] if n % 2 else (v[n // 2 - 1] + v[n // 2]) / 2
    mean = sum(v) / n
    sd = math.sqrt(sum((x - mean) ** 2 for x in v) / n)
    return v[0], med, v[-1], mean, sd


def matches(values, target):
    lo, med, hi, mean, sd = summary(values)
    got = [round2(lo), round2(med), round2(hi), round2(mean), round2(sd)]
    want = [Decimal(f"{t:.2f}") for t in target[1:]]
    if got != want:
        return False
    # stay clear of half-up rounding boundaries so float reimplementations agree
    for x in (mean, sd):
        frac = abs(x * 100 - math.floor(x * 100) - 0.5)
        if frac < 1e-6:
            return False
    return True


# --------------------------------------------------------------------------
# libraries and final categories

def build_libraries():
    finals = []
    for cat, n in FINAL_COUNTS.items():
        finals += [cat] * n
    rng.shuffle(finals)
    specials = {JFINAL_ROW: "Internet", CORENLP_ROW: "Scientific/Engineering", ITEXT_ROW: "Text Editors"}
    for row, cat in specials.items():
        j = next(i for i, c in enumerate(finals) if c == cat and i not in specials)
        finals[row], finals[j] = finals[j], finals[row]
    coords = []
    for i in range(256):
        coords.append(f"org.replica.g{i % 17:02d}:lib-{i:03d}")
    coords[JFINAL_ROW] = JFINAL
    coords[CORENLP_ROW] = CORENLP
    coords[ITEXT_ROW] = ITEXT
    return coords, finals


# --------------------------------------------------------------------------
# assessments

def other_topic(exclude, weights=None):
    pool = [t for t in (weights or TOPICS) if t not in exclude]
    return rng.choice(pool)


def build_assessments(coords, finals):
    n = len(coords)
    idx = [i for i in range(n) if i not in (CORENLP_ROW, ITEXT_ROW, JFINAL_ROW)]
    rng.shuffle(idx)
    # two special rows are no-coincidence cases already; Internet is the
    # final category of 30 of the no-coincidence rows
    internet = [i for i in idx if finals[i] == "Internet"]
    others = [i for i in idx if finals[i] != "Internet"]
    cfu = set(internet[:30]) | set(others[:72]) | {CORENLP_ROW, ITEXT_ROW}
    rest = [i for i in idx if i not in cfu] + [JFINAL_ROW]
    rng.shuffle(rest)
    choose_one = set(rest[:4])
    auto = rest[4:]
    assert len(cfu) == 104 and len(choose_one) == 4 and len(auto) == 148

    ass = {}
    # AutoFinal shapes: 120 single/single, 20 two/one, 8 two/two
    for k, i in enumerate(auto):
        f = finals[i]
        if k < 120:
            a, b = [f], [f]
        elif k < 140:
            y = other_topic({f})
            a, b = ([y, f], [f]) if k % 2 else ([f], [f, y])
        else:
            y = other_topic({f})
            z = other_topic({f, y})
            a, b = [f, y], [z, f]
        ass[i] = (a, b)
    for i in choose_one:
        f = finals[i]
        y = other_topic({f})
        ass[i] = ([f, y], [y, f])

    # no-coincidence shapes; the rater that did not pick the final category
    # first gets a free "other" topic, tuned below for the kappa target
    free = []
    for k, i in enumerate(sorted(cfu - {CORENLP_ROW, ITEXT_ROW})):
        f = finals[i]
        c = other_topic({f}, finals)
        shape = k % 13
        if shape < 10:
            a, b = [f], [c]
        elif shape < 12:
            y = other_topic({f, c})
            a, b = [f, y], [c]
        else:
            y = other_topic({f, c})
            w = other_topic({f, c, y})
            a, b = [f, y], [c, w]
        if k % 3 == 0:
            a, b = b, a
        ass[i] = (a, b)
        free.append(i)
    ass[CORENLP_ROW] = (["Scientific/Engineering"], ["Internet", "Text Processing"])
    ass[ITEXT_ROW] = (["Text Editors"], ["Text Processing"])

    def reduce(a, b):
        if len(a) == 2:
            if a[0] in b:
                return a[0], a[0]
            if a[1] in b:
                return a[1], a[1]
            return a[0], b[0]
        if a[0] in b:
            return a[0], a[0]
        return a[0], b[0]

    def square_sum():
        counts = {}
        for i in range(n):
            for t in reduce(*ass[i]):
                counts[t] = counts.get(t, 0) + 1
        return sum(v * v for v in counts.values())

    # hill-climb the free "other" topic of no-coincidence rows onto the target
    s = square_sum()
    steps = 0
    while s != KAPPA_SQUARE_SUM:
        steps += 1
        assert steps < 200000, "kappa search did not converge"
        i = rng.choice(free)
        a, b = ass[i]
        f = finals[i]
        side = 1 if f in a else 0  # the rater without the final category
        cur = (a, b)[side]
        used = set(a) | set(b)
        cand = other_topic(used, finals)
        new = [cand] + cur[1:]
        trial = (a, new) if side == 1 else (new, b)
        old = ass[i]
        ass[i] = trial
        s2 = square_sum()
        if abs(s2 - KAPPA_SQUARE_SUM) <= abs(s - KAPPA_SQUARE_SUM) or rng.random() < 0.05:
            s = s2
        else:
            ass[i] = old
    return ass, cfu, choose_one


# --------------------------------------------------------------------------
# CVSS values

DOMAIN = [round(x * 0.1, 1) for x in range(40, 101)]


def anneal_cvss(moved_slots, min_sizes):
    """moved_slots: {category: number of leading slots that move to Remote network}.

    Category sizes are free (within min_sizes and the fixed total); a move
    either changes one value or transfers a slot between two categories.
    """
    fixed = {
        "Communications": [6.8, 9.1],
        "Scientific/Engineering": [7.5, 9.8, 5.3],  # first two belong to corenlp
        "Text Editors": [9.8],
    }
    groups = {}
    for cat, tgt in CATEGORY_TARGETS.items():
        if cat in fixed:
            groups[cat] = list(fixed[cat])
        else:
            groups[cat] = [rng.choice([7.5, 8.1, 8.8, 9.8, 6.5, 5.3]) for _ in range(tgt[0])]
    # jfinal occupies the first two Internet slots
    groups["Internet"][0] = 9.8
    groups["Internet"][1] = 7.8
    lead = {c: moved_slots.get(c, 0) for c in groups}
    lead["Internet"] = 2
    resizable = [c for c in groups if c not in fixed]

    def class_of_slot(cat, k):
        if cat in REMOTE or k < moved_slots.get(cat, 0):
            return "Remote network"
        return "Local"

    def class_values(name):
        remote, local = [], []
        for cat, vals in groups.items():
            if cat in REMOTE:
                remote += vals
            else:
                m = moved_slots.get(cat, 0)
                remote += vals[:m]
                local += vals[m:]
        return remote if name == "Remote network" else local

    def stat_cost(values, target):
        lo, med, hi, mean, sd = summary(values)
        _, tlo, tmed, thi, tmean, tsd = target
        c = abs(lo - tlo) + abs(hi - thi) + abs(med - tmed)
        # gradient toward the median: enough values on each side of it
        n = len(values)
        on_grid = abs(tmed * 10 - round(tmed * 10)) < 1e-9
        need = n // 2 + (1 if on_grid else 0)
        at_most = sum(1 for x in values if x <= tmed + 1e-9)
        at_least = sum(1 for x in values if x >= tmed - 1e-9)
        c += 0.003 * (max(0, need - at_most) + max(0, need - at_least))
        c += max(0.0, abs(mean - tmean) - 0.004) * 4
        c += max(0.0, abs(sd - tsd) - 0.004) * 4
        return c

    def below():
        return sum(1 for vals in groups.values() for x in vals if x < 7.0)

    def total():
        c = sum(stat_cost(v, CATEGORY_TARGETS[k]) for k, v in groups.items())
        c += sum(stat_cost(class_values(n), CLASS_TARGETS[n]) for n in CLASS_TARGETS)
        return c + abs(below() - BELOW_SEVEN) * 0.05

    def all_match():
        if any(not matches(v, CATEGORY_TARGETS[c]) for c, v in groups.items()):
            return False
        return (matches(class_values("Remote network"), CLASS_TARGETS["Remote network"])
                and matches(class_values("Local"), CLASS_TARGETS["Local"]) and below() == BELOW_SEVEN)

    cost = total()
    temp = 0.05
    it = 0
    while True:
        if it % 1000 == 0 and cost < 0.02 and all_match():
            break
        it += 1
        if it > 3_000_000:
            raise RuntimeError(f"annealing did not converge, cost {cost}")
        saved = {c: list(v) for c, v in groups.items()}
        if rng.random() < RESIZE_PROBABILITY:
            a, b = rng.sample(resizable, 2)
            if len(groups[a]) <= min_sizes[a]:
                continue
            k = rng.randrange(lead[a], len(groups[a]))
            v = groups[a].pop(k)
            groups[b].append(v if rng.random() < 0.5 else rng.choice(DOMAIN))
        elif rng.random() < 0.3:
            # sum-preserving pair move: shifts order statistics, keeps the mean
            c = rng.choice(resizable)
            lo_k = lead[c] if c == "Internet" else 0
            if len(groups[c]) - lo_k < 2:
                continue
            k1, k2 = rng.sample(range(lo_k, len(groups[c])), 2)
            d = rng.choice([0.1, 0.2, 0.3, 0.5, 0.8, 1.0])
            v1, v2 = round(groups[c][k1] + d, 1), round(groups[c][k2] - d, 1)
            if v1 > 10.0 or v2 < 4.0:
                continue
            groups[c][k1], groups[c][k2] = v1, v2
        else:
            c = rng.choice(resizable)
            k = rng.randrange(lead[c] if c == "Internet" else 0, len(groups[c]))
            old = groups[c][k]
            if rng.random() < 0.7:
                new = round(min(10.0, max(4.0, old + rng.choice([-0.3, -0.2, -0.1, 0.1, 0.2, 0.3]))), 1)
            else:
                new = rng.choice(DOMAIN)
            groups[c][k] = new
        ncost = total()
        if ncost <= cost or rng.random() < math.exp((cost - ncost) / temp):
            cost = ncost
        else:
            groups.clear()
            groups.update(saved)
        temp = max(0.0003, temp * 0.99995)
        if it % 20000 == 0:
            print(f"  anneal it={it} cost={cost:.4f} temp={temp:.5f} sizes="
                  + ",".join(str(len(groups[c])) for c in groups), file=sys.stderr)
            for name in list(groups) + list(CLASS_TARGETS):
                vals = groups[name] if name in groups else class_values(name)
                tgt = CATEGORY_TARGETS.get(name) or CLASS_TARGETS[name]
                cc = stat_cost(vals, tgt)
                if cc > 1e-9:
                    print("    ", name, round(cc, 4), [round(x, 3) for x in summary(vals)], file=sys.stderr)
    return groups


# --------------------------------------------------------------------------

def main(out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    coords, finals = build_libraries()
    ass, cfu, choose_one = build_assessments(coords, finals)

    # class revision: corenlp + five more Local libraries escalate
    by_cat = {}
    for i, f in enumerate(finals):
        by_cat.setdefault(f, []).append(i)
    # per category, libraries in order; moved libraries come first so that
    # their CVEs are the leading slots of the category's value list
    moved_libs = {"Scientific/Engineering": [CORENLP_ROW]}
    moved_sizes = {CORENLP_ROW: 2}
    plan = [("Text Processing", [5, 4]), ("Software Development", [2, 2]), ("Multimedia", [1])]
    for cat, sizes in plan:
        cands = [i for i in by_cat[cat] if i != ITEXT_ROW]
        chosen = cands[: len(sizes)]
        moved_libs[cat] = chosen
        for i, s in zip(chosen, sizes):
            moved_sizes[i] = s
    moved_slots = {cat: sum(moved_sizes[i] for i in libs) for cat, libs in moved_libs.items()}

    min_sizes = {cat: FINAL_COUNTS[cat] for cat in FINAL_COUNTS}
    for i, size in moved_sizes.items():
        min_sizes[finals[i]] += size - 1
    min_sizes["Internet"] += 1  # jfinal has two CVEs
    groups = anneal_cvss(moved_slots, min_sizes)

    # distribute CVE values to libraries; moved libraries take leading slots
    lib_values = {}
    for cat, libs in by_cat.items():
        vals = list(groups[cat])
        order = list(moved_libs.get(cat, []))
        if cat == "Internet":
            order = [JFINAL_ROW] + order
            moved_sizes[JFINAL_ROW] = 2
        if cat == "Scientific/Engineering":
            pass
        rest = [i for i in libs if i not in order]
        pos = 0
        for i in order:
            lib_values[i] = vals[pos:pos + moved_sizes[i]]
            pos += moved_sizes[i]
        remaining = vals[pos:]
        assert len(remaining) >= len(rest)
        # one value each, then spread the surplus
        buckets = {i: [remaining[k]] for k, i in enumerate(rest)}
        for v in remaining[len(rest):]:
            buckets[rng.choice(rest)].append(v)
        lib_values.update(buckets)

    escalated = set()
    for libs in moved_libs.values():
        escalated.update(libs)
    # 10 Local libraries without any NETWORK attack vector
    local_libs = [i for i, f in enumerate(finals) if f not in REMOTE and i not in escalated and i != ITEXT_ROW]
    no_network = set(local_libs[:10])

    cve_rows = []
    serial = 10000
    specials = {
        JFINAL_ROW: ["CVE-2021-31649", "CVE-2019-17352"],
        ITEXT_ROW: ["CVE-2021-43113"],
    }
    for i in range(256):
        vals = lib_values[i]
        ids = specials.get(i)
        if ids is None:
            ids = []
            for _ in vals:
                ids.append(f"CVE-2099-{serial}")
                serial += 1
        for k, (cid, v) in enumerate(zip(ids, vals)):
            if i in no_network:
                av = ["LOCAL", "PHYSICAL", "ADJACENT_NETWORK"][k % 3]
            elif finals[i] in REMOTE and k > 0 and rng.random() < 0.1:
                av = "LOCAL"
            else:
                av = "NETWORK"
            selection = v if v >= 7.0 else 7.5
            cve_rows.append((coords[i], cid, selection, v, av))

    assert len(cve_rows) == TOTAL_CVES, len(cve_rows)

    # ---- write files
    with open(out / "libraries.txt", "w", newline="\n") as fh:
        fh.write("# synthetic replication fixture: 256 libraries\n")
        for c in coords:
            fh.write(c + "\n")

    missing_repo = set(rng.sample([i for i in range(256) if i not in (CORENLP_ROW, JFINAL_ROW, ITEXT_ROW)], 6))
    missing_wiki = set(rng.sample(range(256), 20))
    with open(out / "sources.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["coordinate", "registry_entry", "repository", "website", "wiki_doc"])
        for i, c in enumerate(coords):
            g, a = c.split(":")
            w.writerow([
                c,
                f"https://mvnrepository.com/artifact/{g}/{a}",
                "" if i in missing_repo else f"https://github.com/{g.split('.')[-1]}/{a}",
                f"https://{a}.example.org/",
                "" if i in missing_wiki else f"https://{a}.example.org/docs/",
            ])

    with open(out / "cves.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["coordinate", "cve_id", "selection_score"])
        for c, cid, sel, _, _ in cve_rows:
            w.writerow([c, cid, f"{sel:.1f}"])

    with open(out / "nvd_responses.jsonl", "w", newline="\n") as fh:
        for k, (_, cid, _, v, av) in enumerate(cve_rows):
            data = {"version": "3.1", "vectorString": f"CVSS:3.1/AV:{av[0]}/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H",
                    "attackVector": av, "baseScore": v}
            metric_key = "cvssMetricV31"
            if k % 25 == 7:
                metric_key = "cvssMetricV30"
                data["version"] = "3.0"
                data["vectorString"] = data["vectorString"].replace("3.1", "3.0")
            body = {
                "resultsPerPage": 1, "startIndex": 0, "totalResults": 1, "format": "NVD_CVE",
                "version": "2.0",
                "vulnerabilities": [{"cve": {
                    "id": cid,
                    "metrics": {metric_key: [{"source": "nvd@nist.gov", "type": "Primary", "cvssData": data}]},
                }}],
            }
            fh.write(json.dumps({"cve_id": cid, "status": 200, "body": json.dumps(body, separators=(",", ":"))}) + "\n")
        empty = {"resultsPerPage": 0, "startIndex": 0, "totalResults": 0, "format": "NVD_CVE",
                 "version": "2.0", "vulnerabilities": []}
        fh.write(json.dumps({"cve_id": "CVE-0000-0000", "status": 200, "body": json.dumps(empty, separators=(",", ":"))}) + "\n")

    with open(out / "assessments.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["coordinate", "assessor_id", "choice_1", "choice_2", "done", "comment"])
        for i, c in enumerate(coords):
            a, b = ass[i]
            for who, ch in (("assessor-1", a), ("assessor-2", b)):
                w.writerow([c, who, ch[0], ch[1] if len(ch) > 1 else "", "DONE", ""])

    with open(out / "decisions.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["coordinate", "arbitrator_id", "category", "revision", "comment"])
        for i, c in enumerate(coords):
            f = finals[i]
            queued = i in cfu or i in choose_one
            marked = f not in REMOTE and i not in no_network
            if not queued and not marked:
                continue
            revision = ""
            comment = ""
            if marked:
                revision = "ESCALATE" if i in escalated else "KEEP"
                comment = "class kept: functionality is not network exposed"
                if i in escalated:
                    comment = "class escalated: vulnerable functionality is network exposed"
            if i == CORENLP_ROW:
                comment = CORENLP_COMMENT
            if i == ITEXT_ROW:
                comment = ITEXT_COMMENT
            if queued and not comment:
                comment = "resolved from assessor candidates"
            w.writerow([c, "arbitrator-1", f if queued else "", revision, comment])

    # ---- self-check
    counts = {}
    for f in finals:
        counts[f] = counts.get(f, 0) + 1
    assert counts == FINAL_COUNTS
    below = sum(1 for r in cve_rows if r[3] < 7.0)
    print(f"libraries 256, CVEs {len(cve_rows)}, below 7: {below}, escalated {len(escalated)}, "
          f"marked {sum(1 for i, f in enumerate(finals) if f not in REMOTE and i not in no_network)}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data/replication")
