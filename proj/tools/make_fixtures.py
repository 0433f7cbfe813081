#!/usr/bin/env python3
"""Writes the synthetic fixtures under data/fixtures/.

The files mimic the layout of a BACI bilateral trade extract, a bulk
company-registry export and a country capacity table. Current EAF capacity
is generated from the other country variables with the published regression
coefficients plus 5% noise, so the regression stage has a known answer.
Output is deterministic.
"""
import csv
import json
import math
import os
import random
import sys

OUT = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "data", "fixtures")

# alpha-3, numeric code used in trade files, base export and import (t/yr)
COUNTRIES = [
    ("AUT", "040", 0.6e6, 0.9e6), ("BEL", "056", 2.5e6, 2.0e6), ("HRV", "191", 0.2e6, 0.1e6),
    ("CZE", "203", 1.6e6, 0.5e6), ("FIN", "246", 0.4e6, 0.5e6), ("FRA", "251", 5.5e6, 1.5e6),
    ("DEU", "276", 8.0e6, 4.5e6), ("ITA", "380", 0.4e6, 5.2e6), ("LUX", "442", 0.3e6, 1.6e6),
    ("POL", "616", 1.8e6, 0.6e6), ("ROU", "642", 1.0e6, 0.2e6), ("ESP", "724", 0.8e6, 4.0e6),
    ("SWE", "752", 0.9e6, 0.6e6), ("GBR", "826", 8.0e6, 0.3e6), ("NLD", "528", 5.5e6, 2.5e6),
    ("PRT", "620", 0.2e6, 0.9e6), ("USA", "842", 16e6, 4.0e6), ("TUR", "792", 0.1e6, 20e6),
    ("CHN", "156", 0.2e6, 3.0e6), ("JPN", "392", 7.0e6, 0.1e6), ("KOR", "410", 0.4e6, 5.5e6),
    ("VNM", "704", 0.1e6, 3.5e6), ("CAN", "124", 4.5e6, 1.5e6), ("MEX", "484", 0.6e6, 2.0e6),
    ("IND", "699", 0.3e6, 5.5e6), ("RUS", "643", 3.0e6, 0.1e6),
]
SCRAP_CODES = ["720410", "720421", "720429", "720441", "720449", "720450"]
OTHER_CODES = ["720810", "710812", "261000"]
YEARS = range(2007, 2022)

# Current EAF (kt/yr), BOF (kt/yr), planned EAF (kt/yr, blank if none).
CAPACITY = {
    "AUT": (800, 7500, 2450), "BEL": (2400, 5000, 2500), "HRV": (250, 0, 200), "CZE": (600, 5500, 3500),
    "FIN": (1300, 2600, 5100), "FRA": (6300, 11000, 6500), "DEU": (12500, 30000, 17600), "ITA": (18500, 4000, 2500),
    "LUX": (2300, 0, 250), "POL": (4500, 5000, 1000), "ROU": (1800, 3000, 4100), "ESP": (11500, 3500, 1700),
    "SWE": (2200, 2500, 9200), "GBR": (2900, 9000, 780), "NLD": (0, 7500, None), "PRT": (2200, 0, None),
}
BETA = {"exports": -0.00096, "imports": 0.0018, "firms": 79.0, "employees": 0.13, "revenue": -2.4e-7, "bof": -0.12}

TOPIC_WORDS = [
    # buying scrap input from steelworks, foundries, demolition
    ["steelworks", "foundry", "foundries", "purchase", "batches", "demolition", "material", "ferrous", "steel",
     "industrial", "collection", "containers", "pickup", "iron", "castings", "surplus"],
    # sorting and recycling waste streams
    ["recycling", "sorting", "waste", "separation", "plastics", "paper", "electronic", "cables", "batteries",
     "disposal", "treatment", "facility", "processing", "hazardous", "vehicles", "dismantling"],
    # selling recovered fractions
    ["trading", "nonferrous", "fractions", "shredder", "export", "copper", "aluminium", "brass", "stainless",
     "wholesale", "merchants", "buyers", "mills", "shipping", "tonnes", "recovered"],
]
NON_SCRAP = [
    "Skyscraper construction and facade engineering for commercial towers.",
    "Software development and consulting for logistics providers.",
    "Manufacturer of scraper blades and snow ploughs for municipal fleets.",
    "Retail bakery chain with regional outlets.",
    "Freight forwarding, customs brokerage and warehousing at the port.",
]
NAICS = [("4239", 0.468), ("4235", 0.185), ("5629", 0.077), ("4246", 0.033), ("3311", 0.029),
         ("5621", 0.028), ("4237", 0.027), ("3314", 0.026), ("4841", 0.025), ("3315", 0.024)]


def pick_naics(rng):
    if rng.random() < 0.05:
        return ""
    u = rng.random() * sum(w for _, w in NAICS)
    for code, w in NAICS:
        u -= w
        if u <= 0:
            return code
    return NAICS[-1][0]


def description(rng, mix):
    words = []
    for _ in range(rng.randint(12, 24)):
        k = rng.choices(range(3), weights=mix)[0]
        words.append(rng.choice(TOPIC_WORDS[k]))
    lead = rng.choice(["Scrap metal", "Ferrous scrap", "The company trades scrap and", "Scrapyard operator for"])
    return lead + " " + " ".join(words) + "."


def main():
    rng = random.Random(20230101)
    os.makedirs(OUT, exist_ok=True)

    # ---- trade -------------------------------------------------------------
    flows = {}  # (year, exporter, importer) -> tonnes summed over scrap codes
    rows = []
    codes = {a: n for a, n, _, _ in COUNTRIES}
    for exp, _, out_base, _ in COUNTRIES:
        partners = [c for c in COUNTRIES if c[0] != exp]
        weights = [c[3] for c in partners]
        chosen = set()
        while len(chosen) < 6:
            chosen.add(rng.choices(range(len(partners)), weights=weights)[0])
        shares = [rng.random() ** 2 + 0.02 for _ in chosen]
        total = sum(shares)
        for idx, share in zip(sorted(chosen), shares):
            imp = partners[idx][0]
            base = out_base * share / total
            trend = rng.uniform(-0.04, 0.05)
            for year in YEARS:
                if rng.random() < 0.08:
                    continue
                qty = base * math.exp(trend * (year - 2014)) * rng.uniform(0.8, 1.2)
                parts = rng.sample(SCRAP_CODES, 2)
                split = rng.uniform(0.2, 0.8)
                for code, q in ((parts[0], qty * split), (parts[1], qty * (1 - split))):
                    q = round(q, 1)
                    rows.append([year, codes[exp], codes[imp], code, round(q * 0.3, 1), q])
                    flows[(year, exp, imp)] = flows.get((year, exp, imp), 0.0) + q
                if rng.random() < 0.3:
                    q = round(qty * 0.1, 1)
                    rows.append([year, codes[exp], codes[imp], rng.choice(OTHER_CODES), round(q * 2.0, 1), q])
    rows.append([2012, "276", "380", "720410", "", "NA"])
    rows.append([2013, "276", "276", "720410", 10.0, 50.0])
    rows.append([2014, "999", "380", "720449", 3.0, 12.0])
    flows[(2014, "999", "ITA")] = 12.0
    with open(os.path.join(OUT, "trade.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["t", "i", "j", "k", "v", "q"])
        w.writerows(rows)

    exports = {a: 0.0 for a, _, _, _ in COUNTRIES}
    imports = dict(exports)
    for (year, e, i), q in flows.items():
        if 2017 <= year <= 2021:
            if e in exports:
                exports[e] += q / 5
            if i in imports:
                imports[i] += q / 5

    # ---- firms -------------------------------------------------------------
    firms = []
    country_firms = {}
    for a, _, _, _ in COUNTRIES:
        if a in CAPACITY:
            eaf, bof, _ = CAPACITY[a]
            need = eaf - BETA["exports"] * exports[a] - BETA["imports"] * imports[a] - BETA["bof"] * bof
            n = max(8, round(need / (79.0 + 0.13 * 60 - 2.4e-7 * 2.5e7)))
        else:
            n = rng.randint(10, 40)
        country_firms[a] = n
    fid = 0
    for a, _, _, _ in COUNTRIES:
        for _ in range(country_firms[a]):
            fid += 1
            z1, z2 = rng.gauss(0, 1), rng.gauss(0, 1)
            emp = round(math.exp(3.6 + 0.9 * z1))
            rev = round(math.exp(16.3 + 1.3 * (0.6 * z1 + 0.8 * z2)), -3)
            mix = [rng.random() + 0.2 for _ in range(3)]
            desc = description(rng, mix)
            fields = [desc, "", "", ""]
            if rng.random() < 0.5:
                fields[1] = " ".join(rng.sample(TOPIC_WORDS[rng.randrange(3)], 5))
            if rng.random() < 0.3:
                fields[2] = "Wholesale of waste and scrap"
            firms.append({
                "id": f"F{fid:05d}", "country": a, "naics4": pick_naics(rng),
                "revenue_usd": "" if rng.random() < 0.08 else rev,
                "employees": "" if rng.random() < 0.1 else emp,
                "desc": fields, "scrap": True,
            })
    for k in range(150):
        fid += 1
        a = rng.choice(COUNTRIES)[0]
        text = rng.choice(NON_SCRAP)
        firms.append({
            "id": f"F{fid:05d}", "country": a, "naics4": rng.choice(["2362", "5415", "3332", "3118", "4885"]),
            "revenue_usd": round(math.exp(rng.gauss(15, 1)), -3), "employees": rng.randint(5, 300),
            "desc": [text, "", "", ""], "scrap": False,
        })
    for k in range(20):
        fid += 1
        firms.append({"id": f"F{fid:05d}", "country": "AUT", "naics4": "4239", "revenue_usd": 1e6,
                      "employees": 10, "desc": ["", "", "", ""], "scrap": False})
    rng.shuffle(firms)
    with open(os.path.join(OUT, "registry.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["id", "country", "naics4", "revenue_usd", "employees", "Full Overview",
                    "Main Products and Services", "Main Activity", "Primary Business Line"])
        for firm in firms:
            w.writerow([firm["id"], firm["country"], firm["naics4"], firm["revenue_usd"], firm["employees"]]
                       + firm["desc"])

    # ---- capacity ----------------------------------------------------------
    agg = {}
    for firm in firms:
        if not firm["scrap"]:
            continue
        s = agg.setdefault(firm["country"], [0, 0.0, 0.0])
        s[0] += 1
        s[1] += float(firm["employees"] or 0)
        s[2] += float(firm["revenue_usd"] or 0)
    with open(os.path.join(OUT, "capacity.csv"), "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["country", "eaf_capacity_kt", "bof_capacity_kt", "planned_eaf_kt"])
        for a, (eaf, bof, planned) in CAPACITY.items():
            n, emp, rev = agg.get(a, [0, 0.0, 0.0])
            y = (BETA["exports"] * exports[a] + BETA["imports"] * imports[a] + BETA["firms"] * n
                 + BETA["employees"] * emp + BETA["revenue"] * rev + BETA["bof"] * bof)
            y = max(0.0, y * (1 + rng.gauss(0, 0.05)))
            w.writerow([a, round(y, 1), bof, "" if planned is None else planned])

    config = {
        "inputs": {"trade": "trade.csv", "registry": "registry.csv", "capacity": "capacity.csv"},
        "trade": {"commodity_prefix": "7204", "windows": [[2007, 2011], [2012, 2016], [2017, 2021]]},
        "backbone": {"alpha": 0.05},
        "firms": {"keyword": "scrap", "exclusions": ["scraper", "scrapers"], "provenance": "synthetic fixture"},
        "topics": {"grid": [1, 2, 3, 4, 5, 6], "iterations": 200, "holdout_fraction": 0.1},
        "regression": {"regressors": ["exports", "imports", "firms", "employees", "revenue", "bof"]},
        "extrapolation": {"coefficient_source": "config", "beta_firms": 79, "beta_sd": 11,
                          "coefficient_draws": 10000, "iterations": 1000},
        "seed": 20230101,
        "output_dir": "../../out",
    }
    with open(os.path.join(OUT, "config.json"), "w") as f:
        json.dump(config, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
