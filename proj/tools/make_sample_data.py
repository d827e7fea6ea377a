#!/usr/bin/env python3
"""Writes data/sample_faostat.csv: a synthetic FAOSTAT-style normalized export.

The series are made up (smooth growth, a slow cycle and a little seeded
noise) but follow the bulk-download layout, units and element names, so the
whole pipeline can run offline. Re-running produces a byte-identical file.
"""

import csv
import math
import random
import sys
from pathlib import Path

AREA = "Iran (Islamic Republic of)"
AREA_CODE = 102
YEARS = range(1961, 2018)


def smooth(t, base, growth, cycle=0.03, phase=0.0, noise=0.01, rng=None):
    value = base * (1.0 + growth) ** t * (1.0 + cycle * math.sin(0.35 * t + phase))
    if rng is not None:
        value *= 1.0 + rng.uniform(-noise, noise)
    return value


def main(path):
    rng = random.Random(20170101)
    rows = []

    def add(item_code, item, element_code, element, unit, year, value, flag="", quoted_thousands=False):
        value = round(value)
        text = f"{value:,}" if quoted_thousands else str(value)
        rows.append([AREA_CODE, AREA, item_code, item, element_code, element, year, year, unit, text, flag])

    animals = [
        # stock item, meat item, base stock, growth, slaughter share, carcass yield (hg/An), yield growth
        (866, "Cattle", 867, "Meat, cattle", 5.2e6, 0.012, 0.16, 1150.0, 0.006),
        (976, "Sheep", 977, "Meat, sheep", 2.9e7, 0.011, 0.34, 150.0, 0.004),
        (1057, "Chickens", 1058, "Meat, chicken", 4.5e4, 0.045, 1.55, 11.0, 0.008),
    ]
    milk_base, milk_growth = 1.1e6, 0.032

    crops = [
        # item code, item, base area (ha), area growth, base yield (hg/ha), yield growth, loss share
        (15, "Wheat", 4.0e6, 0.008, 8000.0, 0.018, 0.10),
        (44, "Barley", 1.3e6, 0.006, 8500.0, 0.012, 0.08),
        (27, "Rice", 3.3e5, 0.010, 25000.0, 0.010, 0.07),
        (56, "Maize", 1.5e4, 0.060, 17000.0, 0.030, 0.06),
        (116, "Potatoes", 2.5e4, 0.045, 90000.0, 0.020, 0.12),
    ]

    for year in YEARS:
        t = year - YEARS[0]
        for stock_code, stock_item, meat_code, meat_item, base, growth, share, carcass, ygrowth in animals:
            stock = smooth(t, base, growth, phase=stock_code % 7, rng=rng)
            slaughtered = stock * share * (1.0 + 0.02 * math.sin(0.5 * t + 1.0))
            yield_hg = smooth(t, carcass, ygrowth, cycle=0.01, phase=1.3, noise=0.005, rng=rng)
            production = slaughtered * yield_hg / 1.0e4
            unit = "1000 Head" if stock_item == "Chickens" else "Head"
            add(stock_code, stock_item, 5111, "Stocks", unit, year, stock, quoted_thousands=(t % 10 == 3))
            add(meat_code, meat_item, 5320, "Producing Animals/Slaughtered", unit, year, slaughtered)
            add(meat_code, meat_item, 5417, "Yield", "hg/An", year, yield_hg, flag="Fc")
            add(meat_code, meat_item, 5510, "Production", "tonnes", year, production)
        milk = smooth(t, milk_base, milk_growth, cycle=0.02, phase=0.4, rng=rng)
        add(882, "Milk, whole fresh cow", 5510, "Production", "tonnes", year, milk, quoted_thousands=(t % 10 == 7))

        for code, item, area, agrowth, yield_base, ygrowth, loss_share in crops:
            harvested = smooth(t, area, agrowth, cycle=0.04, phase=code % 5, rng=rng)
            yield_hg = smooth(t, yield_base, ygrowth, cycle=0.05, phase=code % 3, noise=0.02, rng=rng)
            production = harvested * yield_hg / 1.0e4
            loss = production * loss_share * (1.0 + 0.1 * math.sin(0.2 * t))
            add(code, item, 5312, "Area harvested", "ha", year, harvested)
            add(code, item, 5419, "Yield", "hg/ha", year, yield_hg, flag="Fc")
            add(code, item, 5510, "Production", "tonnes", year, production, quoted_thousands=(t % 10 == 5))
            add(code, item, 5016, "Loss", "tonnes", year, loss, flag="Fc")

    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["Area Code", "Area", "Item Code", "Item", "Element Code", "Element",
                         "Year Code", "Year", "Unit", "Value", "Flag"])
        writer.writerows(rows)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/sample_faostat.csv")
