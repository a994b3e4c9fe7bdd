//! Companion matplotlib scripts. They read only the CSV they sit next to.

const READER: &str = r##"import csv
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib.pyplot as plt

here = Path(__file__).resolve().parent
source = here / CSV_NAME
with open(source, newline="") as f:
    rows = list(csv.DictReader(line for line in f if not line.startswith("#")))
"##;

fn script(csv_name: &str, body: &str) -> String {
    let name = csv_name.replace('\\', "\\\\").replace('"', "\\\"");
    format!(
        "#!/usr/bin/env python3\n{}\n{}",
        READER.replace("CSV_NAME", &format!("\"{name}\"")),
        body
    )
}

pub fn bsm_curve(csv_name: &str) -> String {
    script(
        csv_name,
        r##"curves = defaultdict(list)
for row in rows:
    key = (row["strategy"], row["variant_or_profile"])
    curves[key].append((float(row["epsilon"]), float(row["probability"])))

fig, ax = plt.subplots(figsize=(6, 4))
for (strategy, label), points in sorted(curves.items()):
    xs, ys = zip(*sorted(points))
    ax.plot(xs, ys, marker="o", markersize=3, label=f"{strategy} ({label})")
ax.set_xlabel("loss probability")
ax.set_ylabel("logical BSM success probability")
ax.legend()
fig.tight_layout()
out = source.with_suffix(".png")
fig.savefig(out, dpi=150)
print(out, file=sys.stderr)
"##,
    )
}

pub fn rate_envelope(csv_name: &str) -> String {
    script(
        csv_name,
        r##"curves = defaultdict(list)
direct = {}
for row in rows:
    length = float(row["L_km"])
    curves[row["protocol"]].append((length, float(row["rate_ebits_per_mode"])))
    direct[length] = float(row["repeaterless_rate"])

fig, ax = plt.subplots(figsize=(6, 4))
for protocol, points in curves.items():
    xs, ys = zip(*sorted(points))
    ax.semilogy(xs, ys, marker="o", markersize=3, label=protocol)
xs = sorted(direct)
ax.semilogy(xs, [direct[x] for x in xs], "k--", label="repeaterless")
ax.set_xlabel("distance (km)")
ax.set_ylabel("rate (ebits/mode)")
ax.legend()
fig.tight_layout()
out = source.with_suffix(".png")
fig.savefig(out, dpi=150)
print(out, file=sys.stderr)
"##,
    )
}

#[cfg(test)]
mod tests {
    #[test]
    fn scripts_point_at_their_csv() {
        let s = super::rate_envelope("fig4.csv");
        assert!(s.contains("here / \"fig4.csv\""));
        assert!(s.contains("repeaterless_rate"));
        assert!(super::bsm_curve("a\"b.csv").contains("\"a\\\"b.csv\""));
    }
}
