"""Regenerate src/anisolab/data/constants.json from the brute-force oracles."""

import sys
from pathlib import Path

from anisolab.gauge import Gauge
from anisolab.inequalities import (build_manifest, default_suite, singular_oracle_entry,
                                   split_oracle_entry)


def main(out=None):
    suite = default_suite()
    entries = []
    for spec, dim, p in suite["convexity_lt_2"]:
        entries.append(singular_oracle_entry(Gauge.build(spec, dim), p))
    for spec, dim, p in suite["log"]:
        if p < 2 and not any(e["gauge"] == spec.label() and e["dimension"] == dim and e["p"] == p
                             for e in entries):
            entries.append(singular_oracle_entry(Gauge.build(spec, dim), p))
    for p, delta in suite["split"]:
        entries.append(split_oracle_entry(p, delta))
    path = out or Path(__file__).resolve().parents[1] / "src" / "anisolab" / "data" / "constants.json"
    build_manifest(entries, path)
    print(f"wrote {len(entries)} constants to {path}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else None)
