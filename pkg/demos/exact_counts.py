"""Partition function three ways on a small pyramid, then exact samples.

Run: python3 demos/exact_counts.py
"""

from railyard.ensemble import enumerate_coverings, exact_probability, sample_exact_many
from railyard.fock import partition_function_braket, partition_function_closed, tail_bound
from railyard.graph import empty_covering
from railyard.presets import pyramid


def main() -> None:
    spec = pyramid(3, "1/3")
    closed = partition_function_closed(spec)
    print(f"closed product      Z = {float(closed):.15f}")
    for n in (4, 8, 16, 30):
        z = partition_function_braket(spec, n)
        print(f"braket N={n:<3}       Z = {float(z):.15f}   gap {float(closed - z):.2e} <= bound {float(tail_bound(spec, n)):.2e}")
    ens = enumerate_coverings(spec, 8)
    print(f"enumeration (size <= 8): {len(ens.entries)} coverings, weight sum equals braket N=8: "
          f"{ens.total_weight == partition_function_braket(spec, 8)}")
    print(f"P(empty covering) = {exact_probability(spec, empty_covering(spec))}")
    for cover in sample_exact_many(spec, 30, 5, seed=1):
        print("  sample:", [list(p) for p in cover.partitions])


if __name__ == "__main__":
    main()
