"""Golden-file regression: the comparison run on a pinned config must
regenerate byte-identically."""

from pathlib import Path

from rejuvsim import cli

GOLDEN = Path(__file__).parent / "golden"


def test_compare_matches_golden(tmp_path):
    rc = cli.main(["compare", "--workload-spec", "aescbc", "--workload-spec",
                   "fir", "--seed", "0", "--out", str(tmp_path),
                   "--no-figures"])
    assert rc == 0
    for fresh, frozen in (("compare.csv", "compare_aescbc_fir.csv"),
                          ("reductions.csv", "reductions_aescbc_fir.csv")):
        assert (tmp_path / fresh).read_bytes() == (GOLDEN / frozen).read_bytes()
