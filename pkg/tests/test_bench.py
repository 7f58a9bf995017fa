import pytest

from sspace import _dp, bench
from sspace.snorm import PartitionTable


def test_sample_vector_is_seeded():
    assert bench.sample_vector(12, 4) == bench.sample_vector(12, 4)
    assert bench.sample_vector(12, 4) != bench.sample_vector(12, 5)
    assert len(bench.sample_vector(30)) == 30


@pytest.mark.parametrize("n", [1, 2, 7, 18])
def test_every_kernel_gives_the_same_table(n):
    x = bench.sample_vector(n, 2)
    tables = [PartitionTable.build(x, kernel) for kernel in bench.kernels().values()]
    first = tables[0]
    for other in tables[1:]:
        assert list(other.mlo) == list(first.mlo) and list(other.mhi) == list(first.mhi)
        assert list(other.split) == list(first.split)


def test_selected_backend_is_listed():
    assert _dp.BACKEND in bench.kernels()


def test_report_and_table():
    report = bench.run([5, 10], repeats=1, full_norm=False)
    assert [r["n"] for r in report["rows"]] == [5, 10]
    assert {s["backend"] for s in report["scaling"]} == set(bench.kernels())
    assert all(s["allowed"] == bench.SLACK * 2**4 for s in report["scaling"])
    text = bench.format_table(report)
    header = text.splitlines()[0].split()
    assert header[0] == "n" and set(bench.kernels()) <= set(header)


def test_python_limit_skips_large_sizes():
    report = bench.run([4, 8], repeats=1, python_limit=4, full_norm=False)
    assert report["rows"][1]["python"] is None
