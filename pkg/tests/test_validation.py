import math

from isofk.dynamics import KernelCache
from isofk.validation import Check, check_kernel_cache, run_all


def test_quick_suite_passes():
    checks = run_all(quick=True)
    assert len(checks) == 6
    for c in checks:
        assert c.passed, c.line()


def test_check_line_format():
    assert Check("x", True).line() == "PASS x"
    assert Check("y", False, "worst 1").line() == "FAIL y: worst 1"


def test_kernel_cache_check(tmp_path):
    assert check_kernel_cache(None).passed
    cache = KernelCache(str(tmp_path))
    cache.get(math.pi / 3, math.pi / 2, 4.0)
    good = check_kernel_cache(str(tmp_path))
    assert good.passed and "1 kernels" in good.detail
    path = cache.path(math.pi / 3, math.pi / 2, 4.0)
    lines = open(path).read().splitlines()
    row = lines.index("star_to_triangle") + 1
    vals = lines[row].split()
    vals[0], vals[1] = "0.9", "0.1"
    lines[row] = " ".join(vals)
    open(path, "w").write("\n".join(lines) + "\n")
    assert not check_kernel_cache(str(tmp_path)).passed
