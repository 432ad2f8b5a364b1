import sys


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not hasattr(mod, "RESULTS"):
        return
    ran = {int(r.nodeid.split("::test_c")[1][:2])
           for key in ("passed", "failed", "error") for r in terminalreporter.stats.get(key, [])
           if "test_acceptance.py::test_c" in r.nodeid}
    if not ran:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ran):
        ok, detail = mod.RESULTS.get(num, (False, "did not report (error before check)"))
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
