from bureskit.selftest import PropertyCheck, SelfTest


def test_property_check_records_the_worst_residual():
    check = PropertyCheck("residual", 1e-10)
    for residual in (1e-12, 3e-11, float("nan"), 2e-10):
        check.record(residual)
    assert check.count == 4
    assert check.failures == 2
    assert not check.passed


def test_gated_checks_are_counted_as_skips():
    selftest = SelfTest(n_max=1, samples=0, progress=False)
    selftest.gated("coefficient symmetry", 1.0, 1e-9, accuracy=1e-6)
    selftest.gated("coefficient symmetry", 1e-12, 1e-9, accuracy=1e-12)
    assert selftest.skipped == {"coefficient symmetry": 1}
    assert selftest.checks["coefficient symmetry"].passed
    assert "coefficient symmetry: 1 skipped" in selftest.report()


def test_acceptance_run_up_to_eight():
    selftest = SelfTest(n_max=8, samples=20, seed=0, progress=False)
    assert selftest.run(), selftest.report()
    assert selftest.refused == 0
    assert selftest.accepted == 8 * 20
    assert selftest.checks["route agreement"].passed
    assert selftest.checks["projector forms"].count > 0
