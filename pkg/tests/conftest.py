"""Shared pytest hooks.

The acceptance tests each cover one numbered criterion; after a run that
touched any of them, print one PASS/FAIL line per criterion plus whatever
values the tests recorded, so the outcome can be audited from the tail of
the output without scrolling through the full report.
"""

_ACCEPTANCE_FILE = "test_acceptance.py"

# (criterion number, label, test name)
_CRITERIA = (
    (1, "forces match finite differences", "test_forces_match_finite_differences"),
    (2, "conservation on the circular preset", "test_circular_preset_conservation"),
    (3, "fixed-time minimizers solve the equations", "test_fixed_time_minimizers_solve_equations"),
    (4, "free-time energy balance", "test_free_time_energy_balance"),
    (5, "action distance properties", "test_action_distance_properties"),
    (6, "free-particle limit", "test_free_particle_limit"),
    (7, "minimizers stay collision free", "test_minimizers_stay_collision_free"),
    (8, "hyperbolic construction asymptotics", "test_hyperbolic_construction_asymptotics"),
    (9, "geometry inequality suites", "test_geometry_suites_clean"),
    (10, "two-body oracle agreement", "test_two_body_oracle_agreement"),
)


def pytest_terminal_summary(terminalreporter):
    outcomes = {}
    recorded = {}
    for category, label in (
        ("passed", "PASS"),
        ("failed", "FAIL"),
        ("error", "FAIL"),
        ("skipped", "SKIP"),
    ):
        for report in terminalreporter.stats.get(category, []):
            nodeid = getattr(report, "nodeid", "")
            if _ACCEPTANCE_FILE not in nodeid:
                continue
            test_name = nodeid.rsplit("::", 1)[-1]
            if outcomes.get(test_name) != "FAIL":
                outcomes[test_name] = label
            for key, value in getattr(report, "user_properties", []):
                recorded.setdefault(test_name, []).append((key, value))
    if not outcomes:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number, label, test_name in _CRITERIA:
        outcome = outcomes.pop(test_name, None)
        if outcome is None:
            continue
        terminalreporter.write_line(f"ACCEPTANCE: criterion {number} ({label}): {outcome}")
        for key, value in recorded.get(test_name, []):
            terminalreporter.write_line(f"    {key} = {value}")
    for test_name, outcome in sorted(outcomes.items()):
        terminalreporter.write_line(f"ACCEPTANCE: unlisted test {test_name}: {outcome}")
