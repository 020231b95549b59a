import pytest

from wwlogs.synth import GeneratorParams, generate_course

SAMPLE_ANSWERS = [
    "[Fri Dec 02 23:01:13 2016] |AMFFPSX4I202|Assignment_12|10|0 1480748473 (sqrt(3)/2)+pi/12",
    "[Fri Dec 02 23:01:19 2016] |76ARTLFSBF01|Assignment_12|24|1 1480748479 (120^2) / (32*2 )",
    "[Fri Dec 02 23:01:34 2016] |KBGURC1AHF18|Assignment_12|9|0 1480748494 9*(-9^(1/3))/(1+-9^(1/3))",
    "[Fri Dec 02 23:01:40 2016] |JT18Z8YBV504|Assignment_12|13|0 1480748499 ((h^2d-hd^2)/(h-d))^(1/2)",
    "[Fri Dec 02 23:02:24 2016] |07DHCFA68009|Assignment_12|10|0 1480748544 2.6678",
    "[Fri Dec 02 23:02:40 2016] |8MKDZZ7AFT05|Assignment_12|26|0 1480748550 -18",
    "[Fri Dec 02 23:04:00 2016] |DYRXI8W6ZC16|Assignment_12|15|00 1480748640 7.006 1/2(10-(1+pi/2)(20/(4+pi)))",
    "[Fri Dec 02 23:04:39 2016] |CL9JMXD1PK09|Assignment_12|0|110 1480748679 3/2s^2csc^2(t)-(3s^2 (sqrt(3)/2)cot(t)*csc(t) cos^-1(sqrt(3/3)",
]

# login sample with user-agent text wrapped onto continuation lines
SAMPLE_LOGINS = [
    "[Wed Oct 26 13:47:33 2016] LOGIN OK user_id=6834XIFTZ503 login_type=normal credential_source=LTI host=123.456.789.9 port=40001",
    "UA=Mozilla/5.0 (Macintosh; Intel Mac OS X 10_12) AppleWebKit/602.1.50 (KHTML, like Gecko) Version/10.0 Safari/602.1.50",
    "[Wed Oct 26 13:48:32 2016] AUTH WwDB: password rejected, deferring to site_checkPassword user_id=1DWC8BNALJ04 login_type=normal",
    "credential_source=params 123.456.789.9 port=40001 UA=Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 (KHTML, like Gecko)",
    "Chrome/53.0.2785.143 Safari/537.36",
    "[Wed Oct 26 13:48:32 2016] LOGIN OK user_id=1EWCV9NALJ04 login_type=normal credential_source=params 123.456.789.9 port=40001",
    "UA=Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 (KHTML, like Gecko) Chrome/53.0.2785.143 Safari/537.36",
]


@pytest.fixture(scope="session")
def small_course():
    return generate_course(GeneratorParams(seed=7, n_students=24, n_assignments=3,
                                           problems_per_assignment=6))


@pytest.fixture(scope="session")
def class_course():
    return generate_course(GeneratorParams(seed=2016, n_students=200))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS, key=lambda k: int(k[2:])):
        ok, detail = RESULTS[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {key}: {detail}")
