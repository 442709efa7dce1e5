#!/usr/bin/env python3
"""
Consolidated Test Runner for Seminorm Lab

Runs the pytest suites with per-suite timing and prints a summary.

Usage:
    python tests/test_runner.py [--test-type TYPE] [--verbose] [-k EXPR]

Test Types:
    all           - Run core and extended suites (default)
    core          - Unit, golden-report and property tests
    extended      - Acceptance-scale sweeps (slow)

Options:
    --verbose     - Enable verbose output
    -k EXPR       - Pass a keyword expression to pytest
    --help        - Show this help message
"""

import argparse
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

import pytest

project_dir = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(project_dir))

# Named AppTestRunner so pytest does not try to collect it.
__all__ = ["main", "AppTestRunner"]

SUITES = {
    "core": ("Core Tests", project_dir / "tests" / "core"),
    "extended": ("Extended Acceptance Tests", project_dir / "tests" / "extended"),
}


class _Counter:
    """pytest plugin counting outcomes of the test call phase."""

    def __init__(self):
        self.counts = {"passed": 0, "failed": 0, "skipped": 0}

    def pytest_runtest_logreport(self, report):
        if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
            self.counts[report.outcome] = self.counts.get(report.outcome, 0) + 1


class AppTestRunner:
    """Runs the pytest suites for manual invocation and records results."""

    def __init__(self, verbose: bool = False, keyword: Optional[str] = None):
        self.verbose = verbose
        self.keyword = keyword
        self.results: Dict[str, Any] = {
            "tests": [],
            "start_time": time.time(),
            "total_duration": 0.0,
            "passed": 0,
            "failed": 0,
            "errors": []
        }

    def log(self, message: str, level: str = "INFO"):
        """Log a message with timestamp."""
        timestamp = time.strftime("%H:%M:%S")
        if self.verbose or level in ["ERROR", "WARNING"]:
            print(f"[{timestamp}] [{level}] {message}")

    def run_suite(self, suite: str) -> bool:
        """Run one pytest suite and record its outcome."""
        name, path = SUITES[suite]
        self.log(f"Running {name} from {path}...", "INFO")

        counter = _Counter()
        args: List[str] = [str(path), "-q" if not self.verbose else "-v", "-p", "no:cacheprovider"]
        if self.keyword:
            args += ["-k", self.keyword]
        started = time.time()
        try:
            exit_code = pytest.main(args, plugins=[counter])
        except Exception as e:
            self.log(f"Error running {name}: {e}", "ERROR")
            self.results["errors"].append(f"{name}: {e}")
            self.results["failed"] += 1
            return False

        passed = int(exit_code) in (pytest.ExitCode.OK, pytest.ExitCode.NO_TESTS_COLLECTED)
        self.results["tests"].append({
            "name": name,
            "passed": passed,
            "duration": time.time() - started,
            "details": {
                "exit_code": int(exit_code),
                "passed_tests": counter.counts["passed"],
                "failed_tests": counter.counts["failed"],
                "skipped_tests": counter.counts["skipped"],
            }
        })

        if passed:
            self.results["passed"] += 1
            self.log(f"✅ {name} PASSED", "INFO")
        else:
            self.results["failed"] += 1
            self.log(f"❌ {name} FAILED", "ERROR")
        return passed

    def run_all_tests(self) -> bool:
        """Run every suite, even after a failure."""
        self.log("Starting full test suite...", "INFO")
        results = [self.run_suite(suite) for suite in SUITES]
        return all(results)

    def print_summary(self):
        """Print per-suite test counts and overall totals."""
        self.results["total_duration"] = time.time() - self.results["start_time"]
        totals = {"passed": 0, "failed": 0, "skipped": 0}
        for suite in self.results["tests"]:
            for key in totals:
                totals[key] += suite["details"][f"{key}_tests"]

        print("\n" + "=" * 70)
        print("📊 TEST RESULTS SUMMARY")
        print("=" * 70)
        ok = self.results["failed"] == 0 and not self.results["errors"]
        print("✅ Overall Status: ALL SUITES PASSED" if ok else "❌ Overall Status: SOME SUITES FAILED")
        print(f"⏱️  Total Duration: {self.results['total_duration']:.2f}s")
        print(f"🧮 Tests: {totals['passed']} passed, {totals['failed']} failed, {totals['skipped']} skipped")
        print()

        for suite in self.results["tests"]:
            details = suite["details"]
            status = "✅ PASS" if suite["passed"] else "❌ FAIL"
            print(f"{status} {suite['name']:<28} {suite['duration']:7.2f}s  "
                  f"{details['passed_tests']:>5} passed {details['failed_tests']:>4} failed "
                  f"{details['skipped_tests']:>4} skipped  (pytest exit {details['exit_code']})")

        if self.results["errors"]:
            print("\n🚨 Errors:")
            for error in self.results["errors"]:
                print(f"   {error}")
        print()


def main():
    """Main function to run tests."""
    parser = argparse.ArgumentParser(
        description="Consolidated Test Runner for Seminorm Lab",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Test Types:
    all           - Run core and extended suites (default)
    core          - Unit, golden-report and property tests
    extended      - Acceptance-scale sweeps (slow)

Examples:
    python tests/test_runner.py                      # Run everything
    python tests/test_runner.py --test-type core     # Fast suite only
    python tests/test_runner.py --verbose            # Verbose pytest output
    python tests/test_runner.py -k witness           # Tests whose names mention witness
        """
    )

    parser.add_argument(
        "--test-type",
        choices=["all", *SUITES],
        default="all",
        help="Type of tests to run (default: all)"
    )

    parser.add_argument(
        "--verbose",
        action="store_true",
        help="Enable verbose output"
    )

    parser.add_argument(
        "-k",
        dest="keyword",
        help="Only run tests matching this pytest keyword expression"
    )

    args = parser.parse_args()

    runner = AppTestRunner(verbose=args.verbose, keyword=args.keyword)

    print("🧪 Seminorm Lab - Test Runner")
    print("=" * 50)
    print(f"Test Type: {args.test_type}")
    print(f"Verbose: {args.verbose}")
    print()

    try:
        if args.test_type == "all":
            success = runner.run_all_tests()
        else:
            success = runner.run_suite(args.test_type)

        runner.print_summary()
        return 0 if success else 1

    except KeyboardInterrupt:
        print("\n⚠️  Tests interrupted by user")
        return 130


if __name__ == "__main__":
    sys.exit(main())
