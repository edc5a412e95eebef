"""
Output formatting and display functions for hyperl4.

This module handles all console output formatting and summary printing.
"""

from fractions import Fraction

STATUS_SYMBOLS = {"pass": "✓", "fail": "✗", "error": "✗", "skipped": "-"}


def _format_value(value) -> str:
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, complex):
        if value.imag == 0:
            return f"{value.real:.10g}"
        return f"{value.real:.10g}{value.imag:+.10g}i"
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def print_command_summary(summary: dict) -> None:
    """Print formatted summary for a single command.

    Args:
        summary: Dictionary with keys:
            - command: Sub-command name
            - output_directory: Output directory path
            - headline: Mapping of the main results to print
            - files: Paths written by the command
            - ok: False when a built-in cross-check disagreed
    """
    print("\n" + "=" * 80)
    print(f"{summary['command'].upper()} - SUMMARY")
    print("=" * 80)
    print(f"Output:         {summary['output_directory']}")

    print("\n" + "-" * 80)
    print("RESULTS:")
    print("-" * 80)
    width = max((len(k) for k in summary["headline"]), default=0) + 2
    for key, value in summary["headline"].items():
        print(f"{key + ':':<{width}}{_format_value(value)}")

    print("\n" + "-" * 80)
    print("FILES:")
    print("-" * 80)
    for path in summary["files"]:
        print(f"  {path}")

    if not summary["ok"]:
        print("\n✗ Cross-check failed; see the JSON report")
    print("\n" + "=" * 80)


def print_suite_summary(summary: dict) -> None:
    """Print one line per check followed by the status totals."""
    print("\n" + "=" * 80)
    print("SUITE - SUMMARY")
    print("=" * 80)
    print(f"Output:         {summary['output_directory']}")

    print("\n" + "-" * 80)
    print("CHECKS:")
    print("-" * 80)
    for check in summary["checks"]:
        status = check["status"]
        symbol = STATUS_SYMBOLS.get(status, "?")
        timing = check.get("execution_time", 0.0)
        print(f"{symbol} {check['name']:<20} {status.upper():<8} {timing:>8.2f}s")
        if status != "pass" or check["message"] == "calibrated":
            print(f"    {check['message']}")

    totals = summary["headline"]
    print("\n" + "-" * 80)
    print("STATISTICS:")
    print("-" * 80)
    for status in ("pass", "fail", "error", "skipped"):
        print(f"{status.capitalize() + ':':<10}{totals.get(status, 0)}")
    print("\n" + "=" * 80)
