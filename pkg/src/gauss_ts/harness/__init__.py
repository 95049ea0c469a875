"""Experiment specs, output files, verification suites and the CLI."""
