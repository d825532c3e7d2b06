"""Orchestration shared by the command line and the test suite."""
