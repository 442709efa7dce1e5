"""
Test suite for Seminorm Lab

This package contains all test files for the Seminorm Lab library and command line.
Tests are organized by suite (core, extended) and can be run individually or through test_runner.py.
"""
