"""Experiment handler and registry tests."""
