"""Estimator and batch experiment tests."""
