"""Tests for the contact process toolkit"""
