"""Acceptance suites and relaxation-limit sweeps"""
