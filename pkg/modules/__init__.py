"""Spectral laboratory modules"""
