"""Entropy structure, relaxed Euler and porous medium solvers"""
