"""Periodic grids, Littlewood-Paley blocks, Besov norms and paradifferential calculus"""
