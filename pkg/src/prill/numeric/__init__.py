"""Numerical analytic continuation of the tower and loop monodromy."""
