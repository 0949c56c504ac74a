"""Cooperating constraint solvers with functional-logic and logic languages as solvers."""
