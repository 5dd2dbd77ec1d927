"""
Test suite for Team Align - equilibria, alignment certificates and mediation
"""
