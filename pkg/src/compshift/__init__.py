"""Exact models of composition operators as weighted shifts on functional graphs."""
